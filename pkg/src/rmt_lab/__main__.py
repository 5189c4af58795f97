import sys

from rmt_lab.cli import main

sys.exit(main())
