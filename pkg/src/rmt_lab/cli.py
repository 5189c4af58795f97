"""Command-line front end.

Every subcommand maps its flags onto configuration keys of the same name
(``--ci-level`` is ``ci_level``), merges them over an optional JSON config
file, validates the result against ``config_schema.json`` and hands it to
:func:`execute`. Handlers only call library entry points and collect their
``to_dict`` / ``csv_rows`` output.

Exit codes: 0 success, 1 acceptance failure, 2 invalid configuration,
3 numerical failure.
"""
from __future__ import annotations

import json
import sys
import time
from importlib import resources
from pathlib import Path

import click
import jsonschema
import numpy as np

from rmt_lab import __version__, kernels
from rmt_lab.ensembles import EnsembleSpec, FromFile, parse_base, sample_deformed, uniform_sphere
from rmt_lab.errors import InvalidInput, NumericalError
from rmt_lab.experiments import (
    bernoulli_counterexample,
    dos_scaling_contrast,
    sharpness_scan,
    sharpness_verdict,
    weak_disorder_scan,
)
from rmt_lab.lemmas import (
    RatioProblem,
    char_fn,
    char_fn_mc,
    compute_reorder_r,
    interlacing_scan,
    mc_rank_one_ratio,
    mc_ratio_quadratic,
    mc_small_ball,
    schur_consistency,
    small_ball_matrix,
)
from rmt_lab.linalg import eigh, format_hmat
from rmt_lab.montecarlo import (
    MonteCarloConfig,
    mc_counting_tail,
    mc_dos,
    mc_factorial_moment,
    mc_tail_fixed_vector,
    mc_tail_norms,
    partition_edges,
    wegner_constant,
)
from rmt_lab.report import Report, write_report
from rmt_lab.rng import RngStream, derive_seed

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

SCHEMA = json.loads(resources.files("rmt_lab").joinpath("config_schema.json").read_text())

T_GRID = [1.0, 2.0, 4.0, 8.0, 16.0]
N_GRID = [32, 64, 128, 256]

COMMON = {"ensemble": "goe", "n": 64, "lambda": 1.0, "base": "zero", "samples": 10000, "seed": 0,
          "workers": None, "ci_level": 0.95, "out": None}
_MATRIX = ("ensemble", "n", "lambda", "base")
_MC = ("samples", "seed", "workers", "ci_level")

# command -> (accepted keys, command-specific defaults)
COMMANDS = {
    "sample": (_MATRIX + ("seed", "index"), {"index": 0}),
    "tail-vec": (_MATRIX + _MC + ("t", "phi"), {"t": T_GRID, "phi": "e1"}),
    "tail-norm": (_MATRIX + _MC + ("t",), {"t": T_GRID}),
    "dos": (_MATRIX + _MC + ("partition",), {"partition": "-3:3:60"}),
    "minami-tail": (_MATRIX + _MC + ("interval", "k"), {"interval": [-0.1, 0.1], "k": 2}),
    "minami-moment": (_MATRIX + _MC + ("intervals",), {"intervals": [[-0.1, 0.0], [0.0, 0.1]]}),
    "ratio": (_MC + ("energies", "offsets", "a", "t"),
              {"energies": [2.0, 1.0, 0.5], "offsets": None, "a": 0.0, "t": T_GRID}),
    "rank-one": (_MC + ("a", "b", "t"), {"a": 0.0, "b": 0.0, "t": T_GRID}),
    "small-ball": (_MC + ("n", "q", "field", "eps"),
                   {"n": 32, "q": "random", "field": "real", "eps": [0.02, 0.1, 0.5]}),
    "char-fn": (_MC + ("energies", "offsets", "points", "shifted"),
                {"energies": [2.0, 1.0, 0.5], "offsets": [0.3, 0.0, -1.0], "points": [[0.4, -0.2]],
                 "shifted": False}),
    "schur-check": (_MATRIX + ("seed", "instances"), {"instances": 200}),
    "interlace": (_MATRIX + ("seed", "instances"), {"n": 12, "instances": 100}),
    "sharpness": (_MC + ("ensemble", "case", "n_grid", "epsilon"),
                  {"ensemble": None, "case": "zero_base", "n_grid": N_GRID, "epsilon": 0.1, "samples": 400}),
    "dos-scaling": (_MC + ("ensemble", "n_grid", "epsilon", "width_factor"),
                    {"n_grid": N_GRID, "epsilon": 0.1, "width_factor": 1.0, "samples": 2000}),
    "counterexample": (_MC + ("n", "m_grid", "t"), {"n": 32, "m_grid": [1.0, 10.0, 1e3, 1e6], "t": [1e3]}),
    "weak-disorder": (_MATRIX + _MC + ("lambda_grid", "partition", "t", "phi"),
                      {"lambda_grid": [0.25, 0.5, 1.0, 2.0], "partition": "-3:3:60", "t": [2.0, 4.0, 8.0, 16.0],
                       "phi": "e1", "samples": 2000}),
    "accept": (("seed", "workers", "criteria"), {"seed": 7, "criteria": list(range(1, 15))}),
}


class ConfigError(InvalidInput):
    """The merged configuration is invalid."""


# -- flag grammar ----------------------------------------------------------------------------

def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _pair(text):
    lo, hi = text.split(":")
    return [float(lo), float(hi)]


def _pairs(text):
    return [_pair(x) for x in text.split(",") if x.strip()]


FLAG_PARSERS = {
    "n": int, "samples": int, "seed": int, "workers": int, "index": int, "k": int, "instances": int,
    "lambda": float, "ci_level": float, "a": float, "b": float, "epsilon": float, "width_factor": float,
    "t": _floats, "eps": _floats, "energies": _floats, "offsets": _floats, "m_grid": _floats,
    "lambda_grid": _floats, "n_grid": _ints, "criteria": _ints,
    "interval": _pair, "intervals": _pairs, "points": _pairs,
}


def parse_flag(key: str, text: str):
    """Convert a flag string to the JSON value of config key ``key``."""
    parser = FLAG_PARSERS.get(key)
    if parser is None:
        return text
    try:
        return parser(text)
    except ValueError:
        raise ConfigError(f"--{key.replace('_', '-')}: cannot parse {text!r}") from None


def load_config(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


def resolve_config(command: str, values: dict) -> dict:
    """Validate ``values`` for ``command`` and fill defaults.

    Raises
    ------
    ConfigError
        Schema violation, a key the command does not use, a missing
        referenced file, or a ``command`` entry naming another command.
    """
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    values = {k: v for k, v in values.items() if v is not None}
    given = values.pop("command", command)
    if given != command:
        raise ConfigError(f"config file is for command {given!r}, not {command!r}")
    try:
        jsonschema.validate(values, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or "config"
        raise ConfigError(f"schema error at {where}: {exc.message}") from None
    keys, defaults = COMMANDS[command]
    extra = sorted(set(values) - set(keys) - {"out"})
    if extra:
        raise ConfigError(f"{command} does not use: {', '.join(extra)}")
    cfg = {k: COMMON.get(k) for k in keys}
    cfg.update(defaults)
    cfg.update(values)
    cfg["out"] = values.get("out")
    cfg["command"] = command
    if "base" in cfg:
        spec = parse_base(cfg["base"])
        if isinstance(spec, FromFile) and not Path(spec.path).is_file():
            raise ConfigError(f"base matrix file not found: {spec.path}")
    return cfg


# -- handlers ---------------------------------------------------------------------------------

def _mc(c) -> MonteCarloConfig:
    return MonteCarloConfig(c["samples"], c["seed"], c["workers"], c["ci_level"])


def _spec(c) -> EnsembleSpec:
    return EnsembleSpec(c["ensemble"], c["n"], c["lambda"])


def _base(c):
    return parse_base(c["base"]).build(c["n"])


def _phi(c, field):
    n = c["n"]
    if c["phi"] == "e1":
        phi = np.zeros(n)
        phi[0] = 1.0
        return phi
    if c["phi"] == "ones":
        return np.ones(n) / np.sqrt(n)
    return uniform_sphere(n, field, RngStream(derive_seed(c["seed"], "phi"), 0).generator())


def _edges(text):
    lo, hi, cells = text.split(":")
    try:
        return partition_edges(float(lo), float(hi), int(cells))
    except ValueError:
        raise ConfigError(f"bad partition {text!r}; expected lo:hi:cells") from None


def _inputs(c):
    return {k: v for k, v in c.items() if k not in ("workers", "out")}


def _curve_report(c, curves, fitted):
    rows = [r for cv in curves for r in cv.csv_rows()]
    return Report(c["command"], _inputs(c), {cv.statistic: cv.to_dict() for cv in curves}, c["seed"],
                  fitted, rows)


def _fit_dict(fit):
    return None if fit is None else fit.to_dict()


def run_sample(c):
    spec = _spec(c)
    h = sample_deformed(_base(c), spec, RngStream(c["seed"], c["index"]).generator())
    lam = eigh(h, want_vectors=False).eigenvalues
    rows = [("eigenvalue", str(i), float(x), "", "", 1, c["seed"]) for i, x in enumerate(lam)]
    return Report("sample", _inputs(c), {"field": h.field, "eigenvalues": lam}, c["seed"], {}, rows,
                  attachments={".hmat": format_hmat(h)})


def run_tail_vec(c):
    spec = _spec(c)
    curve = mc_tail_fixed_vector(_base(c), spec, _phi(c, spec.field), c["t"], _mc(c))
    return _curve_report(c, [curve], {"tail_constant": curve.max_scaled(), "decay": _fit_dict(curve.decay_fit())})


def run_tail_norm(c):
    frob, op = mc_tail_norms(_base(c), _spec(c), c["t"], _mc(c))
    return _curve_report(c, [frob, op], {"tail_constant_frobenius": frob.max_scaled(),
                                         "tail_constant_operator": op.max_scaled()})


def run_dos(c):
    dos = mc_dos(_base(c), _spec(c), _edges(c["partition"]), _mc(c))
    return Report("dos", _inputs(c), {"dos": dos.to_dict()}, c["seed"],
                  {"wegner_constant": wegner_constant(dos)}, list(dos.csv_rows()))


def run_minami_tail(c):
    curve = mc_counting_tail(_base(c), _spec(c), c["interval"], c["k"], _mc(c))
    return _curve_report(c, [curve], {})


def run_minami_moment(c):
    res = mc_factorial_moment(_base(c), _spec(c), c["intervals"], _mc(c))
    return Report("minami-moment", _inputs(c), {"factorial_moment": res.to_dict()}, c["seed"], {},
                  list(res.csv_rows()))


def run_ratio(c):
    curve = mc_ratio_quadratic(RatioProblem(c["energies"], c.get("offsets"), c["a"]), c["t"], _mc(c))
    return _curve_report(c, [curve], {"tail_constant": curve.max_scaled()})


def run_rank_one(c):
    curve = mc_rank_one_ratio(c["a"], c["b"], c["t"], _mc(c))
    return _curve_report(c, [curve], {"tail_constant": curve.max_scaled()})


def run_small_ball(c):
    q = small_ball_matrix(c["q"], c["n"], c["field"], c["seed"])
    curve = mc_small_ball(q, c["eps"], c["field"], _mc(c))
    return _curve_report(c, [curve], {"small_ball_constant": curve.max_ratio("ci_lo")})


def run_char_fn(c):
    params = compute_reorder_r(c["energies"], c["offsets"])
    points = [tuple(p) for p in c["points"]]
    exact = [char_fn(params, xi, eta, shifted=c["shifted"]) for xi, eta in points]
    results = {"r": params.r, "nu2": params.nu2, "delta": params.delta, "order": params.order,
               "points": points, "exact": [complex(z) for z in exact]}
    rows = []
    mc = None
    if not c["shifted"]:
        mc = char_fn_mc(params, points, _mc(c))
        results["monte_carlo"] = [complex(z) for z in mc]
        results["tolerance"] = 5.0 / np.sqrt(c["samples"])
    for i, (xi, eta) in enumerate(points):
        label = f"{xi!r}:{eta!r}"
        for part, f in (("re", np.real), ("im", np.imag)):
            rows.append((f"char_fn_{part}", label, float(f(exact[i])), "", "", 0, c["seed"]))
            if mc is not None:
                v = float(f(mc[i]))
                tol = results["tolerance"]
                rows.append((f"char_fn_mc_{part}", label, v, v - tol, v + tol, c["samples"], c["seed"]))
    return Report("char-fn", _inputs(c), results, c["seed"], {}, rows)


def run_schur_check(c):
    res = schur_consistency(_base(c), _spec(c), c["instances"], c["seed"])
    return Report("schur-check", _inputs(c), res.to_dict(), c["seed"], {}, list(res.csv_rows()))


def run_interlace(c):
    res = interlacing_scan(_base(c), _spec(c), c["instances"], c["seed"])
    return Report("interlace", _inputs(c), res.to_dict(), c["seed"], {}, list(res.csv_rows()))


def run_sharpness(c):
    res = sharpness_scan(c["case"], c["n_grid"], _mc(c), c["epsilon"], c["ensemble"])
    ok, details = sharpness_verdict(res)
    return Report("sharpness", _inputs(c), {"sharpness": res.to_dict(), "windows": details}, c["seed"],
                  {k: v.to_dict() for k, v in res.fits.items()}, list(res.csv_rows()), ok)


def run_dos_scaling(c):
    res = dos_scaling_contrast(c["epsilon"], c["n_grid"], _mc(c), c.get("ensemble") or "goe", c["width_factor"])
    return Report("dos-scaling", _inputs(c), res.to_dict(), c["seed"],
                  {k: v.to_dict() for k, v in res.fits.items()}, list(res.csv_rows()))


def run_counterexample(c):
    if len(c["t"]) != 1:
        raise ConfigError("counterexample takes a single threshold t")
    res = bernoulli_counterexample(c["n"], c["m_grid"], c["t"][0], _mc(c))
    return Report("counterexample", _inputs(c), res.to_dict(), c["seed"], {}, list(res.csv_rows()))


def run_weak_disorder(c):
    base = _base(c)
    spec = _spec(c)
    res = weak_disorder_scan(base, c["lambda_grid"], _mc(c), c["ensemble"], _edges(c["partition"]), c["t"],
                             _phi(c, spec.field))
    return Report("weak-disorder", _inputs(c), res.to_dict(), c["seed"], {"sup_density_fit": _fit_dict(res.fit)},
                  list(res.csv_rows()))


def run_accept(c):
    from rmt_lab.acceptance import run_criteria

    outcomes = run_criteria(c["criteria"], seed=c["seed"], max_workers=c["workers"],
                            echo=lambda line: print(line, file=sys.stderr))
    rows = [(f"criterion_{o.number}", o.name, 1.0 if o.passed else 0.0, "", "", 1, c["seed"]) for o in outcomes]
    results = {str(o.number): o.to_dict() for o in outcomes}
    return Report("accept", _inputs(c), results, c["seed"], {}, rows, all(o.passed for o in outcomes))


HANDLERS = {
    "sample": run_sample, "tail-vec": run_tail_vec, "tail-norm": run_tail_norm, "dos": run_dos,
    "minami-tail": run_minami_tail, "minami-moment": run_minami_moment, "ratio": run_ratio,
    "rank-one": run_rank_one, "small-ball": run_small_ball, "char-fn": run_char_fn,
    "schur-check": run_schur_check, "interlace": run_interlace, "sharpness": run_sharpness,
    "dos-scaling": run_dos_scaling, "counterexample": run_counterexample, "weak-disorder": run_weak_disorder,
    "accept": run_accept,
}


def run_config(command: str, values: dict) -> Report:
    """Resolve and run a configuration, returning the report without writing anything."""
    return HANDLERS[command](resolve_config(command, values))


def execute(command: str, values: dict, stdout=None, stderr=None) -> int:
    """Run ``command`` with configuration ``values`` and write its outputs.

    With ``out`` set, writes ``<out>.json``, ``<out>.csv`` and
    ``<out>.run.json`` (wall clock, workers, backend), plus ``<out>.hmat``
    for ``sample``; otherwise prints the CSV to ``stdout``. Returns the exit
    code.
    """
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    start = time.perf_counter()
    try:
        cfg = resolve_config(command, values)
        report = HANDLERS[command](cfg)
    except NumericalError as exc:
        print(f"error: numerical failure: {exc}", file=stderr)
        return EXIT_NUMERICAL
    except InvalidInput as exc:
        print(f"error: invalid configuration: {exc}", file=stderr)
        return EXIT_CONFIG
    elapsed = time.perf_counter() - start
    out = cfg["out"]
    if out is None:
        stdout.write(report.to_csv())
    else:
        workers = cfg.get("workers") or MonteCarloConfig(1).max_workers
        run_info = {"wall_clock_s": elapsed, "max_workers": workers, "backend": kernels.BACKEND,
                    "version": __version__}
        try:
            paths = write_report(report, out, run_info)
        except OSError as exc:
            print(f"error: cannot write outputs: {exc}", file=stderr)
            return EXIT_CONFIG
        for p in paths:
            print(p, file=stderr)
    if report.passed is False:
        return EXIT_FAILED
    return EXIT_OK


# -- click wiring ---------------------------------------------------------------------------

def _make_command(name):
    keys = COMMANDS[name][0]

    def callback(config, **flags):
        values = load_config(config) if config else {}
        for key in keys + ("out",):
            dest = key if key != "lambda" else "lambda_"
            raw = flags.get(dest)
            if raw is None:
                continue
            values[key] = raw if key == "shifted" else parse_flag(key, raw)
        code = execute(name, values)
        raise SystemExit(code)

    params = [click.Option(["--config"], type=click.Path(), default=None, help="JSON config file.")]
    for key in keys + ("out",):
        flag = "--" + key.replace("_", "-")
        dest = key if key != "lambda" else "lambda_"
        if key == "shifted":
            params.append(click.Option([f"{flag}/--no-shifted", dest], default=None))
        else:
            params.append(click.Option([flag, dest], type=str, default=None, metavar=key.upper()))
    return click.Command(name, callback=_wrap_errors(callback), params=params, help=_HELP[name])


def _wrap_errors(fn):
    def inner(**kwargs):
        try:
            fn(**kwargs)
        except ConfigError as exc:
            click.echo(f"error: invalid configuration: {exc}", err=True)
            raise SystemExit(EXIT_CONFIG) from None
    return inner


_HELP = {
    "sample": "Draw one deformed matrix; --out also writes it as <out>.hmat.",
    "tail-vec": "Tail of ||H^-1 phi|| / (sqrt(N) ||phi||).",
    "tail-norm": "Tails of the Frobenius and operator norms of H^-1 at thresholds tN.",
    "dos": "Mean density of states on a partition lo:hi:cells.",
    "minami-tail": "P{at least k eigenvalues in an interval}.",
    "minami-moment": "Factorial moment of counts in disjoint intervals.",
    "ratio": "Tail of the diagonal ratio of quadratic forms.",
    "rank-one": "Tail of the rank-one ratio |h+b| / |(h+b)^2 - a|.",
    "small-ball": "Small-ball probabilities of ||Q phi|| for phi on the sphere.",
    "char-fn": "Closed-form and Monte Carlo joint characteristic function.",
    "schur-check": "Block-formula versus direct ||H^-1 e_1|| on seeded instances.",
    "interlace": "Interlacing of compressions on seeded (H, phi) pairs.",
    "sharpness": "Medians of dist(0, spec), overlap and resolvent ratio against N.",
    "dos-scaling": "Band-centre count density against N for the two cases.",
    "counterexample": "Operator-norm tail for the Bernoulli counterexample.",
    "weak-disorder": "Density and tail constants as lambda varies.",
    "accept": "Run the acceptance suite.",
}


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__)
def cli():
    """Deformed random-matrix experiments."""


for _name in COMMANDS:
    cli.add_command(_make_command(_name))


def main(argv=None):
    try:
        cli.main(args=argv, prog_name="rmt-lab", standalone_mode=False)
    except click.exceptions.UsageError as exc:
        exc.show()
        return EXIT_CONFIG
    except click.exceptions.Abort:
        return EXIT_FAILED
    except SystemExit as exc:
        return int(exc.code or 0)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
