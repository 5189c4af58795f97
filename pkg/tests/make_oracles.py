"""Regenerate ``tests/data/oracles.json``.

Every value here comes from a route that does not touch the library code it
is checked against: bisection on the binomial CDF, 1-d numerical quadrature
against the Gaussian density, explicit matrix inversion, chi-square and
normal CDFs. Run ``python tests/make_oracles.py`` to refresh the file.
"""
import json
import math
from pathlib import Path

import numpy as np
from scipy import integrate, optimize, stats

OUT = Path(__file__).with_name("data") / "oracles.json"


def cp_bisection(k, n, level):
    alpha = 1.0 - level
    if k == 0:
        lo = 0.0
    else:
        lo = optimize.brentq(lambda p: stats.binom.sf(k - 1, n, p) - alpha / 2, 1e-15, 1 - 1e-15, xtol=1e-15)
    if k == n:
        hi = 1.0
    else:
        hi = optimize.brentq(lambda p: stats.binom.cdf(k, n, p) - alpha / 2, 1e-15, 1 - 1e-15, xtol=1e-15)
    return lo, hi


def quad_cf(alpha, beta):
    """``E exp(i alpha (h + beta)^2)`` for standard normal ``h`` by adaptive quadrature.

    ``alpha`` may be complex with ``Im alpha > -1/2``; the Gaussian weight is
    folded into the exponent so the integrand never overflows.
    """
    f = lambda x: np.exp(1j * alpha * (x + beta) ** 2 - x * x / 2) / math.sqrt(2 * math.pi)  # noqa: E731
    re = integrate.quad(lambda x: f(x).real, -np.inf, np.inf, limit=400, epsabs=1e-13)[0]
    im = integrate.quad(lambda x: f(x).imag, -np.inf, np.inf, limit=400, epsabs=1e-13)[0]
    return complex(re, im)


def char_fn_product(energies, offsets, r, xi, eta, delta=0.0):
    """``E exp(i((xi - i delta) X + eta Y))`` as a product of 1-d expectations."""
    out = complex(1.0)
    for j, (e, b) in enumerate(zip(energies, offsets)):
        c = eta * e
        if j >= r:
            c = c + (xi - 1j * delta) * e**2
        out *= quad_cf(c, b)
    return out


def main():
    data = {}
    lo, hi = cp_bisection(5, 50, 0.95)
    data["clopper_pearson_5_50"] = [lo, hi]
    lo, hi = cp_bisection(17, 1000, 0.99)
    data["clopper_pearson_17_1000_99"] = [lo, hi]

    z = quad_cf(0.7, 1.3)
    data["gaussian_quad_cf_0.7_1.3"] = [z.real, z.imag]
    z = quad_cf(complex(0.3, 0.2), -0.8)
    data["gaussian_quad_cf_0.3+0.2j_-0.8"] = [z.real, z.imag]

    # E = (2, 1, 0.5), b = (0.3, 0, -1): keys 4.36, 1, 0.5 -> r = 2 after sorting
    energies, offsets = [2.0, 1.0, 0.5], [0.3, 0.0, -1.0]
    z = char_fn_product(energies, offsets, 2, 0.4, -0.2)
    data["char_fn_e210.5_b0.30-1_0.4_-0.2"] = [z.real, z.imag]
    # keys 1.04, 0.64, 0.3636, 0.29 (already descending): 1.04 > 0.12936 and 0.64 > 0.06536 -> r = 2
    energies, offsets = [1.0, -0.8, 0.6, 0.5], [0.2, 0.0, 0.1, -0.4]
    nu2 = 0.6**2 * 1.01 + 0.5**2 * 1.16
    z = char_fn_product(energies, offsets, 2, 0.9, 0.3, delta=1.0 / (10 * nu2))
    data["char_fn_shifted_r2"] = [z.real, z.imag]
    z = char_fn_product(energies, offsets, 2, 0.9, 0.3)
    data["char_fn_unshifted_r2"] = [z.real, z.imag]
    # twelve unit energies: the largest key is at most a tenth of the rest -> r = 0
    offsets = list(np.linspace(-0.3, 0.3, 12))
    energies = [1.0] * 12
    nu2 = sum(1 + b * b for b in offsets)
    z = char_fn_product(energies, offsets, 0, 0.25, -0.4, delta=1.0 / (10 * nu2))
    data["char_fn_shifted_r0"] = [z.real, z.imag]
    data["char_fn_r0_nu2"] = nu2

    t = np.array([1.0, 2.0, 4.0, 8.0])
    data["rank_one_exact_t1248"] = list(2 * stats.norm.cdf(1 / t) - 1)
    t8 = np.array([1.0, 1.05, 1.1, 1.2])
    data["chi8_cdf"] = list(stats.chi2.cdf(1 / t8**2, 8))

    # explicit inverse of a fixed symmetric 4x4
    a = np.array([[2.0, 0.5, 0.0, -0.3], [0.5, -1.0, 0.7, 0.0], [0.0, 0.7, 0.4, 0.2], [-0.3, 0.0, 0.2, 1.5]])
    inv = np.linalg.inv(a)
    data["inverse_4x4"] = {"matrix": a.tolist(), "frobenius": float(np.linalg.norm(inv)),
                           "operator": float(np.linalg.norm(inv, 2)),
                           "column_1_norm": float(np.linalg.norm(inv[:, 0]))}
    # rank-one small-ball: P{|phi_1| <= eps/sqrt(n)} for phi uniform on S^{n-1} (real),
    # phi_1^2 ~ Beta(1/2, (n-1)/2)
    n, eps = 16, 0.2
    data["small_ball_rank_one_real_16_0.2"] = float(stats.beta.cdf(eps**2 / n, 0.5, (n - 1) / 2))
    # complex sphere: |phi_1|^2 ~ Beta(1, n-1)
    data["small_ball_rank_one_complex_16_0.2"] = float(stats.beta.cdf(eps**2 / n, 1.0, n - 1))
    data["semicircle_density_at_0"] = 1 / math.pi

    OUT.parent.mkdir(exist_ok=True)
    OUT.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
