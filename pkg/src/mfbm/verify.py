"""Oracle checks run by ``mfbm verify``.

Every check compares a production routine with an independent route and
reports the worst measured error against a named tolerance.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .bases import basis_eval, build_table, coeff_b_vector, parseval_partial
from .harmonics import enumerate_indices, eval_degree, harmonic_count, sphere_quadrature
from .kernel_cov import ModelParams, covariance_rm, covariance_rm_oracle, covariance_rm_volterra, kernel_a
from .quadrature import tanh_sinh
from .specfun import bessel_j, bessel_j_zeros, hyp2f1

__all__ = ["DEFAULT_TOLERANCES", "CheckResult", "run_checks"]

DEFAULT_TOLERANCES = {
    "volterra_rel": 1e-6,
    "projection_rel": 1e-6,
    "closed_point_abs": 1e-9,
    "coefficient_abs": 1e-8,
    "orthonormality_abs": 1e-8,
    "parseval_gap": 1e-2,
    "gram_abs": 1e-8,
    "bessel_zero_abs": 1e-12,
    "hyp2f1_rel": 1e-12,
}

_DEGREES = (0, 1, 2, 5)
_PAIRS = ((0.3, 0.7), (0.5, 0.5), (1.0, 0.2))


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    tolerance: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _result(name, measured, tolerances, detail="", extra_ok=True) -> CheckResult:
    tol = tolerances[name]
    return CheckResult(name, float(measured), float(tol), bool(measured <= tol and extra_ok), detail)


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def check_volterra(p: ModelParams, tol) -> CheckResult:
    worst = max(
        _rel(covariance_rm_volterra(p, m, s * p.R, t * p.R), covariance_rm(p, m, s * p.R, t * p.R))
        for m in _DEGREES
        for s, t in _PAIRS
    )
    return _result("volterra_rel", worst, tol, "Volterra integral vs closed form")


def check_projection(p: ModelParams, tol) -> CheckResult:
    worst = max(
        _rel(covariance_rm_oracle(p, m, s * p.R, t * p.R), covariance_rm(p, m, s * p.R, t * p.R))
        for m in _DEGREES
        for s, t in _PAIRS
    )
    return _result("projection_rel", worst, tol, "Gegenbauer projection vs closed form")


def check_closed_point(tol) -> CheckResult:
    # N = 3, H = 1/2, m = 0, s = t = 1 gives 4 pi / 3
    val = covariance_rm(ModelParams(3, 0.5), 0, 1.0, 1.0)
    return _result("closed_point_abs", abs(val - 4 * math.pi / 3), tol, "R_0(1, 1) at N=3, H=1/2")


def check_coefficients(p: ModelParams, tol, M: int = 5, n_max: int = 10) -> CheckResult:
    table = build_table(p, "fourier_bessel", M, n_max)
    worst = 0.0
    for m in range(M + 1):
        for s in (0.2 * p.R, 0.7 * p.R, p.R):
            closed = coeff_b_vector(table, m, s)

            def integrand(u, m=m, s=s):
                cols = np.stack([basis_eval(table.basis, m, n, u) for n in range(1, n_max + 1)], axis=1)
                return kernel_a(p, m, s, u)[:, None] * cols

            quad = tanh_sinh(integrand, 0.0, s, atol=1e-13, rtol=1e-13).value
            worst = max(worst, float(np.max(np.abs(quad - closed))))
    return _result("coefficient_abs", worst, tol, "Fourier-Bessel closed form vs quadrature")


def check_orthonormality(p: ModelParams, tol, n_max: int = 8) -> CheckResult:
    worst = 0.0
    for kind in ("fourier_bessel", "shifted_legendre"):
        spec = build_table(p, kind, 2, 1).basis
        for m in (0, 1, 2):

            def integrand(u, m=m):
                E = np.stack([basis_eval(spec, m, n, u) for n in range(1, n_max + 1)], axis=1)
                return E[:, :, None] * E[:, None, :]

            G = tanh_sinh(integrand, 0.0, p.R, atol=1e-12, rtol=1e-12).value
            worst = max(worst, float(np.max(np.abs(G - np.eye(n_max)))))
    return _result("orthonormality_abs", worst, tol, "radial basis Gram matrices, n <= 8")


def check_parseval(p: ModelParams, tol, n_cut: int = 200) -> CheckResult:
    table = build_table(p, "fourier_bessel", 3, n_cut)
    s = 0.5 * p.R
    worst = 0.0
    ok = True
    for m in range(4):
        b2 = coeff_b_vector(table, m, s) ** 2
        partial = np.cumsum(b2)
        rm = covariance_rm(p, m, s, s)
        ok &= bool(np.all(np.diff(partial) >= 0) and partial[-1] <= rm * (1 + 1e-9))
        worst = max(worst, abs(1 - parseval_partial(table, m, s, s, n_cut) / rm))
    return _result("parseval_gap", worst, tol, f"relative gap at n={n_cut}, monotone and bounded: {ok}", ok)


def check_gram(N: int, tol, max_degree: int | None = None) -> CheckResult:
    if max_degree is None:
        max_degree = 6 if N <= 3 else 3
    pts, w = sphere_quadrature(N, max_degree + 2)
    Y = np.concatenate([eval_degree(m, pts) for m in range(max_degree + 1)], axis=1)
    G = (Y * w[:, None]).T @ Y
    counts_ok = all(len(enumerate_indices(m, N)) == harmonic_count(m, N) for m in range(max_degree + 1))
    err = float(np.max(np.abs(G - np.eye(G.shape[0]))))
    return _result("gram_abs", err, tol, f"harmonics m <= {max_degree}, counts ok: {counts_ok}", counts_ok)


def check_bessel_zeros(p: ModelParams, tol, M: int = 6, count: int = 40) -> CheckResult:
    worst = 0.0
    ok = True
    for m in range(M + 1):
        nu = abs(m - 1) - p.H
        j = bessel_j_zeros(nu, count)
        j1 = bessel_j_zeros(nu + 1, count)
        worst = max(worst, float(np.max(np.abs(bessel_j(nu, j)))))
        ok &= bool(np.all(np.diff(j) > 0) and np.all(j[:-1] < j1[:-1]) and np.all(j1[:-1] < j[1:]))
    return _result("bessel_zero_abs", worst, tol, f"|J_nu(j)|, monotone and interlaced: {ok}", ok)


def _brute_series(a, b, c, z, max_terms=200000):
    terms = [1.0]
    term = 1.0
    for k in range(max_terms):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        terms.append(term)
        if abs(term) < 1e-18 * abs(math.fsum(terms[-50:])) and k > 10:
            break
    return math.fsum(terms)


def check_hyp2f1(p: ModelParams, tol) -> CheckResult:
    N, H = p.N, p.H
    params = [(-H, 1 - H - N / 2, N / 2)] + [((N - 1) / 2 + m, m - H, N - 1 + 2 * m) for m in (1, 2, 5)]
    worst = 0.0
    for a, b, c in params:
        for z in (0.0, 0.1, 0.5, 0.75, 0.9, 0.99, 0.999):
            worst = max(worst, _rel(hyp2f1(a, b, c, z), _brute_series(a, b, c, z)))
    return _result("hyp2f1_rel", worst, tol, "2F1 vs brute-force series on [0, 0.999]")


def run_checks(p: ModelParams, tolerances: dict | None = None) -> list[CheckResult]:
    """Run every check at the model parameters ``p`` (radii scale with ``p.R``)."""
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    return [
        check_volterra(p, tol),
        check_projection(p, tol),
        check_closed_point(tol),
        check_coefficients(p, tol),
        check_orthonormality(p, tol),
        check_parseval(p, tol),
        check_gram(p.N, tol),
        check_bessel_zeros(p, tol),
        check_hyp2f1(p, tol),
    ]
