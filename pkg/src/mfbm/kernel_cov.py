"""Covariance structure of the multiparameter fBm and its radial Volterra kernels.

The field covariance splits over spherical-harmonic degrees into radial
covariances ``R_m(s, t)``; each of these is the covariance of a Volterra
process with kernel ``a_m(s, u)``.  Closed forms are evaluated here together
with two independent numerical routes used for verification:

* :func:`covariance_rm_volterra` integrates ``a_m(s, u) a_m(t, u)`` over u;
* :func:`covariance_rm_oracle` projects the field covariance onto the
  degree-m Gegenbauer polynomial.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, QuadratureError
from .quadrature import gauss_jacobi, tanh_sinh
from .specfun import gamma, gegenbauer, hyp2f1, log_gamma_ratio

__all__ = [
    "ModelParams",
    "c_nh",
    "kernel_a",
    "covariance_field",
    "covariance_rm",
    "covariance_rm_volterra",
    "covariance_rm_oracle",
]


@dataclass(frozen=True)
class ModelParams:
    """Dimension ``N``, Hurst index ``H`` and ball radius ``R``."""

    N: int
    H: float
    R: float = 1.0

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 2:
            raise ParameterError(f"N must be an integer >= 2, got {self.N!r}")
        if not 0.0 < self.H < 1.0:
            raise ParameterError(f"H must lie in (0, 1), got {self.H!r}")
        if not (self.R > 0.0 and math.isfinite(self.R)):
            raise ParameterError(f"R must be positive, got {self.R!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "H", float(self.H))
        object.__setattr__(self, "R", float(self.R))


def c_nh(p: ModelParams) -> float:
    """Kernel normalising constant ``c_NH``."""
    N, H = p.N, p.H
    return math.sqrt(
        2 * math.pi ** ((N - 2) / 2) * gamma(N / 2 + H) * gamma(H + 1) * math.sin(math.pi * H)
    )


def kernel_a(p: ModelParams, m: int, s: float, u):
    """Volterra kernel ``a_m(s, u)``; zero for ``u >= s``.

    Vectorised over ``u``.
    """
    if m < 0:
        raise ParameterError("degree m must be nonnegative")
    s = float(s)
    u_arr = np.asarray(u, dtype=float)
    if s <= 0 or np.any(u_arr <= 0):
        raise ParameterError("kernel_a requires s > 0 and u > 0")
    N, H = p.N, p.H
    lam = N / 2 + H
    c = c_nh(p) / gamma(lam)
    out = np.zeros_like(u_arr)
    inside = u_arr < s
    ui = u_arr[inside]
    x = (ui / s) ** 2
    # 1 - u^2/s^2 without cancellation near u = s
    xc = (s - ui) * (s + ui) / (s * s)
    if m >= 1:
        out[inside] = c * s ** (2 * H - m) * ui ** (m - H - 0.5) * xc ** (lam - 1)
    else:
        f = np.array([hyp2f1(H, lam - 1, lam, zc_, zc=x_) for zc_, x_ in zip(xc, x)])
        out[inside] = c * ui ** (H - 0.5) * xc ** (lam - 1) * f
    return float(out) if out.ndim == 0 else out


def covariance_field(p: ModelParams, x, y):
    """mfBm covariance ``(|x|^2H + |y|^2H - |x - y|^2H) / 2``; broadcasts over points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    h2 = 2 * p.H
    nx = np.linalg.norm(x, axis=-1)
    ny = np.linalg.norm(y, axis=-1)
    nd = np.linalg.norm(x - y, axis=-1)
    out = 0.5 * (nx**h2 + ny**h2 - nd**h2)
    return float(out) if np.ndim(out) == 0 else out


def covariance_rm(p: ModelParams, m: int, s: float, t: float) -> float:
    """Radial covariance ``R_m(s, t)`` of the degree-m Yadrenko component."""
    if m < 0:
        raise ParameterError("degree m must be nonnegative")
    s, t = float(s), float(t)
    if s <= 0 or t <= 0:
        raise ParameterError("covariance_rm requires s, t > 0")
    N, H = p.N, p.H
    if m == 0:
        lo, hi = min(s, t), max(s, t)
        z = 1.0 if lo == hi else (lo / hi) ** 2
        f = hyp2f1(-H, 1 - H - N / 2, N / 2, z)
        return math.pi ** (N / 2) / gamma(N / 2) * (lo ** (2 * H) + hi ** (2 * H) * (1 - f))
    a, b, c = (N - 1) / 2 + m, m - H, N - 1 + 2 * m
    log_scale = 2 * (H - m) * math.log(s + t) + m * math.log(s * t)
    const = math.pi ** ((N - 2) / 2) * math.sin(math.pi * H)
    if s == t:
        # Gauss's sum at z = 1, merged with the prefactor so large m cannot overflow
        log_g, sign = log_gamma_ratio([m - H, H + 1, c, c - a - b], [N / 2 + m, c - a, c - b])
        return const * sign * math.exp(log_g + log_scale)
    z = min(1.0, 4 * s * t / (s + t) ** 2)
    zc = ((s - t) / (s + t)) ** 2
    f = hyp2f1(a, b, c, z, zc=zc)
    log_g, sign = log_gamma_ratio([m - H, H + 1], [N / 2 + m])
    return const * sign * math.exp(log_g + log_scale) * f


def covariance_rm_volterra(
    p: ModelParams, m: int, s: float, t: float, *, rtol: float = 1e-10
) -> float:
    """``R_m(s, t)`` as the Volterra integral of ``a_m(s, u) a_m(t, u)`` (tanh-sinh)."""
    s, t = float(s), float(t)
    lo = min(s, t)
    res = tanh_sinh(
        lambda u: kernel_a(p, m, s, u) * kernel_a(p, m, t, u), 0.0, lo, atol=0.0, rtol=rtol
    )
    return res.value


def _projection_parts(p: ModelParams, m: int):
    """Constant, Jacobi exponent and polynomial of the degree-m projection."""
    N = p.N
    if N == 2:
        # Chebyshev limit: R_m = 2 int_0^pi R(s, t, cos th) cos(m th) d th
        return 2.0, -0.5, lambda u: np.cos(m * np.arccos(np.clip(u, -1.0, 1.0)))
    lam = (N - 2) / 2
    const = math.exp(
        (N - 2) * math.log(2)
        + lam * math.log(math.pi)
        + math.lgamma(m + 1)
        + math.lgamma(lam)
        - math.lgamma(m + N - 2)
    )
    return const, (N - 3) / 2, lambda u: gegenbauer(lam, m, u)


def covariance_rm_oracle(
    p: ModelParams,
    m: int,
    s: float,
    t: float,
    *,
    atol: float = 1e-11,
    max_nodes: int = 4096,
    return_error: bool = False,
):
    """``R_m(s, t)`` by Gauss-Jacobi quadrature of the Gegenbauer projection of
    the field covariance.

    The node count doubles from 32 until successive estimates agree within
    ``atol``.  On the diagonal the factor ``(1 - u)^H`` of the field
    covariance is moved into the Jacobi weight.
    """
    if m < 0:
        raise ParameterError("degree m must be nonnegative")
    s, t = float(s), float(t)
    if s <= 0 or t <= 0:
        raise ParameterError("covariance_rm_oracle requires s, t > 0")
    H = p.H
    const, alpha, poly = _projection_parts(p, m)

    def rule(n):
        if s == t:
            x0, w0 = gauss_jacobi(n, alpha, alpha)
            x1, w1 = gauss_jacobi(n, alpha + H, alpha)
            smooth = s ** (2 * H) * np.dot(w0, poly(x0))
            sing = 0.5 * (2 * s * s) ** H * np.dot(w1, poly(x1))
            return const * (smooth - sing)
        x0, w0 = gauss_jacobi(n, alpha, alpha)
        cov = 0.5 * (s ** (2 * H) + t ** (2 * H) - (s * s - 2 * s * t * x0 + t * t) ** H)
        return const * np.dot(w0, cov * poly(x0))

    n = 32
    prev = rule(n)
    while n < max_nodes:
        n *= 2
        cur = rule(n)
        err = abs(cur - prev)
        if err <= atol:
            return (float(cur), err) if return_error else float(cur)
        prev = cur
    raise QuadratureError(
        f"Gegenbauer projection for m={m}, s={s}, t={t} reached error {err:.3g} > {atol}",
        estimate=err,
    )
