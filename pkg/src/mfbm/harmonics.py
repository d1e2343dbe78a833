"""Real spherical harmonics on the sphere S^{N-1}, N >= 2.

Harmonics are labelled by a non-increasing chain ``m = m_0 >= m_1 >= ...
>= m_{N-2} >= 0`` plus a sign.  They are built from products of
Gegenbauer polynomials in the coordinates, written in homogeneous
polynomial form so that no ratio ``x_{k+1} / r_k`` is ever formed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ParameterError
from .quadrature import gauss_jacobi

__all__ = [
    "HarmonicIndex",
    "harmonic_count",
    "enumerate_indices",
    "normalization",
    "eval_harmonic",
    "eval_degree",
    "sphere_area",
    "sphere_quadrature",
    "zonal_sum",
]

_INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class HarmonicIndex:
    """Label of one real spherical harmonic of degree ``degree``.

    ``chain`` holds ``(m_1, ..., m_{N-2})``; it is empty for N = 2, in which
    case the last chain entry is the degree itself.  ``sign`` is +1 or -1.
    """

    degree: int
    chain: tuple[int, ...]
    sign: int
    linear_index: int

    @property
    def full_chain(self) -> tuple[int, ...]:
        return (self.degree,) + self.chain

    @property
    def last(self) -> int:
        return self.full_chain[-1]


def _check_dim(N: int) -> None:
    if int(N) != N or N < 2:
        raise ParameterError(f"dimension N must be an integer >= 2, got {N}")


def harmonic_count(m: int, N: int) -> int:
    """Number ``h(m, N)`` of real spherical harmonics of degree ``m`` on S^{N-1}."""
    _check_dim(N)
    if m < 0:
        raise ParameterError("degree must be nonnegative")
    if m == 0:
        return 1
    # homogeneous polynomials of degree m minus those of degree m - 2
    h = math.comb(m + N - 1, N - 1) - math.comb(m + N - 3, N - 1)
    if h > _INT64_MAX:
        raise OverflowError(f"h({m}, {N}) = {h} exceeds the 64-bit range")
    return h


def _chains(m: int, length: int):
    if length == 0:
        yield ()
        return
    for first in range(m + 1):
        for rest in _chains(first, length - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _enumerate(m: int, N: int) -> tuple[HarmonicIndex, ...]:
    out = []
    for chain in _chains(m, N - 2):
        last = ((m,) + chain)[-1]
        for sign in ((1, -1) if last > 0 else (1,)):
            out.append(HarmonicIndex(m, chain, sign, len(out) + 1))
    return tuple(out)


def enumerate_indices(m: int, N: int) -> list[HarmonicIndex]:
    """All indices of degree ``m`` in lexicographic order of ``(m_0, ..., m_{N-2}, sign)``.

    The sign is the last key with ``+`` before ``-``.
    """
    _check_dim(N)
    if m < 0:
        raise ParameterError("degree must be nonnegative")
    return list(_enumerate(int(m), int(N)))


def normalization(idx: HarmonicIndex, N: int) -> float:
    """Squared L2(S^{N-1}) norm ``L(m_k)`` of the complex harmonic for ``idx``."""
    mk = idx.full_chain
    if len(mk) != N - 1:
        raise ParameterError(f"index chain length {len(mk)} does not match N={N}")
    log = math.log(2 * math.pi)
    for k in range(1, N - 1):
        prev, cur = mk[k - 1], mk[k]
        half = (N - 1 - k) / 2
        log += (
            math.log(math.pi)
            + (k - 2 * cur - N + 2) * math.log(2)
            + math.lgamma(prev + cur + N - 1 - k)
            - math.log(prev + half)
            - math.lgamma(prev - cur + 1)
            - 2 * math.lgamma(cur + half)
        )
    return math.exp(log)


def sphere_area(N: int) -> float:
    """Surface area of the unit sphere S^{N-1}."""
    return 2 * math.pi ** (N / 2) / math.gamma(N / 2)


@lru_cache(maxsize=None)
def _homogeneous_gegenbauer(lam: float, d: int) -> tuple[tuple[int, float], ...]:
    # r^d C^lam_d(x/r) = sum_j coef_j x^{d-2j} (r^2)^j
    out = []
    for j in range(d // 2 + 1):
        logc = math.lgamma(d - j + lam) - math.lgamma(lam) - math.lgamma(j + 1) - math.lgamma(d - 2 * j + 1)
        out.append((j, (-1) ** j * 2.0 ** (d - 2 * j) * math.exp(logc)))
    return tuple(out)


def _as_points(x, N: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != N:
        raise ParameterError(f"points must have last dimension {N}, got shape {x.shape}")
    return x


def _complex_harmonic(mk: tuple[int, ...], x: np.ndarray) -> np.ndarray:
    """H(m_k, +, x) for points of shape (..., N); homogeneous of degree m_0."""
    N = x.shape[-1]
    # tail[k] = r_k^2 = x_{k+1}^2 + ... + x_N^2 (1-based coordinates)
    sq = x * x
    tail = np.flip(np.cumsum(np.flip(sq, axis=-1), axis=-1), axis=-1)
    out = np.ones(x.shape[:-1], dtype=complex)
    for k in range(N - 2):
        d = mk[k] - mk[k + 1]
        if d == 0:
            continue
        lam = mk[k + 1] + (N - k - 2) / 2
        xk = x[..., k]
        rk2 = tail[..., k]
        acc = np.zeros(x.shape[:-1])
        for j, coef in _homogeneous_gegenbauer(lam, d):
            acc = acc + coef * xk ** (d - 2 * j) * rk2**j
        out = out * acc
    base = x[..., N - 2] + 1j * x[..., N - 1]
    p = mk[N - 2]
    power = np.ones_like(base)
    for _ in range(p):
        power = power * base
    return out * power


def eval_harmonic(idx: HarmonicIndex, x) -> np.ndarray | float:
    """Value of the real orthonormal harmonic ``S^l_m`` at unit vector(s) ``x``."""
    x = np.asarray(x, dtype=float)
    N = x.shape[-1]
    x = _as_points(x, N)
    norms = np.linalg.norm(x, axis=-1)
    if np.any(np.abs(norms - 1.0) > 1e-12):
        raise ParameterError("eval_harmonic expects unit vectors (|x| = 1 within 1e-12)")
    mk = idx.full_chain
    if len(mk) != N - 1:
        raise ParameterError(f"index chain length {len(mk)} does not match N={N}")
    y = _complex_harmonic(mk, x) / math.sqrt(normalization(idx, N))
    if mk[-1] == 0:
        val = y.real
    elif idx.sign > 0:
        val = math.sqrt(2) * y.real
    else:
        # -sqrt2 Im Y(-) equals sqrt2 Im Y(+)
        val = math.sqrt(2) * y.imag
    return float(val) if val.ndim == 0 else val


def eval_degree(m: int, x: np.ndarray) -> np.ndarray:
    """All ``h(m, N)`` harmonics of degree ``m`` at points ``x`` of shape (P, N).

    Returns an array of shape (P, h(m, N)) in linear-index order.  Rows for
    non-unit points are evaluated as-is (callers pass unit vectors).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    N = x.shape[-1]
    idxs = _enumerate(int(m), N)
    out = np.empty((x.shape[0], len(idxs)))
    cache: dict[tuple[int, ...], np.ndarray] = {}
    for col, idx in enumerate(idxs):
        mk = idx.full_chain
        if mk not in cache:
            cache[mk] = _complex_harmonic(mk, x) / math.sqrt(normalization(idx, N))
        y = cache[mk]
        if mk[-1] == 0:
            out[:, col] = y.real
        elif idx.sign > 0:
            out[:, col] = math.sqrt(2) * y.real
        else:
            out[:, col] = math.sqrt(2) * y.imag
    return out


def zonal_sum(m: int, N: int, cos_angle) -> np.ndarray | float:
    """Closed form of ``sum_l S^l_m(x) S^l_m(y)`` as a function of ``x . y``."""
    u = np.asarray(cos_angle, dtype=float)
    h = harmonic_count(m, N)
    if N == 2:
        val = (np.cos(m * np.arccos(np.clip(u, -1, 1))) if m else np.ones_like(u)) * h / (2 * math.pi)
    else:
        from .specfun import gegenbauer

        lam = (N - 2) / 2
        c1 = math.exp(math.lgamma(m + 2 * lam) - math.lgamma(m + 1) - math.lgamma(2 * lam))
        val = h / sphere_area(N) * np.asarray(gegenbauer(lam, m, u)) / c1
    return float(val) if np.ndim(val) == 0 else val


def sphere_quadrature(N: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Product rule on S^{N-1}, exact for polynomials of degree < ``order``.

    Built recursively: ``x = (t, sqrt(1-t^2) y)`` with ``y`` on S^{N-2}, ``t``
    from Gauss-Jacobi with weight ``(1-t^2)^{(N-3)/2}``; S^1 uses an
    equispaced angle grid of ``2 * order`` points.
    """
    _check_dim(N)
    if N == 2:
        n = 2 * order
        phi = 2 * math.pi * np.arange(n) / n
        return np.stack([np.cos(phi), np.sin(phi)], axis=-1), np.full(n, 2 * math.pi / n)
    y, wy = sphere_quadrature(N - 1, order)
    a = (N - 3) / 2
    t, wt = gauss_jacobi(order, a, a)
    s = np.sqrt(1 - t * t)
    pts = np.concatenate(
        [np.repeat(t, len(y))[:, None], (s[:, None, None] * y[None, :, :]).reshape(-1, N - 1)], axis=1
    )
    w = (wt[:, None] * wy[None, :]).ravel()
    return pts, w
