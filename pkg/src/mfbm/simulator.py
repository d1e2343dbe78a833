"""Seeded sampling of the truncated series representation on the ball.

The truncated field at ``x`` with ``s = |x|`` is

    sum_{m <= M} sum_{l <= h(m, N)} sum_{n <= n_max} b_mn(s) S^l_m(x / s) xi^l_mn

with independent standard normals ``xi`` drawn from :mod:`mfbm.rng`.  Terms
are accumulated in fixed ``(m, l, n)`` order with compensated summation.
Work is split over points only, so results do not depend on the number of
threads.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .bases import BasisSpec, CoefficientTable, build_table, coeff_b_vector
from .errors import InsufficientSamplesError, OutsideBallError, ParameterError
from .harmonics import eval_degree, harmonic_count, sphere_area
from .kernel_cov import ModelParams
from .rng import derive_seed, normals

__all__ = [
    "TruncationSpec",
    "FieldSample",
    "CovarianceEstimate",
    "design_matrix",
    "sample_field",
    "sample_replicates",
    "truncated_covariance",
    "truncation_diagnostic",
    "empirical_covariance",
    "write_samples",
    "read_samples",
]

_TERM_BLOCK = 128


@dataclass(frozen=True)
class TruncationSpec:
    """Highest degree ``M`` and number of radial terms ``n_max``.

    ``n_max = 0`` is allowed and gives the empty series.
    """

    M: int
    n_max: int

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 0 or int(self.n_max) != self.n_max or self.n_max < 0:
            raise ParameterError(f"truncation needs integers M >= 0, n_max >= 0, got {self.M}, {self.n_max}")

    def term_count(self, N: int) -> int:
        return sum(harmonic_count(m, N) for m in range(self.M + 1)) * self.n_max


@dataclass(frozen=True, eq=False)
class FieldSample:
    """One realisation at a set of points.

    ``replicate`` is ``None`` for a direct draw with ``seed``; otherwise the
    variates come from ``derive_seed(seed, replicate)``.
    """

    params: ModelParams
    basis: BasisSpec
    truncation: TruncationSpec
    seed: int
    points: np.ndarray
    values: np.ndarray
    replicate: int | None = None

    def metadata(self) -> dict:
        return {
            "N": self.params.N,
            "H": self.params.H,
            "R": self.params.R,
            "basis": self.basis.kind.value,
            "M": self.truncation.M,
            "n_max": self.truncation.n_max,
            "seed": self.seed,
            "replicate": self.replicate,
        }


@dataclass(frozen=True)
class CovarianceEstimate:
    pair: tuple[int, int]
    estimate: float
    standard_error: float


def _check_points(points, p: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.ndim != 2 or pts.shape[1] != p.N:
        raise ParameterError(f"points must have shape (P, {p.N}), got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ParameterError("points must be finite")
    # explicit coordinate loop keeps the radius independent of array layout
    r2 = np.zeros(pts.shape[0])
    for k in range(p.N):
        r2 = r2 + pts[:, k] * pts[:, k]
    radius = np.sqrt(r2)
    bad = np.flatnonzero(radius > p.R * (1 + 1e-12))
    if bad.size:
        i = int(bad[0])
        raise OutsideBallError(
            f"point {i} at distance {radius[i]!r} lies outside the ball of radius {p.R}", index=i
        )
    return pts, np.minimum(radius, p.R)


def _resolve_table(p, basis, trunc, table, threads) -> CoefficientTable:
    if table is not None:
        if table.M < trunc.M or table.n_max < trunc.n_max or table.params != p:
            raise ParameterError("coefficient table does not cover the requested truncation")
        return table
    kind = basis.kind if isinstance(basis, BasisSpec) else basis
    return build_table(p, kind, trunc.M, trunc.n_max, threads=threads)


def _design_rows(table: CoefficientTable, trunc: TruncationSpec, pts, radius) -> np.ndarray:
    P, N = pts.shape
    T = trunc.term_count(N)
    out = np.zeros((P, T))
    if T == 0:
        return out
    live = radius > 0
    dirs = np.zeros_like(pts)
    dirs[:, 0] = 1.0
    dirs[live] = pts[live] / radius[live, None]
    col = 0
    for m in range(trunc.M + 1):
        S = eval_degree(m, dirs)  # (P, h)
        b = np.zeros((P, trunc.n_max))
        for i in np.flatnonzero(live):
            b[i] = coeff_b_vector(table, m, radius[i])[: trunc.n_max]
        h = S.shape[1]
        # columns ordered (l, n) within degree m
        block = S[:, :, None] * b[:, None, :]
        out[:, col: col + h * trunc.n_max] = block.reshape(P, -1)
        col += h * trunc.n_max
    return out


def _term_keys(N: int, trunc: TruncationSpec) -> list[tuple[int, int, int]]:
    return [
        (m, l, n)
        for m in range(trunc.M + 1)
        for l in range(1, harmonic_count(m, N) + 1)
        for n in range(1, trunc.n_max + 1)
    ]


def _chunks(P: int, threads: int) -> list[slice]:
    k = max(1, min(threads, P))
    edges = np.linspace(0, P, k + 1).astype(int)
    return [slice(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def design_matrix(
    p: ModelParams,
    basis,
    trunc: TruncationSpec,
    points,
    *,
    table: CoefficientTable | None = None,
    threads: int = 1,
) -> np.ndarray:
    """Matrix ``B[i, t] = b_mn(|x_i|) S^l_m(x_i / |x_i|)`` over terms ``t = (m, l, n)``."""
    pts, radius = _check_points(points, p)
    table = _resolve_table(p, basis, trunc, table, threads)
    parts = _chunks(pts.shape[0], threads)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        rows = list(ex.map(lambda sl: _design_rows(table, trunc, pts[sl], radius[sl]), parts))
    if not rows:
        return np.zeros((0, trunc.term_count(p.N)))
    return np.concatenate(rows, axis=0)


def _accumulate(B: np.ndarray, keys, seeds: np.ndarray, threads: int) -> np.ndarray:
    """``values[k, i] = sum_t B[i, t] z_t(seed_k)`` in term order, Neumaier-compensated."""
    P, T = B.shape
    K = seeds.size
    total = np.zeros((P, K))
    comp = np.zeros((P, K))
    parts = _chunks(P, threads)

    def step(sl, Z, t0):
        s, c = total[sl], comp[sl]
        for j in range(Z.shape[0]):
            v = B[sl, t0 + j, None] * Z[j][None, :]
            t = s + v
            big = np.abs(s) >= np.abs(v)
            c += np.where(big, (s - t) + v, (v - t) + s)
            s[...] = t

    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        for t0 in range(0, T, _TERM_BLOCK):
            block = keys[t0: t0 + _TERM_BLOCK]
            Z = np.stack([normals(seeds, *key) for key in block]) if block else np.zeros((0, K))
            list(ex.map(lambda sl: step(sl, Z, t0), parts))
    return (total + comp).T


def sample_replicates(
    p: ModelParams,
    basis,
    trunc: TruncationSpec,
    seed: int,
    points,
    replicates: int | Sequence[int],
    *,
    table: CoefficientTable | None = None,
    threads: int = 1,
) -> list[FieldSample]:
    """Independent realisations with seeds ``derive_seed(seed, r)``.

    ``replicates`` is a count or an explicit list of replicate ids.
    """
    ids = list(range(replicates)) if isinstance(replicates, (int, np.integer)) else [int(r) for r in replicates]
    pts, radius = _check_points(points, p)
    table = _resolve_table(p, basis, trunc, table, threads)
    B = design_matrix(p, table.basis, trunc, pts, table=table, threads=threads)
    seeds = np.array([derive_seed(seed, r) for r in ids], dtype=np.uint64)
    vals = _accumulate(B, _term_keys(p.N, trunc), seeds, threads)
    vals[:, radius == 0] = 0.0
    return [
        FieldSample(p, table.basis, trunc, int(seed), pts.copy(), vals[k].copy(), replicate=r)
        for k, r in enumerate(ids)
    ]


def sample_field(
    p: ModelParams,
    basis,
    trunc: TruncationSpec,
    seed: int,
    points,
    *,
    table: CoefficientTable | None = None,
    threads: int = 1,
) -> FieldSample:
    """One realisation of the truncated field at ``points``; the origin maps to 0."""
    pts, radius = _check_points(points, p)
    table = _resolve_table(p, basis, trunc, table, threads)
    B = design_matrix(p, table.basis, trunc, pts, table=table, threads=threads)
    seeds = np.array([int(seed) & ((1 << 64) - 1)], dtype=np.uint64)
    vals = _accumulate(B, _term_keys(p.N, trunc), seeds, threads)[0]
    vals[radius == 0] = 0.0
    return FieldSample(p, table.basis, trunc, int(seed), pts, vals)


def truncated_covariance(
    p: ModelParams,
    basis,
    trunc: TruncationSpec,
    x,
    y,
    *,
    table: CoefficientTable | None = None,
) -> float:
    """Exact covariance ``sum_t B[x, t] B[y, t]`` of the truncated field."""
    B = design_matrix(p, basis, trunc, np.stack([np.asarray(x, float), np.asarray(y, float)]), table=table)
    return math.fsum(B[0] * B[1])


def truncation_diagnostic(
    p: ModelParams,
    basis,
    trunc: TruncationSpec,
    s: float,
    *,
    table: CoefficientTable | None = None,
) -> float:
    """Relative variance deficit ``1 - Var_trunc(s) / s^{2H}`` at radius ``s``, clipped to [0, 1]."""
    s = float(s)
    if not 0 < s <= p.R * (1 + 1e-12):
        raise ParameterError(f"radius must lie in (0, R], got {s}")
    s = min(s, p.R)
    if trunc.n_max == 0:
        return 1.0
    table = _resolve_table(p, basis, trunc, table, 1)
    area = sphere_area(p.N)
    var = math.fsum(
        harmonic_count(m, p.N) / area * math.fsum(coeff_b_vector(table, m, s)[: trunc.n_max] ** 2)
        for m in range(trunc.M + 1)
    )
    return min(1.0, max(0.0, 1.0 - var / s ** (2 * p.H)))


def _as_matrix(samples) -> np.ndarray:
    if isinstance(samples, np.ndarray):
        return np.atleast_2d(samples)
    samples = list(samples)
    if not samples:
        return np.zeros((0, 0))
    first = samples[0].points
    for smp in samples[1:]:
        if smp.points.shape != first.shape or not np.array_equal(smp.points, first):
            raise ParameterError("samples must share a common point set")
    return np.stack([smp.values for smp in samples])


def empirical_covariance(
    samples, pairs: Sequence[tuple[int, int]], *, center: bool = False
) -> list[CovarianceEstimate]:
    """Cross-moment estimates ``mean_k xi_k(x) xi_k(y)`` with standard errors.

    ``samples`` is a list of :class:`FieldSample` on common points or a
    ``(K, P)`` array.  With ``center=True`` sample means are removed first and
    the estimate uses the ``K - 1`` divisor.
    """
    V = _as_matrix(samples)
    K = V.shape[0]
    if K < 2:
        raise InsufficientSamplesError(f"need at least 2 samples, got {K}")
    if center:
        V = V - V.mean(axis=0)
    out = []
    for i, j in pairs:
        prod = V[:, i] * V[:, j]
        est = prod.sum() / (K - 1) if center else prod.mean()
        se = prod.std(ddof=1) / math.sqrt(K)
        out.append(CovarianceEstimate((int(i), int(j)), float(est), float(se)))
    return out


def write_samples(samples: Sequence[FieldSample], path, *, extra_meta: dict | None = None) -> Path:
    """CSV with a one-line JSON header; one column per coordinate, one value column per sample."""
    samples = list(samples)
    if not samples:
        raise ParameterError("nothing to write")
    V = _as_matrix(samples)
    pts = samples[0].points
    meta = dict(samples[0].metadata())
    meta["replicates"] = [smp.replicate for smp in samples]
    if extra_meta:
        meta.update(extra_meta)
    N = pts.shape[1]
    names = [f"x{k + 1}" for k in range(N)]
    names += ["value"] if len(samples) == 1 else [f"value_{smp.replicate}" for smp in samples]
    lines = ["# " + json.dumps(meta, sort_keys=True), ",".join(names)]
    for i in range(pts.shape[0]):
        lines.append(",".join([repr(float(c)) for c in pts[i]] + [repr(float(v)) for v in V[:, i]]))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def read_samples(path) -> tuple[dict, np.ndarray, np.ndarray]:
    """Inverse of :func:`write_samples`: ``(metadata, points, values[K, P])``."""
    text = Path(path).read_text().splitlines()
    meta = json.loads(text[0][2:])
    header = text[1].split(",")
    N = sum(1 for h in header if h.startswith("x"))
    data = np.array([[float(c) for c in ln.split(",")] for ln in text[2:]]).reshape(-1, len(header))
    return meta, data[:, :N], data[:, N:].T.copy()
