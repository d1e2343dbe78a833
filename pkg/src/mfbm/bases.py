"""Radial L2[0, R] bases and the coefficient functions b_mn(s).

Two bases are provided:

``fourier_bessel``
    ``sqrt(2u) J_nu(j_{nu,n} u / R) / (R J_{nu+1}(j_{nu,n}))`` with the
    degree-dependent order ``nu_m = |m - 1| - H``.  Coefficients have a closed
    form in terms of ``J_{m + (N-2)/2}``.
``shifted_legendre``
    ``sqrt((2n - 1) / R) P_{n-1}(2u/R - 1)``; coefficients are computed by
    tanh-sinh quadrature of the kernel against the basis, so this path also
    serves any other basis.
"""
from __future__ import annotations

import csv
import enum
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .kernel_cov import ModelParams, kernel_a
from .quadrature import tanh_sinh
from .specfun import bessel_j, bessel_j_zeros, gamma, legendre

__all__ = [
    "BasisKind",
    "BasisSpec",
    "CoefficientTable",
    "build_table",
    "basis_eval",
    "coeff_b",
    "coeff_b_vector",
    "parseval_partial",
    "write_table",
    "read_table",
]

FORMAT_VERSION = 1


class BasisKind(str, enum.Enum):
    FOURIER_BESSEL = "fourier_bessel"
    SHIFTED_LEGENDRE = "shifted_legendre"


@dataclass(frozen=True)
class BasisSpec:
    """Which radial basis is in force on ``[0, R]``.

    The Fourier-Bessel orders depend on ``H``, so that basis needs it.
    """

    kind: BasisKind
    R: float = 1.0
    H: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", BasisKind(self.kind))
        if not self.R > 0:
            raise ParameterError(f"R must be positive, got {self.R!r}")
        if self.kind is BasisKind.FOURIER_BESSEL and (self.H is None or not 0 < self.H < 1):
            raise ParameterError("the Fourier-Bessel basis needs H in (0, 1)")

    @classmethod
    def for_params(cls, kind, p: ModelParams) -> "BasisSpec":
        return cls(BasisKind(kind), p.R, p.H)

    def order(self, m: int) -> float:
        """Bessel order ``|m - 1| - H`` used for degree ``m``."""
        return abs(m - 1) - self.H


def basis_eval(spec: BasisSpec, m: int, n: int, u):
    """Value of the n-th (1-based) radial basis function for degree ``m`` at ``u``."""
    if n < 1:
        raise ParameterError("radial index n is 1-based")
    u = np.asarray(u, dtype=float)
    R = spec.R
    if spec.kind is BasisKind.SHIFTED_LEGENDRE:
        out = math.sqrt((2 * n - 1) / R) * legendre(n - 1, 2.0 * u / R - 1.0)
    else:
        nu = spec.order(m)
        j = bessel_j_zeros(nu, n)[-1]
        out = np.sqrt(2.0 * u) / (R * bessel_j(nu + 1, j)) * bessel_j(nu, j * u / R)
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """Everything needed to evaluate ``b_mn(s)`` for ``m <= M``, ``n <= n_max``.

    For Fourier-Bessel, ``radial_param[m, n-1]`` is the zero ``j_{nu_m, n}``;
    for shifted Legendre it is the basis normalisation ``sqrt((2n-1)/R)``.
    """

    params: ModelParams
    basis: BasisSpec
    M: int
    n_max: int
    radial_param: np.ndarray
    # J_{nu+1}(j_{nu,n}), derived from radial_param (Fourier-Bessel only)
    norm_bessel: np.ndarray | None = field(default=None, repr=False)

    def orders(self) -> np.ndarray:
        return np.array([self.basis.order(m) for m in range(self.M + 1)])

    def metadata(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "N": self.params.N,
            "H": self.params.H,
            "R": self.params.R,
            "basis": self.basis.kind.value,
            "M": self.M,
            "n_max": self.n_max,
        }


def _fb_row(spec: BasisSpec, m: int, n_max: int):
    nu = spec.order(m)
    j = bessel_j_zeros(nu, n_max)
    return j, bessel_j(nu + 1, j)


def build_table(
    p: ModelParams, kind, M: int, n_max: int, *, threads: int = 1
) -> CoefficientTable:
    """Build the coefficient table; zero-finding runs in parallel over degrees."""
    if M < 0 or n_max < 0:
        raise ParameterError("M and n_max must be nonnegative")
    spec = BasisSpec.for_params(kind, p)
    if spec.kind is BasisKind.SHIFTED_LEGENDRE:
        col = np.sqrt((2 * np.arange(1, n_max + 1) - 1) / p.R)
        radial = np.tile(col, (M + 1, 1))
        return CoefficientTable(p, spec, M, n_max, radial, None)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        rows = list(ex.map(lambda m: _fb_row(spec, m, n_max), range(M + 1)))
    radial = np.array([r[0] for r in rows]).reshape(M + 1, n_max)
    jn1 = np.array([r[1] for r in rows]).reshape(M + 1, n_max)
    return CoefficientTable(p, spec, M, n_max, radial, jn1)


def _radial_factor(m: int, N: int, z: np.ndarray) -> np.ndarray:
    """``g_m(z)`` for m >= 1 and ``1 - g_0(z)`` for m = 0.

    Here ``g_m(z) = 2^lam Gamma(lam+1) J_{m+lam}(z) / z^lam`` with lam = (N-2)/2.
    """
    lam = (N - 2) / 2
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z < 1.0
    zs = z[small]
    if zs.size:
        # power series; the k = 0 term of g_0 is exactly 1 and cancels
        acc = np.zeros_like(zs)
        q = (zs / 2) ** 2
        for k in range(30):
            if m == 0 and k == 0:
                continue
            logc = math.lgamma(lam + 1) - math.lgamma(k + 1) - math.lgamma(k + m + lam + 1)
            acc += (-1) ** k * math.exp(logc) * q**k
        out[small] = (-acc if m == 0 else acc) * (zs / 2) ** m
    zl = z[~small]
    if zl.size:
        g = 2**lam * gamma(lam + 1) * bessel_j(m + lam, zl) / zl**lam
        out[~small] = 1.0 - g if m == 0 else g
    return out


def _fb_coeffs(table: CoefficientTable, m: int, s: float) -> np.ndarray:
    p = table.params
    N, H, R = p.N, p.H, p.R
    j = table.radial_param[m]
    jn1 = table.norm_bessel[m]
    pref = (
        2 ** (H + 1)
        * math.sqrt(math.pi ** ((N - 2) / 2) * gamma(N / 2 + H) * gamma(H + 1) * math.sin(math.pi * H))
        * R**H
        / (gamma(N / 2) * jn1 * j ** (H + 1))
    )
    return pref * _radial_factor(m, N, j * s / R)


def _legendre_matrix(n_max: int, u: np.ndarray, R: float) -> np.ndarray:
    x = 2.0 * u / R - 1.0
    out = np.empty((u.size, n_max))
    prev = np.ones_like(x)
    cur = x
    for k in range(n_max):
        if k == 0:
            val = prev
        elif k == 1:
            val = cur
        else:
            prev, cur = cur, ((2 * k - 1) * x * cur - (k - 1) * prev) / k
            val = cur
        out[:, k] = math.sqrt((2 * k + 1) / R) * val
    return out


def _quad_coeffs(table: CoefficientTable, m: int, s: float, atol: float = 1e-10) -> np.ndarray:
    p = table.params
    n_max = table.n_max
    if n_max == 0:
        return np.empty(0)

    def integrand(u):
        return kernel_a(p, m, s, u)[:, None] * _legendre_matrix(n_max, u, p.R)

    # kernel support ends at u = s; QuadratureError propagates if atol is not met
    return np.atleast_1d(tanh_sinh(integrand, 0.0, s, atol=atol, rtol=0.0).value)


def coeff_b_vector(table: CoefficientTable, m: int, s: float) -> np.ndarray:
    """``[b_m1(s), ..., b_m,n_max(s)]``."""
    if not 0 <= m <= table.M:
        raise ParameterError(f"degree {m} outside table range 0..{table.M}")
    s = float(s)
    if not 0.0 <= s <= table.params.R * (1 + 1e-12):
        raise ParameterError(f"radius {s} outside [0, R]")
    if s == 0.0:
        return np.zeros(table.n_max)
    if table.basis.kind is BasisKind.FOURIER_BESSEL:
        return _fb_coeffs(table, m, s)
    return _quad_coeffs(table, m, s)


def coeff_b(table: CoefficientTable, m: int, n: int, s: float) -> float:
    """Single coefficient ``b_mn(s)`` (1-based ``n``)."""
    if not 1 <= n <= table.n_max:
        raise ParameterError(f"radial index {n} outside 1..{table.n_max}")
    return float(coeff_b_vector(table, m, s)[n - 1])


def parseval_partial(table: CoefficientTable, m: int, s: float, t: float, n_cut: int) -> float:
    """Partial Parseval sum ``sum_{n <= n_cut} b_mn(s) b_mn(t)``."""
    if not 0 <= n_cut <= table.n_max:
        raise ParameterError(f"n_cut must lie in 0..{table.n_max}")
    if n_cut == 0:
        return 0.0
    bs = coeff_b_vector(table, m, s)[:n_cut]
    bt = bs if t == s else coeff_b_vector(table, m, t)[:n_cut]
    return math.fsum(bs * bt)


def write_table(table: CoefficientTable, path, *, extra_meta: dict | None = None) -> tuple[Path, Path]:
    """Write ``path`` (CSV) and ``path.json`` (metadata sidecar).

    Floats use the shortest round-trip representation, so reloading is bit-exact.
    ``extra_meta`` is merged into the sidecar only.
    """
    from . import __version__

    path = Path(path)
    meta = table.metadata()
    buf = io.StringIO()
    buf.write(f"# tool=mfbm {__version__}\n")
    for key in ("N", "H", "R", "basis", "M", "n_max"):
        buf.write(f"# {key}={meta[key]!r}\n" if isinstance(meta[key], float) else f"# {key}={meta[key]}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "n", "order", "radial_param"])
    for m in range(table.M + 1):
        order = table.basis.order(m) if table.basis.kind is BasisKind.FOURIER_BESSEL else ""
        for n in range(1, table.n_max + 1):
            w.writerow([m, n, repr(order) if order != "" else "", repr(float(table.radial_param[m, n - 1]))])
    path.write_text(buf.getvalue())
    side = path.with_name(path.name + ".json")
    side.write_text(json.dumps({**meta, **(extra_meta or {})}, indent=2, sort_keys=True) + "\n")
    return path, side


def read_table(path) -> CoefficientTable:
    """Load a table written by :func:`write_table`."""
    path = Path(path)
    meta = json.loads(path.with_name(path.name + ".json").read_text())
    p = ModelParams(meta["N"], meta["H"], meta["R"])
    spec = BasisSpec.for_params(meta["basis"], p)
    M, n_max = meta["M"], meta["n_max"]
    radial = np.empty((M + 1, n_max))
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    for row in csv.DictReader(lines):
        radial[int(row["m"]), int(row["n"]) - 1] = float(row["radial_param"])
    jn1 = None
    if spec.kind is BasisKind.FOURIER_BESSEL:
        jn1 = np.array([bessel_j(spec.order(m) + 1, radial[m]) for m in range(M + 1)]).reshape(M + 1, n_max)
    return CoefficientTable(p, spec, M, n_max, radial, jn1)
