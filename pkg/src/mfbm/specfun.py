"""Real-order special functions used throughout the package.

Gamma-type helpers wrap :mod:`math`; the Gauss hypergeometric function,
Bessel zeros and the orthogonal polynomials are implemented here.
Bessel J itself is delegated to :func:`scipy.special.jv`.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import special as _sp

from .errors import ConvergenceError, ParameterError, PoleError

__all__ = [
    "gamma",
    "rgamma",
    "gamma_ratio",
    "log_gamma_ratio",
    "pochhammer",
    "hyp2f1",
    "bessel_j",
    "bessel_j_zero",
    "bessel_j_zeros",
    "gegenbauer",
    "legendre",
    "shifted_legendre_basis",
]

_EPS = 2.0**-53
_MAX_TERMS = 500_000
# |c - a - b - k| below this is treated as the integer k (logarithmic case)
_INT_TOL = 1e-12
# above _INT_TOL but below this the linear transformation loses too much to cancellation
_NEAR_INT_TOL = 1e-5


def _is_pole(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def gamma(x: float) -> float:
    """Gamma function for real ``x`` off the nonpositive integers."""
    x = float(x)
    if _is_pole(x):
        raise PoleError(f"gamma has a pole at {x!r}")
    return math.gamma(x)


def rgamma(x: float) -> float:
    """Reciprocal gamma ``1/Gamma(x)``; zero at the poles."""
    x = float(x)
    if _is_pole(x):
        return 0.0
    return 1.0 / math.gamma(x)


def _lgamma_sign(x: float) -> tuple[float, int]:
    if x > 0:
        return math.lgamma(x), 1
    sign = -1 if math.ceil(-x) % 2 else 1
    return math.lgamma(x), sign


def log_gamma_ratio(num, den) -> tuple[float, int]:
    """``(log|r|, sign r)`` for ``r = prod Gamma(num) / prod Gamma(den)``.

    A pole in ``den`` gives ``(-inf, 0)``; a pole in ``num`` raises.
    """
    for x in den:
        if _is_pole(float(x)):
            return -math.inf, 0
    log, sign = 0.0, 1
    for x in num:
        if _is_pole(float(x)):
            raise PoleError(f"gamma has a pole at {x!r}")
        lg, sg = _lgamma_sign(float(x))
        log += lg
        sign *= sg
    for x in den:
        lg, sg = _lgamma_sign(float(x))
        log -= lg
        sign *= sg
    return log, sign


def gamma_ratio(num, den) -> float:
    """``prod Gamma(num) / prod Gamma(den)`` evaluated in log space.

    A pole in ``den`` makes the ratio zero; a pole in ``num`` raises.
    """
    log, sign = log_gamma_ratio(num, den)
    return 0.0 if sign == 0 else sign * math.exp(log)


def pochhammer(a: float, n: int) -> float:
    """Rising factorial ``(a)_n`` for integer ``n >= 0``."""
    out = 1.0
    for k in range(n):
        out *= a + k
    return out


def _terminating_degree(a: float, b: float) -> int | None:
    degs = [int(-x) for x in (a, b) if _is_pole(x)]
    return min(degs) if degs else None


def _series_full(a: float, b: float, c: float, z: float, max_terms: int = _MAX_TERMS):
    """Direct Gauss series with an explicit tail bound.

    Returns ``(sum, sum of |terms|)``; the ratio of the two is the condition
    number of the summation.
    """
    if z == 0.0:
        return 1.0, 1.0
    terms = [1.0]
    t = running = 1.0
    k_safe = max(abs(a), abs(b), abs(c)) + 2.0
    for k in range(max_terms):
        t *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        if t == 0.0:
            break
        terms.append(t)
        running += t
        if k + 1 > k_safe:
            # past all sign changes the term ratio tends monotonically to z
            qn = abs((a + k + 1) * (b + k + 1) / ((c + k + 1) * (k + 2.0)))
            r = z * max(1.0, qn)
            if r < 1.0 and abs(t) * r / (1.0 - r) <= 0.25 * _EPS * abs(running):
                break
    else:
        raise ConvergenceError(
            f"2F1({a}, {b}; {c}; {z}) series did not converge in {max_terms} terms"
        )
    return math.fsum(terms), math.fsum(abs(x) for x in terms)


def _series(a: float, b: float, c: float, z: float) -> float:
    return _series_full(a, b, c, z)[0]


def _log_case(a: float, b: float, m: int, w: float) -> tuple[float, float]:
    """2F1(a, b; a+b+m; 1-w) for integer m >= 0 and 0 < w <= 1/2.

    Logarithmic connection formula; returns ``(value, magnitude)`` where
    ``magnitude`` bounds the size of the cancelling pieces.
    """
    c = a + b + m
    lw = math.log(w)
    psi = _sp.digamma
    terms = []
    if m == 0:
        pref = gamma_ratio([c], [a, b])
        t = 1.0
        for n in range(_MAX_TERMS):
            if n:
                t *= (a + n - 1) * (b + n - 1) / (n * n) * w
            val = t * (2 * psi(n + 1.0) - psi(a + n) - psi(b + n) - lw)
            terms.append(val)
            if n > max(abs(a), abs(b)) + 2 and abs(val) <= _EPS * 0.01 * abs(math.fsum(terms)):
                break
        total = pref * math.fsum(terms)
        return total, abs(pref) * math.fsum(abs(x) for x in terms)
    finite = []
    t = 1.0
    for n in range(m):
        if n:
            t *= (a + n - 1) * (b + n - 1) / (n * (n - m)) * w
        finite.append(t)
    pref_head = gamma_ratio([m, c], [a + m, b + m])
    head = pref_head * math.fsum(finite)
    t = 1.0 / math.factorial(m)
    for n in range(_MAX_TERMS):
        if n:
            t *= (a + m + n - 1) * (b + m + n - 1) / (n * (n + m)) * w
        val = t * (lw - psi(n + 1.0) - psi(n + m + 1.0) + psi(a + n + m) + psi(b + n + m))
        terms.append(val)
        if n > max(abs(a), abs(b)) + 2 and abs(val) <= _EPS * 0.01 * abs(math.fsum(terms)):
            break
    pref_tail = w**m * gamma_ratio([c], [a, b])
    tail = (-1) ** m * pref_tail * math.fsum(terms)
    scale = abs(pref_head) * math.fsum(abs(x) for x in finite) + abs(pref_tail) * math.fsum(
        abs(x) for x in terms
    )
    return head - tail, scale


def _connection(a: float, b: float, c: float, w: float) -> tuple[float, float]:
    """Value of 2F1 at z = 1 - w via the z -> 1 - z formulas, with magnitude."""
    d = c - a - b
    k = round(d)
    if abs(d - k) <= _INT_TOL * max(1.0, abs(d)):
        if k >= 0:
            return _log_case(a, b, k, w)
        # Euler: 2F1(a,b;c;z) = w^(c-a-b) 2F1(c-a, c-b; c; z)
        val, scale = _log_case(c - a, c - b, -k, w)
        f = w**d
        return f * val, f * scale
    s1, m1 = _series_full(a, b, 1.0 - d, w)
    s2, m2 = _series_full(c - a, c - b, 1.0 + d, w)
    g1 = gamma_ratio([c, d], [c - a, c - b])
    g2 = w**d * gamma_ratio([c, -d], [a, b])
    if abs(d - k) <= _NEAR_INT_TOL:
        # both coefficients blow up like 1/|d - k| and cancel
        return g1 * s1 + g2 * s2, math.inf
    return g1 * s1 + g2 * s2, abs(g1) * m1 + abs(g2) * m2


def _series_terms_estimate(a: float, b: float, c: float, z: float) -> float:
    return max(abs(a), abs(b), abs(c)) + 40.0 / max(-math.log(z), 1e-300)


def hyp2f1(a: float, b: float, c: float, z: float, *, zc: float | None = None) -> float:
    """Gauss hypergeometric function ``2F1(a, b; c; z)`` for real ``z`` in [0, 1].

    Uses the power series for ``z <= 1/2`` and Gauss's sum at ``z = 1``.
    Above 1/2 the ``z -> 1 - z`` connection formula is used (logarithmic form
    when ``c - a - b`` is an integer); when that formula cancels badly, which
    happens for large parameters, the direct series is used instead if it
    converges in a reasonable number of terms.  ``zc`` may carry an
    accurately computed ``1 - z``.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    if _is_pole(c) and _terminating_degree(a, b) is None:
        raise PoleError(f"2F1 lower parameter c={c} is a nonpositive integer")
    if not 0.0 <= z <= 1.0:
        raise ParameterError(f"2F1 argument z={z} outside [0, 1]")
    w = (1.0 - z) if zc is None else float(zc)
    if z == 0.0:
        return 1.0
    deg = _terminating_degree(a, b)
    if deg is not None:
        t, terms = 1.0, [1.0]
        for k in range(deg):
            t *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
            terms.append(t)
        return math.fsum(terms)
    d = c - a - b
    if w == 0.0:
        if d <= 0:
            raise ConvergenceError(f"2F1 diverges at z=1 when c-a-b={d} <= 0")
        return gamma_ratio([c, d], [c - a, c - b])
    if z <= 0.5:
        return _series(a, b, c, z)
    val, scale = _connection(a, b, c, w)
    cond = scale / abs(val) if val != 0.0 else math.inf
    if cond <= 8.0 or _series_terms_estimate(a, b, c, z) > 0.5 * _MAX_TERMS:
        return val
    sval, sscale = _series_full(a, b, c, z)
    scond = sscale / abs(sval) if sval != 0.0 else math.inf
    return sval if scond < cond else val


def bessel_j(nu: float, z):
    """Bessel function of the first kind ``J_nu(z)`` for ``nu > -1``, ``z >= 0``."""
    if not nu > -1:
        raise ParameterError(f"Bessel order must exceed -1, got {nu}")
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ParameterError("Bessel argument must be nonnegative")
    out = _sp.jv(nu, z)
    return float(out) if out.ndim == 0 else out


def _jv(nu, x):
    return float(_sp.jv(nu, x))


def _mcmahon(nu: float, n: int) -> float:
    mu = 4.0 * nu * nu
    beta = (n + 0.5 * nu - 0.25) * math.pi
    e = 8.0 * beta
    return (
        beta
        - (mu - 1) / e
        - 4 * (mu - 1) * (7 * mu - 31) / (3 * e**3)
        - 32 * (mu - 1) * (83 * mu**2 - 982 * mu + 3779) / (15 * e**5)
    )


def _refine_zero(nu: float, lo: float, hi: float, n: int) -> float:
    flo = _jv(nu, lo)
    guess = _mcmahon(nu, n)
    x = guess if lo < guess < hi else 0.5 * (lo + hi)
    for _ in range(100):
        f = _jv(nu, x)
        if f == 0.0:
            return x
        if (f > 0) == (flo > 0):
            lo, flo = x, f
        else:
            hi = x
        fp = 0.5 * (_jv(nu - 1, x) - _jv(nu + 1, x))
        step = f / fp if fp != 0.0 else math.inf
        xn = x - step
        if not lo < xn < hi:
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 2 * _EPS * x or hi - lo <= 4 * _EPS * x:
            return xn
        x = xn
    raise ConvergenceError(f"zero {n} of J_{nu} did not converge in [{lo}, {hi}]")


@lru_cache(maxsize=256)
def _zeros_cached(nu: float, count: int) -> tuple[float, ...]:
    # zero spacing of J_nu, nu > -1, is well above 1; the small-z grid catches j_{nu,1} -> 0
    step = 0.25
    head = np.geomspace(1e-8, 1.0, 120)
    found: list[float] = []
    upper = (count + abs(nu) + 2) * math.pi + 10.0
    grid = np.concatenate([head, np.arange(1.0 + step, upper, step)])
    start = 0
    while True:
        vals = _sp.jv(nu, grid)
        sgn = np.sign(vals)
        idx = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
        for i in idx:
            if len(found) == count:
                break
            lo, hi = float(grid[i]), float(grid[i + 1])
            if lo < start:
                continue
            found.append(_refine_zero(nu, lo, hi, len(found) + 1))
        if len(found) == count:
            break
        start = float(grid[-1])
        grid = np.arange(start, start + 50 * math.pi, step)
    for n, x in enumerate(found, 1):
        if abs(_jv(nu, x)) > 1e-12:
            raise ConvergenceError(f"|J_{nu}(j_{nu},{n})| = {abs(_jv(nu, x)):.3g} exceeds 1e-12")
    return tuple(found)


def bessel_j_zeros(nu: float, count: int) -> np.ndarray:
    """First ``count`` positive zeros of ``J_nu``, strictly increasing."""
    if not nu > -1:
        raise ParameterError(f"Bessel order must exceed -1, got {nu}")
    if count < 0:
        raise ParameterError("count must be nonnegative")
    if count == 0:
        return np.empty(0)
    return np.array(_zeros_cached(float(nu), int(count)))


def bessel_j_zero(nu: float, n: int) -> float:
    """The ``n``-th positive zero ``j_{nu,n}`` (``n >= 1``)."""
    if n < 1:
        raise ParameterError("zero index n must be >= 1")
    return float(bessel_j_zeros(nu, n)[-1])


def gegenbauer(lam: float, n: int, x):
    """Gegenbauer polynomial ``C^lam_n(x)`` by the three-term recurrence."""
    if not lam > -0.5 or lam == 0:
        raise ParameterError(f"Gegenbauer parameter must satisfy lam > -1/2, lam != 0; got {lam}")
    if n < 0:
        raise ParameterError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if x.ndim else float(prev)
    cur = 2.0 * lam * x
    for k in range(1, n):
        prev, cur = cur, (2.0 * (k + lam) * x * cur - (k + 2.0 * lam - 1.0) * prev) / (k + 1.0)
    return cur if x.ndim else float(cur)


def legendre(n: int, x):
    """Legendre polynomial ``P_n(x)`` (equal to ``C^{1/2}_n``)."""
    if n < 0:
        raise ParameterError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if x.ndim else float(prev)
    cur = x.copy()
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1) * x * cur - k * prev) / (k + 1)
    return cur if x.ndim else float(cur)


def shifted_legendre_basis(n: int, u):
    """Orthonormal shifted Legendre function ``sqrt(2n+1) P_n(2u-1)`` on [0, 1]."""
    return math.sqrt(2 * n + 1) * legendre(n, 2.0 * np.asarray(u, dtype=float) - 1.0)
