"""Real special functions used by the closed-form solutions.

Everything here is double precision. Factorial-like quantities switch to
log-space above ``LOG_SPACE_ABOVE`` so that ratios such as (2n-1)!!/n! stay
finite long after their numerator and denominator overflow. Hypergeometric
series are summed with Kahan compensation.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConvergenceError, DomainError

LOG_SPACE_ABOVE = 30
MAX_TERMS = 10_000
SERIES_RTOL = 1e-15
BETA_BRANCH_Z = 0.7


def log_pochhammer(x: float, l: int) -> float:
    """log((x)_l) for x > 0."""
    if x <= 0:
        raise DomainError("log_pochhammer needs x > 0")
    return math.lgamma(x + l) - math.lgamma(x)


def pochhammer(x: float, l: int) -> float:
    """Rising factorial (x)_l = x (x+1) ... (x+l-1); (x)_0 = 1."""
    if l < 0:
        raise DomainError("pochhammer needs l >= 0")
    if l > LOG_SPACE_ABOVE and x > 0:
        return math.exp(log_pochhammer(x, l))
    out = 1.0
    for k in range(l):
        out *= x + k
    return out


def log_odd_double_factorial(n: int) -> float:
    """log((2n-1)!!) using (2n-1)!! = (2n)! / (2^n n!)."""
    if n < 0:
        raise DomainError("odd_double_factorial needs n >= 0")
    return math.lgamma(2 * n + 1) - n * math.log(2.0) - math.lgamma(n + 1)


def odd_double_factorial(n: int) -> float:
    """(2n-1)!! = 1*3*5*...*(2n-1), with the convention (-1)!! = 1."""
    if n < 0:
        raise DomainError("odd_double_factorial needs n >= 0")
    if n > LOG_SPACE_ABOVE:
        return math.exp(log_odd_double_factorial(n))
    out = 1.0
    for k in range(1, n + 1):
        out *= 2 * k - 1
    return out


def beta(a: float, b: float) -> float:
    """Complete Beta function for a, b > 0."""
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def _beta_series(p: float, q: float, x: np.ndarray) -> np.ndarray:
    # B_x(p, q) = x^p (1-x)^q / p * 2F1(p+q, 1; p+1; x); every term is positive.
    out = np.zeros_like(x)
    live = x > 0
    if not live.any():
        return out
    xs = x[live]
    term = np.ones_like(xs)
    total = np.ones_like(xs)
    comp = np.zeros_like(xs)
    for k in range(MAX_TERMS):
        ratio = (p + q + k) / (p + 1 + k)
        term = term * ratio * xs
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if ratio * xs.max() < 1 and np.all(term <= SERIES_RTOL * total):
            break
    else:
        raise ConvergenceError(f"incomplete beta series did not converge (p={p}, q={q})")
    prefactor = np.exp(p * np.log(xs) + q * np.log1p(-xs)) / p
    out[live] = prefactor * total
    return out


def incomplete_beta(a: float, b: float, z, zc=None):
    """Incomplete Beta function B(a, b; z) = int_0^z x^(a-1) (1-x)^(b-1) dx.

    ``z`` may be a scalar or an array with entries in [0, 1]. Below
    z = 0.7 the positive-term series in z is used directly; above it the
    complement B(a, b) - B(b, a; 1 - z) is taken, where the same series
    in 1 - z converges quickly. Pass ``zc`` = 1 - z when it is known more
    accurately than 1.0 - z (e.g. exp(-x) next to z = -expm1(-x)).
    """
    if a <= 0 or b <= 0:
        raise DomainError("incomplete_beta needs a > 0 and b > 0")
    zz = np.asarray(z, dtype=float)
    if np.any(np.isnan(zz)) or np.any(zz < 0) or np.any(zz > 1):
        raise DomainError("incomplete_beta needs 0 <= z <= 1")
    flat = zz.reshape(-1)
    comp = 1.0 - flat if zc is None else np.broadcast_to(np.asarray(zc, dtype=float), zz.shape).reshape(-1)
    out = np.empty_like(flat)
    low = flat <= BETA_BRANCH_Z
    if low.any():
        out[low] = _beta_series(a, b, flat[low])
    if (~low).any():
        out[~low] = beta(a, b) - _beta_series(b, a, comp[~low])
    out = out.reshape(zz.shape)
    if out.ndim == 0:
        return float(out)
    return out


def hyp1f1(a: float, b: float, z: float) -> float:
    """Confluent hypergeometric function 1F1(a; b; z) by direct series."""
    if b <= 0 and float(b).is_integer():
        raise DomainError("hyp1f1 undefined for nonpositive integer b")
    term = 1.0
    total = 1.0
    comp = 0.0
    for k in range(MAX_TERMS):
        term *= (a + k) / (b + k) * z / (k + 1)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if term == 0.0:
            return total
        shrinking = k + 1 > abs(z) and abs((a + k + 1) / (b + k + 1) * z / (k + 2)) < 1
        if shrinking and abs(term) <= SERIES_RTOL * abs(total):
            return total
    raise ConvergenceError(f"hyp1f1({a}, {b}, {z}) did not converge in {MAX_TERMS} terms")


def hyp2f1_terminating(a: float, m: int, c: float, z: float) -> float:
    """2F1(a, -m; c; z) for integer m >= 0, an exact (m+1)-term sum."""
    if m < 0:
        raise DomainError("hyp2f1_terminating needs m >= 0")
    if c <= 0 and float(c).is_integer() and c >= -m:
        raise DomainError("hyp2f1_terminating: c is a nonpositive integer >= -m")
    term = 1.0
    total = 1.0
    comp = 0.0
    for k in range(m):
        term *= (a + k) * (-m + k) / ((c + k) * (k + 1)) * z
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total
