"""
Exact comparisons against log2(s).

All bounds in the finders are of the form  a <= c * log2(s)  or powers of
log2(s). log2(s) is irrational unless s is a power of two, so every test is
reduced to integer arithmetic:  log2(s) >= a/b  <=>  s**b >= 2**a.
"""

import math
from fractions import Fraction

from models import InternalInvariantError

MAX_BISECTION_STEPS = 512


def log2_cmp(s: int, q: Fraction | int) -> int:
    """Sign of log2(s) - q."""
    if s < 1:
        raise ValueError(f"log2 needs s >= 1, got {s}")
    q = Fraction(q)
    if q < 0:
        return 1
    if q == 0:
        return 0 if s == 1 else 1
    lhs = s**q.denominator
    rhs = 2**q.numerator
    return (lhs > rhs) - (lhs < rhs)


def log2_float(s: int) -> float:
    return math.log2(s)


def is_power_of_two(s: int) -> bool:
    return s >= 1 and s & (s - 1) == 0


def ceil_ratio(k: int | Fraction, c: int, s: int) -> int:
    """Smallest integer g >= 0 with g >= k / (c * log2 s), for s >= 2."""
    if s < 2:
        raise ValueError("ratio over log2(s) needs s >= 2")
    k = Fraction(k)
    if k <= 0:
        return 0

    def enough(g: int) -> bool:
        # g >= k/(c L)  <=>  L >= k/(c g)
        return g > 0 and log2_cmp(s, k / (c * g)) >= 0

    g = max(1, math.ceil(float(k) / (c * math.log2(s))))
    while g > 1 and enough(g - 1):
        g -= 1
    while not enough(g):
        g += 1
    return g


def floor_ratio(k: int | Fraction, c: int, s: int) -> int:
    """Largest integer g >= 0 with g <= k / (c * log2 s), for s >= 2."""
    if s < 2:
        raise ValueError("ratio over log2(s) needs s >= 2")
    k = Fraction(k)
    if k <= 0:
        return 0

    def within(g: int) -> bool:
        # g <= k/(c L)  <=>  L <= k/(c g)
        return g == 0 or log2_cmp(s, k / (c * g)) <= 0

    g = max(0, math.floor(float(k) / (c * math.log2(s))))
    while not within(g):
        g -= 1
    while within(g + 1):
        g += 1
    return g


def log2_power_at_most(s: int, d: int, c: Fraction) -> bool:
    """Decide log2(s)**d <= c exactly, for s >= 2 and d >= 1."""
    if c < 0:
        return False
    if is_power_of_two(s):
        return Fraction(s.bit_length() - 1) ** d <= c
    # log2(s) is irrational here, so bisection on its value always separates it from c**(1/d)
    lo = Fraction(s.bit_length() - 1)
    hi = Fraction(s.bit_length())
    for _ in range(MAX_BISECTION_STEPS):
        if hi**d <= c:
            return True
        if lo**d > c:
            return False
        mid = (lo + hi) / 2
        if log2_cmp(s, mid) >= 0:
            lo = mid
        else:
            hi = mid
    raise InternalInvariantError(f"could not separate log2({s})**{d} from {c}")


def hyper_density_holds(s: int, t: int, k: int, m: int) -> bool:
    """m >= 3s * (2^(t+3) * s * log2(s) / k)^(t-2), decided exactly."""
    if s < 2 or k < 1 or t < 2:
        return False
    d = t - 2
    if d == 0:
        return m >= 3 * s
    # (log2 s)^d <= m k^d / (3 s (2^(t+3) s)^d)
    c = Fraction(m * k**d, 3 * s * (2 ** (t + 3) * s) ** d)
    return log2_power_at_most(s, d, c)


def hyper_density_rhs(s: int, t: int, k: int) -> float:
    """Right-hand side of the hypergraph density condition, as a float for traces."""
    return 3 * s * (2 ** (t + 3) * s * math.log2(s) / k) ** (t - 2)
