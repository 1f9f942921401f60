"""Classical period-finding post-processing: modular exponentiation,
continued fractions, order recovery, factor extraction.

Everything here is exact integer arithmetic.  Factor extraction scans
small multiples of the convergent denominators of M / 2**n_x; any
multiple r with a**r = 1 (mod N) is an annihilator, i.e. a multiple of
the true order, which is then recovered by stripping removable prime
factors before the even-order/gcd step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd


def modpow(a: int, e: int, n: int) -> int:
    """a**e mod n by square-and-multiply (python ints, no overflow)."""
    if n == 0:
        raise ValueError("modulus must be nonzero")
    if e < 0:
        raise ValueError(f"exponent must be >= 0, got {e}")
    return pow(a, e, n)


@dataclass
class CFExpansion:
    """Continued fraction [a0; a1, a2, ...] with its convergents."""

    coefficients: list[int]
    convergents: list[tuple[int, int]]  # (p, q), gcd(p, q) = 1


def continued_fraction(num: int, den: int) -> CFExpansion:
    """Full Euclid expansion of num/den, leading a0 included.

    Proper fractions start with a0 = 0; when the expansion has more than
    one coefficient the last one is kept > 1 (the [..., a, 1] tail is
    folded into [..., a+1]).
    """
    if den == 0:
        raise ValueError("denominator must be nonzero")
    if num < 0 or den < 0:
        raise ValueError("expansion is defined for non-negative num/den")
    coeffs: list[int] = []
    a, b = num, den
    while b:
        q, r = divmod(a, b)
        coeffs.append(q)
        a, b = b, r
    if len(coeffs) > 1 and coeffs[-1] == 1:
        coeffs.pop()
        coeffs[-1] += 1
    convergents: list[tuple[int, int]] = []
    p_prev, q_prev, p, q = 1, 0, coeffs[0], 1
    convergents.append((p, q))
    for c in coeffs[1:]:
        p_prev, q_prev, p, q = p, q, c * p + p_prev, c * q + q_prev
        convergents.append((p, q))
    return CFExpansion(coeffs, convergents)


def _prime_factors(x: int) -> list[int]:
    out = []
    d = 2
    while d * d <= x:
        if x % d == 0:
            out.append(d)
            while x % d == 0:
                x //= d
        d += 1 if d == 2 else 2
    if x > 1:
        out.append(x)
    return out


def multiplicative_order_from(a: int, annihilator: int, n: int) -> int:
    """Given a**annihilator = 1 (mod n), the exact multiplicative order of
    a, found by stripping every removable prime factor."""
    r = annihilator
    for p in _prime_factors(annihilator):
        while r % p == 0 and pow(a, r // p, n) == 1:
            r //= p
    return r


@dataclass
class FactorResult:
    success: bool
    factors: tuple[int, int] | None = None
    order: int | None = None
    candidates_tried: list[int] = field(default_factory=list)
    reason: str = ""


def _split_from_order(a: int, r: int, n: int) -> tuple[int, int] | None:
    if r % 2 != 0:
        return None
    h = pow(a, r // 2, n)
    if h == n - 1:
        return None
    f1, f2 = gcd(h - 1, n), gcd(h + 1, n)
    if 1 < f1 < n and 1 < f2 < n:
        return tuple(sorted((f1, f2)))
    return None


def extract_factors(
    m: int, n_x: int, a: int, n: int, multiple_bound: int = 64
) -> FactorResult:
    """Factor n from a measured x-register value m of width n_x bits.

    Tries gcd(a, n) first, then candidate periods r = multiple * q over
    the convergent denominators q < n of m / 2**n_x.
    """
    if not 0 <= m < (1 << n_x):
        raise ValueError(f"measured value {m} out of range for {n_x} bits")
    if n < 2:
        return FactorResult(False, reason=f"modulus {n} has no nontrivial factors")

    g = gcd(a, n)
    if 1 < g < n:
        return FactorResult(True, factors=tuple(sorted((g, n // g))),
                            reason="gcd shortcut: a shares a factor with N")

    tried: list[int] = []
    seen: set[int] = set()
    expansion = continued_fraction(m, 1 << n_x)
    for (_, q) in expansion.convergents:
        if not 0 < q < n:
            continue
        for mult in range(1, multiple_bound + 1):
            r = mult * q
            if r in seen:
                continue
            seen.add(r)
            tried.append(r)
            if modpow(a, r, n) != 1:
                continue
            order = multiplicative_order_from(a, r, n)
            split = _split_from_order(a, order, n)
            if split is not None:
                return FactorResult(True, factors=split, order=order,
                                    candidates_tried=tried)
            return FactorResult(
                False, order=order, candidates_tried=tried,
                reason=f"order {order} found but it yields only trivial divisors",
            )
    return FactorResult(
        False, candidates_tried=tried,
        reason="no candidate period annihilates a; measured value carries "
               "no usable period information",
    )
