from __future__ import annotations

from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmlsim.shor import (
    CFExpansion,
    continued_fraction,
    extract_factors,
    modpow,
    multiplicative_order_from,
)


def slow_modpow(a: int, e: int, n: int) -> int:
    out = 1 % n
    for _ in range(e):
        out = (out * a) % n
    return out


def brute_force_order(a: int, n: int) -> int | None:
    x = a % n
    acc = x
    for r in range(1, n):
        if acc == 1:
            return r
        acc = (acc * x) % n
    return None


class TestModpow:
    def test_exponent_zero(self):
        assert modpow(12345, 0, 997) == 1

    def test_small_case(self):
        assert modpow(2, 10, 1000) == 24

    def test_shor_899_exponent(self):
        assert modpow(11, 210, 899) == 869
        assert slow_modpow(11, 210, 899) == 869

    @settings(max_examples=30, deadline=None)
    @given(a=st.integers(0, 500), e=st.integers(0, 300), n=st.integers(1, 500))
    def test_matches_repeated_multiplication(self, a, e, n):
        assert modpow(a, e, n) == slow_modpow(a, e, n)

    def test_zero_modulus(self):
        with pytest.raises(ValueError, match="modulus"):
            modpow(2, 3, 0)


class TestContinuedFraction:
    def test_half(self):
        assert continued_fraction(1, 2).coefficients == [0, 2]

    def test_seven_thirds(self):
        assert continued_fraction(7, 3).coefficients == [2, 3]

    def test_integer(self):
        assert continued_fraction(5, 1).coefficients == [5]

    def test_last_coefficient_folding(self):
        # 3/2 = [1; 2], never [1; 1, 1]
        assert continued_fraction(3, 2).coefficients == [1, 2]

    def test_shor_measured_value_expansion(self):
        # frozen via an independent Euclid run; the proper fraction starts
        # [0; 1, ...] and the familiar digit run sits inside
        exp = continued_fraction(954733, 1048576)
        assert exp.coefficients == [0, 1, 10, 5, 1, 3, 9, 1, 6, 3, 18]
        assert exp.coefficients[2:10] == [10, 5, 1, 3, 9, 1, 6, 3]

    def test_last_convergent_reconstructs_exactly(self):
        exp = continued_fraction(954733, 1048576)
        p, q = exp.convergents[-1]
        assert Fraction(p, q) == Fraction(954733, 1048576)

    @settings(max_examples=40, deadline=None)
    @given(num=st.integers(0, 10_000), den=st.integers(1, 10_000))
    def test_convergents_coprime_and_final_value(self, num, den):
        exp = continued_fraction(num, den)
        for p, q in exp.convergents:
            assert gcd(p, q) == 1
        p, q = exp.convergents[-1]
        assert Fraction(p, q) == Fraction(num, den)

    def test_zero_denominator(self):
        with pytest.raises(ValueError):
            continued_fraction(1, 0)


class TestOrderRecovery:
    def test_reduces_multiple_to_exact_order(self):
        # order of 11 mod 899 is 420; 840 = 2 * 420 annihilates
        assert multiplicative_order_from(11, 840, 899) == 420
        assert brute_force_order(11, 899) == 420

    def test_idempotent_on_exact_order(self):
        assert multiplicative_order_from(11, 420, 899) == 420


class TestExtractFactors:
    def test_paper_instance(self):
        result = extract_factors(954733, 20, 11, 899)
        assert result.success
        assert result.factors == (29, 31)
        assert result.order == 420
        # the r actually used annihilates
        assert modpow(11, result.order, 899) == 1

    def test_found_order_equals_brute_force(self):
        result = extract_factors(954733, 20, 11, 899)
        assert result.order == brute_force_order(11, 899)

    def test_gcd_shortcut(self):
        result = extract_factors(0, 20, 29, 899)
        assert result.success
        assert result.factors == (29, 31)
        assert "gcd shortcut" in result.reason

    def test_factor_product_invariant(self):
        for (m, nx, a, n) in [(954733, 20, 11, 899), (0, 4, 3, 15), (341, 10, 2, 21)]:
            result = extract_factors(m, nx, a, n)
            if result.success:
                p, q = result.factors
                assert p * q == n
                assert 1 < p <= q < n

    def test_useless_measurement_reports_failure(self):
        # M=0 gives only the convergent 0/1; no small multiple of 1
        # annihilates a=2 mod 899 (order 132 > 64)
        result = extract_factors(0, 20, 2, 899)
        assert not result.success
        assert result.candidates_tried
        assert result.reason

    def test_fifteen(self):
        # 2 has order 4 mod 15; measured 4/16 -> convergent denominator 4
        result = extract_factors(4, 4, 2, 15)
        assert result.success
        assert result.factors == (3, 5)

    def test_out_of_range_measurement(self):
        with pytest.raises(ValueError, match="out of range"):
            extract_factors(1 << 20, 20, 11, 899)
