"""Scalar field: frozen examples, oracles, and the randomized axiom suite."""

from __future__ import annotations

import random
from fractions import Fraction

import mpmath
import pytest
import sympy as sp

from transasym.errors import DomainError, ParseError
from transasym.scalar import (
    ONE,
    ZERO,
    Comparison,
    Scalar,
    declare_constant,
    format_scalar,
    log_int,
    parse_scalar,
    scalar_add,
    scalar_compare,
    scalar_div,
    scalar_enclose,
    scalar_exp,
    scalar_log,
    scalar_mul,
    scalar_neg,
    scalar_pow,
    scalar_sub,
)


def _trial_division(n: int) -> dict[int, int]:
    # Independent factorization oracle: plain trial division.
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def test_rational_arithmetic_examples():
    assert scalar_add(parse_scalar("1/2"), parse_scalar("1/3")) == Scalar(Fraction(5, 6))
    e = parse_scalar("e")
    assert scalar_mul(e, scalar_div(ONE, e)) == ONE
    assert scalar_sub(ONE, ONE) == ZERO


def test_log_splits_via_prime_factorization():
    s = scalar_add(log_int(2), log_int(3))
    assert s == log_int(6)
    assert s.expr == log_int(6).expr  # same normal form, not merely equal


def test_log_n_matches_factorization_oracle_up_to_100():
    for n in range(2, 101):
        expected = ZERO
        for p, a in _trial_division(n).items():
            expected = scalar_add(expected, scalar_mul(Scalar(a), log_int(p)))
        assert log_int(n) == expected, n
        # interval cross-check at 64 bits
        box = scalar_enclose(log_int(n), 64)
        mpmath.mp.prec = 128
        true = Fraction(*mpmath.libmp.to_rational(mpmath.log(n)._mpf_))
        assert box.lo <= true <= box.hi


def test_compare_examples():
    assert scalar_compare(parse_scalar("1/2"), parse_scalar("1/3")) is Comparison.GT
    assert scalar_compare(parse_scalar("e"), parse_scalar("2718/1000")) is Comparison.GT
    entered = parse_scalar("log(6)")
    assert scalar_compare(scalar_add(log_int(2), log_int(3)), entered) is Comparison.EQ


def test_enclose_examples():
    box = scalar_enclose(Scalar(Fraction(1, 3)), 10)
    assert box.contains(Fraction(1, 3)) and box.width <= Fraction(1, 2 ** 10)
    box = scalar_enclose(log_int(2), 20)
    assert box.width <= Fraction(1, 2 ** 20)
    assert box.lo < Fraction(693148, 1000000) and box.hi > Fraction(693147, 1000000)
    for k in (1, 10, 100):
        z = scalar_enclose(ZERO, k)
        assert z.lo == 0 and z.hi == 0


def test_division_by_zero():
    with pytest.raises(DomainError):
        scalar_div(ONE, ZERO)


def test_pow_exact_cases():
    assert scalar_pow(Scalar(4), Scalar(Fraction(1, 2))) == Scalar(2)
    assert scalar_pow(Scalar(8), Scalar(Fraction(2, 3))) == Scalar(4)
    assert scalar_pow(Scalar(2), Scalar(10)) == Scalar(1024)
    # surds merge: 2^(1/2) * 2^(1/2) = 2
    r = scalar_pow(Scalar(2), Scalar(Fraction(1, 2)))
    assert scalar_mul(r, r) == Scalar(2)
    with pytest.raises(DomainError):
        scalar_pow(Scalar(-2), Scalar(Fraction(1, 2)))


def test_exp_log_exact_extraction():
    # e^(2 + 3 log 2) = e^2 * 8
    r = scalar_add(Scalar(2), scalar_mul(Scalar(3), log_int(2)))
    v = scalar_exp(r)
    assert v == scalar_mul(Scalar(8), scalar_pow(parse_scalar("e"), Scalar(2)))
    assert scalar_log(v) == r
    # exp of a half-integer multiple of log 2 is the exact surd
    h = scalar_exp(scalar_mul(Scalar(Fraction(1, 2)), log_int(2)))
    assert h == scalar_pow(Scalar(2), Scalar(Fraction(1, 2)))
    # exp atoms merge by exponent addition
    a = scalar_exp(scalar_mul(log_int(2), log_int(3)))
    b = scalar_exp(scalar_mul(log_int(2), log_int(5)))
    prod = scalar_mul(a, b)
    direct = scalar_exp(scalar_mul(log_int(2), scalar_add(log_int(3), log_int(5))))
    assert prod == direct


def test_log_of_nonpositive_raises():
    with pytest.raises(DomainError):
        scalar_log(ZERO)
    with pytest.raises(DomainError):
        scalar_log(Scalar(-3))


def _random_scalar(rng: random.Random, allow_transcendental: bool = True) -> Scalar:
    kind = rng.randrange(6 if allow_transcendental else 2)
    if kind in (0, 1):
        num = rng.randint(-20, 20)
        den = rng.randint(1, 12)
        return Scalar(Fraction(num, den))
    if kind == 2:
        return parse_scalar("e")
    if kind == 3:
        return parse_scalar("pi")
    if kind == 4:
        return log_int(rng.choice([2, 3, 5, 7]))
    a = _random_scalar(rng, False)
    b = _random_scalar(rng, rng.random() < 0.5)
    return scalar_add(a, scalar_mul(b, log_int(rng.choice([2, 3]))))


def test_field_axioms_on_1000_random_triples():
    rng = random.Random(20260822)
    for _ in range(1000):
        a = _random_scalar(rng)
        b = _random_scalar(rng)
        c = _random_scalar(rng)
        assert scalar_add(scalar_add(a, b), c) == scalar_add(a, scalar_add(b, c))
        assert scalar_mul(scalar_mul(a, b), c) == scalar_mul(a, scalar_mul(b, c))
        assert scalar_mul(a, scalar_add(b, c)) == \
            scalar_add(scalar_mul(a, b), scalar_mul(a, c))
        assert scalar_add(a, scalar_neg(a)) == ZERO
        if scalar_compare(b, ZERO) is not Comparison.EQ:
            assert scalar_mul(b, scalar_div(ONE, b)) == ONE


def test_compare_consistent_with_64bit_enclosures():
    rng = random.Random(8401)
    for _ in range(200):
        a = _random_scalar(rng)
        b = _random_scalar(rng)
        box_a = scalar_enclose(a, 64)
        box_b = scalar_enclose(b, 64)
        cmp = scalar_compare(a, b)
        if box_a.hi < box_b.lo:
            assert cmp is Comparison.LT
        elif box_b.hi < box_a.lo:
            assert cmp is Comparison.GT
        # overlapping enclosures decide nothing; compare may still refine


def test_total_order_transitivity_sample():
    rng = random.Random(77)
    vals = [_random_scalar(rng) for _ in range(25)]
    ordered = sorted(vals, key=lambda s: scalar_enclose(s, 64).lo)
    for x, y in zip(ordered, ordered[1:]):
        assert scalar_compare(x, y) is not Comparison.GT


def test_parse_print_round_trip():
    rng = random.Random(314)
    samples = [
        "1/2", "-3/4", "e", "pi", "log(2)", "log(12)",
        "1/2 + 1/3*log(2)", "e*pi - 7/5", "(1 + e)/(1 - log(2))",
        "2^(1/2)", "exp(1/2)", "exp(log(2)*log(3))",
    ]
    for _ in range(60):
        samples.append(format_scalar(_random_scalar(rng)))
    for text in samples:
        s = parse_scalar(text)
        again = parse_scalar(format_scalar(s))
        assert s == again, text


def test_parse_errors_carry_position():
    with pytest.raises(ParseError):
        parse_scalar("1 + ")
    with pytest.raises(DomainError):
        parse_scalar("log(0)")
    with pytest.raises(ParseError):
        parse_scalar("unknown_const")


def test_declared_constant_participates():
    euler = declare_constant(
        "euler_gamma",
        lambda bits: mpmath.iv.euler,
        "Euler-Mascheroni constant",
    )
    s = scalar_add(euler, ONE)
    box = scalar_enclose(s, 40)
    mpmath.mp.prec = 80
    true = Fraction(*mpmath.libmp.to_rational((mpmath.euler + 1)._mpf_))
    assert box.lo < true < box.hi
    assert scalar_compare(s, euler) is Comparison.GT
    # round-trips through the textual syntax once declared
    assert parse_scalar("euler_gamma + 1") == s
