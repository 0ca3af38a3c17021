"""Transasymptotic expansion, exp-log closure, and residual checks."""

import random
from fractions import Fraction

import mpmath
import pytest

from transasym.errors import BudgetError, DomainError
from transasym.expand import (exp_germ, expand_term, germ_of_term, log_germ,
                              phi_expand, residual_check, root_germ)
from transasym.germ import (germ_add, germ_derive, germ_eval_iv,
                            germ_from_terms, germ_leading, germ_mul,
                            germ_sign, germ_sub, germ_zero, render_germ)
from transasym.ivnum import iv_workprec
from transasym.scalar import (ONE, ZERO, Comparison, Scalar, scalar_compare,
                              scalar_div, scalar_exp, scalar_mul)
from transasym.termlang import parse
from transasym.transmono import (TransMonomial, mono_compare, unit_monomial,
                                 y_power)

E1 = scalar_exp(ONE)


def terms_equal(t1, t2) -> bool:
    if len(t1) != len(t2):
        return False
    return all(scalar_compare(c1, c2) is Comparison.EQ and m1 == m2
               for (c1, m1), (c2, m2) in zip(t1, t2))


def expansions_agree(f, g, n: int) -> bool:
    return terms_equal(phi_expand(f, n).terms, phi_expand(g, n).terms)


# -- basic expansions --------------------------------------------------------


def test_geometric_expansion():
    ex = expand_term(parse("1/(1 - 1/y)"), 3)
    assert terms_equal(ex.terms, [(ONE, unit_monomial()),
                                  (ONE, y_power(Scalar(-1))),
                                  (ONE, y_power(Scalar(-2)))])
    assert not ex.exhausted
    assert str(ex) == "1 + Y^(-1) + Y^(-2) + ..."


def test_polynomial_expansion_exhausts():
    ex = expand_term(parse("y*y + 2*y + 5"), 5)
    assert ex.exhausted
    assert terms_equal(ex.terms, [(ONE, y_power(Scalar(2))),
                                  (Scalar(2), y_power(ONE)),
                                  (Scalar(5), unit_monomial())])


def test_mercator_expansion():
    ex = expand_term(parse("log(1 - 1/y)"), 3)
    assert terms_equal(ex.terms, [
        (Scalar(-1), y_power(Scalar(-1))),
        (Scalar(Fraction(-1, 2)), y_power(Scalar(-2))),
        (Scalar(Fraction(-1, 3)), y_power(Scalar(-3)))])


def test_expansion_terms_strictly_decrease():
    for src in ["1/(1 - 1/y)", "exp(2*y + 1 + 1/y)",
                "log(y + 1) * (y + 3)"]:
        ex = expand_term(parse(src), 5)
        for (_, m1), (_, m2) in zip(ex.terms, ex.terms[1:]):
            assert mono_compare(m1, m2) is Comparison.GT


def test_residual_is_exact_after_each_prefix():
    f = germ_of_term(parse("1/(1 - 1/y)"))
    ex = phi_expand(f, 4)
    residual = germ_sub(f, germ_from_terms(ex.terms))
    lead = germ_leading(residual)
    assert lead == (ONE, y_power(Scalar(-4)))


# -- exponentials ------------------------------------------------------------


def test_exp_splits_large_constant_small():
    ex = expand_term(parse("exp(2*y + 1 + 1/y)"), 3)
    e2y = TransMonomial({0: Scalar(2)})
    want = [(E1, e2y),
            (E1, TransMonomial({0: Scalar(2), 1: Scalar(-1)})),
            (scalar_div(E1, Scalar(2)),
             TransMonomial({0: Scalar(2), 1: Scalar(-2)}))]
    assert terms_equal(ex.terms, want)


def test_exp_of_zero_and_monomials():
    assert terms_equal(phi_expand(exp_germ(germ_zero()), 2).terms,
                       [(ONE, unit_monomial())])
    ex = expand_term(parse("exp(0 - y)"), 2)
    assert ex.exhausted
    assert terms_equal(ex.terms, [(ONE, TransMonomial({0: Scalar(-1)}))])


def test_exp_folds_log_ladder():
    ex = expand_term(parse("exp(3*log(y))"), 2)
    assert ex.exhausted
    assert terms_equal(ex.terms, [(ONE, y_power(Scalar(3)))])
    ex2 = expand_term(parse("exp(log(y) + 1/y)"), 2)
    assert terms_equal(ex2.terms, [(ONE, y_power(ONE)),
                                   (ONE, unit_monomial())])


def test_exp_additivity_on_expansions():
    f = germ_of_term(parse("2*y + 1/y"))
    g = germ_of_term(parse("y + 3"))
    lhs = exp_germ(germ_add(f, g))
    rhs = germ_mul(exp_germ(f), exp_germ(g))
    assert expansions_agree(lhs, rhs, 3)


def test_exp_numeric():
    g = germ_of_term(parse("exp(2*y + 1 + 1/y)"))
    with iv_workprec(120):
        v = germ_eval_iv(g, mpmath.iv.mpf(50))
    with mpmath.workprec(240):
        truth = mpmath.exp(2 * mpmath.mpf(50) + 1 + mpmath.mpf(1) / 50)
        assert mpmath.mpf(v.a) <= truth <= mpmath.mpf(v.b)
        rel = (mpmath.mpf(v.b) - mpmath.mpf(v.a)) / truth
        assert rel < mpmath.mpf(2) ** (-60)


# -- logarithms --------------------------------------------------------------


def test_log_of_ladder():
    ex = expand_term(parse("log(y)"), 3)
    assert ex.exhausted
    assert terms_equal(ex.terms, [(ONE, TransMonomial({2: ONE}))])


def test_log_requires_positive_germ():
    with pytest.raises(DomainError):
        log_germ(germ_zero())
    with pytest.raises(DomainError):
        log_germ(germ_of_term(parse("0 - y")))


def test_log_exp_roundtrip_random():
    rng = random.Random(20260822)
    for _ in range(20):
        terms = []
        a = rng.randrange(1, 6)
        terms.append((Scalar(a), y_power(ONE)))
        if rng.random() < 0.8:
            terms.append((Scalar(Fraction(rng.randrange(-9, 10), 2)),
                          unit_monomial()))
        if rng.random() < 0.8:
            terms.append((Scalar(rng.randrange(-5, 6)),
                          y_power(Scalar(-1))))
        f = germ_from_terms([(c, m) for c, m in terms
                             if scalar_compare(c, ZERO) is not Comparison.EQ])
        rt = log_germ(exp_germ(f))
        n = len(f.atoms)
        assert expansions_agree(f, rt, n)


def test_exp_log_roundtrip():
    f = germ_of_term(parse("(y + 2) * (y + 2)"))
    rt = exp_germ(log_germ(f))
    assert expansions_agree(f, rt, 3)


def test_log_turns_products_into_sums():
    f = germ_of_term(parse("1/(1 - 1/y)"))
    g = germ_of_term(parse("y*y"))
    lhs = log_germ(germ_mul(f, g))
    rhs = germ_add(log_germ(f), log_germ(g))
    assert expansions_agree(lhs, rhs, 4)


# -- roots -------------------------------------------------------------------


def test_root_inverts_square():
    f = germ_of_term(parse("y + 2"))
    sq = germ_mul(f, f)
    rt = root_germ(sq, 2)
    assert expansions_agree(f, rt, 2)


def test_root_signs():
    neg = germ_of_term(parse("0 - y*y*y"))
    rt = root_germ(neg, 3)
    assert germ_leading(rt) == (Scalar(-1), y_power(ONE))
    with pytest.raises(DomainError):
        root_germ(neg, 2)
    assert root_germ(germ_zero(), 4).is_zero


def test_root_numeric():
    g = germ_of_term(parse("root(3, y*y + y)"))
    with iv_workprec(100):
        v = germ_eval_iv(g, mpmath.iv.mpf(200))
    with mpmath.workprec(200):
        truth = mpmath.cbrt(mpmath.mpf(200) ** 2 + 200)
        assert mpmath.mpf(v.a) <= truth <= mpmath.mpf(v.b)


# -- towers ------------------------------------------------------------------


def test_exp_tower_is_one_monomial():
    g = germ_of_term(parse("exp(exp(2*y) * (1/(1 - 1/y)))"))
    ex = phi_expand(g, 2)
    assert ex.exhausted and len(ex.terms) == 1
    c, m = ex.terms[0]
    assert scalar_compare(c, ONE) is Comparison.EQ
    assert not m.logpart and m.expart is not None
    assert germ_sign(g) == 1


def test_exp_tower_dominates_powers():
    g = germ_of_term(parse("exp(exp(2*y) * (1/(1 - 1/y)))"))
    _, tower = germ_leading(g)
    assert mono_compare(tower, y_power(Scalar(100))) is Comparison.GT
    assert mono_compare(tower, TransMonomial({0: Scalar(3)})) is Comparison.GT


def test_exp_tower_numeric():
    g = germ_of_term(parse("exp(exp(2*y) * (1/(1 - 1/y)))"))
    with iv_workprec(150):
        v = germ_eval_iv(g, mpmath.iv.mpf(3))
    with mpmath.workprec(400):
        truth = mpmath.exp(mpmath.exp(6) / (1 - mpmath.mpf(1) / 3))
        assert mpmath.mpf(v.a) <= truth <= mpmath.mpf(v.b)


def test_equal_atoms_cancel_syntactically():
    # exp(y)/y and exp(y - log(y)) normalize to the same atom, so the
    # difference is recognized as zero without any stream work
    g = germ_of_term(parse("exp(y) * (1/y) - exp(y - log(y))"))
    assert g.is_zero
    ex = phi_expand(g, 1)
    assert ex.exhausted and not ex.terms


def test_identically_zero_tail_burns_budget():
    # zero as three atoms that only cancel term by term: asking for a
    # term must fail loudly, not hang or fabricate an answer
    g = germ_of_term(parse("tgeom(1/y) - 1 - (1/y) * tgeom(1/y)"))
    with pytest.raises(BudgetError):
        phi_expand(g, 1)


# -- order compatibility -----------------------------------------------------


def test_expansion_order_matches_germ_order():
    rng = random.Random(1009)
    monos = [y_power(Scalar(2)), y_power(ONE), unit_monomial(),
             y_power(Scalar(-1)), y_power(Scalar(Fraction(-3, 2))),
             TransMonomial({0: ONE}), TransMonomial({2: ONE})]
    for _ in range(50):
        f = germ_from_terms([(Scalar(rng.randrange(-4, 5)), m)
                             for m in rng.sample(monos, 3)])
        g = germ_from_terms([(Scalar(rng.randrange(-4, 5)), m)
                             for m in rng.sample(monos, 3)])
        diff = germ_sub(f, g)
        s = germ_sign(diff) if diff.atoms else 0
        if s == 0:
            continue
        lead = germ_leading(diff)
        c, m = lead
        # the sign of the difference is carried by its leading term
        assert (scalar_compare(c, ZERO) is Comparison.GT) == (s > 0)


def test_derivation_commutes_with_expansion():
    f = germ_of_term(parse("1/(1 - 1/y)"))
    got = phi_expand(germ_derive(f), 3)
    want = [(Scalar(-1), y_power(Scalar(-2))),
            (Scalar(-2), y_power(Scalar(-3))),
            (Scalar(-3), y_power(Scalar(-4)))]
    assert terms_equal(got.terms, want)


# -- residual checks ---------------------------------------------------------


def test_residual_check_passes_geometric():
    f = germ_of_term(parse("1/(1 - 1/y)"))
    rep = residual_check(f, 2, [100, 1000, 10000])
    assert rep.verdict == "PASS"
    assert len(rep.rows) == 3
    table = rep.render()
    assert "verdict: PASS" in table and "10000" in table


def test_residual_check_zeroth_term():
    f = germ_of_term(parse("exp(1/y)"))
    rep = residual_check(f, 0, [50, 500])
    assert rep.verdict == "PASS"


def test_residual_check_fails_on_wrong_claim():
    # a class function whose evaluator disagrees with its coefficient
    # stream is exactly what the numeric cross-check exists to catch
    _register_badgeom()
    f = germ_of_term(parse("badgeom(1/y)"))
    rep = residual_check(f, 1, [100, 1000])
    assert rep.verdict == "FAIL"


def test_residual_check_reports_undecided_not_false_pass():
    # at the crossover-free tolerance 1e-30 the interval at modest
    # precision cannot certify containment for a PASS
    f = germ_of_term(parse("1/(1 - 1/y)"))
    rep = residual_check(f, 1, [10], bits=8, tol=1e-30)
    assert rep.verdict in ("UNDECIDED", "FAIL")


def test_expand_modes():
    with pytest.raises(DomainError):
        expand_term(parse("tgeom(y)"), 2)
    ex = expand_term(parse("tgeom(y)"), 2, mode="permissive")
    assert ex.exhausted and not ex.terms


def _geom_hat():
    from transasym.hahn import (FormalMonomial, Lattice, Series, Stream,
                                formal_group)

    def gen():
        n = 0
        while True:
            yield (ONE, FormalMonomial((Scalar(n),)))
            n += 1
    return Series(formal_group(1), Stream(gen()), support_desc=Lattice((ONE,)))


def _register_tgeom():
    from transasym.gqc import Flags, cf_base, register, registered_names
    if "tgeom" in registered_names():
        return
    register(cf_base("tgeom", 1, _geom_hat(), lambda xs: 1 / (1 - xs[0]),
                     Flags(classical=True, natural=True,
                           truncation_closed=True)))


def _register_badgeom():
    from transasym.gqc import Flags, cf_base, register, registered_names
    if "badgeom" in registered_names():
        return
    register(cf_base("badgeom", 1, _geom_hat(),
                     lambda xs: 1 / (1 - 2 * xs[0]),
                     Flags(classical=True, natural=True,
                           truncation_closed=True)))


_register_tgeom()
