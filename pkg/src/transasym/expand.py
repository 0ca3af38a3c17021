"""Exp-log closure of germs and transasymptotic expansion.

Expansion works term by term: monomialize the residual, read off its
leading coefficient and monomial, subtract exactly, repeat.  Every
prefix therefore has an exact residual germ, which is what makes the
numeric residual check meaningful.

exp and log move between the additive and multiplicative pictures: the
purely large part of an exponent becomes a new trans-monomial (ladder
terms fold into iterated-log powers, the remainder becomes the
monomial's exponent germ), the constant exponentiates in the scalar
field, and the infinitesimal part composes with the exponential series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import mpmath

from .errors import BudgetError, DomainError, PrecisionError
from .gqc import ClassFunction, Flags, cf_base, cf_unit_log, cf_unit_pow, lookup
from .hahn import FormalMonomial, Lattice, Series, Stream, formal_group
from .ivnum import iv_scalar, iv_workprec
from .scalar import (ONE, ZERO, Comparison, Scalar, format_scalar, scalar_add,
                     scalar_compare, scalar_exp, scalar_mul, scalar_neg)
from .transmono import TransMonomial, mono_compare, mono_log_germ, mono_mul, \
    mono_pow, unit_monomial
from .germ import (CONST_ONE, Germ, germ_add, germ_compose, germ_eval_iv,
                   germ_from_atom, germ_from_terms, germ_inv, germ_leading,
                   germ_monomial_form, germ_mul, germ_mul_monomial, germ_neg,
                   germ_scale, germ_sign, germ_split_large, germ_stream,
                   germ_sub, germ_zero, mono_eval_iv)
from . import termlang
from .termlang import (Add, Apply, Const, Exp, Inv, Log, Mul, Neg, Root, Term,
                       Var)

__all__ = [
    "Expansion",
    "phi_expand",
    "exp_germ",
    "log_germ",
    "root_germ",
    "germ_of_term",
    "expand_term",
    "ResidualReport",
    "residual_check",
    "EXP_FN",
]


# -- the exponential series as a class function ------------------------------


def _stirling2_row(k: int) -> List[int]:
    row = [1]
    for n in range(1, k + 1):
        new = [0] * (n + 1)
        for j, v in enumerate(row):
            new[j] += j * v
            new[j + 1] += v
        row = new
    return row


def _exp_theta(k: int) -> ClassFunction:
    """sum of n^k x^n / n!; equals e^x times a Stirling polynomial."""
    stirling = _stirling2_row(k)

    def gen():
        n = 0
        while True:
            c = Fraction(n ** k, math.factorial(n))
            if c:
                yield (Scalar(c), FormalMonomial((Scalar(n),)))
            n += 1

    hat = Series(formal_group(1), Stream(gen()), support_desc=Lattice((ONE,)))

    def ev(xs):
        x = xs[0]
        poly = mpmath.iv.mpf(0)
        for j, s in enumerate(stirling):
            if s:
                poly += s * x ** j
        return poly * mpmath.iv.exp(x)

    def rule(cf, i):
        return _exp_theta(k + 1)

    name = "exp_series" if k == 0 else f"exp_series_theta{k}"
    return cf_base(name, 1, hat, ev,
                   Flags(classical=True, natural=True, truncation_closed=True),
                   partial_rule=rule)


EXP_FN = _exp_theta(0)


# -- exp / log / root closure ------------------------------------------------


def _as_ladder_index(m: TransMonomial) -> Optional[int]:
    """j with m = L_j (the j-th iterated-log monomial), else None."""
    if m.expart is not None or len(m.logpart) != 1:
        return None
    (k, c), = m.logpart.items()
    if k >= 1 and c.expr == 1:
        return k - 1
    return None


def exp_germ(f: Germ) -> Germ:
    """Exponential of any germ: large part becomes a trans-monomial,
    constant part a scalar factor, small part an exponential-series
    composition."""
    if f.is_zero:
        return germ_from_terms([(ONE, unit_monomial())])
    large, rest = germ_split_large(f)

    r = ZERO
    lead = germ_leading(rest)
    if lead is not None and lead[1].is_unit:
        r = lead[0]
        rest = germ_sub(rest, germ_from_terms([lead]))

    logpart = {}
    epart_atoms = []
    for a in large.atoms:
        j = _as_ladder_index(a.m0) if a.fn is CONST_ONE else None
        if j is not None:
            logpart[j] = scalar_add(logpart.get(j, ZERO), a.coeff)
        else:
            epart_atoms.append(a)
    epart = Germ(tuple(epart_atoms)) if epart_atoms else None
    mono = TransMonomial(logpart, epart)

    coeff = scalar_exp(r) if scalar_compare(r, ZERO) is not Comparison.EQ \
        else ONE
    if rest.is_zero:
        return germ_from_terms([(coeff, mono)])
    comp = germ_compose(EXP_FN, (rest,))
    return germ_scale(germ_mul_monomial(comp, mono), coeff)


def log_germ(f: Germ) -> Germ:
    """Logarithm of an eventually positive germ: log of the leading
    monomial (one ladder level up) plus log of the unit factor."""
    s = germ_sign(f)
    if s == 0:
        raise DomainError("log of the zero germ")
    if s < 0:
        raise DomainError("log of an eventually negative germ")
    lead, nbar, U = germ_monomial_form(f)
    base = mono_log_germ(lead)
    log_u = germ_from_atom(ONE, unit_monomial(), cf_unit_log(U), nbar)
    return germ_add(base, log_u)


def root_germ(f: Germ, k: int) -> Germ:
    """Real k-th root; negative germs allowed for odd k."""
    if k < 1:
        raise DomainError("root index must be >= 1")
    if k == 1:
        return f
    s = germ_sign(f)
    if s == 0:
        return germ_zero()
    if s < 0:
        if k % 2 == 0:
            raise DomainError("even root of an eventually negative germ")
        return germ_neg(root_germ(germ_neg(f), k))
    lead, nbar, U = germ_monomial_form(f)
    r = Scalar(Fraction(1, k))
    return germ_from_atom(ONE, mono_pow(lead, r), cf_unit_pow(U, r), nbar)


# -- terms to germs ----------------------------------------------------------


def germ_of_term(t: Term, mode: str = "strict") -> Germ:
    """Interpret a term as a germ at +infinity.  mode controls
    class-function application to non-infinitesimal arguments: "strict"
    rejects, "permissive" applies the by-zero extension and returns the
    zero germ for that application."""
    if mode not in ("strict", "permissive"):
        raise DomainError(f"unknown mode {mode!r}")
    if isinstance(t, Const):
        return germ_from_terms([(t.value, unit_monomial())])
    if isinstance(t, Var):
        return germ_from_terms([(ONE, TransMonomial({1: ONE}))])
    if isinstance(t, Neg):
        return germ_neg(germ_of_term(t.arg, mode))
    if isinstance(t, Add):
        return germ_add(germ_of_term(t.left, mode),
                        germ_of_term(t.right, mode))
    if isinstance(t, Mul):
        return germ_mul(germ_of_term(t.left, mode),
                        germ_of_term(t.right, mode))
    if isinstance(t, Inv):
        return germ_inv(germ_of_term(t.arg, mode))
    if isinstance(t, Root):
        return root_germ(germ_of_term(t.arg, mode), t.index)
    if isinstance(t, Exp):
        return exp_germ(germ_of_term(t.arg, mode))
    if isinstance(t, Log):
        return log_germ(germ_of_term(t.arg, mode))
    if isinstance(t, Apply):
        fn = lookup(t.name)
        args = [germ_of_term(a, mode) for a in t.args]
        unit = unit_monomial()
        for g in args:
            if g.is_zero:
                continue
            lead = germ_leading(g)
            if lead is None:
                continue
            if mono_compare(lead[1], unit) is not Comparison.LT:
                if mode == "permissive":
                    return germ_zero()
                raise DomainError(
                    f"{t.name}: argument is not infinitesimal (strict "
                    f"mode; permissive mode extends by zero)")
        return germ_compose(fn, args)
    raise DomainError(f"not a term node: {t!r}")


# -- expansion ---------------------------------------------------------------


@dataclass(frozen=True)
class Expansion:
    source: Germ
    terms: Tuple[Tuple[Scalar, TransMonomial], ...]
    exhausted: bool

    def render(self, fmt: str = "text") -> str:
        if fmt == "text":
            if not self.terms:
                return "0"
            bits = []
            for c, m in self.terms:
                if m.is_unit:
                    bits.append(format_scalar(c))
                elif c.expr == 1:
                    bits.append(str(m))
                elif c.expr == -1:
                    bits.append(f"-{m}")
                else:
                    bits.append(f"{format_scalar(c)}*{m}")
            s = " + ".join(bits).replace("+ -", "- ")
            return s if self.exhausted else s + " + ..."
        raise DomainError(f"unknown format {fmt!r}")

    def __str__(self):
        return self.render()


def phi_expand(f: Germ, n: int) -> Expansion:
    """First n terms of the transasymptotic expansion of f, read off the
    merged term stream (largest monomial first, exact coefficients)."""
    if n < 1:
        raise DomainError("expansion length must be positive")
    S = germ_stream(f)
    terms = []
    exhausted = False
    for i in range(n):
        t = S.term(i)
        if t is None:
            exhausted = True
            break
        terms.append(t)
    return Expansion(f, tuple(terms), exhausted)


def expand_term(t: Term, n: int, mode: str = "strict") -> Expansion:
    return phi_expand(germ_of_term(t, mode), n)


# -- numeric residual verification -------------------------------------------


@dataclass(frozen=True)
class ResidualReport:
    beta: int
    tol: float
    rows: Tuple[Tuple[object, object], ...]   # (y, ratio interval or None)
    verdict: str                              # PASS | FAIL | UNDECIDED
    note: str = ""

    def render(self) -> str:
        lines = [f"residual check at term index {self.beta} "
                 f"(tolerance {self.tol}):",
                 f"{'y':>14}  {'ratio':>22}  {'width':>12}"]
        for y, ratio in self.rows:
            if ratio is None:
                lines.append(f"{str(y):>14}  {'(undecided)':>22}  {'-':>12}")
                continue
            mid = (mpmath.mpf(ratio.a) + mpmath.mpf(ratio.b)) / 2
            width = mpmath.mpf(ratio.b) - mpmath.mpf(ratio.a)
            lines.append(f"{str(y):>14}  {mpmath.nstr(mid, 12):>22}  "
                         f"{mpmath.nstr(width, 3):>12}")
        tail = f"verdict: {self.verdict}"
        if self.note:
            tail += f" ({self.note})"
        lines.append(tail)
        return "\n".join(lines)

    def __str__(self):
        return self.render()


def residual_check(f: Germ, beta: int, ys: Sequence, bits: int = 128,
                   tol: float = 1e-2) -> ResidualReport:
    """Ratios (f - partial sum of beta terms)(y) / (c_beta m_beta)(y) on
    the grid.  PASS only when the final enclosure lies inside
    [1-tol, 1+tol]; a ratio that cannot be enclosed gives UNDECIDED,
    never PASS."""
    ex = phi_expand(f, beta + 1)
    if len(ex.terms) <= beta:
        raise DomainError(f"expansion terminated before index {beta}")
    c_b, m_b = ex.terms[beta]
    partial = germ_from_terms(ex.terms[:beta])
    residual = germ_sub(f, partial)

    rows = []
    note = ""
    for y in ys:
        try:
            with iv_workprec(2 * bits + 16):
                yv = iv_scalar(y) if isinstance(y, Scalar) \
                    else mpmath.iv.mpf(y)
                num = germ_eval_iv(residual, yv)
                den = iv_scalar(c_b) * mono_eval_iv(m_b, yv)
                if den.a <= 0 <= den.b:
                    rows.append((y, None))
                    note = "reference term enclosure touches zero"
                    continue
                rows.append((y, num / den))
        except (PrecisionError, BudgetError) as e:
            rows.append((y, None))
            note = str(e)

    last = rows[-1][1] if rows else None
    if last is None:
        verdict = "UNDECIDED"
    else:
        lo, hi = mpmath.mpf(last.a), mpmath.mpf(last.b)
        if 1 - tol <= lo and hi <= 1 + tol:
            verdict = "PASS"
        elif hi < 1 - tol or lo > 1 + tol:
            verdict = "FAIL"
        else:
            verdict = "UNDECIDED"
    return ResidualReport(beta, tol, tuple(rows), verdict, note)
