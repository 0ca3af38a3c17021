"""Quasianalytic class functions and the two support-rewriting algorithms.

A ClassFunction bundles a hat series over formal variables with a numeric
evaluator on [0, eps)^l, plus flags and the recipe it was derived by.
The class at desk scale is the closure of registered base functions under
the recipe constructors here (sums, products, monomial division, variable
substitutions, unit powers/logs, partials, composition with units).  Hats
are always exact lazy series; evaluators compute on mpmath intervals in
the ambient working precision, and quasianalyticity ties the two: the hat
determines the evaluator's asymptotics, which the test suites check
numerically rather than assume.

The two algorithms:

* monomialize rewrites a(m1,...,ml) as n0 * U(n1,...,nk) with U(0) != 0,
  by ramification merges (multiplicatively dependent monomials) and
  blow-ups (incomparable support exponents), following a lexicographic
  conflict measure with a step budget as the safety net.
* split slices a composite a(m̄) along a threshold monomial by direct
  image comparison of each support point, with no supremum computation.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import mpmath

from .errors import BudgetError, DomainError
from .hahn import (
    FiniteList,
    FormalMonomial,
    Series,
    Stream,
    formal_group,
    formal_unit,
    series_add,
    series_from_terms,
    series_lift,
    series_map_coeff,
    series_mul,
    series_power_sum,
    series_scale,
    series_substitute,
)
from .ivnum import iv_pow_scalar, iv_scalar
from .scalar import (
    ONE,
    ZERO,
    Comparison,
    Scalar,
    scalar_add,
    scalar_compare,
    scalar_div,
    scalar_mul,
    scalar_neg,
    scalar_sub,
)

__all__ = [
    "Flags",
    "ClassFunction",
    "register",
    "lookup",
    "registered_names",
    "constant_term",
    "monomial_division",
    "monomialize",
    "split",
    "support_measure",
    "cf_poly",
    "cf_constant",
    "cf_base",
    "cf_add",
    "cf_mul",
    "cf_scale",
    "cf_add_const",
    "cf_lift",
    "cf_project",
    "cf_unit_pow",
    "cf_unit_log",
    "cf_compose_unit",
]

MONOMIALIZE_STEP_BUDGET = 200


@dataclass(frozen=True)
class Flags:
    classical: bool = False
    natural: bool = True
    truncation_closed: bool = True


class ClassFunction:
    """One element of the class: hat + evaluator + flags + recipe."""

    __slots__ = ("name", "arity", "hat", "evaluator", "flags", "recipe",
                 "_partials", "_lock")

    def __init__(self, name: str, arity: int, hat: Series,
                 evaluator: Optional[Callable], flags: Flags,
                 recipe: tuple):
        if hat.group != formal_group(arity):
            raise DomainError(f"hat group {hat.group} does not match arity {arity}")
        self.name = name
        self.arity = arity
        self.hat = hat
        self.evaluator = evaluator
        self.flags = flags
        self.recipe = recipe
        self._partials: dict = {}
        self._lock = threading.Lock()

    # -- numeric entry point --------------------------------------------

    def eval(self, xs: Sequence):
        """Interval value at xs in the current iv working precision.

        Exact-zero coordinates are routed through the hat (the continuous
        extension), so recipe evaluators only ever see positive inputs.
        """
        if len(xs) != self.arity:
            raise DomainError(f"{self.name}: expected {self.arity} arguments")
        zero_idx = [i for i, x in enumerate(xs)
                    if getattr(x, "a", None) == 0 and getattr(x, "b", None) == 0]
        if zero_idx:
            return self._eval_with_zeros(xs, set(zero_idx))
        if self.evaluator is None:
            return _poly_eval_terms(self.hat.materialize_all(), xs)
        return self.evaluator(xs)

    def _eval_with_zeros(self, xs, zero_idx):
        terms = self.hat.materialize_all() if self.arity != 1 else None
        if self.arity == 1:
            # x = 0: only the constant term survives
            return iv_scalar(constant_term(self))
        acc = mpmath.iv.mpf(0)
        for c, m in terms:
            if any(m.exps[i].expr != 0 for i in zero_idx):
                continue
            v = iv_scalar(c)
            for i, e in enumerate(m.exps):
                if i not in zero_idx and e.expr != 0:
                    v *= iv_pow_scalar(xs[i], e)
            acc += v
        return acc

    # -- derivation ------------------------------------------------------

    def partial(self, i: int) -> "ClassFunction":
        """The class function x_i * da/dx_i (stays inside the class:
        the hat maps termwise c*X^a -> c*a_i*X^a)."""
        if not (0 <= i < self.arity):
            raise DomainError(f"partial index {i} out of range")
        with self._lock:
            got = self._partials.get(i)
            if got is None:
                got = _build_partial(self, i)
                self._partials[i] = got
            return got

    def __repr__(self):
        return f"ClassFunction({self.name}, arity={self.arity})"


# -- registry ---------------------------------------------------------------


_REGISTRY: dict = {}
_REG_LOCK = threading.Lock()


def register(cf: ClassFunction) -> ClassFunction:
    with _REG_LOCK:
        if cf.name in _REGISTRY:
            raise DomainError(f"class function {cf.name!r} already registered")
        _REGISTRY[cf.name] = cf
    return cf


def lookup(name: str) -> ClassFunction:
    cf = _REGISTRY.get(name)
    if cf is None:
        raise DomainError(f"unknown class function {name!r}")
    return cf


def registered_names() -> list:
    return sorted(_REGISTRY)


# -- constructors -----------------------------------------------------------


def _poly_eval_terms(terms, xs):
    acc = mpmath.iv.mpf(0)
    for c, m in terms:
        v = iv_scalar(c)
        for i, e in enumerate(m.exps):
            if e.expr != 0:
                v *= iv_pow_scalar(xs[i], e)
        acc += v
    return acc


def cf_poly(name: str, arity: int, terms, flags: Flags = None) -> ClassFunction:
    """Finite-hat function; the evaluator is the hat itself."""
    hat = series_from_terms(formal_group(arity), terms)
    return ClassFunction(name, arity, hat, None,
                         flags or Flags(), ("poly",))


def cf_constant(c: Scalar, arity: int = 0) -> ClassFunction:
    c = Scalar(c) if not isinstance(c, Scalar) else c
    terms = [] if scalar_compare(c, ZERO) is Comparison.EQ \
        else [(c, formal_unit(arity))]
    return cf_poly(f"const({c})", arity, terms)


def cf_base(name: str, arity: int, hat: Series, evaluator: Callable,
            flags: Flags, partial_rule: Callable = None) -> ClassFunction:
    """User-registered base function.  partial_rule(cf, i) -> ClassFunction
    supplies x_i*d_i in terms of other class functions."""
    cf = ClassFunction(name, arity, hat, evaluator, flags,
                       ("base", partial_rule))
    return cf


def _common_flags(a: ClassFunction, b: ClassFunction) -> Flags:
    return Flags(classical=a.flags.classical and b.flags.classical,
                 natural=a.flags.natural and b.flags.natural,
                 truncation_closed=a.flags.truncation_closed
                 and b.flags.truncation_closed)


def cf_add(a: ClassFunction, b: ClassFunction) -> ClassFunction:
    if a.arity != b.arity:
        raise DomainError("cf_add: arity mismatch")
    hat = series_add(a.hat, b.hat)
    ev = lambda xs: a.eval(xs) + b.eval(xs)
    return ClassFunction(f"({a.name}+{b.name})", a.arity, hat, ev,
                         _common_flags(a, b), ("add", a, b))


def cf_mul(a: ClassFunction, b: ClassFunction) -> ClassFunction:
    if a.arity != b.arity:
        raise DomainError("cf_mul: arity mismatch")
    hat = series_mul(a.hat, b.hat)
    ev = lambda xs: a.eval(xs) * b.eval(xs)
    return ClassFunction(f"({a.name}*{b.name})", a.arity, hat, ev,
                         _common_flags(a, b), ("mul", a, b))


def cf_scale(a: ClassFunction, c: Scalar) -> ClassFunction:
    c = Scalar(c) if not isinstance(c, Scalar) else c
    hat = series_scale(a.hat, c)
    ev = lambda xs: iv_scalar(c) * a.eval(xs)
    return ClassFunction(f"({c})*{a.name}", a.arity, hat, ev,
                         a.flags, ("scale", a, c))


def cf_add_const(a: ClassFunction, c: Scalar) -> ClassFunction:
    c = Scalar(c) if not isinstance(c, Scalar) else c
    const = series_from_terms(formal_group(a.arity),
                              [(c, formal_unit(a.arity))])
    hat = series_add(a.hat, const)
    ev = lambda xs: a.eval(xs) + iv_scalar(c)
    flags = Flags(classical=a.flags.classical and c.is_rational,
                  natural=a.flags.natural,
                  truncation_closed=a.flags.truncation_closed)
    return ClassFunction(f"({a.name}+{c})", a.arity, hat, ev,
                         flags, ("add_const", a, c))


def cf_lift(a: ClassFunction, total: int, slots: Sequence[int]) -> ClassFunction:
    hat = series_lift(a.hat, total, slots)
    ev = lambda xs: a.eval([xs[s] for s in slots])
    return ClassFunction(a.name, total, hat, ev, a.flags,
                         ("lift", a, total, tuple(slots)))


def cf_project(a: ClassFunction, keep: Sequence[int]) -> ClassFunction:
    """Drop variables that appear in no support monomial."""
    keep = tuple(keep)

    def gen():
        i = 0
        while True:
            t = a.hat.term(i)
            if t is None:
                return
            yield (t[0], FormalMonomial([t[1].exps[p] for p in keep]))
            i += 1

    hat = Series(formal_group(len(keep)), Stream(gen()),
                 support_desc=a.hat.support_desc)

    def ev(xs):
        full = [mpmath.iv.mpf(0)] * a.arity
        for p, x in zip(keep, xs):
            full[p] = x
        return a.eval(full)
    return ClassFunction(a.name, len(keep), hat, ev, a.flags,
                         ("project", a, keep))


def _cf_ramify(a: ClassFunction, i: int, j: int, lam: Scalar) -> ClassFunction:
    """Substitute X_j := X_i^lam and drop slot j; collisions merge and
    may cancel (this is the route to ZERO)."""
    keep = [p for p in range(a.arity) if p != j]
    new_i = keep.index(i)
    if isinstance(a.hat.support_desc, FiniteList):
        terms = []
        for c, m in a.hat.materialize_all():
            exps = list(m.exps)
            exps[i] = scalar_add(exps[i], scalar_mul(lam, exps[j]))
            terms.append((c, FormalMonomial([exps[p] for p in keep])))
        hat = series_from_terms(formal_group(len(keep)), terms)
    else:
        # infinite stream: reorder lazily through substitution; exact
        # cancellation to zero then surfaces as a budget error, not a 0
        gs = []
        for p in range(a.arity):
            exps = [ZERO] * len(keep)
            if p == j:
                exps[new_i] = lam
            else:
                exps[keep.index(p)] = ONE
            gs.append(FormalMonomial(exps))
        hat = series_substitute(a.hat, gs)

    def ev(xs):
        full = list(xs)
        full.insert(j, iv_pow_scalar(xs[new_i], lam))
        return a.eval(full)
    return ClassFunction(f"{a.name}~ram", len(keep), hat, ev, a.flags,
                         ("ramify", a, i, j, lam))


def _cf_blowup(a: ClassFunction, i: int, j: int, c: Scalar) -> ClassFunction:
    """Substitute X_j := X_i^c * X_j (exponent map is injective, so the
    support just reshuffles)."""
    if isinstance(a.hat.support_desc, FiniteList):
        terms = []
        for coeff, m in a.hat.materialize_all():
            exps = list(m.exps)
            exps[i] = scalar_add(exps[i], scalar_mul(c, exps[j]))
            terms.append((coeff, FormalMonomial(exps)))
        hat = series_from_terms(formal_group(a.arity), terms)
    else:
        gs = []
        for p in range(a.arity):
            exps = [ZERO] * a.arity
            exps[p] = ONE
            if p == j:
                exps[i] = c
            gs.append(FormalMonomial(exps))
        hat = series_substitute(a.hat, gs)

    def ev(xs):
        full = list(xs)
        full[j] = iv_pow_scalar(xs[i], c) * xs[j]
        return a.eval(full)
    return ClassFunction(f"{a.name}~bl", a.arity, hat, ev, a.flags,
                         ("blowup", a, i, j, c))


def _binomial_coeff(c: Scalar, k: int) -> Scalar:
    out = ONE
    for t in range(k):
        out = scalar_mul(out, scalar_sub(c, Scalar(t)))
        out = scalar_div(out, Scalar(t + 1))
    return out


def _unit_tail(u: ClassFunction):
    """u = u0*(1 + S) with S = (u - u0)/u0 of positive degree."""
    u0 = constant_term(u)
    if scalar_compare(u0, ZERO) is Comparison.EQ:
        raise DomainError(f"{u.name} is not a unit (constant term 0)")
    unit_term = series_from_terms(formal_group(u.arity),
                                  [(scalar_neg(u0), formal_unit(u.arity))])
    S = series_scale(series_add(u.hat, unit_term), scalar_div(ONE, u0))
    return u0, S


def cf_unit_pow(u: ClassFunction, c: Scalar) -> ClassFunction:
    """u^c for a unit u, via the binomial series on the small part.

    Nonnegative integer exponents are plain repeated products (the
    binomial weights would go identically zero past k = c, which a lazy
    power sum cannot detect)."""
    c = Scalar(c) if not isinstance(c, Scalar) else c
    if c.expr.is_Integer and int(c.expr) >= 0:
        n = int(c.expr)
        hat = series_from_terms(formal_group(u.arity),
                                [(ONE, formal_unit(u.arity))])
        cur, e = u.hat, n
        while e:
            if e & 1:
                hat = series_mul(hat, cur)
            e >>= 1
            if e:
                cur = series_mul(cur, cur)
    else:
        u0, S = _unit_tail(u)
        from .scalar import scalar_pow
        u0c = scalar_pow(u0, c)
        hat = series_scale(
            series_power_sum(S, lambda k: _binomial_coeff(c, k)), u0c)
    if c.expr.is_Integer:
        def ev(xs):
            return iv_pow_scalar(u.eval(xs), c)
    else:
        # non-integer powers need a positive unit
        def ev(xs):
            v = u.eval(xs)
            if v.a <= 0:
                raise DomainError(
                    f"{u.name}^({c}): unit value not positive")
            return iv_pow_scalar(v, c)
    return ClassFunction(f"({u.name})^({c})", u.arity, hat, ev, u.flags,
                         ("unit_pow", u, c))


def cf_unit_log(u: ClassFunction) -> ClassFunction:
    """log(u) for a unit u with u(0) > 0 (constant term log u0 plus the
    Mercator series of the small part)."""
    u0, S = _unit_tail(u)
    if scalar_compare(u0, ZERO) is not Comparison.GT:
        raise DomainError(f"log({u.name}): constant term not positive")
    from .scalar import scalar_log

    def coef(k: int) -> Scalar:
        if k == 0:
            return scalar_log(u0)
        return scalar_div(Scalar((-1) ** (k + 1)), Scalar(k))

    hat = series_power_sum(S, coef)

    def ev(xs):
        v = u.eval(xs)
        if v.a <= 0:
            raise DomainError(f"log({u.name}): value not positive")
        return mpmath.iv.log(v)
    return ClassFunction(f"log({u.name})", u.arity, hat, ev, u.flags,
                         ("unit_log", u))


def cf_compose_unit(F: ClassFunction, evec: Sequence[Scalar],
                    U: ClassFunction) -> ClassFunction:
    """F(X^evec * U(X)) for an arity-1 F and a unit U: the composite hat
    is sum over F's support of c_r * X^(r*evec) * U^r, enumerated by a
    frontier over (term of F, term of U^r)."""
    if F.arity != 1:
        raise DomainError("cf_compose_unit needs an arity-1 outer function")
    arity = U.arity
    if len(evec) != arity:
        raise DomainError("exponent vector arity mismatch")
    evec = tuple(Scalar(e) if not isinstance(e, Scalar) else e for e in evec)
    deg = ZERO
    for e in evec:
        if scalar_compare(e, ZERO) is Comparison.LT:
            raise DomainError("compose exponents must be >= 0")
        deg = scalar_add(deg, e)
    if scalar_compare(deg, ZERO) is not Comparison.GT:
        raise DomainError("compose needs a strictly small inner monomial")
    u0 = constant_term(U)
    if scalar_compare(u0, ZERO) is Comparison.EQ:
        raise DomainError("compose inner part is not a unit")

    base = FormalMonomial(evec)
    hat = _compose_unit_hat(F.hat, base, U, arity)

    def ev(xs):
            s = U.eval(xs)
            for i, e in enumerate(evec):
                if e.expr != 0:
                    s = s * iv_pow_scalar(xs[i], e)
            return F.eval((s,))
    flags = _common_flags(F, U)
    return ClassFunction(f"{F.name}(X^e*{U.name})", arity, hat, ev, flags,
                         ("compose_unit", F, evec, U))


def _compose_unit_hat(Fhat: Series, base: FormalMonomial, U: ClassFunction,
                      arity: int) -> Series:
    import heapq
    from .hahn import STREAM_BUDGET, _MaxKey

    upowers: dict = {}

    def upower(r: Scalar) -> Series:
        got = upowers.get(r.expr)
        if got is None:
            if r.expr == 0:
                got = series_from_terms(formal_group(arity),
                                        [(ONE, formal_unit(arity))])
            elif r.expr == 1:
                got = U.hat
            else:
                got = cf_unit_pow(U, r).hat
            upowers[r.expr] = got
        return got

    def gen():
        pending: list = []
        next_f = 0
        last_r = None
        exhausted = False
        pulls = 0
        while True:
            while pending:
                safe = exhausted
                if not safe and last_r is not None:
                    # every future contribution sits at or below
                    # base^r_next < base^last_r
                    bound = base.pow(last_r)
                    safe = pending[0].mono.compare(bound) is Comparison.GT
                if not safe:
                    break
                top = heapq.heappop(pending)
                mono = top.mono
                total = ZERO
                entries = [top.payload]
                while pending and pending[0].mono.compare(mono) is Comparison.EQ:
                    entries.append(heapq.heappop(pending).payload)
                for (fi, ui) in entries:
                    cf_, mf = Fhat.term(fi)
                    r = mf.exps[0]
                    cu, _ = upower(r).term(ui)
                    total = scalar_add(total, scalar_mul(cf_, cu))
                    nxt = upower(r).term(ui + 1)
                    if nxt is not None:
                        heapq.heappush(
                            pending,
                            _MaxKey(base.pow(r).mul(nxt[1]), (fi, ui + 1)))
                if scalar_compare(total, ZERO) is not Comparison.EQ:
                    yield (total, mono)
            if exhausted and not pending:
                return
            t = Fhat.term(next_f)
            if t is None:
                exhausted = True
                continue
            r = t[1].exps[0]
            if scalar_compare(r, ZERO) is Comparison.LT:
                raise DomainError("compose: outer support must be >= 0")
            first = upower(r).term(0)
            if first is not None:
                heapq.heappush(pending,
                               _MaxKey(base.pow(r).mul(first[1]),
                                       (next_f, 0)))
            last_r = r
            next_f += 1
            pulls += 1
            if pulls > STREAM_BUDGET:
                raise BudgetError("compose hat: budget exhausted")

    return Series(formal_group(arity), Stream(gen()))


# -- partial derivatives ----------------------------------------------------


def _partial_hat(a: ClassFunction, i: int) -> Series:
    return series_map_coeff(a.hat, lambda c, m: scalar_mul(c, m.exps[i]))


def _zero_fn(arity: int) -> ClassFunction:
    return cf_poly("0", arity, [])


def _build_partial(a: ClassFunction, i: int) -> ClassFunction:
    kind = a.recipe[0]
    if kind == "poly":
        return cf_poly(f"x{i + 1}∂{i + 1}({a.name})", a.arity,
                       _partial_hat(a, i).materialize_all(), a.flags)
    if kind == "base":
        rule = a.recipe[1]
        if rule is None:
            raise DomainError(f"{a.name}: no derivative registered")
        out = rule(a, i)
    elif kind == "add":
        _, f, g = a.recipe
        out = cf_add(f.partial(i), g.partial(i))
    elif kind == "mul":
        _, f, g = a.recipe
        out = cf_add(cf_mul(f.partial(i), g), cf_mul(f, g.partial(i)))
    elif kind == "scale":
        _, f, c = a.recipe
        out = cf_scale(f.partial(i), c)
    elif kind == "add_const":
        _, f, _c = a.recipe
        out = f.partial(i)
    elif kind == "mono_div":
        _, f, alpha = a.recipe
        out = cf_add(monomial_division(f.partial(i), alpha),
                     cf_scale(a, scalar_neg(alpha[i])))
    elif kind == "lift":
        _, f, total, slots = a.recipe
        if i in slots:
            out = cf_lift(f.partial(slots.index(i)), total, slots)
        else:
            out = _zero_fn(total)
    elif kind == "project":
        _, f, keep = a.recipe
        out = cf_project(f.partial(keep[i]), keep)
    elif kind == "ramify":
        _, f, fi, fj, lam = a.recipe
        keep = [p for p in range(f.arity) if p != fj]
        q = keep[i]
        if q == fi:
            inner = cf_add(f.partial(fi), cf_scale(f.partial(fj), lam))
        else:
            inner = f.partial(q)
        out = _cf_ramify(inner, fi, fj, lam)
    elif kind == "blowup":
        _, f, fi, fj, c = a.recipe
        if i == fi:
            inner = cf_add(f.partial(fi), cf_scale(f.partial(fj), c))
        else:
            inner = f.partial(i)
        out = _cf_blowup(inner, fi, fj, c)
    elif kind == "unit_pow":
        _, u, c = a.recipe
        out = cf_scale(cf_mul(cf_unit_pow(u, scalar_sub(c, ONE)),
                              u.partial(i)), c)
    elif kind == "unit_log":
        _, u = a.recipe
        out = cf_mul(cf_unit_pow(u, Scalar(-1)), u.partial(i))
    elif kind == "compose_unit":
        _, F, evec, U = a.recipe
        # x_i d_i F(S) = (xF')(S) * (e_i + (x_i d_i U)/U)
        outer = cf_compose_unit(F.partial(0), evec, U)
        pieces = cf_scale(outer, evec[i])
        ratio = cf_mul(outer, cf_mul(U.partial(i), cf_unit_pow(U, Scalar(-1))))
        out = cf_add(pieces, ratio)
    elif kind == "sub_poly":
        _, f, cut = a.recipe
        dcut = [(scalar_neg(scalar_mul(c, m.exps[i])), m) for c, m in cut
                if scalar_mul(c, m.exps[i]).expr != 0]
        out = cf_add(f.partial(i), cf_poly("dcut", a.arity, dcut))
    else:
        raise DomainError(f"no derivative rule for recipe {kind!r}")
    # the hat is always the exact termwise map; keep the recipe evaluator
    ev = out.eval if out.evaluator is not None else None
    if out.recipe[0] == "poly" and out.hat.is_provably_zero():
        hat = out.hat          # identically-zero partial (unused slot)
    else:
        hat = _partial_hat(a, i)
    return ClassFunction(f"x{i + 1}∂{i + 1}({a.name})", a.arity,
                         hat, ev, a.flags, out.recipe)


# -- constant term and monomial division ------------------------------------


def constant_term(a: ClassFunction) -> Scalar:
    """Coefficient of the unit monomial (equals the evaluator's value at
    0, which the test suites verify numerically)."""
    t = a.hat.term(0)
    if t is None:
        return ZERO
    if t[1].is_unit:
        return t[0]
    return ZERO


def monomial_division(a: ClassFunction, alpha) -> ClassFunction:
    """b with a = X^alpha * b; every support monomial must be divisible."""
    alpha = tuple(Scalar(e) if not isinstance(e, Scalar) else e
                  for e in alpha)
    if len(alpha) != a.arity:
        raise DomainError("monomial_division: exponent arity mismatch")
    if all(e.expr == 0 for e in alpha):
        return a
    finite = isinstance(a.hat.support_desc, FiniteList)
    if finite:
        for c, m in a.hat.materialize_all():
            for e, ae in zip(m.exps, alpha):
                if scalar_compare(e, ae) is Comparison.LT:
                    raise DomainError(
                        f"X^{tuple(str(x) for x in alpha)} does not divide "
                        f"the support monomial {m}")
    else:
        if a.arity != 1:
            raise BudgetError("monomial_division on an infinite "
                              "multi-variable support")
        t0 = a.hat.term(0)
        if t0 is not None and scalar_compare(t0[1].exps[0], alpha[0]) is Comparison.LT:
            raise DomainError("divisor exceeds the minimal support exponent")

    def gen():
        i = 0
        while True:
            t = a.hat.term(i)
            if t is None:
                return
            exps = [scalar_sub(e, ae) for e, ae in zip(t[1].exps, alpha)]
            yield (t[0], FormalMonomial(exps))
            i += 1

    hat = Series(formal_group(a.arity), Stream(gen()),
                 support_desc=a.hat.support_desc)

    def ev(xs):
        v = a.eval(xs)
        for x, e in zip(xs, alpha):
            if e.expr != 0:
                v = v / iv_pow_scalar(x, e)
        return v

    return ClassFunction(f"{a.name}/X^a", a.arity, hat, ev, a.flags,
                         ("mono_div", a, alpha))


# -- monomialization --------------------------------------------------------


def _leq(alpha, beta) -> bool:
    for x, y in zip(alpha, beta):
        if scalar_compare(x, y) is Comparison.GT:
            return False
    return True


def _minimal_elements(exps: list) -> list:
    out = []
    for a in exps:
        if any(b is not a and _leq(b, a) for b in exps):
            continue
        out.append(a)
    return out


def _minimal_scan(S: Series):
    """Minimal exponent tuples of the support, pulled lazily.

    Sound early stops keep infinite hats workable: a zero tuple dominates
    every later term (supports here are nonnegative), and once two
    incomparable minimals exist the caller can already act on the pair.
    A singleton that is neither zero nor backed by stream exhaustion
    cannot be certified, so that case errors rather than guessing.
    """
    from .hahn import STREAM_BUDGET
    minimal: list = []
    for i in range(STREAM_BUDGET):
        t = S.term(i)
        if t is None:
            return minimal
        e = t[1].exps
        if any(_leq(m, e) for m in minimal):
            continue
        minimal = [m for m in minimal if not _leq(e, m)]
        minimal.append(e)
        if all(x.expr == 0 for x in e):
            return [e]
        if len(minimal) >= 2:
            return minimal
    raise BudgetError(
        "monomialize: could not certify the minimal support within budget")


def support_measure(exps: list):
    """(number of incomparable pairs, total min-side conflict count):
    the lexicographic measure each rewriting step is expected to lower."""
    pairs = 0
    conflicts = 0
    for i in range(len(exps)):
        for j in range(i + 1, len(exps)):
            a, b = exps[i], exps[j]
            gt = sum(1 for x, y in zip(a, b)
                     if scalar_compare(x, y) is Comparison.GT)
            lt = sum(1 for x, y in zip(a, b)
                     if scalar_compare(x, y) is Comparison.LT)
            if gt and lt:
                pairs += 1
                conflicts += min(gt, lt)
    return (pairs, conflicts)


def _image_monomial(mbar, exps):
    m = mbar[0].pow(ZERO)
    for g, e in zip(mbar, exps):
        if e.expr != 0:
            m = m.mul(g.pow(e))
    return m


def monomialize(a: ClassFunction, mbar, step_budget: int = None,
                trace: list = None):
    """Rewrite a(m1,...,ml) as n0 * U(n1,...,nk) with U(0) != 0, or None
    when the composite series is zero.

    Arity 1 factors directly off the minimal support exponent (valid for
    infinite streams: m^r is injective in r).  Higher arities materialize
    the support and run the ramification/blow-up loop on the minimal
    exponents; `trace`, when given, collects the support measure after
    each step so tests can assert it decreases.
    """
    step_budget = MONOMIALIZE_STEP_BUDGET if step_budget is None else step_budget
    mbar = tuple(mbar)
    if len(mbar) != a.arity:
        raise DomainError("monomialize: argument count mismatch")
    for m in mbar:
        unit = m.pow(ZERO)
        if unit.compare(m) is not Comparison.GT:
            raise DomainError(f"monomialize: argument {m} is not < 1")

    if a.arity == 0:
        raise DomainError("monomialize needs at least one argument slot")

    if a.arity == 1:
        t0 = a.hat.term(0)
        if t0 is None:
            return None
        r0 = t0[1].exps[0]
        U = monomial_division(a, (r0,))
        return (mbar[0].pow(r0), mbar, U)

    cur = a
    cur_m = list(mbar)
    steps = 0
    while True:
        if trace is not None:
            exps = [t[1].exps for t in cur.hat.materialize_all()]
            if not exps:
                return None
            trace.append(support_measure(exps))
            minimal = _minimal_elements(exps)
        else:
            minimal = _minimal_scan(cur.hat)
            if not minimal:
                return None
        if len(minimal) == 1:
            alpha = minimal[0]
            U = monomial_division(cur, alpha)
            if isinstance(U.hat.support_desc, FiniteList):
                u_exps = [t[1].exps for t in U.hat.materialize_all()]
                used = [i for i in range(U.arity)
                        if any(e[i].expr != 0 for e in u_exps)]
            else:
                used = list(range(U.arity))
            n0 = _image_monomial(cur_m, alpha)
            if len(used) < U.arity:
                U = cf_project(U, used)
                nbar = tuple(cur_m[i] for i in used)
            else:
                nbar = tuple(cur_m)
            return (n0, nbar, U)

        alpha, beta = None, None
        for x in minimal:
            for y in minimal:
                if x is y:
                    continue
                if not _leq(x, y) and not _leq(y, x):
                    alpha, beta = x, y
                    break
            if alpha is not None:
                break
        i = next(k for k in range(len(alpha))
                 if scalar_compare(alpha[k], beta[k]) is Comparison.GT)
        j = next(k for k in range(len(alpha))
                 if scalar_compare(alpha[k], beta[k]) is Comparison.LT)
        c = scalar_div(scalar_sub(alpha[i], beta[i]),
                       scalar_sub(beta[j], alpha[j]))
        mi_c = cur_m[i].pow(c)
        rel = mi_c.compare(cur_m[j])
        if rel is Comparison.EQ:
            # m_i^c = m_j: multiplicative dependence, merge the variables
            cur = _cf_ramify(cur, i, j, c)
            del cur_m[j]
        elif rel is Comparison.GT:
            # m_j < m_i^c: X_j := X_i^c X_j, slot j gets m_i^-c m_j
            cur = _cf_blowup(cur, i, j, c)
            cur_m[j] = cur_m[i].pow(scalar_neg(c)).mul(cur_m[j])
        else:
            # m_i < m_j^(1/c): symmetric blow-up on slot i
            cinv = scalar_div(ONE, c)
            cur = _cf_blowup(cur, j, i, cinv)
            cur_m[i] = cur_m[j].pow(scalar_neg(cinv)).mul(cur_m[i])
        steps += 1
        if steps > step_budget:
            raise BudgetError(
                "monomialize: step budget exhausted",
                diagnostic=(tuple(str(e) for e in alpha),
                            tuple(str(e) for e in beta)))


# -- splitting --------------------------------------------------------------


def split(a: ClassFunction, mbar, g, rel: str) -> ClassFunction:
    """Subfunction of a keeping the support points whose image monomial
    under m̄ is <, =, or > the threshold g.

    Every kept/cut decision is a direct mono_compare of the image with g;
    no supremum over exponents is ever formed.  The evaluator side keeps
    quasianalyticity: whichever side of the cut is finite is evaluated as
    a polynomial, the other as the difference from a.
    """
    if rel not in ("<", "=", ">"):
        raise DomainError(f"bad split relation {rel!r}")
    if not a.flags.truncation_closed:
        raise DomainError(f"{a.name}: class is not truncation closed")
    mbar = tuple(mbar)
    if len(mbar) != a.arity:
        raise DomainError("split: argument count mismatch")

    want = {"<": Comparison.LT, "=": Comparison.EQ, ">": Comparison.GT}[rel]
    finite = isinstance(a.hat.support_desc, FiniteList)
    if not finite and a.arity != 1:
        raise BudgetError("split on an infinite multi-variable support")

    if finite:
        kept, cut = [], []
        for c, m in a.hat.materialize_all():
            image = _image_monomial(mbar, m.exps)
            (kept if image.compare(g) is want else cut).append((c, m))
        hat = series_from_terms(formal_group(a.arity), kept)
        ev = None
        if len(cut) < len(kept):
            cut_terms = list(cut)

            def ev(xs):
                return a.eval(xs) - _poly_eval_terms(cut_terms, xs)
        return ClassFunction(f"{a.name}|{rel}", a.arity, hat, ev, a.flags,
                             ("poly",) if ev is None else ("sub_poly", a, cut))

    # arity-1 stream: exponents ascend, so images descend; the > side is
    # a finite prefix and the < side a cofinite tail
    from .hahn import STREAM_BUDGET
    prefix = []
    idx = 0
    while True:
        t = a.hat.term(idx)
        if t is None:
            break
        image = _image_monomial(mbar, t[1].exps)
        cmp = image.compare(g)
        if cmp is Comparison.LT:
            break
        prefix.append((t, cmp))
        idx += 1
        if idx > STREAM_BUDGET:
            raise BudgetError("split: threshold scan exhausted the budget",
                              diagnostic=g)
    if rel == ">":
        kept = [t for t, cmp in prefix if cmp is Comparison.GT]
        return cf_poly(f"{a.name}|>", 1, kept, a.flags)
    if rel == "=":
        kept = [t for t, cmp in prefix if cmp is Comparison.EQ]
        return cf_poly(f"{a.name}|=", 1, kept, a.flags)
    skip = len(prefix)
    cut_terms = [t for t, _ in prefix]

    def gen():
        i = skip
        while True:
            t = a.hat.term(i)
            if t is None:
                return
            yield t
            i += 1

    hat = Series(formal_group(1), Stream(gen()), gauge=a.hat.gauge,
                 support_desc=a.hat.support_desc)

    def ev(xs):
        return a.eval(xs) - _poly_eval_terms(cut_terms, xs)
    return ClassFunction(f"{a.name}|<", 1, hat, ev, a.flags,
                         ("sub_poly", a, cut_terms))
