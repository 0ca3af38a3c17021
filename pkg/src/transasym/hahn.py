"""Lazy exact arithmetic in Hahn fields R((G)) and rings R[[X*]].

A Series is a lazily enumerated sum of (coefficient, monomial) terms in
strictly decreasing monomial order, over either the formal variable group
X1..Xl (FormalMonomial, defined here) or the LE-monomial group (transmono).
Streams memoize their prefix under a lock, so two readers asking for n
terms observe the same n terms.

Order type is at most omega per request: every query that has to scan an
unbounded tail (truncation below a deep threshold, substitution across an
archimedean gap) counts pulls against STREAM_BUDGET and raises BudgetError
rather than diverging.  A series is "zero" only when that is provable
(finite description exhausted); symbolic streams promise nonzero
coefficients by construction.
"""

from __future__ import annotations

import heapq
import threading
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional, Sequence

from .errors import BudgetError, DomainError, GroupMismatchError, ZeroSeriesError
from .scalar import ONE, ZERO, Comparison, Scalar, scalar_add, scalar_compare, scalar_mul

__all__ = [
    "STREAM_BUDGET",
    "FormalMonomial",
    "formal_group",
    "formal_unit",
    "formal_var",
    "FiniteList",
    "Lattice",
    "SymbolicStream",
    "Stream",
    "Series",
    "series_from_terms",
    "series_zero",
    "series_add",
    "series_neg",
    "series_scale",
    "series_mul",
    "series_lt",
    "series_lm",
    "series_lc",
    "series_truncate",
    "series_substitute",
    "is_subseries",
    "series_power_sum",
    "series_map_coeff",
    "series_lift",
    "machine_records",
    "render_series",
]

# Pulls allowed per public query before giving up on an omega-limit tail.
STREAM_BUDGET = 200_000


# --------------------------------------------------------------------------
# Formal monomial group: X1^r1 ... Xl^rl with Scalar exponents.
# Order: lower total degree is bigger (the variables are infinitesimal);
# degree ties break lexicographically, bigger exponent vector first.


class FormalMonomial:
    __slots__ = ("exps",)

    def __init__(self, exps: Sequence[Scalar]):
        self.exps = tuple(Scalar(e) if not isinstance(e, Scalar) else e
                          for e in exps)

    @property
    def arity(self) -> int:
        return len(self.exps)

    @property
    def group(self):
        return ("formal", len(self.exps))

    @property
    def is_unit(self) -> bool:
        return all(e.expr == 0 for e in self.exps)

    def degree(self) -> Scalar:
        d = ZERO
        for e in self.exps:
            d = scalar_add(d, e)
        return d

    def mul(self, other: "FormalMonomial") -> "FormalMonomial":
        if len(other.exps) != len(self.exps):
            raise GroupMismatchError("formal monomials of different arity")
        return FormalMonomial(tuple(scalar_add(a, b)
                                    for a, b in zip(self.exps, other.exps)))

    def pow(self, r: Scalar) -> "FormalMonomial":
        return FormalMonomial(tuple(scalar_mul(e, r) for e in self.exps))

    def compare(self, other: "FormalMonomial") -> Comparison:
        if len(other.exps) != len(self.exps):
            raise GroupMismatchError("formal monomials of different arity")
        c = scalar_compare(other.degree(), self.degree())
        if c is not Comparison.EQ:
            return c
        for a, b in zip(self.exps, other.exps):
            c = scalar_compare(a, b)
            if c is not Comparison.EQ:
                return c
        return Comparison.EQ

    def __eq__(self, other):
        return (isinstance(other, FormalMonomial)
                and self.compare(other) is Comparison.EQ)

    def __hash__(self):
        return hash(tuple(e.expr for e in self.exps))

    def __str__(self):
        if self.is_unit:
            return "1"
        parts = []
        for i, e in enumerate(self.exps):
            if e.expr == 0:
                continue
            name = "X" if len(self.exps) == 1 else f"X{i + 1}"
            if e.expr == 1:
                parts.append(name)
            else:
                parts.append(f"{name}^({e})")
        return "*".join(parts)

    def __repr__(self):
        return f"FormalMonomial({self})"


def formal_group(ell: int):
    return ("formal", ell)


def formal_unit(ell: int) -> FormalMonomial:
    return FormalMonomial((ZERO,) * ell)


def formal_var(ell: int, i: int, power: Scalar = None) -> FormalMonomial:
    exps = [ZERO] * ell
    exps[i] = power if power is not None else Scalar(1)
    return FormalMonomial(exps)


# --------------------------------------------------------------------------
# Support descriptions


@dataclass(frozen=True)
class FiniteList:
    """Support is exactly the (finite) content of the stream."""

    size: int


@dataclass(frozen=True)
class Lattice:
    """Exponents lie in offset + N-combinations of the generators."""

    gens: tuple
    offset: object = None  # Scalar; None means 0

    def __post_init__(self):
        for g in self.gens:
            if scalar_compare(g, ZERO) is Comparison.LT:
                raise DomainError("lattice generators must be >= 0")


@dataclass(frozen=True)
class SymbolicStream:
    """Named infinite support; certificate (if any) names a Q-linearly
    independent family of exponents witnessing non-grid-based-ness."""

    name: str
    certificate: Optional[str] = None


# --------------------------------------------------------------------------
# Memoized lazy streams


class Stream:
    """Memoized generator of (Scalar, monomial) terms, strictly decreasing.

    The decreasing invariant is asserted at materialization time: a stream
    that emits out of order is a bug, not an input condition.
    """

    __slots__ = ("_memo", "_iter", "_done", "_lock")

    def __init__(self, iterable: Iterable):
        self._memo: list = []
        self._iter = iter(iterable)
        self._done = False
        self._lock = threading.RLock()

    def get(self, i: int):
        """i-th term, or None past the end."""
        with self._lock:
            while len(self._memo) <= i and not self._done:
                try:
                    term = next(self._iter)
                except StopIteration:
                    self._done = True
                    self._iter = None
                    break
                if self._memo:
                    prev = self._memo[-1][1]
                    if prev.compare(term[1]) is not Comparison.GT:
                        raise AssertionError(
                            f"stream order violation: {prev} then {term[1]}")
                self._memo.append(term)
            return self._memo[i] if i < len(self._memo) else None

    def known_exhausted_at(self, i: int) -> bool:
        with self._lock:
            return self._done and i >= len(self._memo)


def _stream_from_list(terms: list) -> Stream:
    return Stream(iter(terms))


# --------------------------------------------------------------------------
# Series


class Series:
    """Hahn series handle: group tag + term stream + gauge + support."""

    __slots__ = ("group", "stream", "gauge", "support_desc")

    def __init__(self, group, stream: Stream,
                 gauge: Optional[Callable] = None,
                 support_desc=None):
        self.group = group
        self.stream = stream
        self.gauge = gauge if gauge is not None else self._scan_gauge
        self.support_desc = support_desc

    # -- queries ---------------------------------------------------------

    def term(self, i: int):
        return self.stream.get(i)

    def prefix(self, n: int, budget: int = None) -> list:
        """First n terms (fewer if the series ends first)."""
        budget = STREAM_BUDGET if budget is None else budget
        if n > budget:
            raise BudgetError(f"prefix({n}) exceeds stream budget")
        out = []
        for i in range(n):
            t = self.term(i)
            if t is None:
                break
            out.append(t)
        return out

    def terms_above(self, g, strict: bool = True, budget: int = None) -> list:
        """All terms with monomial > g (>= g when strict=False).

        Terminates only when the stream sinks below g within the budget;
        an archimedean gap raises BudgetError (omega-limit tail)."""
        budget = STREAM_BUDGET if budget is None else budget
        out = []
        for i in range(budget):
            t = self.term(i)
            if t is None:
                return out
            c = t[1].compare(g)
            if c is Comparison.GT or (not strict and c is Comparison.EQ):
                out.append(t)
            else:
                return out
        raise BudgetError(f"terms_above: budget {budget} exhausted",
                          diagnostic=g)

    def coefficient_of(self, g, budget: int = None) -> Scalar:
        for t in self.terms_above(g, strict=False, budget=budget):
            if t[1].compare(g) is Comparison.EQ:
                return t[0]
        return ZERO

    def is_provably_zero(self) -> bool:
        return self.term(0) is None

    def materialize_all(self, budget: int = None) -> list:
        """Entire term list; errors if the stream does not end in budget."""
        budget = STREAM_BUDGET if budget is None else budget
        out = []
        for i in range(budget):
            t = self.term(i)
            if t is None:
                return out
            out.append(t)
        raise BudgetError("materialize_all: series did not terminate in budget")

    def _scan_gauge(self, g, budget: int = None) -> int:
        return len(self.terms_above(g, strict=True, budget=budget))

    def __repr__(self):
        head = []
        for i in range(4):
            t = self.stream._memo[i] if i < len(self.stream._memo) else None
            if t is None:
                break
            head.append(f"{t[0]}*{t[1]}")
        tail = "" if self.stream._done and len(self.stream._memo) <= 4 else " + ..."
        return f"Series({' + '.join(head) or '0'}{tail})"


def series_zero(group) -> Series:
    return Series(group, _stream_from_list([]), gauge=lambda g, budget=None: 0,
                  support_desc=FiniteList(0))


def series_from_terms(group, terms: Iterable, support_desc=None) -> Series:
    """Build a finite series: sorts descending, merges equal monomials,
    drops zero coefficients."""
    items = [(Scalar(c) if not isinstance(c, Scalar) else c, m)
             for c, m in terms]
    # insertion sort by compare (lists are small; avoids needing a key)
    ordered: list = []
    for c, m in items:
        placed = False
        for k, (c2, m2) in enumerate(ordered):
            cmp = m.compare(m2)
            if cmp is Comparison.GT:
                ordered.insert(k, (c, m))
                placed = True
                break
            if cmp is Comparison.EQ:
                ordered[k] = (scalar_add(c2, c), m2)
                placed = True
                break
        if not placed:
            ordered.append((c, m))
    final = [(c, m) for c, m in ordered
             if scalar_compare(c, ZERO) is not Comparison.EQ]
    return Series(group, _stream_from_list(final),
                  gauge=None,
                  support_desc=support_desc or FiniteList(len(final)))


def _check_same_group(a: Series, b: Series):
    if a.group != b.group:
        raise GroupMismatchError(f"series groups differ: {a.group} vs {b.group}")


# -- addition ---------------------------------------------------------------


def series_add(a: Series, b: Series) -> Series:
    _check_same_group(a, b)

    def merged() -> Iterator:
        i = j = 0
        idle = 0
        while True:
            ta, tb = a.term(i), b.term(j)
            if ta is None and tb is None:
                return
            if ta is None:
                yield tb
                j += 1
                continue
            if tb is None:
                yield ta
                i += 1
                continue
            c = ta[1].compare(tb[1])
            if c is Comparison.GT:
                yield ta
                i += 1
                idle = 0
            elif c is Comparison.LT:
                yield tb
                j += 1
                idle = 0
            else:
                s = scalar_add(ta[0], tb[0])
                i += 1
                j += 1
                if scalar_compare(s, ZERO) is not Comparison.EQ:
                    yield (s, ta[1])
                    idle = 0
                else:
                    # term-by-term cancellation with no output: a tail
                    # that is identically zero must fail, not hang
                    idle += 1
                    if idle > STREAM_BUDGET:
                        raise BudgetError(
                            "series_add: cancellation did not resolve "
                            "within budget")

    desc = None
    if isinstance(a.support_desc, FiniteList) and isinstance(b.support_desc, FiniteList):
        desc = FiniteList(a.support_desc.size + b.support_desc.size)

    def gauge(g, budget=None):
        return a.gauge(g) + b.gauge(g)

    return Series(a.group, Stream(merged()), gauge=gauge, support_desc=desc)


def series_neg(a: Series) -> Series:
    def negated() -> Iterator:
        i = 0
        while True:
            t = a.term(i)
            if t is None:
                return
            yield (-t[0], t[1])
            i += 1
    return Series(a.group, Stream(negated()), gauge=a.gauge,
                  support_desc=a.support_desc)


def series_scale(a: Series, c: Scalar, m=None) -> Series:
    """c * m * a for a scalar c and optional monomial m."""
    if scalar_compare(c, ZERO) is Comparison.EQ:
        return series_zero(a.group)

    def scaled() -> Iterator:
        i = 0
        while True:
            t = a.term(i)
            if t is None:
                return
            mono = t[1] if m is None else t[1].mul(m)
            yield (scalar_mul(c, t[0]), mono)
            i += 1

    if m is None:
        gauge = a.gauge
    else:
        minv = m.pow(Scalar(-1))

        def gauge(g, budget=None):
            return a.gauge(g.mul(minv))

    return Series(a.group, Stream(scaled()), gauge=gauge,
                  support_desc=a.support_desc)


# -- multiplication ---------------------------------------------------------


class _MaxKey:
    """heapq adaptor: min-heap pops the largest monomial first."""

    __slots__ = ("mono", "payload")

    def __init__(self, mono, payload):
        self.mono = mono
        self.payload = payload

    def __lt__(self, other):
        return self.mono.compare(other.mono) is Comparison.GT


def series_mul(a: Series, b: Series) -> Series:
    """Cauchy product via a priority-queue frontier over index pairs.

    The frontier invariant (pair (i,j) enters the heap only after (i-1,j)
    and (i,j-1) left it) guarantees the popped monomial is the global
    maximum of everything not yet emitted, because term monomials decrease
    in each stream and the group order is translation invariant."""
    _check_same_group(a, b)
    if a.term(0) is None or b.term(0) is None:
        return series_zero(a.group)

    def product() -> Iterator:
        heap: list = []
        seen = set()

        def push(i: int, j: int):
            if (i, j) in seen:
                return
            ta, tb = a.term(i), b.term(j)
            if ta is None or tb is None:
                return
            seen.add((i, j))
            heapq.heappush(heap, _MaxKey(ta[1].mul(tb[1]), (i, j)))

        push(0, 0)
        pulls = 0
        while heap:
            top = heapq.heappop(heap)
            mono = top.mono
            coeff_pairs = [top.payload]
            while heap and heap[0].mono.compare(mono) is Comparison.EQ:
                coeff_pairs.append(heapq.heappop(heap).payload)
            total = ZERO
            for (i, j) in coeff_pairs:
                total = scalar_add(total,
                                   scalar_mul(a.term(i)[0], b.term(j)[0]))
                push(i + 1, j)
                push(i, j + 1)
            pulls += len(coeff_pairs)
            if pulls > STREAM_BUDGET:
                raise BudgetError("series_mul: stream budget exhausted")
            if scalar_compare(total, ZERO) is not Comparison.EQ:
                yield (total, mono)

    desc = None
    if isinstance(a.support_desc, FiniteList) and isinstance(b.support_desc, FiniteList):
        desc = FiniteList(a.support_desc.size * b.support_desc.size)
    return Series(a.group, Stream(product()), support_desc=desc)


# -- leading term -----------------------------------------------------------


def series_lt(a: Series):
    t = a.term(0)
    if t is None:
        raise ZeroSeriesError("leading term of the zero series")
    return t


def series_lm(a: Series):
    return series_lt(a)[1]


def series_lc(a: Series) -> Scalar:
    return series_lt(a)[0]


# -- truncation -------------------------------------------------------------


def series_truncate(a: Series, g, rel: str) -> Series:
    """Subseries with monomials <, =, or > g.  The three parts partition a.

    rel '>' is a take-while and always terminates; '<' and '=' must scan
    past every term >= g first, so a tail stuck above g exhausts the pull
    budget (BudgetError) instead of spinning."""
    if rel not in ("<", "=", ">"):
        raise DomainError(f"bad truncation relation {rel!r}")

    def filtered() -> Iterator:
        i = 0
        pulls = 0
        while True:
            t = a.term(i)
            if t is None:
                return
            c = t[1].compare(g)
            if rel == ">":
                if c is Comparison.GT:
                    yield t
                else:
                    return
            elif rel == "=":
                if c is Comparison.EQ:
                    yield t
                    return
                if c is Comparison.LT:
                    return
            else:
                if c is Comparison.LT:
                    yield t
            i += 1
            pulls += 1
            if pulls > STREAM_BUDGET:
                raise BudgetError(f"series_truncate({rel}): budget exhausted",
                                  diagnostic=g)

    def gauge(h, budget=None):
        return a.gauge(h)

    return Series(a.group, Stream(filtered()), gauge=gauge,
                  support_desc=a.support_desc)


# -- substitution -----------------------------------------------------------


def series_substitute(F: Series, gs: Sequence, budget: int = None) -> Series:
    """Substitute monomials g1..gl (each < 1) for the formal variables.

    Emits Sum b_g * g in decreasing order of the target group. F's stream
    arrives in ascending total degree, and images of degree-D terms are
    bounded by gmax^D, so a pending candidate is safe to emit once it
    exceeds that bound.  Crossing an archimedean gap (no D works) burns
    the pull budget and raises BudgetError."""
    if not isinstance(F.group, tuple) or F.group[0] != "formal":
        raise DomainError("series_substitute needs a formal-variable series")
    ell = F.group[1]
    if len(gs) != ell:
        raise DomainError(f"expected {ell} substitution monomials, got {len(gs)}")
    budget = STREAM_BUDGET if budget is None else budget

    unit = None
    gmax = None
    for g in gs:
        if gs[0].group != g.group:
            raise GroupMismatchError("substitution monomials in different groups")
        unit = g.pow(ZERO)
        if unit.compare(g) is not Comparison.GT:
            raise DomainError(f"substitution monomial {g} is not < 1")
        if gmax is None or g.compare(gmax) is Comparison.GT:
            gmax = g

    def image(exps) -> object:
        m = unit
        for g, r in zip(gs, exps):
            if r.expr != 0:
                m = m.mul(g.pow(r))
        return m

    if ell == 1:
        # one variable: ascending degree maps to strictly descending
        # images, so each term is emitted the moment it is pulled and a
        # zero tail in F costs nothing here
        g0 = gs[0]

        def monotone() -> Iterator:
            i = 0
            while True:
                t = F.term(i)
                if t is None:
                    return
                coeff, fmono = t
                r = fmono.exps[0]
                if scalar_compare(r, ZERO) is Comparison.LT:
                    raise DomainError(
                        "substitution needs exponents >= 0 in every variable")
                yield (coeff, g0.pow(r))
                i += 1

        return Series(g0.group, Stream(monotone()))

    def substituted() -> Iterator:
        pending: list = []   # _MaxKey(image_monomial, coeff)
        next_idx = 0
        degree_pulled = None  # all terms of total degree <= this were pulled
        exhausted = False
        pulls = 0
        while True:
            # emit everything provably maximal
            while pending:
                safe = exhausted
                if not safe and degree_pulled is not None:
                    bound = gmax.pow(degree_pulled)
                    safe = pending[0].mono.compare(bound) is Comparison.GT
                if not safe:
                    break
                top = heapq.heappop(pending)
                mono = top.mono
                total = top.payload
                while pending and pending[0].mono.compare(mono) is Comparison.EQ:
                    total = scalar_add(total, heapq.heappop(pending).payload)
                if scalar_compare(total, ZERO) is not Comparison.EQ:
                    yield (total, mono)
            if exhausted and not pending:
                return
            if exhausted:
                continue
            t = F.term(next_idx)
            if t is None:
                exhausted = True
                continue
            coeff, fmono = t
            for r in fmono.exps:
                if scalar_compare(r, ZERO) is Comparison.LT:
                    raise DomainError(
                        "substitution needs exponents >= 0 in every variable")
            heapq.heappush(pending, _MaxKey(image(fmono.exps), coeff))
            degree_pulled = fmono.degree()
            next_idx += 1
            pulls += 1
            if pulls > budget:
                raise BudgetError("series_substitute: budget exhausted",
                                  diagnostic=pending[0].mono if pending else None)

    return Series(gs[0].group if gs else ("formal", 0), Stream(substituted()))


# -- power sums of small series ---------------------------------------------


def series_power_sum(S: Series, coef_fn: Callable[[int], Scalar],
                     budget: int = None) -> Series:
    """Sum over k >= 0 of coef_fn(k) * S^k for a formal series S all of
    whose monomials have positive total degree.

    The frontier runs over (power k, term index): popping (k, i) admits
    (k, i+1), and popping (k, 0) admits (k+1, 0); lm(S)^k decreases in k,
    so the popped monomial is always the global maximum.  This one
    enumerator serves 1/U, U^c, log U, and exp composed with a small
    series, by choice of the coefficient sequence."""
    if not isinstance(S.group, tuple) or S.group[0] != "formal":
        raise DomainError("series_power_sum needs a formal-variable series")
    budget = STREAM_BUDGET if budget is None else budget
    t0 = S.term(0)
    if t0 is not None and scalar_compare(t0[1].degree(), ZERO) is not Comparison.GT:
        raise DomainError("series_power_sum needs strictly positive degrees")
    unit = formal_unit(S.group[1])

    powers = [series_from_terms(S.group, [(ONE, unit)])]

    def power(k: int) -> Series:
        while len(powers) <= k:
            powers.append(series_mul(powers[-1], S))
        return powers[k]

    def summed() -> Iterator:
        heap: list = []

        def push(k: int, i: int):
            t = power(k).term(i)
            if t is not None:
                heapq.heappush(heap, _MaxKey(t[1], (k, i)))

        push(0, 0)
        pulls = 0
        while heap:
            top = heapq.heappop(heap)
            mono = top.mono
            entries = [top.payload]
            while heap and heap[0].mono.compare(mono) is Comparison.EQ:
                entries.append(heapq.heappop(heap).payload)
            total = ZERO
            for (k, i) in entries:
                c = power(k).term(i)[0]
                total = scalar_add(total, scalar_mul(coef_fn(k), c))
                push(k, i + 1)
                if i == 0:
                    push(k + 1, 0)
            pulls += len(entries)
            if pulls > budget:
                raise BudgetError("series_power_sum: budget exhausted")
            if scalar_compare(total, ZERO) is not Comparison.EQ:
                yield (total, mono)

    return Series(S.group, Stream(summed()))


# -- termwise helpers -------------------------------------------------------


def series_map_coeff(a: Series, fn: Callable) -> Series:
    """Termwise coefficient map fn(coeff, monomial) -> Scalar, dropping
    the terms the map sends to zero.  A map that kills an infinite tail
    burns the stream budget rather than spinning."""

    def mapped() -> Iterator:
        i = 0
        skipped = 0
        while True:
            t = a.term(i)
            if t is None:
                return
            c = fn(t[0], t[1])
            if scalar_compare(c, ZERO) is not Comparison.EQ:
                yield (c, t[1])
                skipped = 0
            else:
                skipped += 1
                if skipped > STREAM_BUDGET:
                    raise BudgetError(
                        "series_map_coeff: zero tail exhausted the budget")
            i += 1

    def gauge(g, budget=None):
        return a.gauge(g)

    return Series(a.group, Stream(mapped()), gauge=gauge,
                  support_desc=a.support_desc)


def series_lift(a: Series, total: int, slots: Sequence[int]) -> Series:
    """Reindex a formal series of arity k into arity `total`, variable i
    landing at position slots[i].  slots must be strictly increasing so
    the degree-then-lex order (hence the stream order) is preserved."""
    if not isinstance(a.group, tuple) or a.group[0] != "formal":
        raise DomainError("series_lift needs a formal-variable series")
    k = a.group[1]
    if len(slots) != k or list(slots) != sorted(set(slots)):
        raise DomainError("slots must be strictly increasing and match arity")
    if slots and (slots[0] < 0 or slots[-1] >= total):
        raise DomainError("slot out of range")

    def lifted() -> Iterator:
        i = 0
        while True:
            t = a.term(i)
            if t is None:
                return
            exps = [ZERO] * total
            for pos, e in zip(slots, t[1].exps):
                exps[pos] = e
            yield (t[0], FormalMonomial(exps))
            i += 1

    return Series(formal_group(total), Stream(lifted()),
                  support_desc=a.support_desc)


# -- subseries --------------------------------------------------------------


def is_subseries(a: Series, b: Series, prefix: int) -> bool:
    """Do the first `prefix` terms of a all appear in b, same coefficients?"""
    terms = a.prefix(prefix)
    j = 0
    for c, m in terms:
        while True:
            tb = b.term(j)
            if tb is None:
                return False
            cmp = tb[1].compare(m)
            if cmp is Comparison.GT:
                j += 1
                continue
            if cmp is Comparison.EQ:
                if scalar_compare(tb[0], c) is not Comparison.EQ:
                    return False
                j += 1
                break
            return False
    return True


# -- rendering --------------------------------------------------------------


def machine_records(a: Series, n: int) -> list:
    """Line-delimited record form: one dict per emitted term."""
    from .scalar import format_scalar
    return [{"coefficient": format_scalar(c), "monomial": str(m)}
            for c, m in a.prefix(n)]


def render_series(a: Series, n: int) -> str:
    """`c1*m1 + c2*m2 + ... + O(m_{n+1})` over the first n terms."""
    terms = a.prefix(n + 1)
    shown = terms[:n]
    if not shown:
        if a.stream.known_exhausted_at(0):
            return "0"
        return "O(?)"
    parts = []
    for c, m in shown:
        cs = str(c)
        ms = str(m)
        if ms == "1":
            parts.append(cs if "/" not in cs and " " not in cs else f"({cs})")
        elif cs == "1":
            parts.append(ms)
        elif cs == "-1":
            parts.append(f"-{ms}")
        else:
            safe = cs if ("+" not in cs and " " not in cs and "/" not in cs.lstrip("-")) else f"({cs})"
            parts.append(f"{safe}*{ms}")
    out = " + ".join(parts).replace("+ -", "- ")
    if len(terms) > n:
        out += f" + O({terms[n][1]})"
    return out
