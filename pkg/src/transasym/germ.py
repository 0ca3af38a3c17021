"""Germs at +infinity, represented exactly and compared by sign.

A germ is a finite sum of atoms c * m0 * f(g1,...,gl): scalar
coefficient, trans-monomial prefactor, class function, and infinitesimal
trans-monomial arguments.  Sums and products stay in this shape, so
subtracting a germ from itself cancels at the coefficient level without
any analytic reasoning.

Sign determination is the one nontrivial operation: the atoms are
combined into a single prefactor times one class function over shared
argument monomials (an arity-1 function when every argument is a power
of a common base, which covers log-ladder germs and Dirichlet-type
supports), and monomialization of that function exposes the leading
monomial and a unit factor whose constant term carries the sign.  A germ
whose combined support cannot be monomialized within budget raises
rather than guessing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import mpmath

from .errors import BudgetError, DomainError, ZeroSeriesError
from .gqc import (
    ClassFunction,
    Flags,
    cf_compose_unit,
    cf_constant,
    cf_lift,
    cf_mul,
    cf_project,
    cf_unit_pow,
    constant_term,
    monomialize,
)
from .hahn import (
    FormalMonomial,
    Series,
    Stream,
    formal_group,
    series_add,
    series_from_terms,
    series_lift,
    series_scale,
    series_substitute,
)
from .ivnum import iv_pow_scalar, iv_scalar
from .scalar import (
    ONE,
    ZERO,
    Comparison,
    Scalar,
    format_scalar,
    scalar_add,
    scalar_compare,
    scalar_div,
    scalar_mul,
    scalar_neg,
    scalar_pow,
)
from .transmono import (
    TRANS_GROUP,
    TransMonomial,
    mono_compare,
    mono_derive,
    mono_inv,
    mono_log_germ,
    mono_mul,
    unit_monomial,
)

__all__ = [
    "Atom",
    "Germ",
    "germ_zero",
    "germ_from_terms",
    "germ_from_atom",
    "germ_add",
    "germ_sub",
    "germ_neg",
    "germ_scale",
    "germ_mul",
    "germ_mul_monomial",
    "germ_inv",
    "germ_div",
    "germ_compose",
    "germ_sign",
    "germ_leading",
    "germ_monomial_form",
    "germ_stream",
    "germ_derive",
    "germ_split_large",
    "germ_eval_iv",
    "mono_eval_iv",
    "render_germ",
]

LARGE_PART_BUDGET = 500

CONST_ONE = cf_constant(ONE, 0)


@dataclass(frozen=True, eq=False)
class Atom:
    coeff: Scalar
    m0: TransMonomial
    fn: ClassFunction
    args: Tuple[TransMonomial, ...]


_UNSET = object()


class Germ:
    __slots__ = ("atoms", "_form", "_stream")

    def __init__(self, atoms: Tuple[Atom, ...]):
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "_form", _UNSET)
        object.__setattr__(self, "_stream", _UNSET)

    def __setattr__(self, *a):
        raise AttributeError("Germ is immutable")

    @property
    def is_zero(self) -> bool:
        """Syntactically zero (no atoms); a germ can also vanish through
        cancellation, which only germ_sign detects."""
        return not self.atoms

    @property
    def height(self) -> int:
        h = 0
        for a in self.atoms:
            h = max(h, a.m0.height)
            for g in a.args:
                h = max(h, g.height)
        return h

    def __repr__(self):
        return f"Germ({render_germ(self, 3)})"


_ZERO_GERM = Germ(())


def germ_zero() -> Germ:
    return _ZERO_GERM


def _atom_key(a: Atom):
    return (id(a.fn), hash(a.m0), tuple(hash(g) for g in a.args))


def _merge(atoms) -> Tuple[Atom, ...]:
    out: list = []
    index: dict = {}
    for a in atoms:
        k = _atom_key(a)
        hit = None
        for i in index.get(k, ()):
            b = out[i]
            if b.m0 == a.m0 and all(x == y for x, y in zip(b.args, a.args)):
                hit = i
                break
        if hit is None:
            index.setdefault(k, []).append(len(out))
            out.append(a)
        else:
            b = out[hit]
            out[hit] = Atom(scalar_add(b.coeff, a.coeff), b.m0, b.fn, b.args)
    return tuple(a for a in out
                 if scalar_compare(a.coeff, ZERO) is not Comparison.EQ)


def germ_from_terms(terms) -> Germ:
    """Germ that is a finite sum of coefficient * trans-monomial."""
    return Germ(_merge(Atom(c, m, CONST_ONE, ()) for c, m in terms))


def germ_from_atom(coeff: Scalar, m0: TransMonomial, fn: ClassFunction,
                   args) -> Germ:
    args = tuple(args)
    if len(args) != fn.arity:
        raise DomainError(f"{fn.name}: expected {fn.arity} arguments")
    unit = unit_monomial()
    for g in args:
        if mono_compare(unit, g) is not Comparison.GT:
            raise DomainError(f"argument {g} of {fn.name} is not < 1")
    if scalar_compare(coeff, ZERO) is Comparison.EQ:
        return _ZERO_GERM
    return Germ((Atom(coeff, m0, fn, args),))


def germ_add(f: Germ, g: Germ) -> Germ:
    if not f.atoms:
        return g
    if not g.atoms:
        return f
    return Germ(_merge(f.atoms + g.atoms))


def germ_neg(f: Germ) -> Germ:
    return Germ(tuple(Atom(scalar_neg(a.coeff), a.m0, a.fn, a.args)
                      for a in f.atoms))


def germ_sub(f: Germ, g: Germ) -> Germ:
    return germ_add(f, germ_neg(g))


def germ_scale(f: Germ, c: Scalar) -> Germ:
    if scalar_compare(c, ZERO) is Comparison.EQ:
        return _ZERO_GERM
    return Germ(tuple(Atom(scalar_mul(a.coeff, c), a.m0, a.fn, a.args)
                      for a in f.atoms))


def germ_mul_monomial(f: Germ, m: TransMonomial) -> Germ:
    if m.is_unit:
        return f
    return Germ(tuple(Atom(a.coeff, mono_mul(a.m0, m), a.fn, a.args)
                      for a in f.atoms))


def germ_mul(f: Germ, g: Germ) -> Germ:
    out = []
    for a in f.atoms:
        for b in g.atoms:
            c = scalar_mul(a.coeff, b.coeff)
            m0 = mono_mul(a.m0, b.m0)
            if a.fn is CONST_ONE:
                out.append(Atom(c, m0, b.fn, b.args))
            elif b.fn is CONST_ONE:
                out.append(Atom(c, m0, a.fn, a.args))
            else:
                na, nb = a.fn.arity, b.fn.arity
                fn = cf_mul(cf_lift(a.fn, na + nb, list(range(na))),
                            cf_lift(b.fn, na + nb, list(range(na, na + nb))))
                out.append(Atom(c, m0, fn, a.args + b.args))
    return Germ(_merge(out))


# -- the term stream ---------------------------------------------------------


def germ_stream(f: Germ) -> Series:
    """f as one merged series of trans-monomial terms, largest first.

    Each atom substitutes its argument monomials into the class
    function's hat, so the atom becomes a lazy descending monomial
    stream; the finitely many streams are then merged with exact
    coefficient arithmetic.  Ties across atoms sum, exact zeros drop,
    and an identically-zero germ that only cancels term by term burns
    the pull budget instead of terminating.
    """
    got = f._stream
    if got is not _UNSET:
        return got
    pieces = []
    for a in f.atoms:
        if a.fn.arity == 0:
            v = scalar_mul(a.coeff, constant_term(a.fn))
            if scalar_compare(v, ZERO) is not Comparison.EQ:
                pieces.append(series_from_terms(TRANS_GROUP, [(v, a.m0)]))
        else:
            sub = series_substitute(a.fn.hat, a.args)
            pieces.append(series_scale(
                sub, a.coeff, None if a.m0.is_unit else a.m0))
    out = series_from_terms(TRANS_GROUP, [])
    for p in pieces:
        out = series_add(out, p)
    object.__setattr__(f, "_stream", out)
    return out


# -- combination and monomial form ------------------------------------------


def _power_of(m: TransMonomial, base: TransMonomial) -> Optional[Scalar]:
    """r with m = base^r, or None when m is not a power of base."""
    if base.is_unit:
        return None
    r = None
    for j in sorted(set(m.logpart) | set(base.logpart)):
        cm = m.logpart.get(j)
        cb = base.logpart.get(j)
        if cm is None or cb is None:
            return None
        rj = scalar_div(cm, cb)
        if r is None:
            r = rj
        elif scalar_compare(r, rj) is not Comparison.EQ:
            return None
    if r is None:
        # both log-free; exparts cannot determine a scalar ratio
        return None
    em, eb = m.expart, base.expart
    if em is None and eb is None:
        return r
    if em is None or eb is None:
        return None
    if germ_sign(germ_add(em, germ_scale(eb, scalar_neg(r)))) != 0:
        return None
    return r


def _and_flags(fns) -> Flags:
    classical = natural = closed = True
    for fn in fns:
        classical = classical and fn.flags.classical
        natural = natural and fn.flags.natural
        closed = closed and fn.flags.truncation_closed
    return Flags(classical=classical, natural=natural,
                 truncation_closed=closed)


def _combine(f: Germ):
    """One prefactor and one class function over shared slot monomials:
    f = m0* * A(slots).  Returns ("const", m0*, scalar) when no slots
    remain, else ("fn", m0*, A, slots)."""
    atoms = f.atoms
    m0star = atoms[0].m0
    for a in atoms[1:]:
        if mono_compare(a.m0, m0star) is Comparison.GT:
            m0star = a.m0
    inv_star = mono_inv(m0star)

    slot_list: list = []

    def slot_of(m) -> int:
        for i, s in enumerate(slot_list):
            if s == m:
                return i
        slot_list.append(m)
        return len(slot_list) - 1

    entries = []   # (coeff, ratio slot or None, fn, arg slot indices)
    for a in atoms:
        ratio = mono_mul(a.m0, inv_star)
        pr = None if ratio.is_unit else slot_of(ratio)
        pjs = tuple(slot_of(g) for g in a.args)
        entries.append((a.coeff, pr, a.fn, pjs))

    if not slot_list:
        v = ZERO
        for c, _, fn, _ in entries:
            v = scalar_add(v, scalar_mul(c, constant_term(fn)))
        return ("const", m0star, v)

    base = slot_list[0]
    exps = []
    for s in slot_list:
        r = _power_of(s, base)
        if r is None or scalar_compare(r, ZERO) is not Comparison.GT:
            exps = None
            break
        exps.append(r)

    flags = _and_flags(e[2] for e in entries)
    if exps is not None:
        cf = _combine_common_base(entries, exps, flags)
        return ("fn", m0star, cf, (base,))
    cf = _combine_multi_slot(entries, len(slot_list), flags)
    return ("fn", m0star, cf, tuple(slot_list))


def _combine_common_base(entries, exps, flags) -> ClassFunction:
    group1 = formal_group(1)
    pieces = []
    for c, pr, fn, pjs in entries:
        rho = exps[pr] if pr is not None else ZERO
        if fn.arity == 0:
            val = scalar_mul(c, constant_term(fn))
            if scalar_compare(val, ZERO) is Comparison.EQ:
                continue
            pieces.append(series_from_terms(
                group1, [(val, FormalMonomial((rho,)))]))
        else:
            gs = [FormalMonomial((exps[p],)) for p in pjs]
            sub = series_substitute(fn.hat, gs)
            mono = FormalMonomial((rho,)) if rho.expr != 0 else None
            pieces.append(series_scale(sub, c, mono))
    hat = series_from_terms(group1, [])
    for p in pieces:
        hat = series_add(hat, p)

    plan = [(c, exps[pr] if pr is not None else None, fn,
             tuple(exps[p] for p in pjs))
            for c, pr, fn, pjs in entries]

    def ev(xs):
        x = xs[0]
        acc = mpmath.iv.mpf(0)
        for c, rho, fn, arg_exps in plan:
            v = fn.eval(tuple(iv_pow_scalar(x, e) for e in arg_exps))
            if rho is not None:
                v = v * iv_pow_scalar(x, rho)
            acc += iv_scalar(c) * v
        return acc

    def rule(cf, i):
        # theta of c*X^rho*S(X^e..) is rho times the piece plus the
        # slotwise thetas scaled by their exponents; the result is a
        # combination over the same base again
        dentries = []
        for c, pr, fn, pjs in entries:
            rho = exps[pr] if pr is not None else ZERO
            if scalar_compare(rho, ZERO) is not Comparison.EQ:
                dentries.append((scalar_mul(c, rho), pr, fn, pjs))
            for j, p in enumerate(pjs):
                dentries.append((scalar_mul(c, exps[p]), pr,
                                 fn.partial(j), pjs))
        return _combine_common_base(dentries, exps, flags)

    return ClassFunction("combined", 1, hat, ev, flags, ("base", rule))


def _combine_multi_slot(entries, nslots, flags) -> ClassFunction:
    group = formal_group(nslots)
    pieces = []
    for c, pr, fn, pjs in entries:
        if fn.arity == 0:
            val = scalar_mul(c, constant_term(fn))
            if scalar_compare(val, ZERO) is Comparison.EQ:
                continue
            exps = [ZERO] * nslots
            if pr is not None:
                exps[pr] = ONE
            pieces.append(series_from_terms(
                group, [(val, FormalMonomial(exps))]))
        elif fn.arity == 1:
            lifted = series_lift(fn.hat, nslots, [pjs[0]])
            mono = None
            if pr is not None:
                exps = [ZERO] * nslots
                exps[pr] = ONE
                mono = FormalMonomial(exps)
            pieces.append(series_scale(lifted, c, mono))
        else:
            terms = []
            for cc, mm in fn.hat.materialize_all():
                exps = [ZERO] * nslots
                for p, e in zip(pjs, mm.exps):
                    exps[p] = scalar_add(exps[p], e)
                if pr is not None:
                    exps[pr] = scalar_add(exps[pr], ONE)
                terms.append((scalar_mul(c, cc), FormalMonomial(exps)))
            pieces.append(series_from_terms(group, terms))
    hat = series_from_terms(group, [])
    for p in pieces:
        hat = series_add(hat, p)

    plan = list(entries)

    def ev(xs):
        acc = mpmath.iv.mpf(0)
        for c, pr, fn, pjs in plan:
            v = fn.eval(tuple(xs[p] for p in pjs))
            if pr is not None:
                v = v * xs[pr]
            acc += iv_scalar(c) * v
        return acc

    return ClassFunction("combined", nslots, hat, ev, flags, ("base", None))


def germ_monomial_form(f: Germ):
    """f as lead_monomial * U(nbar) with U a unit, or None when f is
    zero.  Cached per germ object."""
    got = f._form
    if got is not _UNSET:
        return got
    form = _compute_form(f)
    object.__setattr__(f, "_form", form)
    return form


def _compute_form(f: Germ):
    if not f.atoms:
        return None
    combined = _combine(f)
    if combined[0] == "const":
        _, m0star, v = combined
        if scalar_compare(v, ZERO) is Comparison.EQ:
            return None
        return (m0star, (), cf_constant(v, 0))
    _, m0star, cf, slots = combined
    res = monomialize(cf, slots)
    if res is None:
        return None
    n0, nbar, U = res
    return (mono_mul(m0star, n0), nbar, U)


def germ_sign(f: Germ) -> int:
    """-1, 0, or +1; exact, from the leading stream coefficient."""
    t = germ_stream(f).term(0)
    if t is None:
        return 0
    return 1 if scalar_compare(t[0], ZERO) is Comparison.GT else -1


def germ_leading(f: Germ):
    """(coefficient, monomial) of the dominant term, or None for zero."""
    t = germ_stream(f).term(0)
    return None if t is None else (t[0], t[1])


def germ_inv(f: Germ) -> Germ:
    form = germ_monomial_form(f)
    if form is None:
        raise ZeroSeriesError("cannot invert the zero germ")
    lead, nbar, U = form
    if not nbar:
        return germ_from_terms(
            [(scalar_div(ONE, constant_term(U)), mono_inv(lead))])
    return germ_from_atom(ONE, mono_inv(lead),
                          cf_unit_pow(U, Scalar(-1)), nbar)


def germ_div(f: Germ, g: Germ) -> Germ:
    return germ_mul(f, germ_inv(g))


# -- composition -------------------------------------------------------------


def _hat_constant(a: ClassFunction) -> Scalar:
    t0 = a.hat.term(0)
    if t0 is not None and all(e.expr == 0 for e in t0[1].exps):
        return t0[0]
    return ZERO


def _cf_drop_zero_slots(a: ClassFunction, zero: set) -> ClassFunction:
    """Specialize the listed slots to exactly zero and project them out.
    Infinite multi-slot hats cannot be filtered term-by-term."""
    keep = [i for i in range(a.arity) if i not in zero]
    if a.arity == 1:
        return cf_constant(_hat_constant(a), 0)
    terms = []
    for c, m in a.hat.materialize_all():
        if any(m.exps[i].expr != 0 for i in zero):
            continue
        terms.append((c, FormalMonomial([m.exps[i] for i in keep])))
    group = ("formal", len(keep))
    hat = series_from_terms(group, terms)

    def ev(xs):
        full = []
        it = iter(xs)
        for i in range(a.arity):
            full.append(mpmath.iv.mpf(0) if i in zero else next(it))
        return a.eval(tuple(full))

    return ClassFunction(f"{a.name}|0", len(keep), hat, ev, a.flags,
                         ("base", None))


def _cf_rescale(a: ClassFunction, cs) -> ClassFunction:
    """a with slot i replaced by cs[i] * x_i, exactly on coefficients."""
    if all(c.expr == 1 for c in cs):
        return a

    def gen():
        i = 0
        while True:
            t = a.hat.term(i)
            if t is None:
                return
            c, m = t
            for cj, e in zip(cs, m.exps):
                if e.expr != 0:
                    c = scalar_mul(c, scalar_pow(cj, e))
            yield (c, m)
            i += 1

    hat = Series(a.hat.group, Stream(gen()), gauge=a.hat.gauge,
                 support_desc=a.hat.support_desc)
    civ = [iv_scalar(c) for c in cs]

    def ev(xs):
        return a.eval(tuple(c * x for c, x in zip(civ, xs)))

    classical = a.flags.classical and all(c.is_rational for c in cs)
    flags = Flags(classical=classical, natural=a.flags.natural,
                  truncation_closed=a.flags.truncation_closed)

    def rule(cf, i):
        return _cf_rescale(a.partial(i), cs)

    return ClassFunction(f"{a.name}~", a.arity, hat, ev, flags,
                         ("base", rule))


def germ_compose(a: ClassFunction, fbar) -> Germ:
    """a applied to infinitesimal germ arguments.

    Monomial arguments (scaled by exact constants) compose at any arity;
    a general small germ composes through its unit factorization, which
    is available at arity 1 only.
    """
    fbar = tuple(fbar)
    if len(fbar) != a.arity:
        raise DomainError(f"{a.name}: expected {a.arity} arguments")
    unit = unit_monomial()

    leads = [None if fi.is_zero else germ_leading(fi) for fi in fbar]
    nz = [i for i, ld in enumerate(leads) if ld is not None]
    if len(nz) < len(fbar):
        a = _cf_drop_zero_slots(a, {i for i in range(len(fbar))
                                    if i not in nz})
        fbar = tuple(fbar[i] for i in nz)
    if a.arity == 0:
        return germ_from_terms([(constant_term(a), unit)])

    for i in nz:
        if mono_compare(leads[i][1], unit) is not Comparison.LT:
            raise DomainError("composition argument is not < 1")

    plain = all(len(fi.atoms) == 1 and fi.atoms[0].fn is CONST_ONE
                for fi in fbar)
    if plain:
        cs = [fi.atoms[0].coeff for fi in fbar]
        ms = tuple(fi.atoms[0].m0 for fi in fbar)
        return germ_from_atom(ONE, unit, _cf_rescale(a, cs), ms)

    if a.arity == 1:
        n, nbar, U = germ_monomial_form(fbar[0])
        k = len(nbar)
        lifted = cf_lift(U, 1 + k, list(range(1, 1 + k)))
        evec = (ONE,) + (ZERO,) * k
        comp = cf_compose_unit(a, evec, lifted)
        return germ_from_atom(ONE, unit, comp, (n,) + nbar)

    raise DomainError(
        "multi-slot composition needs monomial arguments; general germ "
        "arguments compose at arity 1 only")


# -- derivation --------------------------------------------------------------


def germ_derive(f: Germ) -> Germ:
    """Termwise derivative d/dY: the prefactor differentiates through
    the monomial layer, each argument contributes its partial times the
    argument's logarithmic derivative."""
    total = _ZERO_GERM
    unit = unit_monomial()
    for a in f.atoms:
        dm0 = mono_derive(a.m0)
        if not dm0.is_zero:
            bare = Germ((Atom(a.coeff, unit, a.fn, a.args),))
            total = germ_add(total, germ_mul(dm0, bare))
        for j, mj in enumerate(a.args):
            loggy = germ_derive(mono_log_germ(mj))
            if loggy.is_zero:
                continue
            piece = Germ((Atom(a.coeff, a.m0, a.fn.partial(j), a.args),))
            total = germ_add(total, germ_mul(piece, loggy))
    return total


# -- three-way split at the unit threshold -----------------------------------


def _atom_support_large(a: Atom) -> bool:
    """True when every expansion monomial of the atom is > 1: log(m0)
    must strictly dominate log of each argument, so that no power of
    the arguments can ever pull a support monomial below the unit."""
    lm = germ_leading(mono_log_germ(a.m0))
    if lm is None:
        return False
    lmono = lm[1]
    for g in a.args:
        gl = germ_leading(mono_log_germ(g))
        if gl is None or mono_compare(lmono, gl[1]) is not Comparison.GT:
            return False
    return True


def germ_split_large(f: Germ, budget: int = None):
    """(f_large, f_rest) with every expansion monomial of f_large > 1
    and the leading monomial of f_rest <= 1.  Atoms whose whole support
    provably stays large move over in one piece; the remainder gives up
    leading terms while they are large.  A crossing that does not show
    up within budget raises BudgetError."""
    budget = LARGE_PART_BUDGET if budget is None else budget
    unit = unit_monomial()
    whole = []
    remaining = []
    for a in f.atoms:
        if a.args and mono_compare(a.m0, unit) is Comparison.GT and \
                _atom_support_large(a):
            whole.append(a)
        else:
            remaining.append(a)
    peeled = Germ(tuple(remaining))
    S = germ_stream(peeled)
    large = []
    for i in range(budget):
        t = S.term(i)
        if t is None or mono_compare(t[1], unit) is not Comparison.GT:
            break
        large.append(t)
    else:
        raise BudgetError("purely large part did not exhaust within budget",
                          diagnostic=large[-1][1] if large else None)
    rest = germ_sub(peeled, germ_from_terms(large)) if large else peeled
    return germ_add(Germ(tuple(whole)), germ_from_terms(large)), rest


# -- numeric evaluation ------------------------------------------------------


def mono_eval_iv(m: TransMonomial, yv):
    """Interval value of a trans-monomial at Y = yv (ambient precision).
    Iterated logs must stay positive at yv."""
    acc = mpmath.iv.mpf(0)
    ladder = [yv]

    def L(j: int):
        while len(ladder) <= j:
            prev = ladder[-1]
            if prev.a <= 0:
                raise DomainError(
                    "iterated log is not positive at this point")
            ladder.append(mpmath.iv.log(prev))
        return ladder[j]

    for j, c in sorted(m.logpart.items()):
        acc += iv_scalar(c) * L(j)
    if m.expart is not None:
        acc += germ_eval_iv(m.expart, yv)
    return mpmath.iv.exp(acc)


def germ_eval_iv(f: Germ, yv):
    """Interval value of the germ at Y = yv in the ambient precision."""
    acc = mpmath.iv.mpf(0)
    for a in f.atoms:
        v = iv_scalar(a.coeff) * mono_eval_iv(a.m0, yv)
        v = v * a.fn.eval(tuple(mono_eval_iv(g, yv) for g in a.args))
        acc += v
    return acc


# -- rendering ---------------------------------------------------------------


def _atom_str(a: Atom) -> str:
    bits = []
    coeff_one = scalar_compare(a.coeff, ONE) is Comparison.EQ
    if not coeff_one or (a.m0.is_unit and a.fn is CONST_ONE):
        bits.append(format_scalar(a.coeff))
    if not a.m0.is_unit:
        bits.append(str(a.m0))
    if a.fn is not CONST_ONE:
        args = ", ".join(str(g) for g in a.args)
        bits.append(f"{a.fn.name}({args})")
    return "*".join(bits) if bits else "1"


def render_germ(f: Germ, n: int = 4) -> str:
    if not f.atoms:
        return "0"
    atoms = list(f.atoms)
    try:
        atoms.sort(key=_MonoKey)
    except Exception:
        pass
    shown = atoms[:n]
    text = " + ".join(_atom_str(a) for a in shown)
    if len(atoms) > n:
        text += " + ..."
    return text.replace("+ -", "- ")


class _MonoKey:
    __slots__ = ("m",)

    def __init__(self, a: Atom):
        self.m = a.m0

    def __lt__(self, other):
        return mono_compare(self.m, other.m) is Comparison.GT
