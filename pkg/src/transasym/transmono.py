"""LE-monomials: real powers of Y and its iterated logs times exp of a
purely large germ, with exact group arithmetic and valuation order.

Internally a monomial is stored through its logarithm, split into a
linear combination of the ladder

    L_0 = Y,  L_1 = log Y,  L_2 = log log Y,  ...

(the ``logpart`` dict, index j -> coefficient of L_j) plus a purely
large germ with no L_j in its support (the ``expart``).  That split is
unique, so equality is syntactic on the pure exp-log fragment, products
merge dicts, and powers scale them.  The monomial reads back as

    m = Y^{c_1} * (log Y)^{c_2} * (log^2 Y)^{c_3} * ... * exp(c_0*Y + E).

The depth/power/exponent-germ view (one iterated-log level carrying the
power, everything shallower folded into the exponent germ) is derived
on demand; constructors keep it minimal by always storing the full
split.  Comparisons resolve syntactically when both exparts are absent
and otherwise fall back to the sign of the germ log(m) - log(n).
"""

from __future__ import annotations

import re
from typing import Dict, Optional

from .errors import DomainError, ParseError
from .scalar import ONE, ZERO, Comparison, Scalar, scalar_add, scalar_compare, scalar_mul

__all__ = [
    "TransMonomial",
    "TRANS_GROUP",
    "unit_monomial",
    "y_power",
    "log_power",
    "exp_monomial",
    "log_ladder_monomial",
    "mono_mul",
    "mono_pow",
    "mono_inv",
    "mono_compare",
    "mono_derive",
    "mono_log_germ",
    "parse_monomial",
]

TRANS_GROUP = ("trans",)


class TransMonomial:
    __slots__ = ("logpart", "expart", "_str")

    def __init__(self, logpart: Dict[int, Scalar], expart=None):
        clean = {}
        for j, c in logpart.items():
            if not isinstance(c, Scalar):
                c = Scalar(c)
            if scalar_compare(c, ZERO) is not Comparison.EQ:
                clean[int(j)] = c
        if expart is not None and expart.is_zero:
            expart = None
        object.__setattr__(self, "logpart", clean)
        object.__setattr__(self, "expart", expart)
        object.__setattr__(self, "_str", None)

    def __setattr__(self, *a):
        raise AttributeError("TransMonomial is immutable")

    # -- derived structure ----------------------------------------------

    @property
    def group(self):
        return TRANS_GROUP

    @property
    def is_unit(self) -> bool:
        return not self.logpart and self.expart is None

    @property
    def depth(self) -> int:
        """Deepest iterated-log level carrying a visible power."""
        ks = [j for j in self.logpart if j >= 1]
        return max(ks) - 1 if ks else 0

    @property
    def power(self) -> Scalar:
        """Exponent of Y_depth = log_depth Y."""
        ks = [j for j in self.logpart if j >= 1]
        return self.logpart[max(ks)] if ks else ZERO

    @property
    def height(self) -> int:
        """Exp-tower bookkeeping: 0 for pure powers of the log ladder."""
        h = 0
        if 0 in self.logpart:
            h = 1
        if self.expart is not None:
            h = max(h, 1 + getattr(self.expart, "height", 0))
        return h

    def exponent_germ(self):
        """The purely large germ L with m = Y_depth^power * exp(L), or
        None when the monomial is a plain product of ladder powers."""
        ks = [j for j in self.logpart if j >= 1]
        top = max(ks) if ks else None
        rest = {j: c for j, c in self.logpart.items() if j != top}
        if not rest and self.expart is None:
            return None
        from .germ import germ_add, germ_from_terms, germ_zero
        g = germ_from_terms([(c, log_ladder_monomial(j)) for j, c in
                             sorted(rest.items())]) if rest else germ_zero()
        if self.expart is not None:
            g = germ_add(g, self.expart)
        return g

    # -- equality and hashing -------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, TransMonomial):
            return NotImplemented
        return self.compare(other) is Comparison.EQ

    def __hash__(self):
        # hash only the syntactic skeleton; germ exparts hash by identity
        items = tuple(sorted((j, c.expr) for j, c in self.logpart.items()))
        return hash((items, id(self.expart) if self.expart is not None else None))

    # -- group protocol (same shape as FormalMonomial) -------------------

    def mul(self, other: "TransMonomial") -> "TransMonomial":
        return mono_mul(self, other)

    def pow(self, r: Scalar) -> "TransMonomial":
        return mono_pow(self, r)

    def compare(self, other: "TransMonomial") -> Comparison:
        return mono_compare(self, other)

    # -- display --------------------------------------------------------

    def __str__(self):
        if self._str is not None:
            return self._str
        s = self._render()
        object.__setattr__(self, "_str", s)
        return s

    def _render(self) -> str:
        if self.is_unit:
            return "1"
        factors = []
        for j in sorted(k for k in self.logpart if k >= 1):
            c = self.logpart[j]
            base = "Y" if j == 1 else ("log(Y)" if j == 2 else f"log^{j - 1}(Y)")
            if c.expr == 1:
                factors.append(base)
            else:
                factors.append(f"{base}^{_exp_str(c)}")
        arg = self._exp_argument_str()
        if arg is not None:
            factors.append(f"exp({arg})")
        return "*".join(factors)

    def _exp_argument_str(self) -> Optional[str]:
        c0 = self.logpart.get(0)
        if c0 is None and self.expart is None:
            return None
        parts = []
        if c0 is not None:
            parts.append("Y" if c0.expr == 1 else
                         ("-Y" if c0.expr == -1 else f"{_coeff_str(c0)}*Y"))
        if self.expart is not None:
            from .germ import render_germ
            parts.append(render_germ(self.expart, 4))
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"TransMonomial({self})"


def _exp_str(c: Scalar) -> str:
    s = str(c)
    plain = s.lstrip("-")
    if plain.isdigit():
        return s if "-" not in s else f"({s})"
    return f"({s})"


def _coeff_str(c: Scalar) -> str:
    s = str(c)
    if " " in s or "+" in s[1:] or "/" in s:
        return f"({s})"
    return s


# -- constructors -----------------------------------------------------------


_UNIT = TransMonomial({})


def unit_monomial() -> TransMonomial:
    return _UNIT


def y_power(r) -> TransMonomial:
    return TransMonomial({1: Scalar(r)})


def log_power(k: int, r) -> TransMonomial:
    """(log^k Y)^r for k >= 1; log_power(0, r) is y_power(r)."""
    if k < 0:
        raise DomainError("negative log depth")
    return TransMonomial({k + 1: Scalar(r)})


def log_ladder_monomial(j: int) -> TransMonomial:
    """L_j: Y for j=0, log^j Y for j >= 1."""
    return TransMonomial({j + 1: ONE})


def exp_monomial(c0: Scalar = None, expart=None) -> TransMonomial:
    """exp(c0*Y + E) for a purely large germ E avoiding the log ladder."""
    lp = {} if c0 is None else {0: Scalar(c0)}
    return TransMonomial(lp, expart)


# -- group operations -------------------------------------------------------


def mono_mul(m: TransMonomial, n: TransMonomial) -> TransMonomial:
    lp = dict(m.logpart)
    for j, c in n.logpart.items():
        lp[j] = scalar_add(lp[j], c) if j in lp else c
    if m.expart is None:
        e = n.expart
    elif n.expart is None:
        e = m.expart
    else:
        from .germ import germ_add
        e = germ_add(m.expart, n.expart)
    return TransMonomial(lp, e)


def mono_pow(m: TransMonomial, r) -> TransMonomial:
    r = Scalar(r) if not isinstance(r, Scalar) else r
    if scalar_compare(r, ZERO) is Comparison.EQ:
        return _UNIT
    if scalar_compare(r, ONE) is Comparison.EQ:
        return m
    lp = {j: scalar_mul(c, r) for j, c in m.logpart.items()}
    e = None
    if m.expart is not None:
        from .germ import germ_scale
        e = germ_scale(m.expart, r)
    return TransMonomial(lp, e)


def mono_inv(m: TransMonomial) -> TransMonomial:
    return mono_pow(m, Scalar(-1))


def mono_log_germ(m: TransMonomial):
    """log m as a Germ (ladder terms plus the expart)."""
    from .germ import germ_add, germ_from_terms, germ_zero
    terms = [(c, log_ladder_monomial(j)) for j, c in sorted(m.logpart.items())]
    g = germ_from_terms(terms) if terms else germ_zero()
    if m.expart is not None:
        g = germ_add(g, m.expart)
    return g


def mono_compare(m: TransMonomial, n: TransMonomial) -> Comparison:
    if m is n:
        return Comparison.EQ
    if m.expart is None and n.expart is None:
        # log m - log n is a finite ladder combination; the shallowest
        # level with differing coefficients dominates (L_0 > L_1 > ...)
        for j in sorted(set(m.logpart) | set(n.logpart)):
            c = scalar_compare(m.logpart.get(j, ZERO), n.logpart.get(j, ZERO))
            if c is not Comparison.EQ:
                return c
        return Comparison.EQ
    from .germ import germ_add, germ_neg, germ_sign
    s = germ_sign(germ_add(mono_log_germ(m), germ_neg(mono_log_germ(n))))
    if s > 0:
        return Comparison.GT
    if s < 0:
        return Comparison.LT
    return Comparison.EQ


def _ladder_derivative_monomial(j: int) -> TransMonomial:
    """L_j' for j >= 1 is the monomial 1/(Y * log Y * ... * log^{j-1} Y)."""
    return TransMonomial({i: Scalar(-1) for i in range(1, j + 1)})


def mono_derive(m: TransMonomial):
    """(log m)' * m, exact: ladder terms differentiate to monomials and
    the expart differentiates through the germ layer."""
    from .germ import (germ_add, germ_derive, germ_from_terms, germ_scale,
                       germ_zero, germ_mul_monomial)
    d = germ_zero()
    for j, c in sorted(m.logpart.items()):
        if j == 0:
            piece = germ_from_terms([(c, _UNIT)])      # (c*Y)' = c
        else:
            piece = germ_from_terms([(c, _ladder_derivative_monomial(j))])
        d = germ_add(d, piece)
    if m.expart is not None:
        d = germ_add(d, germ_derive(m.expart))
    return germ_mul_monomial(d, m)


# -- parsing the display syntax ----------------------------------------------


_FACTOR_START = re.compile(r"Y($|[\^*])|log(\^\d+)?\(Y\)|exp\(")


def _split_depth0(s: str, sep: str):
    parts = []
    depth = 0
    cur = []
    i = 0
    n = len(sep)
    while i < len(s):
        ch = s[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and s.startswith(sep, i):
            parts.append("".join(cur))
            cur = []
            i += n
            continue
        cur.append(ch)
        i += 1
    parts.append("".join(cur))
    return parts


def _signed_terms(s: str):
    """Split a rendered sum on its ' + ' / ' - ' separators."""
    out = []
    for chunk in _split_depth0(s, " + "):
        first, *rest = _split_depth0(chunk, " - ")
        out.append((1, first))
        out.extend((-1, r) for r in rest)
    return [(sg, t.strip()) for sg, t in out]


def _parse_power(src: str) -> Scalar:
    from .scalar import parse_scalar
    if src == "":
        return ONE
    if not src.startswith("^"):
        raise ParseError("expected '^' before an exponent", src, 0)
    body = src[1:]
    if body.startswith("(") and body.endswith(")"):
        body = body[1:-1]
    return parse_scalar(body)


def _parse_exp_argument(src: str):
    from .germ import germ_from_terms
    from .scalar import parse_scalar
    c0 = ZERO
    terms = []
    for sign, chunk in _signed_terms(src):
        if chunk.startswith("-"):
            sign = -sign
            chunk = chunk[1:].lstrip()
        if not chunk:
            raise ParseError("empty term in exp argument", src, 0)
        if _FACTOR_START.match(chunk):
            coeff, mono_src = ONE, chunk
        else:
            stars = _split_depth0(chunk, "*")
            for k in range(1, len(stars)):
                head = "*".join(stars[:k])
                tail = "*".join(stars[k:])
                if _FACTOR_START.match(tail):
                    coeff, mono_src = parse_scalar(head), tail
                    break
            else:
                raise ParseError(
                    "exp argument term is not coefficient * monomial",
                    chunk, 0)
        if sign < 0:
            coeff = scalar_mul(coeff, Scalar(-1))
        m = parse_monomial(mono_src)
        if m.logpart == {1: ONE} and m.expart is None:
            c0 = scalar_add(c0, coeff)
        else:
            terms.append((coeff, m))
    expart = germ_from_terms(terms) if terms else None
    return c0, expart


def parse_monomial(text: str) -> TransMonomial:
    """Inverse of the display rendering; raises ParseError on any text
    the renderer cannot have produced (elided tails included)."""
    s = text.strip()
    if s == "1":
        return _UNIT
    logpart: Dict[int, Scalar] = {}
    expart = None
    for f in _split_depth0(s, "*"):
        if f.startswith("Y"):
            j, rest = 1, f[1:]
        elif f.startswith("log"):
            body = f[3:]
            if body.startswith("^"):
                k = ""
                while len(body) > 1 and body[1].isdigit():
                    k += body[1]
                    body = body[0] + body[2:]
                if not k:
                    raise ParseError("malformed log level", f, 0)
                j = int(k) + 1
                body = body[1:]
            else:
                j = 2
            if not body.startswith("(Y)"):
                raise ParseError("expected log(Y)", f, 0)
            rest = body[3:]
        elif f.startswith("exp(") and f.endswith(")"):
            if expart is not None or 0 in logpart:
                raise ParseError("repeated exp factor", f, 0)
            c0, expart = _parse_exp_argument(f[4:-1])
            if c0.expr != 0:
                logpart[0] = c0
            continue
        else:
            raise ParseError(f"unrecognized monomial factor {f!r}", f, 0)
        r = _parse_power(rest)
        logpart[j] = scalar_add(logpart.get(j, ZERO), r)
    return TransMonomial(logpart, expart)
