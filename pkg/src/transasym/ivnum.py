"""Shared interval-arithmetic helpers on top of mpmath.iv.

mpmath's interval context carries one global precision, so every entry
point that evaluates numerically brackets its work in iv_workprec.  All
evaluator code in this package computes on iv intervals; plain-mpf
results from functions the iv context lacks (zeta, loggamma, digamma)
are wrapped with an explicit widening margin instead of being trusted
to the last bit.
"""

from __future__ import annotations

import contextlib

import mpmath

from .errors import PrecisionError
from .scalar import Scalar, _iv_context, _iv_eval

__all__ = [
    "iv_workprec",
    "iv_scalar",
    "iv_pow_scalar",
    "iv_widen",
    "iv_sign_or_none",
    "iv_from_mp",
]


@contextlib.contextmanager
def iv_workprec(bits: int):
    saved = mpmath.iv.prec
    try:
        mpmath.iv.prec = bits
        yield mpmath.iv
    finally:
        mpmath.iv.prec = saved


def iv_scalar(a: Scalar):
    """Enclose a Scalar in the current iv working precision."""
    return _iv_eval(a.expr, _iv_context(mpmath.iv.prec))


def iv_pow_scalar(x, c: Scalar):
    """x**c for an interval x >= 0 and exact Scalar exponent c.

    Integer exponents go through interval power directly; otherwise the
    base must be positive (an exact-zero interval with c > 0 gives 0).
    """
    e = c.expr
    if e.is_Integer:
        return x ** int(e)
    cv = iv_scalar(c)
    if x.a > 0:
        return mpmath.iv.exp(cv * mpmath.iv.log(x))
    if x.a == 0 and x.b == 0:
        if cv.a > 0:
            return mpmath.iv.mpf(0)
        raise PrecisionError("0 ** nonpositive exponent")
    if x.a == 0:
        # [0, b]: monotone for the positive-exponent case
        if cv.a > 0:
            upper = mpmath.iv.exp(cv * mpmath.iv.log(mpmath.iv.mpf([x.b, x.b])))
            return mpmath.iv.mpf([0, upper.b])
        raise PrecisionError("interval base touches 0 with nonpositive exponent")
    raise PrecisionError("negative interval base for non-integer exponent")


def iv_widen(x, margin_bits: int = None):
    """Interval around a plain mpf x, widened by a few ulps to absorb
    rounding in functions computed outside interval arithmetic."""
    if margin_bits is None:
        margin_bits = mpmath.iv.prec - 8
    eps = mpmath.mpf(2) ** (-margin_bits)
    pad = abs(x) * eps + mpmath.mpf(2) ** (-margin_bits)
    return mpmath.iv.mpf([x - pad, x + pad])


def iv_from_mp(x):
    return mpmath.iv.mpf([x, x])


def iv_sign_or_none(x):
    """-1, 0 (exact), +1, or None when the interval straddles zero."""
    if x.a > 0:
        return 1
    if x.b < 0:
        return -1
    if x.a == 0 and x.b == 0:
        return 0
    return None
