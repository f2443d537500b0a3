# weaktrace/firstorder.py
# SPDX-License-Identifier: MIT
# Copyright (c) 2026 The weaktrace developers
"""Exact arithmetic on amplitudes of the form a + b*epsilon.

Symbolic amplitudes are ordinary ``sympy`` expressions in the positive symbol
:data:`EPS`. Every helper returns an expression truncated after the linear
term, so "zero at first order" is an exact statement rather than a small
number.
"""
from ._version import __version__

# import required packages
from typing import Any, Tuple, Union
import sympy as sp

Amplitude = Union[complex, sp.Expr]

#: The kick strength as a symbol. Positive, hence real: conj(EPS) == EPS.
EPS = sp.Symbol("epsilon", positive=True)


def exact(value: Any) -> sp.Expr:
    """Turn a Python number (or expression) into an exact sympy expression.

    Floats are rationalized with ``sqrt(2)`` as a known constant, so that
    ``1/math.sqrt(2)`` comes back as ``sqrt(2)/2``.
    """
    if isinstance(value, sp.Basic):
        return value
    if isinstance(value, bool):
        return sp.Integer(int(value))
    if isinstance(value, int):
        return sp.Integer(value)
    value = complex(value)
    real = sp.nsimplify(value.real, [sp.sqrt(2)], tolerance=1e-15)
    imag = sp.nsimplify(value.imag, [sp.sqrt(2)], tolerance=1e-15)
    return real + sp.I * imag


def orders(expr: Any) -> Tuple[sp.Expr, sp.Expr]:
    """Return ``(a, b)`` for ``expr = a + b*EPS + O(EPS**2)``."""
    expanded = sp.expand(exact(expr))
    return expanded.coeff(EPS, 0), expanded.coeff(EPS, 1)


def truncate(expr: Any) -> sp.Expr:
    """Drop every term of second and higher order in EPS."""
    zeroth, first = orders(expr)
    return sp.expand(zeroth + first * EPS)


def is_zero(expr: Any) -> bool:
    """Exact zero test after truncation to first order."""
    expanded = truncate(expr)
    if expanded == 0:
        return True
    return sp.simplify(expanded) == 0


def conjugate(expr: Any) -> sp.Expr:
    return sp.expand(sp.conjugate(exact(expr)))


def reciprocal(expr: Any) -> sp.Expr:
    """First-order expansion of ``1/(a + b*EPS)``; requires ``a != 0``."""
    zeroth, first = orders(expr)
    if sp.simplify(zeroth) == 0:
        raise ZeroDivisionError("[reciprocal] zeroth-order term vanishes; no first-order expansion exists.")
    return sp.expand(1 / zeroth - first / zeroth**2 * EPS)


def divide(numerator: Any, denominator: Any) -> sp.Expr:
    """First-order expansion of ``numerator / denominator``."""
    return truncate(exact(numerator) * reciprocal(denominator))


def inverse_sqrt(expr: Any) -> sp.Expr:
    """First-order expansion of ``(a + b*EPS)**(-1/2)`` for real positive ``a``."""
    zeroth, first = orders(expr)
    zeroth = sp.nsimplify(sp.re(zeroth))
    first = sp.re(first)
    if zeroth == 0:
        raise ZeroDivisionError("[inverse_sqrt] zeroth-order term vanishes; no first-order expansion exists.")
    return sp.expand(sp.sqrt(zeroth) ** -1 - first / (2 * zeroth * sp.sqrt(zeroth)) * EPS)


def to_complex(expr: Any, epsilon: float = 0.0) -> complex:
    """Evaluate a (possibly symbolic) amplitude at a numeric epsilon."""
    if isinstance(expr, sp.Basic):
        return complex(sp.N(expr.subs(EPS, epsilon)))
    return complex(expr)
