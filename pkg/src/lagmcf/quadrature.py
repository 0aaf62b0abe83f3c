"""Adaptive Simpson quadrature with an absolute error budget."""

from __future__ import annotations

from typing import Callable

MAX_DEPTH = 48


def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
    return h * (fa + 4.0 * fm + fb) / 6.0


def adaptive_simpson(
    func: Callable[[float], float], a: float, b: float, tol: float
) -> float:
    """Integrate ``func`` over ``[a, b]`` to absolute accuracy ``tol``.

    Intervals are bisected and the error budget is split evenly between the
    halves. Accepted panels carry the usual Richardson correction
    ``(S2 - S1) / 15``. Evaluation order is fixed, so the result is a
    deterministic function of the inputs.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if b == a:
        return 0.0
    if b < a:
        return -adaptive_simpson(func, b, a, tol)
    fa, fb = func(a), func(b)
    m = 0.5 * (a + b)
    fm = func(m)
    whole = _simpson(fa, fm, fb, b - a)
    return _refine(func, a, m, b, fa, fm, fb, whole, tol, 0)


def _refine(func, a, m, b, fa, fm, fb, whole, tol, depth):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = func(lm), func(rm)
    left = _simpson(fa, flm, fm, m - a)
    right = _simpson(fm, frm, fb, b - m)
    delta = left + right - whole
    # m - a underflowing to the spacing of a means no further bisection helps
    if abs(delta) <= 15.0 * tol or depth >= MAX_DEPTH or lm in (a, m) or rm in (m, b):
        return left + right + delta / 15.0
    half = 0.5 * tol
    return _refine(func, a, lm, m, fa, flm, fm, left, half, depth + 1) + _refine(
        func, m, rm, b, fm, frm, fb, right, half, depth + 1
    )
