"""Golden-section search for concave objectives on a closed interval."""

from __future__ import annotations

import math
from typing import Callable

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0

ARG_TOL = 1e-9
# Interior optimum must beat an endpoint by more than this to be preferred.
TIE_TOL = 1e-13


def golden_max(f: Callable[[float], float], lo: float, hi: float, tol: float = ARG_TOL):
    """Maximize a concave ``f`` on ``[lo, hi]``.

    Runs golden-section search to an argument tolerance ``tol`` and then
    evaluates both endpoints explicitly. An endpoint wins ties.

    Returns
    -------
    (float, float, bool)
        ``(argmax, max_value, at_endpoint)``.
    """
    if hi < lo:
        raise ValueError("empty interval")
    f_lo, f_hi = f(lo), f(hi)
    best_end = (lo, f_lo) if f_lo >= f_hi else (hi, f_hi)
    if hi - lo <= tol:
        return best_end[0], best_end[1], True

    a, b = lo, hi
    h = b - a
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    fc, fd = f(c), f(d)
    n_iter = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    for _ in range(n_iter):
        if fc >= fd:
            b, d, fd = d, c, fc
            h = INV_PHI * h
            c = a + INV_PHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = INV_PHI * h
            d = a + INV_PHI * h
            fd = f(d)
    x_in, f_in = (c, fc) if fc >= fd else (d, fd)
    if f_in > best_end[1] + TIE_TOL:
        return x_in, f_in, False
    return best_end[0], best_end[1], True
