"""Vectorized double-double (~32 significant digits) helpers.

Summing the Taylor series of 1F1(a; 1; ix) for x in the 20-60 range runs
partial sums up to ~e^x times the final value, so float64 loses up to 26
digits to cancellation.  A double-double accumulator keeps the headroom.
Only the handful of operations needed by that series are implemented:
error-free transforms (two_sum / two_prod without FMA, via Dekker
splitting), addition, multiplication, and division by an exact double.

Each double-double number is a pair of float64 arrays (hi, lo) with
hi + lo == value and |lo| <= ulp(hi)/2.
"""

from __future__ import annotations

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def quick_two_sum(a, b):
    """two_sum specialization valid when |a| >= |b|."""
    s = a + b
    err = b - (s - a)
    return s, err


def two_prod(a, b):
    p = a * b
    t = _SPLITTER * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLITTER * b
    bh = t - (t - b)
    bl = b - bh
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def dd_add(xh, xl, yh, yl):
    s1, s2 = two_sum(xh, yh)
    t1, t2 = two_sum(xl, yl)
    s2 = s2 + t1
    s1, s2 = quick_two_sum(s1, s2)
    s2 = s2 + t2
    return quick_two_sum(s1, s2)


def dd_mul(xh, xl, yh, yl):
    p1, p2 = two_prod(xh, yh)
    p2 = p2 + (xh * yl + xl * yh)
    return quick_two_sum(p1, p2)


def dd_div_exact(xh, xl, d):
    """Divide by a double d that is exact (e.g. a small integer)."""
    q1 = xh / d
    p1, p2 = two_prod(q1, d)
    q2 = (((xh - p1) - p2) + xl) / d
    return quick_two_sum(q1, q2)


def cdd_mul(xr, xrl, xi, xil, yr, yrl, yi, yil):
    """Complex double-double product; returns (re_hi, re_lo, im_hi, im_lo)."""
    ar = dd_mul(xr, xrl, yr, yrl)
    bi = dd_mul(xi, xil, yi, yil)
    rr = dd_add(ar[0], ar[1], -bi[0], -bi[1])
    ci = dd_mul(xr, xrl, yi, yil)
    dr = dd_mul(xi, xil, yr, yrl)
    ri = dd_add(ci[0], ci[1], dr[0], dr[1])
    return rr[0], rr[1], ri[0], ri[1]


def cdd_abs(xr, xi):
    """Cheap magnitude from the hi components only (enough for stopping tests)."""
    return np.abs(xr) + np.abs(xi)
