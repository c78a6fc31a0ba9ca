"""Error-free float transforms and double-double helpers.

The spline coefficients C_beta grow like (2m-1)! * N^(2m-1), while the
quantities they have to reproduce (function values at the nodes) are O(1).
Plain float64 dot products between such coefficients and kernel values lose
up to 10 decimal digits to cancellation, so the hot reductions in this
package run compensated: products are split exactly with Dekker's algorithm
and the round-off of every addition is carried along (Ogita/Rump/Oishi
"Dot2").  Double-double values are stored as (hi, lo) float64 pairs.
"""

from __future__ import annotations

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    """Exact addition: returns (s, err) with s = fl(a+b) and a+b = s + err."""
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def split(a):
    """Dekker split of a float into two non-overlapping 26-bit halves."""
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    """Exact multiplication: returns (p, err) with p = fl(a*b), a*b = p + err."""
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def compensated_dot(w_hi, w_lo, columns):
    """sum_j (w_hi[j] + w_lo[j]) * columns[j] with Dot2-style compensation.

    ``columns`` is an iterable of arrays (or scalars), one per weight; the
    reduction runs along that leading index.  The result carries an error of
    order eps*|result| instead of eps*max_j|w_j*col_j|.
    """
    s = None
    comp = None
    for j, col in enumerate(columns):
        p, pe = two_prod(w_hi[j], col)
        if s is None:
            s = p if np.ndim(p) else float(p)
            comp = pe + w_lo[j] * col
            continue
        s, e = two_sum(s, p)
        comp = comp + (e + pe + w_lo[j] * col)
    if s is None:
        return 0.0
    return s + comp


def compensated_sum(values):
    """Neumaier summation of a 1-D array, returned as a float."""
    s = 0.0
    comp = 0.0
    for v in np.asarray(values, dtype=float).ravel():
        t, e = two_sum(s, v)
        s = t
        comp += e
    return s + comp


def dd_from_mp(x):
    """Round an mpmath value to a (hi, lo) double-double pair."""
    hi = float(x)
    lo = float(x - hi)
    return hi, lo


def dd_dot(a_hi, a_lo, b_hi, b_lo):
    """Dot product of two double-double vectors, compensated, -> float."""
    s = 0.0
    comp = 0.0
    for j in range(len(a_hi)):
        p, pe = two_prod(a_hi[j], b_hi[j])
        s, e = two_sum(s, p)
        comp += e + pe + a_hi[j] * b_lo[j] + a_lo[j] * b_hi[j]
    return s + comp
