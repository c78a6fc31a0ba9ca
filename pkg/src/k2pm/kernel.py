"""Fundamental solution G of the even-order operator underlying the spline.

G(m, omega, x) = (-1)^m * sign(x) / (4 omega^(2m-1)) * B(omega*x) where

    B(t) = (2m-3) sin t - t cos t + 2 sum_{k=1}^{m-2} (-1)^k (m-k-1) t^(2k-1) / (2k-1)!

B is odd and entire, and its Taylor series starts only at degree 2m-1: the
three groups of terms cancel through degree 2m-3.  Evaluating the closed
form near t = 0 therefore loses ~(2m-2)*log10(1/t) digits, so for |t| < 1
the series

    B(t) = sum_{l >= m-1} (-1)^l * 2 (m-l-2) / (2l+1)! * t^(2l+1)

is used instead (no cancellation there, fast convergence).
"""

from __future__ import annotations

import math
from functools import lru_cache

import mpmath as mp
import numpy as np

from ._precision import dd_from_mp
from .errors import ConfigurationError

__all__ = ["G", "G_derivative", "delta_residual"]

_SERIES_CUTOFF = 1.0  # |omega*x| below this uses the Taylor branch
_SERIES_TERMS = 24
_MP_DPS = 50

_SIN_CYCLE = (np.sin, np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t))
_COS_CYCLE = (np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t), np.sin)


@lru_cache(maxsize=None)
def _series_coeffs(m: int) -> tuple[tuple[int, float], ...]:
    """(power, coefficient) pairs of the Taylor branch of B, float64."""
    out = []
    for l in range(m - 1, m - 1 + _SERIES_TERMS):
        c = 2 * (-1) ** l * (m - l - 2)
        out.append((2 * l + 1, c / math.factorial(2 * l + 1)))
    return tuple(out)


def _bracket(m: int, t):
    """B(t), vectorized float64, stable for all t."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < _SERIES_CUTOFF
    out = np.empty_like(t)

    if np.any(small):
        ts = t[small]
        u = ts * ts
        acc = np.zeros_like(ts)
        for _, c in reversed(_series_coeffs(m)):
            acc = acc * u + c
        out[small] = acc * ts ** (2 * m - 1)

    if np.any(~small):
        tl = t[~small]
        acc = (2 * m - 3) * np.sin(tl) - tl * np.cos(tl)
        for k in range(1, m - 1):
            acc += 2 * (-1) ** k * (m - k - 1) * tl ** (2 * k - 1) / math.factorial(2 * k - 1)
        out[~small] = acc
    return out


def bracket_mp(m: int, t):
    """B(t) in mpmath arithmetic (closed form; precision absorbs cancellation)."""
    with mp.workdps(_MP_DPS):
        t = mp.mpf(t)
        acc = (2 * m - 3) * mp.sin(t) - t * mp.cos(t)
        for k in range(1, m - 1):
            acc += 2 * (-1) ** k * (m - k - 1) * t ** (2 * k - 1) / mp.factorial(2 * k - 1)
        return acc


def G(m: int, omega: float, x):
    """Fundamental solution at x; even in x, zero at the origin.

    sign(0) is taken as 0.  Since B is odd, sign(x)*B(omega*x) equals
    B(omega*|x|), which is what is evaluated (making evenness exact).
    """
    if m < 2:
        raise ConfigurationError("m must be >= 2")
    if not omega > 0:
        raise ConfigurationError("omega must be positive")
    scale = (-1) ** m / (4.0 * omega ** (2 * m - 1))
    val = scale * _bracket(m, omega * np.abs(x))
    if np.ndim(x) == 0:
        return float(val)
    return val


def G_mp(m: int, omega, x):
    """G at mpmath precision (scalar)."""
    with mp.workdps(_MP_DPS):
        omega = mp.mpf(omega)
        x = mp.mpf(x)
        if x == 0:
            return mp.mpf(0)
        return (-1) ** m / (4 * omega ** (2 * m - 1)) * bracket_mp(m, abs(omega * x))


def _bracket_derivative(m: int, j: int, t):
    """j-th derivative of B, vectorized float64."""
    if j == 0:
        return _bracket(m, t)
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < _SERIES_CUTOFF
    out = np.empty_like(t)

    if np.any(small):
        ts = t[small]
        acc = np.zeros_like(ts)
        for power, c in _series_coeffs(m):
            if power >= j:
                acc += c * math.perm(power, j) * ts ** (power - j)
        out[small] = acc

    if np.any(~small):
        tl = t[~small]
        # d^j (t cos t) = t cos^(j)(t) + j cos^(j-1)(t)
        acc = (2 * m - 3) * _SIN_CYCLE[j % 4](tl)
        acc -= tl * _COS_CYCLE[j % 4](tl) + j * _COS_CYCLE[(j - 1) % 4](tl)
        for k in range(1, m - 1):
            power = 2 * k - 1
            if power >= j:
                coef = 2 * (-1) ** k * (m - k - 1) * math.perm(power, j) / math.factorial(power)
                acc += coef * tl ** (power - j)
        out[~small] = acc
    return out


def G_derivative(m: int, omega: float, j: int, x):
    """j-th derivative of G by term-wise differentiation (x away from 0).

    At x = 0 the value is 0 for j < 2m-4 and undefined (distributional
    region) for j >= 2m-4, which is rejected.
    """
    if j < 0 or j > 2 * m:
        raise ValueError(f"derivative order must satisfy 0 <= j <= 2m, got {j}")
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    at_zero = x == 0.0
    if np.any(at_zero) and j >= 2 * m - 4:
        raise ValueError(f"G_derivative is undefined at x=0 for j >= 2m-4 (j={j}, m={m})")
    scale = (-1) ** m / (4.0 * omega ** (2 * m - 1))
    out = scale * omega**j * np.sign(x) * _bracket_derivative(m, j, omega * x)
    out[at_zero] = 0.0
    return float(out[0]) if scalar else out


def delta_residual(op, beta: int, window: int) -> float:
    """|sum_gamma D(h gamma) G(h(beta-gamma)) - delta(beta)|, gamma in [-window, window]."""
    from .discrete_operator import eval_D, truncation_window

    if window < truncation_window(op):
        raise ValueError("window is below the operator's truncation window")
    cfg = op.config
    gammas = np.arange(-window, window + 1)
    d_vals = np.array([eval_D(op, int(g)) for g in gammas])
    g_vals = G(cfg.m, cfg.omega, cfg.h * (beta - gammas))
    target = 1.0 if beta == 0 else 0.0
    return abs(math.fsum(d_vals * g_vals) - target)


def node_kernel_table(config) -> tuple[np.ndarray, np.ndarray]:
    """Double-double table of G at node offsets 0, h, 2h, ..., 1 (cached).

    Used by the node-accurate evaluation path: the spline coefficients are
    huge and alternating, so kernel values rounded to one ulp already cost
    ~1e-6 of absolute accuracy at the nodes for m = 5.
    """
    return _node_table_impl(config.m, float(config.omega).hex(), config.n)


@lru_cache(maxsize=128)
def _node_table_impl(m: int, omega_hex: str, n: int):
    omega = float.fromhex(omega_hex)
    h = mp.mpf(1) / n
    hi = np.empty(n + 1)
    lo = np.empty(n + 1)
    for d in range(n + 1):
        hi[d], lo[d] = dd_from_mp(G_mp(m, omega, h * d))
    hi.flags.writeable = False
    lo.flags.writeable = False
    return hi, lo
