"""Point evaluation of the assembled spline and its operator seminorm.

Kernel weights reach (2m-1)! * n^(2m-1) while the spline values stay O(1),
so the kernel sums here are compensated (see _precision).  On the nodes
themselves the package promises 1e-8 absolute accuracy, which for m >= 4
requires kernel values better than one ulp; a cached double-double table of
G at the node offsets covers exactly that case.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from ._precision import two_prod, two_sum
from .builder import SplineCoefficients
from .discrete_operator import SplineConfig
from .kernel import G, G_derivative, node_kernel_table

__all__ = ["evaluate", "seminorm", "applied_operator"]

_NODE_SNAP = 1e-9  # |x*n - round(x*n)| below this is treated as a node hit


def _null_space_part(config: SplineConfig, coeffs: SplineCoefficients, x):
    out = coeffs.d1 * np.sin(config.omega * x) + coeffs.d2 * np.cos(config.omega * x)
    for a, r in enumerate(coeffs.r):
        out = out + r * np.asarray(x) ** a
    return out


def _kernel_sum_generic(config, coeffs, x):
    """Compensated sum_g (C_g + C_lo_g) * G(x - x_g), vectorized over x."""
    m, omega, n = config.m, config.omega, config.n
    s = np.zeros_like(x)
    comp = np.zeros_like(x)
    for g in range(n + 1):
        kern = G(m, omega, x - g / n)
        p, pe = two_prod(coeffs.C[g], kern)
        s, e = two_sum(s, p)
        comp += e + pe + coeffs.C_lo[g] * kern
    return s + comp


def _kernel_sum_at_node(config, coeffs, beta: int) -> float:
    g_hi, g_lo = node_kernel_table(config)
    idx = np.abs(np.arange(config.n + 1) - beta)
    bh, bl = g_hi[idx], g_lo[idx]
    p, pe = two_prod(coeffs.C, bh)
    return math.fsum(np.concatenate([p, pe, coeffs.C * bl, coeffs.C_lo * bh]))


def evaluate(
    config: SplineConfig,
    coeffs: SplineCoefficients,
    x,
    allow_extrapolation: bool = False,
):
    """Spline value(s) at x: kernel sum plus trigonometric and polynomial parts.

    x outside [0,1] is rejected unless allow_extrapolation is set.  Points
    that coincide with grid nodes are routed through the double-double
    kernel table.
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not allow_extrapolation:
        if np.any(x < -1e-12) or np.any(x > 1.0 + 1e-12):
            raise ValueError(
                "evaluation point outside [0,1]; pass allow_extrapolation=True to override"
            )

    xn = x * config.n
    nearest = np.rint(xn)
    on_node = (np.abs(xn - nearest) <= _NODE_SNAP) & (nearest >= 0) & (nearest <= config.n)

    out = np.empty_like(x)
    if np.any(~on_node):
        xg = x[~on_node]
        out[~on_node] = _kernel_sum_generic(config, coeffs, xg) + _null_space_part(
            config, coeffs, xg
        )
    if np.any(on_node):
        idx = np.where(on_node)[0]
        for i in idx:
            beta = int(nearest[i])
            out[i] = _kernel_sum_at_node(config, coeffs, beta) + float(
                _null_space_part(config, coeffs, beta / config.n)
            )
    return float(out[0]) if scalar else out


def applied_operator(config: SplineConfig, coeffs: SplineCoefficients, x):
    """(d^m/dx^m + omega^2 d^(m-2)/dx^(m-2)) applied to the spline at x.

    The trigonometric and polynomial parts are annihilated identically, so
    only the kernel sum contributes.  x must avoid the nodes for m <= 4
    (kernel derivatives are distributional there).
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    m, omega, n = config.m, config.omega, config.n
    w2 = omega * omega
    s = np.zeros_like(x)
    comp = np.zeros_like(x)
    for g in range(n + 1):
        dx = x - g / n
        kern = G_derivative(m, omega, m, dx) + w2 * G_derivative(m, omega, m - 2, dx)
        p, pe = two_prod(coeffs.C[g], kern)
        s, e = two_sum(s, p)
        comp += e + pe + coeffs.C_lo[g] * kern
    out = s + comp
    return float(out[0]) if scalar else out


@lru_cache(maxsize=32)
def _gauss_rule(points: int):
    nodes, weights = np.polynomial.legendre.leggauss(points)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


class NodeVanishingPerturbation:
    """Smooth perturbation vanishing at every grid node.

    eta(x) = amplitude * sin(n pi x) * sin(q x + phase), rewritten as a
    difference of two cosines so that arbitrary derivatives (and the
    operator image) have closed forms.
    """

    def __init__(self, config: SplineConfig, amplitude: float, frequency: float, phase: float):
        self.config = config
        self.amplitude = amplitude
        self.a1 = config.n * math.pi - frequency
        self.a2 = config.n * math.pi + frequency
        self.phase = phase

    def __call__(self, x):
        half = 0.5 * self.amplitude
        return half * (np.cos(self.a1 * np.asarray(x) - self.phase)
                       - np.cos(self.a2 * np.asarray(x) + self.phase))

    def operator_values(self, x):
        """(d^m/dx^m + omega^2 d^(m-2)/dx^(m-2)) eta at x."""
        m, w2 = self.config.m, self.config.omega**2
        half = 0.5 * self.amplitude
        x = np.asarray(x)

        def term(a, b):
            # P_m cos(a x + b) = (a^m - omega^2 a^(m-2)) * cos(a x + b + m pi/2)
            fac = a**m - w2 * a ** (m - 2)
            return fac * np.cos(a * x + b + 0.5 * math.pi * m)

        return half * (term(self.a1, -self.phase) - term(self.a2, self.phase))


def node_vanishing_perturbation(
    config: SplineConfig, amplitude: float, frequency: float, phase: float
) -> NodeVanishingPerturbation:
    return NodeVanishingPerturbation(config, amplitude, frequency, phase)


def perturbed_seminorm(
    config: SplineConfig,
    coeffs: SplineCoefficients,
    quad_points: int,
    perturbation: NodeVanishingPerturbation,
) -> float:
    """Seminorm of (spline + perturbation), same quadrature as seminorm()."""
    n = config.n
    if quad_points < 10 * (n + 1):
        raise ValueError(f"quad_points must be >= 10*(n+1) = {10 * (n + 1)}")
    per_cell = int(min(64, max(8, math.ceil(quad_points / n))))
    nodes, weights = _gauss_rule(per_cell)
    h = config.h
    half = 0.5 * h
    pieces = []
    for beta in range(n):
        mid = (beta + 0.5) * h
        xq = mid + half * nodes
        vals = applied_operator(config, coeffs, xq) + perturbation.operator_values(xq)
        pieces.append(half * np.dot(weights, vals * vals))
    total = math.fsum(pieces)
    return math.sqrt(max(total, 0.0))


def seminorm(config: SplineConfig, coeffs: SplineCoefficients, quad_points: int) -> float:
    """sqrt(integral over [0,1] of (S^(m) + omega^2 S^(m-2))^2).

    Composite Gauss-Legendre quadrature cell by cell between nodes, where
    the integrand is analytic; quad_points is the total point budget and
    must be at least 10*(n+1).
    """
    n = config.n
    if quad_points < 10 * (n + 1):
        raise ValueError(f"quad_points must be >= 10*(n+1) = {10 * (n + 1)}")
    per_cell = int(min(64, max(8, math.ceil(quad_points / n))))
    nodes, weights = _gauss_rule(per_cell)
    h = config.h
    half = 0.5 * h
    pieces = []
    for beta in range(n):
        mid = (beta + 0.5) * h
        xq = mid + half * nodes
        vals = applied_operator(config, coeffs, xq)
        pieces.append(half * np.dot(weights, vals * vals))
    total = math.fsum(pieces)
    return math.sqrt(max(total, 0.0))
