"""Dense real polynomials, Euler-Frobenius polynomials, and geometric tail sums.

Everything here is exact-integer or plain float64; the heavy lifting for
ill-conditioned parameter ranges happens upstream (see discrete_operator).
"""

from __future__ import annotations

from functools import lru_cache
from math import comb, factorial
from typing import Sequence

import numpy as np

from .errors import RootFindingError

__all__ = [
    "RealPolynomial",
    "finite_diff_zero",
    "euler_frobenius",
    "euler_frobenius_integer_coeffs",
    "geom_power_tail",
    "geom_trig_tail",
    "poly_roots",
]


class RealPolynomial:
    """Dense real polynomial with ascending coefficients: coeffs[s] * x**s.

    Trailing zero coefficients are stripped on construction; the zero
    polynomial is stored as the single coefficient [0.0].
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[float]):
        arr = np.asarray(coeffs, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("coefficients must be a non-empty 1-D sequence")
        end = arr.size
        while end > 1 and arr[end - 1] == 0.0:
            end -= 1
        arr = arr[:end].copy()
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("RealPolynomial is immutable")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        """Horner evaluation; accepts scalars or arrays, real or complex."""
        acc = self.coeffs[-1] * np.ones_like(np.asarray(x)) if np.ndim(x) else self.coeffs[-1]
        for c in self.coeffs[-2::-1]:
            acc = acc * x + c
        return acc

    def derivative(self) -> "RealPolynomial":
        if self.degree == 0:
            return RealPolynomial([0.0])
        return RealPolynomial(self.coeffs[1:] * np.arange(1, len(self.coeffs)))

    def __eq__(self, other):
        return isinstance(other, RealPolynomial) and np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self):
        return f"RealPolynomial({self.coeffs.tolist()})"


def finite_diff_zero(i: int, k: int) -> int:
    """Forward difference of order i of the power function at zero.

    Returns sum_{l=1}^{i} (-1)**(i-l) * C(i,l) * l**k, an exact integer.
    The empty case i = k = 0 is defined as 1 so that the geometric tail
    formulas below reduce to the plain geometric series at k = 0.
    """
    if i < 0 or k < 0:
        raise ValueError("finite_diff_zero requires i >= 0 and k >= 0")
    if i == 0:
        return 1 if k == 0 else 0
    return sum((-1) ** (i - l) * comb(i, l) * l**k for l in range(1, i + 1))


@lru_cache(maxsize=None)
def euler_frobenius_integer_coeffs(k: int) -> tuple[int, ...]:
    """Exact integer coefficients (ascending) of the Euler-Frobenius polynomial."""
    if k < 0:
        raise ValueError("k must be >= 0")
    # expand sum_i finite_diff_zero(i, k+1) * (x-1)^(k+1-i)
    full = [0] * (k + 2)
    for i in range(k + 2):
        d = finite_diff_zero(i, k + 1)
        if d == 0:
            continue
        p = k + 1 - i
        for j in range(p + 1):
            full[j] += d * comb(p, j) * (-1) ** (p - j)
    if full[k + 1] != 0:
        raise AssertionError("degree-(k+1) term failed to cancel")
    return tuple(full[: k + 1])


def euler_frobenius(k: int) -> RealPolynomial:
    """Euler-Frobenius polynomial of degree k (integer coefficients)."""
    return RealPolynomial(euler_frobenius_integer_coeffs(k))


def _power_tail(q, k: int):
    """sum_{g>=1} q**g * g**k in closed form; generic over float/complex/mpf."""
    if k == 0:
        return q / (1 - q)
    return sum(q**i * finite_diff_zero(i, k) / (1 - q) ** (i + 1) for i in range(1, k + 1))


def geom_power_tail(q: float, k: int) -> float:
    """sum_{gamma=0}^{inf} q**gamma * gamma**k for |q| < 1 in closed form."""
    if not abs(q) < 1:
        raise ValueError(f"geom_power_tail requires |q| < 1, got q={q}")
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return 1.0 / (1.0 - q)
    return float(_power_tail(float(q), k))


def geom_trig_tail(lam: float, theta: float, phase: float) -> tuple[float, float]:
    """Closed forms of the damped trigonometric tails starting at gamma = 1.

    Returns (s, c) with
        s = sum_{gamma>=1} lam**gamma * sin(theta*gamma + phase)
        c = sum_{gamma>=1} lam**gamma * cos(theta*gamma + phase)
    both with denominator lam**2 - 2*lam*cos(theta) + 1.
    """
    if not abs(lam) < 1:
        raise ValueError(f"geom_trig_tail requires |lam| < 1, got lam={lam}")
    den = lam * lam - 2.0 * lam * np.cos(theta) + 1.0
    s = (lam * np.sin(theta + phase) - lam * lam * np.sin(phase)) / den
    c = (lam * np.cos(theta + phase) - lam * lam * np.cos(phase)) / den
    return float(s), float(c)


def poly_roots(p: RealPolynomial, tol_root: float = 1e-12) -> np.ndarray:
    """All complex roots of p, with multiplicity, via the companion matrix.

    Each eigenvalue gets one Newton polish; roots are then validated against
    a condition-scaled residual.  Raises RootFindingError if the eigenvalue
    iteration does not converge or a residual check fails.
    """
    coeffs = p.coeffs
    if p.degree < 1:
        raise ValueError("poly_roots requires degree >= 1")
    monic = coeffs / coeffs[-1]
    n = p.degree
    companion = np.zeros((n, n))
    companion[1:, :-1] = np.eye(n - 1)
    companion[:, -1] = -monic[:-1]
    try:
        roots = np.linalg.eigvals(companion)
    except np.linalg.LinAlgError as exc:
        raise RootFindingError(f"companion eigenvalue iteration failed: {exc}") from exc

    dp = p.derivative()
    polished = []
    for r in roots:
        d = dp(r)
        if abs(d) > 0:
            step = p(r) / d
            if abs(step) < 0.5 * max(1.0, abs(r)):  # reject wild Newton steps
                r = r - step
        polished.append(r)
    polished = np.asarray(polished, dtype=complex)

    # condition-scaled residual check: |p(r)| <= tol * sum |c_s| |r|^s
    for r in polished:
        scale = float(np.sum(np.abs(coeffs) * np.abs(r) ** np.arange(len(coeffs))))
        if abs(p(r)) > tol_root * max(scale, 1e-300):
            raise RootFindingError(
                f"root {r} failed residual check: |p(r)|={abs(p(r)):.3e}, scale={scale:.3e}"
            )
    order = np.lexsort((polished.imag, polished.real))
    return polished[order]


def factorial_exact(n: int) -> int:
    """Exact factorial (thin wrapper, kept for callers that want ints)."""
    return factorial(n)
