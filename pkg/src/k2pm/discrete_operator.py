"""Discrete analogue of d^{2m}/dx^{2m} + 2 w^2 d^{2m-2}/dx^{2m-2} + w^4 d^{2m-4}/dx^{2m-4}.

On the uniform grid x_beta = h*beta the operator is the sequence

    D(h beta) = p * { sum_k A_k lam_k^(|beta|-1)      |beta| >= 2
                    { 1 + sum_k A_k                    |beta| = 1
                    { C + sum_k A_k / lam_k            beta  = 0

where lam_k are the m-1 roots inside the unit circle of a palindromic
characteristic polynomial of degree 2m-2 built from Euler-Frobenius
polynomials, and A_k, C, p are rational expressions in those roots and in
t = h*omega.

Numerical note: every coefficient of the characteristic polynomial is
O(t^(2m-1)) while the individual terms assembling it are O(t); float64
assembly would lose ~(2m-2)*log10(1/t) digits (all of them for m = 5 at
t ~ 0.025).  Assembly therefore runs in mpmath and only the finished
quantities are rounded to float64.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath as mp
import numpy as np

from ._precision import two_prod, two_sum
from .errors import ConfigurationError, DegenerateOperatorError, RootFindingError
from .kernel import bracket_mp
from .polynomials import RealPolynomial, euler_frobenius_integer_coeffs, poly_roots

__all__ = [
    "SplineConfig",
    "DiscreteOperator",
    "characteristic_poly",
    "leading_coeff",
    "stable_roots",
    "build_operator",
    "eval_D",
    "annihilation_residual",
    "truncation_window",
]

logger = logging.getLogger("k2pm")

_MP_DPS = 60
TOL_CIRCLE = 1e-9
TAIL_TOL = 1e-14

_SIGNALS = ("sin", "cos", "t_sin", "t_cos", "power")


@dataclass(frozen=True)
class SplineConfig:
    """Problem parameters: operator order m, frequency omega, n+1 uniform nodes on [0,1]."""

    m: int
    omega: float
    n: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ConfigurationError(f"m must be an integer >= 2, got {self.m}")
        if not (self.omega > 0):
            raise ConfigurationError(f"omega must be positive, got {self.omega}")
        if int(self.n) != self.n or self.n < 1:
            raise ConfigurationError(f"n must be a positive integer, got {self.n}")
        if self.n + 1 < self.m or self.n < self.m - 1:
            raise ConfigurationError(f"need n + 1 >= m (n={self.n}, m={self.m})")
        if self.h * self.omega > 1.0 + 1e-15:
            raise ConfigurationError(
                f"need h*omega <= 1, got {self.h * self.omega} (omega={self.omega}, n={self.n})"
            )

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def h_omega(self) -> float:
        return self.omega / self.n

    def nodes(self) -> np.ndarray:
        return np.arange(self.n + 1) / self.n


class _PreciseOperator:
    """mpmath-precision operator data shared by the builder and the oracle."""

    __slots__ = ("m", "omega", "n", "h", "t", "poly", "lam", "A", "C", "p")

    def __init__(self, m, omega, n, h, t, poly, lam, A, C, p):
        self.m, self.omega, self.n = m, omega, n
        self.h, self.t = h, t
        self.poly = poly  # ascending mpf coefficients
        self.lam = lam    # roots inside the unit circle (mpf/mpc)
        self.A = A
        self.C = C
        self.p = p

    def d_over_p(self, beta: int):
        b = abs(beta)
        if b >= 2:
            return mp.fsum(self.A[k] * self.lam[k] ** (b - 1) for k in range(self.m - 1))
        if b == 1:
            return 1 + mp.fsum(self.A)
        return self.C + mp.fsum(self.A[k] / self.lam[k] for k in range(self.m - 1))


def _symmetrize_conjugates(roots):
    """Force exact conjugate pairing of complex roots of a real polynomial.

    Independent root iterations return near-conjugate pairs; averaging each
    pair makes all later conjugate cancellations exact.
    """
    out = []
    pending = []
    for r in roots:
        if mp.im(r) == 0 or abs(mp.im(r)) <= mp.mpf("1e-40") * abs(r):
            out.append(mp.re(r))
        else:
            pending.append(r)
    used = [False] * len(pending)
    for i, r in enumerate(pending):
        if used[i]:
            continue
        best, best_d = None, None
        for j in range(i + 1, len(pending)):
            if used[j]:
                continue
            d = abs(mp.conj(r) - pending[j])
            if best_d is None or d < best_d:
                best, best_d = j, d
        if best is None:
            raise DegenerateOperatorError(f"unpaired complex characteristic root {r}")
        used[i] = used[best] = True
        avg = (r + mp.conj(pending[best])) / 2
        out.append(avg)
        out.append(mp.conj(avg))
    return out


def _poly_mul(a, b):
    out = [mp.mpf(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _poly_pow(base, k):
    out = [mp.mpf(1)]
    for _ in range(k):
        out = _poly_mul(out, base)
    return out


def _char_coeffs_mp(m: int, t) -> list:
    """Ascending mp coefficients of the degree 2m-2 characteristic polynomial."""
    a = (2 * m - 3) * mp.sin(t) - t * mp.cos(t)
    b = 2 * t - (2 * m - 3) * mp.sin(2 * t)
    one_minus_x = [mp.mpf(1), mp.mpf(-1)]
    total = _poly_mul(_poly_pow(one_minus_x, 2 * m - 4), [a, b, a])
    quad2 = _poly_pow([mp.mpf(1), -2 * mp.cos(t), mp.mpf(1)], 2)
    for k in range(1, m - 1):
        ef = [mp.mpf(c) for c in euler_frobenius_integer_coeffs(2 * k - 2)]
        term = _poly_mul(_poly_mul(quad2, _poly_pow(one_minus_x, 2 * m - 2 * k - 4)), ef)
        scale = 2 * (-1) ** k * (m - k - 1) * t ** (2 * k - 1) / mp.factorial(2 * k - 1)
        for i, c in enumerate(term):
            total[i] += scale * c
    assert len(total) == 2 * m - 1
    return total


@lru_cache(maxsize=256)
def _precise_cached(m: int, omega_hex: str, n: int) -> _PreciseOperator:
    omega_f = float.fromhex(omega_hex)
    with mp.workdps(_MP_DPS):
        omega = mp.mpf(omega_f)
        h = mp.mpf(1) / n
        t = h * omega
        coeffs = _char_coeffs_mp(m, t)
        lead = coeffs[-1]
        if lead == 0 or abs(lead) < mp.mpf("1e-300"):
            raise DegenerateOperatorError(
                f"leading coefficient vanishes for m={m}, h*omega={float(t)}"
            )
        try:
            roots = mp.polyroots(list(reversed(coeffs)), maxsteps=200, extraprec=120)
        except mp.libmp.NoConvergence as exc:
            raise RootFindingError(f"characteristic root finding failed: {exc}") from exc
        inside, near_circle = [], []
        for r in roots:
            if abs(abs(r) - 1) <= TOL_CIRCLE:
                near_circle.append(r)
            elif abs(r) < 1:
                inside.append(r)
        if near_circle:
            raise DegenerateOperatorError(
                f"characteristic roots on the unit circle: {near_circle}"
            )
        if len(inside) != m - 1:
            raise DegenerateOperatorError(
                f"expected {m - 1} roots inside the unit circle, found {len(inside)}"
            )
        inside = _symmetrize_conjugates(inside)
        inside.sort(key=lambda z: (mp.re(z), mp.im(z)))
        dcoeffs = [s * coeffs[s] for s in range(1, len(coeffs))]
        dP = lambda x: mp.polyval(list(reversed(dcoeffs)), x)
        A = []
        for lam in inside:
            deriv = dP(lam)
            if abs(deriv) < mp.mpf("1e-14") * max(1, abs(lead)):
                raise DegenerateOperatorError(f"repeated characteristic root near {lam}")
            A.append(
                (1 - lam) ** (2 * m - 4)
                * (lam**2 - 2 * lam * mp.cos(t) + 1) ** 2
                * lead
                / (lam * deriv)
            )
        C = 4 - 4 * mp.cos(t) - 2 * m - coeffs[2 * m - 3] / lead
        p = 2 * omega ** (2 * m - 1) / ((-1) ** m * lead)
        return _PreciseOperator(m, omega, n, h, t, coeffs, inside, A, C, p)


def precise_operator(config: SplineConfig) -> _PreciseOperator:
    return _precise_cached(config.m, float(config.omega).hex(), config.n)


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Float64 view of the operator data; immutable after construction."""

    config: SplineConfig
    p: float
    C: float
    A: np.ndarray          # shape (m-1,), complex
    lam: np.ndarray        # shape (m-1,), complex, |lam_k| < 1
    char_poly: RealPolynomial
    d0_over_p: float = field(repr=False, default=0.0)  # C + sum A_k/lam_k, pre-cancelled
    d1_over_p: float = field(repr=False, default=0.0)  # 1 + sum A_k


def characteristic_poly(config: SplineConfig) -> RealPolynomial:
    """Degree 2m-2 palindromic characteristic polynomial (float64 coefficients)."""
    pre = precise_operator(config)
    return RealPolynomial([float(c) for c in pre.poly])


def leading_coeff(config: SplineConfig) -> float:
    """Top coefficient in closed form; must match characteristic_poly(config)."""
    val = bracket_mp(config.m, mp.mpf(config.omega) / config.n)
    out = float(val)
    if out == 0.0 or not math.isfinite(out):
        raise DegenerateOperatorError(f"degenerate leading coefficient {out}")
    return out


def stable_roots(P: RealPolynomial) -> np.ndarray:
    """Roots of P strictly inside the unit circle; must be exactly deg/2 of them.

    Checks that the full root set is closed under lam -> 1/lam (palindromic
    polynomials pair every inside root with an outside reciprocal).
    """
    roots = poly_roots(P)
    mod = np.abs(roots)
    if np.any(np.abs(mod - 1.0) <= TOL_CIRCLE):
        raise DegenerateOperatorError("characteristic root within tolerance of the unit circle")
    inside = roots[mod < 1.0]
    outside = roots[mod > 1.0]
    if len(inside) != P.degree // 2 or len(inside) != len(outside):
        raise DegenerateOperatorError(
            f"unit-circle split {len(inside)}/{len(outside)} differs from expected "
            f"{P.degree // 2}/{P.degree // 2}"
        )
    for lam in inside:
        rec = 1.0 / lam
        if np.min(np.abs(outside - rec)) > 1e-9 * max(1.0, abs(rec)):
            raise DegenerateOperatorError(f"root {lam} has no reciprocal partner")
    return inside


def build_operator(config: SplineConfig) -> DiscreteOperator:
    """Assemble the operator: characteristic polynomial, stable roots, A_k, C, p."""
    pre = precise_operator(config)
    poly = RealPolynomial([float(c) for c in pre.poly])

    coeffs = poly.coeffs
    sym = coeffs[::-1]
    pal_err = np.max(np.abs(coeffs - sym)) / max(1e-300, np.max(np.abs(coeffs)))
    if pal_err > 1e-12:
        raise DegenerateOperatorError(f"characteristic polynomial not palindromic ({pal_err:.2e})")

    lam = np.array([complex(l) for l in pre.lam])
    A = np.array([complex(a) for a in pre.A])
    if np.any(np.abs(lam) >= 1.0 - TOL_CIRCLE) or len(lam) != config.m - 1:
        raise DegenerateOperatorError("stable root set failed the unit-circle check")
    lam.flags.writeable = False
    A.flags.writeable = False
    with mp.workdps(_MP_DPS):
        d0 = float(mp.re(pre.d_over_p(0)))
        d1 = float(mp.re(pre.d_over_p(1)))
    return DiscreteOperator(
        config=config, p=float(pre.p), C=float(pre.C), A=A, lam=lam, char_poly=poly,
        d0_over_p=d0, d1_over_p=d1,
    )


def _real_with_check(value: complex, scale: float) -> float:
    if abs(value.imag) > 1e-10 * max(abs(value.real), scale, 1e-290):
        raise DegenerateOperatorError(
            f"conjugate-pair imaginary parts failed to cancel: {value} (scale {scale})"
        )
    return value.real


def eval_D(op: DiscreteOperator, beta: int) -> float:
    """Operator value at lag beta (real; symmetric in beta)."""
    b = abs(int(beta))
    if b == 0:
        return op.p * op.d0_over_p
    if b == 1:
        return op.p * op.d1_over_p
    terms = op.A * op.lam ** (b - 1)
    total = terms.sum()
    return op.p * _real_with_check(total, float(np.abs(terms).sum()))


def d_over_p_table(op: DiscreteOperator, max_beta: int) -> np.ndarray:
    """float64 vector of D(h*beta)/p for beta = 0..max_beta (symmetric in beta)."""
    powers = np.empty((len(op.lam), max_beta), dtype=complex)  # lam^(b-1), b = 1..max_beta
    powers[:, 0] = 1.0
    if max_beta > 1:
        powers[:, 1:] = np.cumprod(
            np.repeat(op.lam[:, None], max_beta - 1, axis=1), axis=1
        )
    vals = (op.A[:, None] * powers).sum(axis=0)
    out = np.empty(max_beta + 1)
    out[0] = op.d0_over_p
    if max_beta >= 1:
        out[1] = op.d1_over_p
    if max_beta >= 2:
        out[2:] = vals[1:].real
    return out


def truncation_window(op: DiscreteOperator, tol: float = TAIL_TOL) -> int:
    """Smallest window with geometric tail below tol; clamped to >= 10."""
    rho = float(np.max(np.abs(op.lam)))
    if rho <= 0:
        return 10
    return max(10, int(math.ceil(math.log(tol) / math.log(rho))))


def _signal_function(op: DiscreteOperator, signal: str, alpha: int | None):
    cfg = op.config
    t = cfg.h_omega
    h = cfg.h
    if signal == "sin":
        return lambda j: np.sin(t * j)
    if signal == "cos":
        return lambda j: np.cos(t * j)
    if signal == "t_sin":
        return lambda j: (t * j) * np.sin(t * j)
    if signal == "t_cos":
        return lambda j: (t * j) * np.cos(t * j)
    if signal == "power":
        if alpha is None:
            raise ValueError("signal 'power' requires alpha")
        if alpha < 0 or alpha > 2 * cfg.m - 5:
            raise ValueError(
                f"power signal needs 0 <= alpha <= 2m-5 = {2 * cfg.m - 5}, got {alpha}"
            )
        return lambda j: (h * j) ** alpha
    raise ValueError(f"unknown signal {signal!r}; expected one of {_SIGNALS}")


def annihilation_residual(
    op: DiscreteOperator, signal: str, window: int, alpha: int | None = None
) -> float:
    """Worst relative residual of the discrete convolution D * f over a centered range.

    f is one of the sequences the operator annihilates: sin/cos at the grid
    frequency, their first-moment variants, or grid powers up to 2m-5.  The
    residual at each center is normalized by the l1 mass of the convolution
    terms (the operator values are ~(2m-1)!/h^(2m-1), so an absolute
    criterion would only measure float64 granularity, not cancellation).
    """
    f = _signal_function(op, signal, alpha)
    gammas = np.arange(-window, window + 1)
    d_vals = np.array([eval_D(op, int(g)) for g in gammas])
    worst = 0.0
    for beta in range(-8, 9):
        terms = d_vals * f(beta - gammas)
        num = abs(math.fsum(terms))
        scale = float(np.abs(terms).sum())
        worst = max(worst, num / max(scale, 1.0))
    return worst
