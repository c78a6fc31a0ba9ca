"""Spline construction on the uniform grid in O(n).

The interpolation data phi(h*beta) is extended beyond [0,1] by null-space
branches (trigonometric plus a degree m-3 polynomial on each side, with
distinct parameters).  Requiring the discrete operator to annihilate the
extension at the 2m-2 lattice points nearest the interval pins down the
extension parameters; the kernel weights are then a single discrete
convolution of the operator with the extension, which collapses to closed
form: three-term local combinations plus geometric sums handled by
forward/backward first-order recursions.

Two precision lanes:

* extended (default up to n = 1024): everything in mpmath, results rounded
  to double-double.  The final weights are p * (a cancelling bracket) with
  p ~ (2m-1)! * n^(2m-1); in float64 the bracket's round-off alone would
  leave absolute noise ~p*eps ~ 1e-5 at m = 3, n = 20, far above the
  1e-8 accuracy this package promises.
* double: float64 + scipy.signal.lfilter for the geometric recursions;
  used for large n and benchmarking, where the data scale dominates noise.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Optional

import mpmath as mp
import numpy as np
from scipy.signal import lfilter

from ._precision import dd_from_mp, two_prod
from .discrete_operator import (
    DiscreteOperator,
    SplineConfig,
    build_operator,
    d_over_p_table,
    eval_D,
    precise_operator,
    truncation_window,
)
from .errors import ConfigurationError, SingularSystemError
from .polynomials import _power_tail, finite_diff_zero

__all__ = [
    "SampleSet",
    "BoundarySolution",
    "SplineCoefficients",
    "assemble_boundary_system",
    "solve_boundary",
    "compute_MN",
    "compute_coefficients",
    "u_extension",
    "build_spline",
    "side_condition_residuals",
    "extension_residual",
    "reconstruct_coefficients",
]

logger = logging.getLogger("k2pm")

_MP_DPS = 50
MP_LANE_MAX_N = 1024
COS_OMEGA_MIN = 1e-7  # omega this close to an odd multiple of pi/2 is rejected
CONDITION_WARN = 1e10


@dataclass(frozen=True)
class SampleSet:
    """Values phi(h*beta), beta = 0..n."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise ConfigurationError("samples must be a 1-D sequence of at least 2 values")
        if not np.all(np.isfinite(arr)):
            raise ConfigurationError("samples must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class BoundarySolution:
    """Extension parameters for both sides, plus derived averages/differences."""

    d1_minus: float
    d1_plus: float
    d2_minus: float
    d2_plus: float
    r_minus: np.ndarray
    r_plus: np.ndarray
    d1: float
    d2: float
    r: np.ndarray
    D1: float
    D2: float
    q_coeffs: np.ndarray
    condition: float
    mp_payload: Optional[dict] = field(default=None, repr=False)


@dataclass(frozen=True, eq=False)
class SplineCoefficients:
    """Kernel weights C (double-double: C + C_lo), d1, d2 and polynomial part r."""

    C: np.ndarray
    d1: float
    d2: float
    r: np.ndarray
    C_lo: np.ndarray
    info: dict = field(default_factory=dict, repr=False)


def _check_samples(config: SplineConfig, samples: SampleSet) -> np.ndarray:
    if len(samples) != config.n + 1:
        raise ConfigurationError(
            f"expected {config.n + 1} samples for n={config.n}, got {len(samples)}"
        )
    return samples.values


def _check_cos_omega(config: SplineConfig) -> float:
    c = math.cos(config.omega)
    if abs(c) < COS_OMEGA_MIN:
        raise ConfigurationError(
            f"|cos(omega)| = {abs(c):.3e} < {COS_OMEGA_MIN}: omega too close to an odd "
            "multiple of pi/2 for the boundary reduction"
        )
    return c


def _lane(config: SplineConfig, precision: str) -> str:
    if precision == "auto":
        return "extended" if config.n <= MP_LANE_MAX_N else "double"
    if precision in ("extended", "double"):
        return precision
    raise ValueError(f"precision must be 'auto', 'extended' or 'double', got {precision!r}")


# ---------------------------------------------------------------------------
# closed-form tail sums (mpmath)

def _trig_tails_mp(lam, theta, phase):
    """(sum_{g>=1} lam^g sin(theta g + phase), cos version); lam may be complex."""
    i = mp.mpc(0, 1)
    zp = lam * mp.exp(i * theta)
    zm = lam * mp.exp(-i * theta)
    bp = zp / (1 - zp)
    bm = zm / (1 - zm)
    ep = mp.exp(i * phase)
    em = mp.exp(-i * phase)
    s = (ep * bp - em * bm) / (2 * i)
    c = (ep * bp + em * bm) / 2
    return s, c


def _shifted_power_tail_mp(lam, j, shift):
    """sum_{g>=1} lam^g (g+shift)^j for integer shift >= 0."""
    return mp.fsum(
        comb(j, r) * mp.mpf(shift) ** (j - r) * _power_tail(lam, r) for r in range(j + 1)
    )


_TAIL_KINDS = ("sin", "cos", "coswp", "one")


def _kernel_tails_mp(opp, nu: int, max_pow: int) -> dict:
    """S(nu; f) = sum_{g>=1} [D(h(nu+g))/p] f(g) for every basis sequence f.

    Three lattice points fall on the operator's non-geometric branches
    (arguments -1, 0, +1); they contribute f(-nu-1) + C f(-nu) + f(-nu+1)
    whenever the index is >= 1.  The rest is per-root geometric: for
    nu >= 0 a pure tail scaled by lam^nu, for nu < 0 a short explicit sum
    plus a shifted tail.
    """
    t, om, C = opp.t, opp.omega, opp.C

    def fval(kind, j, g):
        g = mp.mpf(g)
        if kind == "sin":
            return mp.sin(t * g)
        if kind == "cos":
            return mp.cos(t * g)
        if kind == "coswp":
            return mp.cos(om + t * g)
        if kind == "one":
            return mp.mpf(1)
        return g**j

    kinds = [(k, 0) for k in _TAIL_KINDS] + [("pow", j) for j in range(1, max_pow + 1)]
    out = {}
    for kind, j in kinds:
        total = mp.mpf(0)
        for g, w in ((-nu - 1, 1), (-nu, C), (-nu + 1, 1)):
            if g >= 1:
                total += w * fval(kind, j, g)
        for k in range(opp.m - 1):
            lam = opp.lam[k]
            if nu >= 0:
                if kind == "sin":
                    tail = _trig_tails_mp(lam, t, 0)[0]
                elif kind == "cos":
                    tail = _trig_tails_mp(lam, t, 0)[1]
                elif kind == "coswp":
                    tail = _trig_tails_mp(lam, t, om)[1]
                elif kind == "one":
                    tail = lam / (1 - lam)
                else:
                    tail = _power_tail(lam, j)
                geom = lam**nu * tail
            else:
                b = -nu
                geom = mp.fsum(lam ** (b - g) * fval(kind, j, g) for g in range(1, b + 1))
                if kind == "sin":
                    geom += _trig_tails_mp(lam, t, t * b)[0]
                elif kind == "cos":
                    geom += _trig_tails_mp(lam, t, t * b)[1]
                elif kind == "coswp":
                    geom += _trig_tails_mp(lam, t, om + t * b)[1]
                elif kind == "one":
                    geom += lam / (1 - lam)
                else:
                    geom += _shifted_power_tail_mp(lam, j, b)
            total += opp.A[k] / lam * geom
        out[(kind, j)] = total
    return out


def _real_mp(value, context: str):
    if mp.im(value) != 0 and abs(mp.im(value)) > mp.mpf("1e-20") * (1 + abs(mp.re(value))):
        raise ArithmeticError(f"imaginary residue in {context}: {value}")
    return mp.re(value)


class _Assembly:
    """Per-configuration boundary system data (sample-independent, cached)."""

    __slots__ = (
        "points", "matrix_mp", "phi0_mp", "phi1_mp", "dtab_mp",
        "matrix", "phi0", "phi1", "condition",
    )


@lru_cache(maxsize=128)
def _assembly(config: SplineConfig) -> _Assembly:
    m, n = config.m, config.n
    cosw = _check_cos_omega(config)
    n_r = m - 2
    dim = 2 * m - 2
    opp = precise_operator(config)
    asm = _Assembly()
    with mp.workdps(_MP_DPS):
        cw = mp.cos(opp.omega)
        h = opp.h
        points = [-(i + 1) for i in range(m - 1)] + [n + 1 + i for i in range(m - 1)]
        matrix = mp.matrix(dim, dim)
        phi0 = []
        phi1 = []
        for row, nu in enumerate(points):
            TL = _kernel_tails_mp(opp, nu, n_r - 1 if n_r > 0 else 0)
            TR = _kernel_tails_mp(opp, n - nu, n_r - 1 if n_r > 0 else 0)
            matrix[row, 0] = _real_mp(-TL[("sin", 0)], "boundary matrix")
            for a in range(n_r):
                if a == 0:
                    val = TL[("one", 0)] - TL[("cos", 0)]
                else:
                    val = (-h) ** a * TL[("pow", a)]
                matrix[row, 1 + a] = _real_mp(val, "boundary matrix")
            matrix[row, 1 + n_r] = _real_mp(TR[("sin", 0)] / cw, "boundary matrix")
            base = TR[("one", 0)] - TR[("coswp", 0)] / cw
            for a in range(n_r):
                val = base
                for j in range(1, a + 1):
                    val = val + comb(a, j) * h**j * TR[("pow", j)]
                matrix[row, 2 + n_r + a] = _real_mp(val, "boundary matrix")
            phi0.append(_real_mp(TL[("cos", 0)], "boundary rhs"))
            phi1.append(_real_mp(TR[("coswp", 0)] / cw, "boundary rhs"))
        dtab = [_real_mp(opp.d_over_p(j), "operator table") for j in range(n + m)]

    asm.points = points
    asm.matrix_mp = matrix
    asm.phi0_mp = phi0
    asm.phi1_mp = phi1
    asm.dtab_mp = dtab
    asm.matrix = np.array([[float(matrix[i, j]) for j in range(dim)] for i in range(dim)])
    asm.phi0 = np.array([float(v) for v in phi0])
    asm.phi1 = np.array([float(v) for v in phi1])
    try:
        asm.condition = float(np.linalg.cond(asm.matrix))
    except np.linalg.LinAlgError:
        asm.condition = float("inf")
    if asm.condition > CONDITION_WARN:
        logger.warning(
            "boundary system condition number %.3e exceeds %.0e (m=%d, omega=%g, n=%d)",
            asm.condition, CONDITION_WARN, m, config.omega, n,
        )
    return asm


def _rhs_f64(config: SplineConfig, op: DiscreteOperator, asm: _Assembly, phi: np.ndarray):
    m, n = config.m, config.n
    dtab = d_over_p_table(op, n + m - 1)
    rhs = np.empty(2 * m - 2)
    for row, nu in enumerate(asm.points):
        if nu < 0:
            mid = float(np.dot(dtab[-nu : -nu + n + 1], phi))
        else:
            mid = float(np.dot(dtab[nu - n : nu + 1][::-1], phi))
        rhs[row] = -(mid + phi[0] * asm.phi0[row] + phi[n] * asm.phi1[row])
    return rhs


def assemble_boundary_system(
    config: SplineConfig, op: DiscreteOperator, samples: SampleSet
) -> tuple[np.ndarray, np.ndarray]:
    """The (2m-2)-dimensional boundary system as float64 (matrix, rhs).

    Unknown ordering: [d1^-, r_0^-..r_{m-3}^-, d1^+, r_0^+..r_{m-3}^+].
    Every infinite tail is evaluated in closed form; no truncation.
    """
    phi = _check_samples(config, samples)
    asm = _assembly(config)
    return asm.matrix.copy(), _rhs_f64(config, op, asm, phi)


def solve_boundary(
    config: SplineConfig,
    op: DiscreteOperator,
    samples: SampleSet,
    precision: str = "auto",
) -> BoundarySolution:
    """Solve the boundary system (dense LU with partial pivoting) and derive
    the one-sided trigonometric amplitudes from the continuity relations at
    the two interval ends."""
    phi = _check_samples(config, samples)
    _check_cos_omega(config)
    lane = _lane(config, precision)
    asm = _assembly(config)
    m, n = config.m, config.n
    n_r = m - 2

    if lane == "extended":
        opp = precise_operator(config)
        with mp.workdps(_MP_DPS):
            phi_mp = [mp.mpf(float(v)) for v in phi]
            rhs = mp.matrix(2 * m - 2, 1)
            for row, nu in enumerate(asm.points):
                if nu < 0:
                    mid = mp.fsum(asm.dtab_mp[-nu + g] * phi_mp[g] for g in range(n + 1))
                else:
                    mid = mp.fsum(asm.dtab_mp[nu - g] * phi_mp[g] for g in range(n + 1))
                rhs[row] = -(mid + phi_mp[0] * asm.phi0_mp[row] + phi_mp[n] * asm.phi1_mp[row])
            try:
                x = mp.lu_solve(asm.matrix_mp, rhs)
            except (ZeroDivisionError, ValueError) as exc:
                raise SingularSystemError(
                    "boundary system is numerically singular, contradicting the uniqueness "
                    f"of the interpolation problem: {exc}"
                ) from exc
            d1m = x[0]
            rm = [x[1 + a] for a in range(n_r)]
            d1p = x[1 + n_r]
            rp = [x[2 + n_r + a] for a in range(n_r)]
            cw, sw = mp.cos(opp.omega), mp.sin(opp.omega)
            d2m = phi_mp[0] - (rm[0] if n_r else mp.mpf(0))
            d2p = phi_mp[n] / cw - d1p * sw / cw - (mp.fsum(rp) / cw if n_r else mp.mpf(0))
            payload = {"d1m": d1m, "d1p": d1p, "d2m": d2m, "d2p": d2p, "rm": rm, "rp": rp}
            return _boundary_from_values(
                float(d1m), float(d1p), float(d2m), float(d2p),
                np.array([float(v) for v in rm]), np.array([float(v) for v in rp]),
                asm.condition, payload,
            )

    matrix, rhs = asm.matrix, _rhs_f64(config, op, asm, phi)
    try:
        x = np.linalg.solve(matrix, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(
            "boundary system is numerically singular, contradicting the uniqueness "
            f"of the interpolation problem: {exc}"
        ) from exc
    d1m = float(x[0])
    rm = x[1 : 1 + n_r].copy()
    d1p = float(x[1 + n_r])
    rp = x[2 + n_r :].copy()
    cw, sw = math.cos(config.omega), math.sin(config.omega)
    d2m = float(phi[0] - (rm[0] if n_r else 0.0))
    d2p = float(phi[n] / cw - d1p * sw / cw - (rp.sum() / cw if n_r else 0.0))
    return _boundary_from_values(d1m, d1p, d2m, d2p, rm, rp, asm.condition, None)


def _boundary_from_values(d1m, d1p, d2m, d2p, rm, rp, condition, payload) -> BoundarySolution:
    rm = np.asarray(rm, dtype=float)
    rp = np.asarray(rp, dtype=float)
    for arr in (rm, rp):
        arr.flags.writeable = False
    r_avg = (rp + rm) / 2.0
    q = (rp - rm) / 2.0
    r_avg.flags.writeable = False
    q.flags.writeable = False
    return BoundarySolution(
        d1_minus=d1m, d1_plus=d1p, d2_minus=d2m, d2_plus=d2p,
        r_minus=rm, r_plus=rp,
        d1=(d1p + d1m) / 2.0, d2=(d2p + d2m) / 2.0, r=r_avg,
        D1=(d1p - d1m) / 2.0, D2=(d2p - d2m) / 2.0, q_coeffs=q,
        condition=float(condition), mp_payload=payload,
    )


# ---------------------------------------------------------------------------
# tail moments of the extension branches

def compute_MN(op: DiscreteOperator, bs: BoundarySolution) -> tuple[np.ndarray, np.ndarray]:
    """Per-root tail moments (M_k, N_k) of the two extension branches.

    M_k = sum_{g>=1} lam_k^g u(-h g) and N_k = sum_{g>=1} lam_k^g u(h(n+g)),
    evaluated in closed form from the boundary parameters.
    """
    cfg = op.config
    t, om, h = cfg.h_omega, cfg.omega, cfg.h
    m = cfg.m
    lam = op.lam
    den = lam * lam + 1.0 - 2.0 * lam * math.cos(t)
    M = lam * (bs.d2_minus * (math.cos(t) - lam) - bs.d1_minus * math.sin(t)) / den
    N = lam * (
        bs.d2_plus * (math.cos(om + t) - lam * math.cos(om))
        + bs.d1_plus * (math.sin(om + t) - lam * math.sin(om))
    ) / den
    if m >= 3:
        geo = lam / (1.0 - lam)
        M = M + bs.r_minus[0] * geo
        N = N + bs.r_plus[0] * geo
        for a in range(1, m - 2):
            pt_a = sum(
                lam**i * finite_diff_zero(i, a) / (1.0 - lam) ** (i + 1)
                for i in range(1, a + 1)
            )
            M = M + bs.r_minus[a] * (-h) ** a * pt_a
            inner = sum(
                comb(a, j) * h**j * sum(
                    lam**i * finite_diff_zero(i, j) / (1.0 - lam) ** (i + 1)
                    for i in range(1, j + 1)
                )
                for j in range(1, a + 1)
            )
            N = N + bs.r_plus[a] * (inner + geo)
    return M, N


def _compute_MN_mp(opp, payload):
    t, om, h = opp.t, opp.omega, opp.h
    m = opp.m
    d1m, d1p = payload["d1m"], payload["d1p"]
    d2m, d2p = payload["d2m"], payload["d2p"]
    rm, rp = payload["rm"], payload["rp"]
    Ms, Ns = [], []
    for lam in opp.lam:
        den = lam * lam + 1 - 2 * lam * mp.cos(t)
        Mk = lam * (d2m * (mp.cos(t) - lam) - d1m * mp.sin(t)) / den
        Nk = lam * (
            d2p * (mp.cos(om + t) - lam * mp.cos(om))
            + d1p * (mp.sin(om + t) - lam * mp.sin(om))
        ) / den
        if m >= 3:
            geo = lam / (1 - lam)
            Mk += rm[0] * geo
            Nk += rp[0] * geo
            for a in range(1, m - 2):
                pt_a = mp.fsum(
                    lam**i * finite_diff_zero(i, a) / (1 - lam) ** (i + 1)
                    for i in range(1, a + 1)
                )
                Mk += rm[a] * (-h) ** a * pt_a
                inner = mp.fsum(
                    comb(a, j) * h**j * mp.fsum(
                        lam**i * finite_diff_zero(i, j) / (1 - lam) ** (i + 1)
                        for i in range(1, j + 1)
                    )
                    for j in range(1, a + 1)
                )
                Nk += rp[a] * (inner + geo)
        Ms.append(Mk)
        Ns.append(Nk)
    return Ms, Ns


# ---------------------------------------------------------------------------
# coefficients

def compute_coefficients(
    config: SplineConfig,
    op: DiscreteOperator,
    bs: BoundarySolution,
    samples: SampleSet,
) -> SplineCoefficients:
    """All kernel weights C_beta in O(n), plus averaged d1, d2, r.

    C_beta = p * [u(beta-1) + C u(beta) + u(beta+1)
                  + sum_k (A_k/lam_k) (Phi_k(beta) + lam_k^beta M_k
                                       + lam_k^(n-beta) N_k)]

    with Phi_k(beta) = sum_gamma lam_k^|beta-gamma| phi(h gamma) computed by
    one forward and one backward geometric recursion per root.
    """
    phi = _check_samples(config, samples)
    if bs.mp_payload is not None:
        return _coefficients_mp(config, bs, phi)
    return _coefficients_f64(config, op, bs, phi)


def _coefficients_f64(config, op, bs, phi) -> SplineCoefficients:
    m, n = config.m, config.n
    lam, A = op.lam, op.A
    M, N = compute_MN(op, bs)
    phi_c = phi.astype(complex)

    u_prev = u_extension(config, bs, SampleSet(phi), -1)
    u_next = u_extension(config, bs, SampleSet(phi), n + 1)
    u_full = np.concatenate([[u_prev], phi, [u_next]])
    local = u_full[:-2] + op.C * u_full[1:-1] + u_full[2:]

    total = local.astype(complex)
    for k in range(m - 1):
        lk = lam[k]
        fwd = lfilter([1.0], [1.0, -lk], phi_c)
        bwd = lfilter([1.0], [1.0, -lk], phi_c[::-1])[::-1]
        Phi = fwd + bwd - phi_c
        pow_f = np.empty(n + 1, dtype=complex)
        pow_f[0] = 1.0
        if n >= 1:
            pow_f[1:] = np.cumprod(np.full(n, lk))
        pow_b = pow_f[::-1]
        total = total + (A[k] / lk) * (Phi + pow_f * M[k] + pow_b * N[k])

    imag_scale = np.max(np.abs(total)) + 1.0
    if np.max(np.abs(total.imag)) > 1e-8 * imag_scale:
        raise ArithmeticError("imaginary residue in coefficient assembly")
    C_arr = op.p * total.real
    C_arr.flags.writeable = False
    zeros = np.zeros(n + 1)
    zeros.flags.writeable = False
    return SplineCoefficients(
        C=C_arr, d1=bs.d1, d2=bs.d2, r=bs.r, C_lo=zeros,
        info={"lane": "double", "boundary_condition": bs.condition},
    )


def _coefficients_mp(config, bs, phi) -> SplineCoefficients:
    m, n = config.m, config.n
    opp = precise_operator(config)
    payload = bs.mp_payload
    with mp.workdps(_MP_DPS):
        phi_mp = [mp.mpf(float(v)) for v in phi]
        Ms, Ns = _compute_MN_mp(opp, payload)
        t = opp.t
        d1m, d1p = payload["d1m"], payload["d1p"]
        d2m, d2p = payload["d2m"], payload["d2p"]
        rm, rp = payload["rm"], payload["rp"]
        h = opp.h
        u_prev = d1m * mp.sin(-t) + d2m * mp.cos(-t) + mp.fsum(
            rm[a] * (-h) ** a for a in range(m - 2)
        )
        u_next = d1p * mp.sin(t * (n + 1)) + d2p * mp.cos(t * (n + 1)) + mp.fsum(
            rp[a] * (h * (n + 1)) ** a for a in range(m - 2)
        )
        u_full = [u_prev] + phi_mp + [u_next]

        lam, A = opp.lam, opp.A
        nroots = m - 1
        fwd = [[mp.mpf(0)] * (n + 1) for _ in range(nroots)]
        bwd = [[mp.mpf(0)] * (n + 1) for _ in range(nroots)]
        for k in range(nroots):
            acc = mp.mpf(0)
            for b in range(n + 1):
                acc = lam[k] * acc + phi_mp[b]
                fwd[k][b] = acc
            acc = mp.mpf(0)
            for b in range(n, -1, -1):
                acc = lam[k] * acc + phi_mp[b]
                bwd[k][b] = acc

        C_hi = np.empty(n + 1)
        C_lo = np.empty(n + 1)
        pow_f = [mp.mpf(1)] * nroots
        pow_b = [lam[k] ** n for k in range(nroots)]
        for beta in range(n + 1):
            tot = u_full[beta] + opp.C * u_full[beta + 1] + u_full[beta + 2]
            for k in range(nroots):
                Phi = fwd[k][beta] + bwd[k][beta] - phi_mp[beta]
                tot += A[k] / lam[k] * (Phi + pow_f[k] * Ms[k] + pow_b[k] * Ns[k])
                pow_f[k] *= lam[k]
                pow_b[k] /= lam[k]
            val = opp.p * _real_mp(tot, "coefficient assembly")
            C_hi[beta], C_lo[beta] = dd_from_mp(val)
    C_hi.flags.writeable = False
    C_lo.flags.writeable = False
    return SplineCoefficients(
        C=C_hi, d1=bs.d1, d2=bs.d2, r=bs.r, C_lo=C_lo,
        info={"lane": "extended", "boundary_condition": bs.condition},
    )


def u_extension(config: SplineConfig, bs: BoundarySolution, samples: SampleSet, beta: int) -> float:
    """The extended data sequence u(h*beta): phi inside [0,n], null-space branches outside."""
    n = config.n
    if 0 <= beta <= n:
        return float(samples.values[beta])
    t = config.h_omega
    h = config.h
    if beta < 0:
        val = bs.d1_minus * math.sin(t * beta) + bs.d2_minus * math.cos(t * beta)
        val += sum(bs.r_minus[a] * (h * beta) ** a for a in range(config.m - 2))
        return float(val)
    val = bs.d1_plus * math.sin(t * beta) + bs.d2_plus * math.cos(t * beta)
    val += sum(bs.r_plus[a] * (h * beta) ** a for a in range(config.m - 2))
    return float(val)


def build_spline(
    config: SplineConfig,
    samples: SampleSet,
    precision: str = "auto",
    op: DiscreteOperator | None = None,
) -> SplineCoefficients:
    """Convenience wrapper: operator, boundary solve, and coefficients."""
    if op is None:
        op = build_operator(config)
    bs = solve_boundary(config, op, samples, precision=precision)
    return compute_coefficients(config, op, bs, samples)


# ---------------------------------------------------------------------------
# diagnostics

def side_condition_residuals(config: SplineConfig, coeffs: SplineCoefficients) -> dict:
    """Residuals of the orthogonality constraints sum C_b f(x_b) = 0 for
    f in {sin(omega x), cos(omega x), x^0..x^(m-3)}; compensated sums."""
    x = config.nodes()
    out = {
        "sin": _comp_weighted_sum(coeffs, np.sin(config.omega * x)),
        "cos": _comp_weighted_sum(coeffs, np.cos(config.omega * x)),
        "power": [
            _comp_weighted_sum(coeffs, x**a) for a in range(config.m - 2)
        ],
    }
    return out


def _comp_weighted_sum(coeffs: SplineCoefficients, basis: np.ndarray) -> float:
    p, pe = two_prod(coeffs.C, basis)
    return math.fsum(np.concatenate([p, pe, coeffs.C_lo * basis]))


def extension_residual(
    config: SplineConfig,
    op: DiscreteOperator,
    bs: BoundarySolution,
    samples: SampleSet,
    beta: int,
    window: int | None = None,
) -> float:
    """|D * u| at an outside lattice point, relative to the l1 mass of the
    convolution terms (those terms are ~(2m-1)!/h^(2m-1), so an absolute
    number would only measure float64 granularity)."""
    if 0 <= beta <= config.n:
        raise ValueError("extension residual is defined outside 0..n")
    W = window if window is not None else truncation_window(op) + config.m + 4
    terms = np.array(
        [
            eval_D(op, g) * u_extension(config, bs, samples, beta - g)
            for g in range(-W, W + 1)
        ]
    )
    return abs(math.fsum(terms)) / max(1.0, float(np.abs(terms).sum()))


def reconstruct_coefficients(
    config: SplineConfig,
    op: DiscreteOperator,
    bs: BoundarySolution,
    samples: SampleSet,
    window: int | None = None,
) -> np.ndarray:
    """Kernel weights recomputed as a truncated discrete convolution of the
    operator with the extension; an independent check of the closed forms."""
    W = window if window is not None else truncation_window(op) + config.m + 4
    n = config.n
    u_vals = np.array(
        [u_extension(config, bs, samples, g) for g in range(-W, n + W + 1)]
    )
    d_vals = np.array([eval_D(op, g) for g in range(-W, W + 1)])
    out = np.empty(n + 1)
    for beta in range(n + 1):
        seg = u_vals[beta : beta + 2 * W + 1]
        out[beta] = math.fsum(d_vals[::-1] * seg)
    return out
