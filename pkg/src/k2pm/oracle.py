"""Independent ground truth: dense solve of the defining linear system.

The interpolation conditions plus the orthogonality constraints form one
(n+m+1)-dimensional linear system in the kernel weights and null-space
amplitudes.  Solving it densely is O(n^3) but involves none of the
convolution machinery, so it arbitrates the fast path.

The kernel Gram block has condition number ~n^(2m-1); for the small n used
in verification the solve runs in mpmath (LU with partial pivoting) and is
returned as double-double, putting the oracle's own error far below the
1e-6 comparison tolerance.  Above the size threshold a float64 LAPACK
solve is used instead.
"""

from __future__ import annotations

import logging

import mpmath as mp
import numpy as np

from ._precision import dd_from_mp
from .builder import SampleSet, SplineCoefficients
from .discrete_operator import SplineConfig
from .errors import ConfigurationError, SingularSystemError
from .kernel import G, G_mp

__all__ = ["dense_system", "dense_solve", "compare"]

logger = logging.getLogger("k2pm")

_MP_DPS = 50
MP_LANE_MAX_N = 220
CONDITION_LIMIT_N = 400  # condition estimate skipped above this size


def _check_nodes(config: SplineConfig, nodes) -> np.ndarray:
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or len(nodes) != config.n + 1:
        raise ConfigurationError(f"expected {config.n + 1} nodes, got shape {nodes.shape}")
    if np.any(np.diff(nodes) <= 0):
        raise ConfigurationError("nodes must be strictly increasing (duplicates rejected)")
    if nodes[0] < -1e-12 or nodes[-1] > 1 + 1e-12:
        raise ConfigurationError("nodes must lie in [0,1]")
    return nodes


def dense_system(
    config: SplineConfig, nodes, samples: SampleSet
) -> tuple[np.ndarray, np.ndarray]:
    """The full (n+m+1)-dimensional system (matrix, rhs) in float64.

    Unknown ordering: [C_0..C_n, d1, d2, r_0..r_{m-3}].  Arbitrary strictly
    increasing nodes in [0,1] are supported (uniformity is not assumed).
    """
    nodes = _check_nodes(config, nodes)
    phi = np.asarray(samples.values, dtype=float)
    if len(phi) != config.n + 1:
        raise ConfigurationError("sample count must match node count")
    m, omega, n = config.m, config.omega, config.n
    dim = n + m + 1
    A = np.zeros((dim, dim))
    diff = nodes[:, None] - nodes[None, :]
    A[: n + 1, : n + 1] = G(m, omega, diff)
    sin_col = np.sin(omega * nodes)
    cos_col = np.cos(omega * nodes)
    A[: n + 1, n + 1] = sin_col
    A[: n + 1, n + 2] = cos_col
    for a in range(m - 2):
        A[: n + 1, n + 3 + a] = nodes**a
    A[n + 1, : n + 1] = sin_col
    A[n + 2, : n + 1] = cos_col
    for a in range(m - 2):
        A[n + 3 + a, : n + 1] = nodes**a
    b = np.zeros(dim)
    b[: n + 1] = phi
    return A, b


def dense_solve(
    config: SplineConfig,
    nodes,
    samples: SampleSet,
    precision: str = "auto",
) -> SplineCoefficients:
    """LU solve (partial pivoting) of the dense system; reports a condition
    estimate and its own residual in the returned info dict."""
    nodes = _check_nodes(config, nodes)
    phi = np.asarray(samples.values, dtype=float)
    m, n = config.m, config.n
    dim = n + m + 1

    use_mp = precision == "extended" or (precision == "auto" and n <= MP_LANE_MAX_N)
    A64, b64 = dense_system(config, nodes, samples)
    condition = None
    if n <= CONDITION_LIMIT_N:
        try:
            condition = float(np.linalg.cond(A64))
        except np.linalg.LinAlgError:
            condition = float("inf")
        if condition > 1e10:
            logger.warning("dense system condition number %.3e", condition)

    if use_mp:
        uniform = np.allclose(nodes, config.nodes(), rtol=0, atol=1e-15)
        with mp.workdps(_MP_DPS):
            omega = mp.mpf(config.omega)
            Amp = mp.matrix(dim, dim)
            if uniform:
                h = mp.mpf(1) / n
                table = [G_mp(m, omega, h * d) for d in range(n + 1)]
                for i in range(n + 1):
                    for j in range(n + 1):
                        Amp[i, j] = table[abs(i - j)]
                xs = [h * i for i in range(n + 1)]
            else:
                xs = [mp.mpf(v) for v in nodes]
                for i in range(n + 1):
                    for j in range(n + 1):
                        Amp[i, j] = G_mp(m, omega, xs[i] - xs[j])
            for i in range(n + 1):
                Amp[i, n + 1] = mp.sin(omega * xs[i])
                Amp[i, n + 2] = mp.cos(omega * xs[i])
                for a in range(m - 2):
                    Amp[i, n + 3 + a] = xs[i] ** a
            for j in range(n + 1):
                Amp[n + 1, j] = mp.sin(omega * xs[j])
                Amp[n + 2, j] = mp.cos(omega * xs[j])
                for a in range(m - 2):
                    Amp[n + 3 + a, j] = xs[j] ** a
            bmp = mp.matrix([mp.mpf(float(v)) for v in phi] + [mp.mpf(0)] * m)
            try:
                x = mp.lu_solve(Amp, bmp)
            except (ZeroDivisionError, ValueError) as exc:
                raise SingularSystemError(
                    f"dense system numerically singular (uniqueness violated): {exc}"
                ) from exc
            resid = Amp * x - bmp
            resid_inf = float(max(abs(v) for v in resid))
            C_hi = np.empty(n + 1)
            C_lo = np.empty(n + 1)
            for i in range(n + 1):
                C_hi[i], C_lo[i] = dd_from_mp(x[i])
            d1, d2 = float(x[n + 1]), float(x[n + 2])
            r = np.array([float(x[n + 3 + a]) for a in range(m - 2)])
        lane = "extended"
    else:
        try:
            x = np.linalg.solve(A64, b64)
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError(
                f"dense system numerically singular (uniqueness violated): {exc}"
            ) from exc
        resid_inf = float(np.max(np.abs(A64 @ x - b64)))
        C_hi = x[: n + 1].copy()
        C_lo = np.zeros(n + 1)
        d1, d2 = float(x[n + 1]), float(x[n + 2])
        r = x[n + 3 :].copy()
        lane = "double"

    for arr in (C_hi, C_lo, r):
        arr.flags.writeable = False
    scale_b = float(np.max(np.abs(b64))) or 1.0
    return SplineCoefficients(
        C=C_hi, d1=d1, d2=d2, r=r, C_lo=C_lo,
        info={
            "lane": lane,
            "condition": condition,
            "residual_inf": resid_inf,
            "residual_rel": resid_inf / scale_b,
        },
    )


def compare(a: SplineCoefficients, b: SplineCoefficients, tolerance: float = 1e-6) -> dict:
    """Deviation report between two coefficient sets, b acting as reference.

    Per family (C, d1, d2, r): max absolute deviation and the deviation
    relative to max(1, reference magnitude); passes when every relative
    deviation is within the tolerance.
    """
    if len(a.C) != len(b.C) or len(a.r) != len(b.r):
        raise ValueError(
            f"shape mismatch: C {len(a.C)} vs {len(b.C)}, r {len(a.r)} vs {len(b.r)}"
        )
    families = {}
    dev_C = np.abs((a.C - b.C) + (a.C_lo - b.C_lo))
    families["C"] = _family(float(np.max(dev_C)) if len(dev_C) else 0.0,
                            float(np.max(np.abs(b.C))) if len(b.C) else 0.0)
    families["d1"] = _family(abs(a.d1 - b.d1), abs(b.d1))
    families["d2"] = _family(abs(a.d2 - b.d2), abs(b.d2))
    dev_r = np.abs(a.r - b.r)
    families["r"] = _family(float(np.max(dev_r)) if len(dev_r) else 0.0,
                            float(np.max(np.abs(b.r))) if len(b.r) else 0.0)
    max_rel = max(f["rel"] for f in families.values())
    return {
        "families": families,
        "max_rel": max_rel,
        "tolerance": tolerance,
        "passed": bool(max_rel <= tolerance),
    }


def _family(max_abs: float, ref_scale: float) -> dict:
    scale = max(1.0, ref_scale)
    return {"max_abs": max_abs, "scale": scale, "rel": max_abs / scale}
