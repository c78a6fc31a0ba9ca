"""Command-line front end: build, eval, verify, compare, bench.

Exit codes: 0 success / all checks passed, 1 verification or comparison
failure, 2 invalid parameters or input data, 3 numeric failure.  Artifacts
are JSON with round-tripping float literals and sorted keys, so identical
inputs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .builder import (
    SampleSet,
    build_spline,
    extension_residual,
    reconstruct_coefficients,
    side_condition_residuals,
    solve_boundary,
    compute_coefficients,
    SplineCoefficients,
)
from .discrete_operator import (
    SplineConfig,
    annihilation_residual,
    build_operator,
    eval_D,
    truncation_window,
)
from .errors import ConfigurationError, K2PMError
from .evaluation import evaluate, node_vanishing_perturbation, perturbed_seminorm, seminorm
from .kernel import G
from .oracle import compare as oracle_compare
from .oracle import dense_solve, dense_system

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3

logger = logging.getLogger("k2pm")


def _configure_logging():
    level = os.environ.get("K2PM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


def _config_from_args(args) -> SplineConfig:
    return SplineConfig(m=args.m, omega=args.omega, n=args.n)


def _preset_values(name: str, config: SplineConfig, seed: int) -> np.ndarray:
    x = config.nodes()
    if name == "sin":
        return np.sin(config.omega * x)
    if name == "cos":
        return np.cos(config.omega * x)
    if name.startswith("poly:"):
        try:
            alpha = int(name.split(":", 1)[1])
        except ValueError:
            raise ConfigurationError(f"bad poly preset {name!r}; want poly:<alpha>")
        if alpha < 0:
            raise ConfigurationError("poly exponent must be >= 0")
        return x**alpha
    if name == "runge":
        return 1.0 / (1.0 + 25.0 * (2.0 * x - 1.0) ** 2)
    if name == "random" or name.startswith("random:"):
        if ":" in name:
            try:
                seed = int(name.split(":", 1)[1])
            except ValueError:
                raise ConfigurationError(f"bad random preset {name!r}; want random:<seed>")
        rng = np.random.default_rng(seed)
        return rng.uniform(-1.0, 1.0, config.n + 1)
    raise ConfigurationError(
        f"unknown preset {name!r}; expected sin, cos, poly:<alpha>, runge, random[:<seed>]"
    )


def _read_samples_csv(path: str, config: SplineConfig) -> np.ndarray:
    values = np.full(config.n + 1, np.nan)
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#") or line.lower().startswith(("beta,", "x,")):
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ConfigurationError(f"{path}:{lineno}: expected two columns")
            key, val = parts[0].strip(), float(parts[1])
            kf = float(key)
            if kf == int(kf) and ("." not in key and "e" not in key.lower()):
                beta = int(kf)
            else:
                beta_f = kf * config.n
                beta = int(round(beta_f))
                if abs(kf - beta / config.n) > 1e-12:
                    raise ConfigurationError(
                        f"{path}:{lineno}: x={key} is not on the uniform grid (rejected)"
                    )
            if beta < 0 or beta > config.n:
                raise ConfigurationError(f"{path}:{lineno}: index {beta} outside 0..{config.n}")
            values[beta] = val
    if np.any(np.isnan(values)):
        missing = np.where(np.isnan(values))[0]
        raise ConfigurationError(f"{path}: missing values for indices {missing.tolist()[:8]}")
    return values


def _samples_from_args(args, config: SplineConfig) -> np.ndarray:
    if getattr(args, "input", None):
        return _read_samples_csv(args.input, config)
    preset = getattr(args, "preset", None) or "random"
    return _preset_values(preset, config, getattr(args, "seed", 0) or 0)


def _artifact_dict(config, samples, coeffs, op) -> dict:
    side = side_condition_residuals(config, coeffs)
    node_vals = evaluate(config, coeffs, config.nodes())
    interp = float(np.max(np.abs(node_vals - samples)))
    return {
        "schema": "k2pm-spline-v1",
        "version": __version__,
        "config": {"m": config.m, "omega": config.omega, "n": config.n},
        "samples": samples.tolist(),
        "coefficients": {
            "C": coeffs.C.tolist(),
            "C_lo": coeffs.C_lo.tolist(),
            "d1": coeffs.d1,
            "d2": coeffs.d2,
            "r": coeffs.r.tolist(),
        },
        "operator": {
            "lambda_re": op.lam.real.tolist(),
            "lambda_im": op.lam.imag.tolist(),
        },
        "diagnostics": {
            "lane": coeffs.info.get("lane"),
            "boundary_condition_number": coeffs.info.get("boundary_condition"),
            "side_conditions": side,
            "max_interpolation_residual": interp,
        },
    }


def _write_json(obj, path: str | None):
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_artifact(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        art = json.load(fh)
    if art.get("schema") != "k2pm-spline-v1":
        raise ConfigurationError(f"{path}: not a k2pm spline artifact")
    c = art["config"]
    config = SplineConfig(m=c["m"], omega=c["omega"], n=c["n"])
    co = art["coefficients"]
    coeffs = SplineCoefficients(
        C=np.asarray(co["C"], dtype=float),
        d1=float(co["d1"]),
        d2=float(co["d2"]),
        r=np.asarray(co["r"], dtype=float),
        C_lo=np.asarray(co["C_lo"], dtype=float),
    )
    samples = np.asarray(art["samples"], dtype=float)
    return config, coeffs, samples


# ---------------------------------------------------------------------------
# commands

def cmd_build(args) -> int:
    config = _config_from_args(args)
    samples = SampleSet(_samples_from_args(args, config))
    op = build_operator(config)
    coeffs = build_spline(config, samples, op=op)
    artifact = _artifact_dict(config, samples.values, coeffs, op)
    _write_json(artifact, args.output)
    return EXIT_OK


def cmd_eval(args) -> int:
    config, coeffs, _samples = _load_artifact(args.input)
    pts = args.points
    if pts < 2:
        raise ConfigurationError("--points must be >= 2")
    x = np.linspace(0.0, 1.0, pts)
    s = evaluate(config, coeffs, x, allow_extrapolation=args.allow_extrapolation)
    if args.format == "json":
        _write_json({"x": x.tolist(), "s": s.tolist()}, args.output)
        return EXIT_OK
    lines = ["x,S(x)"]
    lines += [f"{xi!r},{si!r}" for xi, si in zip(x, s)]
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _delta_check(op, beta: int, window: int) -> float:
    cfg = op.config
    gammas = np.arange(-window, window + 1)
    d_vals = np.array([eval_D(op, int(g)) for g in gammas])
    g_vals = G(cfg.m, cfg.omega, cfg.h * (beta - gammas))
    terms = d_vals * g_vals
    target = 1.0 if beta == 0 else 0.0
    return abs(math.fsum(terms) - target) / max(1.0, float(np.abs(terms).sum()))


def cmd_verify(args) -> int:
    config = _config_from_args(args)
    tol = args.tolerance
    checks = []

    def record(name, value, bound):
        checks.append(
            {"name": name, "value": float(value), "bound": float(bound),
             "passed": bool(value <= bound)}
        )

    op = build_operator(config)
    rng_values = _preset_values(f"random:{args.seed or 0}", config, 0)
    samples = SampleSet(rng_values)
    bs = solve_boundary(config, op, samples)
    coeffs = compute_coefficients(config, op, bs, samples)

    node_vals = evaluate(config, coeffs, config.nodes())
    scale_phi = max(1.0, float(np.max(np.abs(rng_values))))
    record("interpolation", np.max(np.abs(node_vals - rng_values)) / scale_phi, 1e-8)

    side = side_condition_residuals(config, coeffs)
    scale_c = max(1.0, float(np.max(np.abs(coeffs.C))))
    worst_side = max([abs(side["sin"]), abs(side["cos"])] + [abs(v) for v in side["power"]])
    record("side_conditions", worst_side / scale_c, 1e-8)

    outside = list(range(-(config.m + 3), 0)) + list(
        range(config.n + 1, config.n + config.m + 4)
    )
    worst_ext = max(extension_residual(config, op, bs, samples, b) for b in outside)
    record("extension_consistency", worst_ext, 1e-8)

    rec = reconstruct_coefficients(config, op, bs, samples)
    record("reconstruction", np.max(np.abs(rec - coeffs.C)) / scale_c, 1e-8)

    reference = dense_solve(config, config.nodes(), samples)
    rep = oracle_compare(coeffs, reference, tolerance=tol)
    record("oracle_agreement", rep["max_rel"], tol)

    W = truncation_window(op)
    record("delta_identity", max(_delta_check(op, b, W) for b in (0, 3, 7)), 1e-8)

    worst_ann = 0.0
    for signal in ("sin", "cos", "t_sin", "t_cos"):
        worst_ann = max(worst_ann, annihilation_residual(op, signal, W))
    for alpha in range(0, max(0, 2 * config.m - 4)):
        worst_ann = max(worst_ann, annihilation_residual(op, "power", W, alpha=alpha))
    record("annihilation", worst_ann, 1e-8)

    grid = np.linspace(0.0, 1.0, 301)
    exact_cases = {"sin": np.sin(config.omega * grid), "cos": np.cos(config.omega * grid)}
    exact_nodes = {"sin": np.sin(config.omega * config.nodes()),
                   "cos": np.cos(config.omega * config.nodes())}
    for a in range(config.m - 2):
        exact_cases[f"poly:{a}"] = grid**a
        exact_nodes[f"poly:{a}"] = config.nodes() ** a
    worst_exact = 0.0
    for name, target in exact_cases.items():
        cfs = build_spline(config, SampleSet(exact_nodes[name]), op=op)
        vals = evaluate(config, cfs, grid)
        worst_exact = max(worst_exact, float(np.max(np.abs(vals - target))))
    record("exactness", worst_exact, 1e-7)

    qp = 10 * (config.n + 1)
    base = seminorm(config, coeffs, qp)
    rng = np.random.default_rng((args.seed or 0) + 1)
    worst_gain = 0.0
    for _ in range(3):
        pert = node_vanishing_perturbation(
            config, amplitude=0.05 * scale_phi,
            frequency=float(rng.uniform(0.5, 3.0)), phase=float(rng.uniform(0, 2 * np.pi)),
        )
        per = perturbed_seminorm(config, coeffs, qp, pert)
        worst_gain = max(worst_gain, base - per)
    record("minimality", worst_gain, 1e-9)

    result = {
        "config": {"m": config.m, "omega": config.omega, "n": config.n},
        "checks": checks,
        "passed": bool(all(c["passed"] for c in checks)),
    }
    _write_json(result, args.output)
    return EXIT_OK if result["passed"] else EXIT_FAIL


def cmd_compare(args) -> int:
    config = _config_from_args(args)
    samples = SampleSet(_samples_from_args(args, config))
    coeffs = build_spline(config, samples)
    reference = dense_solve(config, config.nodes(), samples)
    rep = oracle_compare(coeffs, reference, tolerance=args.tolerance)
    rep_out = {
        "config": {"m": config.m, "omega": config.omega, "n": config.n},
        "report": rep,
        "oracle": {
            "condition": reference.info.get("condition"),
            "residual_rel": reference.info.get("residual_rel"),
        },
    }
    _write_json(rep_out, args.output)
    return EXIT_OK if rep["passed"] else EXIT_FAIL


def _time_best(fn, repeats: int) -> float:
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",")]
    rows = []
    oracle_time = None
    for n in sizes:
        config = SplineConfig(m=args.m, omega=args.omega, n=n)
        rng = np.random.default_rng(12345)
        samples = SampleSet(rng.uniform(-1.0, 1.0, n + 1))
        t0 = time.perf_counter()
        op = build_operator(config)
        solve_boundary(config, op, samples, precision="double")  # warm caches
        setup = time.perf_counter() - t0
        t_solve = _time_best(
            lambda: solve_boundary(config, op, samples, precision="double"), args.repeats
        )
        bs = solve_boundary(config, op, samples, precision="double")
        t_coeff = _time_best(
            lambda: compute_coefficients(config, op, bs, samples), args.repeats
        )
        rows.append((n, setup, t_solve, t_coeff, t_solve + t_coeff))
        if n == args.oracle_at:
            t_oracle = _time_best(
                lambda: dense_solve(config, config.nodes(), samples, precision="double"),
                max(1, args.repeats - 1),
            )
            oracle_time = (n, t_oracle)

    lines = ["n,setup_s,boundary_s,coefficients_s,sobolev_s"]
    for row in rows:
        lines.append(",".join(repr(v) for v in row))
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)

    if len(rows) >= 2:
        ns = np.array([r[0] for r in rows], dtype=float)
        ts = np.array([r[3] for r in rows], dtype=float)
        slope = float(np.polyfit(np.log(ns), np.log(ts), 1)[0])
        print(f"# coefficients wall-time slope (log-log): {slope:.3f}", file=sys.stderr)
    if oracle_time is not None:
        n0, t_oracle = oracle_time
        sob = next(r[4] for r in rows if r[0] == n0)
        print(
            f"# dense oracle at n={n0}: {t_oracle:.4f}s vs sobolev {sob:.6f}s "
            f"(ratio {t_oracle / sob:.1f}x)",
            file=sys.stderr,
        )
    return EXIT_OK


# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="k2pm",
        description="Interpolation splines minimizing the K2(Pm) seminorm on uniform grids",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--m", type=int, required=True, help="operator order parameter (>= 2)")
        p.add_argument("--omega", type=float, required=True, help="frequency omega (> 0)")
        p.add_argument("--n", type=int, required=True, help="node count minus one")

    def add_data(p):
        p.add_argument("--input", help="CSV samples: rows 'beta,value' or 'x,value'")
        p.add_argument(
            "--preset", help="sin | cos | poly:<alpha> | runge | random[:<seed>]"
        )
        p.add_argument("--seed", type=int, default=0, help="seed for the random preset")

    p = sub.add_parser("build", help="construct a spline and write a JSON artifact")
    add_config(p)
    add_data(p)
    p.add_argument("--output", help="artifact path (default: stdout)")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("eval", help="evaluate an artifact on an equispaced grid")
    p.add_argument("--input", required=True, help="spline artifact (JSON)")
    p.add_argument("--points", type=int, default=1000)
    p.add_argument("--output", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--allow-extrapolation", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", help="run the invariant suite for one configuration")
    add_config(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--output", help="JSON report path (default: stdout)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compare", help="closed-form path vs dense solve")
    add_config(p)
    add_data(p)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--output", help="JSON report path (default: stdout)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bench", help="timing sweep over n plus a dense-solve baseline")
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--sizes", default="1000,10000,100000", help="comma-separated n values")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--oracle-at", type=int, default=1000)
    p.add_argument("--output", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(json.dumps({"error": "validation", "reason": str(exc)}), file=sys.stderr)
        return EXIT_VALIDATION
    except (K2PMError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(json.dumps({"error": "numeric", "reason": str(exc)}), file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
