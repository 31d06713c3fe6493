#!/usr/bin/env python3
"""Benchmark the compiled (numba) kernels against the pure-numpy fallback.

Runs every switchable kernel on a realistic workload drawn from actual
sphere-projection fitting problems, times both backends in one process via
``kernels.use_backend``, and reports median/min wall time, speedup, and the
maximum cross-backend output deviation.  Finishes with two end-to-end rows
(minimal three-point solve, full robust fit) timed under each backend.

Usage::

    python benchmarks/bench_backends.py [--repeats N] [--seed S]
        [--points N] [--starts N]
"""
from __future__ import annotations

import argparse
import math
import statistics
import time

import numpy as np

from spherefit import (
    Intrinsics,
    RansacConfig,
    add_outliers,
    ellipse_bbox,
    fit_three_point,
    kernels,
    project_sphere,
    random_scene,
    run_ransac,
    sample_conic_points,
)
from spherefit.fitters import constraint_polys, design_matrix
from spherefit.numeric import nullspace_3x6

INTR = Intrinsics(fe=800.0)


def _time(fn, repeats: int) -> tuple[float, float]:
    """Median and min wall time of ``fn()`` over ``repeats`` runs, in ms."""
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t0) * 1e3)
    return statistics.median(times), min(times)


def _cluster_roots(ab: np.ndarray, res: np.ndarray) -> list[tuple[float, float]]:
    """Deduplicate converged Newton end points to representative roots."""
    roots: list[tuple[float, float]] = []
    for (a, b), r in zip(ab, res):
        if not (math.isfinite(a) and math.isfinite(b)) or r > 1e-9:
            continue
        if not any(math.hypot(a - a0, b - b0) <= 1e-6 for a0, b0 in roots):
            roots.append((float(a), float(b)))
    return sorted(roots)


def _root_set_deviation(sa, sb) -> float:
    """Worst nearest-neighbour distance between two root sets (inf if sizes differ)."""
    if len(sa) != len(sb):
        return math.inf
    if not sa:
        return 0.0
    return max(
        min(math.hypot(a - x, b - y) for x, y in sb) for a, b in sa
    )


def build_workloads(seed: int, n_points: int, n_starts: int) -> dict:
    """Deterministic inputs for every kernel, drawn from real fit problems."""
    rng = np.random.default_rng(seed)
    scene = random_scene(rng)
    conic = project_sphere(scene, INTR)
    pts3 = sample_conic_points(conic, 3, rng=rng).xy
    basis = nullspace_3x6(design_matrix(pts3 / INTR.fe))
    g1, g2 = constraint_polys(basis, Intrinsics(fe=1.0))

    A = rng.normal(size=(200, 6))
    side = int(round(math.sqrt(n_starts)))
    ax = np.linspace(-50.0, 50.0, side)
    GA, GB = np.meshgrid(ax, ax, indexing="ij")
    starts = np.column_stack([GA.ravel(), GB.ravel()])

    batch = sample_conic_points(conic, n_points, sigma=0.5, rng=rng)
    return {
        "eigh_sym": (A.T @ A,),
        "poly_roots": (np.asarray(kernels.resultant(g1, g2, 1)),),
        "polyval2": (g1, GA.ravel(), GB.ravel()),
        "det3_affine": (rng.normal(size=(3, 3, 3)),),
        "resultant": (g1, g2, 1),
        "newton2": (g1, g2, starts, 60, 1e-12),
        "sampson_many": (conic.as_array(), batch.xy),
    }


# Ill-conditioned roots in the realistic workload legitimately move more
# than machine epsilon between arithmetically different but equally correct
# implementations, so the rootfinding kernels get condition-appropriate
# checks instead of positional 1e-6: backward error for poly_roots, and
# set matching at the residual-plateau radius for newton2 (a near-tangent
# common root keeps |g1|+|g2| <= 1e-12 over a ~1e-4 neighbourhood).
AGREE_TOL = {"poly_roots": 1e-12, "newton2": 1e-3}
DEFAULT_TOL = 1e-6


def _backward_error(coeffs: np.ndarray, roots: np.ndarray) -> float:
    """max_r |p(r)| / sum_i |c_i| |r|^i -- implementation-independent."""
    worst = 0.0
    for r in np.asarray(roots):
        powers = r ** np.arange(len(coeffs))
        denom = float(np.sum(np.abs(coeffs) * np.abs(powers)))
        worst = max(worst, float(abs(np.sum(coeffs * powers))) / max(denom, 1e-300))
    return worst


def _deviation(name: str, args, out_a, out_b) -> float:
    """Largest relevant difference between the two backends' outputs."""
    if name == "eigh_sym":
        wa, _ = out_a
        wb, _ = out_b
        return float(np.max(np.abs(wa - wb) / (1.0 + np.abs(wa))))
    if name == "poly_roots":
        c = np.asarray(args[0])
        return max(_backward_error(c, out_a), _backward_error(c, out_b))
    if name == "newton2":
        sa = _cluster_roots(*out_a)
        sb = _cluster_roots(*out_b)
        return _root_set_deviation(sa, sb)
    a = np.asarray(out_a, dtype=float)
    b = np.asarray(out_b, dtype=float)
    scale = 1.0 + np.max(np.abs(a))
    return float(np.max(np.abs(a - b)) / scale)


def bench_kernels(backends: list[str], repeats: int, work: dict) -> list[tuple]:
    rows = []
    for name, args in work.items():
        fn = getattr(kernels, name)
        timings = {}
        outputs = {}
        for be in backends:
            kernels.use_backend(be)
            fn(*args)  # warm-up (triggers JIT compile on the compiled path)
            outputs[be] = fn(*args)
            timings[be] = _time(lambda: fn(*args), repeats)
        dev = (
            _deviation(name, args, outputs[backends[0]], outputs[backends[1]])
            if len(backends) == 2
            else 0.0
        )
        rows.append((name, timings, dev))
    return rows


def bench_end_to_end(backends: list[str], repeats: int, seed: int) -> list[tuple]:
    rng = np.random.default_rng(seed)
    scene = random_scene(rng)
    conic = project_sphere(scene, INTR)
    p = sample_conic_points(conic, 3, rng=rng).xy

    ps = sample_conic_points(conic, 191, sigma=0.1, rng=rng)
    ps = add_outliers(ps, 199, ellipse_bbox(conic, 2.0), rng)
    cfg = RansacConfig(threshold=0.3, seed=seed)

    cases = {
        "fit_three_point": lambda: fit_three_point(p[0], p[1], p[2], INTR),
        "run_ransac": lambda: run_ransac(ps, INTR, cfg),
    }
    rows = []
    for name, fn in cases.items():
        timings = {}
        for be in backends:
            kernels.use_backend(be)
            fn()  # warm-up
            timings[be] = _time(fn, repeats)
        rows.append((name, timings, None))
    return rows


def print_table(rows: list[tuple], backends: list[str]) -> None:
    two = len(backends) == 2
    header = f"{'kernel':<18}"
    for be in backends:
        header += f"{be + ' med (ms)':>14}{be + ' min (ms)':>14}"
    if two:
        header += f"{'speedup':>9}{'max dev':>10}"
    print(header)
    print("-" * len(header))
    for name, timings, dev in rows:
        line = f"{name:<18}"
        for be in backends:
            med, mn = timings[be]
            line += f"{med:>14.4f}{mn:>14.4f}"
        if two:
            med_fast = timings[backends[0]][0]
            med_slow = timings[backends[1]][0]
            line += f"{med_slow / med_fast:>8.1f}x"
            line += "         -" if dev is None else f"{dev:>10.1e}"
        print(line)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=9, help="timed runs per case (default 9)")
    ap.add_argument("--seed", type=int, default=0, help="workload seed (default 0)")
    ap.add_argument("--points", type=int, default=4096, help="sampson batch size")
    ap.add_argument("--starts", type=int, default=3721, help="newton2 start-point count")
    args = ap.parse_args()

    backends = ["numba", "numpy"] if kernels.HAS_NUMBA else ["numpy"]
    if not kernels.HAS_NUMBA:
        print("note: numba not importable; benchmarking the numpy fallback only\n")

    prev = kernels.current_backend()
    try:
        work = build_workloads(args.seed, args.points, args.starts)
        rows = bench_kernels(backends, args.repeats, work)
        rows += bench_end_to_end(backends, args.repeats, args.seed)
    finally:
        kernels.use_backend(prev)

    print(
        f"backends: {', '.join(backends)}   repeats: {args.repeats}   "
        f"seed: {args.seed}   sampson batch: {args.points}   "
        f"newton2 starts: {args.starts}\n"
    )
    print_table(rows, backends)
    if len(backends) == 2:
        bad = [
            name
            for name, _, dev in rows
            if dev is not None and dev > AGREE_TOL.get(name, DEFAULT_TOL)
        ]
        if bad:
            print(f"\nWARNING: backends disagree beyond tolerance on: {', '.join(bad)}")
            return 1
        print(
            "\ncross-backend agreement: all kernels within tolerance "
            f"(positional {DEFAULT_TOL:g}; backward error {AGREE_TOL['poly_roots']:g} "
            f"for poly_roots; root-plateau {AGREE_TOL['newton2']:g} for newton2)"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
