"""The ``ellipse`` command line tool.

Subcommands::

    ellipse generate --config scene.json --out points.csv
    ellipse fit --points points.csv --algo three-point-ransac --fe 800 [...]
    ellipse compare --config scene.json --trials 200 --seed 0 --out-dir out/

Files use image coordinates (origin at the sensor corner); the principal
point from the intrinsics recenters them before any math runs, and all
reported geometry is converted back.  Reported conic coefficients stay in
the centered convention (documented in every report).  Numbers serialize
with 17 significant digits so that files round-trip bit-exactly.

Exit codes: 0 success, 2 configuration/parse error, 3 I/O error,
4 insufficient or degenerate data, 5 no model found.  Diagnostics go to
stderr, controlled by the ELLIPSE_LOG environment variable
(error/warn/info/debug); stdout carries machine-readable output only.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .conic import Conic, compare_up_to_scale, is_ellipse, to_geometry
from .errors import (
    DegenerateSampleError,
    InsufficientDataError,
    InvalidInitError,
    InvalidInputError,
    NoModelError,
    NotAnEllipseError,
)
from .fitters import fit_constrained, fit_direct_ellipse, fit_ls_svd
from .ransac import RansacConfig, run_ransac
from .sphere import (
    Intrinsics,
    PointSet,
    SphereScene,
    add_outliers,
    ellipse_bbox,
    project_sphere,
    sample_conic_points,
)

log = logging.getLogger("ellipse")

_MISSING = object()
_SEED_MAX = 2**63 - 1


# --------------------------------------------------------------------------
# serialization helpers


def _fmt(x: float) -> str:
    """17-significant-digit decimal form; round-trips float64 exactly."""
    return "%.17g" % float(x)


def _fmt6(x: float) -> str:
    return "%.6g" % float(x)


def _render_json(obj, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}{json.dumps(str(k))}: {_render_json(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_render_json(v, indent) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(obj) if math.isfinite(float(obj)) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _report_text(report: dict, wall_time_ms: float | None) -> str:
    """JSON text; the wall-time field shares the last line with the closing
    brace so determinism checks can compare everything but that line."""
    text = _render_json(report)
    if wall_time_ms is None:
        return text + "\n"
    cut = text.rfind("\n}")
    return text[:cut] + ',\n  "wall_time_ms": ' + _fmt(wall_time_ms) + "}\n"


def _write_text(path: str | Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_points(path: str | Path) -> tuple[np.ndarray, np.ndarray | None]:
    """Parse a points file: 'x,y' or 'x,y,label' lines, '#' comments.

    Returns image-coordinate points and an inlier mask (None when the file
    carries no labels).
    """
    rows: list[tuple[float, float]] = []
    labels: list[bool] = []
    ncols = None
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as err:
        # Unreadable input is a parse-level error (exit 2), not output I/O.
        raise InvalidInputError(f"points: {err}") from None
    with fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            cells = [c.strip() for c in s.split(",")]
            if ncols is None:
                if len(cells) not in (2, 3):
                    raise InvalidInputError(
                        f"{path}:{lineno}: expected 2 or 3 columns, got {len(cells)}"
                    )
                ncols = len(cells)
            elif len(cells) != ncols:
                raise InvalidInputError(
                    f"{path}:{lineno}: inconsistent column count "
                    f"(expected {ncols}, got {len(cells)})"
                )
            try:
                x, y = float(cells[0]), float(cells[1])
            except ValueError:
                raise InvalidInputError(f"{path}:{lineno}: malformed number") from None
            if not (math.isfinite(x) and math.isfinite(y)):
                raise InvalidInputError(f"{path}:{lineno}: non-finite coordinate")
            if ncols == 3:
                if cells[2] not in ("inlier", "outlier"):
                    raise InvalidInputError(
                        f"{path}:{lineno}: label must be 'inlier' or 'outlier', "
                        f"got {cells[2]!r}"
                    )
                labels.append(cells[2] == "inlier")
            rows.append((x, y))
    if not rows:
        raise InvalidInputError(f"{path}: no data lines")
    xy = np.asarray(rows, dtype=float)
    return xy, (np.asarray(labels, dtype=bool) if ncols == 3 else None)


def points_text(xy: np.ndarray, labels: np.ndarray | None = None) -> str:
    lines = []
    for i, (x, y) in enumerate(np.asarray(xy, dtype=float)):
        row = f"{_fmt(x)},{_fmt(y)}"
        if labels is not None:
            row += ",inlier" if labels[i] else ",outlier"
        lines.append(row)
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# scene configuration


def _section(raw: dict, name: str, required: bool) -> dict:
    sec = raw.get(name, _MISSING)
    if sec is _MISSING:
        if required:
            raise InvalidInputError(f"config: missing section {name!r}")
        return {}
    if not isinstance(sec, dict):
        raise InvalidInputError(f"config: section {name!r} must be an object")
    return sec


def _num(sec: dict, section: str, key: str, default=_MISSING) -> float:
    v = sec.get(key, _MISSING)
    if v is _MISSING:
        if default is _MISSING:
            raise InvalidInputError(f"config: missing field {section}.{key}")
        return default
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(float(v)):
        raise InvalidInputError(f"config: {section}.{key} must be a finite number")
    return float(v)


def _int_field(sec: dict, section: str, key: str, default=_MISSING, minimum: int = 0) -> int:
    v = sec.get(key, _MISSING)
    if v is _MISSING:
        if default is _MISSING:
            raise InvalidInputError(f"config: missing field {section}.{key}")
        return default
    if isinstance(v, bool) or not isinstance(v, int):
        raise InvalidInputError(f"config: {section}.{key} must be an integer")
    if v < minimum:
        raise InvalidInputError(f"config: {section}.{key} must be >= {minimum}")
    return v


class SceneConfig:
    """Validated contents of a scene configuration file."""

    def __init__(self, intr, scene, n_inliers, arc, sigma, n_outliers, bbox, seed):
        self.intr: Intrinsics = intr
        self.scene: SphereScene = scene
        self.n_inliers: int = n_inliers
        self.arc: tuple[float, float] = arc
        self.sigma: float = sigma
        self.n_outliers: int = n_outliers
        self.bbox = bbox  # image coordinates, or None for the default box
        self.seed: int = seed


def load_config(path: str | Path) -> SceneConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as err:
        # An unreadable config is a configuration error (exit 2); exit 3 is
        # reserved for failures writing outputs.
        raise InvalidInputError(f"config: {err}") from None
    except json.JSONDecodeError as err:
        raise InvalidInputError(
            f"config: invalid JSON at line {err.lineno}, column {err.colno}: {err.msg}"
        ) from None
    if not isinstance(raw, dict):
        raise InvalidInputError("config: top level must be a JSON object")

    intr_sec = _section(raw, "intrinsics", required=True)
    scene_sec = _section(raw, "scene", required=True)
    samp_sec = _section(raw, "sampling", required=True)
    out_sec = _section(raw, "outliers", required=False)

    try:
        intr = Intrinsics(
            fe=_num(intr_sec, "intrinsics", "f_e"),
            px=_num(intr_sec, "intrinsics", "px", 0.0),
            py=_num(intr_sec, "intrinsics", "py", 0.0),
            l=_num(intr_sec, "intrinsics", "l", 0.0),
        )
    except InvalidInputError as err:
        raise InvalidInputError(f"config: intrinsics: {err}") from None
    try:
        scene = SphereScene(
            u=_num(scene_sec, "scene", "u"),
            v=_num(scene_sec, "scene", "v"),
            theta=_num(scene_sec, "scene", "theta"),
        )
    except InvalidInputError as err:
        raise InvalidInputError(f"config: scene: {err}") from None

    n_inliers = _int_field(samp_sec, "sampling", "n_inliers", minimum=1)
    arc = (
        _num(samp_sec, "sampling", "arc_start", 0.0),
        _num(samp_sec, "sampling", "arc_end", 2.0 * math.pi),
    )
    sigma = _num(samp_sec, "sampling", "sigma", 0.0)
    if sigma < 0:
        raise InvalidInputError("config: sampling.sigma must be >= 0")

    n_outliers = _int_field(out_sec, "outliers", "count", default=0, minimum=0)
    bbox_raw = out_sec.get("bbox")
    bbox = None
    if bbox_raw is not None:
        if not (isinstance(bbox_raw, list) and len(bbox_raw) == 4):
            raise InvalidInputError("config: outliers.bbox must be [xmin, ymin, xmax, ymax]")
        try:
            bbox = tuple(float(v) for v in bbox_raw)
        except (TypeError, ValueError):
            raise InvalidInputError("config: outliers.bbox entries must be numbers") from None
        if not all(math.isfinite(v) for v in bbox):
            raise InvalidInputError("config: outliers.bbox entries must be finite")
        if not (bbox[2] > bbox[0] and bbox[3] > bbox[1]):
            raise InvalidInputError("config: outliers.bbox is degenerate")

    seed_val = raw.get("seed", 0)
    if isinstance(seed_val, bool) or not isinstance(seed_val, int):
        raise InvalidInputError("config: seed must be an integer")

    return SceneConfig(intr, scene, n_inliers, arc, sigma, n_outliers, bbox, seed_val)


def _synthesize(cfg: SceneConfig, seed: int) -> tuple[Conic, PointSet]:
    """Oracle conic plus one seeded draw of inliers and outliers (centered)."""
    conic = project_sphere(cfg.scene, cfg.intr)
    rng = np.random.default_rng(seed)
    ps = sample_conic_points(conic, cfg.n_inliers, cfg.arc, cfg.sigma, rng)
    if cfg.n_outliers > 0:
        if cfg.bbox is not None:
            box = (
                cfg.bbox[0] - cfg.intr.px,
                cfg.bbox[1] - cfg.intr.py,
                cfg.bbox[2] - cfg.intr.px,
                cfg.bbox[3] - cfg.intr.py,
            )
        else:
            box = ellipse_bbox(conic, inflate=2.0)
        ps = add_outliers(ps, cfg.n_outliers, box, rng)
    return conic, ps


# --------------------------------------------------------------------------
# report pieces


def _geometry_dict(c: Conic, px: float, py: float):
    if not is_ellipse(c):
        return None
    g = to_geometry(c)
    return {
        "cx": g.cx + px,
        "cy": g.cy + py,
        "major": g.major,
        "minor": g.minor,
        "angle": g.angle,
    }


def _residuals_dict(c: Conic, fe: float | None, px: float, py: float, l: float):
    from .sphere import s1_residual, s2_residual

    out = {"s1": s1_residual(c)}
    if fe is not None:
        out["s2"] = s2_residual(c, Intrinsics(fe=fe, px=px, py=py, l=l))
    else:
        out["s2"] = None
    return out


# --------------------------------------------------------------------------
# SVG emission


def _svg_ellipse(c: Conic, px: float, py: float, stroke: str, width: float) -> str:
    if not is_ellipse(c):
        # Placeholder so each conic still maps to exactly one element.
        return f'<path class="conic" d="" fill="none" stroke="{stroke}" stroke-width="{_fmt6(width)}"/>'
    g = to_geometry(c)
    cx, cy = g.cx + px, g.cy + py
    deg = math.degrees(g.angle)
    return (
        f'<ellipse class="conic" cx="{_fmt6(cx)}" cy="{_fmt6(cy)}" '
        f'rx="{_fmt6(g.major)}" ry="{_fmt6(g.minor)}" '
        f'transform="rotate({_fmt6(deg)} {_fmt6(cx)} {_fmt6(cy)})" '
        f'fill="none" stroke="{stroke}" stroke-width="{_fmt6(width)}"/>'
    )


def render_svg(
    xy_image: np.ndarray,
    labels: np.ndarray | None,
    ideal: Conic | None,
    fits: list[tuple[str, Conic]],
    px: float,
    py: float,
) -> str:
    """Scene plot: point cloud, ideal conic in green, fitted conics in blue."""
    xs, ys = xy_image[:, 0], xy_image[:, 1]
    xmin, xmax = float(xs.min()), float(xs.max())
    ymin, ymax = float(ys.min()), float(ys.max())
    for c in ([ideal] if ideal is not None else []) + [c for _, c in fits]:
        if is_ellipse(c):
            bx0, by0, bx1, by1 = ellipse_bbox(c)
            xmin, xmax = min(xmin, bx0 + px), max(xmax, bx1 + px)
            ymin, ymax = min(ymin, by0 + py), max(ymax, by1 + py)
    span = max(xmax - xmin, ymax - ymin, 1.0)
    margin = 0.05 * span
    xmin, ymin = xmin - margin, ymin - margin
    w, h = (xmax - xmin) + margin, (ymax - ymin) + margin
    stroke_w = 0.004 * span
    r = 0.006 * span

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_fmt6(xmin)} {_fmt6(ymin)} '
        f'{_fmt6(w)} {_fmt6(h)}">',
    ]
    for i, (x, y) in enumerate(xy_image):
        fill = "#222222" if labels is None or labels[i] else "#999999"
        parts.append(
            f'<circle cx="{_fmt6(x)}" cy="{_fmt6(y)}" r="{_fmt6(r)}" fill="{fill}"/>'
        )
    if ideal is not None:
        parts.append(_svg_ellipse(ideal, px, py, "green", stroke_w))
    for _name, c in fits:
        parts.append(_svg_ellipse(c, px, py, "blue", stroke_w))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# --------------------------------------------------------------------------
# subcommands


def _cmd_generate(args) -> int:
    cfg = load_config(args.config)
    conic, ps = _synthesize(cfg, cfg.seed)
    xy_image = ps.xy + np.array([cfg.intr.px, cfg.intr.py])
    _write_text(args.out, points_text(xy_image, ps.is_inlier))

    g = to_geometry(conic)
    truth = {
        "intrinsics": {"f_e": cfg.intr.fe, "px": cfg.intr.px, "py": cfg.intr.py, "l": cfg.intr.l},
        "scene": {"u": cfg.scene.u, "v": cfg.scene.v, "theta": cfg.scene.theta},
        "conic": list(conic.as_array()),
        "coefficient_frame": "principal-point-centered",
        "geometry": {
            "cx": g.cx + cfg.intr.px,
            "cy": g.cy + cfg.intr.py,
            "major": g.major,
            "minor": g.minor,
            "angle": g.angle,
        },
        "n_inliers": cfg.n_inliers,
        "n_outliers": cfg.n_outliers,
        "sigma": cfg.sigma,
        "seed": cfg.seed,
    }
    truth_path = Path(args.out).with_suffix(".truth.json")
    _write_text(truth_path, _report_text(truth, None))
    log.info("wrote %d points to %s (truth: %s)", len(ps), args.out, truth_path)
    return 0


def _cmd_fit(args) -> int:
    t0 = time.perf_counter()
    xy_image, _labels = read_points(args.points)
    px, py = args.px, args.py
    centered = xy_image - np.array([px, py])

    report = {
        "algorithm": args.algo,
        "n_points": int(xy_image.shape[0]),
        "seed": args.seed,
        "coefficient_frame": "principal-point-centered",
    }
    if args.algo == "ls-svd":
        conic = fit_ls_svd(centered)
    elif args.algo == "direct":
        conic = fit_direct_ellipse(centered)
    else:  # three-point-ransac
        if args.fe is None:
            raise InvalidInputError("--fe is required for --algo three-point-ransac")
        intr = Intrinsics(fe=args.fe, px=px, py=py, l=args.l)
        rcfg = RansacConfig(
            threshold=args.threshold,
            confidence=args.confidence,
            max_iters=args.max_iters,
            min_consensus=args.min_consensus,
            seed=args.seed,
        )
        res = run_ransac(centered, intr, rcfg)
        conic = res.conic
        report["ransac"] = {
            "threshold": rcfg.threshold,
            "inlier_count": res.consensus_size,
            "iterations": res.iterations,
            "refined": res.refined,
            "scene": (
                {"u": res.scene.u, "v": res.scene.v, "theta": res.scene.theta}
                if res.scene is not None
                else None
            ),
            "inlier_mask": [int(b) for b in res.inlier_mask],
        }

    report["coefficients"] = list(conic.as_array())
    report["is_ellipse"] = is_ellipse(conic)
    report["geometry"] = _geometry_dict(conic, px, py)
    report["residuals"] = _residuals_dict(conic, args.fe, px, py, args.l)
    if args.timestamps:
        report["generated_at"] = datetime.now(timezone.utc).isoformat()

    wall = (time.perf_counter() - t0) * 1e3
    text = _report_text(report, wall)
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


_CSV_HEADER = "trial,algorithm,up_to_scale_error,center_error_px,axis_error_rel,is_ellipse"


def _metric_row(fit: Conic | None, oracle: Conic, g_true) -> tuple[float, float, float, int]:
    if fit is None:
        return (math.nan, math.nan, math.nan, 0)
    uts = compare_up_to_scale(fit, oracle)
    if not is_ellipse(fit):
        return (uts, math.nan, math.nan, 0)
    g = to_geometry(fit)
    center = math.hypot(g.cx - g_true.cx, g.cy - g_true.cy)
    axis = max(
        abs(g.major - g_true.major) / g_true.major,
        abs(g.minor - g_true.minor) / g_true.minor,
    )
    return (uts, center, axis, 1)


def _cmd_compare(args) -> int:
    if args.trials < 1:
        raise InvalidInputError(f"--trials must be >= 1, got {args.trials}")
    cfg = load_config(args.config)
    base_seed = cfg.seed if args.seed is None else args.seed
    oracle = project_sphere(cfg.scene, cfg.intr)
    g_true = to_geometry(oracle)
    robust_name = "three-point-ransac" if cfg.n_outliers > 0 else "constrained"
    algos = ["ls-svd", "direct", robust_name]

    os.makedirs(args.out_dir, exist_ok=True)
    rows: list[tuple] = []
    svg_text = None
    for trial in range(args.trials):
        rng = np.random.default_rng(base_seed + trial)
        _, ps = _synthesize(cfg, base_seed + trial)
        algo_seed = int(rng.integers(_SEED_MAX))  # rng state past synthesis draws
        fits: dict[str, Conic | None] = {}
        for name in algos:
            try:
                if name == "ls-svd":
                    fits[name] = fit_ls_svd(ps.xy)
                elif name == "direct":
                    fits[name] = fit_direct_ellipse(ps.xy)
                elif name == "three-point-ransac":
                    rcfg = RansacConfig(
                        threshold=args.threshold,
                        confidence=args.confidence,
                        max_iters=args.max_iters,
                        min_consensus=args.min_consensus,
                        seed=algo_seed,
                    )
                    fits[name] = run_ransac(ps, cfg.intr, rcfg).conic
                else:
                    fits[name] = fit_constrained(ps.xy, cfg.intr, seed=algo_seed).conic
            except (
                InsufficientDataError,
                DegenerateSampleError,
                NoModelError,
                InvalidInitError,
                NotAnEllipseError,
            ) as err:
                log.warning("trial %d %s failed: %s", trial, name, err)
                fits[name] = None
            rows.append((trial, name) + _metric_row(fits[name], oracle, g_true))
        if trial == 0:
            xy_image = ps.xy + np.array([cfg.intr.px, cfg.intr.py])
            svg_text = render_svg(
                xy_image,
                ps.is_inlier,
                oracle,
                [(nm, c) for nm, c in fits.items() if c is not None],
                cfg.intr.px,
                cfg.intr.py,
            )

    lines = []
    if args.timestamps:
        lines.append("# generated_at " + datetime.now(timezone.utc).isoformat())
    lines.append(_CSV_HEADER)
    for trial, name, uts, center, axis, ell in rows:
        lines.append(
            f"{trial},{name},{_fmt(uts)},{_fmt(center)},{_fmt(axis)},{ell}"
        )
    def _finite_median(values) -> float:
        finite = [v for v in values if math.isfinite(v)]
        return float(np.median(finite)) if finite else math.nan

    summary = {}
    for name in algos:
        sub = [r for r in rows if r[1] == name]
        uts = _finite_median([r[2] for r in sub])
        center = _finite_median([r[3] for r in sub])
        axis = _finite_median([r[4] for r in sub])
        rate = float(np.mean([r[5] for r in sub])) if sub else math.nan
        summary[name] = (uts, center, axis, rate)
        lines.append(
            f"median,{name},{_fmt(uts)},{_fmt(center)},{_fmt(axis)},{_fmt(rate)}"
        )
    _write_text(Path(args.out_dir) / "results.csv", "\n".join(lines) + "\n")
    if svg_text is not None:
        _write_text(Path(args.out_dir) / "scene.svg", svg_text)

    for name in algos:
        uts, center, axis, rate = summary[name]
        sys.stdout.write(
            f"{name}: median_up_to_scale={_fmt6(uts)} median_center_px={_fmt6(center)} "
            f"median_axis_rel={_fmt6(axis)} ellipse_rate={_fmt6(rate)}\n"
        )
    return 0


# --------------------------------------------------------------------------
# argument parsing and entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ellipse",
        description="Fit ellipses that are pinhole-camera projections of spheres.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="synthesize a labeled point set from a scene config")
    p_gen.add_argument("--config", required=True, help="scene configuration JSON")
    p_gen.add_argument("--out", required=True, help="output points CSV (truth JSON written beside)")
    p_gen.set_defaults(func=_cmd_generate)

    p_fit = sub.add_parser("fit", help="fit one conic to a points file")
    p_fit.add_argument("--points", required=True, help="input points CSV")
    p_fit.add_argument(
        "--algo",
        required=True,
        choices=("ls-svd", "direct", "three-point-ransac"),
        help="fitting algorithm",
    )
    p_fit.add_argument("--fe", type=float, default=None, help="focal length in px")
    p_fit.add_argument("--px", type=float, default=0.0, help="principal point x (default 0)")
    p_fit.add_argument("--py", type=float, default=0.0, help="principal point y (default 0)")
    p_fit.add_argument("--l", type=float, default=0.0, help="projection model parameter (default 0)")
    p_fit.add_argument("--threshold", type=float, default=0.3, help="inlier threshold in px")
    p_fit.add_argument("--confidence", type=float, default=0.99, help="RANSAC confidence")
    p_fit.add_argument("--max-iters", type=int, default=1000, help="RANSAC iteration cap")
    p_fit.add_argument(
        "--min-consensus", type=int, default=None, help="early-exit consensus size (optional)"
    )
    p_fit.add_argument("--seed", type=int, default=0, help="random seed")
    p_fit.add_argument("--out", default=None, help="report path (stdout when omitted)")
    p_fit.add_argument("--timestamps", action="store_true", help="include a timestamp field")
    p_fit.set_defaults(func=_cmd_fit)

    p_cmp = sub.add_parser("compare", help="run all algorithms over seeded trials")
    p_cmp.add_argument("--config", required=True, help="scene configuration JSON")
    p_cmp.add_argument("--trials", type=int, required=True, help="number of trials")
    p_cmp.add_argument("--seed", type=int, default=None, help="base seed (default: config seed)")
    p_cmp.add_argument("--out-dir", required=True, help="output directory")
    p_cmp.add_argument("--threshold", type=float, default=0.3, help="inlier threshold in px")
    p_cmp.add_argument("--confidence", type=float, default=0.99, help="RANSAC confidence")
    p_cmp.add_argument("--max-iters", type=int, default=1000, help="RANSAC iteration cap")
    p_cmp.add_argument(
        "--min-consensus", type=int, default=None, help="early-exit consensus size (optional)"
    )
    p_cmp.add_argument("--timestamps", action="store_true", help="timestamp comment in the CSV")
    p_cmp.set_defaults(func=_cmd_compare)
    return parser


def _setup_logging() -> None:
    levels = {
        "error": logging.ERROR,
        "warn": logging.WARNING,
        "info": logging.INFO,
        "debug": logging.DEBUG,
    }
    raw = os.environ.get("ELLIPSE_LOG", "warn").strip().lower()
    level = levels.get(raw)
    logging.basicConfig(
        stream=sys.stderr,
        level=level if level is not None else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if level is None and raw:
        log.warning("unknown ELLIPSE_LOG value %r; using 'warn'", raw)


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)  # exits with code 2 on bad arguments
    try:
        return args.func(args)
    except (InvalidInputError, NotAnEllipseError) as err:
        log.error("%s", err)
        return 2
    except OSError as err:
        log.error("%s", err)
        return 3
    except (InsufficientDataError, DegenerateSampleError) as err:
        log.error("%s", err)
        return 4
    except (NoModelError, InvalidInitError) as err:
        log.error("%s", err)
        return 5


if __name__ == "__main__":
    sys.exit(main())
