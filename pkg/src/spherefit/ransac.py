"""RANSAC driver specialized to the three-point sphere-silhouette solver.

Each iteration samples three distinct points, enumerates every minimal-solver
candidate (up to nine), and scores each by counting points whose Sampson
distance falls within the threshold.  The consensus set of maximal size wins;
the loop stops at an optional minimum consensus size, at the adaptive
confidence bound, or at the hard iteration cap, whichever comes first.  The
winner is then re-estimated on its inliers with the constrained refinement
and the final mask is recomputed against the refined model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .conic import Conic
from .errors import (
    DegenerateSampleError,
    InsufficientDataError,
    InvalidInitError,
    InvalidInputError,
    NoModelError,
    NotAnEllipseError,
)
from .fitters import fit_ls_svd, fit_three_point
from .kernels import sampson_many
from .sphere import Intrinsics, PointSet, SphereScene, refine_constrained

_RESAMPLE_RETRIES = 100


def required_iterations(w: float, p: float, s: int) -> int:
    """Iterations needed to draw one all-inlier sample with confidence p.

    ceil(ln(1 - p) / ln(1 - w**s)) for inlier ratio w and sample size s;
    1 when w == 1.
    """
    if not (isinstance(w, (int, float)) and 0.0 < w <= 1.0):
        raise InvalidInputError(f"inlier ratio must lie in (0, 1], got {w}")
    if not (isinstance(p, (int, float)) and 0.0 < p < 1.0):
        raise InvalidInputError(f"confidence must lie in (0, 1), got {p}")
    if not (isinstance(s, (int, np.integer)) and s >= 1):
        raise InvalidInputError(f"sample size must be an integer >= 1, got {s}")
    ws = float(w) ** int(s)
    if ws >= 1.0:
        return 1
    return max(1, math.ceil(math.log(1.0 - float(p)) / math.log(1.0 - ws)))


@dataclass(frozen=True)
class RansacConfig:
    """Loop parameters: threshold in px, confidence, caps, optional seed."""

    threshold: float
    confidence: float = 0.99
    max_iters: int = 1000
    min_consensus: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if not (isinstance(self.threshold, (int, float)) and self.threshold > 0):
            raise InvalidInputError(f"threshold must be positive, got {self.threshold}")
        if not 0.0 < self.confidence < 1.0:
            raise InvalidInputError(f"confidence must lie in (0, 1), got {self.confidence}")
        if self.max_iters < 1:
            raise InvalidInputError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.min_consensus is not None and self.min_consensus < 3:
            raise InvalidInputError(
                f"min_consensus must be >= 3 when set, got {self.min_consensus}"
            )


@dataclass(frozen=True)
class RansacResult:
    """Winning model before and after the constrained re-estimation.

    ``raw_conic``/``raw_inlier_mask`` describe the best minimal-sample
    candidate (every raw-masked point is within the threshold of it);
    ``conic``/``inlier_mask``/``distances`` describe the refined model with
    the mask recomputed against it.  ``scene`` is the refined sphere scene
    (None when refinement could not run).  ``consensus_history`` records the
    best consensus size after each iteration.
    """

    conic: Conic
    scene: SphereScene | None
    inlier_mask: np.ndarray
    distances: np.ndarray
    iterations: int
    sample_indices: np.ndarray
    consensus_size: int
    raw_conic: Conic
    raw_inlier_mask: np.ndarray
    refined: bool
    consensus_history: list[int] = field(default_factory=list)


def run_ransac(
    points, intr: Intrinsics, cfg: RansacConfig, refine: str = "constrained"
) -> RansacResult:
    """Robustly fit a sphere-silhouette ellipse to contaminated points.

    ``refine`` selects the step-6 re-estimation on the winning inliers:
    ``"constrained"`` (default) runs the three-parameter sphere refinement,
    ``"ls-svd"`` runs the unconstrained least-squares fit instead (the result
    then carries no scene).  Deterministic given ``cfg.seed``.  Raises
    InsufficientDataError for fewer than 3 points and NoModelError when no
    sample ever produced a valid ellipse candidate.
    """
    if refine not in ("constrained", "ls-svd"):
        raise InvalidInputError(
            f"refine must be 'constrained' or 'ls-svd', got {refine!r}"
        )
    pts = points.xy if isinstance(points, PointSet) else np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvalidInputError(f"points must have shape (n, 2), got {pts.shape}")
    n = pts.shape[0]
    if n < 3:
        raise InsufficientDataError(f"need at least 3 points, got {n}")

    rng = np.random.default_rng(cfg.seed)
    t = float(cfg.threshold)

    best_key = (0, 0.0)  # (consensus size, -sum of inlier distances)
    best_conic: Conic | None = None
    best_mask: np.ndarray | None = None
    best_sample: np.ndarray | None = None
    history: list[int] = []

    bound = cfg.max_iters
    it = 0
    while it < bound:
        it += 1
        sample = None
        candidates = None
        for _retry in range(_RESAMPLE_RETRIES):
            idx = rng.choice(n, size=3, replace=False)
            try:
                candidates = fit_three_point(pts[idx[0]], pts[idx[1]], pts[idx[2]], intr)
                sample = idx
                break
            except DegenerateSampleError:
                continue  # resample without spending the iteration budget
        if sample is None:
            history.append(best_key[0])
            continue  # retries exhausted: the iteration counts as failed

        for cand in candidates:
            d = sampson_many(cand.conic.as_array(), pts)
            mask = d <= t
            count = int(np.count_nonzero(mask))
            if count == 0:
                continue
            key = (count, -float(np.sum(d[mask])))
            if key > best_key:
                best_key = key
                best_conic = cand.conic
                best_mask = mask
                best_sample = sample.copy()
        history.append(best_key[0])

        if (
            cfg.min_consensus is not None
            and best_key[0] >= cfg.min_consensus
        ):
            break
        if best_key[0] > 0:
            bound = min(cfg.max_iters, required_iterations(best_key[0] / n, cfg.confidence, 3))

    if best_conic is None:
        raise NoModelError(f"no valid ellipse candidate in {it} iterations")

    refined_conic = best_conic
    scene = None
    refined = False
    try:
        if refine == "constrained":
            res = refine_constrained(pts[best_mask], best_conic, intr)
            refined_conic = res.conic
            scene = res.scene
        else:
            refined_conic = fit_ls_svd(pts[best_mask])
        refined = True
    except (InvalidInputError, InvalidInitError, InsufficientDataError, NotAnEllipseError):
        pass  # keep the raw candidate; the result records refined=False

    distances = sampson_many(refined_conic.as_array(), pts)
    final_mask = distances <= t
    return RansacResult(
        conic=refined_conic,
        scene=scene,
        inlier_mask=final_mask,
        distances=distances,
        iterations=it,
        sample_indices=best_sample,
        consensus_size=int(np.count_nonzero(final_mask)),
        raw_conic=best_conic,
        raw_inlier_mask=best_mask,
        refined=refined,
        consensus_history=history,
    )
