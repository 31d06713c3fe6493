"""Shared generators for the seeded property-test loops."""

from __future__ import annotations

import math

import numpy as np

from spherefit import Conic, EllipseGeom, from_geometry


def random_ellipse_geom(rng: np.random.Generator) -> EllipseGeom:
    """Random well-conditioned ellipse geometry (major/minor ratio <= ~20)."""
    major = rng.uniform(0.5, 50.0)
    minor = major * rng.uniform(0.05, 1.0)
    return EllipseGeom(
        cx=rng.uniform(-30.0, 30.0),
        cy=rng.uniform(-30.0, 30.0),
        major=major,
        minor=minor,
        angle=rng.uniform(0.0, math.pi),
    )


def random_ellipse_conic(rng: np.random.Generator) -> Conic:
    return from_geometry(random_ellipse_geom(rng))


def random_conic(rng: np.random.Generator) -> Conic:
    """Random conic of any type with O(1) coefficients, never the zero conic."""
    while True:
        v = rng.uniform(-1.0, 1.0, size=6)
        if np.linalg.norm(v) > 1e-3:
            return Conic.from_array(v)


def random_symmetric(rng: np.random.Generator, n: int) -> np.ndarray:
    m = rng.normal(size=(n, n))
    return (m + m.T) / 2.0


def poly_from_roots(roots) -> np.ndarray:
    """Ascending real coefficients of the monic polynomial with these roots."""
    coef = np.array([1.0])
    for r in roots:
        coef = np.convolve(coef, np.array([-r, 1.0]))
    return coef


def _dgrid(g: np.ndarray, axis: int) -> np.ndarray:
    if axis == 0:
        return (g[1:, :].T * np.arange(1, g.shape[0])).T
    return g[:, 1:] * np.arange(1, g.shape[1])


def normalize_grids(g1: np.ndarray, g2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return g1 / np.abs(g1).max(), g2 / np.abs(g2).max()


def root_certificate(g1n: np.ndarray, g2n: np.ndarray, a: float, b: float, r: float) -> bool:
    """Newton-Kantorovich check that (a, b) sits next to an isolated real root.

    ``r`` is |g1n| + |g2n| at the point.  Certifies that a genuine common
    real root exists within ~2 r/sigma of the point and Newton contraction
    holds, which bounds the location error well below the 1e-5 matching
    tolerance.  Tangency grazes (complex pairs skimming the real plane) fail
    this and are excluded from both sides of the comparison: no real
    arithmetic can decide or locate them at that tolerance.
    """
    from spherefit import kernels

    J = np.array(
        [
            [float(kernels.polyval2(_dgrid(g, 0), a, b)), float(kernels.polyval2(_dgrid(g, 1), a, b))]
            for g in (g1n, g2n)
        ]
    )
    sigma = float(np.linalg.svd(J, compute_uv=False)[-1])
    if sigma <= 0.0:
        return False
    beta0 = r / sigma
    if beta0 > 1e-6 * (1.0 + math.hypot(a, b)):
        return False
    hess = 0.0
    for g in (g1n, g2n):
        rows = [
            float(kernels.polyval2(_dgrid(_dgrid(g, i), j), a, b))
            for i in (0, 1)
            for j in (0, 1)
        ]
        hess = max(hess, float(np.linalg.norm(rows)))
    return 4.0 * hess * beta0 / sigma <= 0.5


def grid_common_roots(g1: np.ndarray, g2: np.ndarray, box: float = 50.0, n: int = 61):
    """Brute-force common real roots of two bivariate grids inside a box.

    Independent oracle for the resultant-based elimination: dense grid of
    Newton starts over [-box, box]^2, polish on the pair, keep converged,
    deduplicate.  Returns a list of (alpha, beta, residual) tuples on the
    normalized grids; apply root_certificate to drop tangency grazes.
    """
    from spherefit import kernels

    g1n, g2n = normalize_grids(g1, g2)
    blocks = []
    # Multiresolution: roots of the normalized pencil cubics cluster near the
    # origin where Newton basins interleave at ~0.5 spacing, so refine there.
    for half, m in ((box, n), (5.0, 101), (1.25, 101)):
        ax = np.linspace(-half, half, m)
        A, B = np.meshgrid(ax, ax, indexing="ij")
        blocks.append(np.column_stack([A.ravel(), B.ravel()]))
    starts = np.vstack(blocks)
    polished, res = kernels.newton2(g1n, g2n, starts, 60, 1e-12)
    order = np.argsort(res)
    roots: list[tuple[float, float, float]] = []
    for i in order:
        a, b = polished[i]
        if not (np.isfinite(a) and np.isfinite(b)) or res[i] > 1e-9:
            continue
        dup = any(
            abs(a - a0) <= 1e-6 * (1.0 + abs(a)) and abs(b - b0) <= 1e-6 * (1.0 + abs(b))
            for a0, b0, _ in roots
        )
        if not dup:
            roots.append((float(a), float(b), float(res[i])))
    return roots


def unmatched_pairs(expected, found, tol: float = 1e-5):
    """Entries of ``expected`` with no counterpart in ``found`` within tol."""
    missing = []
    for ea, eb in expected:
        hit = any(
            abs(ea - fa) <= tol * (1.0 + abs(ea)) and abs(eb - fb) <= tol * (1.0 + abs(eb))
            for fa, fb in found
        )
        if not hit:
            missing.append((ea, eb))
    return missing
