"""Sphere silhouettes under a pinhole camera.

A sphere seen from the camera center subtends a cone of half-angle theta
around the unit viewing direction n; the silhouette is the image of that
tangent cone.  Rays x on the cone satisfy (x . n)^2 = cos^2(theta) (x . x),
so the image conic matrix is

    Q  ~  K^-T (n n^T - cos^2(theta) I) K^-1,   K = diag(f_e, f_e, 1)

in principal-point-centered pixel coordinates.  Such conics satisfy two
polynomial constraints on their coefficients:

    S1 = d(bd - ae) - e(be - cd)                      (major axis hits origin)
    S2 = b(ae - bd) f_e^2 - e(de - bf)(l^2 - 1)       (l = 0 for a pinhole)

This module provides those residuals, the analytic projection, its inverse
(conic -> scene), synthetic sampling utilities, and a constrained
re-estimator over the three scene parameters (u, v, theta).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conic import Conic, evaluate, is_ellipse, normalize, to_geometry, to_matrix
from .errors import (
    InsufficientDataError,
    InvalidInitError,
    InvalidInputError,
    NotAnEllipseError,
)
from .kernels import sampson_many


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsics: focal length in px, principal point, model parameter l."""

    fe: float
    px: float = 0.0
    py: float = 0.0
    l: float = 0.0

    def __post_init__(self):
        for name in ("fe", "px", "py", "l"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(float(v))):
                raise InvalidInputError(f"intrinsics field {name} must be a finite number")
            object.__setattr__(self, name, float(v))
        if self.fe <= 0.0:
            raise InvalidInputError(f"focal length must be positive, got {self.fe}")
        if not 0.0 <= self.l <= 1.0:
            raise InvalidInputError(f"model parameter l must lie in [0, 1], got {self.l}")


@dataclass(frozen=True)
class SphereScene:
    """Sphere direction n ~ (u, v, 1) and angular radius theta in (0, pi/2)."""

    u: float
    v: float
    theta: float

    def __post_init__(self):
        for name in ("u", "v", "theta"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(float(val))):
                raise InvalidInputError(f"scene field {name} must be a finite number")
            object.__setattr__(self, name, float(val))
        if not 0.0 < self.theta < math.pi / 2:
            raise InvalidInputError(f"theta must lie in (0, pi/2), got {self.theta}")

    def direction(self) -> np.ndarray:
        """Unit viewing direction."""
        n = np.array([self.u, self.v, 1.0])
        return n / np.linalg.norm(n)

    def axis_angle(self) -> float:
        """Angle between the viewing direction and the optical axis."""
        return math.atan(math.hypot(self.u, self.v))


@dataclass(frozen=True)
class PointSet:
    """2D observations in centered coordinates with optional inlier labels."""

    xy: np.ndarray
    is_inlier: np.ndarray | None = None
    sigma: float | None = None

    def __post_init__(self):
        xy = np.asarray(self.xy, dtype=float)
        if xy.ndim != 2 or xy.shape[1] != 2:
            raise InvalidInputError(f"points must have shape (n, 2), got {xy.shape}")
        if not np.all(np.isfinite(xy)):
            raise InvalidInputError("points contain non-finite coordinates")
        object.__setattr__(self, "xy", xy)
        if self.is_inlier is not None:
            lab = np.asarray(self.is_inlier, dtype=bool)
            if lab.shape != (xy.shape[0],):
                raise InvalidInputError("labels must cover every point")
            object.__setattr__(self, "is_inlier", lab)

    def __len__(self) -> int:
        return self.xy.shape[0]


@dataclass(frozen=True)
class RefineResult:
    """Output of refine_constrained: model, scene, and convergence diagnostics."""

    conic: Conic
    scene: SphereScene
    converged: bool
    objective: float
    iterations: int


def s1_residual(c: Conic) -> float:
    """d(bd - ae) - e(be - cd) on the normalized coefficients."""
    n = normalize(c)
    return float(n.d * (n.b * n.d - n.a * n.e) - n.e * (n.b * n.e - n.c * n.d))


def s2_residual(c: Conic, intr: Intrinsics) -> float:
    """b(ae - bd) fe^2 - e(de - bf)(l^2 - 1) on the normalized coefficients."""
    n = normalize(c)
    fe2 = intr.fe * intr.fe
    lm = intr.l * intr.l - 1.0
    return float(n.b * (n.a * n.e - n.b * n.d) * fe2 - n.e * (n.d * n.e - n.b * n.f) * lm)


def project_sphere(scene: SphereScene, intr: Intrinsics) -> Conic:
    """Normalized silhouette conic of the sphere, in centered coordinates.

    Raises NotAnEllipseError when the cone reaches the plane z = 0
    (axis angle + theta >= pi/2), in which case the silhouette is not an
    ellipse.
    """
    if scene.axis_angle() + scene.theta >= math.pi / 2:
        raise NotAnEllipseError(
            "sphere extends behind the camera plane; silhouette is not an ellipse"
        )
    n1, n2, n3 = scene.direction()
    c2 = math.cos(scene.theta) ** 2
    fe = intr.fe
    raw = Conic(
        a=(n1 * n1 - c2) / (fe * fe),
        b=(n1 * n2) / (fe * fe),
        c=(n2 * n2 - c2) / (fe * fe),
        d=(n1 * n3) / fe,
        e=(n2 * n3) / fe,
        f=n3 * n3 - c2,
    )
    return normalize(raw)


def _scene_from_conic(c: Conic, intr: Intrinsics) -> tuple[SphereScene, bool]:
    """Invert a conic to (scene, theta_was_clamped).

    The matrix M = K^T P K is proportional (with unknown sign) to
    n n^T - cos^2(theta) I, whose spectrum is {sin^2 t, -cos^2 t, -cos^2 t}
    with the isolated-sign eigenvalue belonging to eigenvector n.
    """
    P = to_matrix(c)
    K = np.diag([intr.fe, intr.fe, 1.0])
    M = K.T @ P @ K
    M = M / max(float(np.abs(M).max()), 1e-300)
    w, V = np.linalg.eigh(0.5 * (M + M.T))

    signs = np.sign(w)
    if signs[0] == 0.0 or signs[2] == 0.0 or signs[0] == signs[2]:
        raise InvalidInitError("conic spectrum is not that of a sphere silhouette")
    # Ascending eigenvalues: the isolated sign sits at one end; the middle
    # eigenvalue shares its sign with one end.
    iso = 0 if signs[1] == signs[2] else 2
    pair = (1, 2) if iso == 0 else (0, 1)
    n = V[:, iso]
    if abs(n[2]) < 1e-12:
        raise InvalidInitError("recovered sphere direction is perpendicular to the optical axis")
    if n[2] < 0:
        n = -n
    lam_iso = w[iso]
    lam_pair = 0.5 * (w[pair[0]] + w[pair[1]])
    ratio = -lam_iso / lam_pair  # = tan^2(theta) when the spectrum is consistent
    if not (math.isfinite(ratio) and ratio > 0.0):
        raise InvalidInitError("conic spectrum is not that of a sphere silhouette")
    theta = math.atan(math.sqrt(ratio))

    u, v = n[0] / n[2], n[1] / n[2]
    axis = math.atan(math.hypot(u, v))
    clamped = False
    if axis + theta >= math.pi / 2:
        theta = math.pi / 2 - axis - 1e-9
        clamped = True
        if theta <= 0.0:
            raise InvalidInitError("sphere direction too oblique for a front-facing scene")
    theta = min(max(theta, 1e-12), math.pi / 2 - 1e-12)
    return SphereScene(u=u, v=v, theta=theta), clamped


def scene_from_conic(c: Conic, intr: Intrinsics) -> SphereScene:
    """Recover the sphere scene whose projection is proportional to ``c``.

    Raises InvalidInitError when the conic is not the silhouette of any
    front-facing sphere (wrong eigenvalue signature, or axis direction
    perpendicular to the optical axis).
    """
    scene, _ = _scene_from_conic(c, intr)
    return scene


def sample_conic_points(
    c: Conic,
    n: int,
    arc: tuple[float, float] = (0.0, 2.0 * math.pi),
    sigma: float = 0.0,
    rng: np.random.Generator | None = None,
) -> PointSet:
    """n noisy points at uniformly spaced parameter angles along the ellipse arc.

    Parameter angles are t_k = start + k (end - start) / n for k = 0..n-1
    (the endpoint is excluded, so a full arc wraps seamlessly).  Isotropic
    Gaussian noise of std ``sigma`` is added per coordinate.  All points are
    labeled inlier.
    """
    if not is_ellipse(c):
        raise NotAnEllipseError("can only sample points along an ellipse")
    if n < 1:
        raise InvalidInputError(f"need at least one sample point, got n={n}")
    if not (math.isfinite(sigma) and sigma >= 0.0):
        raise InvalidInputError(f"noise sigma must be finite and >= 0, got {sigma}")
    start, end = float(arc[0]), float(arc[1])
    if not (math.isfinite(start) and math.isfinite(end)):
        raise InvalidInputError("arc endpoints must be finite")
    if rng is None:
        rng = np.random.default_rng()

    g = to_geometry(c)
    t = start + (end - start) * np.arange(n) / n
    ca, sa = math.cos(g.angle), math.sin(g.angle)
    x = g.cx + g.major * np.cos(t) * ca - g.minor * np.sin(t) * sa
    y = g.cy + g.major * np.cos(t) * sa + g.minor * np.sin(t) * ca
    pts = np.column_stack([x, y]) + rng.normal(0.0, sigma, size=(n, 2))
    return PointSet(xy=pts, is_inlier=np.ones(n, dtype=bool), sigma=sigma)


def ellipse_bbox(c: Conic, inflate: float = 1.0) -> tuple[float, float, float, float]:
    """Axis-aligned bounding box (xmin, ymin, xmax, ymax) of an ellipse.

    ``inflate`` scales the half-widths about the center (2.0 doubles the box).
    """
    g = to_geometry(c)
    ca, sa = math.cos(g.angle), math.sin(g.angle)
    wx = math.hypot(g.major * ca, g.minor * sa) * inflate
    wy = math.hypot(g.major * sa, g.minor * ca) * inflate
    return (g.cx - wx, g.cy - wy, g.cx + wx, g.cy + wy)


def add_outliers(
    ps: PointSet,
    count: int,
    bbox: tuple[float, float, float, float],
    rng: np.random.Generator,
) -> PointSet:
    """Append ``count`` uniform points in ``bbox`` labeled outlier."""
    if count < 0:
        raise InvalidInputError(f"outlier count must be >= 0, got {count}")
    xmin, ymin, xmax, ymax = (float(v) for v in bbox)
    if not (xmax > xmin and ymax > ymin):
        raise InvalidInputError(f"bounding box {bbox} is degenerate")
    if count == 0:
        return ps
    extra = rng.uniform(low=[xmin, ymin], high=[xmax, ymax], size=(count, 2))
    labels = ps.is_inlier
    if labels is None:
        labels = np.ones(len(ps), dtype=bool)
    return PointSet(
        xy=np.vstack([ps.xy, extra]),
        is_inlier=np.concatenate([labels, np.zeros(count, dtype=bool)]),
        sigma=ps.sigma,
    )


def random_scene(rng: np.random.Generator, max_dir: float = 0.4) -> SphereScene:
    """Random valid scene: the silhouette is always an ellipse with margin."""
    u = rng.uniform(-max_dir, max_dir)
    v = rng.uniform(-max_dir, max_dir)
    axis = math.atan(math.hypot(u, v))
    hi = min(1.0, math.pi / 2 - axis - 0.1)
    theta = rng.uniform(0.03, hi)
    return SphereScene(u=u, v=v, theta=theta)


def _objective(pts: np.ndarray, scene: SphereScene, intr: Intrinsics) -> float:
    coef = project_sphere(scene, intr).as_array()
    d = sampson_many(coef, pts)
    return float(np.sum(np.minimum(d, 1e9) ** 2))


def _try_objective(pts: np.ndarray, u: float, v: float, theta: float, intr: Intrinsics) -> float:
    axis = math.atan(math.hypot(u, v))
    if not (0.0 < theta and axis + theta < math.pi / 2 - 1e-12):
        return math.inf
    try:
        return _objective(pts, SphereScene(u=u, v=v, theta=theta), intr)
    except (InvalidInputError, NotAnEllipseError):
        return math.inf


def refine_constrained(
    points: PointSet | np.ndarray,
    init: Conic,
    intr: Intrinsics,
    max_iters: int = 100,
) -> RefineResult:
    """Minimize the summed squared Sampson distance over (u, v, theta).

    The initialization inverts ``init`` to a scene via scene_from_conic; a
    Levenberg-style damped least-squares descent with central-difference
    gradients then updates the three parameters.  Every accepted step
    decreases the objective, so the result never scores worse than the
    initialization's own projection.  The returned conic is an exact sphere
    silhouette, hence satisfies both coefficient constraints by construction.
    """
    pts = points.xy if isinstance(points, PointSet) else np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvalidInputError(f"points must have shape (n, 2), got {pts.shape}")
    if pts.shape[0] < 3:
        raise InsufficientDataError(f"need at least 3 points, got {pts.shape[0]}")

    scene, clamped = _scene_from_conic(init, intr)
    p = np.array([scene.u, scene.v, scene.theta])
    if clamped:
        # The inverted theta was out of range; scan a coarse grid for a
        # better starting angular radius.
        axis = math.atan(math.hypot(p[0], p[1]))
        hi = math.pi / 2 - axis - 1e-6
        if hi <= 1e-6:
            raise InvalidInitError("no valid angular radius for the recovered direction")
        grid = np.linspace(1e-3, hi, 24)
        objs = [_try_objective(pts, p[0], p[1], t, intr) for t in grid]
        p[2] = grid[int(np.argmin(objs))]

    obj = _try_objective(pts, *p, intr)
    if not math.isfinite(obj):
        raise InvalidInitError("initialization does not project to a valid ellipse")

    n = pts.shape[0]
    # Fixed-point gate: exact data still leaves roundoff-level Sampson
    # distances that grow with the coordinate scale, so "already zero" must
    # be judged relative to that scale rather than absolutely.
    tol = 1e-12 * (1.0 + float(np.abs(pts).max()))
    if obj <= n * tol * tol:
        scene = SphereScene(u=p[0], v=p[1], theta=p[2])
        return RefineResult(project_sphere(scene, intr), scene, True, obj, 0)

    def residuals(q: np.ndarray) -> np.ndarray | None:
        # Signed Sampson residuals f/|grad f|: same squared objective as the
        # distances, but smooth across the curve (the unsigned |f| kink would
        # corrupt the finite-difference Jacobian once points straddle f = 0).
        axis = math.atan(math.hypot(q[0], q[1]))
        if not (0.0 < q[2] and axis + q[2] < math.pi / 2 - 1e-12):
            return None
        c = project_sphere(SphereScene(u=q[0], v=q[1], theta=q[2]), intr)
        r = np.minimum(sampson_many(c.as_array(), pts), 1e9)
        return np.where(evaluate(c, pts) >= 0.0, r, -r)

    lam = 1e-3
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        # Central-difference Jacobian of the residual vector.  Step sizes
        # shrink near the validity boundary axis + theta = pi/2 so that every
        # stencil point still projects to an ellipse (|d axis/du| <= 1).
        axis = math.atan(math.hypot(p[0], p[1]))
        gap = math.pi / 2 - 1e-12 - axis - p[2]
        h = 1e-6 * (1.0 + np.abs(p))
        h[:2] = np.minimum(h[:2], 0.2 * gap)
        h[2] = min(h[2], 0.2 * gap, 0.5 * p[2])
        J = np.zeros((n, 3))
        for k in range(3):
            lo, hi_ = p.copy(), p.copy()
            lo[k] -= h[k]
            hi_[k] += h[k]
            r_lo, r_hi = residuals(lo), residuals(hi_)
            if r_lo is None or r_hi is None:
                continue  # leave a zero column rather than perturb the state
            J[:, k] = (r_hi - r_lo) / (2.0 * h[k])
        r0 = residuals(p)
        g = J.T @ r0
        H = J.T @ J
        if float(np.linalg.norm(g)) <= 1e-14 * (1.0 + obj):
            converged = True
            break
        accepted = False
        for _ in range(25):
            try:
                step = np.linalg.solve(H + lam * np.diag(np.maximum(np.diag(H), 1e-12)), -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = p + step
            trial_obj = _try_objective(pts, *trial, intr)
            if trial_obj < obj:
                rel_drop = (obj - trial_obj) / max(obj, 1e-300)
                p, obj = trial, trial_obj
                lam = max(lam / 3.0, 1e-12)
                accepted = True
                if rel_drop < 1e-12 or float(np.linalg.norm(step)) <= 1e-14 * (
                    1.0 + float(np.linalg.norm(p))
                ):
                    converged = True
                break
            lam *= 10.0
        if not accepted:
            converged = True  # no descent direction improves: local optimum
            break
        if converged:
            break

    scene = SphereScene(u=p[0], v=p[1], theta=p[2])
    return RefineResult(project_sphere(scene, intr), scene, converged, obj, it)
