"""Conic fitting algorithms.

Three fitters share the conic convention of :mod:`spherefit.conic`:

- ``fit_ls_svd``: plain algebraic least squares (minimum eigenvector of the
  design Gram matrix); may return any conic type.
- ``fit_direct_ellipse``: ellipse-specific least squares via the constrained
  generalized eigenproblem, solved with the numerically stable block
  partition; always returns an ellipse.
- ``fit_three_point``: minimal solver for sphere silhouettes.  Three point
  constraints leave a three-dimensional null space; writing the conic as the
  pencil P1 + alpha P2 + beta P3 and imposing the two silhouette constraints
  as determinant cubics in (alpha, beta) yields a polynomial system with up
  to nine solutions, solved by resultant elimination plus Newton polish.

All fitters expect principal-point-centered coordinates and perform no
coordinate normalization; the three-point solver's constraint polynomials
are only meaningful in the centered frame.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .conic import Conic, compare_up_to_scale, evaluate, is_ellipse, normalize
from .errors import (
    DegenerateSampleError,
    InsufficientDataError,
    InvalidInitError,
    InvalidInputError,
    NoModelError,
)
from .numeric import nullspace_3x6, min_eigvec_sym6, resultant_eliminate
from .sphere import (
    Intrinsics,
    PointSet,
    RefineResult,
    refine_constrained,
    s1_residual,
    s2_residual,
)

# Pencil orderings: which null-space vector takes the fixed unit coefficient.
_LEAD_ORDERS = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


def _as_points(points) -> np.ndarray:
    if isinstance(points, PointSet):
        points = points.xy
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvalidInputError(f"points must have shape (n, 2), got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise InvalidInputError("points contain non-finite coordinates")
    return pts


def design_matrix(points) -> np.ndarray:
    """Rows (x^2, 2xy, y^2, 2x, 2y, 1), so that row . coeffs = evaluate(c, p)."""
    pts = _as_points(points)
    x, y = pts[:, 0], pts[:, 1]
    return np.column_stack([x * x, 2 * x * y, y * y, 2 * x, 2 * y, np.ones_like(x)])


def fit_ls_svd(points) -> Conic:
    """Minimum-eigenvector least squares: minimizes ||A p|| over unit p.

    Needs at least 5 points spanning a rank-5 design; the result may be any
    conic type.
    """
    pts = _as_points(points)
    if pts.shape[0] < 5:
        raise InsufficientDataError(f"need at least 5 points, got {pts.shape[0]}")
    A = design_matrix(pts)
    G = A.T @ A
    w, _ = kernels.eigh_sym(0.5 * (G + G.T))
    if w[1] <= 1e-12 * float(np.trace(G)):
        raise InsufficientDataError("design matrix is rank deficient (points too degenerate)")
    v = min_eigvec_sym6(G)
    return normalize(Conic.from_array(v))


# Inverse of the quadratic-part constraint matrix [[0,0,2],[0,-1,0],[2,0,0]]
# used by the direct ellipse fit (raw-monomial convention).
_C1_INV = np.array([[0.0, 0.0, 0.5], [0.0, -1.0, 0.0], [0.5, 0.0, 0.0]])


def fit_direct_ellipse(points) -> Conic:
    """Ellipse-specific direct least squares.

    Solves the constrained problem min ||A p|| s.t. 4AC - B^2 = 1 in the raw
    monomial convention (A x^2 + B xy + C y^2 + D x + E y + F), using the
    block partition of the generalized eigenproblem that stays stable when
    the scatter matrix is near-singular, then converts to this package's
    factor-of-2 convention.  The discriminant constraint makes the result an
    ellipse regardless of the data.
    """
    pts = _as_points(points)
    if pts.shape[0] < 5:
        raise InsufficientDataError(f"need at least 5 points, got {pts.shape[0]}")
    x, y = pts[:, 0], pts[:, 1]
    D1 = np.column_stack([x * x, x * y, y * y])
    D2 = np.column_stack([x, y, np.ones_like(x)])
    S1 = D1.T @ D1
    S2 = D1.T @ D2
    S3 = D2.T @ D2
    try:
        T = -np.linalg.solve(S3, S2.T)
    except np.linalg.LinAlgError:
        raise DegenerateSampleError("points are collinear") from None
    M = _C1_INV @ (S1 + S2 @ T)
    eigval, eigvec = np.linalg.eig(M)
    V = np.real(eigvec)
    cond = 4.0 * V[0] * V[2] - V[1] ** 2
    best = None
    for k in range(3):
        if np.isfinite(cond[k]) and cond[k] > 0 and abs(np.imag(eigval[k])) < 1e-8 * (
            1.0 + abs(np.real(eigval[k]))
        ):
            best = k if best is None else best
    if best is None:
        raise DegenerateSampleError("no elliptic solution (degenerate point configuration)")
    a1 = V[:, best]
    a2 = T @ a1
    A_, B_, C_ = a1
    D_, E_, F_ = a2
    c = normalize(Conic(a=A_, b=B_ / 2, c=C_, d=D_ / 2, e=E_ / 2, f=F_))
    if not is_ellipse(c):
        raise DegenerateSampleError("direct fit produced a degenerate ellipse")
    return c


def _affine_entry(B: np.ndarray, k: int, scale: float = 1.0) -> np.ndarray:
    """Slots (const, alpha, beta) of coefficient k of P1 + alpha P2 + beta P3."""
    return np.array([scale * B[k, 0], scale * B[k, 1], scale * B[k, 2]])


def constraint_polys(basis: np.ndarray, intr: Intrinsics) -> tuple[np.ndarray, np.ndarray]:
    """The two silhouette constraints on the pencil, as cubic grids in (alpha, beta).

    ``basis`` holds three conic 6-vectors as columns; the pencil is
    P(alpha, beta) = P1 + alpha P2 + beta P3.  Each constraint is the
    determinant of a 3x3 matrix whose entries are affine in (alpha, beta):

        det [[a, b, d], [b, c, e], [e, -d, 0]]                 (axis constraint)
        det [[a, -e(l^2-1), d], [b, 0, e], [d, -b fe^2, f]]    (focal constraint)

    Returned grids g[i, j] hold the coefficient of alpha^i beta^j.
    """
    B = np.asarray(basis, dtype=float)
    if B.shape != (6, 3):
        raise InvalidInputError(f"basis must have shape (6, 3), got {B.shape}")
    ia, ib, ic, id_, ie, if_ = range(6)
    zero = np.zeros(3)

    T1 = np.empty((3, 3, 3))
    for (r, col), (k, s) in {
        (0, 0): (ia, 1.0), (0, 1): (ib, 1.0), (0, 2): (id_, 1.0),
        (1, 0): (ib, 1.0), (1, 1): (ic, 1.0), (1, 2): (ie, 1.0),
        (2, 0): (ie, 1.0), (2, 1): (id_, -1.0),
    }.items():
        T1[r, col] = _affine_entry(B, k, s)
    T1[2, 2] = zero

    lm = intr.l * intr.l - 1.0
    fe2 = intr.fe * intr.fe
    T2 = np.empty((3, 3, 3))
    for (r, col), (k, s) in {
        (0, 0): (ia, 1.0), (0, 1): (ie, -lm), (0, 2): (id_, 1.0),
        (1, 0): (ib, 1.0), (1, 2): (ie, 1.0),
        (2, 0): (id_, 1.0), (2, 1): (ib, -fe2), (2, 2): (if_, 1.0),
    }.items():
        T2[r, col] = _affine_entry(B, k, s)
    T2[1, 1] = zero

    return kernels.det3_affine(T1), kernels.det3_affine(T2)


def _trim_rel(c: np.ndarray, rel: float) -> np.ndarray:
    """Drop trailing coefficients below ``rel`` times the largest magnitude."""
    c = np.asarray(c, dtype=float)
    m = float(np.abs(c).max()) if c.size else 0.0
    if m == 0.0:
        return c[:1] if c.size else c
    keep = np.nonzero(np.abs(c) > rel * m)[0]
    return c[: keep[-1] + 1] if keep.size else c[:1]


def _slice_grid(g: np.ndarray, surv_axis: int, value: float) -> np.ndarray:
    """Univariate coefficients of g with the surviving variable fixed."""
    if surv_axis == 0:
        powers = value ** np.arange(g.shape[0])
        return powers @ g
    powers = value ** np.arange(g.shape[1])
    return g @ powers


def _quick_real_roots(c: np.ndarray) -> list[float]:
    """Closed-form real roots for degree <= 3 (ascending coefficients).

    Used only to seed the 2-D Newton polish, so boundary cases favor
    returning a nearby start over strict correctness (e.g. a marginally
    negative quadratic discriminant still yields the vertex).
    """
    if c.size == 2:
        return [-c[0] / c[1]]
    if c.size == 3:
        a, b, q = c[2], c[1], c[0]
        disc = b * b - 4.0 * a * q
        scale = b * b + abs(4.0 * a * q)
        if disc < 0.0:
            return [-b / (2.0 * a)] if disc >= -1e-12 * scale else []
        s = math.sqrt(disc)
        t1 = (-b - s) / (2.0 * a) if b >= 0.0 else (-b + s) / (2.0 * a)
        t2 = q / (a * t1) if abs(a * t1) > 1e-300 else -b / (2.0 * a)
        return [t1, t2]
    # Cubic: depress t = s - a2/(3 a3), then trig (three real) or Cardano.
    p0 = c[2] / c[3]
    q0 = c[1] / c[3]
    r0 = c[0] / c[3]
    pp = q0 - p0 * p0 / 3.0
    qq = 2.0 * p0**3 / 27.0 - p0 * q0 / 3.0 + r0
    off = -p0 / 3.0
    disc = -4.0 * pp**3 - 27.0 * qq * qq
    if disc >= 0.0 and pp < 0.0:
        m = 2.0 * math.sqrt(-pp / 3.0)
        arg = max(-1.0, min(1.0, 3.0 * qq / (pp * m)))
        phi = math.acos(arg) / 3.0
        return [m * math.cos(phi - 2.0 * math.pi * k / 3.0) + off for k in range(3)]
    if abs(pp) < 1e-300 and abs(qq) < 1e-300:
        return [off]
    rad = math.sqrt(max(qq * qq / 4.0 + pp**3 / 27.0, 0.0))
    w = -qq / 2.0 - math.copysign(rad, qq)
    u = math.copysign(abs(w) ** (1.0 / 3.0), w)
    s = u - pp / (3.0 * u) if abs(u) > 1e-300 else 0.0
    out = [s + off]
    if pp < 0.0:
        # Negative discriminant with two critical points: a barely-complex
        # near-double root hides next to one of them, so seed there too.
        crit = math.sqrt(-pp / 3.0)
        out.extend((crit + off, -crit + off))
    return out


def _elim_root_starts(elim: np.ndarray) -> list[float]:
    """Real parts of eliminant roots worth polishing.

    Companion estimates of near-multiple eliminant roots drift off the real
    axis (distinct system roots can collide when projected onto one
    coordinate), so acceptance here is far looser than the real-root filter;
    the 2-D Newton polish and its residual gate decide what is a root.
    """
    rts = np.asarray(kernels.poly_roots(elim))
    re = rts.real
    keep = np.abs(rts.imag) <= 1e-2 * (1.0 + np.abs(re))
    out: list[float] = []
    for v in np.sort(re[keep]):
        if not out or abs(v - out[-1]) > 1e-7 * (1.0 + abs(v)):
            out.append(float(v))
    return out


def _pencil_roots(g1: np.ndarray, g2: np.ndarray) -> list[tuple[float, float]]:
    """Isolated common real roots of two bivariate coefficient grids.

    Eliminates each variable in turn with a Sylvester resultant (running both
    orders recovers solutions lost to leading-coefficient degeneracies),
    back-substitutes along the less degenerate slice, and polishes every
    candidate with a damped 2-D Newton iteration on the pair.
    """
    m1 = float(np.abs(g1).max())
    m2 = float(np.abs(g2).max())
    if m1 == 0.0 or m2 == 0.0:
        return []  # a vanishing constraint leaves a solution continuum
    g1n, g2n = g1 / m1, g2 / m2

    pairs: list[tuple[float, float]] = []
    for eliminate, surv_axis in (("beta", 0), ("alpha", 1)):
        try:
            elim = resultant_eliminate(g1n, g2n, eliminate)
        except InvalidInputError:
            continue
        elim = _trim_rel(elim, 1e-12)
        if elim.size < 2:
            continue  # constant resultant: no isolated roots from this order
        for r in _elim_root_starts(elim):
            if abs(r) > 1e8:
                continue
            h1 = _trim_rel(_slice_grid(g1n, surv_axis, r), 1e-10)
            prim = h1 if h1.size >= 2 else _trim_rel(_slice_grid(g2n, surv_axis, r), 1e-10)
            if prim.size < 2:
                continue
            for t in _quick_real_roots(prim):
                if abs(t) <= 1e8:
                    pairs.append((r, t) if surv_axis == 0 else (t, r))
    if not pairs:
        return []

    P = np.asarray(pairs)
    close = np.abs(kernels.polyval2(g1n, P[:, 0], P[:, 1])) + np.abs(
        kernels.polyval2(g2n, P[:, 0], P[:, 1])
    )
    # Loose gate: near projection-critical roots the back-substituted pair
    # can carry O(1e-3..1e-1) residuals yet still polish in; only hopeless
    # pairings (wrong-branch slices, typically >> 1) are dropped here.
    starts = P[np.asarray(close) <= 1e-1]
    if starts.shape[0] == 0:
        return []

    polished, res = kernels.newton2(g1n, g2n, starts, 20, 1e-12)
    out: list[tuple[float, float]] = []
    for (a, b), r in zip(np.atleast_2d(polished), np.atleast_1d(res)):
        if not (np.isfinite(a) and np.isfinite(b) and r <= 1e-9):
            continue
        dup = any(
            abs(a - a0) <= 1e-7 * (1.0 + abs(a)) and abs(b - b0) <= 1e-7 * (1.0 + abs(b))
            for a0, b0 in out
        )
        if not dup:
            out.append((float(a), float(b)))
    return out


@dataclass(frozen=True)
class ThreePointCandidate:
    """One solution of the minimal problem with its pencil tag and residuals."""

    conic: Conic
    alpha: float
    beta: float
    lead: int
    s1: float
    s2: float


def fit_three_point(p1, p2, p3, intr: Intrinsics) -> list[ThreePointCandidate]:
    """All sphere-silhouette ellipses through three points (0 to 9 of them).

    Builds the 3x6 interpolation system, spans its null space, and solves the
    two cubic silhouette constraints on the pencil coefficients.  Because the
    pencil fixes one basis coefficient to 1 and thereby misses solutions with
    a vanishing lead component, the elimination is rerun with the basis roles
    cyclically permuted and the candidate sets merged up to scale.

    The system is solved in focal units (coordinates divided by ``fe``, unit
    focal length): the constraint varieties are exactly invariant under that
    substitution, while at pixel scale the two cubics develop a large
    common-factor imbalance that collapses their resultant into rounding
    noise.  This is a fixed units change driven by the known intrinsics, not
    a data-dependent normalization; results are reported in input units.

    Returns candidates sorted by combined constraint residual; an empty list
    means no real elliptic solution (not an error).
    """
    pts = _as_points(np.array([p1, p2, p3], dtype=float))
    area2 = abs(
        (pts[1, 0] - pts[0, 0]) * (pts[2, 1] - pts[0, 1])
        - (pts[1, 1] - pts[0, 1]) * (pts[2, 0] - pts[0, 0])
    )
    if area2 <= 2e-9:
        raise DegenerateSampleError("sample points are collinear or coincident")
    fe = intr.fe
    intr_focal = Intrinsics(fe=1.0, l=intr.l)
    to_input_units = np.array([fe**-2, fe**-2, fe**-2, fe**-1, fe**-1, 1.0])
    basis = nullspace_3x6(design_matrix(pts / fe))

    cands: list[ThreePointCandidate] = []
    for lead, order in enumerate(_LEAD_ORDERS):
        B = basis[:, order]
        g1, g2 = constraint_polys(B, intr_focal)
        for alpha, beta in _pencil_roots(g1, g2):
            vec = (B[:, 0] + alpha * B[:, 1] + beta * B[:, 2]) * to_input_units
            nv = float(np.linalg.norm(vec))
            if nv < 1e-12:
                continue
            try:
                c = normalize(Conic.from_array(vec))
            except InvalidInputError:
                continue
            if not is_ellipse(c):
                continue
            if float(np.max(np.abs(evaluate(c, pts)))) > 1e-8:
                continue
            s1 = s1_residual(c)
            s2 = s2_residual(c, intr)
            if abs(s1) > 1e-6 or abs(s2) > 1e-6:
                continue
            cands.append(ThreePointCandidate(c, float(alpha), float(beta), lead, s1, s2))

    # Merge duplicates found by different pencil leads / elimination orders,
    # keeping the representative with the smaller constraint residual.
    merged: list[ThreePointCandidate] = []
    for cand in sorted(cands, key=lambda t: (abs(t.s1) + abs(t.s2), t.alpha, t.beta)):
        if any(compare_up_to_scale(cand.conic, m.conic) <= 1e-7 for m in merged):
            continue
        merged.append(cand)
    return merged[:9]


def fit_constrained(
    points,
    intr: Intrinsics,
    seed: int | None = 0,
    n_seeds: int = 8,
) -> RefineResult:
    """Full constrained pipeline: minimal-solver seeding plus refinement.

    Draws ``n_seeds`` random point triples, pools every minimal-solver
    candidate, scores each by its summed squared Sampson distance over all
    points, and refines the best-scoring candidate.  Falls back to the direct
    ellipse fit for initialization when no triple yields a candidate.
    """
    pts = _as_points(points)
    n = pts.shape[0]
    if n < 3:
        raise InsufficientDataError(f"need at least 3 points, got {n}")
    rng = np.random.default_rng(seed)

    pool: list[ThreePointCandidate] = []
    for _ in range(n_seeds):
        for _attempt in range(20):
            idx = rng.choice(n, size=3, replace=False)
            try:
                pool.extend(fit_three_point(pts[idx[0]], pts[idx[1]], pts[idx[2]], intr))
                break
            except DegenerateSampleError:
                continue

    scored = []
    for cand in pool:
        d = kernels.sampson_many(cand.conic.as_array(), pts)
        scored.append((float(np.sum(np.minimum(d, 1e6) ** 2)), cand))
    scored.sort(key=lambda t: (t[0], t[1].lead, t[1].alpha, t[1].beta))

    inits = [cand.conic for _, cand in scored[:5]]
    if n >= 5:
        try:
            inits.append(fit_direct_ellipse(pts))
        except (InsufficientDataError, DegenerateSampleError):
            pass
    last_err: Exception | None = None
    for init in inits:
        try:
            return refine_constrained(pts, init, intr)
        except (InvalidInputError, InvalidInitError) as err:
            last_err = err
            continue
    raise NoModelError(f"no initialization produced a valid sphere silhouette ({last_err})")
