"""Conic sections in implicit algebraic form.

A conic is the zero set of

    f(x, y) = a*x^2 + 2*b*x*y + c*y^2 + 2*d*x + 2*e*y + f

stored as the coefficient tuple (a, b, c, d, e, f).  The factors of two make
the matrix form symmetric without halving anything:

    f(x, y) = [x y 1] @ [[a, b, d], [b, c, e], [d, e, f]] @ [x, y, 1]^T

Coefficients are homogeneous: scaling all six by a nonzero factor (of either
sign) leaves the zero set unchanged.  The ellipse test is the positivity of
the quadratic-part discriminant a*c - b^2 together with real nondegeneracy:
the conic value at the center must have the opposite sign of the definite
2x2 block, otherwise the zero set is empty or a single point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NotAnEllipseError

__all__ = [
    "Conic",
    "EllipseGeom",
    "to_matrix",
    "from_matrix",
    "evaluate",
    "is_ellipse",
    "to_geometry",
    "from_geometry",
    "normalize",
    "compare_up_to_scale",
    "sampson_distance",
]


@dataclass(frozen=True)
class Conic:
    """Implicit conic coefficients (a, b, c, d, e, f), all finite."""

    a: float
    b: float
    c: float
    d: float
    e: float
    f: float

    def __post_init__(self) -> None:
        for name in ("a", "b", "c", "d", "e", "f"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise InvalidInputError(f"conic coefficient {name} is not finite")
            object.__setattr__(self, name, val)

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d, self.e, self.f])

    @classmethod
    def from_array(cls, v) -> "Conic":
        v = np.asarray(v, dtype=float).ravel()
        if v.shape != (6,):
            raise InvalidInputError("conic coefficient vector must have 6 entries")
        return cls(*v)


@dataclass(frozen=True)
class EllipseGeom:
    """Center, semi-axes (major >= minor > 0) and major-axis angle in [0, pi)."""

    cx: float
    cy: float
    major: float
    minor: float
    angle: float

    def __post_init__(self) -> None:
        vals = [float(getattr(self, n)) for n in ("cx", "cy", "major", "minor", "angle")]
        if not all(math.isfinite(v) for v in vals):
            raise InvalidInputError("ellipse geometry must be finite")
        cx, cy, major, minor, angle = vals
        if not (major >= minor > 0.0):
            raise InvalidInputError("semi-axes must satisfy major >= minor > 0")
        object.__setattr__(self, "cx", cx)
        object.__setattr__(self, "cy", cy)
        object.__setattr__(self, "major", major)
        object.__setattr__(self, "minor", minor)
        object.__setattr__(self, "angle", angle % math.pi)


def to_matrix(c: Conic) -> np.ndarray:
    """Symmetric 3x3 matrix P with [x y 1] P [x y 1]^T = f(x, y)."""
    return np.array(
        [
            [c.a, c.b, c.d],
            [c.b, c.c, c.e],
            [c.d, c.e, c.f],
        ]
    )


def from_matrix(P) -> Conic:
    """Inverse of to_matrix.  P must be 3x3 and symmetric to 1e-12 relative."""
    P = np.asarray(P, dtype=float)
    if P.shape != (3, 3):
        raise InvalidInputError("conic matrix must be 3x3")
    if not np.all(np.isfinite(P)):
        raise InvalidInputError("conic matrix must be finite")
    scale = float(np.max(np.abs(P)))
    if float(np.max(np.abs(P - P.T))) > 1e-12 * max(scale, 1.0):
        raise InvalidInputError("conic matrix must be symmetric")
    return Conic(P[0, 0], P[0, 1], P[1, 1], P[0, 2], P[1, 2], P[2, 2])


def evaluate(c: Conic, p):
    """Algebraic value f(x, y) at one point (2,) or a batch (..., 2)."""
    xy = np.asarray(p, dtype=float)
    if xy.shape[-1:] != (2,):
        raise InvalidInputError("points must have trailing dimension 2")
    x = xy[..., 0]
    y = xy[..., 1]
    val = c.a * x * x + 2.0 * c.b * x * y + c.c * y * y + 2.0 * c.d * x + 2.0 * c.e * y + c.f
    if val.ndim == 0:
        return float(val)
    return val


def _center(c: Conic):
    """Center of the quadratic part, or None when the 2x2 block is singular."""
    det2 = c.a * c.c - c.b * c.b
    if det2 == 0.0:
        return None
    cx = (-c.d * c.c + c.e * c.b) / det2
    cy = (-c.a * c.e + c.b * c.d) / det2
    if not (math.isfinite(cx) and math.isfinite(cy)):
        return None
    return cx, cy


def is_ellipse(c: Conic) -> bool:
    """True for a real, nondegenerate ellipse.  Invariant under rescaling."""
    disc = c.a * c.c - c.b * c.b
    if not (disc > 0.0):
        return False
    center = _center(c)
    if center is None:
        return False
    f0 = evaluate(c, center)
    # 2x2 block is definite with the sign of a; a real ellipse needs the
    # value at the center on the opposite side of zero.
    return c.a * f0 < 0.0


def to_geometry(c: Conic) -> EllipseGeom:
    """Center, semi-axes and orientation of a real ellipse.

    Raises NotAnEllipseError when the conic fails is_ellipse.  A circle
    reports angle 0.
    """
    if not is_ellipse(c):
        raise NotAnEllipseError("conic is not a real nondegenerate ellipse")
    if c.a < 0.0:  # flip so the quadratic block is positive definite
        c = Conic(-c.a, -c.b, -c.c, -c.d, -c.e, -c.f)
    cx, cy = _center(c)
    f0 = evaluate(c, (cx, cy))
    half_tr = 0.5 * (c.a + c.c)
    s = 0.5 * math.hypot(c.a - c.c, 2.0 * c.b)
    lam1 = half_tr - s  # smaller eigenvalue -> major axis
    lam2 = half_tr + s
    major = math.sqrt(-f0 / lam1)
    minor = math.sqrt(-f0 / lam2)
    if s <= 1e-14 * lam2:
        angle = 0.0
    elif c.b != 0.0:
        angle = math.atan2(lam1 - c.a, c.b)
    else:
        angle = 0.0 if c.a <= c.c else 0.5 * math.pi
    return EllipseGeom(cx, cy, major, minor, angle)


def from_geometry(g: EllipseGeom) -> Conic:
    """Implicit coefficients of the ellipse with the given geometry.

    Normalized so the value at the center is -1.
    """
    ca, sa = math.cos(g.angle), math.sin(g.angle)
    inv_a2 = 1.0 / (g.major * g.major)
    inv_b2 = 1.0 / (g.minor * g.minor)
    a = ca * ca * inv_a2 + sa * sa * inv_b2
    b = ca * sa * (inv_a2 - inv_b2)
    c = sa * sa * inv_a2 + ca * ca * inv_b2
    d = -(a * g.cx + b * g.cy)
    e = -(b * g.cx + c * g.cy)
    f = a * g.cx * g.cx + 2.0 * b * g.cx * g.cy + c * g.cy * g.cy - 1.0
    return Conic(a, b, c, d, e, f)


def normalize(c: Conic) -> Conic:
    """Unit-norm representative with the first nonzero coefficient positive.

    The sign rule scans (a, b, c, d, e, f) in order.  Idempotent; raises
    InvalidInputError on the all-zero vector.
    """
    v = c.as_array()
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise InvalidInputError("cannot normalize the zero conic")
    v = v / n
    for x in v:
        if x != 0.0:
            if x < 0.0:
                v = -v
            break
    return Conic.from_array(v)


def compare_up_to_scale(c1: Conic, c2: Conic) -> float:
    """Scale- and sign-free distance in [0, 1]: 1 - |cos| of the coefficient angle."""
    v1 = c1.as_array()
    v2 = c2.as_array()
    n1 = float(np.linalg.norm(v1))
    n2 = float(np.linalg.norm(v2))
    if n1 == 0.0 or n2 == 0.0:
        raise InvalidInputError("cannot compare the zero conic")
    err = 1.0 - abs(float(v1 @ v2)) / (n1 * n2)
    return min(max(err, 0.0), 1.0)


def sampson_distance(c: Conic, p):
    """First-order geometric distance |f| / ||grad f||.

    Points with vanishing gradient (singular points of the conic) map to
    +inf rather than raising.
    """
    xy = np.asarray(p, dtype=float)
    if xy.shape[-1:] != (2,):
        raise InvalidInputError("points must have trailing dimension 2")
    x = xy[..., 0]
    y = xy[..., 1]
    val = np.abs(c.a * x * x + 2.0 * c.b * x * y + c.c * y * y + 2.0 * c.d * x + 2.0 * c.e * y + c.f)
    gx = 2.0 * (c.a * x + c.b * y + c.d)
    gy = 2.0 * (c.b * x + c.c * y + c.e)
    gn = np.hypot(gx, gy)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(gn == 0.0, np.inf, val / np.where(gn == 0.0, 1.0, gn))
    if out.ndim == 0:
        return float(out)
    return out
