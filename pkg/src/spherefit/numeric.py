"""Small dense numeric helpers shared by the fitting code.

Everything here wraps a kernel-backend primitive with the input validation
and post-processing the fitters rely on: nullspace extraction for the
three-point design, real-root extraction with clustering, and resultant
elimination over bivariate grids.
"""
from __future__ import annotations

import numpy as np

from . import kernels
from .errors import DegenerateSampleError, InvalidInputError

_MAX_ROOT_DEGREE = 16


def min_eigvec_sym6(M: np.ndarray) -> np.ndarray:
    """Unit eigenvector of the smallest eigenvalue of a symmetric 6x6 matrix.

    Raises InvalidInputError when the matrix is not 6x6-symmetric to within
    1e-10 relative to its largest entry.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (6, 6):
        raise InvalidInputError(f"expected a 6x6 matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError("matrix contains non-finite entries")
    scale = max(float(np.abs(M).max()), 1.0)
    if float(np.abs(M - M.T).max()) > 1e-10 * scale:
        raise InvalidInputError("matrix is not symmetric")
    w, V = kernels.eigh_sym(0.5 * (M + M.T))
    return np.asarray(V)[:, 0].copy()


def nullspace_3x6(A: np.ndarray) -> np.ndarray:
    """Orthonormal basis (6, 3) of the null space of a full-rank 3x6 design.

    Uses the eigendecomposition of the 6x6 Gram matrix A.T @ A; the three
    eigenvectors with the smallest eigenvalues span the null space exactly
    when A has rank 3.  Raises DegenerateSampleError when the rank test
    w[3] > 1e-10 * trace fails (collinear or coincident sample points).
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (3, 6):
        raise InvalidInputError(f"expected a 3x6 design matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("design matrix contains non-finite entries")
    G = A.T @ A
    G = 0.5 * (G + G.T)
    w, V = kernels.eigh_sym(G)
    w = np.asarray(w)
    trace = float(np.trace(G))
    if trace <= 0.0 or w[3] <= 1e-10 * trace:
        raise DegenerateSampleError("sample design matrix is rank deficient")
    return np.asarray(V)[:, :3].copy()


def real_roots(coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Real roots of a univariate polynomial, with multiplicities.

    ``coeffs`` is ascending (c[0] + c[1] t + ...).  Exact trailing zero
    coefficients are trimmed; the remaining degree must be 1..16.  Roots of
    the companion matrix are filtered to near-real (|imag| <= 1e-7 *
    (1 + |real|)), polished with one Newton step, sorted, and clustered at
    1e-6 * (1 + |root|) into (roots, multiplicities).
    """
    c = np.asarray(coeffs, dtype=float).ravel()
    if c.size == 0 or not np.all(np.isfinite(c)):
        raise InvalidInputError("polynomial coefficients must be finite and non-empty")
    nz = np.nonzero(c)[0]
    if nz.size == 0:
        raise InvalidInputError("zero polynomial has no defined root set")
    c = c[: nz[-1] + 1]
    deg = c.size - 1
    if deg < 1:
        return np.empty(0), np.empty(0, dtype=int)
    if deg > _MAX_ROOT_DEGREE:
        raise InvalidInputError(f"degree {deg} exceeds supported maximum {_MAX_ROOT_DEGREE}")

    rts = np.asarray(kernels.poly_roots(c))
    re, im = rts.real, rts.imag
    keep = np.abs(im) <= 1e-7 * (1.0 + np.abs(re))
    x = re[keep]
    if x.size == 0:
        return np.empty(0), np.empty(0, dtype=int)

    # One guarded Newton step against the ascending-coefficient polynomial.
    dc = c[1:] * np.arange(1, c.size)
    p = np.polynomial.polynomial.polyval(x, c)
    dp = np.polynomial.polynomial.polyval(x, dc)
    safe = np.abs(dp) > 1e-300
    step = np.where(safe, p / np.where(safe, dp, 1.0), 0.0)
    x = x - step

    x.sort()
    roots: list[float] = []
    mults: list[int] = []
    for v in x:
        if roots and abs(v - roots[-1]) <= 1e-6 * (1.0 + abs(v)):
            # Running mean keeps the cluster center stable.
            roots[-1] = (roots[-1] * mults[-1] + v) / (mults[-1] + 1)
            mults[-1] += 1
        else:
            roots.append(float(v))
            mults.append(1)
    return np.asarray(roots), np.asarray(mults, dtype=int)


def resultant_eliminate(p: np.ndarray, q: np.ndarray, eliminate: str) -> np.ndarray:
    """Univariate resultant of two bivariate grids, eliminating one variable.

    Grids are coefficient arrays g[i, j] for alpha**i * beta**j.  With
    ``eliminate="beta"`` the result is an ascending polynomial in alpha, and
    vice versa.  Exact trailing zeros of the output are trimmed (keeping at
    least one coefficient).
    """
    axes = {"alpha": 0, "beta": 1}
    if eliminate not in axes:
        raise InvalidInputError(f"eliminate must be 'alpha' or 'beta', got {eliminate!r}")
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.ndim != 2 or q.ndim != 2:
        raise InvalidInputError("coefficient grids must be 2-D")
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
        raise InvalidInputError("coefficient grids contain non-finite entries")
    axis = axes[eliminate]

    def _deg_along(g: np.ndarray, ax: int) -> int:
        mask = np.any(g != 0.0, axis=1 - ax)
        nz = np.nonzero(mask)[0]
        return int(nz[-1]) if nz.size else -1

    if _deg_along(p, axis) < 1 or _deg_along(q, axis) < 1:
        raise InvalidInputError("both grids must have degree >= 1 in the eliminated variable")

    out = np.asarray(kernels.resultant(p, q, axis), dtype=float)
    nz = np.nonzero(out)[0]
    if nz.size == 0:
        return out[:1]
    return out[: nz[-1] + 1]
