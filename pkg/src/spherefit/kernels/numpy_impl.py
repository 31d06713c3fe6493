"""Pure-numpy kernel implementations (fallback backend).

Function-for-function mirror of numba_impl, vectorized where the compiled
backend uses explicit loops.  All polynomial grids follow the convention
grid[i, j] * alpha**i * beta**j with ascending exponents.
"""
from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as npoly


def eigh_sym(M):
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending."""
    return np.linalg.eigh(M)


def poly_roots(c):
    """All complex roots of an ascending-coefficient polynomial (nonzero lead)."""
    return np.asarray(np.roots(c[::-1]), dtype=np.complex128)


def polyval2(grid, a, b):
    """Evaluate a bivariate coefficient grid at alpha=a, beta=b (broadcasts)."""
    return npoly.polyval2d(a, b, grid)


def _mul_grid(A, B):
    out = np.zeros((A.shape[0] + B.shape[0] - 1, A.shape[1] + B.shape[1] - 1))
    for i in range(A.shape[0]):
        for j in range(A.shape[1]):
            v = A[i, j]
            if v != 0.0:
                out[i : i + B.shape[0], j : j + B.shape[1]] += v * B
    return out


def det3_affine(T):
    """Determinant of a 3x3 matrix of affine forms in (alpha, beta).

    T has shape (3, 3, 3); T[r, c] = (k0, ka, kb) meaning k0 + ka*alpha +
    kb*beta.  Returns the cubic as a (4, 4) grid.
    """
    T = np.asarray(T, dtype=float)

    def entry(r, c):
        G = np.zeros((2, 2))
        G[0, 0], G[1, 0], G[0, 1] = T[r, c]
        return G

    out = np.zeros((4, 4))
    for c0, c1, c2, sg in ((0, 1, 2, 1.0), (1, 0, 2, -1.0), (2, 0, 1, 1.0)):
        minor = _mul_grid(entry(1, c1), entry(2, c2)) - _mul_grid(entry(1, c2), entry(2, c1))
        out += sg * _mul_grid(entry(0, c0), minor)
    return out


def _deg_along(g, axis):
    nz = np.nonzero(np.any(g != 0.0, axis=1 - axis))[0]
    return int(nz[-1]) if nz.size else -1


def _total_deg(g):
    idx = np.nonzero(g)
    return int(np.max(idx[0] + idx[1])) if idx[0].size else -1


def resultant(p, q, elim_axis):
    """Sylvester resultant of two bivariate grids w.r.t. one variable.

    Eliminates axis 0 (alpha) or axis 1 (beta); returns ascending
    coefficients in the surviving variable.  The determinant polynomial is
    recovered by evaluation at Bezout-bound+1 nodes and a Vandermonde solve.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    dp = _deg_along(p, elim_axis)
    dq = _deg_along(q, elim_axis)
    nn = _total_deg(p) * _total_deg(q) + 1
    t = 2.0 * np.cos(np.pi * (2.0 * np.arange(nn) + 1.0) / (2.0 * nn))

    if elim_axis == 1:  # survivor alpha = axis 0
        Pw = t[:, None] ** np.arange(p.shape[0])
        Qw = t[:, None] ** np.arange(q.shape[0])
        U = (Pw @ p)[:, : dp + 1]
        W = (Qw @ q)[:, : dq + 1]
    else:  # survivor beta = axis 1
        Pw = t[:, None] ** np.arange(p.shape[1])
        Qw = t[:, None] ** np.arange(q.shape[1])
        U = (Pw @ p.T)[:, : dp + 1]
        W = (Qw @ q.T)[:, : dq + 1]

    s = dp + dq
    S = np.zeros((nn, s, s))
    for r in range(dq):
        S[:, r, r : r + dp + 1] = U[:, ::-1]
    for r in range(dp):
        S[:, dq + r, r : r + dq + 1] = W[:, ::-1]
    dets = np.linalg.det(S)
    V = np.vander(t, nn, increasing=True)
    return np.linalg.solve(V, dets)


def _dgrid(g, axis):
    out = np.zeros_like(g)
    if axis == 0:
        for i in range(1, g.shape[0]):
            out[i - 1, :] = i * g[i, :]
    else:
        for j in range(1, g.shape[1]):
            out[:, j - 1] = j * g[:, j]
    return out


def _powers(t, n):
    P = np.empty((n, t.shape[0]))
    P[0] = 1.0
    for i in range(1, n):
        P[i] = P[i - 1] * t
    return P


def _eval_stack(G, a, b):
    """Evaluate a stack of grids (s, m, n) at points (a, b) -> (s, K)."""
    PA = _powers(a, G.shape[1])
    PB = _powers(b, G.shape[2])
    # sum_ij PA[i,k] G[s,i,j] PB[j,k]
    T = np.tensordot(G, PB, axes=([2], [0]))  # (s, m, K)
    return np.einsum("ik,sik->sk", PA, T)


def newton2(g1, g2, ab, max_iter=25, tol=1e-12):
    """Damped 2-D Newton on a pair of bivariate polynomials.

    ab is (K, 2) start points; returns (polished (K, 2), residual |g1|+|g2|).
    Points that hit the residual tolerance or stop moving drop out of the
    active set; a step is accepted at the first halving that reduces the
    residual.
    """
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    m = max(g1.shape[0], g2.shape[0])
    n = max(g1.shape[1], g2.shape[1])

    def pad(g):
        out = np.zeros((m, n))
        out[: g.shape[0], : g.shape[1]] = g
        return out

    G_fun = np.stack([pad(g1), pad(g2)])
    G_all = np.concatenate(
        [G_fun, np.stack([pad(_dgrid(g, ax)) for g in (g1, g2) for ax in (0, 1)])]
    )

    ab = np.asarray(ab, dtype=float)
    A = ab[:, 0].copy()
    B = ab[:, 1].copy()
    F = _eval_stack(G_fun, A, B)
    RES = np.abs(F[0]) + np.abs(F[1])
    active = np.nonzero(RES > tol)[0]

    for _ in range(max_iter):
        if active.size == 0:
            break
        a, b, res = A[active], B[active], RES[active]
        vals = _eval_stack(G_all, a, b)
        f1, f2, j11, j12, j21, j22 = vals
        det = j11 * j22 - j12 * j21
        ok = (np.abs(det) > 1e-300) & np.isfinite(det)
        safe = np.where(ok, det, 1.0)
        da = np.where(ok, (-f1 * j22 + f2 * j12) / safe, 0.0)
        db = np.where(ok, (-f2 * j11 + f1 * j21) / safe, 0.0)

        na, nb, nres = a.copy(), b.copy(), res.copy()
        accepted = np.zeros(a.shape, dtype=bool)
        lam = 1.0
        for _h in range(8):
            rem = ok & ~accepted
            if not np.any(rem):
                break
            ta = a + lam * da
            tb = b + lam * db
            tf = _eval_stack(G_fun, ta, tb)
            tres = np.abs(tf[0]) + np.abs(tf[1])
            upd = rem & (tres < res)
            na[upd] = ta[upd]
            nb[upd] = tb[upd]
            nres[upd] = tres[upd]
            accepted |= upd
            lam *= 0.5

        moved = np.hypot(na - a, nb - b)
        A[active], B[active], RES[active] = na, nb, nres
        keep = accepted & (nres > tol) & (moved > 1e-14 * (1.0 + np.abs(na) + np.abs(nb)))
        active = active[keep]

    return np.stack([A, B], axis=1), RES


def sampson_many(coef, pts):
    """Sampson distance of each point to the conic with coefficient 6-vector."""
    coef = np.asarray(coef, dtype=float)
    pts = np.asarray(pts, dtype=float)
    a, b, c, d, e, f = coef
    x = pts[:, 0]
    y = pts[:, 1]
    val = np.abs(a * x * x + 2.0 * b * x * y + c * y * y + 2.0 * d * x + 2.0 * e * y + f)
    gn = np.hypot(2.0 * (a * x + b * y + d), 2.0 * (b * x + c * y + e))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(gn == 0.0, np.inf, val / np.where(gn == 0.0, 1.0, gn))
