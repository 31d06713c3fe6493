"""Compiled kernel implementations (numba backend).

Same surface as numpy_impl.  Thin python wrappers coerce inputs to
contiguous float64 and call @njit cores; cores are loop-based (cyclic Jacobi
eigensolver, companion-matrix roots, node-sampled Sylvester determinants).
First call per signature compiles; cache=True persists the compiled code.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

# det expansion tables: column permutations, signs, affine-slot exponents
_COLS = np.array([[0, 1, 2], [1, 0, 2], [2, 0, 1]], dtype=np.int64)
_SIGNS = np.array([1.0, -1.0, 1.0])
_EI = np.array([0, 1, 0], dtype=np.int64)
_EJ = np.array([0, 0, 1], dtype=np.int64)


@njit(cache=True)
def _jacobi_eigh(M):
    n = M.shape[0]
    A = M.copy()
    V = np.eye(n)
    fro = 0.0
    for i in range(n):
        for j in range(n):
            fro += A[i, j] * A[i, j]
    tol = 1e-14 * np.sqrt(fro)
    skip = tol / (n * n)
    for _sweep in range(50):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                off += 2.0 * A[i, j] * A[i, j]
        if np.sqrt(off) < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= skip:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                cth = 1.0 / np.sqrt(1.0 + t * t)
                sth = t * cth
                app = A[p, p]
                aqq = A[q, q]
                A[p, p] = app - t * apq
                A[q, q] = aqq + t * apq
                A[p, q] = 0.0
                A[q, p] = 0.0
                for k in range(n):
                    if k != p and k != q:
                        akp = A[k, p]
                        akq = A[k, q]
                        A[k, p] = cth * akp - sth * akq
                        A[p, k] = A[k, p]
                        A[k, q] = sth * akp + cth * akq
                        A[q, k] = A[k, q]
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = cth * vkp - sth * vkq
                    V[k, q] = sth * vkp + cth * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = A[i, i]
    order = np.argsort(w)
    Vs = np.empty((n, n))
    for k in range(n):
        Vs[:, k] = V[:, order[k]]
    return w[order], Vs


@njit(cache=True)
def _poly_roots(c):
    # Complex companion matrix: eigvals then always returns complex128
    # (a real input would demand a runtime domain change for complex roots).
    n = c.shape[0] - 1
    C = np.zeros((n, n), dtype=np.complex128)
    for i in range(1, n):
        C[i, i - 1] = 1.0
    lead = c[n]
    for i in range(n):
        C[i, n - 1] = -c[i] / lead
    return np.linalg.eigvals(C)


@njit(cache=True)
def _polyval2_one(g, a, b):
    di, dj = g.shape
    acc = 0.0
    for i in range(di - 1, -1, -1):
        row = 0.0
        for j in range(dj - 1, -1, -1):
            row = row * b + g[i, j]
        acc = acc * a + row
    return acc


@njit(cache=True)
def _polyval2_arr(g, a, b):
    out = np.empty(a.shape[0])
    for k in range(a.shape[0]):
        out[k] = _polyval2_one(g, a[k], b[k])
    return out


@njit(cache=True)
def _det3_affine(T):
    # affine slot k of an entry carries exponents (_EI[k], _EJ[k]) in (alpha, beta)
    out = np.zeros((4, 4))
    for c in range(3):
        c0 = _COLS[c, 0]
        c1 = _COLS[c, 1]
        c2 = _COLS[c, 2]
        sg = _SIGNS[c]
        for k0 in range(3):
            v0 = T[0, c0, k0]
            if v0 == 0.0:
                continue
            for k1 in range(3):
                for k2 in range(3):
                    prod = v0 * (T[1, c1, k1] * T[2, c2, k2] - T[1, c2, k1] * T[2, c1, k2])
                    if prod != 0.0:
                        out[_EI[k0] + _EI[k1] + _EI[k2], _EJ[k0] + _EJ[k1] + _EJ[k2]] += sg * prod
    return out


@njit(cache=True)
def _deg_along(g, axis):
    deg = -1
    for i in range(g.shape[0]):
        for j in range(g.shape[1]):
            if g[i, j] != 0.0:
                k = i if axis == 0 else j
                if k > deg:
                    deg = k
    return deg


@njit(cache=True)
def _total_deg(g):
    deg = -1
    for i in range(g.shape[0]):
        for j in range(g.shape[1]):
            if g[i, j] != 0.0 and i + j > deg:
                deg = i + j
    return deg


@njit(cache=True)
def _subst_rows(g, elim_axis, t, d):
    # coefficient rows in the eliminated variable at each node of the survivor
    nn = t.shape[0]
    out = np.zeros((nn, d + 1))
    for k in range(nn):
        if elim_axis == 1:
            for j in range(d + 1):
                acc = 0.0
                for i in range(g.shape[0] - 1, -1, -1):
                    acc = acc * t[k] + g[i, j]
                out[k, j] = acc
        else:
            for i in range(d + 1):
                acc = 0.0
                for j in range(g.shape[1] - 1, -1, -1):
                    acc = acc * t[k] + g[i, j]
                out[k, i] = acc
    return out


@njit(cache=True)
def _resultant(p, q, elim_axis):
    dp = _deg_along(p, elim_axis)
    dq = _deg_along(q, elim_axis)
    nn = _total_deg(p) * _total_deg(q) + 1
    t = np.empty(nn)
    for k in range(nn):
        t[k] = 2.0 * np.cos(np.pi * (2.0 * k + 1.0) / (2.0 * nn))
    U = _subst_rows(p, elim_axis, t, dp)
    W = _subst_rows(q, elim_axis, t, dq)
    s = dp + dq
    dets = np.empty(nn)
    S = np.zeros((s, s))
    for k in range(nn):
        for i in range(s):
            for j in range(s):
                S[i, j] = 0.0
        for r in range(dq):
            for m in range(dp + 1):
                S[r, r + m] = U[k, dp - m]
        for r in range(dp):
            for m in range(dq + 1):
                S[dq + r, r + m] = W[k, dq - m]
        dets[k] = np.linalg.det(S)
    V = np.empty((nn, nn))
    for k in range(nn):
        pw = 1.0
        for e in range(nn):
            V[k, e] = pw
            pw *= t[k]
    return np.linalg.solve(V, dets)


@njit(cache=True)
def _dgrid(g, axis):
    out = np.zeros_like(g)
    if axis == 0:
        for i in range(1, g.shape[0]):
            for j in range(g.shape[1]):
                out[i - 1, j] = i * g[i, j]
    else:
        for j in range(1, g.shape[1]):
            for i in range(g.shape[0]):
                out[i, j - 1] = j * g[i, j]
    return out


@njit(cache=True)
def _newton2(g1, g2, ab, max_iter, tol):
    g1a = _dgrid(g1, 0)
    g1b = _dgrid(g1, 1)
    g2a = _dgrid(g2, 0)
    g2b = _dgrid(g2, 1)
    K = ab.shape[0]
    out = ab.copy()
    res = np.empty(K)
    for k in range(K):
        a = ab[k, 0]
        b = ab[k, 1]
        r = abs(_polyval2_one(g1, a, b)) + abs(_polyval2_one(g2, a, b))
        for _ in range(max_iter):
            if r <= tol:
                break
            f1 = _polyval2_one(g1, a, b)
            f2 = _polyval2_one(g2, a, b)
            j11 = _polyval2_one(g1a, a, b)
            j12 = _polyval2_one(g1b, a, b)
            j21 = _polyval2_one(g2a, a, b)
            j22 = _polyval2_one(g2b, a, b)
            det = j11 * j22 - j12 * j21
            if abs(det) <= 1e-300 or not math.isfinite(det):
                break
            da = (-f1 * j22 + f2 * j12) / det
            db = (-f2 * j11 + f1 * j21) / det
            lam = 1.0
            moved = False
            for _h in range(8):
                ta = a + lam * da
                tb = b + lam * db
                tr = abs(_polyval2_one(g1, ta, tb)) + abs(_polyval2_one(g2, ta, tb))
                if tr < r:
                    step = math.hypot(ta - a, tb - b)
                    a = ta
                    b = tb
                    r = tr
                    moved = step > 1e-14 * (1.0 + abs(a) + abs(b))
                    break
                lam *= 0.5
            if not moved:
                break
        out[k, 0] = a
        out[k, 1] = b
        res[k] = r
    return out, res


@njit(cache=True)
def _sampson_many(coef, pts):
    a, b, c, d, e, f = coef[0], coef[1], coef[2], coef[3], coef[4], coef[5]
    n = pts.shape[0]
    out = np.empty(n)
    for k in range(n):
        x = pts[k, 0]
        y = pts[k, 1]
        val = abs(a * x * x + 2.0 * b * x * y + c * y * y + 2.0 * d * x + 2.0 * e * y + f)
        gx = 2.0 * (a * x + b * y + d)
        gy = 2.0 * (b * x + c * y + e)
        gn = math.hypot(gx, gy)
        out[k] = np.inf if gn == 0.0 else val / gn
    return out


def _c64(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def eigh_sym(M):
    """Cyclic Jacobi eigendecomposition, eigenvalues ascending."""
    return _jacobi_eigh(_c64(M))


def poly_roots(c):
    """All complex roots of an ascending-coefficient polynomial (nonzero lead)."""
    return _poly_roots(_c64(c))


def polyval2(grid, a, b):
    """Evaluate a bivariate coefficient grid at alpha=a, beta=b."""
    g = _c64(grid)
    if np.isscalar(a) or np.ndim(a) == 0:
        return _polyval2_one(g, float(a), float(b))
    a = _c64(a)
    b = _c64(b)
    return _polyval2_arr(g, a.ravel(), b.ravel()).reshape(a.shape)


def det3_affine(T):
    """Determinant of a 3x3 matrix of affine forms; cubic as a (4, 4) grid."""
    return _det3_affine(_c64(T))


def resultant(p, q, elim_axis):
    """Sylvester resultant w.r.t. one grid axis, ascending survivor coefficients."""
    return _resultant(_c64(p), _c64(q), int(elim_axis))


def newton2(g1, g2, ab, max_iter=25, tol=1e-12):
    """Damped 2-D Newton polish of (K, 2) start points on two grids."""
    ab = _c64(np.atleast_2d(ab))
    return _newton2(_c64(g1), _c64(g2), ab, int(max_iter), float(tol))


def sampson_many(coef, pts):
    """Sampson distance of each point to the conic with coefficient 6-vector."""
    return _sampson_many(_c64(coef), _c64(pts))
