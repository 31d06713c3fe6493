"""Switchable numeric kernel backends.

Two interchangeable implementations of the hot kernels live here:

- ``numba_impl``: @njit compiled loops (preferred when numba imports)
- ``numpy_impl``: vectorized pure-numpy fallback

The initial backend comes from the ``ELLIPSE_BACKEND`` environment variable
(``auto`` default, or ``numba`` / ``numpy``).  ``auto`` picks numba when it
is importable and falls back to numpy silently.  ``use_backend()`` switches
at run time; tests and benchmarks use it to exercise both paths in one
process.
"""
from __future__ import annotations

import os

from . import numpy_impl

_IMPLS = {"numpy": numpy_impl}

try:
    from . import numba_impl

    _IMPLS["numba"] = numba_impl
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    numba_impl = None
    HAS_NUMBA = False

__all__ = [
    "HAS_NUMBA",
    "available_backends",
    "current_backend",
    "use_backend",
    "eigh_sym",
    "poly_roots",
    "polyval2",
    "det3_affine",
    "resultant",
    "newton2",
    "sampson_many",
]


def _initial() -> str:
    req = os.environ.get("ELLIPSE_BACKEND", "auto").strip().lower()
    if req in ("", "auto"):
        return "numba" if HAS_NUMBA else "numpy"
    if req == "numba" and not HAS_NUMBA:
        raise RuntimeError("ELLIPSE_BACKEND=numba but numba is not importable")
    if req not in _IMPLS:
        raise RuntimeError(f"unknown ELLIPSE_BACKEND {req!r}; use auto, numba or numpy")
    return req


_impl = _IMPLS[_initial()]


def available_backends():
    """Backend names importable in this process."""
    return sorted(_IMPLS)


def current_backend() -> str:
    """Name of the active backend."""
    for name, mod in _IMPLS.items():
        if mod is _impl:
            return name
    raise RuntimeError("backend registry corrupted")


def use_backend(name: str) -> str:
    """Switch the active backend; returns the previous backend name."""
    global _impl
    if name not in _IMPLS:
        raise RuntimeError(f"backend {name!r} not available (have {available_backends()})")
    prev = current_backend()
    _impl = _IMPLS[name]
    return prev


def eigh_sym(M):
    """Symmetric eigendecomposition (w, V), eigenvalues ascending."""
    return _impl.eigh_sym(M)


def poly_roots(c):
    """Complex roots of an ascending-coefficient polynomial with nonzero lead."""
    return _impl.poly_roots(c)


def polyval2(grid, a, b):
    """Evaluate a bivariate coefficient grid at (alpha, beta)."""
    return _impl.polyval2(grid, a, b)


def det3_affine(T):
    """Cubic (4, 4) grid: determinant of a 3x3 matrix of affine forms."""
    return _impl.det3_affine(T)


def resultant(p, q, elim_axis):
    """Sylvester resultant of two grids w.r.t. axis 0 (alpha) or 1 (beta)."""
    return _impl.resultant(p, q, elim_axis)


def newton2(g1, g2, ab, max_iter=25, tol=1e-12):
    """Damped 2-D Newton polish of start points on a pair of grids."""
    return _impl.newton2(g1, g2, ab, max_iter, tol)


def sampson_many(coef, pts):
    """Sampson distances of an (N, 2) batch to the conic 6-vector."""
    return _impl.sampson_many(coef, pts)
