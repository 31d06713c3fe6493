"""Robust fitting of ellipses that are pinhole-camera projections of spheres.

The package provides:

- :mod:`spherefit.conic` — conic representations, classification, geometry;
- :mod:`spherefit.sphere` — the analytic sphere-silhouette projection, its
  two coefficient constraints, synthetic sampling, constrained refinement;
- :mod:`spherefit.fitters` — least-squares baselines and the three-point
  minimal solver for sphere silhouettes;
- :mod:`spherefit.ransac` — the robust estimation loop over the minimal
  solver;
- :mod:`spherefit.kernels` — switchable numba/numpy numeric kernels
  (``ELLIPSE_BACKEND`` environment variable);
- the ``ellipse`` command-line tool (see :mod:`spherefit.cli`).
"""

from .conic import (
    Conic,
    EllipseGeom,
    compare_up_to_scale,
    evaluate,
    from_geometry,
    from_matrix,
    is_ellipse,
    normalize,
    sampson_distance,
    to_geometry,
    to_matrix,
)
from .errors import (
    DegenerateSampleError,
    InsufficientDataError,
    InvalidInitError,
    InvalidInputError,
    NoModelError,
    NotAnEllipseError,
)
from .fitters import (
    ThreePointCandidate,
    constraint_polys,
    design_matrix,
    fit_constrained,
    fit_direct_ellipse,
    fit_ls_svd,
    fit_three_point,
)
from .ransac import RansacConfig, RansacResult, required_iterations, run_ransac
from .sphere import (
    Intrinsics,
    PointSet,
    RefineResult,
    SphereScene,
    add_outliers,
    ellipse_bbox,
    project_sphere,
    random_scene,
    refine_constrained,
    s1_residual,
    s2_residual,
    sample_conic_points,
    scene_from_conic,
)

__version__ = "0.1.0"

__all__ = [
    "Conic",
    "EllipseGeom",
    "Intrinsics",
    "PointSet",
    "RansacConfig",
    "RansacResult",
    "RefineResult",
    "SphereScene",
    "ThreePointCandidate",
    "add_outliers",
    "compare_up_to_scale",
    "constraint_polys",
    "design_matrix",
    "ellipse_bbox",
    "evaluate",
    "fit_constrained",
    "fit_direct_ellipse",
    "fit_ls_svd",
    "fit_three_point",
    "from_geometry",
    "from_matrix",
    "is_ellipse",
    "normalize",
    "project_sphere",
    "random_scene",
    "refine_constrained",
    "required_iterations",
    "run_ransac",
    "s1_residual",
    "s2_residual",
    "sample_conic_points",
    "sampson_distance",
    "scene_from_conic",
    "to_geometry",
    "to_matrix",
    "DegenerateSampleError",
    "InsufficientDataError",
    "InvalidInitError",
    "InvalidInputError",
    "NoModelError",
    "NotAnEllipseError",
    "__version__",
]
