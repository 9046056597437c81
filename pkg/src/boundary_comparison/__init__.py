"""Numerical comparison geometry for Riemannian manifolds with boundary.

Modules: ``kernels`` (comparison functions and constants), ``numerics``,
``expr`` (expression language), ``manifolds`` (warped tubes, chart surfaces,
certification), ``distance_field`` (eikonal solver, cut times),
``tube_geometry`` (volumes and integrals over the normal bundle),
``verifiers`` (inequality battery, rigidity detection) and ``cli``.
"""

from .kernels import ComparisonParams
from .manifolds import (
    CertificationError,
    Fiber,
    Resolution,
    build_chart_surface,
    build_warped_tube,
    certify_bounds,
    model_tube,
)
from .verifiers import CheckReport, RigidityVerdict, SuiteConfig, detect_rigidity, run_suite

__version__ = "0.1.0"

__all__ = [
    "CertificationError",
    "CheckReport",
    "ComparisonParams",
    "Fiber",
    "Resolution",
    "RigidityVerdict",
    "SuiteConfig",
    "build_chart_surface",
    "build_warped_tube",
    "certify_bounds",
    "detect_rigidity",
    "model_tube",
    "run_suite",
]
