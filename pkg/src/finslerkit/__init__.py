"""Numerical Finsler-geometry engine.

Computes the curvature tower of a user-specified Finsler metric F(x, y)
through high-order Taylor-jet automatic differentiation, and verifies the
identities relating Berwald scalar curvature, mean Berwald curvature, and
S-curvature as machine-precision residual checks on concrete metrics.
"""

__version__ = "0.1.0"

from .jets import Jet, JetSpec
from .metricdef import MetricSpec, VolumeDensity, builtin_metric, parse_metric
from .fundamentals import PointDir, fundamentals_at, adapted_frame
from .spray import spray_at, geodesic_integrate
from .curvature import (conventions, curvature_bundle, e_and_E, landsberg,
                        riemann_flag, s_curvature)

__all__ = [
    "__version__",
    "Jet", "JetSpec",
    "MetricSpec", "VolumeDensity", "builtin_metric", "parse_metric",
    "PointDir", "fundamentals_at", "adapted_frame",
    "spray_at", "geodesic_integrate",
    "conventions", "curvature_bundle", "e_and_E", "landsberg",
    "riemann_flag", "s_curvature",
]
