"""Funk and Hilbert metrics on convex bodies, plus a hyperbolic comparison model.

The Euclidean side computes the Funk weak metric three ways (boundary ray
exit, supporting-hyperplane supremum, Finsler path-length infimum) and their
Hilbert symmetrization. The hyperbolic side realizes the analogous metrics on
a geodesically convex domain of the hyperbolic plane, where the three
formulations separate into an inequality chain instead of coinciding.
"""

from . import bodies, funk, funk_hyperbolic, hyperbolic
from .bodies import (
    BoundaryHit,
    ConvexBody,
    Ellipsoid,
    HalfspacePolytope,
    Hyperplane,
    SupportOracle,
    box,
    contains_interior,
    distance_to_hyperplane,
    foot,
    radial_function,
    ray_exit,
    support_function,
    supporting_hyperplanes_at,
    unit_ball,
)
from .funk import (
    FunkValue,
    PiecewisePath,
    cross_ratio_log,
    finsler_norm,
    funk_f1,
    funk_f2,
    funk_f3,
    funk_path_length,
    hilbert,
    hilbert_midpoint,
)
from .funk_hyperbolic import (
    HPiecewisePath,
    ModelFunkValue,
    length_hat,
    length_tilde,
    p_hat,
    p_tilde,
    phi1,
    wp_f1_estimate,
    wp_f2,
    wp_f3_estimate,
    wp_hilbert,
)
from .hyperbolic import (
    GeodesicDomain,
    HGeodesicLine,
    HTangent,
    disk_to_hyperboloid,
    domain_contains,
    exp_map,
    h_dist,
    hyperboloid_to_disk,
    log_map,
    normal_field,
    project_to_geodesic,
    ray_hit_geodesic,
    signed_dist_to_geodesic,
)

__version__ = "0.1.0"
