"""warpflow: star-shaped hypersurfaces in warped products at desk scale.

Library layout mirrors the pipeline: `ambient` describes the warped-product
space, `grid` and `surface` discretize a radial graph and its extrinsic
geometry, `quantities` integrates the scalar functionals, `flows` evolves
graphs under inverse-curvature flows, `inequalities` turns the sharp
three-term inequalities and monotone quantities into signed deficits, and
`cli` wraps everything for the command line.
"""

from .ambient import (
    WarpedSpace,
    ball_volume,
    make_custom,
    make_space_form,
    probe_assumptions,
    sphere_area,
)
from .grid import SphereGrid, circle_grid, differentiate, sphere_grid
from .surface import (
    GeometryFields,
    RadialGraph,
    convexity_class,
    geometry,
    make_seed_surface,
)
from .quantities import (
    QuantityReport,
    full_report,
    quermassintegrals,
    surface_integral,
    volume,
    weighted_volume,
)
from .flows import FlowSpec, FlowTrace, evolve, speed, step, variational_check
from .inequalities import (
    DeficitReport,
    ball_chi,
    ball_chi_inverse,
    ball_xi,
    curve_kwww_deficit,
    deficit_boundary_momentum,
    deficit_hyperbolic_ref,
    deficit_phi_quermass_euclidean,
    deficit_sphere_ref,
    deficit_weinstock_iso,
    kwong_miao_deficit,
    minkowski_residual,
    monotone_series,
    q_imcf,
    q_k_euclidean,
)

__version__ = "0.1.0"
