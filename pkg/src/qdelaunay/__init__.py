"""Periodic constant-Q-curvature conformal factors on the cylinder.

Shooting solver for the Delaunay-type periodic profiles of the radial
fourth-order equation, their conserved energy and period structure, the
normalized curvature-energy functional and its conformal invariant, and
stability diagnostics, with a deterministic CLI on top.
"""

__version__ = "0.1.0"

from .dynamics import (
    CylinderState,
    hamiltonian,
    linearized_coefficient,
    ode_residual,
    symbol_cyl,
    vector_field,
)
from .errors import (
    BracketFailure,
    EigenFailure,
    InvalidParameter,
    MaxStepsExceeded,
    NoConvergence,
    NonPositiveV,
    NoTurningPoint,
    NumericalError,
    QuadratureFailure,
    StepFloor,
)
from .functionals import (
    RadialProfile,
    count_constant_q_metrics,
    cylinder_invariant_value,
    invariant_value,
    profile_from_callable,
    profile_from_orbit,
    q_energy_radial,
    q_gradient_radial,
)
from .integrator import EventSpec, Trajectory, first_turning_point, integrate
from .params import (
    DimensionParams,
    make_params,
    sphere_closure_check,
    v_sph_jet,
    v_sph_profile,
)
from .portrait import PortraitSet, build_portrait
from .selfcheck import run_selfcheck
from .solver import DelaunayOrbit, SweepReport, orbit_for_period, shoot, sweep
from .stability import (
    SpectrumReport,
    cylinder_negative_modes,
    discretized_spectrum,
    nodal_arcs,
    variational_residual,
)

__all__ = [
    "__version__",
    "BracketFailure",
    "CylinderState",
    "DelaunayOrbit",
    "DimensionParams",
    "EigenFailure",
    "EventSpec",
    "InvalidParameter",
    "MaxStepsExceeded",
    "NoConvergence",
    "NonPositiveV",
    "NoTurningPoint",
    "NumericalError",
    "PortraitSet",
    "QuadratureFailure",
    "RadialProfile",
    "SpectrumReport",
    "StepFloor",
    "SweepReport",
    "Trajectory",
    "build_portrait",
    "count_constant_q_metrics",
    "cylinder_invariant_value",
    "cylinder_negative_modes",
    "discretized_spectrum",
    "first_turning_point",
    "hamiltonian",
    "integrate",
    "invariant_value",
    "linearized_coefficient",
    "make_params",
    "nodal_arcs",
    "ode_residual",
    "orbit_for_period",
    "profile_from_callable",
    "profile_from_orbit",
    "q_energy_radial",
    "q_gradient_radial",
    "run_selfcheck",
    "shoot",
    "sphere_closure_check",
    "sweep",
    "symbol_cyl",
    "v_sph_jet",
    "v_sph_profile",
    "variational_residual",
    "vector_field",
]
