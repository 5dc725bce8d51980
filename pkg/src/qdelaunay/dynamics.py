"""First-order system, conserved energy, residuals, and linearization symbols.

The fourth-order equation v'''' - c2 v'' + c0 v = r v^p is written as a
first-order system in (v, v1, v2, v3) = (v, v', v'', v''').  The conserved
energy of the flow is

    H = -v1 v3 + v2^2/2 + (c2/2) v1^2 - (c0/2) v^2 + (r/p_sharp) v^p_sharp,

which satisfies dH/dt = -v1 * (v'''' - c2 v'' + c0 v - r v^p) along any C^4
curve, hence is constant along solutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NonPositiveV
from .params import DimensionParams

__all__ = [
    "V_FLOOR",
    "CylinderState",
    "vector_field",
    "make_rhs",
    "hamiltonian",
    "hamiltonian_values",
    "hamiltonian_gradient",
    "hamiltonian_flow_derivative",
    "ode_residual",
    "linearized_coefficient",
    "symbol_cyl",
]

# positivity floor for the conformal factor: fractional powers are undefined
# at v <= 0 and trajectories crashing to zero must fail loudly
V_FLOOR = 1e-12


@dataclass(frozen=True)
class CylinderState:
    """A point (t, v, v', v'', v''') of the first-order system."""

    t: float
    v: float
    v1: float
    v2: float
    v3: float

    def as_array(self) -> np.ndarray:
        return np.array((self.v, self.v1, self.v2, self.v3))


def _check_positive(v: float) -> None:
    if not v >= V_FLOOR:
        raise NonPositiveV(
            f"conformal factor v={v!r} at or below positivity floor {V_FLOOR:g}"
        )


def vector_field(params: DimensionParams, s: CylinderState) -> np.ndarray:
    """Rate of change of (v, v1, v2, v3); autonomous (independent of s.t)."""
    _check_positive(s.v)
    return np.array(
        (
            s.v1,
            s.v2,
            s.v3,
            params.c2 * s.v2 - params.c0 * s.v + params.r * s.v ** params.p,
        )
    )


def make_rhs(
    params: DimensionParams, track_volume: bool = False
) -> Callable[[float, np.ndarray], np.ndarray]:
    """Raw-array right-hand side for the integrator.

    With ``track_volume`` a fifth component z with z' = v^p_sharp is
    appended, so the volume integral inherits the integrator's accuracy.
    """
    c2, c0, r, p, ps = params.c2, params.c0, params.r, params.p, params.p_sharp

    if track_volume:
        def rhs(t: float, y: np.ndarray) -> np.ndarray:
            v = y[0]
            _check_positive(v)
            return np.array(
                (y[1], y[2], y[3], c2 * y[2] - c0 * v + r * v ** p, v ** ps)
            )
    else:
        def rhs(t: float, y: np.ndarray) -> np.ndarray:
            v = y[0]
            _check_positive(v)
            return np.array((y[1], y[2], y[3], c2 * y[2] - c0 * v + r * v ** p))

    return rhs


def hamiltonian(params: DimensionParams, s: CylinderState) -> float:
    """Conserved energy at a state."""
    _check_positive(s.v)
    kappa = params.r / params.p_sharp  # = (n-4)^2 (n^2-4) / 32
    return (
        -s.v1 * s.v3
        + 0.5 * s.v2 ** 2
        + 0.5 * params.c2 * s.v1 ** 2
        - 0.5 * params.c0 * s.v ** 2
        + kappa * s.v ** params.p_sharp
    )


def hamiltonian_values(
    params: DimensionParams,
    v: np.ndarray,
    v1: np.ndarray,
    v2: np.ndarray,
    v3: np.ndarray,
) -> np.ndarray:
    """Vectorized energy on sample arrays (all entries must be positive)."""
    if not np.all(v >= V_FLOOR):
        raise NonPositiveV("sample array contains v at or below the floor")
    kappa = params.r / params.p_sharp
    return (
        -v1 * v3
        + 0.5 * v2 ** 2
        + 0.5 * params.c2 * v1 ** 2
        - 0.5 * params.c0 * v ** 2
        + kappa * v ** params.p_sharp
    )


def hamiltonian_gradient(params: DimensionParams, s: CylinderState) -> np.ndarray:
    """Gradient of H with respect to (v, v1, v2, v3)."""
    _check_positive(s.v)
    return np.array(
        (
            -params.c0 * s.v + params.r * s.v ** params.p,
            params.c2 * s.v1 - s.v3,
            s.v2,
            -s.v1,
        )
    )


def hamiltonian_flow_derivative(params: DimensionParams, s: CylinderState) -> float:
    """Directional derivative of H along the vector field (zero identically).

    Evaluated exactly as grad H . f; the residual is pure floating-point
    cancellation, which the invariant suite bounds at 1e-12 of the term scale.
    """
    return float(np.dot(hamiltonian_gradient(params, s), vector_field(params, s)))


def ode_residual(
    params: DimensionParams,
    profile: Callable[[float], Sequence[float]],
    ts: Sequence[float],
) -> float:
    """Max pointwise residual |v'''' - c2 v'' + c0 v - r v^p| over ``ts``.

    ``profile(t)`` must supply (v, v', v'', v''', v'''') — analytically for
    closed forms.
    """
    worst = 0.0
    for t in ts:
        v, _, v2, _, v4 = profile(t)
        _check_positive(v)
        res = v4 - params.c2 * v2 + params.c0 * v - params.r * v ** params.p
        worst = max(worst, abs(res))
    return worst


def linearized_coefficient(params: DimensionParams, v0: float) -> float:
    """Zeroth-order coefficient c0 - p r v0^(p-1) of the linearized operator.

    The linearization about a profile v is w -> w'''' - c2 w'' +
    (c0 - p r v^(p-1)) w; at v0 = v_cyl the value is -n^2 (n-4)/2.
    """
    _check_positive(v0)
    return params.c0 - params.p * params.r * v0 ** (params.p - 1.0)


def symbol_cyl(params: DimensionParams, xi: float) -> float:
    """Action of the constant-coefficient linearization on cos(xi t).

    Negative exactly for |xi| < mu; vanishes at xi = +-mu.
    """
    return xi ** 4 + params.c2 * xi ** 2 + (params.c0 - params.k_lin)
