"""Phase-plane portrait data: orbit projections onto the (v, v') plane.

The closed level curves around the constant solution are genuine periodic
orbits computed by the shooting solver; the separating loop through (1, 0)
is the homoclinic (spherical) trajectory integrated until v decays below
1e-3 and completed by its time-reversal reflection.  Curves are data only;
rendering is left to external tooling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._geom import closed_polylines_cross, points_in_polygon
from .dynamics import CylinderState
from .errors import InvalidParameter
from .integrator import floor_event, integrate
from .params import DimensionParams
from .solver import shoot

__all__ = ["Curve", "Marker", "PortraitSet", "build_portrait"]

_SPHERE_V_END = 1e-3
_SPHERE_SAMPLES = 256  # per half-loop


@dataclass(frozen=True)
class Marker:
    label: str
    v: float
    v1: float


@dataclass
class Curve:
    label: str
    a: float | None
    points: np.ndarray  # (m, 2) array of (v, v1)

    @property
    def closed(self) -> bool:
        return bool(np.all(self.points[0] == self.points[-1]))


@dataclass
class PortraitSet:
    n: int
    curves: list[Curve] = field(default_factory=list)
    markers: list[Marker] = field(default_factory=list)

    def to_json(self) -> str:
        """Deterministic JSON with 9 significant digits per coordinate."""
        payload = {
            "n": self.n,
            "curves": [
                {
                    "label": c.label,
                    "a": None if c.a is None else _round9(c.a),
                    "points": [
                        [_round9(v), _round9(v1)] for v, v1 in c.points
                    ],
                }
                for c in self.curves
            ],
            "markers": [
                {"label": m.label, "v": _round9(m.v), "v1": _round9(m.v1)}
                for m in self.markers
            ],
        }
        return json.dumps(payload, indent=1, sort_keys=True)

    def to_csv(self) -> str:
        """Flattened CSV with a curve-id column."""
        lines = ["curve_id,label,a,v,v1"]
        for i, c in enumerate(self.curves):
            a_txt = "" if c.a is None else format(c.a, ".9g")
            for v, v1 in c.points:
                lines.append(
                    f"{i},{c.label},{a_txt},"
                    f"{format(float(v), '.9g')},{format(float(v1), '.9g')}"
                )
        return "\n".join(lines) + "\n"


def _round9(x: float) -> float:
    return float(format(float(x), ".9g"))


def _sphere_loop(params: DimensionParams, rtol: float, atol: float) -> np.ndarray:
    """Homoclinic loop polyline, ordered by increasing t.

    The forward half is integrated until v = 1e-3; the backward half is its
    reflection (v even, v' odd in t), so the polyline runs from near (0, 0+)
    up through (1, 0) and back down to near (0, 0-).
    """
    m = (params.n - 4.0) / 2.0
    s0 = CylinderState(0.0, 1.0, 0.0, -m, 0.0)
    traj = integrate(
        params, s0, 400.0, rtol, atol, events=[floor_event(_SPHERE_V_END)]
    )
    if traj.terminal != "v_floor_hit":
        raise InvalidParameter(
            "homoclinic integration did not reach the cutoff level"
        )
    ts = np.linspace(0.0, traj.t_final, _SPHERE_SAMPLES)
    states = traj.eval_many(ts)
    fwd = np.column_stack((states[:, 0], states[:, 1]))
    bwd = np.column_stack((states[:, 0], -states[:, 1]))[::-1]
    return np.vstack((bwd, fwd[1:]))


def build_portrait(
    params: DimensionParams,
    a_list: list[float],
    include_sphere: bool = True,
    tol: float = 1e-9,
) -> PortraitSet:
    """Portrait of the requested orbits, optionally with the homoclinic loop.

    Each a must lie in the admissible open interval; failures propagate per
    curve.  Output is deterministic for identical inputs.
    """
    out = PortraitSet(n=params.n)
    b_hint = None
    cache: dict[float, np.ndarray] = {}
    for a in a_list:
        a = float(a)
        if a not in cache:
            orbit = shoot(params, a, tol, b_hint=b_hint)
            b_hint = orbit.b
            cache[a] = orbit.phase_polyline()
        out.curves.append(
            Curve(label=f"delaunay a={a:.9g}", a=a, points=cache[a])
        )
    if include_sphere:
        out.curves.append(
            Curve(label="sphere", a=None,
                  points=_sphere_loop(params, 1e-11, 1e-13))
        )
    out.markers.append(Marker("cylinder", params.v_cyl, 0.0))
    return out


def portrait_is_nested(portrait: PortraitSet) -> bool:
    """No transversal crossings, and orbit curves sit inside the sphere loop."""
    closed = [c for c in portrait.curves if c.a is not None]
    for c1, c2 in zip(closed, closed[1:]):
        if closed_polylines_cross(c1.points, c2.points):
            return False
    sphere = [c for c in portrait.curves if c.a is None]
    if sphere:
        loop = np.vstack((sphere[0].points, sphere[0].points[:1]))
        for c in closed:
            if not bool(np.all(points_in_polygon(c.points, loop))):
                return False
        for c in closed:
            if closed_polylines_cross(c.points, sphere[0].points):
                return False
    return True
