"""Shooting solver for the periodic (Delaunay-type) orbits.

An orbit with maximum ``a`` starts from the even initial state
(v, v', v'', v''')(0) = (a, 0, b, 0) with unknown b < 0.  The shooting
objective is g(b) = v'''(t*) at the first turning point t* of v: a genuine
symmetric minimum has v' = v''' = 0 there, and evenness about t = 0 and
t = t* then forces 2t*-periodicity.

Wrong guesses of b do not merely miss the target, they leave the bounded
region entirely, so bracketing is done on a classification of the outcome:

* ESCAPE — v exceeded the ceiling 1 + 1e-3 (b too shallow; includes shallow
  false minima whose velocity never arms the turning detector),
* TURN   — a turning point was found, classified by sign of g,
* CRASH  — v fell to the floor before turning (b too deep).

Walking b from 0^- toward more negative values the observed order is
ESCAPE / TURN(g>0) / TURN(g<0) / CRASH, with the g<0 window thin against the
crash basin; a coarse log-spaced scan brackets the score sign change, plain
bisection shrinks it to a TURN/TURN bracket, and a safeguarded secant
finishes on g.

Orbits close to the homoclinic profile (a near 1) are genuinely
ill-conditioned: the one-period error amplification grows like exp(n T_a / 2)
and exceeds 1e10 for n = 5, a = 0.99.  ``shoot`` therefore escalates its
tolerance chain until the measured full-period defect meets
``defect_target`` or the float64 conditioning floor is reached; the achieved
defect is always recorded on the orbit, never assumed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import functionals
from ._geom import closed_polylines_cross
from .dynamics import CylinderState, hamiltonian, hamiltonian_values
from .errors import (
    BracketFailure,
    InvalidParameter,
    NoConvergence,
    NonPositiveV,
    NumericalError,
)
from .integrator import (
    Trajectory,
    ceiling_event,
    floor_event,
    integrate,
    turning_event,
)
from .params import DimensionParams

__all__ = ["DelaunayOrbit", "SweepReport", "shoot", "orbit_for_period", "sweep"]

log = logging.getLogger(__name__)

N_ORBIT_SAMPLES = 512
V_CEILING_MARGIN = 1e-3
_SCAN_POINTS = 64
_SCAN_B_MIN = 1e-9
_T_MAX_PERIODS = 40.0
_SCAN_RTOL, _SCAN_ATOL = 1e-8, 1e-10
_A_MARGIN = 1e-6  # admissible a range is [v_cyl + margin, 1 - margin]
# (objective tolerance, integrator rtol) ladder for defect-driven refinement
_ESCALATION = ((1e-10, 1e-12), (1e-11, 1e-13), (3e-12, 1e-14))


@dataclass
class DelaunayOrbit:
    """One periodic orbit: parameter, shooting data, audits, dense samples.

    ``ts`` holds 512 uniform sample times on [0, t_a); ``vs`` .. ``v3s`` the
    state there.  ``defect`` is the full-period closure error measured by an
    independent integration to t_a (never inferred from symmetry), and
    ``max_drift`` the worst energy drift seen along that integration.
    """

    a: float
    b: float
    t_a: float
    eps_a: float
    h: float
    i_a: float
    defect: float
    max_drift: float
    ts: np.ndarray
    vs: np.ndarray
    v1s: np.ndarray
    v2s: np.ndarray
    v3s: np.ndarray
    trajectory: Trajectory = field(repr=False)

    @property
    def samples(self) -> list[CylinderState]:
        return [
            CylinderState(float(t), float(v), float(v1), float(v2), float(v3))
            for t, v, v1, v2, v3 in zip(self.ts, self.vs, self.v1s, self.v2s, self.v3s)
        ]

    def state_at(self, t: float) -> np.ndarray:
        """Dense state (v, v1, v2, v3) at any t, periodic and even.

        Times past the half period fold back through the reflection
        (v, v1, v2, v3)(t_a - t) -> (v, -v1, v2, -v3), so only the
        well-conditioned first half of the audit trajectory is ever queried.
        """
        tau = math.fmod(float(t), self.t_a)
        if tau < 0.0:
            tau += self.t_a
        if tau <= 0.5 * self.t_a:
            return self.trajectory.eval(tau)[:4].copy()
        y = self.trajectory.eval(self.t_a - tau)[:4]
        return np.array((y[0], -y[1], y[2], -y[3]))

    def phase_polyline(self) -> np.ndarray:
        """Closed (v, v1) polyline over one period (first point repeated)."""
        pts = np.column_stack((self.vs, self.v1s))
        return np.vstack((pts, pts[:1]))

    def energy_values(self, params: DimensionParams) -> np.ndarray:
        return hamiltonian_values(params, self.vs, self.v1s, self.v2s, self.v3s)

    def to_csv(self, params: DimensionParams) -> str:
        """CSV over the sample grid: columns t,v,v1,v2,v3,H."""
        hs = self.energy_values(params)
        lines = ["t,v,v1,v2,v3,H"]
        for row in zip(self.ts, self.vs, self.v1s, self.v2s, self.v3s, hs):
            lines.append(",".join(format(float(c), ".17g") for c in row))
        return "\n".join(lines) + "\n"


@dataclass
class _Shot:
    label: str  # "turn" | "crash" | "escape" | "none"
    g: float | None = None
    t_star: float | None = None
    state: CylinderState | None = None

    @property
    def score(self) -> int:
        # orientation: shallow side (escape, g>0 turns) is +1, deep side -1
        if self.label == "escape":
            return 1
        if self.label == "crash":
            return -1
        if self.label == "turn":
            return 1 if self.g > 0.0 else -1
        return 0


def _classify(params: DimensionParams, a: float, b: float,
              rtol: float, atol: float) -> _Shot:
    s0 = CylinderState(0.0, a, 0.0, b, 0.0)
    events = [
        turning_event(params, b),
        floor_event(),
        ceiling_event(1.0 + V_CEILING_MARGIN),
    ]
    try:
        traj = integrate(params, s0, _T_MAX_PERIODS * params.t_cyl,
                         rtol, atol, events)
    except NonPositiveV:
        return _Shot("crash")
    if traj.terminal == "turning_point":
        st = traj.final_state()
        return _Shot("turn", g=st.v3, t_star=traj.t_final, state=st)
    if traj.terminal == "v_floor_hit":
        return _Shot("crash")
    if traj.terminal == "v_ceiling_hit":
        return _Shot("escape")
    return _Shot("none")


def _validate_a(params: DimensionParams, a: float) -> None:
    lo = params.v_cyl + _A_MARGIN
    hi = 1.0 - _A_MARGIN
    if not (lo <= a <= hi):
        raise InvalidParameter(
            f"Delaunay parameter a={a!r} outside admissible range "
            f"[{lo:.8g}, {hi:.8g}]"
        )


def _bracket_root(params: DimensionParams, a: float,
                  b_hint: float | None) -> tuple[float, _Shot, float, _Shot]:
    """Stage 1+2: bracket the score sign change, bisect to TURN/TURN."""

    def scan_shot(b):
        return _classify(params, a, b, _SCAN_RTOL, _SCAN_ATOL)

    bracket = None
    if b_hint is not None and b_hint < 0.0:
        for widen in (0.2, 0.5):
            lo, hi = b_hint * (1.0 + widen), b_hint * (1.0 - widen)
            s_lo, s_hi = scan_shot(lo), scan_shot(hi)
            if s_lo.score * s_hi.score < 0:
                bracket = (lo, s_lo, hi, s_hi)
                break

    if bracket is None:
        b_deep = -1.5 * (params.n - 4.0) / 2.0
        bs = -np.geomspace(-b_deep, _SCAN_B_MIN, _SCAN_POINTS)  # ascending b
        shots = [scan_shot(b) for b in bs]
        changes = [
            i for i in range(len(bs) - 1)
            if shots[i].score * shots[i + 1].score < 0
        ]
        if not changes:
            raise BracketFailure(
                f"no classification change across the b scan for a={a}"
            )
        if len(changes) > 1:
            # more than one candidate root: keep the deepest (the periodic
            # orbit sits against the crash basin) but surface the anomaly
            log.warning(
                "multiple shooting sign changes for a=%g at b=%s",
                a, [f"{bs[i]:.6g}" for i in changes],
            )
        i = changes[0]
        bracket = (bs[i], shots[i], bs[i + 1], shots[i + 1])

    b_lo, s_lo, b_hi, s_hi = bracket
    return _bisect_to_turn_turn(params, a, b_lo, s_lo, b_hi, s_hi,
                                _SCAN_RTOL, _SCAN_ATOL)


def _bisect_to_turn_turn(params, a, b_lo, s_lo, b_hi, s_hi, rtol, atol):
    """Shrink a score-straddling pair until both ends are opposite-sign TURNs."""
    for _ in range(90):
        if (s_lo.label == "turn" and s_hi.label == "turn"
                and s_lo.g * s_hi.g < 0.0):
            return b_lo, s_lo, b_hi, s_hi
        if abs(b_hi - b_lo) < 1e-15 * max(1.0, abs(b_lo)):
            raise BracketFailure(
                f"classification bracket collapsed without a TURN/TURN "
                f"sign change (a={a}, b~{b_lo!r})"
            )
        b_mid = 0.5 * (b_lo + b_hi)
        s_mid = _classify(params, a, b_mid, rtol, atol)
        if s_mid.score == 0:
            raise BracketFailure(f"unclassifiable trajectory at a={a}, b={b_mid}")
        if s_mid.score == s_lo.score:
            b_lo, s_lo = b_mid, s_mid
        else:
            b_hi, s_hi = b_mid, s_mid
    raise NoConvergence(f"bisection stage exhausted for a={a}")


def _rebracket_near(params: DimensionParams, a: float, b_center: float,
                    rtol: float, atol: float):
    """TURN/TURN bracket around a known root, at the given tolerances.

    Widening starts at the ulp scale because near-homoclinic turn windows
    are extremely thin; any score-straddling pair is then funneled through
    the classification bisection.
    """
    for widen in (1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3):
        lo, hi = b_center * (1.0 + widen), b_center * (1.0 - widen)
        s_lo = _classify(params, a, lo, rtol, atol)
        s_hi = _classify(params, a, hi, rtol, atol)
        if s_lo.score * s_hi.score < 0:
            try:
                return _bisect_to_turn_turn(params, a, lo, s_lo, hi, s_hi,
                                            rtol, atol)
            except (BracketFailure, NoConvergence):
                continue
    return None


def _secant_on_g(params, a, bracket, tol, rtol, atol, best_effort=False):
    """Stage 3: Illinois-safeguarded secant on g inside a TURN/TURN bracket.

    Non-TURN evaluations extend the side they belong to (crash deepens the
    g<0 side, escape the g>0 side).  Returns (b_root, shot); with
    ``best_effort`` the best turning shot is returned even above tol.
    """
    b_lo, s_lo, b_hi, s_hi = bracket
    s_lo = _classify(params, a, b_lo, rtol, atol)
    s_hi = _classify(params, a, b_hi, rtol, atol)
    if not (s_lo.label == "turn" and s_hi.label == "turn"
            and s_lo.g * s_hi.g < 0.0):
        # the sign structure moved under the tighter tolerance: rebracket
        # around the best tight root estimate available
        turns = [(abs(s.g), b) for s, b in ((s_lo, b_lo), (s_hi, b_hi))
                 if s.label == "turn"]
        center = min(turns)[1] if turns else 0.5 * (b_lo + b_hi)
        nb = _rebracket_near(params, a, center, rtol, atol)
        if nb is None:
            raise NoConvergence(
                f"could not re-establish a TURN/TURN bracket at a={a}"
            )
        b_lo, s_lo, b_hi, s_hi = nb
    f_lo, f_hi = s_lo.g, s_hi.g
    best = None
    side = 0
    stale = 0
    collapsed = False
    for _ in range(60):
        if f_hi != f_lo:
            b_new = b_hi - f_hi * (b_hi - b_lo) / (f_hi - f_lo)
        else:
            b_new = 0.5 * (b_lo + b_hi)
        lo, hi = min(b_lo, b_hi), max(b_lo, b_hi)
        if not (lo < b_new < hi):
            b_new = 0.5 * (b_lo + b_hi)
        s_new = _classify(params, a, b_new, rtol, atol)
        if s_new.label == "turn":
            f_new = s_new.g
            if best is None or abs(f_new) < abs(best[1].g):
                best = (b_new, s_new)
                stale = 0
            else:
                stale += 1
                if best_effort and stale >= 12:
                    break  # |g| stopped improving: conditioning floor
            if abs(f_new) <= tol:
                break
        elif s_new.label == "crash":
            f_new = -(abs(f_lo) + abs(f_hi))  # extends the g<0 side
        elif s_new.label == "escape":
            f_new = abs(f_lo) + abs(f_hi)
        else:
            raise NoConvergence(f"lost the trajectory at a={a}, b={b_new}")
        if f_new * f_hi < 0.0:
            b_lo, f_lo = b_new, f_new
            if side == -1:
                f_hi *= 0.5  # Illinois damping of the stale endpoint
            side = -1
        else:
            b_hi, f_hi = b_new, f_new
            if side == 1:
                f_lo *= 0.5
            side = 1
        if abs(b_hi - b_lo) < 8.0 * math.ulp(max(abs(b_lo), abs(b_hi))):
            collapsed = True  # b resolved to machine precision
            break
    if best is None:
        raise NoConvergence(f"no turning trajectory found near the root, a={a}")
    if abs(best[1].g) > tol and not (best_effort or collapsed):
        raise NoConvergence(
            f"shooting iterations exhausted at a={a}; "
            f"best |g|={abs(best[1].g):.3e} > tol={tol}"
        )
    return best


def shoot(
    params: DimensionParams,
    a: float,
    tol: float = 1e-9,
    b_hint: float | None = None,
    defect_target: float = 1e-6,
) -> DelaunayOrbit:
    """Compute the periodic orbit with maximum value ``a``.

    ``tol`` is the tolerance on the shooting objective g(b) = v'''(t*); the
    integrator runs at rtol = min(tol * 1e-2, 1e-10).  When the measured
    full-period defect exceeds ``defect_target`` the whole chain is
    re-tightened down to rtol = 1e-14; past that the defect is limited by the
    orbit's own conditioning and reported as achieved.  ``b_hint`` (from a
    nearby solve) skips the coarse scan when it still brackets the root.
    """
    _validate_a(params, a)
    if not tol > 0.0:
        raise InvalidParameter("tol must be positive")
    rtol = max(min(tol * 1e-2, 1e-10), 1e-14)
    atol = max(1e-14, rtol * 1e-2)

    bracket = _bracket_root(params, a, b_hint)
    b_root, shot = _secant_on_g(params, a, bracket, tol, rtol, atol)
    orbit = _finalize_orbit(params, a, b_root, shot, rtol, atol)

    for g_tol, rt in _ESCALATION:
        if not math.isfinite(orbit.defect):
            break  # closure unverifiable at this conditioning; rungs cannot help
        if orbit.defect <= defect_target or rt >= rtol:
            break
        at = 1e-14
        nb = _rebracket_near(params, a, orbit.b, rt, at)
        if nb is None:
            break
        try:
            b_root, shot = _secant_on_g(
                params, a, nb, g_tol, rt, at, best_effort=True
            )
            cand = _finalize_orbit(params, a, b_root, shot, rt, at)
        except NumericalError:
            break
        rtol = rt
        stalled = cand.defect > 0.9 * orbit.defect
        if cand.defect < orbit.defect:
            orbit = cand
        if stalled:
            break  # conditioning floor reached; tighter rungs cannot help
    return orbit


def _finalize_orbit(
    params: DimensionParams,
    a: float,
    b: float,
    shot: _Shot,
    rtol: float,
    atol: float,
) -> DelaunayOrbit:
    t_star = shot.t_star
    t_a = 2.0 * t_star
    eps_a = shot.state.v

    # full-period audit: the closure defect is measured, not assumed from
    # symmetry; the volume accumulator rides along.  One tight integration is
    # cheap, so the audit always runs at the tightest admissible tolerance,
    # independent of the solve chain.
    audit_rtol = 1e-14
    audit_atol = 1e-14
    s0 = CylinderState(0.0, a, 0.0, b, 0.0)
    traj = integrate(
        params,
        s0,
        t_a,
        audit_rtol,
        audit_atol,
        events=[floor_event(), ceiling_event(1.0 + V_CEILING_MARGIN)],
        track_volume=True,
    )
    y0 = np.array([a, 0.0, b, 0.0])
    if traj.terminal == "t_end":
        defect = float(np.max(np.abs(traj.ys[-1][:4] - y0)))
    elif traj.t_final > t_star:
        # the audit left the admissible region in the second half: at this
        # conditioning (error amplification ~ exp(n T / 2)) the closure is
        # unverifiable in float64; record that honestly instead of failing
        defect = math.inf
    else:
        raise NoConvergence(
            f"period audit left the admissible region ({traj.terminal}) "
            f"before the half period at a={a}"
        )
    i_a = 2.0 * float(traj.eval(t_star)[4])
    h = hamiltonian(params, s0)

    # sample grid built by even reflection about t = 0 and t = t*: only the
    # well-conditioned first half of the trajectory enters, the grid is
    # exactly periodic and exactly symmetric, and the remaining seam defect
    # is the v''' residual of the shooting objective (third-derivative only)
    ts = np.linspace(0.0, t_a, N_ORBIT_SAMPLES, endpoint=False)
    dense = np.empty((N_ORBIT_SAMPLES, 4))
    for i, t in enumerate(ts):
        if t <= t_star:
            dense[i] = traj.eval(t)[:4]
        else:
            y = traj.eval(t_a - t)[:4]
            dense[i] = (y[0], -y[1], y[2], -y[3])
    orbit = DelaunayOrbit(
        a=a, b=b, t_a=t_a, eps_a=eps_a, h=h, i_a=i_a, defect=defect,
        max_drift=traj.max_drift,
        ts=ts, vs=dense[:, 0], v1s=dense[:, 1], v2s=dense[:, 2],
        v3s=dense[:, 3], trajectory=traj,
    )
    _audit_orbit(params, orbit)
    return orbit


def _audit_orbit(params: DimensionParams, orbit: DelaunayOrbit) -> None:
    checks = [
        (orbit.b < 0.0, f"shooting unknown b={orbit.b} not negative"),
        (
            0.0 < orbit.eps_a < params.v_cyl,
            f"minimum eps={orbit.eps_a} not inside (0, v_cyl)",
        ),
        (
            params.h_cyl < orbit.h < 0.0,
            f"energy level {orbit.h} outside (h_cyl, 0)",
        ),
        (
            float(np.max(orbit.vs)) <= 1.0 + 1e-8,
            f"profile exceeds 1: sup={float(np.max(orbit.vs))}",
        ),
    ]
    for ok, msg in checks:
        if not ok:
            raise NoConvergence(f"orbit audit failed at a={orbit.a}: {msg}")


def orbit_for_period(
    params: DimensionParams,
    T: float,
    tol: float = 1e-6,
    shoot_tol: float = 1e-9,
) -> DelaunayOrbit:
    """Invert the period map: the orbit whose period matches ``T``.

    Valid only for T above the linear period t_cyl (below it the constant
    solution is the only one).  Relies on the strict monotonicity of the
    period in ``a``.  The iteration runs in s = ln(1 - a), in which the
    near-homoclinic period growth is asymptotically linear, with loose
    intermediate solves; only the final orbit is shot at ``shoot_tol``.
    """
    if not math.isfinite(T) or T <= params.t_cyl * (1.0 + 1e-12):
        raise InvalidParameter(
            f"period T={T!r} must exceed the linear period {params.t_cyl:.9g}"
        )
    v_cyl = params.v_cyl
    probe_tol = max(shoot_tol, 1e-7)
    state = {"b_hint": None}

    def period_at(a: float, tight: bool = False) -> DelaunayOrbit:
        # intermediate evaluations only need the period: skip the
        # defect-driven refinement ladder there
        orb = shoot(params, a, shoot_tol if tight else probe_tol,
                    b_hint=state["b_hint"],
                    defect_target=1e-6 if tight else math.inf)
        state["b_hint"] = orb.b
        return orb

    fracs = (0.3, 0.9, 0.99, 0.999, 0.9999)
    s_lo = f_lo = None
    s_hi = f_hi = None
    a_probe = None
    for frac in fracs:
        a_probe = v_cyl + (1.0 - v_cyl) * frac
        orb = period_at(a_probe)
        s = math.log(1.0 - a_probe)
        if orb.t_a >= T:
            s_hi, f_hi = s, orb.t_a - T
            break
        s_lo, f_lo = s, orb.t_a - T
    if s_hi is None:
        raise NoConvergence(f"period T={T} not reached by a <= {a_probe}")
    if s_lo is None:
        # the first probe overshot; the linear-period limit anchors below
        s_lo, f_lo = math.log(1.0 - (v_cyl + _A_MARGIN)), params.t_cyl - T

    # T increases with a, hence decreases with s: f_lo < 0 < f_hi, s_hi < s_lo
    best = None
    side = 0
    for _ in range(48):
        if f_hi != f_lo:
            s_new = s_hi - f_hi * (s_hi - s_lo) / (f_hi - f_lo)
        else:
            s_new = 0.5 * (s_lo + s_hi)
        if not (min(s_lo, s_hi) < s_new < max(s_lo, s_hi)):
            s_new = 0.5 * (s_lo + s_hi)
        a_new = 1.0 - math.exp(s_new)
        close_enough = best is not None and abs(best[1]) <= 0.5 * tol * T
        orb = period_at(a_new, tight=close_enough)
        f_new = orb.t_a - T
        if best is None or abs(f_new) < abs(best[1]):
            best = (orb, f_new, close_enough)
        if abs(f_new) <= tol * T:
            if close_enough:
                return orb
            final = period_at(orb.a, tight=True)
            if abs(final.t_a - T) <= tol * T:
                return final
            f_new = final.t_a - T
            best = (final, f_new, True)
        if f_new * f_hi < 0.0:
            s_lo, f_lo = s_new, f_new
            if side == -1:
                f_hi *= 0.5
            side = -1
        else:
            s_hi, f_hi = s_new, f_new
            if side == 1:
                f_lo *= 0.5
            side = 1
    raise NoConvergence(
        f"period inversion did not reach |t_a - T| <= {tol * T:.3e}; "
        f"best residual {abs(best[1]) if best else math.inf:.3e}"
    )


@dataclass
class SweepReport:
    """A family of orbits over an a-grid plus invariant values and verdicts.

    ``orbits[i]`` is None when grid point i failed; the failure is recorded
    as (a, exception class name, message).  ``y_values`` holds the conformal
    invariant of each successful orbit.  ``verdicts`` are the family-level
    audits; ``audits`` the worst-case numbers behind them.
    """

    n: int
    a_grid: np.ndarray
    orbits: list[DelaunayOrbit | None]
    failures: list[tuple[float, str, str]]
    y_values: list[float | None]
    verdicts: dict[str, bool]
    audits: dict[str, float]

    def ok(self) -> bool:
        return all(self.verdicts.values())

    def successful(self) -> list[DelaunayOrbit]:
        return [o for o in self.orbits if o is not None]

    def to_csv(self) -> str:
        lines = ["a,b,T_a,eps_a,H,I_a,defect"]
        for orb in self.orbits:
            if orb is None:
                continue
            row = (orb.a, orb.b, orb.t_a, orb.eps_a, orb.h, orb.i_a, orb.defect)
            lines.append(",".join(format(float(c), ".17g") for c in row))
        return "\n".join(lines) + "\n"


def sweep(
    params: DimensionParams,
    a_grid: Sequence[float],
    tol: float = 1e-9,
    defect_tol: float = 1e-6,
) -> SweepReport:
    """Shoot every grid point, auditing the family-level invariants.

    Per-point failures are recorded, not propagated, so one degenerate grid
    point does not abort the sweep.  The grid itself must be strictly
    increasing.
    """
    a_grid = np.asarray(list(a_grid), dtype=float)
    if a_grid.ndim != 1 or a_grid.size == 0:
        raise InvalidParameter("a_grid must be a non-empty 1-d sequence")
    if a_grid.size > 1 and not np.all(np.diff(a_grid) > 0.0):
        raise InvalidParameter("a_grid must be strictly increasing")

    orbits: list[DelaunayOrbit | None] = []
    failures: list[tuple[float, str, str]] = []
    y_values: list[float | None] = []
    solved: list[tuple[float, float]] = []  # (a, b) of successes, for hints
    for a in a_grid:
        if len(solved) >= 2:
            (a1, b1), (a2, b2) = solved[-2], solved[-1]
            b_hint = b2 + (b2 - b1) / (a2 - a1) * (float(a) - a2)
            if not b_hint < 0.0:
                b_hint = b2
        elif solved:
            b_hint = solved[-1][1]
        else:
            b_hint = None
        try:
            orb = shoot(params, float(a), tol, b_hint=b_hint,
                        defect_target=defect_tol)
            solved.append((float(a), orb.b))
            orbits.append(orb)
            y_values.append(functionals.invariant_value(params, orb))
        except (InvalidParameter, NumericalError) as exc:
            orbits.append(None)
            y_values.append(None)
            failures.append((float(a), type(exc).__name__, str(exc)))

    good = [o for o in orbits if o is not None]
    audits: dict[str, float] = {}
    verdicts: dict[str, bool] = {}

    t_as = [o.t_a for o in good]
    eps = [o.eps_a for o in good]
    verdicts["t_a_increasing"] = all(t2 > t1 for t1, t2 in zip(t_as, t_as[1:]))
    verdicts["eps_decreasing"] = all(e2 < e1 for e1, e2 in zip(eps, eps[1:]))
    verdicts["h_in_range"] = all(params.h_cyl < o.h < 0.0 for o in good)
    sup_v = max((float(np.max(o.vs)) for o in good), default=0.0)
    audits["sup_v"] = sup_v
    verdicts["sup_bounded"] = sup_v <= 1.0 + 1e-8
    max_defect = max((o.defect for o in good), default=0.0)
    audits["max_defect"] = max_defect
    verdicts["defects_ok"] = max_defect <= defect_tol

    flat = 0.0
    sym = 0.0
    for o in good:
        hs = o.energy_values(params)
        flat = max(flat, float(np.max(np.abs(hs - o.h))) / max(1.0, abs(o.h)))
        mirrored = np.roll(o.vs[::-1], 1)
        sym = max(sym, float(np.max(np.abs(o.vs - mirrored))))
    audits["max_energy_flatness"] = flat
    verdicts["energy_flat"] = flat <= 1e-8
    audits["max_symmetry_dev"] = sym
    verdicts["symmetric"] = sym <= 1e-8

    nested = True
    for o1, o2 in zip(good, good[1:]):
        # inner interval strictly contained in the outer one
        if not (o2.eps_a < o1.eps_a and o1.a < o2.a):
            nested = False
    for o1, o2 in zip(good, good[1:]):
        if closed_polylines_cross(o1.phase_polyline(), o2.phase_polyline()):
            nested = False
    verdicts["nested"] = nested

    ys = [y for y in y_values if y is not None]
    verdicts["y_below_sphere"] = all(y < params.y_sph for y in ys)

    return SweepReport(
        n=params.n,
        a_grid=a_grid,
        orbits=orbits,
        failures=failures,
        y_values=y_values,
        verdicts=verdicts,
        audits=audits,
    )
