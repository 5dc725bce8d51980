"""Adaptive Dormand-Prince 5(4) integration with dense output and events.

The stepper is self-contained: the classic explicit 5(4) embedded pair, the
free 4th-order continuous extension, PI step-size control, and event location
by sign change on the dense output refined with bisection.  Shooting performs
thousands of short integrations, so the hot loop works on raw float arrays;
states are boxed into :class:`~qdelaunay.dynamics.CylinderState` only at the
API surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dynamics import CylinderState, hamiltonian_values, make_rhs
from .errors import (
    InvalidParameter,
    MaxStepsExceeded,
    NonPositiveV,
    NoTurningPoint,
    StepFloor,
)
from .params import DimensionParams

__all__ = [
    "EventSpec",
    "Trajectory",
    "integrate",
    "integrate_raw",
    "first_turning_point",
    "turning_event",
    "floor_event",
    "ceiling_event",
]

# Dormand-Prince 5(4) tableau.
_C = (0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0)
_A = (
    np.array(()),
    np.array((0.2,)),
    np.array((3.0 / 40.0, 9.0 / 40.0)),
    np.array((44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0)),
    np.array((19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0,
              -212.0 / 729.0)),
    np.array((9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0,
              -5103.0 / 18656.0)),
    np.array((35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0,
              -2187.0 / 6784.0, 11.0 / 84.0)),
)
# embedded error weights (5th-order minus 4th-order solution)
_E = np.array((71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0,
               -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0))
# stage weights of the quartic term of the free interpolant; the cubic-Hermite
# part is rebuilt from endpoint values and slopes.  Validated in the tests by
# exact reproduction of quartic polynomial solutions.
_D = np.array((-12715105075.0 / 11282082432.0, 0.0,
               87487479700.0 / 32700410799.0, -10690763975.0 / 1880347072.0,
               701980252875.0 / 199316789632.0, -1453857185.0 / 822651844.0,
               69997945.0 / 29380423.0))

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_PI_ALPHA = 0.17  # error exponent of the PI controller
_PI_BETA = 0.04   # memory exponent
_H_FLOOR = 1e-13
_DEFAULT_MAX_STEPS = 10_000_000
_EVENT_SUBSAMPLES = 16  # dense subsamples used to isolate a detected crossing


@dataclass(frozen=True)
class EventSpec:
    """Terminal event located on the dense output.

    kind
        ``turning_point`` (v1 crosses zero, either direction),
        ``v_floor_hit`` (v falls to ``level``), or
        ``v_ceiling_hit`` (v rises to ``level``).
    root_tol
        absolute tolerance in t for the bisection refinement.
    arm_eps
        for turning points, |v1| must first exceed this threshold so the
        departure critical point is not re-detected.
    level
        threshold value of v for floor/ceiling kinds.
    """

    kind: str
    root_tol: float = 1e-13
    arm_eps: float = 0.0
    level: float = 0.0

    def __post_init__(self):
        if self.kind not in ("turning_point", "v_floor_hit", "v_ceiling_hit"):
            raise InvalidParameter(f"unknown event kind {self.kind!r}")
        if not self.root_tol > 0.0:
            raise InvalidParameter("root_tol must be positive")


def turning_event(
    params: DimensionParams, v2_scale: float, root_tol: float = 1e-13
) -> EventSpec:
    """Turning-point event with the standard arming threshold.

    arm_eps = 1e-7 * max(1, |v''(0)|) * t_cyl keeps the departure critical
    point from re-triggering while staying far below the velocity scale of
    even near-constant orbits.
    """
    arm = 1e-7 * max(1.0, abs(v2_scale)) * params.t_cyl
    return EventSpec("turning_point", root_tol=root_tol, arm_eps=arm)


def floor_event(level: float = 1e-6) -> EventSpec:
    return EventSpec("v_floor_hit", level=level)


def ceiling_event(level: float) -> EventSpec:
    return EventSpec("v_ceiling_hit", level=level)


class _DenseSegment:
    """Continuous extension over one accepted step (Hermite + quartic bump)."""

    __slots__ = ("t0", "h", "y0", "delta", "b", "c", "d")

    def __init__(self, t0, h, y0, y1, k):
        self.t0 = t0
        self.h = h
        self.y0 = y0
        self.delta = y1 - y0
        self.b = h * k[0] - self.delta
        self.c = 2.0 * self.delta - h * (k[0] + k[6])
        self.d = h * (k.T @ _D)

    def eval(self, t: float) -> np.ndarray:
        th = (t - self.t0) / self.h
        th1 = 1.0 - th
        return self.y0 + th * (
            self.delta + th1 * (self.b + th * (self.c + th1 * self.d))
        )

    def eval_component(self, ts: np.ndarray, j: int) -> np.ndarray:
        th = (ts - self.t0) / self.h
        th1 = 1.0 - th
        return self.y0[j] + th * (
            self.delta[j] + th1 * (self.b[j] + th * (self.c[j] + th1 * self.d[j]))
        )


class Trajectory:
    """Dense integrator output with step statistics and an energy-drift audit.

    Samples at accepted steps are exposed both as raw arrays (``ts``, ``ys``)
    and as :class:`CylinderState` values; ``eval`` / ``eval_many`` query the
    dense output anywhere inside the integrated span.  ``terminal`` records
    exactly one termination reason: ``"t_end"`` or the kind of the triggering
    event.
    """

    def __init__(self, ts, ys, segments, terminal, steps_accepted,
                 steps_rejected, energies=None):
        self.ts = np.asarray(ts, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        self._segments = segments
        self.terminal = terminal
        self.steps_accepted = steps_accepted
        self.steps_rejected = steps_rejected
        self.energies = None if energies is None else np.asarray(energies)
        if self.energies is not None and self.energies.size:
            self.h0 = float(self.energies[0])
            self.max_drift = float(np.max(np.abs(self.energies - self.h0)))
        else:
            self.h0 = math.nan
            self.max_drift = math.nan
        self.ts.flags.writeable = False
        self.ys.flags.writeable = False
        if segments:
            sgn = 1.0 if segments[0].h >= 0.0 else -1.0
            self._sgn = sgn
            self._starts = np.array([sgn * s.t0 for s in segments])
        else:
            self._sgn = 1.0
            self._starts = np.zeros(0)

    @property
    def t_final(self) -> float:
        return float(self.ts[-1])

    @property
    def dim(self) -> int:
        return self.ys.shape[1]

    @property
    def states(self) -> list[CylinderState]:
        return [
            CylinderState(float(t), *map(float, y[:4]))
            for t, y in zip(self.ts, self.ys)
        ]

    def final_state(self) -> CylinderState:
        return CylinderState(float(self.ts[-1]), *map(float, self.ys[-1][:4]))

    def eval(self, t: float) -> np.ndarray:
        """Dense-output state vector at time t inside the integrated span."""
        if not self._segments:
            return self.ys[0].copy()
        lo = min(self.ts[0], self.ts[-1])
        hi = max(self.ts[0], self.ts[-1])
        slack = 1e-9 * max(1.0, abs(lo), abs(hi))
        if not (lo - slack <= t <= hi + slack):
            raise InvalidParameter(f"t={t} outside integrated span [{lo}, {hi}]")
        i = int(np.searchsorted(self._starts, self._sgn * t, side="right") - 1)
        i = min(max(i, 0), len(self._segments) - 1)
        return self._segments[i].eval(t)

    def eval_many(self, ts: Sequence[float]) -> np.ndarray:
        return np.array([self.eval(float(t)) for t in ts])

    def to_csv(self) -> str:
        """CSV of the accepted steps: columns t,v,v1,v2,v3,H."""
        lines = ["t,v,v1,v2,v3,H"]
        for i, (t, y) in enumerate(zip(self.ts, self.ys)):
            h_val = self.energies[i] if self.energies is not None else math.nan
            cells = (t, y[0], y[1], y[2], y[3], h_val)
            lines.append(",".join(format(float(c), ".17g") for c in cells))
        return "\n".join(lines) + "\n"


def _initial_step(rhs, t0, y0, f0, t_bound, rtol, atol):
    """Hairer-style automatic initial step selection."""
    span = abs(t_bound - t0)
    direction = 1.0 if t_bound > t0 else -1.0
    sc = atol + rtol * np.abs(y0)
    d0 = math.sqrt(float(np.mean((y0 / sc) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / sc) ** 2)))
    h0 = 1e-6 * span if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, span)
    try:
        f1 = rhs(t0 + direction * h0, y0 + direction * h0 * f0)
        d2 = math.sqrt(float(np.mean(((f1 - f0) / sc) ** 2))) / h0
    except NonPositiveV:
        d2 = 1.0 / h0
    dm = max(d1, d2)
    h1 = (0.01 / dm) ** 0.2 if dm > 1e-15 else max(1e-6, h0 * 1e-3)
    return min(100.0 * h0, h1, span)


class _EventTracker:
    """Arming state plus crossing detection for one event."""

    def __init__(self, spec: EventSpec):
        self.spec = spec
        self.armed = spec.kind != "turning_point"
        self._j = 1 if spec.kind == "turning_point" else 0
        self._lvl = 0.0 if spec.kind == "turning_point" else spec.level

    def check(self, seg: _DenseSegment, t0: float, t1: float,
              y0: np.ndarray, y1: np.ndarray):
        """Earliest event time in (t0, t1], or None.

        Triggering is decided on the accepted-step endpoints (steps are small
        against the orbit scale, so crossings are transversal within a step);
        the crossing is then isolated on dense subsamples and bisected.
        """
        g0 = float(y0[self._j]) - self._lvl
        g1 = float(y1[self._j]) - self._lvl
        if not self.armed:
            if abs(g1) >= self.spec.arm_eps:
                self.armed = True
            return None
        if g0 == 0.0 or g0 * g1 > 0.0:
            return None
        # sign change (or exact zero at the right endpoint): isolate it
        ts = np.linspace(t0, t1, _EVENT_SUBSAMPLES + 1)
        gs = seg.eval_component(ts, self._j) - self._lvl
        gs[0], gs[-1] = g0, g1
        for i in range(len(ts) - 1):
            if gs[i] * gs[i + 1] < 0.0:
                return self._bisect(seg, ts[i], ts[i + 1], gs[i])
            if gs[i + 1] == 0.0:
                return float(ts[i + 1])
        return None

    def _bisect(self, seg, ta, tb, ga) -> float:
        tol = max(self.spec.root_tol, 5e-14 * max(1.0, abs(tb)))
        while abs(tb - ta) > tol:
            tm = 0.5 * (ta + tb)
            gm = float(seg.eval(tm)[self._j]) - self._lvl
            if gm == 0.0:
                return tm
            if ga * gm < 0.0:
                tb = tm
            else:
                ta, ga = tm, gm
        return 0.5 * (ta + tb)


def integrate_raw(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: np.ndarray,
    t_end: float,
    rtol: float,
    atol: float,
    events: Sequence[EventSpec] = (),
    max_steps: int = _DEFAULT_MAX_STEPS,
):
    """Generic driver; returns (ts, ys, segments, terminal, n_acc, n_rej).

    Events act on components 0 (v) and 1 (v1) of the state vector, matching
    the cylinder system layout (augmented systems keep that prefix).  Raises
    NonPositiveV when the right-hand side rejects the state persistently and
    no floor event is registered to catch the crash earlier.
    """
    if not (1e-14 <= rtol <= 1e-3) or not (1e-14 <= atol <= 1e-3):
        raise InvalidParameter(
            f"tolerances must lie in [1e-14, 1e-3]; got rtol={rtol}, atol={atol}"
        )
    y = np.array(y0, dtype=float)
    t = float(t0)
    f0 = rhs(t, y)
    if t_end == t0:
        return [t], [y.copy()], [], "t_end", 0, 0

    direction = 1.0 if t_end > t0 else -1.0
    h = _initial_step(rhs, t, y, f0, t_end, rtol, atol) * direction
    trackers = [_EventTracker(spec) for spec in events]

    k = np.empty((7, y.size))
    k[0] = f0
    ts, ys = [t], [y.copy()]
    segments: list[_DenseSegment] = []
    errold = 1e-4
    n_acc = n_rej = 0
    n_attempt = 0
    consecutive_rej = 0
    positivity_failure = False
    terminal = None

    def _give_up(context: str):
        if positivity_failure:
            raise NonPositiveV(
                f"state fell below the positivity floor near t={t:.9g} "
                f"({context}, no floor event registered)"
            )
        raise StepFloor(f"{context} at t={t:.9g}")

    while terminal is None:
        n_attempt += 1
        if n_attempt > max_steps:
            raise MaxStepsExceeded(f"exceeded {max_steps} step attempts")
        remaining = t_end - t
        is_last = False
        if abs(h) >= abs(remaining):
            h = remaining
            is_last = True
        elif abs(remaining) - abs(h) < 0.1 * abs(h):
            h = 0.5 * remaining  # avoid a microscopic final step
        if abs(h) < _H_FLOOR:
            _give_up(f"required step {abs(h):.3e} below floor")

        failed = False
        err = math.inf
        try:
            for i in range(1, 7):
                dy = k[:i].T @ _A[i]
                if i < 6:
                    k[i] = rhs(t + _C[i] * h, y + h * dy)
                else:
                    y1 = y + h * dy
                    k[6] = rhs(t + h, y1)
            err_vec = h * (k.T @ _E)
            sc = atol + rtol * np.maximum(np.abs(y), np.abs(y1))
            err = math.sqrt(float(np.mean((err_vec / sc) ** 2)))
            if not math.isfinite(err):
                failed = True
        except NonPositiveV:
            failed = True
            positivity_failure = True

        if failed or err > 1.0:
            n_rej += 1
            consecutive_rej += 1
            if consecutive_rej > 200:
                _give_up("persistent step failure")
            h *= 0.25 if failed else max(_MIN_FACTOR,
                                         _SAFETY * err ** (-_PI_ALPHA))
            continue

        # accepted
        consecutive_rej = 0
        positivity_failure = False
        n_acc += 1
        seg = _DenseSegment(t, h, y.copy(), y1.copy(), k.copy())
        segments.append(seg)
        t_new = t_end if is_last else t + h  # land exactly, no 1-ulp residue

        hit_t, hit_kind = None, None
        for tr in trackers:
            t_ev = tr.check(seg, t, t_new, y, y1)
            if t_ev is not None and (
                hit_t is None or (t_ev - hit_t) * direction < 0.0
            ):
                hit_t, hit_kind = t_ev, tr.spec.kind
        if hit_t is not None:
            ts.append(hit_t)
            ys.append(seg.eval(hit_t))
            terminal = hit_kind
            break

        ts.append(t_new)
        ys.append(y1.copy())
        if err == 0.0:
            fac = _MAX_FACTOR
        else:
            fac = _SAFETY * err ** (-_PI_ALPHA) * errold ** _PI_BETA
            fac = min(_MAX_FACTOR, max(_MIN_FACTOR, fac))
        errold = max(err, 1e-10)
        k[0] = k[6]
        y = y1
        t = t_new
        h *= fac
        if t == t_end:
            terminal = "t_end"

    return ts, ys, segments, terminal, n_acc, n_rej


def integrate(
    params: DimensionParams,
    s0: CylinderState,
    t_end: float,
    rtol: float,
    atol: float,
    events: Sequence[EventSpec] = (),
    track_volume: bool = False,
    max_steps: int = _DEFAULT_MAX_STEPS,
) -> Trajectory:
    """Integrate the cylinder system from ``s0`` until ``t_end`` or an event.

    The returned trajectory records the energy at every accepted step and the
    maximum drift from the initial energy.  With ``track_volume`` an auxiliary
    accumulator z, z' = v^p_sharp, rides along as a fifth component.
    """
    rhs = make_rhs(params, track_volume=track_volume)
    y0 = np.array(
        [s0.v, s0.v1, s0.v2, s0.v3] + ([0.0] if track_volume else [])
    )
    ts, ys, segments, terminal, n_acc, n_rej = integrate_raw(
        rhs, s0.t, y0, t_end, rtol, atol, events, max_steps
    )
    ys_arr = np.asarray(ys)
    energies = hamiltonian_values(
        params, ys_arr[:, 0], ys_arr[:, 1], ys_arr[:, 2], ys_arr[:, 3]
    )
    return Trajectory(ts, ys_arr, segments, terminal, n_acc, n_rej, energies)


def first_turning_point(
    params: DimensionParams,
    s0: CylinderState,
    rtol: float,
    atol: float,
    t_max: float,
) -> tuple[float, CylinderState]:
    """First t* in (0, t_max] with v1(t*) = 0 again, starting from v1(0) = 0.

    Arming prevents the departure critical point from re-triggering.  Raises
    NoTurningPoint when t_max is reached first and NonPositiveV when the
    trajectory crashes — the latter is meaningful shooting feedback, not a
    program failure.
    """
    events = [turning_event(params, s0.v2), floor_event()]
    traj = integrate(params, s0, s0.t + t_max, rtol, atol, events)
    if traj.terminal == "turning_point":
        return traj.t_final - s0.t, traj.final_state()
    if traj.terminal == "v_floor_hit":
        raise NonPositiveV(
            f"trajectory crashed to the floor at t={traj.t_final - s0.t:.6g}"
        )
    raise NoTurningPoint(f"no turning point before t_max={t_max}")
