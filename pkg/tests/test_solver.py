import numpy as np
import pytest

from qdelaunay._geom import closed_polylines_cross
from qdelaunay.errors import InvalidParameter
from qdelaunay.params import v_sph_profile
from qdelaunay.solver import orbit_for_period, shoot, sweep


def test_shoot_basic_orbit(p5, orbit09):
    orb = orbit09
    assert -(p5.n - 4) / 2.0 < orb.b < 0.0
    assert orb.defect <= 1e-6
    assert 0.0 < orb.eps_a < p5.v_cyl < orb.a
    assert p5.h_cyl < orb.h < 0.0
    assert float(np.max(orb.vs)) <= 1.0 + 1e-8
    assert orb.t_a > p5.t_cyl
    assert len(orb.vs) == 512


def test_shoot_self_consistency(p5, orbit09):
    # recomputing at a tenfold tighter objective leaves the period unchanged
    orb2 = shoot(p5, 0.9, tol=1e-10)
    assert orb2.t_a == pytest.approx(orbit09.t_a, abs=1e-7)
    assert orb2.b == pytest.approx(orbit09.b, abs=1e-9)


def test_shoot_with_hint(p5, orbit09):
    orb = shoot(p5, 0.9, b_hint=orbit09.b)
    assert orb.t_a == pytest.approx(orbit09.t_a, abs=1e-9)


def test_shoot_near_cylinder_period(p5):
    orb = shoot(p5, p5.v_cyl + 1e-3)
    assert orb.t_a == pytest.approx(p5.t_cyl, rel=5e-3)
    assert orb.eps_a == pytest.approx(p5.v_cyl, abs=5e-3)


def test_shoot_near_sphere(p5, orbit09):
    # period blow-up and minimum collapse toward the homoclinic profile
    # (measured growth: T(1 - 1e-3) = 2.65 t_cyl, slower than a naive
    # 3 t_cyl guess but unambiguous against T(0.9) = 1.04 t_cyl)
    orb = shoot(p5, 1.0 - 1e-3)
    assert orb.t_a > 2.5 * p5.t_cyl  # period blow-up
    assert orb.t_a > 2.0 * orbit09.t_a
    assert orb.eps_a < 0.5 * orbit09.eps_a  # minimum collapse
    assert orb.b == pytest.approx(-0.5, abs=0.05)  # approaching the sphere jet


def test_shoot_argument_validation(p5):
    for a in (p5.v_cyl, p5.v_cyl - 0.1, 1.0, 1.5, 0.2):
        with pytest.raises(InvalidParameter):
            shoot(p5, a)
    with pytest.raises(InvalidParameter):
        shoot(p5, 0.9, tol=-1.0)


def test_energy_flat_along_orbit(p5, orbit09):
    hs = orbit09.energy_values(p5)
    assert float(np.max(np.abs(hs - orbit09.h))) <= 1e-8 * max(1.0, abs(orbit09.h))


def test_orbit_symmetry(p5, orbit09):
    # even about the half period on the sample grid
    mirrored = np.roll(orbit09.vs[::-1], 1)
    assert float(np.max(np.abs(orbit09.vs - mirrored))) <= 1e-8
    mirrored_v1 = -np.roll(orbit09.v1s[::-1], 1)
    assert float(np.max(np.abs(orbit09.v1s - mirrored_v1))) <= 1e-8


def test_orbit_state_at_periodicity(p5, orbit09):
    y0 = orbit09.state_at(0.0)
    for k in (-2, 1, 3):
        yk = orbit09.state_at(k * orbit09.t_a)
        assert np.max(np.abs(yk - y0)) <= 1e-9


def test_volume_integral_consistency(p5, orbit09):
    # the accumulator value over one period matches the sample quadrature
    quad = float(np.mean(orbit09.vs ** p5.p_sharp)) * orbit09.t_a
    assert orbit09.i_a == pytest.approx(quad, rel=1e-7)


def test_uniform_convergence_to_sphere(p5):
    # max over [-2, 2] of |v_a - v_sph| decreases as a -> 1
    ts = np.linspace(-2.0, 2.0, 81)
    devs = []
    b_hint = None
    for k in (2, 3, 4):
        orb = shoot(p5, 1.0 - 10.0 ** (-k), b_hint=b_hint)
        b_hint = orb.b
        dev = max(
            abs(orb.state_at(t)[0] - v_sph_profile(p5, t)) for t in ts
        )
        devs.append(dev)
    assert devs[0] > devs[1] > devs[2]


def test_orbit_for_period(p5):
    target = 1.5 * p5.t_cyl
    orb = orbit_for_period(p5, target)
    assert orb.t_a == pytest.approx(target, rel=1e-6)
    assert p5.v_cyl < orb.a < 1.0


def test_orbit_for_period_rejects_short_periods(p5):
    with pytest.raises(InvalidParameter):
        orbit_for_period(p5, p5.t_cyl)
    with pytest.raises(InvalidParameter):
        orbit_for_period(p5, 0.5 * p5.t_cyl)


def test_two_orbits_on_one_circumference(p5):
    # circumference 2.5 t_cyl carries the fundamental orbit and the
    # double-cover of the orbit with half that period
    T = 2.5 * p5.t_cyl
    orb1 = orbit_for_period(p5, T)
    orb2 = orbit_for_period(p5, T / 2.0)
    assert orb1.t_a == pytest.approx(T, rel=1e-6)
    assert orb2.t_a == pytest.approx(T / 2.0, rel=1e-6)
    assert orb1.a > orb2.a


def test_sweep_singleton_equals_shoot(p5, orbit09):
    rep = sweep(p5, [0.9])
    assert not rep.failures
    orb = rep.orbits[0]
    assert orb.t_a == pytest.approx(orbit09.t_a, abs=1e-9)
    assert rep.y_values[0] is not None


def test_sweep_marks_bad_points(p5):
    rep = sweep(p5, [p5.v_cyl, 0.9])
    assert len(rep.failures) == 1
    assert rep.failures[0][1] == "InvalidParameter"
    assert rep.orbits[0] is None and rep.orbits[1] is not None


def test_sweep_grid_validation(p5):
    with pytest.raises(InvalidParameter):
        sweep(p5, [])
    with pytest.raises(InvalidParameter):
        sweep(p5, [0.9, 0.86])


def test_sweep_family_verdicts(p5):
    rep = sweep(p5, [0.86, 0.90, 0.94], defect_tol=1e-7)
    assert not rep.failures
    assert rep.ok(), rep.verdicts
    # nesting of the phase-plane projections, explicitly
    polys = [o.phase_polyline() for o in rep.successful()]
    for pa, pb in zip(polys, polys[1:]):
        assert not closed_polylines_cross(pa, pb)
    # interval nesting
    orbs = rep.successful()
    for o1, o2 in zip(orbs, orbs[1:]):
        assert o2.eps_a < o1.eps_a < o1.a < o2.a
    # periods increase, invariants below the round-sphere value
    ts = [o.t_a for o in orbs]
    assert all(b > a for a, b in zip(ts, ts[1:]))
    assert all(y < p5.y_sph for y in rep.y_values)


def test_sweep_csv(p5):
    rep = sweep(p5, [0.9])
    text = rep.to_csv()
    lines = text.strip().splitlines()
    assert lines[0] == "a,b,T_a,eps_a,H,I_a,defect"
    assert len(lines) == 2
    vals = [float(x) for x in lines[1].split(",")]
    assert vals[0] == 0.9


def test_geometry_helper():
    square = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]], dtype=float)
    inner = 0.25 + 0.5 * square
    crossing = square + np.array([0.5, 0.5])
    assert not closed_polylines_cross(square, inner)
    assert closed_polylines_cross(square, crossing)
