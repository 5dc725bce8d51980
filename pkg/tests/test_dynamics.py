import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdelaunay.dynamics import (
    CylinderState,
    hamiltonian,
    hamiltonian_flow_derivative,
    hamiltonian_gradient,
    linearized_coefficient,
    ode_residual,
    symbol_cyl,
    vector_field,
)
from qdelaunay.errors import NonPositiveV
from qdelaunay.params import make_params, v_sph_jet


def test_cylinder_is_fixed_point(p5, p6):
    for p in (p5, p6):
        s = CylinderState(0.0, p.v_cyl, 0.0, 0.0, 0.0)
        assert np.max(np.abs(vector_field(p, s))) <= 1e-15


def test_vector_field_example_n5(p5):
    # fourth component cross-checked against the fourth derivative of the
    # spherical profile at its maximum (equals 7/4 for n = 5)
    s = CylinderState(0.0, 1.0, 0.0, -0.5, 0.0)
    f = vector_field(p5, s)
    assert f[0] == 0.0 and f[1] == -0.5 and f[2] == 0.0
    assert f[3] == pytest.approx(1.75, rel=1e-14)
    assert f[3] == pytest.approx(v_sph_jet(p5, 0.0)[4], rel=1e-12)


def test_vector_field_example_n6(p6):
    s = CylinderState(0.0, p6.v_cyl, 0.1, 0.0, 0.0)
    f = vector_field(p6, s)
    assert f[0] == 0.1
    assert abs(f[1]) == 0.0 and abs(f[2]) == 0.0
    assert abs(f[3]) <= 1e-14  # only the potential terms vanish at v_cyl


def test_positivity_guard(p5):
    for v in (0.0, -0.5, 1e-13):
        with pytest.raises(NonPositiveV):
            vector_field(p5, CylinderState(0.0, v, 0.0, 0.0, 0.0))
        with pytest.raises(NonPositiveV):
            hamiltonian(p5, CylinderState(0.0, v, 0.0, 0.0, 0.0))


def test_hamiltonian_cylinder_level(p5, p6):
    for p in (p5, p6):
        s = CylinderState(0.0, p.v_cyl, 0.0, 0.0, 0.0)
        assert hamiltonian(p, s) == pytest.approx(p.h_cyl, rel=1e-12)


def test_hamiltonian_sphere_level():
    # at the spherical maximum (1, 0, -(n-4)/2, 0) the energy vanishes
    for n in range(5, 11):
        p = make_params(n)
        s = CylinderState(0.0, 1.0, 0.0, -(n - 4) / 2.0, 0.0)
        assert abs(hamiltonian(p, s)) <= 1e-12 * max(1.0, abs(p.h_cyl))


def test_hamiltonian_off_solution_value(p5):
    # direct-substitution oracle at a non-solution state
    s = CylinderState(0.0, 0.9, 0.0, 0.0, 0.0)
    expected = -(p5.c0 / 2.0) * 0.81 + (21.0 / 32.0) * 0.9 ** 10
    assert hamiltonian(p5, s) == pytest.approx(expected, rel=1e-14)


def test_ode_residual_closed_forms(p5):
    ts = np.linspace(-5.0, 5.0, 100)
    assert ode_residual(p5, lambda t: v_sph_jet(p5, t), ts) <= 1e-9
    v = p5.v_cyl
    assert ode_residual(p5, lambda t: (v, 0.0, 0.0, 0.0, 0.0), ts) <= 1e-12


def test_ode_residual_scaled_profile(p5):
    # scaling breaks the nonlinear balance: residual of lam * v_sph is
    # r (lam^p - lam) v_sph^p, maximized at t = 0
    lam = 1.01
    ts = np.linspace(-5.0, 5.0, 101)  # includes t = 0
    res = ode_residual(
        p5, lambda t: tuple(lam * x for x in v_sph_jet(p5, t)), ts
    )
    expected = p5.r * (lam ** p5.p - lam)
    assert res == pytest.approx(expected, rel=1e-10)
    assert res > 0.5


def test_linearized_coefficient(p5):
    assert linearized_coefficient(p5, p5.v_cyl) == pytest.approx(-12.5, rel=1e-12)
    assert linearized_coefficient(p5, 1e-9) == pytest.approx(p5.c0, rel=1e-6)
    assert linearized_coefficient(p5, 1.0) == pytest.approx(-57.5, rel=1e-14)
    with pytest.raises(NonPositiveV):
        linearized_coefficient(p5, 0.0)


def test_symbol_at_special_frequencies(p5):
    assert abs(symbol_cyl(p5, p5.mu)) <= 1e-10
    assert symbol_cyl(p5, 0.0) == pytest.approx(p5.c0 - p5.k_lin, rel=1e-14)
    assert symbol_cyl(p5, 0.0) < 0.0
    # sigma(2 mu) = 15 mu^4 + 3 c2 mu^2 follows from the defining quartic
    two_mu = symbol_cyl(p5, 2.0 * p5.mu)
    assert two_mu == pytest.approx(15.0 * p5.mu ** 4 + 3.0 * p5.c2 * p5.mu ** 2,
                                   rel=1e-10)
    assert two_mu > 0.0


@settings(max_examples=200, deadline=None)
@given(xi=st.floats(-20.0, 20.0))
def test_symbol_even_and_sign_window(xi):
    p = make_params(5)
    assert symbol_cyl(p, xi) == symbol_cyl(p, -xi)
    if abs(xi) < p.mu * (1.0 - 1e-9):
        assert symbol_cyl(p, xi) < 0.0
    elif abs(xi) > p.mu * (1.0 + 1e-9):
        assert symbol_cyl(p, xi) > 0.0


def test_energy_derivative_identity(p5):
    # the directional derivative of H along the field cancels identically;
    # 1000 random states, exact gradient contraction
    rng = np.random.default_rng(20240517)
    worst = 0.0
    for _ in range(1000):
        v = rng.uniform(0.2, 1.2)
        v1, v2, v3 = rng.uniform(-2.0, 2.0, size=3)
        s = CylinderState(0.0, v, v1, v2, v3)
        scale = max(1.0, abs(hamiltonian(p5, s)))
        worst = max(worst, abs(hamiltonian_flow_derivative(p5, s)) / scale)
    assert worst <= 1e-12


def test_gradient_matches_finite_differences(p5):
    # independent validation of the closed-form gradient
    rng = np.random.default_rng(3)
    for _ in range(20):
        v = rng.uniform(0.3, 1.1)
        v1, v2, v3 = rng.uniform(-1.5, 1.5, size=3)
        s = CylinderState(0.0, v, v1, v2, v3)
        grad = hamiltonian_gradient(p5, s)
        step = 1e-6 * (1.0 + abs(v) + abs(v1) + abs(v2) + abs(v3))
        for i, dv in enumerate(np.eye(4)):
            sp = CylinderState(0.0, *(np.array([v, v1, v2, v3]) + step * dv))
            sm = CylinderState(0.0, *(np.array([v, v1, v2, v3]) - step * dv))
            fd = (hamiltonian(p5, sp) - hamiltonian(p5, sm)) / (2.0 * step)
            assert grad[i] == pytest.approx(fd, rel=2e-5, abs=1e-7)


def test_time_reversal_symmetry(p5):
    rng = np.random.default_rng(8)
    for _ in range(100):
        v = rng.uniform(0.2, 1.2)
        v1, v2, v3 = rng.uniform(-2.0, 2.0, size=3)
        h1 = hamiltonian(p5, CylinderState(0.0, v, v1, v2, v3))
        h2 = hamiltonian(p5, CylinderState(0.0, v, -v1, v2, -v3))
        assert h1 == h2


def test_autonomy(p5):
    s1 = CylinderState(0.0, 0.9, 0.1, -0.2, 0.3)
    s2 = CylinderState(123.4, 0.9, 0.1, -0.2, 0.3)
    assert np.array_equal(vector_field(p5, s1), vector_field(p5, s2))
