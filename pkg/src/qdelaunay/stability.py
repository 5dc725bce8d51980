"""Stability diagnostics: nodal arcs, mode counts, discretized spectra.

The linearization of the radial equation about a profile v is

    L w = w'''' - c2 w'' + (c0 - p r v^(p-1)) w,

self-adjoint on the circle.  About the constant solution the symbol
sigma(xi) = xi^4 + c2 xi^2 + (c0 - k_lin) is negative exactly for |xi| < mu,
so counting Fourier modes gives the exact negative-eigenvalue count there;
the Fourier-spectral discretization of the general operator is checked
against that closed form.  The translation mode v' always lies in the
kernel over any whole number of periods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import make_rhs
from .errors import EigenFailure, InvalidParameter
from .integrator import integrate_raw
from .params import DimensionParams

__all__ = [
    "SpectrumReport",
    "nodal_arcs",
    "cylinder_negative_modes",
    "negative_modes_closed_form",
    "discretized_spectrum",
    "variational_residual",
]


@dataclass
class SpectrumReport:
    """Lowest eigenvalues of the discretized linearized operator.

    ``eigenvalues`` holds the lowest 2l+3 (ascending); ``negative_count``
    counts over the full computed spectrum.  ``near_zero`` is the smallest
    eigenvalue in magnitude, with ``translation_overlap`` the |cosine| of its
    eigenvector against the sampled v' for orbit operators (None for the
    constant-coefficient case).
    """

    operator: str  # "cylinder" | "delaunay"
    circumference: float
    grid_n: int
    l_copies: int
    a: float | None
    eigenvalues: np.ndarray
    negative_count: int
    near_zero: float
    translation_overlap: float | None
    spectrum_scale: float

    def __post_init__(self):
        if np.any(np.diff(self.eigenvalues) < 0.0):
            raise InvalidParameter("eigenvalues must be sorted ascending")
        neg_in_list = int(np.sum(self.eigenvalues < 0.0))
        if neg_in_list != min(self.negative_count, len(self.eigenvalues)):
            raise InvalidParameter(
                "negative_count inconsistent with the stored eigenvalues"
            )


def nodal_arcs(orbit, l: int = 1) -> int:
    """Number of arcs where v' > 0 on the circle of circumference l * t_a.

    Counted from the dense samples with near-zero values thinned out, then
    cyclic sign alternations tallied; one positive arc per fundamental
    period is the expected answer.
    """
    if l < 1:
        raise InvalidParameter("cover count l must be >= 1")
    v1 = np.tile(orbit.v1s, l)
    thr = 1e-9 * float(np.max(np.abs(v1)))
    signs = np.sign(v1) * (np.abs(v1) > thr)
    seq = signs[signs != 0.0]
    if seq.size == 0:
        return 0
    ups = int(np.sum((np.roll(seq, 1) < 0) & (seq > 0)))
    return ups


def cylinder_negative_modes(params: DimensionParams, T: float) -> int:
    """Count of integer Fourier modes with negative symbol on circumference T."""
    if not T > 0.0:
        raise InvalidParameter("circumference must be positive")
    m_max = int(math.ceil(T / params.t_cyl)) + 2
    count = 0
    for m in range(-m_max, m_max + 1):
        xi = 2.0 * math.pi * m / T
        if xi ** 4 + params.c2 * xi ** 2 + (params.c0 - params.k_lin) < 0.0:
            count += 1
    return count


def negative_modes_closed_form(params: DimensionParams, T: float) -> int:
    """2 floor(T / t_cyl) + 1, valid away from integer multiples of t_cyl."""
    if not T > 0.0:
        raise InvalidParameter("circumference must be positive")
    return 2 * int(math.floor(T / params.t_cyl)) + 1


def _spectral_operator(params: DimensionParams, circumference: float,
                       coeff: np.ndarray) -> np.ndarray:
    """Dense symmetric matrix of w -> w'''' - c2 w'' + coeff(t) w."""
    n_grid = coeff.size
    k = 2.0 * np.pi * np.fft.fftfreq(n_grid, d=circumference / n_grid)
    eye = np.eye(n_grid)
    spec = np.fft.fft(eye, axis=0)
    mat = np.fft.ifft((k ** 4 + params.c2 * k ** 2)[:, None] * spec, axis=0)
    mat = np.real(mat) + np.diag(coeff)
    return 0.5 * (mat + mat.T)  # symmetrize away FFT roundoff


def discretized_spectrum(
    params: DimensionParams,
    orbit=None,
    l: int = 1,
    grid_n: int = 256,
    cylinder_circumference: float | None = None,
) -> SpectrumReport:
    """Spectrum of the linearized operator on the l-fold cover.

    Exactly one of ``orbit`` / ``cylinder_circumference`` selects the base
    profile.  The operator is assembled with Fourier spectral differentiation
    on a uniform grid (exact on band-limited functions) and solved densely;
    grid_n must be a power of two >= 128.
    """
    if (orbit is None) == (cylinder_circumference is None):
        raise InvalidParameter(
            "pass exactly one of orbit / cylinder_circumference"
        )
    if l < 1:
        raise InvalidParameter("cover count l must be >= 1")
    if grid_n < 128 or grid_n & (grid_n - 1):
        raise InvalidParameter("grid_n must be a power of two >= 128")

    if orbit is None:
        circ = float(cylinder_circumference)
        if not circ > 0.0:
            raise InvalidParameter("circumference must be positive")
        coeff = np.full(grid_n, params.c0 - params.k_lin)
        operator, a_val = "cylinder", None
        v1_grid = None
    else:
        circ = l * orbit.t_a
        ts = np.linspace(0.0, circ, grid_n, endpoint=False)
        states = np.array([orbit.state_at(t) for t in ts])
        v_grid = states[:, 0]
        v1_grid = states[:, 1]
        coeff = params.c0 - params.p * params.r * v_grid ** (params.p - 1.0)
        operator, a_val = "delaunay", orbit.a

    mat = _spectral_operator(params, circ, coeff)
    try:
        eigvals, eigvecs = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"dense symmetric eigensolve failed: {exc}") from exc

    negative_count = int(np.sum(eigvals < 0.0))
    m = 2 * l + 3
    i_near = int(np.argmin(np.abs(eigvals)))
    near_zero = float(eigvals[i_near])
    overlap = None
    if v1_grid is not None:
        vec = eigvecs[:, i_near]
        denom = np.linalg.norm(vec) * np.linalg.norm(v1_grid)
        if denom > 0.0:
            overlap = float(abs(np.dot(vec, v1_grid)) / denom)
    return SpectrumReport(
        operator=operator,
        circumference=circ,
        grid_n=grid_n,
        l_copies=l,
        a=a_val,
        eigenvalues=eigvals[:m].copy(),
        negative_count=negative_count,
        near_zero=near_zero,
        translation_overlap=overlap,
        spectrum_scale=float(np.max(np.abs(eigvals))),
    )


def variational_residual(
    params: DimensionParams,
    orbit=None,
    rtol: float = 1e-13,
    atol: float = 1e-14,
) -> float:
    """Residual of the claim that w = v' solves the linearized flow.

    Integrates the orbit together with its tangent w over one period, the
    tangent started from (v', v'', v''', v'''')(0), and returns the largest
    deviation between w and the orbit's own derivative jet at the accepted
    steps.  With no orbit the constant solution is used, whose derivative is
    identically zero.
    """
    c2, c0, r, p = params.c2, params.c0, params.r, params.p
    base_rhs = make_rhs(params)

    def rhs(t, y):
        dy = np.empty(8)
        dy[:4] = base_rhs(t, y[:4])
        v = y[0]
        lin0 = c0 - p * r * v ** (p - 1.0)
        dy[4] = y[5]
        dy[5] = y[6]
        dy[6] = y[7]
        dy[7] = c2 * y[6] - lin0 * y[4]
        return dy

    if orbit is None:
        v = params.v_cyl
        y0 = np.array([v, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
        period = params.t_cyl
    else:
        a, b = orbit.a, orbit.b
        v4_0 = c2 * b - c0 * a + r * a ** p
        y0 = np.array([a, 0.0, b, 0.0, 0.0, b, 0.0, v4_0])
        period = orbit.t_a

    ts, ys, _, terminal, _, _ = integrate_raw(rhs, 0.0, y0, period, rtol, atol)
    ys = np.asarray(ys)
    v, v1, v2, v3 = ys[:, 0], ys[:, 1], ys[:, 2], ys[:, 3]
    v4 = c2 * v2 - c0 * v + r * v ** p
    jet = np.column_stack((v1, v2, v3, v4))
    return float(np.max(np.abs(ys[:, 4:] - jet)))
