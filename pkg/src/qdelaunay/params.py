"""Dimension-dependent constants of the radial constant-Q-curvature problem.

The fourth-order radial equation on the cylinder is

    v'''' - c2 v'' + c0 v = r v^p,        p = (n+4)/(n-4),

and every other quantity used downstream (energy level of the constant
solution, linearization frequency, sphere measures, the round-sphere value of
the conformal invariant) is a closed-form function of the dimension n.  All
of them are computed once by :func:`make_params` and carried around in an
immutable :class:`DimensionParams`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParameter, QuadratureFailure

__all__ = [
    "DimensionParams",
    "make_params",
    "gamma",
    "v_sph_profile",
    "v_sph_jet",
    "sphere_closure_check",
]


# Lanczos coefficients, g = 7, 9 terms.  Relative error is below 1e-13 on the
# half-integer arguments needed for sphere measures; cross-checked against
# math.lgamma in the test suite.
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(x: float) -> float:
    """Gamma function via the Lanczos approximation (double precision)."""
    if x < 0.5:
        # reflection; not needed for sphere measures but keeps the function total
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    x = x - 1.0
    acc = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        acc += _LANCZOS[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (x + 0.5) * math.exp(-t) * acc


@dataclass(frozen=True)
class DimensionParams:
    """All n-dependent constants. Immutable; safe to share between tasks.

    Attributes
    ----------
    n : dimension, integer >= 5
    c2 : second-order ODE coefficient (n(n-4)+8)/2
    c0 : zeroth-order ODE coefficient n^2 (n-4)^2 / 16
    r : nonlinearity coefficient n(n-4)(n^2-4)/16
    p : nonlinear exponent (n+4)/(n-4)
    p_sharp : critical volume exponent 2n/(n-4)
    q_bar : normalized curvature constant n(n^2-4)/8
    v_cyl : value of the constant (cylindrical) solution
    k_lin : linearization coefficient p * r * v_cyl^(p-1) at the constant solution
    h_cyl : conserved-energy level of the constant solution (negative)
    mu : oscillation frequency of the linearization at v_cyl (positive)
    t_cyl : fundamental linear period 2*pi/mu
    area_s : surface measure of the unit (n-1)-sphere
    vol_s : measure of the unit n-sphere
    y_sph : round-sphere value q_bar * vol_s^(4/n) of the conformal invariant
    """

    n: int
    c2: float
    c0: float
    r: float
    p: float
    p_sharp: float
    q_bar: float
    v_cyl: float
    k_lin: float
    h_cyl: float
    mu: float
    t_cyl: float
    area_s: float
    vol_s: float
    y_sph: float


def make_params(n: int) -> DimensionParams:
    """Build the full constant set for integer dimension ``n >= 5``.

    ``mu`` is *not* taken from any printed formula: it is the positive root of
    the characteristic polynomial x^4 + c2 x^2 + (c0 - k_lin) of the
    linearization at v_cyl, solved as a quadratic in x^2.  Because
    c0 - k_lin = -n^2 (n-4)/2 < 0 there is exactly one positive root in x^2.
    """
    if isinstance(n, bool) or not isinstance(n, int):
        raise InvalidParameter(f"dimension must be an integer, got {n!r}")
    if n < 5:
        raise InvalidParameter(f"dimension must satisfy n >= 5, got {n}")
    nf = float(n)
    c2 = (nf * (nf - 4.0) + 8.0) / 2.0
    c0 = nf * nf * (nf - 4.0) ** 2 / 16.0
    r = nf * (nf - 4.0) * (nf * nf - 4.0) / 16.0
    p = (nf + 4.0) / (nf - 4.0)
    p_sharp = 2.0 * nf / (nf - 4.0)
    q_bar = nf * (nf * nf - 4.0) / 8.0

    ratio = nf * (nf - 4.0) / (nf * nf - 4.0)  # in (0,1) for n > 4
    v_cyl = ratio ** ((nf - 4.0) / 8.0)
    k_lin = p * r * v_cyl ** (p - 1.0)
    h_cyl = -(nf * (nf - 4.0) ** 2 / 8.0) * ratio ** ((nf - 4.0) / 4.0)

    q = c0 - k_lin  # equals -n^2 (n-4)/2 exactly
    mu_sq = 0.5 * (-c2 + math.sqrt(c2 * c2 - 4.0 * q))
    mu = math.sqrt(mu_sq)
    t_cyl = 2.0 * math.pi / mu

    area_s = 2.0 * math.pi ** (nf / 2.0) / gamma(nf / 2.0)
    vol_s = 2.0 * math.pi ** ((nf + 1.0) / 2.0) / gamma((nf + 1.0) / 2.0)
    y_sph = q_bar * vol_s ** (4.0 / nf)

    return DimensionParams(
        n=n, c2=c2, c0=c0, r=r, p=p, p_sharp=p_sharp, q_bar=q_bar,
        v_cyl=v_cyl, k_lin=k_lin, h_cyl=h_cyl, mu=mu, t_cyl=t_cyl,
        area_s=area_s, vol_s=vol_s, y_sph=y_sph,
    )


def printed_period_variants(params: DimensionParams) -> dict[str, float]:
    """Both sign variants of the closed-form linearization frequency.

    The constant under the inner square root is sqrt(n^4 - 64n + 64) with
    either ``- n(n-4) + 8`` or ``- n(n-4) - 8`` added.  Returns NaN for a
    variant whose radicand is negative.  The selfcheck adjudicates which one
    agrees with the characteristic-polynomial root and the measured
    small-amplitude period limit.
    """
    nf = float(params.n)
    inner = math.sqrt(nf ** 4 - 64.0 * nf + 64.0)
    out = {}
    for tag, const in (("plus8", 8.0), ("minus8", -8.0)):
        radicand = inner - nf * (nf - 4.0) + const
        out[tag] = 0.5 * math.sqrt(radicand) if radicand > 0.0 else math.nan
    return out


def v_sph_profile(params: DimensionParams, t: float) -> float:
    """The spherical solution cosh(t)^(-(n-4)/2)."""
    m = (params.n - 4.0) / 2.0
    return math.cosh(t) ** (-m)


def _poly_mul(a: list[float], b: list[float]) -> list[float]:
    out = [0.0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def _poly_eval(a: list[float], x: float) -> float:
    acc = 0.0
    for c in reversed(a):
        acc = acc * x + c
    return acc


def v_sph_jet(params: DimensionParams, t: float, order: int = 4) -> tuple[float, ...]:
    """The spherical solution and its first ``order`` t-derivatives.

    Derivatives are exact: with tau = tanh t one has v^(k) = v * P_k(tau)
    where P_0 = 1 and P_{k+1} = (1 - tau^2) P_k' - m tau P_k, m = (n-4)/2.
    The polynomial recurrence is carried out on coefficient lists, so no
    finite differencing enters.
    """
    m = (params.n - 4.0) / 2.0
    tau = math.tanh(t)
    v = math.cosh(t) ** (-m)
    poly = [1.0]
    values = [v]
    for _ in range(order):
        deriv = [poly[i] * i for i in range(1, len(poly))]
        nxt = _poly_mul([1.0, 0.0, -1.0], deriv) if deriv else [0.0]
        mt = _poly_mul([0.0, -m], poly)
        size = max(len(nxt), len(mt))
        nxt = nxt + [0.0] * (size - len(nxt))
        poly = [nxt[i] + (mt[i] if i < len(mt) else 0.0) for i in range(size)]
        values.append(v * _poly_eval(poly, tau))
    return tuple(values)


def _adaptive_simpson(f, a: float, b: float, tol: float, max_depth: int = 60):
    """Adaptive Simpson on [a, b]; returns (value, error_estimate).

    Accuracy target is absolute.  Raises QuadratureFailure when the recursion
    depth is exhausted before the local tolerance is met.
    """
    fa, fb = f(a), f(b)
    mid = 0.5 * (a + b)
    fm = f(mid)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        mid = 0.5 * (a + b)
        lm, rm = 0.5 * (a + mid), 0.5 * (mid + b)
        flm, frm = f(lm), f(rm)
        left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        if abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0, abs(delta) / 15.0
        if depth <= 0:
            raise QuadratureFailure(
                f"adaptive Simpson depth exhausted on [{a}, {b}]"
            )
        lv, le = recurse(a, mid, fa, flm, fm, left, tol / 2.0, depth - 1)
        rv, re = recurse(mid, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        return lv + rv, le + re

    return recurse(a, b, fa, fm, fb, whole, tol, max_depth)


def sphere_closure_check(params: DimensionParams, quad_tol: float = 1e-12) -> float:
    """Worst relative error in the sphere-measure closure identity.

    Computes area_s * Integral_R cosh(t)^(-n) dt by adaptive quadrature on a
    truncated even domain (the tail beyond T=12 is bounded analytically by
    (2 e^{-12})^n / n < 1e-25 for n >= 5) and compares against vol_s and
    against the Gamma-function closed form sqrt(pi) Gamma(n/2) / Gamma((n+1)/2)
    of the integral itself.  Returns the larger of the two relative errors.
    """
    if not quad_tol > 0.0:
        raise InvalidParameter("quad_tol must be positive")
    n = params.n
    t_cut = 12.0
    tail_bound = (2.0 * math.exp(-t_cut)) ** n / n
    half, err = _adaptive_simpson(
        lambda t: math.cosh(t) ** (-n), 0.0, t_cut, quad_tol / 4.0
    )
    integral = 2.0 * half
    est = 2.0 * err + tail_bound
    if est > quad_tol * max(1.0, abs(integral)):
        raise QuadratureFailure(
            f"requested tolerance {quad_tol} not reached (estimate {est})"
        )
    closed = math.sqrt(math.pi) * gamma(n / 2.0) / gamma((n + 1.0) / 2.0)
    err_vol = abs(params.area_s * integral - params.vol_s) / params.vol_s
    err_gamma = abs(integral - closed) / closed
    return max(err_vol, err_gamma)
