"""Closed-form 2-D solution with piecewise-constant quadrant data.

For d_t^2 u - t^m Laplace(u) = 0, u(0) = 0, du/dt(0) = quadrant constants
(C1, C2, C3, C4), the solution is the damped spherical mean

    u(t, x) = C0 * t * int_0^1 (1 - s^2)^(-gamma) V(s phi(t), x) ds,

where phi(t) = 2 t^((m+2)/2) / (m+2), gamma = m / (2(m+2)), and V(tau, x)
is the time derivative of the free-wave solution with the same data.  V is
piecewise constant except inside the sonic circle |x| < tau, where it
involves the corner integral

    J(tau, x) = int_|x|^tau  tau r (pi/2 - arcsin(x1/r) - arcsin(x2/r))
                / sqrt(tau^2 - r^2) dr            (x1, x2 >= 0).

Direct substitution shows J(tau, x) = tau^2 Jt(x/tau): degree-2 homogeneity,
not the degree-1 form printed alongside the closed-form partials, and
differentiation under the integral gives

    dJ/dx1 = -tau * arccos(x2 / sqrt(tau^2 - x1^2))    (note the sign),
    dJ/dtau = 2 J / tau + x1 arccos(x2/sqrt(tau^2-x1^2))
                        + x2 arccos(x1/sqrt(tau^2-x2^2)).

Both deviations from the printed forms are confirmed against central
differences of the numerically integrated J (see j_selfcheck); the
magnitudes of the printed arccos partials are reproduced at tau = 1.
What enters V inside the circle is D = d/dt [J(t,x)/t], which in reduced
coordinates y = x/tau reads

    D(y) = Jt(y) + y1 arccos(y2/sqrt(1-y1^2)) + y2 arccos(y1/sqrt(1-y2^2)),

a scale-free quantity equal to pi/2 on the axes and to pi/2 at the origin
(which makes V the four-corner mean there), vanishing at the sonic circle.
Every one of these statements is exercised against the brute-force circular
mean oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import roots_legendre

from . import specfun
from .propagator import TricomiParams


class DegenerateInputError(ValueError):
    """Input on a symmetry axis where the requested integral degenerates."""


@dataclass(frozen=True)
class QuadrantData:
    """Values of the initial velocity on the four open quadrants,
    ordered (+,+), (-,+), (-,-), (+,-)."""

    C1: float
    C2: float
    C3: float
    C4: float

    @property
    def corner_jump(self) -> float:
        """C1 + C3 - C2 - C4, the combination driving the interior term."""
        return self.C1 + self.C3 - self.C2 - self.C4

    def value_at(self, x1: float, x2: float) -> float:
        """Quadrant value; closed-quadrant tie-break toward C1/C2/C4."""
        if x1 >= 0.0:
            return self.C1 if x2 >= 0.0 else self.C4
        return self.C2 if x2 >= 0.0 else self.C3

    def as_tuple(self):
        return (self.C1, self.C2, self.C3, self.C4)


@dataclass(frozen=True)
class CuspGeometry:
    """Classifier for the cusp cone and characteristic wedges."""

    m: int

    def phi(self, t):
        return 2.0 * np.asarray(t, dtype=float) ** ((self.m + 2) / 2.0) / (self.m + 2)

    def distances(self, t: float, x) -> dict:
        """Signed/absolute distances to Gamma_0 (sonic circle trace),
        Gamma_1+- and Gamma_2+- at time t."""
        x1, x2 = float(x[0]), float(x[1])
        p = float(self.phi(t))
        return {
            "gamma0": abs(math.hypot(x1, x2) - p),
            "gamma1": min(abs(x1 - p), abs(x1 + p)),
            "gamma2": min(abs(x2 - p), abs(x2 + p)),
        }

    def min_distance(self, t: float, x) -> float:
        return min(self.distances(t, x).values())


# ---------------------------------------------------------------------------
# The corner-integral profile Jt(y) on the closed quarter disk y1, y2 >= 0.
# After r = sin(psi) the integrand is analytic up to psi = pi/2, so a fixed
# Gauss-Legendre rule converges geometrically.
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = roots_legendre(48)


def jtilde(y1, y2) -> np.ndarray:
    """Jt(y) = int_|y|^1 (pi/2 - arcsin(y1/r) - arcsin(y2/r)) r dr
    / sqrt(1-r^2), vectorized over non-negative y inside the unit disk."""
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    r0 = np.hypot(y1, y2)
    psi0 = np.arcsin(np.clip(r0, 0.0, 1.0))
    half = (math.pi / 2.0 - psi0) / 2.0
    psi = psi0[..., None] + half[..., None] * (_GL_NODES + 1.0)
    sin_psi = np.sin(psi)
    with np.errstate(invalid="ignore", divide="ignore"):
        a1 = np.arcsin(np.clip(y1[..., None] / sin_psi, -1.0, 1.0))
        a2 = np.arcsin(np.clip(y2[..., None] / sin_psi, -1.0, 1.0))
    integrand = (math.pi / 2.0 - a1 - a2) * sin_psi
    return half * np.einsum("...k,k->...", integrand, _GL_WEIGHTS)


def interior_profile(y1, y2) -> np.ndarray:
    """D(y) = Jt(y) - y . grad Jt(y), the scale-free interior multiplier of
    the corner jump (equals d/dt [J(t, x)/t] at y = x/t)."""
    y1 = np.abs(np.asarray(y1, dtype=float))
    y2 = np.abs(np.asarray(y2, dtype=float))
    with np.errstate(invalid="ignore", divide="ignore"):
        a = np.arccos(np.clip(y2 / np.sqrt(1.0 - y1 * y1), -1.0, 1.0))
        b = np.arccos(np.clip(y1 / np.sqrt(1.0 - y2 * y2), -1.0, 1.0))
    return jtilde(y1, y2) + y1 * a + y2 * b


# ---------------------------------------------------------------------------
# V(tau, x): the piecewise time derivative of the free-wave solution
# ---------------------------------------------------------------------------

def eval_V(data: QuadrantData, tau: float, x) -> float:
    """Piecewise V; on piece boundaries the first-listed region wins
    (far quadrants, then edge strips, then outside-circle corners, then
    the interior disk)."""
    return float(eval_V_many(data, np.array([tau]), np.asarray(x, dtype=float))[0])


def eval_V_many(data: QuadrantData, tau: np.ndarray, x) -> np.ndarray:
    """V(tau_k, x) over an array of radii tau > 0 at a fixed point x."""
    tau = np.asarray(tau, dtype=float)
    x1, x2 = float(x[0]), float(x[1])
    C1, C2, C3, C4 = data.as_tuple()
    out = np.empty(tau.shape)
    ax1, ax2 = abs(x1), abs(x2)
    rr = math.hypot(x1, x2)
    mean_c24 = 0.5 * (C2 + C4)
    mean_c13 = 0.5 * (C1 + C3)
    psi = data.corner_jump
    remaining = np.ones(tau.shape, dtype=bool)

    def take(mask, values):
        nonlocal remaining
        sel = remaining & mask
        out[sel] = np.broadcast_to(values, tau.shape)[sel] \
            if np.ndim(values) else values
        remaining &= ~sel

    take((ax1 >= tau) & (ax2 >= tau), data.value_at(x1, x2))
    take((ax1 <= tau) & (x2 >= tau), 0.5 * (C1 + C2))
    take((x1 <= -tau) & (ax2 <= tau), 0.5 * (C2 + C3))
    take((ax1 <= tau) & (x2 <= -tau), 0.5 * (C3 + C4))
    take((x1 >= tau) & (ax2 <= tau), 0.5 * (C1 + C4))
    outside = rr >= tau
    same_sign = (0.0 <= x1) & (x1 <= tau) & (0.0 <= x2) & (x2 <= tau) \
        | (-tau <= x1) & (x1 <= 0.0) & (-tau <= x2) & (x2 <= 0.0)
    opp_sign = (-tau <= x1) & (x1 <= 0.0) & (0.0 <= x2) & (x2 <= tau) \
        | (0.0 <= x1) & (x1 <= tau) & (-tau <= x2) & (x2 <= 0.0)
    take(outside & same_sign, mean_c24)
    take(outside & opp_sign, mean_c13)
    if remaining.any():
        # interior of the sonic circle
        tin = tau[remaining]
        prof = interior_profile(ax1 / tin, ax2 / tin)
        if x1 * x2 > 0.0:
            vals = mean_c24 + psi / (2.0 * math.pi) * prof
        elif x1 * x2 < 0.0:
            vals = mean_c13 - psi / (2.0 * math.pi) * prof
        else:
            # common limit from both interior pieces: the four-corner mean
            vals = np.full(tin.shape, 0.25 * (C1 + C2 + C3 + C4))
        out[remaining] = vals
    return out


# ---------------------------------------------------------------------------
# J and its verified derivatives
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JEval:
    J: float
    dJ_dx1: float
    dJ_dx2: float
    dJ_dtau: float


def eval_J(tau: float, x) -> JEval:
    """Numerically integrated J with its verified closed-form partials
    (signs and scaling fixed by the finite-difference self-check; the
    printed forms have |dJ/dx_i| right at tau = 1 but the wrong sign and
    miss the tau scaling)."""
    x1, x2 = float(x[0]), float(x[1])
    if x1 < 0.0 or x2 < 0.0:
        raise ValueError("eval_J is defined on the closed first quadrant")
    if math.hypot(x1, x2) >= tau:
        raise ValueError(f"|x| = {math.hypot(x1, x2)} not inside tau = {tau}")
    J = tau * tau * float(jtilde(x1 / tau, x2 / tau))
    s1 = math.sqrt(tau * tau - x1 * x1)
    s2 = math.sqrt(tau * tau - x2 * x2)
    arc1 = math.acos(min(1.0, x2 / s1))
    arc2 = math.acos(min(1.0, x1 / s2))
    return JEval(
        J=J,
        dJ_dx1=-tau * arc1,
        dJ_dx2=-tau * arc2,
        dJ_dtau=2.0 * J / tau + x1 * arc1 + x2 * arc2,
    )


def j_selfcheck(tau: float, x, h: float = 1e-5) -> dict:
    """Central-difference check of the closed-form partials, plus the
    empirical homogeneity degree and the residuals of the printed forms."""
    ev = eval_J(tau, x)
    x1, x2 = float(x[0]), float(x[1])

    def jnum(tt, a, b):
        return tt * tt * float(jtilde(a / tt, b / tt))

    fd_x1 = (jnum(tau, x1 + h, x2) - jnum(tau, x1 - h, x2)) / (2 * h)
    fd_x2 = (jnum(tau, x1, x2 + h) - jnum(tau, x1, x2 - h)) / (2 * h)
    fd_tau = (jnum(tau + h, x1, x2) - jnum(tau - h, x1, x2)) / (2 * h)
    lam = 1.5
    degree = math.log(jnum(lam * tau, lam * x1, lam * x2) / ev.J) / math.log(lam)
    s1 = math.sqrt(tau * tau - x1 * x1)
    s2 = math.sqrt(tau * tau - x2 * x2)
    printed_dx1 = math.acos(x2 / s1)
    printed_dtau = ev.J / tau - (x1 / tau) * math.acos(x2 / s1) \
        - (x2 / tau) * math.acos(x1 / s2)
    return {
        "closed_form_residuals": {
            "dJ_dx1": abs(ev.dJ_dx1 - fd_x1),
            "dJ_dx2": abs(ev.dJ_dx2 - fd_x2),
            "dJ_dtau": abs(ev.dJ_dtau - fd_tau),
        },
        "printed_form_residuals": {
            "dJ_dx1": abs(printed_dx1 - fd_x1),
            "dJ_dtau": abs(printed_dtau - fd_tau),
        },
        "homogeneity_degree": degree,
        "sign_of_dJ_dx1": -1.0,
    }


# ---------------------------------------------------------------------------
# The closed-form solution u(t, x)
# ---------------------------------------------------------------------------

@dataclass
class ClosedFormSolution:
    """u(t,x) = C0 t int (1-s^2)^(-gamma) V(s phi(t), x) ds on n = 2.

    C0 defaults to the calibrated normalization 1/int_0^1 (1-s^2)^(-gamma) ds,
    which makes du/dt(0, x) = data value at continuity points; the constant
    printed in the source formula is exposed via printed_normalization().
    """

    params: TricomiParams
    data: QuadrantData
    C0: float | None = None
    npoints: int = 24

    def __post_init__(self):
        if self.params.n != 2:
            raise ValueError("closed form requires n = 2")
        if self.C0 is None:
            self.C0 = 1.0 / specfun.weight_moment(self.params.gamma)
        if self.C0 <= 0.0:
            raise ValueError("C0 must be positive")

    @property
    def geometry(self) -> CuspGeometry:
        return CuspGeometry(self.params.m)


def printed_normalization(m: int) -> float:
    """The source's printed prefactor 2 C_m (phi(1))^(phi(1)) F(g,g;1;1)
    (the (phi(1))^(phi(1)) exponent is a suspected typo; reported for
    comparison against the calibrated C0)."""
    gamma_ = m / (2.0 * (m + 2))
    c_m = (2.0 / (m + 2)) ** (m / (m + 2.0)) * 2.0 ** (-2.0 / (m + 2))
    phi1 = 2.0 / (m + 2)
    return 2.0 * c_m * phi1 ** phi1 * specfun.gauss_f_at_one(gamma_, gamma_, 1.0)


def eval_u(sol: ClosedFormSolution, t: float, x, npoints: int | None = None) -> float:
    """Singular quadrature of s -> V(s phi(t), x): split at every s where
    s phi(t) crosses |x1|, |x2| or |x|, Gauss-Jacobi only on the panel
    touching s = 1."""
    if t < 0.0 or t > sol.params.T:
        raise ValueError(f"t = {t} outside [0, T]")
    if t == 0.0:
        return 0.0
    npts = npoints or sol.npoints
    gamma_ = sol.params.gamma
    phit = float(sol.geometry.phi(t))
    x1, x2 = float(x[0]), float(x[1])
    circle = math.hypot(x1, x2) / phit
    total = 0.0
    for nodes, weights in _s_quadrature(x1 / phit, x2 / phit, circle,
                                        gamma_, npts):
        vals = eval_V_many(sol.data, nodes * phit, (x1, x2))
        total += float(np.dot(weights, vals))
    return sol.C0 * t * total


def _s_quadrature(c1: float, c2: float, circle: float, gamma_: float,
                  npts: int):
    """Panelled rules for int_0^1 V(s phi) (1-s^2)^(-gamma) ds: split at the
    piece boundaries, sqrt-substitute at the sonic-circle kink, Gauss-Jacobi
    on the panel touching s = 1, and grade panels ending just below s = 1
    (the folded weight's singularity sits immediately beyond them)."""
    cuts = sorted({abs(c1), abs(c2), circle})
    edges = [0.0] + [c for c in cuts if 1e-12 < c < 1.0 - 1e-12] + [1.0]
    for lo, hi in zip(edges[:-1], edges[1:]):
        sqrt_kink = abs(lo - circle) < 1e-14 and 0.0 < lo
        if hi >= 1.0:
            if sqrt_kink:
                mid = lo + 0.5 * (1.0 - lo)
                yield _sqrt_panel_rule(lo, mid, npts, gamma_)
                lo = mid
            yield specfun.endpoint_panel_rule(lo, gamma_, npts)
            continue
        for sub_lo, sub_hi in _graded(lo, hi):
            if sqrt_kink and sub_lo == lo:
                yield _sqrt_panel_rule(sub_lo, sub_hi, npts, gamma_)
            else:
                yield specfun.legendre_panel_rule(sub_lo, sub_hi, npts, gamma_)


def _graded(lo: float, hi: float):
    """Dyadic subdivision of (lo, hi) toward s = 1 whenever the gap 1 - hi
    is small against the panel, so every subpanel keeps the weight's
    singularity at a distance comparable to its own length."""
    gap = 1.0 - hi
    if gap >= 0.5 * (hi - lo):
        return [(lo, hi)]
    pieces = []
    cur = lo
    while 1.0 - cur > 4.0 * max(gap, 1e-15) and len(pieces) < 60:
        nxt = 1.0 - 0.5 * (1.0 - cur)
        if nxt >= hi:
            break
        pieces.append((cur, nxt))
        cur = nxt
    pieces.append((cur, hi))
    return pieces


def _sqrt_panel_rule(lo: float, hi: float, npts: int, gamma_: float):
    """Gauss-Legendre in sigma for int_lo^hi g(s) (1-s^2)^(-gamma) ds with
    s = lo + sigma^2 (g with a sqrt kink at lo becomes smooth)."""
    sig, lam = specfun.legendre_panel_rule(0.0, math.sqrt(hi - lo), npts)
    s = lo + sig * sig
    w = lam * 2.0 * sig * (1.0 - s * s) ** (-gamma_)
    return s, w


def eval_u_grid(sol: ClosedFormSolution, t: float, xs1, xs2) -> np.ndarray:
    """eval_u over a tensor grid of points; rows follow xs1."""
    out = np.empty((len(xs1), len(xs2)))
    for i, a in enumerate(xs1):
        for j, b in enumerate(xs2):
            out[i, j] = eval_u(sol, t, (a, b))
    return out


# ---------------------------------------------------------------------------
# Circular-mean oracle (independent of the piecewise forms above)
# ---------------------------------------------------------------------------

def _angular_mass(data: QuadrantData, x1: float, x2: float, r: float) -> float:
    """Integral of the quadrant data over the circle of radius r about x,
    computed from the exact crossing angles."""
    angles = [0.0]
    if r > abs(x1):
        base = math.acos(max(-1.0, min(1.0, -x1 / r)))
        angles += [base, 2.0 * math.pi - base]
    if r > abs(x2):
        base = math.asin(max(-1.0, min(1.0, -x2 / r)))
        angles += [base % (2.0 * math.pi), (math.pi - base) % (2.0 * math.pi)]
    angles = sorted(set(angles)) + [2.0 * math.pi]
    total = 0.0
    for lo, hi in zip(angles[:-1], angles[1:]):
        if hi - lo < 1e-15:
            continue
        mid = 0.5 * (lo + hi)
        total += (hi - lo) * data.value_at(x1 + r * math.cos(mid),
                                           x2 + r * math.sin(mid))
    return total


def free_wave_mean(data: QuadrantData, t: float, x, resolution: int = 40) -> float:
    """v(t,x) = (1/2 pi) int_{B(x,t)} data(xi)/sqrt(t^2-|x-xi|^2) d xi via the
    exact angular mass and panelled Gauss-Legendre in the radius."""
    x1, x2 = float(x[0]), float(x[1])
    if t <= 0.0:
        return 0.0
    cuts = sorted({abs(v) / t for v in (x1, x2, math.hypot(x1, x2))
                   if 0.0 < abs(v) < t})
    edges = [0.0] + cuts + [1.0]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        alo, ahi = math.asin(lo), math.asin(hi)
        nodes, weights = specfun.legendre_panel_rule(alo, ahi, resolution)
        vals = [_angular_mass(data, x1, x2, t * math.sin(a)) * t * math.sin(a)
                for a in nodes]
        total += float(np.dot(weights, vals))
    return total / (2.0 * math.pi)


def circular_mean_oracle(data: QuadrantData, t: float, x,
                         resolution: int = 40, h: float = 1e-4) -> float:
    """Brute-force reference for V(t, x): Richardson-extrapolated central
    difference in t of the free-wave mean."""
    d1 = (free_wave_mean(data, t + h, x, resolution)
          - free_wave_mean(data, t - h, x, resolution)) / (2.0 * h)
    d2 = (free_wave_mean(data, t + h / 2, x, resolution)
          - free_wave_mean(data, t - h / 2, x, resolution)) / h
    return (4.0 * d2 - d1) / 3.0


def oracle_u(sol: ClosedFormSolution, t: float, x, resolution: int = 40,
             npoints: int = 16) -> float:
    """Independent route to u(t,x): compose the singular s-integral with the
    circular-mean oracle instead of the piecewise V."""
    gamma_ = sol.params.gamma
    phit = float(sol.geometry.phi(t))
    x1, x2 = float(x[0]), float(x[1])
    cuts = sorted({abs(x1) / phit, abs(x2) / phit, math.hypot(x1, x2) / phit})
    edges = [0.0] + [c for c in cuts if 0.0 < c < 1.0] + [1.0]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi < 1.0:
            nodes, weights = specfun.legendre_panel_rule(lo, hi, npoints, gamma_)
        else:
            nodes, weights = specfun.endpoint_panel_rule(lo, gamma_, npoints)
        vals = [circular_mean_oracle(sol.data, s * phit, (x1, x2), resolution)
                for s in nodes]
        total += float(np.dot(weights, vals))
    return sol.C0 * t * total


# ---------------------------------------------------------------------------
# Singularity integrals near Gamma_1+ inside the sonic circle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SingularityIntegrals:
    A1: float
    B1: float
    B2_truncated: float
    eps: float
    xi_max: float


def a1_closed_form(params: TricomiParams, t: float, x) -> float:
    """|A1(t,x)| = t |arctan(a x2/(|x|+x1)) + arctan(a x2/(|x|-x1))| with
    a = sqrt((phi-|x|)/(phi+|x|)); zero on the axis x2 = 0."""
    x1, x2 = float(x[0]), float(x[1])
    if x2 == 0.0:
        return 0.0
    phit = 2.0 * t ** ((params.m + 2) / 2.0) / (params.m + 2)
    r = math.hypot(x1, x2)
    _require_interior(x1, r, phit)
    a = math.sqrt((phit - r) / (phit + r))
    return t * abs(math.atan(a * abs(x2) / (r + x1))
                   + math.atan(a * abs(x2) / (r - x1)))


def _require_interior(x1: float, r: float, phit: float) -> None:
    if not 0.0 < x1:
        raise ValueError("singularity integrals defined for x1 > 0")
    if r >= phit:
        raise ValueError(f"|x| = {r} not inside phi(t) = {phit}")


def singularity_integrals(sol: ClosedFormSolution, t: float, x,
                          eps: float) -> SingularityIntegrals:
    """A1 (closed form), B1 (finite, adaptive quadrature) and the truncated
    divergent integral B2 over xi in (eps, a); B2 scales like K/eps."""
    m = sol.params.m
    gamma_ = sol.params.gamma
    x1, x2 = float(x[0]), float(x[1])
    if x2 == 0.0:
        raise DegenerateInputError("x2 = 0: the B2 integrand vanishes")
    phit = float(sol.geometry.phi(t))
    r = math.hypot(x1, x2)
    _require_interior(x1, r, phit)
    a = math.sqrt((phit - r) / (phit + r))
    if not 0.0 < eps < a:
        raise ValueError(f"eps must lie in (0, a) with a = {a}")
    ax2 = abs(x2)
    q = lambda xi: x2 * x2 + 2.0 * (x1 * x1 + r * r) * xi * xi \
        + x2 * x2 * xi ** 4
    bracket = lambda xi: max(
        0.0, 1.0 - (r / phit * (1.0 + xi * xi) / (1.0 - xi * xi)) ** 2)

    def b1_integrand(xi):
        return (1.0 + xi * xi) * bracket(xi) ** (2.0 - gamma_) \
            * (1.0 - xi * xi) ** 2 / q(xi) ** 2

    def b2_integrand(xi):
        return (1.0 + xi * xi) * bracket(xi) ** (2.0 - gamma_) \
            * (1.0 - xi * xi) ** 4 / (q(xi) ** 2 * xi * xi)

    b1_val, _ = quad(b1_integrand, 0.0, a, limit=200)
    b2_val, _ = quad(b2_integrand, eps, a, limit=200)
    B1 = 6.0 * t * phit * r * x1 * ax2 * b1_val
    B2 = 0.5 * t * phit * x1 * ax2 ** 3 / r * b2_val
    return SingularityIntegrals(
        A1=a1_closed_form(sol.params, t, (x1, x2)), B1=B1, B2_truncated=B2,
        eps=eps, xi_max=a)
