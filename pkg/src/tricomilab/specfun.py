"""Special functions and singular quadrature underlying the propagators.

Provides a Lanczos gamma function, an engine for Kummer's confluent
hypergeometric function Phi(a, c; z) with complex argument (Taylor series
for moderate |z|, large-|z| asymptotic expansion otherwise), the Gauss
summation of the hypergeometric function at unit argument, and Gauss-Jacobi
rules for integrals with the endpoint weight (1 - s^2)^(-gamma) on (0, 1).

The Taylor branch sums the series with double-double (compensated)
arithmetic: for purely imaginary z the series suffers cancellation of order
e^|z|, which plain double precision cannot push below ~1e-7 already at
|z| = 20.  The vectorized helpers used by the spectral propagator instead
evaluate the damped combination e^(-z/2) * Phi(a, c; z), whose cancellation
is only e^(|z|/2); that form stays accurate in plain doubles up to the
series/asymptotic switch radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


class ParameterError(ValueError):
    """Invalid special-function parameters (e.g. c a non-positive integer)."""


class DivergenceError(ValueError):
    """The requested series or integral diverges for these parameters."""


class AccuracyError(RuntimeError):
    """Requested tolerance unreachable; carries the best-effort evaluation."""

    def __init__(self, message, best):
        super().__init__(message)
        self.best = best


# ---------------------------------------------------------------------------
# Gamma function (Lanczos, g = 7, 9 coefficients; relative error < 1e-13
# over the real arguments used here), with reflection for x < 1/2.
# ---------------------------------------------------------------------------

_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
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
    """Gamma function for real x, poles at non-positive integers."""
    if x == math.floor(x) and x <= 0.0:
        raise ParameterError(f"gamma pole at x = {x}")
    if x < 0.5:
        # Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    x -= 1.0
    acc = _LANCZOS_COEFFS[0]
    for i, coeff in enumerate(_LANCZOS_COEFFS[1:], start=1):
        acc += coeff / (x + i)
    t = x + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (x + 0.5) * math.exp(-t) * acc


def rgamma(x: float) -> float:
    """Reciprocal gamma, zero at the poles of gamma."""
    if x == math.floor(x) and x <= 0.0:
        return 0.0
    return 1.0 / gamma(x)


# ---------------------------------------------------------------------------
# Double-double helpers (Dekker/Knuth error-free transforms).  Only what the
# compensated Kummer series needs: values are (hi, lo) pairs with
# |lo| <= ulp(hi)/2, giving roughly 31 significant digits.
# ---------------------------------------------------------------------------

_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _two_prod(a, b):
    p = a * b
    ca = _SPLITTER * a
    ahi = ca - (ca - a)
    alo = a - ahi
    cb = _SPLITTER * b
    bhi = cb - (cb - b)
    blo = b - bhi
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


def _dd_add(x, y):
    s, e = _two_sum(x[0], y[0])
    e += x[1] + y[1]
    return _quick_two_sum(s, e)


def _dd_mul(x, y):
    p, e = _two_prod(x[0], y[0])
    e += x[0] * y[1] + x[1] * y[0]
    return _quick_two_sum(p, e)


def _dd_mul_d(x, d):
    p, e = _two_prod(x[0], d)
    e += x[1] * d
    return _quick_two_sum(p, e)


def _dd_div(x, y):
    q1 = x[0] / y[0]
    r = _dd_add(x, _dd_mul_d(y, -q1))
    q2 = (r[0] + r[1]) / y[0]
    return _quick_two_sum(q1, q2)


# ---------------------------------------------------------------------------
# Kummer's function Phi(a, c; z)
# ---------------------------------------------------------------------------

class KummerMethod(Enum):
    TAYLOR_SERIES = "taylor-series"
    ASYMPTOTIC = "asymptotic"


@dataclass(frozen=True)
class KummerParams:
    a: float
    c: float
    z: complex

    def __post_init__(self):
        _check_c(self.c)


@dataclass(frozen=True)
class KummerEval:
    value: complex
    method: KummerMethod
    abs_error_estimate: float


def _check_c(c: float) -> None:
    if c == math.floor(c) and c <= 0.0:
        raise ParameterError(f"c = {c} is a non-positive integer; series undefined")


DEFAULT_SWITCH_RADIUS = 30.0

_DD_EPS = 1.2e-32
_MAX_SERIES_TERMS = 600


def _kummer_series_dd(a: float, c: float, z: complex, tol: float):
    """Compensated Taylor sum of Phi(a, c; z); returns (value, abs error)."""
    zr, zi = z.real, z.imag
    term_re, term_im = (1.0, 0.0), (0.0, 0.0)
    sum_re, sum_im = (1.0, 0.0), (0.0, 0.0)
    max_mag = 1.0
    absz = abs(z)
    small_count = 0
    n = 0
    tail = math.inf
    while n < _MAX_SERIES_TERMS:
        # term_{n+1} = term_n * z * (a + n) / ((c + n)(n + 1))
        num = _two_sum(a, float(n))
        den = _dd_mul(_two_sum(c, float(n)), (n + 1.0, 0.0))
        new_re = _dd_add(_dd_mul_d(term_re, zr), _dd_mul_d(term_im, -zi))
        new_im = _dd_add(_dd_mul_d(term_re, zi), _dd_mul_d(term_im, zr))
        term_re = _dd_div(_dd_mul(new_re, num), den)
        term_im = _dd_div(_dd_mul(new_im, num), den)
        n += 1
        sum_re = _dd_add(sum_re, term_re)
        sum_im = _dd_add(sum_im, term_im)
        mag = math.hypot(term_re[0], term_im[0])
        max_mag = max(max_mag, mag)
        smag = math.hypot(sum_re[0], sum_im[0])
        if mag < tol * max(smag, 1e-300) and n > absz:
            small_count += 1
            if small_count >= 3:
                q = absz * abs(a + n) / ((c + n) * (n + 1))
                tail = mag * q / (1.0 - q) if q < 1.0 else mag
                break
        else:
            small_count = 0
    value = complex(sum_re[0] + sum_re[1], sum_im[0] + sum_im[1])
    err = (0.0 if tail is math.inf else tail) + 4.0 * _DD_EPS * max_mag
    err += 2.0 * 2.2e-16 * abs(value)  # final rounding to a double complex
    if tail is math.inf:
        err = math.inf
    return value, err


def _asymptotic_sum(p: float, q: float, zinv: complex, max_terms: int):
    """Sum_{n>=0} (p)_n (q)_n / n! * zinv^n truncated at the smallest term."""
    term = complex(1.0, 0.0)
    total = complex(1.0, 0.0)
    prev_mag = 1.0
    omitted = abs(zinv) * abs(p * q)
    for n in range(max_terms):
        term = term * (p + n) * (q + n) / (n + 1.0) * zinv
        mag = abs(term)
        if mag >= prev_mag:
            omitted = mag
            break
        total += term
        prev_mag = mag
        omitted = mag * abs((p + n + 1) * (q + n + 1) / (n + 2.0)) * abs(zinv)
    return total, omitted


def _kummer_asymptotic(a: float, c: float, z: complex, damped: bool = False,
                       max_terms: int = 80):
    """Large-|z| expansion of Phi (or of e^(-z/2) Phi when damped).

    Branch choice: the algebraic factor is taken as e^(i pi eps a) z^(-a)
    with eps = sign(Im z) (principal branch), which agrees with the Taylor
    branch on the imaginary axis; that agreement is exercised in tests.
    """
    eps_sign = 1.0 if z.imag >= 0.0 else -1.0
    s1, om1 = _asymptotic_sum(a, a - c + 1.0, -1.0 / z, max_terms)
    s2, om2 = _asymptotic_sum(c - a, 1.0 - a, 1.0 / z, max_terms)
    gc = gamma(c)
    k1 = gc * rgamma(c - a)
    k2 = gc * rgamma(a)
    phase = complex(math.cos(math.pi * eps_sign * a),
                    math.sin(math.pi * eps_sign * a))
    alg = k1 * phase * z ** (-a)
    exp_factor = np.exp(z - z / 2.0) if damped else np.exp(z)
    dmp = np.exp(-z / 2.0) if damped else 1.0
    expo = k2 * exp_factor * z ** (a - c)
    value = alg * dmp * s1 + expo * s2
    err = 2.0 * (abs(alg) * om1 + abs(expo) * om2)
    return complex(value), float(err)


def kummer(params: KummerParams, switch_radius: float = DEFAULT_SWITCH_RADIUS,
           tol: float | None = None) -> KummerEval:
    """Evaluate Phi(a, c; z), choosing the branch by |z| against switch_radius.

    Raises AccuracyError (carrying the best-effort KummerEval) when `tol` is
    given and the internal error estimate exceeds it.
    """
    if switch_radius <= 0.0:
        raise ParameterError("switch_radius must be positive")
    a, c, z = params.a, params.c, params.z
    if abs(z) < switch_radius:
        value, err = _kummer_series_dd(a, c, z, 1e-18)
        result = KummerEval(value, KummerMethod.TAYLOR_SERIES, err)
    else:
        value, err = _kummer_asymptotic(a, c, z)
        result = KummerEval(value, KummerMethod.ASYMPTOTIC, err)
    if tol is not None and result.abs_error_estimate > tol:
        raise AccuracyError(
            f"estimated error {result.abs_error_estimate:.3e} exceeds tol {tol:.3e}",
            best=result)
    return result


def kummer_transform_check(params: KummerParams,
                           switch_radius: float = DEFAULT_SWITCH_RADIUS) -> float:
    """Residual of the reflection identity Phi(a,c;z) = e^z Phi(c-a,c;-z)."""
    lhs = kummer(params, switch_radius).value
    rhs = np.exp(params.z) * kummer(
        KummerParams(params.c - params.a, params.c, -params.z),
        switch_radius).value
    return abs(lhs - rhs)


def kummer_derivative(params: KummerParams, order: int = 1,
                      switch_radius: float = DEFAULT_SWITCH_RADIUS) -> KummerEval:
    """d^n/dz^n Phi(a,c;z) = (a)_n/(c)_n Phi(a+n, c+n; z)."""
    if order < 1:
        raise ParameterError("order must be >= 1")
    _check_c(params.c + order)
    ratio = 1.0
    for k in range(order):
        ratio *= (params.a + k) / (params.c + k)
    shifted = kummer(KummerParams(params.a + order, params.c + order, params.z),
                     switch_radius)
    return KummerEval(ratio * shifted.value, shifted.method,
                      abs(ratio) * shifted.abs_error_estimate)


def gauss_f_at_one(a: float, b: float, c: float) -> float:
    """Gauss summation F(a,b;c;1) = Gamma(c)Gamma(c-a-b)/(Gamma(c-a)Gamma(c-b))."""
    if c - a - b <= 0.0:
        raise DivergenceError(f"F(a,b;c;1) diverges: c-a-b = {c - a - b} <= 0")
    return gamma(c) * gamma(c - a - b) / (gamma(c - a) * gamma(c - b))


# ---------------------------------------------------------------------------
# Damped, vectorized evaluation e^(-z/2) Phi(a, c; z) for z = i*y, y >= 0.
#
# g(z) = e^(-z/2) Phi(a,c;z) solves z g'' + c g' + (c/2 - a) g - z g / 4 = 0,
# giving the three-term Taylor recurrence
#   g_{n+1} = ((a - c/2) g_n + g_{n-1}/4) / ((n+1)(n+c)),   g_0 = 1.
# Its cancellation on the imaginary axis is only e^(|z|/2).
# ---------------------------------------------------------------------------

def damped_kummer(a: float, c: float, zim, switch_radius: float = DEFAULT_SWITCH_RADIUS,
                  max_terms: int = 400) -> np.ndarray:
    """e^(-z/2) Phi(a, c; z) at z = i*zim for a real array zim >= 0."""
    _check_c(c)
    zim = np.asarray(zim, dtype=float)
    out = np.empty(zim.shape, dtype=complex)
    small = np.abs(zim) < switch_radius
    if np.any(small):
        out[small] = _damped_series(a, c, zim[small], max_terms)
    if np.any(~small):
        out[~small] = _damped_asymptotic_many(a, c, zim[~small])
    return out


def _asymptotic_sum_many(p: float, q: float, zinv: np.ndarray, max_terms: int = 80):
    """Vectorized smallest-term truncation of sum (p)_n (q)_n / n! zinv^n."""
    term = np.ones(zinv.shape, dtype=complex)
    total = np.ones(zinv.shape, dtype=complex)
    prev_mag = np.ones(zinv.shape)
    active = np.ones(zinv.shape, dtype=bool)
    for n in range(max_terms):
        term = term * ((p + n) * (q + n) / (n + 1.0)) * zinv
        mag = np.abs(term)
        active &= mag < prev_mag
        total = np.where(active, total + term, total)
        prev_mag = mag
        if not active.any():
            break
    return total


def _damped_asymptotic_many(a: float, c: float, zim: np.ndarray) -> np.ndarray:
    """Vectorized large-|z| form of e^(-z/2) Phi(a, c; z), z = i*zim >= 0."""
    z = 1j * zim
    s1 = _asymptotic_sum_many(a, a - c + 1.0, -1.0 / z)
    s2 = _asymptotic_sum_many(c - a, 1.0 - a, 1.0 / z)
    gc = gamma(c)
    phase = complex(math.cos(math.pi * a), math.sin(math.pi * a))
    alg = gc * rgamma(c - a) * phase * z ** (-a) * np.exp(-z / 2.0)
    expo = gc * rgamma(a) * np.exp(z / 2.0) * z ** (a - c)
    return alg * s1 + expo * s2


def _damped_series(a: float, c: float, zim: np.ndarray, max_terms: int) -> np.ndarray:
    z = 1j * zim
    g_prev = np.zeros(zim.shape, dtype=complex)   # g_{-1} handled via n=0 case
    g_curr = np.ones(zim.shape, dtype=complex)
    total = g_curr.copy()
    zpow = np.ones(zim.shape, dtype=complex)
    alpha = a - c / 2.0
    done = np.zeros(zim.shape, dtype=bool)
    small_count = np.zeros(zim.shape, dtype=np.int8)
    for n in range(max_terms):
        g_next = (alpha * g_curr + 0.25 * g_prev) / ((n + 1.0) * (n + c))
        zpow = zpow * z
        term = g_next * zpow
        total = np.where(done, total, total + term)
        # Three consecutive small terms before stopping: for c = 2a every
        # odd-index coefficient vanishes identically.
        small = (np.abs(term) < 1e-17 * np.maximum(np.abs(total), 1e-300)) \
            & (n > np.abs(zim))
        small_count = np.where(small, small_count + 1, 0)
        done |= small_count >= 3
        if done.all():
            break
        g_prev, g_curr = g_curr, g_next
    return total


# ---------------------------------------------------------------------------
# Gauss-Jacobi quadrature for the weight (1 - s^2)^(-gamma) on (0, 1).
#
# The weight is singular only at s = 1.  We take the Gauss-Jacobi rule for
# (1-s)^(-gamma) and fold the analytic factor (1+s)^(-gamma) into the
# weights; the rule then integrates g(s) (1-s^2)^(-gamma) with geometric
# accuracy in the number of nodes (the folded factor is analytic on [0,1]).
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JacobiRule:
    gamma: float
    nodes: np.ndarray
    weights: np.ndarray
    moment_error: float

    def integrate(self, g) -> float:
        """Apply the rule to callable or node-sampled g."""
        vals = g(self.nodes) if callable(g) else np.asarray(g)
        return float(np.dot(self.weights, vals))


def weight_moment(gamma_: float) -> float:
    """Integral of (1 - s^2)^(-gamma) over (0, 1)."""
    return 0.5 * math.sqrt(math.pi) * gamma(1.0 - gamma_) / gamma(1.5 - gamma_)


def jacobi_rule(gamma_: float, npoints: int) -> JacobiRule:
    """Quadrature rule for integrals of g(s) (1-s^2)^(-gamma) over (0, 1)."""
    nodes, weights = _panel_rule(0.0, gamma_, npoints)
    moment_err = abs(float(np.sum(weights)) - weight_moment(gamma_))
    return JacobiRule(gamma_, nodes, weights, moment_err)


def endpoint_panel_rule(lo: float, gamma_: float, npoints: int):
    """Nodes/weights for g(s)(1-s^2)^(-gamma) over (lo, 1), 0 <= lo < 1."""
    if not 0.0 <= lo < 1.0:
        raise ParameterError(f"panel start {lo} outside [0, 1)")
    return _panel_rule(lo, gamma_, npoints)


def _panel_rule(lo: float, gamma_: float, npoints: int):
    if not 0.0 <= gamma_ < 0.5:
        raise ParameterError(f"gamma = {gamma_} outside [0, 1/2)")
    if npoints < 2:
        raise ParameterError("npoints must be >= 2")
    x, lam = roots_jacobi(npoints, -gamma_, 0.0)
    half = (1.0 - lo) / 2.0
    s = lo + half * (x + 1.0)
    w = lam * half ** (1.0 - gamma_) * (1.0 + s) ** (-gamma_)
    return s, w


def legendre_panel_rule(a: float, b: float, npoints: int, gamma_: float = 0.0):
    """Gauss-Legendre nodes/weights on (a, b), optionally carrying the
    (1-s^2)^(-gamma) weight as a smooth factor (panel must avoid s = 1)."""
    x, lam = roots_legendre(npoints)
    half = (b - a) / 2.0
    s = a + half * (x + 1.0)
    w = lam * half
    if gamma_ != 0.0:
        w = w * (1.0 - s * s) ** (-gamma_)
    return s, w
