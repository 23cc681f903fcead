"""Exact term algebra for differential operators with c * t^alpha * x^beta
coefficients (alpha rational), plus the tangent-vector-field catalog and the
mechanical verification of its commutator identities.

Operators whose coefficients stay in the monomial ring (rational powers of t,
integer powers of x) are composed exactly over Fraction arithmetic; identities
between them are checked symbolically (residual is an empty expression).
Identities whose printed coefficients contain |x| or rational-function
denominators are verified pointwise: both sides are applied to a catalog of
monomial test functions at sampled region points, with coefficient
derivatives obtained by (nested) forward-mode jets, so the only error is
float roundoff.  Printed identities that fail are re-fitted: unknown or
suspect scalar coefficients are recovered by least squares at the sample
points and reported, never silently corrected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

Frac = Fraction


def _falling(p: Fraction, k: int) -> Fraction:
    out = Frac(1)
    for j in range(k):
        out *= p - j
    return out


# ---------------------------------------------------------------------------
# Exact operator expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorTerm:
    coeff: Fraction
    t_power: Fraction
    x_powers: tuple[int, ...]
    derivs: tuple[int, ...]  # (j0 for d/dt, j1 ... jn)


class OperatorExpr:
    """Canonical sum of OperatorTerms over a fixed spatial dimension n."""

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms=None):
        self.n = n
        self._terms: dict = {}
        if terms:
            for key, coeff in terms.items():
                self._add_term(key, coeff)

    def _add_term(self, key, coeff):
        if coeff == 0:
            return
        new = self._terms.get(key, Frac(0)) + coeff
        if new == 0:
            self._terms.pop(key, None)
        else:
            self._terms[key] = new

    @classmethod
    def term(cls, n: int, coeff, t_power=0, x_powers=None, derivs=None):
        x_powers = tuple(x_powers) if x_powers is not None else (0,) * n
        derivs = tuple(derivs) if derivs is not None else (0,) * (n + 1)
        expr = cls(n)
        expr._add_term((Frac(t_power), x_powers, derivs), Frac(coeff))
        return expr

    @classmethod
    def zero(cls, n: int):
        return cls(n)

    @property
    def terms(self) -> tuple[OperatorTerm, ...]:
        keys = sorted(self._terms, key=lambda k: (k[2], k[1], k[0]))
        return tuple(OperatorTerm(self._terms[k], k[0], k[1], k[2]) for k in keys)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def order(self) -> int:
        return max((sum(k[2]) for k in self._terms), default=0)

    def __add__(self, other):
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        out = OperatorExpr(self.n, dict(self._terms))
        for key, coeff in other._terms.items():
            out._add_term(key, coeff)
        return out

    def __neg__(self):
        return OperatorExpr(self.n, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, scalar):
        scalar = Frac(scalar)
        return OperatorExpr(self.n, {k: scalar * c for k, c in self._terms.items()})

    def __eq__(self, other):
        return isinstance(other, OperatorExpr) and self.n == other.n \
            and self._terms == other._terms

    def __hash__(self):
        return hash((self.n, frozenset(self._terms.items())))

    def __repr__(self):
        if self.is_zero():
            return "0"
        bits = []
        for term in self.terms:
            parts = [str(term.coeff)]
            if term.t_power:
                parts.append(f"t^{term.t_power}")
            for i, p in enumerate(term.x_powers, start=1):
                if p:
                    parts.append(f"x{i}^{p}" if p != 1 else f"x{i}")
            if term.derivs[0]:
                parts.append(f"dt^{term.derivs[0]}" if term.derivs[0] != 1 else "dt")
            for i, j in enumerate(term.derivs[1:], start=1):
                if j:
                    parts.append(f"d{i}^{j}" if j != 1 else f"d{i}")
            bits.append("*".join(parts))
        return " + ".join(bits)


def compose(A: OperatorExpr, B: OperatorExpr) -> OperatorExpr:
    """Operator product A B with exact Leibniz expansion."""
    if A.n != B.n:
        raise ValueError("dimension mismatch")
    n = A.n
    out = OperatorExpr(n)
    for (ta, xa, da), ca in A._terms.items():
        for (tb, xb, db), cb in B._terms.items():
            # distribute each derivative of A over B's coefficient t^tb x^xb
            j0 = da[0]
            for k0 in range(j0 + 1):
                c0 = math.comb(j0, k0) * _falling(tb, k0)
                if c0 == 0:
                    continue
                _expand_x(out, n, ca * cb * c0, ta + tb - k0, xa, xb,
                          da, db, k0, 1, Frac(1), [])
    return out


def _expand_x(out, n, base_coeff, t_pow, xa, xb, da, db, k0, axis, acc, ks):
    if axis > n:
        x_new = tuple(xa[i] + xb[i] - ks[i] for i in range(n))
        d_new = (da[0] - k0 + db[0],) + tuple(
            da[i + 1] - ks[i] + db[i + 1] for i in range(n))
        coeff = base_coeff * acc
        if coeff != 0:
            new = out._terms.get((t_pow, x_new, d_new), Frac(0)) + coeff
            if new == 0:
                out._terms.pop((t_pow, x_new, d_new), None)
            else:
                out._terms[(t_pow, x_new, d_new)] = new
        return
    i = axis - 1
    ji, bi = da[axis], xb[i]
    for ki in range(min(ji, bi) + 1):
        ci = math.comb(ji, ki) * _falling(Frac(bi), ki)
        _expand_x(out, n, base_coeff, t_pow, xa, xb, da, db, k0, axis + 1,
                  acc * ci, ks + [ki])


def commutator(A: OperatorExpr, B: OperatorExpr) -> OperatorExpr:
    return compose(A, B) - compose(B, A)


# ---------------------------------------------------------------------------
# Forward-mode jets (value + gradient in the n+1 variables (t, x1..xn)).
# Nesting jets yields exact second derivatives; used to apply vector fields
# whose coefficients contain |x| or rational denominators.
# ---------------------------------------------------------------------------

class Jet:
    __slots__ = ("val", "grad")

    def __init__(self, val, grad):
        self.val = val
        self.grad = list(grad)

    @staticmethod
    def vars(t, x):
        """Jet-lift of the coordinates at a point (components of x listed)."""
        dim = 1 + len(x)
        zeros = [0.0] * dim
        jt = Jet(t, [1.0 if i == 0 else 0.0 for i in range(dim)])
        jxs = []
        for k, xk in enumerate(x):
            g = list(zeros)
            g[k + 1] = 1.0
            jxs.append(Jet(xk, g))
        return jt, jxs

    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        return Jet(other, [0.0 * g for g in self.grad])

    def __add__(self, other):
        o = self._lift(other)
        return Jet(self.val + o.val, [a + b for a, b in zip(self.grad, o.grad)])

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.val, [-g for g in self.grad])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        return Jet(self.val * o.val,
                   [a * o.val + self.val * b for a, b in zip(self.grad, o.grad)])

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        inv = 1.0 / o.val if not isinstance(o.val, Jet) else o.val ** -1.0
        val = self.val * inv
        return Jet(val, [(a - val * b) * inv for a, b in zip(self.grad, o.grad)])

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, p):
        if isinstance(p, int) and p >= 0:
            out = Jet(1.0 * self.val ** 0 if isinstance(self.val, Jet) else 1.0,
                      [0.0 * g for g in self.grad])
            for _ in range(p):
                out = out * self
            return out
        val = self.val ** p
        factor = p * self.val ** (p - 1.0)
        return Jet(val, [factor * g for g in self.grad])

    def sqrt(self):
        return self ** 0.5


def _grad_component(fn, t, x, index):
    jt, jxs = Jet.vars(t, list(x))
    out = fn(jt, jxs)
    if not isinstance(out, Jet):
        return t * 0.0
    return out.grad[index]


def expr_as_function(expr: OperatorExpr, g):
    """Jet-capable callable for (expr g)(t, x); g is itself jet-capable."""
    def apply_at(t, x):
        total = 0.0
        for term in expr.terms:
            df = g
            for idx, cnt in enumerate(term.derivs):
                for _ in range(cnt):
                    df = _partial(df, idx)
            val = df(t, x)
            coeff = float(term.coeff) * _tpow(t, term.t_power)
            for i, p in enumerate(term.x_powers):
                for _ in range(p):
                    coeff = coeff * x[i]
            total = total + coeff * val
        return total
    return apply_at


def _partial(fn, index):
    def dfn(t, x):
        return _grad_component(fn, t, x, index)
    return dfn


def _tpow(t, p: Fraction):
    if p == 0:
        return 1.0 if not isinstance(t, Jet) else t ** 0
    return t ** float(p)


class PointField:
    """First-order vector field sum_k c_k(t, x) d_k with jet-capable
    coefficient callables (index 0 is d/dt)."""

    def __init__(self, n: int, coef_fn, name: str = ""):
        self.n = n
        self.coef_fn = coef_fn  # (t, x) -> list of n+1 coefficients
        self.name = name

    def as_function(self, g):
        def apply_at(t, x):
            coefs = self.coef_fn(t, x)
            total = 0.0
            for idx in range(self.n + 1):
                ck = coefs[idx]
                if ck is None:
                    continue
                total = total + ck * _partial(g, idx)(t, x)
            return total
        return apply_at


def chain_apply(ops, g):
    """Compose operators (rightmost acts first) into a jet-capable callable.

    Each op is an OperatorExpr, a PointField, or a bare coefficient callable
    (t, x) -> scalar used as a multiplication operator.
    """
    fn = g
    for op in reversed(ops):
        if isinstance(op, OperatorExpr):
            fn = expr_as_function(op, fn)
        elif isinstance(op, PointField):
            fn = op.as_function(fn)
        elif callable(op):
            inner = fn
            fn = (lambda inner_, coef: lambda t, x: coef(t, x) * inner_(t, x))(fn, op)
        else:
            raise TypeError(f"cannot apply {op!r}")
    return fn


# ---------------------------------------------------------------------------
# Vector-field catalog
# ---------------------------------------------------------------------------

class VectorFieldCatalog:
    """Constructors for the tangent fields of the cusp cone |x| = phi(t) and
    the characteristic wedges x_1 = +-phi(t), with the printed coefficients.
    """

    def __init__(self, m: int, n: int):
        self.m = m
        self.n = n
        self.half_m = Frac(m, 2)

    def unit(self) -> OperatorExpr:
        return OperatorExpr.term(self.n, 1)

    def dt(self) -> OperatorExpr:
        return OperatorExpr.term(self.n, 1, derivs=[1] + [0] * self.n)

    def dx(self, i: int) -> OperatorExpr:
        d = [0] * (self.n + 1)
        d[i] = 1
        return OperatorExpr.term(self.n, 1, derivs=d)

    def P(self) -> OperatorExpr:
        """Degenerate wave operator dt^2 - t^m Laplace."""
        d2t = [2] + [0] * self.n
        expr = OperatorExpr.term(self.n, 1, derivs=d2t)
        for i in range(1, self.n + 1):
            d = [0] * (self.n + 1)
            d[i] = 2
            expr = expr - OperatorExpr.term(self.n, 1, t_power=self.m, derivs=d)
        return expr

    def L0(self) -> OperatorExpr:
        dtv = [1] + [0] * self.n
        expr = OperatorExpr.term(self.n, 2, t_power=1, derivs=dtv)
        for i in range(1, self.n + 1):
            x = [0] * self.n
            x[i - 1] = 1
            d = [0] * (self.n + 1)
            d[i] = 1
            expr = expr + OperatorExpr.term(self.n, self.m + 2, x_powers=x, derivs=d)
        return expr

    def L_smooth(self, i: int) -> OperatorExpr:
        """Smooth field 2 t^(m+1) d_i + (m+2) x_i d_t (Lemma 4.1 list)."""
        d = [0] * (self.n + 1)
        d[i] = 1
        x = [0] * self.n
        x[i - 1] = 1
        dtv = [1] + [0] * self.n
        return OperatorExpr.term(self.n, 2, t_power=self.m + 1, derivs=d) + \
            OperatorExpr.term(self.n, self.m + 2, x_powers=x, derivs=dtv)

    def Lbar(self, i: int) -> OperatorExpr:
        """Revised field 2 t^(m/2+1) d_i + (m+2) x_i t^(-m/2) d_t."""
        d = [0] * (self.n + 1)
        d[i] = 1
        x = [0] * self.n
        x[i - 1] = 1
        dtv = [1] + [0] * self.n
        return OperatorExpr.term(self.n, 2, t_power=self.half_m + 1, derivs=d) + \
            OperatorExpr.term(self.n, self.m + 2, t_power=-self.half_m,
                              x_powers=x, derivs=dtv)

    def L_rot(self, i: int, j: int) -> OperatorExpr:
        """Rotation x_i d_j - x_j d_i."""
        xi = [0] * self.n
        xi[i - 1] = 1
        xj = [0] * self.n
        xj[j - 1] = 1
        di = [0] * (self.n + 1)
        di[i] = 1
        dj = [0] * (self.n + 1)
        dj[j] = 1
        return OperatorExpr.term(self.n, 1, x_powers=xi, derivs=dj) - \
            OperatorExpr.term(self.n, 1, x_powers=xj, derivs=di)

    def Lbar0(self) -> OperatorExpr:
        """Wedge field 2 t d_t + (m+2) x_1 d_1 (Lemma 4.3)."""
        dtv = [1] + [0] * self.n
        x1 = [0] * self.n
        x1[0] = 1
        d1 = [0] * (self.n + 1)
        d1[1] = 1
        return OperatorExpr.term(self.n, 2, t_power=1, derivs=dtv) + \
            OperatorExpr.term(self.n, self.m + 2, x_powers=x1, derivs=d1)

    def R(self, k: int) -> OperatorExpr:
        if k < 2:
            raise ValueError("R_k defined for k >= 2")
        return self.dx(k)

    # -- fields with non-monomial coefficients (pointwise machinery) --------

    def radius(self):
        return lambda t, x: sum(xi * xi for xi in x) ** 0.5

    def N1_0(self) -> PointField:
        """|x| d_t on the region 0 < t < C|x|."""
        r = self.radius()
        return PointField(self.n, lambda t, x: [r(t, x)] + [None] * self.n, "N1^0")

    def N1(self, i: int) -> PointField:
        """t^(m/2) |x| d_i."""
        r = self.radius()
        m = self.m

        def coefs(t, x):
            out = [None] * (self.n + 1)
            out[i] = t ** (m / 2.0) * r(t, x)
            return out
        return PointField(self.n, coefs, f"N1^{i}")

    def N2(self, i: int) -> PointField:
        """(|x| - 2 t^((m+2)/2) / (m+2)) d_i."""
        r = self.radius()
        m = self.m

        def coefs(t, x):
            out = [None] * (self.n + 1)
            out[i] = r(t, x) - 2.0 / (m + 2) * t ** ((m + 2) / 2.0)
            return out
        return PointField(self.n, coefs, f"N2^{i}")

    def N3_0(self) -> OperatorExpr:
        return OperatorExpr.term(self.n, 1, t_power=1, derivs=[1] + [0] * self.n)

    def N3(self, i: int) -> OperatorExpr:
        d = [0] * (self.n + 1)
        d[i] = 1
        return OperatorExpr.term(self.n, 1, t_power=self.half_m + 1, derivs=d)

    def N2pm_wedge(self, sign: int) -> OperatorExpr:
        """(x_1 -+ 2 t^((m+2)/2)/(m+2)) d_1 (Remark 4.4); monomial, exact."""
        d1 = [0] * (self.n + 1)
        d1[1] = 1
        x1 = [0] * self.n
        x1[0] = 1
        return OperatorExpr.term(self.n, 1, x_powers=x1, derivs=d1) - \
            OperatorExpr.term(self.n, Frac(2 * sign, self.m + 2),
                              t_power=self.half_m + 1, derivs=d1)

    def N1_wedge(self) -> OperatorExpr:
        """x_1 d_t (Lemma 4.5 on W_1); monomial, exact."""
        x1 = [0] * self.n
        x1[0] = 1
        return OperatorExpr.term(self.n, 1, x_powers=x1, derivs=[1] + [0] * self.n)

    def N3_wedge(self) -> OperatorExpr:
        return self.N3_0()

    def N3p_wedge(self) -> OperatorExpr:
        return self.N3(1)

    def surface_gamma0(self):
        """Defining function |x|^2 - phi(t)^2 of the cusp cone."""
        m = self.m

        def fn(t, x):
            return sum(xi * xi for xi in x) - 4.0 * t ** (m + 2.0) / (m + 2) ** 2
        return fn

    def surface_gamma1(self, sign: int = 1):
        """Defining function x_1 -+ phi(t) of the characteristic wedge."""
        m = self.m

        def fn(t, x):
            return x[0] - sign * 2.0 * t ** ((m + 2.0) / 2.0) / (m + 2)
        return fn


# ---------------------------------------------------------------------------
# Region samplers (Definitions 4.2 / 4.4)
# ---------------------------------------------------------------------------

def sample_region(region: str, m: int, n: int, count: int, rng) -> np.ndarray:
    """Sample (t, x) rows from the named region with t, |x| in O(1) ranges.

    Regions: omega1 (t << |x|), omega2 (near the cone |x| ~ phi(t)),
    omega3 (inside, away from the cone), w1/w2p/w2m/w3 (the x_1 analogues).
    """
    pts = np.empty((count, 1 + n))
    kap = 2.0 / (m + 2)
    for row in range(count):
        x = rng.uniform(0.3, 1.0, size=n) * rng.choice([-1.0, 1.0], size=n)
        if region == "omega1":
            t = rng.uniform(0.05, 0.4) * float(np.linalg.norm(x))
        elif region in ("omega2", "omega3"):
            t = rng.uniform(0.8, 1.2)
            radius = kap * t ** ((m + 2) / 2.0)
            scale = radius * (1.0 + rng.uniform(-0.2, 0.2)) if region == "omega2" \
                else radius * rng.uniform(0.25, 0.55)
            x = x / np.linalg.norm(x) * scale
        elif region == "w1":
            t = rng.uniform(0.05, 0.4) * abs(x[0])
        elif region in ("w2p", "w2m"):
            t = rng.uniform(0.8, 1.2)
            sign = 1.0 if region == "w2p" else -1.0
            x[0] = sign * kap * t ** ((m + 2) / 2.0) * (1.0 + rng.uniform(-0.2, 0.2))
        elif region == "w3":
            t = rng.uniform(0.8, 1.2)
            x[0] = np.sign(x[0]) * kap * t ** ((m + 2) / 2.0) * rng.uniform(0.25, 0.55)
        else:
            raise ValueError(f"unknown region {region!r}")
        pts[row, 0] = t
        pts[row, 1:] = x
    return pts


# ---------------------------------------------------------------------------
# Identity verification
# ---------------------------------------------------------------------------

DEFAULT_TEST_POWERS = (
    (Frac(3), (2, 1)),
    (Frac(5, 2), (1, 2)),
    (Frac(2), (3, 0)),
    (Frac(7, 2), (0, 3)),
    (Frac(4), (1, 1)),
    (Frac(3), (2, 2)),
)


def test_functions(n: int):
    """Monomial catalog t^p x^q; half-integer t-powers included since the
    bar fields produce them.  Every derivative used by the catalog fields is
    nonzero on these."""
    fns = []
    for t_pow, xp in DEFAULT_TEST_POWERS:
        q = (xp + (1,) * n)[:n]
        fns.append(_monomial(t_pow, q))
    return fns


def _monomial(t_pow: Fraction, x_pows):
    def fn(t, x):
        out = _tpow(t, t_pow)
        for i, p in enumerate(x_pows):
            for _ in range(p):
                out = out * x[i]
        return out
    fn.t_pow = t_pow
    fn.x_pows = tuple(x_pows)
    return fn


@dataclass
class IdentityReport:
    name: str
    mode: str                   # "symbolic" | "numeric"
    residual: float
    verdict: str                # "pass" | "reconstructed" | "fail"
    detail: str = ""
    fitted: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict in ("pass", "reconstructed")


def verify_identity(lhs, rhs, region: str | None = None, samples: int = 100,
                    m: int = 1, n: int = 2, seed: int = 0,
                    tol: float = 1e-8, name: str = "") -> IdentityReport:
    """Check lhs == rhs, symbolically when both are exact expressions,
    otherwise numerically on `samples` points of `region`."""
    if isinstance(lhs, OperatorExpr) and isinstance(rhs, OperatorExpr):
        diff = lhs - rhs
        residual = 0.0 if diff.is_zero() else float(
            max(abs(t.coeff) for t in diff.terms))
        verdict = "pass" if diff.is_zero() else "fail"
        return IdentityReport(name, "symbolic", residual, verdict,
                              detail="" if diff.is_zero() else repr(diff))
    residual = numeric_residual(lhs, rhs, region or "omega2", samples, m, n, seed)
    return IdentityReport(name, "numeric", residual,
                          "pass" if residual <= tol else "fail")


def numeric_residual(lhs_ops, rhs_ops, region, samples, m, n, seed,
                     points=None) -> float:
    """Max |LHS f - RHS f| over the test catalog at sampled region points.

    lhs_ops / rhs_ops: either a list of operator chains (summed), or a single
    chain (list of operators as accepted by chain_apply).
    """
    rng = np.random.default_rng(seed)
    if points is None:
        points = sample_region(region, m, n, samples, rng)
    worst = 0.0
    for f in test_functions(n):
        lhs_fn = _sum_chains(lhs_ops, f)
        rhs_fn = _sum_chains(rhs_ops, f)
        for p in points:
            t, x = float(p[0]), [float(v) for v in p[1:]]
            worst = max(worst, abs(lhs_fn(t, x) - rhs_fn(t, x)))
    return worst


def _sum_chains(ops, f):
    if isinstance(ops, (OperatorExpr, PointField)):
        ops = [[ops]]
    elif ops and not isinstance(ops[0], (list, tuple)):
        ops = [ops]
    fns = [chain_apply(list(chain), f) for chain in ops]
    return lambda t, x: sum(fn(t, x) for fn in fns)


def solve_scalar_coefficients(defect_chains, basis_chains, region, m, n,
                              samples=40, seed=0):
    """Fit constants c_k with  defect = sum_k c_k * basis_k  in the
    least-squares sense over test functions and region samples.

    Returns (coefficients, rms residual after the fit).
    """
    rng = np.random.default_rng(seed)
    points = sample_region(region, m, n, samples, rng)
    rows, target = [], []
    for f in test_functions(n):
        dfn = _sum_chains(defect_chains, f)
        bfns = [_sum_chains(b, f) for b in basis_chains]
        for p in points:
            t, x = float(p[0]), [float(v) for v in p[1:]]
            rows.append([bf(t, x) for bf in bfns])
            target.append(dfn(t, x))
    A = np.asarray(rows)
    b = np.asarray(target)
    coeffs, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coeffs - b) ** 2)))
    scale = max(1.0, float(np.sqrt(np.mean(b * b))))
    return coeffs, resid / scale


# ---------------------------------------------------------------------------
# Conormal probe: nested central differences along catalog fields
# ---------------------------------------------------------------------------

def conormal_probe(u, fields, point, h: float, m: int, n: int,
                   catalog: VectorFieldCatalog | None = None) -> float:
    """Apply the composition of named vector fields to an evaluable field u
    by nested central differences with step h; coefficients evaluated
    exactly at each stencil point.

    `u` is a callable u(t, x) -> float; `fields` is a list of names from
    {"L0", "Lbar1", ..., "P"} or of (OperatorExpr | PointField) objects.
    """
    cat = catalog or VectorFieldCatalog(m, n)
    resolved = [_resolve_field(cat, f) for f in fields]

    def eval_chain(ops, t, x):
        if not ops:
            return u(t, list(x))
        head, rest = ops[0], ops[1:]
        coefs = _field_coefs(head, t, x)
        total = 0.0
        for idx, ck in enumerate(coefs):
            if not ck:
                continue
            if idx == 0:
                up = eval_chain(rest, t + h, x)
                dn = eval_chain(rest, t - h, x)
            else:
                xs_up = list(x)
                xs_up[idx - 1] += h
                xs_dn = list(x)
                xs_dn[idx - 1] -= h
                up = eval_chain(rest, t, xs_up)
                dn = eval_chain(rest, t, xs_dn)
            total += ck * (up - dn) / (2.0 * h)
        return total

    t0, x0 = float(point[0]), [float(v) for v in point[1:]]
    return eval_chain(resolved, t0, x0)


def _resolve_field(cat: VectorFieldCatalog, f):
    if isinstance(f, (OperatorExpr, PointField)):
        return f
    name = str(f)
    if name == "L0":
        return cat.L0()
    if name.startswith("Lbar") and name != "Lbar0":
        return cat.Lbar(int(name[4:]))
    if name == "Lbar0":
        return cat.Lbar0()
    if name.startswith("Lrot"):
        i, j = int(name[4]), int(name[5])
        return cat.L_rot(i, j)
    if name.startswith("N2"):
        return cat.N2(int(name[2:]))
    if name.startswith("R"):
        return cat.R(int(name[1:]))
    raise ValueError(f"unknown field name {name!r}")


def _field_coefs(op, t, x):
    """First-order coefficient list (c_0 ... c_n) at a numeric point."""
    if isinstance(op, PointField):
        coefs = op.coef_fn(t, list(x))
        return [0.0 if c is None else float(c) for c in coefs]
    if isinstance(op, OperatorExpr):
        if op.order > 1:
            raise ValueError("conormal probe expects first-order fields")
        coefs = [0.0] * (op.n + 1)
        for term in op.terms:
            idx = next(i for i, j in enumerate(term.derivs) if j)
            val = float(term.coeff) * t ** float(term.t_power)
            for i, p in enumerate(term.x_powers):
                val *= x[i] ** p
            coefs[idx] += val
        return coefs
    raise TypeError(f"cannot take coefficients of {op!r}")
