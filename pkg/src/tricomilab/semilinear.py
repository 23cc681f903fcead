"""Local-in-time solution of d_t^2 u - t^m Laplace(u) = f(t, x, u) by the
contraction scheme: split u = u1 + u2 + w, where u1 propagates the initial
velocity, u2 absorbs f(t, x, 0), and w is the fixed point of

    F(w) = E(f(t, x, u1 + u2 + w) - f(t, x, 0)),

E being the zero-data inhomogeneous solve.  Iterations run on a uniform
time grid with the Duhamel integral evaluated by composite Gauss-Legendre
panels between samples (the integrand is interpolated cubically at the
panel nodes).  The report records per-step contraction factors of the
composite norm

    |||w(t)||| = ||w||_{H^{s0+p0-d}} + t^{(m+2)p1/2-2} ||w||_{H^{s0+p1-d}}
                 + ||dw/dt||_{H^{3/(m+2)+p2-d}},     s0 = (m+6)/(2(m+2)),

evaluated spectrally with d = 0.05 at the sampled times (the weighted
middle term is also reported without its t-weight, which blows up at the
first positive sample for small p1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import specfun
from .data import InitialData
from .propagator import GridSpec, SpectralField, TricomiParams, multiplier_arrays

DELTA = 0.05


class DivergenceError(RuntimeError):
    """No contraction even after halving the local horizon to its floor."""


def p0_of(m: int) -> float:
    return 4.0 / (m + 2) if m >= 2 else 1.0


def p1_of(m: int) -> float:
    return (m + 8.0) / (2.0 * (m + 2)) if m >= 4 else 1.0


def p2_of(m: int) -> float:
    return min(2.0 / (m + 2), m / (2.0 * (m + 2)))


# ---------------------------------------------------------------------------
# Right-hand sides
# ---------------------------------------------------------------------------

@dataclass
class NonlinearRHS:
    """f(t, X, u) with X the tuple of coordinate arrays; f_u optional
    (finite differences otherwise, used only for reporting)."""

    f: callable
    f_u: callable | None = None
    name: str = "custom"

    @classmethod
    def zero(cls):
        return cls(f=lambda t, X, u: np.zeros_like(u),
                   f_u=lambda t, X, u: np.zeros_like(u), name="zero")

    @classmethod
    def cubic(cls, strength: float = 1.0):
        return cls(f=lambda t, X, u: -strength * u ** 3,
                   f_u=lambda t, X, u: -3.0 * strength * u ** 2, name="cubic")

    @classmethod
    def source(cls, g: callable):
        """u-independent source g(t, X)."""
        return cls(f=lambda t, X, u: g(t, X) + 0.0 * u, name="source")

    @classmethod
    def from_name(cls, name: str, expression: str | None = None,
                  source: callable | None = None, strength: float = 1.0):
        if name == "zero":
            return cls.zero()
        if name == "cubic":
            return cls.cubic(strength)
        if name == "source":
            if source is None:
                raise ValueError("source RHS needs a g(t, X) callable")
            return cls.source(source)
        if name == "custom-expression":
            if not expression:
                raise ValueError("custom-expression RHS needs an expression")
            return cls(f=compile_expression(expression), name=f"expr:{expression}")
        raise ValueError(f"unknown RHS name {name!r}")


# --- minimal expression grammar over (t, x1..xn, u): + - * / ^ sin cos exp --

def compile_expression(text: str):
    tokens = _tokenize(text)
    ast, pos = _parse_sum(tokens, 0)
    if pos != len(tokens):
        raise ValueError(f"trailing input at token {pos}: {tokens[pos:]}")

    def f(t, X, u):
        env = {"t": t, "u": u}
        for i, xi in enumerate(X, start=1):
            env[f"x{i}"] = xi
        return _eval_ast(ast, env) + 0.0 * u
    return f


def _tokenize(text: str):
    out, i = [], 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "+-*/^()":
            out.append(ch)
            i += 1
        elif ch.isdigit() or ch == ".":
            j = i
            while j < len(text) and (text[j].isdigit() or text[j] in ".eE"
                                     or (text[j] in "+-" and text[j - 1] in "eE")):
                j += 1
            out.append(("num", float(text[i:j])))
            i = j
        elif ch.isalpha():
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(("name", text[i:j]))
            i = j
        else:
            raise ValueError(f"bad character {ch!r} in expression")
    return out


_FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}


def _parse_sum(tokens, pos):
    node, pos = _parse_product(tokens, pos)
    while pos < len(tokens) and tokens[pos] in ("+", "-"):
        op = tokens[pos]
        rhs, pos = _parse_product(tokens, pos + 1)
        node = (op, node, rhs)
    return node, pos


def _parse_product(tokens, pos):
    node, pos = _parse_unary(tokens, pos)
    while pos < len(tokens) and tokens[pos] in ("*", "/"):
        op = tokens[pos]
        rhs, pos = _parse_unary(tokens, pos + 1)
        node = (op, node, rhs)
    return node, pos


def _parse_unary(tokens, pos):
    if pos < len(tokens) and tokens[pos] == "-":
        node, pos = _parse_unary(tokens, pos + 1)
        return ("neg", node), pos
    return _parse_power(tokens, pos)


def _parse_power(tokens, pos):
    base, pos = _parse_atom(tokens, pos)
    if pos < len(tokens) and tokens[pos] == "^":
        expo, pos = _parse_unary(tokens, pos + 1)
        return ("^", base, expo), pos
    return base, pos


def _parse_atom(tokens, pos):
    if pos >= len(tokens):
        raise ValueError("unexpected end of expression")
    tok = tokens[pos]
    if tok == "(":
        node, pos = _parse_sum(tokens, pos + 1)
        if pos >= len(tokens) or tokens[pos] != ")":
            raise ValueError("missing closing parenthesis")
        return node, pos + 1
    if isinstance(tok, tuple) and tok[0] == "num":
        return ("num", tok[1]), pos + 1
    if isinstance(tok, tuple) and tok[0] == "name":
        name = tok[1]
        if name in _FUNCTIONS:
            if pos + 1 >= len(tokens) or tokens[pos + 1] != "(":
                raise ValueError(f"function {name} needs parentheses")
            arg, pos = _parse_sum(tokens, pos + 2)
            if pos >= len(tokens) or tokens[pos] != ")":
                raise ValueError("missing closing parenthesis")
            return ("call", name, arg), pos + 1
        return ("var", name), pos + 1
    raise ValueError(f"unexpected token {tok!r}")


def _eval_ast(node, env):
    kind = node[0]
    if kind == "num":
        return node[1]
    if kind == "var":
        if node[1] not in env:
            raise ValueError(f"unknown variable {node[1]!r}")
        return env[node[1]]
    if kind == "neg":
        return -_eval_ast(node[1], env)
    if kind == "call":
        return _FUNCTIONS[node[1]](_eval_ast(node[2], env))
    a, b = _eval_ast(node[1], env), _eval_ast(node[2], env)
    if kind == "+":
        return a + b
    if kind == "-":
        return a - b
    if kind == "*":
        return a * b
    if kind == "/":
        return a / b
    if kind == "^":
        return a ** b
    raise ValueError(f"bad AST node {kind!r}")


# ---------------------------------------------------------------------------
# Time-stepping machinery
# ---------------------------------------------------------------------------

class _TimeMachine:
    """Cached multipliers and Duhamel weights for a fixed uniform time grid
    with 2-node Gauss-Legendre panels between consecutive samples."""

    def __init__(self, params: TricomiParams, grid: GridSpec, T: float, nt: int):
        self.params = params
        self.grid = grid
        self.nt = nt
        self.times = np.linspace(0.0, T, nt + 1)
        self.rho = grid.rho()
        nodes, weights = specfun.legendre_panel_rule(0.0, 1.0, 2)
        dt = self.times[1] - self.times[0]
        self.node_times = (self.times[:-1, None] + dt * nodes[None, :]).ravel()
        self.node_weights = np.tile(weights * dt, nt)
        self.mult_out = [multiplier_arrays(params, float(t), self.rho)
                         for t in self.times]
        self.mult_node = [multiplier_arrays(params, float(t), self.rho)
                          for t in self.node_times]

    def interpolate_nodes(self, samples: np.ndarray) -> np.ndarray:
        """Cubic Lagrange interpolation of time-sampled spectral arrays
        (shape (nt+1, ...)) onto the panel nodes."""
        nt = self.nt
        dt = self.times[1] - self.times[0]
        out = np.empty((len(self.node_times),) + samples.shape[1:],
                       dtype=samples.dtype)
        for k, tau in enumerate(self.node_times):
            j = min(max(int(tau / dt) - 1, 0), nt - 3)
            ts = self.times[j:j + 4]
            coeffs = _lagrange_weights(ts, tau)
            out[k] = sum(c * samples[j + i] for i, c in enumerate(coeffs))
        return out

    def duhamel_all(self, h_nodes: np.ndarray, derivative: bool = False):
        """u^(t_j) = int_0^{t_j} K(t_j, tau) h^(tau) dtau for every output
        sample, given h^ at the panel nodes."""
        out = np.zeros((self.nt + 1,) + self.grid.shape, dtype=complex)
        for j in range(1, self.nt + 1):
            v1_t, v2_t, d1_t, d2_t = self.mult_out[j]
            acc = np.zeros(self.grid.shape, dtype=complex)
            for k in range(2 * j):
                v1_tau, v2_tau, _, _ = self.mult_node[k]
                if derivative:
                    kern = d2_t * v1_tau - d1_t * v2_tau
                else:
                    kern = v2_t * v1_tau - v1_t * v2_tau
                acc += self.node_weights[k] * kern * h_nodes[k]
            out[j] = acc
        return out


def _lagrange_weights(ts, tau):
    out = []
    for i in range(len(ts)):
        num = den = 1.0
        for j in range(len(ts)):
            if j != i:
                num *= tau - ts[j]
                den *= ts[i] - ts[j]
        out.append(num / den)
    return out


def dealiased_transform(values: np.ndarray, pad: float = 1.5) -> np.ndarray:
    """fftn(values)/size computed on a zero-padded spectral grid (the 3/2
    rule), so products formed in physical space do not alias back."""
    coeffs = np.fft.fftn(values) / values.size
    n = values.shape[0]
    keep = np.fft.fftfreq(n) * n
    big = int(n * pad)
    slices = np.ix_(*[(np.asarray(keep) % big).astype(int)
                      for _ in range(values.ndim)])
    padded = np.zeros((big,) * values.ndim, dtype=complex)
    padded[slices] = coeffs
    fine = np.fft.ifftn(padded) * padded.size
    return fine


def _compose_rhs(rhs, t, X, u_phys, f0_phys, grid, dealias):
    """Transform of f(t, x, u) - f(t, x, 0), optionally de-aliased."""
    if not dealias:
        vals = rhs.f(t, X, u_phys) - f0_phys
        return np.fft.fftn(vals) / vals.size
    fine_u = dealiased_transform(u_phys).real
    n = grid.N
    big = fine_u.shape[0]
    axes_fine = [np.arange(big) * (grid.L / big) - grid.L / 2.0
                 for _ in range(grid.n)]
    X_fine = np.meshgrid(*axes_fine, indexing="ij")
    vals = rhs.f(t, X_fine, fine_u)
    if f0_phys is not None:
        vals = vals - rhs.f(t, X_fine, np.zeros_like(fine_u))
    coeffs_fine = np.fft.fftn(vals) / vals.size
    keep = (np.fft.fftfreq(n) * n % big).astype(int)
    slices = np.ix_(*[keep for _ in range(grid.n)])
    return coeffs_fine[slices]


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------

def composite_norm(params: TricomiParams, grid: GridSpec, w_hat, wt_hat,
                   t: float, weighted: bool = True) -> float:
    """Discrete version of the contraction norm at one time sample."""
    m = params.m
    s0 = (m + 6.0) / (2.0 * (m + 2))
    rho2 = grid.rho() ** 2
    vol = grid.volume

    def hs(coeffs, s):
        return math.sqrt(vol * float(np.sum((1.0 + rho2) ** s
                                            * np.abs(coeffs) ** 2)))

    total = hs(w_hat, s0 + p0_of(m) - DELTA)
    if weighted and t > 0.0:
        total += t ** ((m + 2) * p1_of(m) / 2.0 - 2.0) \
            * hs(w_hat, s0 + p1_of(m) - DELTA)
    total += hs(wt_hat, 3.0 / (m + 2) + p2_of(m) - DELTA)
    return total


# ---------------------------------------------------------------------------
# The solver
# ---------------------------------------------------------------------------

@dataclass
class PicardState:
    iterate: int
    delta_norm: float


@dataclass
class PicardReport:
    accepted_T: float
    iterations: int
    delta_norms: list
    contraction_ratios: list
    fixed_point_residual: float
    converged: bool
    halvings: int
    pde_residual_l2: float | None = None
    pde_residual_times: list = field(default_factory=list)
    delta_norms_unweighted: list = field(default_factory=list)
    time_refinement_estimate: float | None = None


@dataclass
class PicardSolution:
    params: TricomiParams
    grid: GridSpec
    times: np.ndarray
    u_hat: np.ndarray          # (nt+1, grid shape), spectral samples of u
    report: PicardReport

    def field_at(self, j: int) -> SpectralField:
        return SpectralField(self.grid, float(self.times[j]), self.u_hat[j])


def linear_parts(params: TricomiParams, grid: GridSpec, data: InitialData | np.ndarray,
                 rhs: NonlinearRHS, T: float, nt: int = 64):
    """Spectral samples of u1 (data propagation) and u2 (source f(t,x,0))
    on the uniform grid over [0, T]."""
    machine = _TimeMachine(params, grid, T, nt)
    phi = data.sample(grid) if isinstance(data, InitialData) else np.asarray(data)
    phi_hat = np.fft.fftn(phi) / phi.size
    u1 = np.zeros((nt + 1,) + grid.shape, dtype=complex)
    for j, t in enumerate(machine.times):
        _, v2, _, _ = machine.mult_out[j]
        u1[j] = v2 * phi_hat
    X = grid.meshgrid()
    zero = np.zeros(grid.shape)
    f0_samples = np.array([rhs.f(float(t), X, zero) for t in machine.times])
    if np.max(np.abs(f0_samples)) == 0.0:
        u2 = np.zeros_like(u1)
    else:
        f0_hat = np.array([np.fft.fftn(v) / v.size for v in f0_samples])
        f0_nodes = machine.interpolate_nodes(f0_hat)
        u2 = machine.duhamel_all(f0_nodes)
    return machine, u1, u2


def picard_solve(params: TricomiParams, grid: GridSpec,
                 data: InitialData | np.ndarray, rhs: NonlinearRHS,
                 T_local: float, tol: float = 1e-10, max_iter: int = 25,
                 nt: int = 64, dealias: bool = True,
                 min_T_factor: float = 16.0) -> PicardSolution:
    """Fixed-point iteration from w = 0; on three consecutive non-contracting
    steps the horizon is halved and the iteration restarts, down to
    T_local / min_T_factor."""
    if T_local > params.T:
        raise ValueError("T_local exceeds the params horizon")
    T = T_local
    halvings = 0
    while True:
        try:
            return _picard_once(params, grid, data, rhs, T, tol, max_iter,
                                nt, dealias, halvings)
        except DivergenceError:
            if T <= T_local / min_T_factor + 1e-15:
                raise
            T *= 0.5
            halvings += 1


def _picard_once(params, grid, data, rhs, T, tol, max_iter, nt, dealias,
                 halvings) -> PicardSolution:
    machine, u1, u2 = linear_parts(params, grid, data, rhs, T, nt)
    X = grid.meshgrid()
    zero = np.zeros(grid.shape)
    f0_phys = rhs.f(0.0, X, zero)
    f0_is_zero = np.max(np.abs(np.array(
        [rhs.f(float(t), X, zero) for t in machine.times[:: max(1, nt // 8)]]))) == 0.0

    w = np.zeros_like(u1)
    wt = np.zeros_like(u1)
    deltas, deltas_unw, ratios = [], [], []
    converged = False
    residual = math.inf
    for it in range(1, max_iter + 1):
        h_hat = _rhs_samples(machine, rhs, X, u1, u2, w, grid, dealias,
                             f0_is_zero)
        h_nodes = machine.interpolate_nodes(h_hat)
        w_new = machine.duhamel_all(h_nodes)
        wt_new = machine.duhamel_all(h_nodes, derivative=True)
        delta = max(
            composite_norm(params, grid, w_new[j] - w[j], wt_new[j] - wt[j],
                           float(machine.times[j]))
            for j in range(1, nt + 1))
        delta_unw = max(
            composite_norm(params, grid, w_new[j] - w[j], wt_new[j] - wt[j],
                           float(machine.times[j]), weighted=False)
            for j in range(1, nt + 1))
        deltas.append(delta)
        deltas_unw.append(delta_unw)
        if len(deltas) >= 2 and deltas[-2] > 0.0:
            ratios.append(delta / deltas[-2])
        w, wt = w_new, wt_new
        residual = delta
        if delta <= tol:
            converged = True
            break
        if len(ratios) >= 3 and all(r >= 1.0 for r in ratios[-3:]):
            raise DivergenceError(
                f"no contraction at T = {T}: ratios {ratios[-3:]}")
    if not converged:
        raise DivergenceError(
            f"no convergence within {max_iter} iterations at T = {T}")
    u_hat = u1 + u2 + w
    report = PicardReport(
        accepted_T=T, iterations=len(deltas), delta_norms=deltas,
        contraction_ratios=ratios, fixed_point_residual=residual,
        converged=converged, halvings=halvings,
        delta_norms_unweighted=deltas_unw)
    solution = PicardSolution(params, grid, machine.times, u_hat, report)
    _attach_pde_residual(solution, machine, rhs, X, dealias)
    return solution


def _rhs_samples(machine, rhs, X, u1, u2, w, grid, dealias, f0_is_zero):
    out = np.empty_like(w)
    for j, t in enumerate(machine.times):
        u_phys = np.fft.ifftn((u1[j] + u2[j] + w[j]) * w[j].size).real
        f0 = None if f0_is_zero else rhs.f(float(t), X, np.zeros(grid.shape))
        if dealias:
            out[j] = _compose_rhs(rhs, float(t), X, u_phys, f0, grid, True)
        else:
            vals = rhs.f(float(t), X, u_phys)
            if f0 is not None:
                vals = vals - f0
            out[j] = np.fft.fftn(vals) / vals.size
    return out


def _attach_pde_residual(solution: PicardSolution, machine, rhs, X, dealias):
    """Interior residual ||d_t^2 u - t^m Lap u - f(t,x,u)||_L2 with a
    fourth-order central difference in t and the spectral Laplacian."""
    params, grid = solution.params, solution.grid
    times, u_hat = solution.times, solution.u_hat
    nt = len(times) - 1
    dt = times[1] - times[0]
    rho2 = grid.rho() ** 2
    res_times, res_vals = [], []
    for j in range(2, nt - 1):
        t = float(times[j])
        dtt = (-u_hat[j - 2] + 16 * u_hat[j - 1] - 30 * u_hat[j]
               + 16 * u_hat[j + 1] - u_hat[j + 2]) / (12.0 * dt * dt)
        u_phys = np.fft.ifftn(u_hat[j] * u_hat[j].size).real
        f_hat = _compose_rhs(rhs, t, X, u_phys, None, grid, dealias)
        resid = dtt + t ** params.m * rho2 * u_hat[j] - f_hat
        res_times.append(t)
        res_vals.append(math.sqrt(grid.volume * float(np.sum(np.abs(resid) ** 2))))
    mid = [v for tt, v in zip(res_times, res_vals)
           if 0.25 * times[-1] <= tt <= 0.75 * times[-1]]
    solution.report.pde_residual_l2 = max(mid) if mid else None
    solution.report.pde_residual_times = list(zip(res_times, res_vals))
