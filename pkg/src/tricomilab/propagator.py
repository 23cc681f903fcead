"""Exact Fourier-multiplier propagation on a periodic grid.

Each Fourier mode of d_t^2 u - t^m Laplace(u) = f obeys the degenerate
oscillator y'' + t^m rho^2 y = 0 with rho = |xi|.  The fundamental pair
normalized to (y, y')(0) = (1, 0) and (0, 1) is

    V1(t, rho) = e^(-z/2) Phi(a1, c1; z),
    V2(t, rho) = t e^(-z/2) Phi(a2, c2; z),      z = 4i t^((m+2)/2) rho / (m+2),

with a1 = m/(2(m+2)), c1 = 2 a1, a2 = (m+4)/(2(m+2)), c2 = 2 a2, and time
derivatives

    dtV1 = i t^(m/2) rho e^(-z/2) (Phi(a1+1, c1+1; z) - Phi(a1, c1; z)),
    dtV2 = e^(-z/2) (Phi(a2, c2-1; z) - ((m+2) z / 4) Phi(a2, c2; z)).

The module applies these multipliers to gridded data (solve_linear), builds
the inhomogeneous solution from the two-time kernel
V2(t)V1(tau) - V1(t)V2(tau) (duhamel), and exposes the Wronskian-based
fundamental-matrix step between two positive times.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import specfun

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class TricomiParams:
    """Exponent m, spatial dimension n and time horizon T; fixes every
    derived constant of the problem."""

    m: int
    n: int
    T: float

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be a positive integer")
        if self.n not in (1, 2, 3):
            raise ValueError("supported spatial dimensions are 1, 2, 3")
        if self.T <= 0.0:
            raise ValueError("time horizon T must be positive")

    @property
    def gamma(self) -> float:
        return self.m / (2.0 * (self.m + 2))

    @property
    def a1(self) -> float:
        return self.m / (2.0 * (self.m + 2))

    @property
    def c1(self) -> float:
        return self.m / (self.m + 2.0)

    @property
    def a2(self) -> float:
        return (self.m + 4.0) / (2.0 * (self.m + 2))

    @property
    def c2(self) -> float:
        return (self.m + 4.0) / (self.m + 2.0)

    def phi(self, t):
        """Forward characteristic radius phi(t) = 2 t^((m+2)/2) / (m+2)."""
        return 2.0 * np.asarray(t, dtype=float) ** ((self.m + 2) / 2.0) / (self.m + 2)

    def z_imag(self, t, rho):
        """Imaginary part of the multiplier argument z = i * z_imag."""
        return 4.0 * np.asarray(t, dtype=float) ** ((self.m + 2) / 2.0) \
            * np.asarray(rho, dtype=float) / (self.m + 2)


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [-L/2, L/2)^n with N points per axis."""

    n: int
    N: int
    L: float

    def __post_init__(self):
        if self.N < 4 or self.N & (self.N - 1):
            raise ValueError("N must be a power of two >= 4")
        if self.L <= 0.0:
            raise ValueError("period L must be positive")

    @property
    def shape(self):
        return (self.N,) * self.n

    def axes(self):
        return [np.arange(self.N) * (self.L / self.N) - self.L / 2.0
                for _ in range(self.n)]

    def meshgrid(self):
        return np.meshgrid(*self.axes(), indexing="ij")

    def freq_axes(self):
        return [2.0 * np.pi * np.fft.fftfreq(self.N, d=self.L / self.N)
                for _ in range(self.n)]

    def rho(self) -> np.ndarray:
        """|xi| over the frequency lattice, same shape as the grid."""
        mesh = np.meshgrid(*self.freq_axes(), indexing="ij")
        return np.sqrt(sum(k * k for k in mesh))

    @property
    def cell_volume(self) -> float:
        return (self.L / self.N) ** self.n

    @property
    def volume(self) -> float:
        return self.L ** self.n


@dataclass
class SpectralField:
    """Fourier coefficients (trigonometric-interpolation normalization,
    coeffs = fftn(values) / N^n) of a field at a fixed time."""

    grid: GridSpec
    t: float
    coeffs: np.ndarray

    @classmethod
    def from_physical(cls, grid: GridSpec, t: float, values: np.ndarray):
        values = np.asarray(values)
        if values.shape != grid.shape:
            raise ValueError(f"field shape {values.shape} != grid shape {grid.shape}")
        return cls(grid, t, np.fft.fftn(values) / values.size)

    def to_physical(self) -> np.ndarray:
        return np.fft.ifftn(self.coeffs * self.coeffs.size)

    def to_real(self) -> np.ndarray:
        phys = self.to_physical()
        imag_max = float(np.max(np.abs(phys.imag))) if phys.size else 0.0
        if imag_max > HERMITIAN_TOL * max(1.0, float(np.max(np.abs(phys.real)))):
            raise ValueError(f"field is not real: max imaginary part {imag_max:.3e}")
        return phys.real

    def hermitian_defect(self) -> float:
        """Max deviation from the Hermitian symmetry of a real field."""
        conj_flip = np.conj(self.coeffs[tuple(
            np.ix_(*[(-np.arange(self.grid.N)) % self.grid.N
                     for _ in range(self.grid.n)]))])
        return float(np.max(np.abs(self.coeffs - conj_flip)))


@dataclass(frozen=True)
class MultiplierPair:
    V1: complex
    V2: complex
    dtV1: complex
    dtV2: complex

    def wronskian(self) -> complex:
        return self.V1 * self.dtV2 - self.V2 * self.dtV1


def multiplier_arrays(params: TricomiParams, t: float, rho: np.ndarray,
                      switch_radius: float = specfun.DEFAULT_SWITCH_RADIUS):
    """(V1, V2, dtV1, dtV2) over an array of radii at one time.

    Evaluations are cached per distinct radius: the lattice has O(N) distinct
    |xi| shells against O(N^n) points.
    """
    rho = np.asarray(rho, dtype=float)
    if t < 0.0:
        raise ValueError("t must be >= 0")
    uniq, inverse = np.unique(rho.ravel(), return_inverse=True)
    if t == 0.0:
        v1 = np.ones_like(uniq, dtype=complex)
        v2 = np.zeros_like(uniq, dtype=complex)
        d1 = np.zeros_like(uniq, dtype=complex)
        d2 = np.ones_like(uniq, dtype=complex)
    else:
        m = params.m
        zim = params.z_imag(t, uniq)
        try:
            f_a1 = specfun.damped_kummer(params.a1, params.c1, zim, switch_radius)
            f_a2 = specfun.damped_kummer(params.a2, params.c2, zim, switch_radius)
            f_d1 = specfun.damped_kummer(params.a1 + 1.0, params.c1 + 1.0, zim,
                                         switch_radius)
            f_d2 = specfun.damped_kummer(params.a2, params.c2 - 1.0, zim,
                                         switch_radius)
        except (specfun.ParameterError, specfun.AccuracyError) as exc:
            raise RuntimeError(
                f"multiplier evaluation failed at t={t}, rho range "
                f"[{uniq.min()}, {uniq.max()}]: {exc}") from exc
        v1 = f_a1
        v2 = t * f_a2
        d1 = 1j * t ** (m / 2.0) * uniq * (f_d1 - f_a1)
        d2 = f_d2 - ((m + 2) * 1j * zim / 4.0) * f_a2
    shape = rho.shape
    return (v1[inverse].reshape(shape), v2[inverse].reshape(shape),
            d1[inverse].reshape(shape), d2[inverse].reshape(shape))


def multipliers(params: TricomiParams, t: float, rho: float,
                switch_radius: float = specfun.DEFAULT_SWITCH_RADIUS) -> MultiplierPair:
    """Multiplier quadruple at a single (t, rho)."""
    if t > params.T:
        raise ValueError(f"t = {t} exceeds horizon T = {params.T}")
    v1, v2, d1, d2 = multiplier_arrays(params, t, np.array([rho]), switch_radius)
    return MultiplierPair(complex(v1[0]), complex(v2[0]),
                          complex(d1[0]), complex(d2[0]))


def solve_linear(params: TricomiParams, grid: GridSpec,
                 phi1: np.ndarray | None, phi2: np.ndarray | None, t: float,
                 derivative: bool = False) -> SpectralField:
    """Propagate data (u, du/dt)(0) = (phi1, phi2) to time t modewise:
    u^(t,xi) = V1 phi1^ + V2 phi2^.  With derivative=True returns du/dt."""
    if grid.n != params.n:
        raise ValueError("grid dimension does not match params.n")
    if not 0.0 <= t <= params.T:
        raise ValueError(f"t = {t} outside [0, T = {params.T}]")
    rho = grid.rho()
    v1, v2, d1, d2 = multiplier_arrays(params, t, rho)
    coeffs = np.zeros(grid.shape, dtype=complex)
    if phi1 is not None:
        f1 = SpectralField.from_physical(grid, 0.0, phi1)
        coeffs += (d1 if derivative else v1) * f1.coeffs
    if phi2 is not None:
        f2 = SpectralField.from_physical(grid, 0.0, phi2)
        coeffs += (d2 if derivative else v2) * f2.coeffs
    return SpectralField(grid, t, coeffs)


def default_duhamel_panels(t: float) -> int:
    return max(8, int(np.ceil(t / 0.05)))


def duhamel(params: TricomiParams, grid: GridSpec, f, t: float,
            nquad: int | None = None, nodes_per_panel: int = 4,
            derivative: bool = False) -> SpectralField:
    """Zero-data inhomogeneous solution at time t by kernel quadrature,

        u^(t,xi) = int_0^t (V2(t)V1(tau) - V1(t)V2(tau)) f^(tau,xi) dtau,

    with composite Gauss-Legendre panels in tau.  `f` is a callable
    tau -> physical field on the grid.  The kernel is smooth down to
    tau = 0 (V2(tau) ~ tau), so no singular treatment is needed.
    """
    if nquad is None:
        nquad = default_duhamel_panels(t)
    if nquad < 2:
        raise ValueError("nquad must be >= 2")
    if t == 0.0:
        return SpectralField(grid, 0.0, np.zeros(grid.shape, dtype=complex))
    rho = grid.rho()
    v1_t, v2_t, d1_t, d2_t = multiplier_arrays(params, t, rho)
    edges = np.linspace(0.0, t, nquad + 1)
    acc = np.zeros(grid.shape, dtype=complex)
    for lo, hi in zip(edges[:-1], edges[1:]):
        taus, wts = specfun.legendre_panel_rule(lo, hi, nodes_per_panel)
        for tau, w in zip(taus, wts):
            fhat = np.fft.fftn(np.asarray(f(tau))) / grid.N ** grid.n
            v1_tau, v2_tau, _, _ = multiplier_arrays(params, tau, rho)
            if derivative:
                kernel = d2_t * v1_tau - d1_t * v2_tau
            else:
                kernel = v2_t * v1_tau - v1_t * v2_tau
            acc += w * kernel * fhat
    return SpectralField(grid, t, acc)


def transition_matrix(params: TricomiParams, t1: float, t2: float,
                      rho: np.ndarray):
    """Fundamental-matrix step M(t2) M(t1)^(-1) acting on (u^, dtu^).

    M(t) has columns (V1, dtV1) and (V2, dtV2); its determinant is the
    Wronskian, identically 1, so the inverse is algebraic.  Returns the four
    entries (a11, a12, a21, a22) as arrays over rho.
    """
    v1a, v2a, d1a, d2a = multiplier_arrays(params, t1, rho)
    v1b, v2b, d1b, d2b = multiplier_arrays(params, t2, rho)
    # inv M(t1) = [[d2a, -v2a], [-d1a, v1a]] / W, W = 1
    a11 = v1b * d2a - v2b * d1a
    a12 = -v1b * v2a + v2b * v1a
    a21 = d1b * d2a - d2b * d1a
    a22 = -d1b * v2a + d2b * v1a
    return a11, a12, a21, a22


def propagate_state(params: TricomiParams, u_hat: np.ndarray, ut_hat: np.ndarray,
                    t1: float, t2: float, rho: np.ndarray):
    """Advance the spectral state (u^, dtu^) from t1 to t2."""
    a11, a12, a21, a22 = transition_matrix(params, t1, t2, rho)
    return a11 * u_hat + a12 * ut_hat, a21 * u_hat + a22 * ut_hat


# ---------------------------------------------------------------------------
# Binary field dump: little-endian float64, row-major, with a JSON sidecar.
# ---------------------------------------------------------------------------

def write_field(params: TricomiParams, field: SpectralField, basepath,
                kind: str = "complex-interleaved") -> Path:
    """Write the physical-space field to <basepath>.bin + <basepath>.json."""
    base = Path(basepath)
    phys = field.to_physical()
    if kind == "real":
        data = np.ascontiguousarray(phys.real, dtype="<f8")
    elif kind == "complex-interleaved":
        inter = np.empty(phys.shape + (2,), dtype="<f8")
        inter[..., 0] = phys.real
        inter[..., 1] = phys.imag
        data = inter
    else:
        raise ValueError(f"unknown dump kind {kind!r}")
    bin_path = base.with_suffix(".bin")
    bin_path.write_bytes(data.tobytes(order="C"))
    sidecar = {"m": params.m, "n": field.grid.n, "N": field.grid.N,
               "L": field.grid.L, "t": field.t, "kind": kind}
    base.with_suffix(".json").write_text(json.dumps(sidecar, indent=2) + "\n")
    return bin_path


def read_field(basepath):
    """Read a dump written by write_field; returns (sidecar dict, array)."""
    base = Path(basepath)
    meta = json.loads(base.with_suffix(".json").read_text())
    raw = np.frombuffer(base.with_suffix(".bin").read_bytes(), dtype="<f8")
    shape = (meta["N"],) * meta["n"]
    if meta["kind"] == "real":
        arr = raw.reshape(shape).copy()
    else:
        pairs = raw.reshape(shape + (2,))
        arr = pairs[..., 0] + 1j * pairs[..., 1]
    return meta, arr
