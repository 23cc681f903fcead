"""Initial-velocity data classes: homogeneous-degree-zero profiles (a1),
half-space jumps (a2) and quadrant jumps (a3), all smoothly windowed so a
periodic truncation does not see the cutoff."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .propagator import GridSpec


def smooth_step(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        f0 = np.where(s > 0.0, np.exp(-1.0 / np.maximum(s, 1e-300)), 0.0)
        f1 = np.where(s < 1.0, np.exp(-1.0 / np.maximum(1.0 - s, 1e-300)), 0.0)
    return f0 / (f0 + f1)


def radial_window(r, r_flat: float, r_zero: float):
    """1 on [0, r_flat], smoothly 0 beyond r_zero."""
    return smooth_step((r_zero - np.asarray(r, dtype=float))
                       / (r_zero - r_flat))


@dataclass(frozen=True)
class InitialData:
    """Tagged union over the three data classes.

    kind "a1": values[0] scales psi(x) * x_1/|x| with a radial bump psi;
    kind "a2": values = (c_left, c_right) across the hyperplane x_1 = 0;
    kind "a3": values = (C1, C2, C3, C4) on the quadrants (n = 2 only).
    Every profile is multiplied by a radial window flat on r <= r_flat.
    """

    kind: str
    values: tuple
    r_flat: float = 1.0
    r_zero: float = 2.0

    def __post_init__(self):
        if self.kind not in ("a1", "a2", "a3"):
            raise ValueError(f"unknown data kind {self.kind!r}")
        if self.kind == "a3" and len(self.values) != 4:
            raise ValueError("a3 data needs four quadrant values")
        if self.kind == "a2" and len(self.values) != 2:
            raise ValueError("a2 data needs two half-space values")

    def evaluate(self, *coords) -> np.ndarray:
        coords = [np.asarray(c, dtype=float) for c in coords]
        r = np.sqrt(sum(c * c for c in coords))
        window = radial_window(r, self.r_flat, self.r_zero)
        if self.kind == "a1":
            with np.errstate(invalid="ignore", divide="ignore"):
                angular = np.where(r > 0.0, coords[0] / np.maximum(r, 1e-300), 0.0)
            return self.values[0] * angular * window
        # Samples landing exactly on a jump line take the midpoint of the
        # one-sided limits (the Fourier-sampling convention for BV data;
        # otherwise the measure-zero line becomes a rank-one grid artifact).
        if self.kind == "a2":
            c_left, c_right = self.values
            frac = np.where(coords[0] > 0.0, 1.0,
                            np.where(coords[0] < 0.0, 0.0, 0.5))
            return (frac * c_right + (1.0 - frac) * c_left) * window
        c1, c2, c3, c4 = self.values
        x1, x2 = coords[0], coords[1]
        f1 = np.where(x1 > 0.0, 1.0, np.where(x1 < 0.0, 0.0, 0.5))
        f2 = np.where(x2 > 0.0, 1.0, np.where(x2 < 0.0, 0.0, 0.5))
        vals = f1 * (f2 * c1 + (1.0 - f2) * c4) \
            + (1.0 - f1) * (f2 * c2 + (1.0 - f2) * c3)
        return vals * window

    def sample(self, grid: GridSpec) -> np.ndarray:
        if self.kind == "a3" and grid.n != 2:
            raise ValueError("a3 data lives on n = 2")
        return self.evaluate(*grid.meshgrid())


def smooth_bump(grid: GridSpec, width: float = 0.8) -> np.ndarray:
    """Reference C-infinity compactly supported profile (for the
    super-polynomial decay baseline)."""
    mesh = grid.meshgrid()
    r = np.sqrt(sum(c * c for c in mesh))
    return radial_window(r, 0.2 * width, width)
