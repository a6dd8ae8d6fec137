"""Meshes, fields, model parameters, and quadrature shared by every solver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as _field
from typing import Callable

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "GrowthLaw",
    "ModelParams",
    "StateBundle",
    "quadrature",
    "norm",
    "pressure",
    "pressure_values",
]


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered mesh on an interval (1D) or rectangle (2D).

    Cell centers sit at (i + 1/2) h along each axis, so reflecting a center
    across a boundary face lands exactly on the mirrored ghost center. The
    zero-flux boundary condition is realized by that reflection inside the
    stencil kernels; nothing about the boundary is stored here.
    """

    extents: tuple[float, ...]
    cells: tuple[int, ...]

    def __post_init__(self):
        extents = tuple(float(L) for L in np.atleast_1d(self.extents))
        cells = tuple(int(N) for N in np.atleast_1d(self.cells))
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "cells", cells)
        if len(extents) not in (1, 2) or len(extents) != len(cells):
            raise ValueError("grid must be 1D or 2D with matching extents and cells")
        for L, N in zip(extents, cells):
            if not math.isfinite(L) or L <= 0:
                raise ValueError(f"axis extent must be positive and finite, got {L}")
            if N < 4:
                raise ValueError(f"need at least 4 cells per axis, got {N}")

    @classmethod
    def interval(cls, length: float, cells: int) -> "Grid":
        return cls((length,), (cells,))

    @classmethod
    def rectangle(cls, lengths: tuple[float, float], cells: tuple[int, int]) -> "Grid":
        return cls(tuple(lengths), tuple(cells))

    @property
    def dim(self) -> int:
        return len(self.extents)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cells

    @property
    def spacings(self) -> tuple[float, ...]:
        return tuple(L / N for L, N in zip(self.extents, self.cells))

    @property
    def cell_volume(self) -> float:
        return math.prod(self.spacings)

    @property
    def measure(self) -> float:
        """Total domain measure; quadrature of the constant 1 returns this exactly."""
        return math.prod(self.extents)

    def centers(self, axis: int = 0) -> np.ndarray:
        h = self.spacings[axis]
        return (np.arange(self.cells[axis]) + 0.5) * h

    def meshgrid(self) -> tuple[np.ndarray, ...]:
        axes = [self.centers(a) for a in range(self.dim)]
        return tuple(np.meshgrid(*axes, indexing="ij"))


@dataclass
class Field:
    """Scalar cell samples on a grid (density, relaxed density, potential, pressure)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        self.values = vals

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "Field":
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[..., np.ndarray]) -> "Field":
        return cls(grid, np.asarray(fn(*grid.meshgrid()), dtype=np.float64))

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())


def quadrature(f: Field) -> float:
    """Midpoint-rule integral over the domain; exact for cellwise-constant data."""
    return f.grid.cell_volume * float(np.sum(f.values))


def norm(f: Field, kind: str = "L2", p: float | None = None) -> float:
    """Discrete quadrature-based norm: kind in {"L1", "L2", "Linf", "Lp"}."""
    vol = f.grid.cell_volume
    v = f.values
    if kind == "L1":
        return vol * float(np.sum(np.abs(v)))
    if kind == "L2":
        return math.sqrt(vol * float(np.sum(v * v)))
    if kind == "Linf":
        return float(np.max(np.abs(v)))
    if kind == "Lp":
        if p is None or p < 1:
            raise ValueError("Lp norm needs an exponent p >= 1")
        return (vol * float(np.sum(np.abs(v) ** p))) ** (1.0 / p)
    raise ValueError(f"unknown norm kind {kind!r}")


@dataclass(frozen=True)
class GrowthLaw:
    """Pressure-dependent proliferation rate with compact support.

    The homeostatic law g (mu_h - mu) (1 - (mu/mu_h)^2) on |mu| <= mu_h is
    continuous, vanishes beyond the homeostatic pressure mu_h, and is
    positive at mu = 0, so (1 + |mu|) |G(mu)| stays bounded.
    """

    kind: str = "zero"
    amplitude: float = 0.0
    mu_h: float = 1.0

    def __post_init__(self):
        if self.kind not in ("zero", "homeostatic"):
            raise ValueError(f"unknown growth law {self.kind!r}")
        if self.amplitude < 0:
            raise ValueError("growth amplitude must be nonnegative")
        if self.kind == "homeostatic" and self.mu_h <= 0:
            raise ValueError("homeostatic pressure must be positive")

    @classmethod
    def none(cls) -> "GrowthLaw":
        return cls()

    @classmethod
    def homeostatic(cls, amplitude: float, mu_h: float) -> "GrowthLaw":
        return cls("homeostatic", amplitude, mu_h)

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or self.amplitude == 0.0

    def __call__(self, mu):
        arr = np.asarray(mu, dtype=np.float64)
        if self.is_zero:
            out = np.zeros_like(arr)
        else:
            u = arr / self.mu_h
            inside = np.abs(u) <= 1.0
            out = np.where(inside, self.amplitude * (self.mu_h - arr) * (1.0 - u * u), 0.0)
        return out if arr.ndim else float(out)

    def sup_abs(self) -> float:
        """Exact supremum of |G|; the cubic peaks at mu = -mu_h / 3."""
        if self.is_zero:
            return 0.0
        return 32.0 * self.amplitude * self.mu_h / 27.0


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters: relaxation, interface width squared, pressure stiffness."""

    sigma: float = 1.0
    delta: float = 1.0
    gamma: float = 4.0
    eps_mobility: float = 0.0
    growth: GrowthLaw = _field(default_factory=GrowthLaw)

    def __post_init__(self):
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ValueError("sigma must be nonnegative and finite")
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise ValueError("delta must be positive")
        if not (self.gamma > 1 and math.isfinite(self.gamma)):
            raise ValueError("gamma must exceed 1")
        if not (0.0 <= self.eps_mobility < 1.0):
            raise ValueError("mobility regularization must lie in [0, 1)")

    @property
    def is_relaxed(self) -> bool:
        """True when sigma > 0; sigma = 0 collapses the relaxed density onto n."""
        return self.sigma > 0.0


def pressure_values(w: np.ndarray, gamma: float) -> np.ndarray:
    """Pressure law max(0, w)^gamma applied cellwise."""
    return np.maximum(w, 0.0) ** gamma


def pressure(w: Field, gamma: float) -> Field:
    return Field(w.grid, pressure_values(w.values, gamma))


@dataclass
class StateBundle:
    """Consistent snapshot (t, n, w, mu, p) satisfying the relaxation constraint."""

    t: float
    n: Field
    w: Field
    mu: Field
    p: Field
    elliptic_residual: float = 0.0

    @property
    def grid(self) -> Grid:
        return self.n.grid

    def consistency_error(self, params: ModelParams) -> float:
        """Max-norm defect of the algebraic relations tying mu and p to n and w."""
        if params.is_relaxed:
            mu_err = np.max(np.abs(
                self.mu.values - (params.delta / params.sigma) * (self.n.values - self.w.values)
            ))
        else:
            mu_err = float(np.max(np.abs(self.n.values - self.w.values)))
        p_err = np.max(np.abs(self.p.values - pressure_values(self.w.values, params.gamma)))
        return float(max(mu_err, p_err))
