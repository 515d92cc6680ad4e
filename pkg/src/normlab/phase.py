"""Phase-space primitives: grids, wave functions, coherent states.

Conventions
-----------
* A phase point is ``X = (x, xi)`` with ``x, xi`` in R^n.
* Grid axes are FFT-style: ``count`` nodes ``-L + k * (2L / count)``, so the
  origin is always a node and the box is periodic of length ``2L``.
* Inner products are linear in the first slot and conjugate-linear in the
  second, ``<f, g> = sum f * conj(g) * cell``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PhasePoint:
    x: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        xi = np.atleast_1d(np.asarray(self.xi, dtype=float))
        if x.ndim != 1 or x.shape != xi.shape or x.size < 1:
            raise ValueError(f"position and momentum must be equal-length vectors, got {x.shape} and {xi.shape}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(xi))):
            raise ValueError("phase point must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xi", xi)

    @property
    def n(self) -> int:
        return self.x.size

    @classmethod
    def from_pairs(cls, *pairs: tuple[float, float]) -> "PhasePoint":
        """Build from interleaved ``(x_j, xi_j)`` pairs."""
        arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    def interleaved(self) -> np.ndarray:
        return np.column_stack([self.x, self.xi]).ravel()

    def __add__(self, other: "PhasePoint") -> "PhasePoint":
        return PhasePoint(self.x + other.x, self.xi + other.xi)

    def __sub__(self, other: "PhasePoint") -> "PhasePoint":
        return PhasePoint(self.x - other.x, self.xi - other.xi)

    def scaled(self, c: float) -> "PhasePoint":
        return PhasePoint(c * self.x, c * self.xi)

    def norm2(self) -> float:
        return float(self.x @ self.x + self.xi @ self.xi)

    def __repr__(self):
        return f"PhasePoint(x={self.x.tolist()}, xi={self.xi.tolist()})"


def symplectic_form(X: PhasePoint, Y: PhasePoint) -> float:
    """sigma(X, Y) = y . xi - x . eta."""
    if X.n != Y.n:
        raise ValueError(f"dimension mismatch: {X.n} vs {Y.n}")
    return float(Y.x @ X.xi - X.x @ Y.xi)


@dataclass(frozen=True)
class AxisGrid:
    half_width: float
    count: int

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        c = int(self.count)
        if c < 2 or c & (c - 1):
            raise ValueError(f"count must be a power of two, got {self.count}")
        object.__setattr__(self, "count", c)
        object.__setattr__(self, "half_width", float(self.half_width))

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.count

    @property
    def nodes(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.count)

    def angular_frequencies(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.count, d=self.spacing)

    def index_of(self, value: float, tol: float = 1e-9) -> int:
        k = (value + self.half_width) / self.spacing
        r = round(k)
        if abs(k - r) > tol or not 0 <= r < self.count:
            raise GridMismatchError(f"{value} is not a node of {self}")
        return int(r)


@dataclass(frozen=True)
class SpatialGrid:
    axes: tuple[AxisGrid, ...]

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not self.axes:
            raise ValueError("need at least one axis")

    @classmethod
    def uniform(cls, n: int, half_width: float, count: int) -> "SpatialGrid":
        return cls(tuple(AxisGrid(half_width, count) for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.count for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell(self) -> float:
        return float(np.prod([a.spacing for a in self.axes]))

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*[a.nodes for a in self.axes], indexing="ij")


@dataclass(frozen=True)
class PhaseGrid:
    """2n axes stored interleaved as (x_1, xi_1, x_2, xi_2, ...)."""

    axes: tuple[AxisGrid, ...]

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not self.axes or len(self.axes) % 2:
            raise ValueError("phase grid needs an even, nonzero number of axes")

    @classmethod
    def uniform(cls, n: int, half_width: float, count: int) -> "PhaseGrid":
        return cls(tuple(AxisGrid(half_width, count) for _ in range(2 * n)))

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[AxisGrid, AxisGrid]]) -> "PhaseGrid":
        return cls(tuple(ax for pair in pairs for ax in pair))

    @classmethod
    def weyl_dual(cls, spatial: SpatialGrid, h: float = 1.0) -> "PhaseGrid":
        """Grid on which a symbol feeds the FFT Weyl kernel directly.

        Position axes hold every midpoint ``(x_i + x_j) / 2`` (half spacing,
        twice the nodes); momentum axes are the discrete Fourier duals of the
        spatial axes scaled by ``h``.
        """
        if not h > 0:
            raise ValueError("h must be positive")
        pairs = []
        for a in spatial.axes:
            pos = AxisGrid(a.half_width, 2 * a.count)
            mom = AxisGrid(h * np.pi / a.spacing, a.count)
            pairs.append((pos, mom))
        return cls.from_pairs(pairs)

    @property
    def n(self) -> int:
        return len(self.axes) // 2

    @property
    def position_axes(self) -> tuple[AxisGrid, ...]:
        return self.axes[0::2]

    @property
    def momentum_axes(self) -> tuple[AxisGrid, ...]:
        return self.axes[1::2]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.count for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell(self) -> float:
        return float(np.prod([a.spacing for a in self.axes]))

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*[a.nodes for a in self.axes], indexing="ij")


@dataclass(frozen=True, eq=False)
class WaveFunction:
    grid: SpatialGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("wave function has non-finite entries")
        object.__setattr__(self, "values", v)

    def norm(self) -> float:
        return float(np.sqrt(l2_inner(self, self).real))

    def __add__(self, other):
        _same_grid(self.grid, other.grid)
        return WaveFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        _same_grid(self.grid, other.grid)
        return WaveFunction(self.grid, self.values - other.values)

    def __rmul__(self, c):
        return WaveFunction(self.grid, c * self.values)


def _same_grid(a, b):
    if a != b:
        raise GridMismatchError(f"grids differ: {a} vs {b}")


@dataclass(frozen=True)
class SubsetE:
    """Subset of the 1-based coordinate indices {1..n}."""

    members: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        m = tuple(sorted(int(j) for j in self.members))
        if len(set(m)) != len(m):
            raise ValueError(f"repeated indices in {self.members}")
        if any(j < 1 for j in m):
            raise ValueError("indices are 1-based")
        object.__setattr__(self, "members", m)

    def check(self, n: int) -> "SubsetE":
        if any(j > n for j in self.members):
            raise ValueError(f"{self.members} not inside 1..{n}")
        return self

    def complement(self, n: int) -> "SubsetE":
        self.check(n)
        return SubsetE(tuple(j for j in range(1, n + 1) if j not in self.members))

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, j):
        return j in self.members

    @classmethod
    def all_subsets(cls, n: int) -> list["SubsetE"]:
        out = []
        for r in range(n + 1):
            out.extend(cls(c) for c in itertools.combinations(range(1, n + 1), r))
        return out


@dataclass(frozen=True)
class MultiIndexPair:
    alpha: tuple[int, ...]
    beta: tuple[int, ...]

    def __post_init__(self):
        a, b = tuple(int(v) for v in self.alpha), tuple(int(v) for v in self.beta)
        if len(a) != len(b):
            raise ValueError("alpha and beta must have equal length")
        if min(a + b, default=0) < 0:
            raise ValueError("multi-indices are nonnegative")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def order(self) -> int:
        return sum(self.alpha) + sum(self.beta)


def l2_inner(f: WaveFunction, g: WaveFunction) -> complex:
    _same_grid(f.grid, g.grid)
    return complex(np.vdot(g.values.ravel(), f.values.ravel()) * f.grid.cell)


def _coherent_axis(x: np.ndarray, xi: np.ndarray, u: np.ndarray) -> np.ndarray:
    """One-dimensional factor of Psi_X sampled at u, broadcast over (x, xi)."""
    x = np.asarray(x)[..., None]
    xi = np.asarray(xi)[..., None]
    return np.pi ** -0.25 * np.exp(-0.5 * (u - x) ** 2 + 1j * (u * xi - 0.5 * x * xi))


def coherent_state(X: PhasePoint, grid: SpatialGrid) -> WaveFunction:
    if X.n != grid.n:
        raise ValueError(f"dimension mismatch: point n={X.n}, grid n={grid.n}")
    vals = np.ones((), dtype=complex)
    for j, ax in enumerate(grid.axes):
        vals = np.multiply.outer(vals, _coherent_axis(X.x[j], X.xi[j], ax.nodes))
    return WaveFunction(grid, vals)


MAX_HERMITE = 20


def _hermite_values(k: int, u: np.ndarray) -> np.ndarray:
    h_prev = np.zeros_like(u)
    h = np.pi ** -0.25 * np.exp(-0.5 * u**2)
    for m in range(k):
        h_prev, h = h, np.sqrt(2.0 / (m + 1)) * u * h - np.sqrt(m / (m + 1)) * h_prev
    return h


def hermite_function(k: int | Sequence[int], grid: SpatialGrid | AxisGrid) -> WaveFunction:
    """Normalized Hermite function; a sequence of degrees gives the tensor product."""
    if isinstance(grid, AxisGrid):
        grid = SpatialGrid((grid,))
    ks = [k] * grid.n if np.isscalar(k) else list(k)
    if len(ks) != grid.n:
        raise ValueError("one degree per axis required")
    for d in ks:
        if not 0 <= d <= MAX_HERMITE:
            raise ValueError(f"Hermite degree {d} outside 0..{MAX_HERMITE}")
    vals = np.ones((), dtype=complex)
    for d, ax in zip(ks, grid.axes):
        vals = np.multiply.outer(vals, _hermite_values(d, ax.nodes))
    return WaveFunction(grid, vals)


def coherent_transform(f: WaveFunction, phase_grid: PhaseGrid) -> np.ndarray:
    """Array of ``<f, Psi_X>`` over every node X of ``phase_grid``.

    The result has the phase grid's interleaved shape.
    """
    grid = f.grid
    if phase_grid.n != grid.n:
        raise GridMismatchError("phase grid and spatial grid dimensions differ")
    t = f.values
    for j, ax in enumerate(grid.axes):
        px, pxi = phase_grid.position_axes[j], phase_grid.momentum_axes[j]
        xx, kk = np.meshgrid(px.nodes, pxi.nodes, indexing="ij")
        psi = _coherent_axis(xx, kk, ax.nodes).reshape(-1, ax.count)
        # contract the leading spatial axis, append (x_j, xi_j) at the end
        t = np.tensordot(t, psi.conj(), axes=([0], [1]))
        t = t.reshape(t.shape[:-1] + (px.count, pxi.count))
    return t * grid.cell


def identity_defects(funcs: Sequence[WaveFunction], phase_grid: PhaseGrid) -> np.ndarray:
    """Matrix of identity defects over every pair of ``funcs`` (transforms computed once)."""
    for f in funcs[1:]:
        _same_grid(funcs[0].grid, f.grid)
    n = funcs[0].grid.n
    V = np.stack([coherent_transform(f, phase_grid).ravel() for f in funcs])
    resolved = (V @ V.conj().T) * phase_grid.cell / (2 * np.pi) ** n
    exact = np.array([[l2_inner(f, g) for g in funcs] for f in funcs])
    return np.abs(exact - resolved)


def identity_defect(f: WaveFunction, g: WaveFunction, phase_grid: PhaseGrid) -> float:
    """|<f, g> - (2pi)^-n int <f, Psi_X><Psi_X, g> dX| by phase-grid quadrature."""
    _same_grid(f.grid, g.grid)
    vf = coherent_transform(f, phase_grid)
    vg = coherent_transform(g, phase_grid)
    resolved = np.vdot(vg.ravel(), vf.ravel()) * phase_grid.cell / (2 * np.pi) ** f.grid.n
    return float(abs(l2_inner(f, g) - resolved))


@dataclass(frozen=True)
class ReferenceGrids:
    spatial: SpatialGrid
    phase: PhaseGrid


# Dense-operator budget keeps N^n <= 4096 rows.
_REFERENCE = {
    1: dict(spatial=(12.0, 256), phase=(8.0, 128)),
    2: dict(spatial=(6.0, 32), phase=(6.0, 32)),
    3: dict(spatial=(4.0, 16), phase=(5.0, 16)),
}


def reference_grids(n: int) -> ReferenceGrids:
    if n not in _REFERENCE:
        raise ValueError(f"reference grids exist for n <= 3, got {n}")
    r = _REFERENCE[n]
    return ReferenceGrids(SpatialGrid.uniform(n, *r["spatial"]), PhaseGrid.uniform(n, *r["phase"]))
