"""Quantization engines and operator-norm estimation.

All operators are dense matrices on a SpatialGrid; a matrix acts on sampled
wave functions by ``(entries @ values) * weight`` where ``weight`` is the
spatial cell volume.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
from scipy.interpolate import RegularGridInterpolator
from scipy.special import roots_hermite, roots_legendre

from .dsl import SampledSymbol, SymbolExpr, evaluate_arrays, sample_symbol
from .phase import (
    GridMismatchError,
    PhaseGrid,
    PhasePoint,
    SpatialGrid,
    SubsetE,
    WaveFunction,
    _coherent_axis,
    symplectic_form,
)

MAX_DIMENSION = 3
DENSE_SVD_ROWS = 4096
POWER_SEED = 20130901
_CHUNK = 1 << 22


class NormEstimateError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (final relative residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    grid: SpatialGrid
    entries: np.ndarray
    weight: float

    def __post_init__(self):
        m = self.grid.size
        e = np.asarray(self.entries, dtype=complex)
        if e.shape != (m, m):
            raise ValueError(f"expected a {m}x{m} matrix, got {e.shape}")
        if not np.all(np.isfinite(e)):
            raise ValueError("operator has non-finite entries")
        object.__setattr__(self, "entries", e)

    def weighted(self) -> np.ndarray:
        return self.entries * self.weight

    def apply(self, f: WaveFunction) -> WaveFunction:
        if f.grid != self.grid:
            raise GridMismatchError("wave function lives on another grid")
        return WaveFunction(self.grid, (self.entries @ f.values.ravel()) * self.weight)

    def matrix_element(self, f: WaveFunction, g: WaveFunction) -> complex:
        """<A f, g>."""
        return complex(np.vdot(g.values.ravel(), self.apply(f).values.ravel()) * self.grid.cell)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._compatible(other)
        return OperatorMatrix(self.grid, self.entries + other.entries, self.weight)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._compatible(other)
        return OperatorMatrix(self.grid, self.entries - other.entries, self.weight)

    def _compatible(self, other):
        if other.grid != self.grid or other.weight != self.weight:
            raise GridMismatchError("operators live on different grids")

    def hermitian_defect(self) -> float:
        """max |A - A^*| relative to the largest entry."""
        e = self.entries
        scale = np.max(np.abs(e)) or 1.0
        return float(np.max(np.abs(e - e.conj().T)) / scale)


@dataclass(frozen=True, eq=False)
class WignerTable:
    grid: PhaseGrid
    values: np.ndarray


def _check_dim(n):
    if n > MAX_DIMENSION:
        raise ValueError(f"dense operators are limited to n <= {MAX_DIMENSION}, got n={n}")


# ---------------------------------------------------------------------------
# Weyl quantization
# ---------------------------------------------------------------------------


def _pair_indices(grid: SpatialGrid):
    """Flat (midpoint, difference) indices and the minimum-image mask for every entry (i, j)."""
    s_flat = np.zeros((grid.size, grid.size), dtype=np.int64)
    d_flat = np.zeros_like(s_flat)
    keep = np.ones((grid.size, grid.size), dtype=bool)
    idx = np.indices(grid.shape).reshape(grid.n, -1)
    for a, ax in enumerate(grid.axes):
        i = idx[a][:, None]
        j = idx[a][None, :]
        s_flat = s_flat * (2 * ax.count) + (i + j)
        d_flat = d_flat * ax.count + (i - j) % ax.count
        keep &= np.abs(i - j) < ax.count // 2
    return s_flat.ravel(), d_flat.ravel(), keep.ravel()


def _as_dual_table(F, grid: SpatialGrid, h: float) -> Callable[[np.ndarray], np.ndarray]:
    """Return ``rows(s_flat) -> values`` of F at (midpoint s, every dual momentum)."""
    dual = PhaseGrid.weyl_dual(grid, h)
    pos_nodes = [ax.nodes for ax in dual.position_axes]
    mom_mesh = np.meshgrid(*[ax.nodes for ax in dual.momentum_axes], indexing="ij")
    mom_flat = [m.ravel()[None, :] for m in mom_mesh]
    pos_shape = tuple(ax.count for ax in dual.position_axes)

    if isinstance(F, SampledSymbol):
        if F.grid == dual:
            # (x1, p1, x2, p2, ...) -> (x..., p...)
            n = grid.n
            order = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
            table = F.values.transpose(order).reshape(int(np.prod(pos_shape)), -1)
            return lambda s: table[s]
        F = _linear_interpolant(F)

    def rows(s):
        multi = np.unravel_index(s, pos_shape)
        X = [pos_nodes[a][multi[a]][:, None] for a in range(grid.n)]
        if isinstance(F, SymbolExpr):
            return evaluate_arrays(F, X, mom_flat).astype(complex)
        return np.asarray(F(X, mom_flat), dtype=complex)

    return rows


def _linear_interpolant(F: SampledSymbol):
    interp = RegularGridInterpolator(
        [ax.nodes for ax in F.grid.axes], F.values, method="linear", bounds_error=False, fill_value=0.0
    )

    def call(X, P):
        n = len(X)
        shape = np.broadcast_shapes(*(np.shape(v) for v in list(X) + list(P)))
        cols = []
        for j in range(n):
            cols.append(np.broadcast_to(X[j], shape).ravel())
            cols.append(np.broadcast_to(P[j], shape).ravel())
        return interp(np.column_stack(cols)).reshape(shape)

    return call


def weyl_quantize(F, h: float, grid: SpatialGrid) -> OperatorMatrix:
    """Weyl operator with kernel (2 pi h)^-n int e^{i(x-y).xi/h} F((x+y)/2, xi) dxi.

    ``F`` may be a SymbolExpr (evaluated at exact midpoints), a SampledSymbol
    on ``PhaseGrid.weyl_dual(grid, h)`` (used as is) or on any other phase
    grid (linearly interpolated), or a vectorized callable ``F(X, P)``.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    _check_dim(grid.n)
    if isinstance(F, (SymbolExpr, SampledSymbol)) and getattr(F, "n", None) not in (None, grid.n):
        raise GridMismatchError("symbol dimension differs from grid dimension")
    if isinstance(F, SampledSymbol) and F.grid.n != grid.n:
        raise GridMismatchError("symbol grid dimension differs from spatial grid")
    rows = _as_dual_table(F, grid, h)
    mom_shape = grid.shape
    m = grid.size
    s_flat, d_flat, keep = _pair_indices(grid)
    # the N-point DFT is N-periodic in i - j; keep only the minimum image
    s_flat, d_flat, where = s_flat[keep], d_flat[keep], np.flatnonzero(keep)
    order = np.argsort(s_flat, kind="stable")
    s_sorted = s_flat[order]
    uniq, starts = np.unique(s_sorted, return_index=True)
    bounds = np.append(starts, s_sorted.size)
    kernel = np.zeros(m * m, dtype=complex)
    scale = 1.0 / grid.cell
    per = max(1, _CHUNK // m)
    for c0 in range(0, uniq.size, per):
        block = uniq[c0 : c0 + per]
        vals = rows(block).reshape((block.size,) + mom_shape)
        axes = tuple(range(1, grid.n + 1))
        spec = np.fft.ifftn(np.fft.ifftshift(vals, axes=axes), axes=axes).reshape(block.size, -1)
        lo, hi = bounds[c0], bounds[min(c0 + per, uniq.size)]
        sel = order[lo:hi]
        local = np.repeat(np.arange(block.size), np.diff(bounds[c0 : c0 + block.size + 1]))
        kernel[where[sel]] = spec[local, d_flat[sel]] * scale
    return OperatorMatrix(grid, kernel.reshape(m, m), grid.cell)


def weyl_plane_wave(a, b, h: float, f: WaveFunction) -> WaveFunction:
    """u -> exp(i a.u/h + i a.b/(2h)) f(u + b); b must be a whole number of grid steps."""
    if not h > 0:
        raise ValueError("h must be positive")
    grid = f.grid
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.size != grid.n or b.size != grid.n:
        raise ValueError("a and b must have length n")
    shifted = f.values
    for j, ax in enumerate(grid.axes):
        k = b[j] / ax.spacing
        if abs(k - round(k)) > 1e-9:
            raise GridMismatchError(f"shift b_{j + 1}={b[j]} is not a multiple of the grid spacing {ax.spacing}")
        shifted = _shift_zero_fill(shifted, int(round(k)), j)
    phase = np.ones((), dtype=complex)
    for j, ax in enumerate(grid.axes):
        phase = np.multiply.outer(phase, np.exp(1j * a[j] * ax.nodes / h))
    return WaveFunction(grid, phase * np.exp(1j * (a @ b) / (2 * h)) * shifted)


def _shift_zero_fill(v: np.ndarray, k: int, axis: int) -> np.ndarray:
    """out[i] = v[i + k] along ``axis``, zero outside."""
    out = np.zeros_like(v)
    n = v.shape[axis]
    if abs(k) >= n:
        return out
    src = [slice(None)] * v.ndim
    dst = [slice(None)] * v.ndim
    if k >= 0:
        src[axis], dst[axis] = slice(k, n), slice(0, n - k)
    else:
        src[axis], dst[axis] = slice(0, n + k), slice(-k, n)
    out[tuple(dst)] = v[tuple(src)]
    return out


# ---------------------------------------------------------------------------
# Anti-Wick quantization
# ---------------------------------------------------------------------------


def anti_wick_quantize(F: SampledSymbol, grid: SpatialGrid) -> OperatorMatrix:
    """(2 pi)^-n sum_X w F(X) |Psi_X><Psi_X| over the nodes of F's phase grid."""
    if F.grid.n != grid.n:
        raise GridMismatchError("symbol and spatial grid dimensions differ")
    _check_dim(grid.n)
    n = grid.n
    coef = F.values * (F.grid.cell / (2 * np.pi) ** n)
    factors = []
    for j, ax in enumerate(grid.axes):
        xx, kk = np.meshgrid(F.grid.position_axes[j].nodes, F.grid.momentum_axes[j].nodes, indexing="ij")
        factors.append(_coherent_axis(xx, kk, ax.nodes).reshape(-1, ax.count))
    if n == 1:
        psi = factors[0]
        A = psi.T @ (coef.reshape(-1, 1) * psi.conj())
        return OperatorMatrix(grid, A, grid.cell)
    # contract one (x_j, xi_j) pair at a time against |psi><psi| on axis j
    t = coef.reshape([f.shape[0] for f in factors])
    for psi in factors:
        N = psi.shape[1]
        proj = (psi[:, :, None] * psi.conj()[:, None, :]).reshape(psi.shape[0], N * N)
        t = np.tensordot(t, proj, axes=([0], [0]))
    shape = []
    for ax in grid.axes:
        shape += [ax.count, ax.count]
    t = t.reshape(shape)
    order = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    A = t.transpose(order).reshape(grid.size, grid.size)
    return OperatorMatrix(grid, A, grid.cell)


# ---------------------------------------------------------------------------
# Heat smoothing and the subset decomposition
# ---------------------------------------------------------------------------


def _axes_of(S: SubsetE, n: int) -> list[int]:
    S.check(n)
    out = []
    for j in S:
        out += [2 * (j - 1), 2 * (j - 1) + 1]
    return out


def _fourier_multiply(F: SampledSymbol, axes: Sequence[int], multiplier) -> SampledSymbol:
    if not axes:
        return F
    omegas = np.meshgrid(*[F.grid.axes[a].angular_frequencies() for a in axes], indexing="ij")
    m = multiplier(omegas)
    spec = np.fft.fftn(F.values, axes=axes)
    shape = [1] * F.values.ndim
    for a in axes:
        shape[a] = F.grid.axes[a].count
    # meshgrid output is ordered like ``axes``; align it with the array
    m = np.broadcast_to(m, tuple(F.grid.axes[a].count for a in axes))
    perm = np.argsort(axes)
    m = np.transpose(m, perm).reshape(shape)
    return F.with_values(np.fft.ifftn(spec * m, axes=axes))


def heat_smooth(F: SampledSymbol, S: SubsetE, t: float) -> SampledSymbol:
    """exp(t Delta_S) F with Delta_S = sum_{j in S} (d^2/dx_j^2 + d^2/dxi_j^2), periodic FFT."""
    if t < 0:
        raise ValueError("t must be >= 0")
    axes = _axes_of(S, F.grid.n)
    return _fourier_multiply(F, axes, lambda w: np.exp(-t * sum(wk**2 for wk in w)))


def t_operator(F: SampledSymbol, E: SubsetE) -> SampledSymbol:
    """T(E) F = prod_{j in E} (I - exp(Delta_j / 4)) F; T(empty) = I."""
    out = F
    for j in E.check(F.grid.n):
        out = out - heat_smooth(out, SubsetE((j,)), 0.25)
    return out


def _on_dual(F, grid: SpatialGrid) -> SampledSymbol:
    dual = PhaseGrid.weyl_dual(grid, 1.0)
    if isinstance(F, SymbolExpr):
        return sample_symbol(F, dual)
    if F.grid != dual:
        raise GridMismatchError("hybrid operators need the symbol on PhaseGrid.weyl_dual(grid, 1)")
    return F


def hybrid_quantize(F, E: SubsetE, grid: SpatialGrid) -> OperatorMatrix:
    """Weyl in the variables of E, anti-Wick in the others: Op^Weyl(exp(Delta_{E^c}/4) F)."""
    F = _on_dual(F, grid)
    return weyl_quantize(heat_smooth(F, E.complement(grid.n), 0.25), 1.0, grid)


def decomposition_terms(F, grid: SpatialGrid) -> dict[SubsetE, OperatorMatrix]:
    F = _on_dual(F, grid)
    return {E: hybrid_quantize(t_operator(F, E), E, grid) for E in SubsetE.all_subsets(grid.n)}


def decompose_weyl(F, grid: SpatialGrid) -> float:
    """Operator-norm defect of Op^Weyl(F) - sum_E Op^{hyb,E}(T(E) F)."""
    F = _on_dual(F, grid)
    terms = decomposition_terms(F, grid)
    total = None
    for op in terms.values():
        total = op if total is None else total + op
    return operator_norm(weyl_quantize(F, 1.0, grid) - total)


def symbol_decomposition_defect(F: SampledSymbol) -> float:
    """max |F - sum_E exp(Delta_{E^c}/4) T(E) F| on the sampled grid."""
    n = F.grid.n
    acc = np.zeros_like(F.values)
    for E in SubsetE.all_subsets(n):
        acc = acc + heat_smooth(t_operator(F, E), E.complement(n), 0.25).values
    return float(np.max(np.abs(acc - F.values)))


def multiplier_telescoping_defect(omegas: Sequence[float]) -> float:
    """|1 - sum_E prod_{j in E}(1 - m_j) prod_{j notin E} m_j| with m_j = exp(-omega_j^2/4).

    ``omegas[j]`` is the total phase-space frequency of a plane wave on axis pair j.
    """
    m = np.exp(-np.asarray(omegas, dtype=float) ** 2 / 4)
    n = m.size
    total = 0.0
    for E in itertools.product((False, True), repeat=n):
        term = 1.0
        for j, inE in enumerate(E):
            term *= (1 - m[j]) if inE else m[j]
        total += term
    return abs(1.0 - total)


def spectral_derivative(F: SampledSymbol, alpha: Sequence[int], beta: Sequence[int]) -> SampledSymbol:
    """d_x^alpha d_xi^beta F by Fourier multiplication on the periodic grid."""
    n = F.grid.n
    if len(alpha) != n or len(beta) != n:
        raise ValueError("multi-index length must equal n")
    orders = {}
    for j in range(n):
        if alpha[j]:
            orders[2 * j] = alpha[j]
        if beta[j]:
            orders[2 * j + 1] = beta[j]
    axes = sorted(orders)
    if not axes:
        return F

    def mult(w):
        out = 1.0
        for a, wk in zip(axes, w):
            k = orders[a]
            f = (1j * wk) ** k
            if k % 2 and F.grid.axes[a].count % 2 == 0:
                # odd derivatives drop the unpaired Nyquist mode
                f = np.where(np.isclose(np.abs(wk), np.max(np.abs(wk))), 0.0, f)
            out = out * f
        return out

    return _fourier_multiply(F, axes, mult)


# ---------------------------------------------------------------------------
# Wigner function and coherent matrix elements
# ---------------------------------------------------------------------------


def wigner(f: WaveFunction, g: WaveFunction, phase_grid: PhaseGrid) -> WignerTable:
    """H(f, g, Z) = int e^{-i t.zeta} f(z + t/2) conj(g(z - t/2)) dt.

    Position nodes of ``phase_grid`` must sit on the half-step lattice of the
    spatial grid (every midpoint of two spatial nodes); momentum nodes are free.
    """
    if f.grid != g.grid:
        raise GridMismatchError("f and g live on different grids")
    grid = f.grid
    if phase_grid.n != grid.n:
        raise GridMismatchError("phase grid dimension differs from spatial grid")
    fi, gi, weights = [], [], []
    for j, ax in enumerate(grid.axes):
        N, dx = ax.count, ax.spacing
        z = phase_grid.position_axes[j].nodes
        s_real = (z + ax.half_width) / (dx / 2)
        s = np.rint(s_real).astype(int)
        if np.max(np.abs(s - s_real)) > 1e-9 or s.min() < 0 or s.max() > 2 * N - 1:
            raise GridMismatchError("phase-grid positions are not midpoints of the spatial grid")
        d = np.arange(-(N - 1), N)
        two_i = s[:, None] + d[None, :]
        two_j = s[:, None] - d[None, :]
        ok = (two_i % 2 == 0) & (two_i >= 0) & (two_i < 2 * N) & (two_j >= 0) & (two_j < 2 * N)
        fi.append(np.where(ok, two_i // 2, 0))
        gi.append(np.where(ok, two_j // 2, 0))
        zeta = phase_grid.momentum_axes[j].nodes
        # t = d dx, only one parity contributes so the t-step is 2 dx
        weights.append((ok, np.exp(-1j * np.outer(d * dx, zeta)) * (2 * dx)))
    n = grid.n
    # gather f(z + t/2) conj g(z - t/2) on the (s_1, d_1, ..., s_n, d_n) lattice
    idx_f, idx_g = [], []
    for j in range(n):
        shape = [1] * (2 * n)
        shape[2 * j], shape[2 * j + 1] = fi[j].shape
        idx_f.append(fi[j].reshape(shape))
        idx_g.append(gi[j].reshape(shape))
    q = f.values[tuple(idx_f)] * np.conj(g.values[tuple(idx_g)])
    for j in range(n):
        shape = [1] * (2 * n)
        shape[2 * j], shape[2 * j + 1] = weights[j][0].shape
        q = q * weights[j][0].reshape(shape)
    # contract each d_j against exp(-i t zeta)
    for j in range(n):
        q = np.moveaxis(np.tensordot(q, weights[j][1], axes=([2 * j + 1], [0])), -1, 2 * j + 1)
    return WignerTable(phase_grid, q)


def phi_kernel(X: PhasePoint, Y: PhasePoint, Z: PhasePoint) -> complex:
    """exp(-|Z - (X+Y)/2|^2 - i sigma(Z, X - Y) - (i/2) sigma(X, Y))."""
    if not X.n == Y.n == Z.n:
        raise ValueError("dimension mismatch")
    mid = (X + Y).scaled(0.5)
    return complex(np.exp(-(Z - mid).norm2() - 1j * symplectic_form(Z, X - Y) - 0.5j * symplectic_form(X, Y)))


def phi_kernel_grid(X: PhasePoint, Y: PhasePoint, grid: PhaseGrid) -> np.ndarray:
    """Phi_n(X, Y, Z) for every node Z of ``grid`` (interleaved shape)."""
    mesh = grid.mesh()
    z, zeta = mesh[0::2], mesh[1::2]
    expo = np.zeros(grid.shape, dtype=complex)
    for j in range(grid.n):
        mx, mxi = 0.5 * (X.x[j] + Y.x[j]), 0.5 * (X.xi[j] + Y.xi[j])
        dx, dxi = X.x[j] - Y.x[j], X.xi[j] - Y.xi[j]
        expo -= (z[j] - mx) ** 2 + (zeta[j] - mxi) ** 2
        # sigma(Z, X - Y) = (x - y) . zeta - z . (xi - eta)
        expo -= 1j * (dx * zeta[j] - z[j] * dxi)
    expo -= 0.5j * symplectic_form(X, Y)
    return np.exp(expo)


def coherent_matrix_element(F: SampledSymbol, X: PhasePoint, Y: PhasePoint, margin: float = 5.0) -> complex:
    """pi^-n int F(Z) Phi_n(X, Y, Z) dZ by phase-grid quadrature."""
    grid = F.grid
    if not X.n == Y.n == grid.n:
        raise ValueError("dimension mismatch")
    mid = (X + Y).scaled(0.5).interleaved()
    for c, ax in zip(mid, grid.axes):
        lo, hi = ax.nodes[0], ax.nodes[-1]
        if c - margin < lo or c + margin > hi:
            raise GridMismatchError(f"Gaussian bump at {c:.3g} is within {margin} of the grid boundary [{lo:.3g}, {hi:.3g}]")
    phi = phi_kernel_grid(X, Y, grid)
    return complex(np.sum(F.values * phi) * grid.cell / np.pi**grid.n)


# ---------------------------------------------------------------------------
# Norm estimation
# ---------------------------------------------------------------------------


def operator_norm(A: OperatorMatrix, method: str = "auto", tol: float = 1e-8, max_iter: int = 10000) -> float:
    """Largest singular value of the weighted matrix (the L^2 operator norm on the grid)."""
    return matrix_norm(A.weighted(), method=method, tol=tol, max_iter=max_iter)


def matrix_norm(B: np.ndarray, method: str = "auto", tol: float = 1e-8, max_iter: int = 10000) -> float:
    if method == "auto":
        if B.shape[0] > DENSE_SVD_ROWS:
            method = "power"
        elif B.shape[0] == B.shape[1] and np.max(np.abs(B - B.conj().T)) <= 1e-13 * max(np.max(np.abs(B)), 1e-300):
            # self-adjoint: the norm is the largest |eigenvalue|, and eigvalsh is ~3x cheaper than svdvals
            method = "eigh"
        else:
            method = "svd"
    if method == "svd":
        return float(scipy.linalg.svdvals(B, check_finite=False)[0])
    if method == "eigh":
        return float(np.max(np.abs(scipy.linalg.eigvalsh(B, check_finite=False))))
    if method != "power":
        raise ValueError(f"unknown method {method!r}")
    rng = np.random.default_rng(POWER_SEED)
    v = rng.standard_normal(B.shape[1]) + 1j * rng.standard_normal(B.shape[1])
    v /= np.linalg.norm(v)
    lam_prev = 0.0
    resid = np.inf
    for _ in range(max_iter):
        w = B.conj().T @ (B @ v)
        lam = float(np.real(np.vdot(v, w)))
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        v = w / nw
        resid = abs(lam - lam_prev) / max(lam, np.finfo(float).tiny)
        if resid <= tol * 1e-2:
            return float(np.sqrt(lam))
        lam_prev = lam
    raise NormEstimateError("power iteration did not converge", resid)
