"""Explicit constants and inequalities of the dimension-robust bound.

Every scanned supremum here is a *lower* bound on the true sup norm (the
maximum over a finite lattice, refined by local search); reports say so.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, optimize
from scipy.stats import qmc
from scipy.special import roots_hermite, roots_legendre

from . import dsl
from .dsl import SampledSymbol, SymbolExpr, diff_symbol, sample_symbol
from .phase import MultiIndexPair, PhaseGrid, PhasePoint, SubsetE
from .quantize import heat_smooth, spectral_derivative, _fourier_multiply

# constants of the proof chain; verify.py checks they stay consistent
SCHUR_FACTOR = 9.0  # max(C_0, C_1, C_2)^2 <= 3^2
LEMMA21_BASE = 9 * math.pi / 2
LEMMA22_BASE = 18.0
THEOREM_CONSTANT = 81 * math.pi
A_NORM = 2.0
BC_NORM = math.pi**-0.5
D_NORM = 0.25
H_TOLERANCE = 1e-9


class PreconditionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Data types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HSpec:
    M: float
    rho: tuple[float, ...]
    delta: tuple[float, ...]
    h: float = 1.0

    def __post_init__(self):
        rho = tuple(float(r) for r in np.atleast_1d(self.rho))
        delta = tuple(float(d) for d in np.atleast_1d(self.delta))
        if len(rho) != len(delta) or not rho:
            raise ValueError("rho and delta must be nonempty and of equal length")
        if self.M < 0 or min(rho + delta) < 0:
            raise ValueError("M, rho and delta must be nonnegative")
        if not self.h > 0:
            raise ValueError("h must be positive")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "M", float(self.M))
        object.__setattr__(self, "h", float(self.h))

    @property
    def n(self) -> int:
        return len(self.rho)

    def products(self) -> np.ndarray:
        """h rho_j delta_j."""
        return self.h * np.asarray(self.rho) * np.asarray(self.delta)

    def applicable(self) -> bool:
        return bool(np.all(self.products() <= 1.0))

    def budget(self, pair: MultiIndexPair) -> float:
        """M prod rho_j^alpha_j delta_j^beta_j with 0^0 = 1."""
        out = self.M
        for r, d, a, b in zip(self.rho, self.delta, pair.alpha, pair.beta):
            out *= (r**a if a else 1.0) * (d**b if b else 1.0)
        return out


@dataclass(frozen=True)
class Box:
    """Axis-aligned scan window over the interleaved phase coordinates."""

    bounds: tuple[tuple[float, float], ...]

    @classmethod
    def cube(cls, n: int, half: float = 8.0) -> "Box":
        return cls(tuple((-half, half) for _ in range(2 * n)))

    @classmethod
    def split(cls, n: int, x: tuple[float, float] = (-6.0, 6.0), p: tuple[float, float] = (-4.0, 4.0)) -> "Box":
        return cls(tuple(ax for _ in range(n) for ax in (tuple(x), tuple(p))))

    @property
    def n(self) -> int:
        return len(self.bounds) // 2

    @property
    def lo(self) -> np.ndarray:
        return np.array([b[0] for b in self.bounds])

    @property
    def hi(self) -> np.ndarray:
        return np.array([b[1] for b in self.bounds])


@dataclass
class DerivativeScan:
    pairs: list[MultiIndexPair]
    sups: np.ndarray
    argmax: np.ndarray  # (len(pairs), 2n) interleaved coordinates
    window: Box
    points: int
    note: str = "scanned sups are lower bounds on the true sup norms"

    def sup_of(self, pair: MultiIndexPair) -> float:
        return float(self.sups[self.pairs.index(pair)])

    def total(self) -> float:
        return float(np.sum(self.sups))


@dataclass
class HCheck:
    passed: bool
    worst_pair: MultiIndexPair | None
    worst_ratio: float
    scan: DerivativeScan


@dataclass
class BoundReport:
    numeric_norm: float
    bound: float
    subset_values: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.numeric_norm <= self.bound * (1 + 1e-6)


# ---------------------------------------------------------------------------
# Multi-indices and derivative scans
# ---------------------------------------------------------------------------


def enumerate_I2(E: SubsetE, n: int, m: int = 2) -> list[MultiIndexPair]:
    E.check(n)
    members = list(E)
    out = []
    for orders in itertools.product(range(m + 1), repeat=2 * len(members)):
        alpha = [0] * n
        beta = [0] * n
        for k, j in enumerate(members):
            alpha[j - 1] = orders[2 * k]
            beta[j - 1] = orders[2 * k + 1]
        out.append(MultiIndexPair(tuple(alpha), tuple(beta)))
    return out


def _lattice_counts(box: Box, active: set[int], budget: int) -> list[int]:
    a, b = 65, 9
    k = len(active)
    m = len(box.bounds) - k
    while a**k * b**m > budget and (a > 5 or b > 3):
        if a > 5 and (a > 2 * b or b <= 3):
            a -= 2
        else:
            b -= 2
    return [1 if lo == hi else (a if ax in active else b) for ax, (lo, hi) in enumerate(box.bounds)]


def _evaluate(exprs, pts: np.ndarray) -> np.ndarray:
    n = exprs[0].n
    X = [pts[:, 2 * j] for j in range(n)]
    P = [pts[:, 2 * j + 1] for j in range(n)]
    return np.abs(np.vstack(dsl.evaluate_many(exprs, X, P)))


def scan_expressions(
    exprs: Sequence[SymbolExpr],
    window: Box,
    active_axes: set[int] | None = None,
    budget: int = 200_000,
    sobol_points: int = 8192,
    refine: bool = True,
    starts: int = 6,
    seed: int = 7,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Max of |expr| over a lattice plus Sobol points, refined by multi-start compass search.

    Returns (sups, argmax points, number of evaluation points).
    """
    n = window.n
    dim = 2 * n
    sups = np.zeros(len(exprs))
    arg = np.tile((window.lo + window.hi) / 2, (len(exprs), 1))
    live = [k for k, e in enumerate(exprs) if not e.is_zero()]
    if not live:
        return sups, arg, 0
    ex = [exprs[k] for k in live]
    K = len(ex)
    if active_axes is None:
        active_axes = set(range(dim))
    counts = _lattice_counts(window, active_axes, budget)
    axes = [np.linspace(lo, hi, c) for (lo, hi), c in zip(window.bounds, counts)]
    spacing = np.array([a[1] - a[0] if a.size > 1 else 0.0 for a in axes])
    total = int(np.prod(counts))
    pool = 8 * starts if refine else 1
    top_v = np.full((K, 0), -1.0)
    top_p = np.zeros((K, 0, dim))
    chunk = max(pool, min(total, 2_000_000 // K))

    def absorb(pts):
        nonlocal top_v, top_p
        vals = _evaluate(ex, pts)
        m = min(pool, vals.shape[1])
        idx = np.argpartition(-vals, m - 1, axis=1)[:, :m]
        v = np.concatenate([top_v, np.take_along_axis(vals, idx, 1)], axis=1)
        p = np.concatenate([top_p, pts[idx]], axis=1)
        m = min(pool, v.shape[1])
        keep = np.argpartition(-v, m - 1, axis=1)[:, :m]
        top_v = np.take_along_axis(v, keep, 1)
        top_p = np.take_along_axis(p, keep[:, :, None], 1)

    for start in range(0, total, chunk):
        flat = np.arange(start, min(total, start + chunk))
        idx = np.unravel_index(flat, counts)
        absorb(np.column_stack([axes[a][idx[a]] for a in range(dim)]))
    npts = total
    if sobol_points:
        s = qmc.Sobol(dim, scramble=True, seed=seed).random(sobol_points)
        absorb(window.lo + s * (window.hi - window.lo))
        npts += sobol_points
    best_k = np.argmax(top_v, axis=1)
    best = top_v[np.arange(K), best_k]
    best_pt = top_p[np.arange(K), best_k]
    if refine:
        for k in range(K):
            x0 = _diverse(top_v[k], top_p[k], spacing, starts)
            v, p, extra = _compass(ex[k], x0, window, spacing)
            npts += extra
            if v > best[k]:
                best[k], best_pt[k] = v, p
    sups[live] = best
    arg[live] = best_pt
    return sups, arg, npts


def _diverse(vals, pts, spacing, count):
    """Greedy pick of high-value starts at least one lattice cell apart."""
    order = np.argsort(-vals, kind="stable")
    chosen = []
    scale = np.where(spacing > 0, spacing, 1.0)
    for i in order:
        if all(np.max(np.abs(pts[i] - pts[j]) / scale) >= 1.0 for j in chosen):
            chosen.append(i)
            if len(chosen) == count:
                break
    return pts[chosen]


def _compass(expr, x0, window: Box, spacing, iters: int = 80):
    """Compass search from several starts at once; returns the best value and point."""
    fn = dsl.compile_nodes([expr.root])
    lo, hi = window.lo, window.hi
    n = window.n
    dim = x0.shape[1]
    dirs = np.vstack([np.eye(dim), -np.eye(dim)])
    pts = x0.copy()
    step = np.tile(spacing / 2, (len(pts), 1))

    def f(q):
        with np.errstate(all="ignore"):
            out = fn([q[:, 2 * j] for j in range(n)], [q[:, 2 * j + 1] for j in range(n)])[0]
        return np.abs(np.broadcast_to(np.asarray(out, dtype=float), q.shape[:1]))

    cur = f(pts)
    evals = len(pts)
    tiny = 1e-7 * (hi - lo)
    for _ in range(iters):
        cand = np.clip(pts[:, None, :] + dirs[None] * step[:, None, :], lo, hi)
        vals = f(cand.reshape(-1, dim)).reshape(len(pts), 2 * dim)
        evals += vals.size
        j = np.argmax(vals, axis=1)
        v = vals[np.arange(len(pts)), j]
        up = v > cur
        cur = np.where(up, v, cur)
        pts[up] = cand[np.arange(len(pts)), j][up]
        step[~up] *= 0.5
        if np.all(step <= tiny):
            break
    b = int(np.argmax(cur))
    return float(cur[b]), pts[b], evals


_SCAN_CACHE: dict[tuple, DerivativeScan] = {}


def derivative_sup_scan(F: SymbolExpr, E: SubsetE, window: Box, **kw) -> DerivativeScan:
    # nodes are interned and never freed, so the root id is a stable key
    key = (id(F.root), F.n, tuple(E), window.bounds, tuple(sorted(kw.items())))
    hit = _SCAN_CACHE.get(key)
    if hit is None:
        hit = _SCAN_CACHE[key] = _derivative_sup_scan(F, E, window, **kw)
    return hit


def _derivative_sup_scan(F: SymbolExpr, E: SubsetE, window: Box, **kw) -> DerivativeScan:
    n = F.n
    if window.n != n:
        raise ValueError("window dimension differs from symbol dimension")
    pairs = enumerate_I2(E, n)
    exprs = [diff_symbol(F, p.alpha, p.beta) for p in pairs]
    active = set()
    for j in E:
        active |= {2 * (j - 1), 2 * (j - 1) + 1}
    sups, arg, npts = scan_expressions(exprs, window, active_axes=active, **kw)
    return DerivativeScan(pairs, sups, arg, window, npts)


def check_hypothesis_H(F: SymbolExpr, spec: HSpec, window: Box, scan: DerivativeScan | None = None, **kw) -> HCheck:
    """Every scanned |d_x^a d_xi^b F| <= M prod rho^a delta^b (1 + 1e-9) over I_2({1..n})."""
    if spec.n != F.n:
        raise ValueError("spec dimension differs from symbol dimension")
    if scan is None:
        scan = derivative_sup_scan(F, SubsetE(tuple(range(1, F.n + 1))), window, **kw)
    worst, worst_pair = 0.0, None
    for pair, s in zip(scan.pairs, scan.sups):
        b = spec.budget(pair)
        r = s / b if b > 0 else (math.inf if s > 0 else 0.0)
        if r > worst or worst_pair is None:
            worst, worst_pair = r, pair
    return HCheck(worst <= 1 + H_TOLERANCE, worst_pair, worst, scan)


def fit_hypothesis_H(F: SymbolExpr, window: Box, h: float = 1.0, scan: DerivativeScan | None = None, margin: float = 1e-6, **kw) -> HSpec:
    """Smallest-product (H) constants consistent with the scanned sups.

    M is the scanned sup of |F|; log rho_j, log delta_j minimize
    sum_j log(rho_j delta_j) subject to every scanned constraint (a linear
    program in log space). Variables that no constraint touches are set to 0.
    """
    n = F.n
    if scan is None:
        scan = derivative_sup_scan(F, SubsetE(tuple(range(1, n + 1))), window, **kw)
    M = scan.sup_of(MultiIndexPair((0,) * n, (0,) * n))
    if M == 0:
        return HSpec(0.0, (0.0,) * n, (0.0,) * n, h)
    rows, rhs = [], []
    used = np.zeros(2 * n, dtype=bool)
    for pair, s in zip(scan.pairs, scan.sups):
        if pair.order == 0 or s <= 0:
            continue
        coef = np.array(list(pair.alpha) + list(pair.beta), dtype=float)
        used |= coef > 0
        rows.append(-coef)
        rhs.append(-math.log(s / M))
    if not rows:
        return HSpec(M, (0.0,) * n, (0.0,) * n, h)
    res = optimize.linprog(
        c=np.where(used, 1.0, 0.0),
        A_ub=np.array(rows),
        b_ub=np.array(rhs),
        bounds=[(-60.0, 60.0) if u else (0.0, 0.0) for u in used],
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"(H) fit failed: {res.message}")
    vals = np.where(used, np.exp(res.x) * (1 + margin), 0.0)
    return HSpec(M, tuple(vals[:n]), tuple(vals[n:]), h)


# ---------------------------------------------------------------------------
# The bound and the two lemmas
# ---------------------------------------------------------------------------


def bound_product(spec: HSpec, constant: float | None = None) -> float:
    """M prod_j (1 + c h rho_j delta_j) without the applicability check."""
    c = THEOREM_CONSTANT if constant is None else constant
    return float(spec.M * np.prod(1 + c * spec.products()))


def theoretical_bound(spec: HSpec) -> float:
    if not spec.applicable():
        worst = int(np.argmax(spec.products()))
        raise PreconditionError(
            f"h*rho_j*delta_j must be <= 1 for every j; j={worst + 1} has {spec.products()[worst]:.6g}"
        )
    return bound_product(spec)


def lemma21_rhs(F: SymbolExpr, E: SubsetE, window: Box, scan: DerivativeScan | None = None, **kw) -> float:
    """(9 pi/2)^|E| sum over I_2(E) of scanned sup |d^a d^b F|."""
    if len(E) == 0:
        raise ValueError("E must be nonempty")
    if scan is None:
        scan = derivative_sup_scan(F, E, window, **kw)
    return LEMMA21_BASE ** len(E) * scan.total()


def lemma21_rhs_from_sups(sups: Sequence[float], size_E: int) -> float:
    return LEMMA21_BASE**size_E * float(np.sum(sups))


def lemma22_rhs(spec: HSpec, E: SubsetE) -> float:
    """M 18^|E| prod_{j in E} rho_j^2 (normalized setting rho_j = delta_j <= 1)."""
    E.check(spec.n)
    for j in E:
        r, d = spec.rho[j - 1], spec.delta[j - 1]
        if not math.isclose(r, d, rel_tol=1e-12) or r > 1:
            raise PreconditionError(f"need rho_j = delta_j <= 1 on E; j={j} has rho={r}, delta={d}")
    return spec.M * LEMMA22_BASE ** len(E) * float(np.prod([spec.rho[j - 1] ** 2 for j in E]))


def sampled_I2_sum(G: SampledSymbol, E: SubsetE) -> float:
    """sum over I_2(E) of max |d^a d^b G| on the grid, derivatives spectral."""
    n = G.grid.n
    return float(sum(spectral_derivative(G, p.alpha, p.beta).sup() for p in enumerate_I2(E, n)))


# ---------------------------------------------------------------------------
# Schur-test constants and the K weight
# ---------------------------------------------------------------------------

_A_COEFF = (lambda z: 3 - 4 * z * z, lambda z: 4 * z, lambda z: -1.0 + 0 * z)


def schur_constants() -> tuple[float, float, float]:
    """C_k = pi^-1/2 int |a_k(z)| e^{-z^2} dz, a_0 = 3 - 4z^2, a_1 = 4z, a_2 = -1."""
    r = math.sqrt(3) / 2
    pieces = [(-np.inf, -r), (-r, 0.0), (0.0, r), (r, np.inf)]
    out = []
    for a in _A_COEFF:
        total = 0.0
        for lo, hi in pieces:
            val, _ = integrate.quad(lambda z: abs(a(z)) * math.exp(-z * z), lo, hi, epsabs=1e-13, epsrel=1e-13, limit=200)
            total += val
        out.append(total / math.sqrt(math.pi))
    return tuple(out)


def k_weight(X: PhasePoint) -> float:
    return float(np.prod((1 + X.x**2) * (1 + X.xi**2)))


def k_weight_inverse_l1(n_prime: int) -> float:
    if n_prime < 1:
        raise ValueError("n' must be >= 1")
    return math.pi ** (2 * n_prime)


def k_weight_inverse_l1_quadrature(n_prime: int, nodes: int = 40) -> float:
    """Tensor Gauss-Legendre over R^{2n'} after x = t / (1 - t^2)."""
    t, w = roots_legendre(nodes)
    x = t / (1 - t**2)
    jac = (1 + t**2) / (1 - t**2) ** 2
    if n_prime == 1:
        X1, X2 = np.meshgrid(x, x, indexing="ij")
        W = np.outer(w * jac, w * jac)
        return float(np.sum(W / ((1 + X1**2) * (1 + X2**2))))
    dims = 2 * n_prime
    grids = np.meshgrid(*([x] * dims), indexing="ij", sparse=True)
    weights = np.meshgrid(*([w * jac] * dims), indexing="ij", sparse=True)
    val = 1.0
    for g, wt in zip(grids, weights):
        val = val * wt / (1 + g**2)
    return float(np.sum(val))


# ---------------------------------------------------------------------------
# Smoothing operators A_j, B_j, C_j, D_j on sampled symbols
# ---------------------------------------------------------------------------

GH_NODES = 20
GL_NODES = 8


def _bc_multiplier(which: str):
    u, W = roots_hermite(GH_NODES)
    th, wt = roots_legendre(GL_NODES)
    th, wt = 0.5 * (th + 1), 0.5 * wt

    def mult(w):
        wx, wxi = w
        acc = np.zeros(np.broadcast_shapes(wx.shape, wxi.shape), dtype=complex)
        for q in range(GL_NODES):
            ex = np.exp(1j * th[q] * wx[..., None] * u)
            exi = np.exp(1j * th[q] * wxi[..., None] * u)
            if which == "B":
                fx = ex @ (W * u)
                fxi = exi @ W
            else:
                fx = ex @ W
                fxi = exi @ (W * u)
            acc += wt[q] * fx * fxi
        return -acc / math.pi

    return mult


def _d_multiplier(w):
    s = w[0] ** 2 + w[1] ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(s > 0, np.expm1(-s / 4) / np.where(s > 0, s, 1.0), -0.25)
    return out


def smoothing_op_apply(kind: str, j: int, phi: SampledSymbol) -> SampledSymbol:
    """A_j = I - e^{Delta_j/4}; B_j, C_j the Gaussian-weighted integrals; D_j with A_j = D_j Delta_j.

    Shifted arguments phi(x + theta u e_j, xi + theta v e_j) are exact
    translations of the periodic trigonometric interpolant, so B_j and C_j
    reduce to Fourier multipliers assembled by the Gauss-Hermite x
    Gauss-Legendre quadrature.
    """
    n = phi.grid.n
    if not 1 <= j <= n:
        raise ValueError(f"j must be in 1..{n}")
    axes = [2 * (j - 1), 2 * (j - 1) + 1]
    if kind == "A":
        return phi - heat_smooth(phi, SubsetE((j,)), 0.25)
    if kind in ("B", "C"):
        return _fourier_multiply(phi, axes, _bc_multiplier(kind))
    if kind == "D":
        return _fourier_multiply(phi, axes, _d_multiplier)
    raise ValueError(f"unknown operator {kind!r}")


class MarginError(ValueError):
    pass


def spectral_tail(phi: SampledSymbol) -> float:
    """Fraction of spectral magnitude in the top quarter of frequencies (any axis)."""
    spec = np.abs(np.fft.fftn(phi.values))
    total = spec.sum() or 1.0
    mask = np.zeros(spec.shape, dtype=bool)
    for a, ax in enumerate(phi.grid.axes):
        f = np.abs(np.fft.fftfreq(ax.count))
        shape = [1] * spec.ndim
        shape[a] = ax.count
        mask |= (f > 0.375).reshape(shape)
    return float(spec[mask].sum() / total)


@dataclass
class SmoothingRow:
    name: str
    sup_phi: float
    sup_A: float
    sup_B: float
    sup_C: float
    split_defect: float
    d_relation_defect: float
    d_ratio: float

    def passed(self, slack: float = 1e-6, split_tol: float = 1e-5) -> bool:
        s = self.sup_phi
        return (
            self.sup_A <= A_NORM * s + slack
            and self.sup_B <= BC_NORM * s + slack
            and self.sup_C <= BC_NORM * s + slack
            and self.d_ratio <= D_NORM + slack
            and self.split_defect <= split_tol
            and self.d_relation_defect <= split_tol
        )


@dataclass
class SmoothingReport:
    rows: list[SmoothingRow]

    @property
    def passed(self) -> bool:
        return all(r.passed() for r in self.rows)


def smoothing_norm_certify(corpus, grid: PhaseGrid | None = None, j: int = 1, tail_tol: float = 1e-10) -> SmoothingReport:
    """Certify the C_b bounds of A_j, B_j, C_j, D_j and both splittings of A_j.

    ``corpus`` holds SymbolExprs (sampled on ``grid``; derivatives exact) or
    SampledSymbols (derivatives spectral), optionally as ``(name, item)`` pairs.
    """
    rows = []
    for k, item in enumerate(corpus):
        name, item = item if isinstance(item, tuple) else (f"phi{k}", item)
        if isinstance(item, SymbolExpr):
            if grid is None:
                raise ValueError("a phase grid is required for symbolic corpus members")
            n = item.n
            a = [0] * n
            ex = list(a)
            ex[j - 1] = 1
            phi = sample_symbol(item, grid)
            dx = sample_symbol(diff_symbol(item, ex, a), grid)
            dxi = sample_symbol(diff_symbol(item, a, ex), grid)
            two = list(a)
            two[j - 1] = 2
            lap = sample_symbol(diff_symbol(item, two, a) + diff_symbol(item, a, two), grid)
        else:
            phi = item
            n = phi.grid.n
            a = [0] * n
            ex = list(a)
            ex[j - 1] = 1
            two = list(a)
            two[j - 1] = 2
            dx = spectral_derivative(phi, ex, a)
            dxi = spectral_derivative(phi, a, ex)
            lap = spectral_derivative(phi, two, a) + spectral_derivative(phi, a, two)
        if spectral_tail(phi) > tail_tol:
            raise MarginError(f"corpus member {name} is not resolved/periodic on the grid (spectral tail {spectral_tail(phi):.2e})")
        A = smoothing_op_apply("A", j, phi)
        split = smoothing_op_apply("B", j, dx) + smoothing_op_apply("C", j, dxi)
        D_lap = smoothing_op_apply("D", j, lap)
        lap_sup = lap.sup()
        rows.append(
            SmoothingRow(
                name=name,
                sup_phi=phi.sup(),
                sup_A=A.sup(),
                sup_B=smoothing_op_apply("B", j, phi).sup(),
                sup_C=smoothing_op_apply("C", j, phi).sup(),
                split_defect=float(np.max(np.abs(A.values - split.values))),
                d_relation_defect=float(np.max(np.abs(A.values - D_lap.values))),
                d_ratio=D_lap.sup() / lap_sup if lap_sup > 0 else 0.0,
            )
        )
    return SmoothingReport(rows)


# ---------------------------------------------------------------------------
# Rescaling to h = 1, rho = delta
# ---------------------------------------------------------------------------


def rescale_symbol(F: SymbolExpr, spec: HSpec) -> tuple[SymbolExpr, HSpec, np.ndarray]:
    """F~(x, xi) = F(sqrt(h) lam x, sqrt(h) xi / lam), lam_j = sqrt(delta_j / rho_j).

    Returns (F~, spec with h = 1 and rho = delta = eps, lam). Coordinates with
    rho_j = 0 or delta_j = 0 keep lam_j = 1.
    """
    if spec.n != F.n:
        raise ValueError("dimension mismatch")
    rho, delta = np.asarray(spec.rho), np.asarray(spec.delta)
    lam = np.ones(F.n)
    pos = (rho > 0) & (delta > 0)
    lam[pos] = np.sqrt(delta[pos] / rho[pos])
    sh = math.sqrt(spec.h)
    mapping = {}
    for j in range(1, F.n + 1):
        mapping[("x", j)] = dsl.mul(dsl.const(sh * lam[j - 1]), dsl.var("x", j))
        mapping[("p", j)] = dsl.mul(dsl.const(sh / lam[j - 1]), dsl.var("p", j))
    eps = np.sqrt(spec.products())
    return SymbolExpr(dsl.substitute(F.root, mapping), F.n), HSpec(spec.M, tuple(eps), tuple(eps), 1.0), lam


# ---------------------------------------------------------------------------
# One-variable estimates: M(f) and the exponential conjugation inequality
# ---------------------------------------------------------------------------


def _one_var(f: SymbolExpr) -> SymbolExpr:
    if f.n != 1:
        raise ValueError("expected a one-variable symbol in x1")
    return f


def _scan_1d(exprs, window: tuple[float, float], points: int = 4001) -> np.ndarray:
    box = Box(((window[0], window[1]), (0.0, 0.0)))
    sups, _, _ = scan_expressions(exprs, box, active_axes={0}, budget=points, sobol_points=0)
    return sups


def m_of_f(f: SymbolExpr, window: tuple[float, float] = (-8.0, 8.0)) -> float:
    """max_{1<=nu<=4} (sup |f^(nu)|)^(1/nu) over the scanned window."""
    f = _one_var(f)
    derivs = [diff_symbol(f, [nu], [0]) for nu in range(1, 5)]
    sups = _scan_1d(derivs, window)
    return float(max(s ** (1.0 / nu) for nu, s in enumerate(sups, start=1)))


def conjugation_polynomials(f: SymbolExpr, nu_max: int = 4) -> list[SymbolExpr]:
    """P_nu = (d + f')^nu 1, i.e. e^{-f} d^nu e^{f}."""
    f = _one_var(f)
    fp = dsl.derivative(f.root, ("x", 1))
    out = []
    P = dsl.ONE
    for _ in range(nu_max):
        P = dsl.add(dsl.derivative(P, ("x", 1)), dsl.mul(fp, P))
        out.append(SymbolExpr(P, 1))
    return out


@dataclass
class ConjugationReport:
    M: float
    sups: list[float]
    bounds: list[float]

    @property
    def ratios(self) -> list[float]:
        return [s / b if b > 0 else (math.inf if s > 0 else 0.0) for s, b in zip(self.sups, self.bounds)]

    @property
    def passed(self) -> bool:
        return all(r <= 1 + 1e-9 for r in self.ratios)


def exp_conjugation_certify(f: SymbolExpr, window: tuple[float, float] = (-6.0, 6.0), nu_max: int = 4) -> ConjugationReport:
    """|e^{-f} d^nu e^f| <= (2 M(f))^nu on a scan lattice, nu = 1..nu_max."""
    M = m_of_f(f, window)
    polys = conjugation_polynomials(f, nu_max)
    box = Box(((window[0], window[1]), (0.0, 0.0)))
    sups, _, _ = scan_expressions(polys, box, active_axes={0}, budget=4001, sobol_points=0)
    return ConjugationReport(M, [float(s) for s in sups], [(2 * M) ** nu for nu in range(1, nu_max + 1)])


def constants_table() -> dict[str, float]:
    C0, C1, C2 = schur_constants()
    return {
        "C_0": C0,
        "C_1": C1,
        "C_2": C2,
        "81*pi": THEOREM_CONSTANT,
        "9*pi/2": LEMMA21_BASE,
        "18": LEMMA22_BASE,
    }
