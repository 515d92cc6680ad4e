"""Nearest-neighbour lattice and mean-field Gibbs symbols with their (H) constants."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import dsl
from .bounds import Box, HSpec, scan_expressions
from .dsl import SymbolContext, SymbolExpr

POTENTIAL_WINDOW = (-8.0, 8.0)
EXAMPLE_WINDOW_X = (-6.0, 6.0)
EXAMPLE_WINDOW_P = (-4.0, 4.0)


def admissible_C0(g: Sequence[float]) -> float:
    """Smallest C_0 with g_j g_{j+1} <= C_0 min(g_j^2, g_{j+1}^2)."""
    g = [float(v) for v in g]
    if not g or min(g) <= 0:
        raise ValueError("couplings must be positive")
    return max([1.0] + [max(a, b) / min(a, b) for a, b in zip(g, g[1:])])


@dataclass(frozen=True)
class LatticeSpec:
    n: int
    potential: str = "lorentz"
    g: tuple[float, ...] | None = None
    C0: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.potential not in dsl.BUILTIN_POTENTIALS:
            raise ValueError(f"unknown potential {self.potential!r}; builtin: {sorted(dsl.BUILTIN_POTENTIALS)}")
        g = (1.0,) * self.n if self.g is None else tuple(float(v) for v in self.g)
        if len(g) != self.n:
            raise ValueError("need one coupling per site")
        need = admissible_C0(g)
        C0 = need if self.C0 is None else float(self.C0)
        if C0 < need * (1 - 1e-12):
            raise ValueError(f"C_0={C0} too small for these couplings (need >= {need})")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "C0", C0)

    @classmethod
    def geometric(cls, n: int, ratio: float, potential: str = "lorentz") -> "LatticeSpec":
        """g_j = ratio^j."""
        return cls(n, potential, tuple(ratio**j for j in range(1, n + 1)))

    @property
    def C1(self) -> float:
        return max(8 * self.C0, 2.0)


def _kinetic(n: int) -> dsl.Node:
    out = dsl.ZERO
    for j in range(1, n + 1):
        out = dsl.add(out, dsl.ipow(dsl.var("p", j), 2))
    return out


_CTX = SymbolContext(1)


def _pot(name: str, j: int, k: int) -> dsl.Node:
    """V(x_j - x_k)."""
    return dsl.substitute(_CTX.potential(name), {("y", 0): dsl.sub(dsl.var("x", j), dsl.var("x", k))})


def interaction(spec: LatticeSpec) -> dsl.Node:
    """sum over ordered nearest-neighbour pairs of g_j g_k V(x_j - x_k)."""
    out = dsl.ZERO
    for j in range(1, spec.n + 1):
        for k in (j - 1, j + 1):
            if 1 <= k <= spec.n:
                c = spec.g[j - 1] * spec.g[k - 1]
                out = dsl.add(out, dsl.mul(dsl.const(c), _pot(spec.potential, j, k)))
    return out


def lattice_hamiltonian(spec: LatticeSpec) -> SymbolExpr:
    return SymbolExpr(dsl.add(_kinetic(spec.n), interaction(spec)), spec.n)


def mean_field_hamiltonian(n: int, potential: str = "lorentz") -> SymbolExpr:
    if n < 1:
        raise ValueError("n must be >= 1")
    if potential not in dsl.BUILTIN_POTENTIALS:
        raise ValueError(f"unknown potential {potential!r}")
    pot = dsl.ZERO
    for j in range(1, n + 1):
        for k in range(1, n + 1):
            pot = dsl.add(pot, _pot(potential, j, k))
    return SymbolExpr(dsl.add(_kinetic(n), dsl.mul(dsl.const(1.0 / n), pot)), n)


def gibbs_symbol(H: SymbolExpr) -> SymbolExpr:
    return SymbolExpr(dsl.func("exp", dsl.neg(H.root)), H.n)


@lru_cache(maxsize=None)
def potential_sups(name: str) -> tuple[float, ...]:
    """Scanned sup |V^(nu)| for nu = 1..4."""
    V = SymbolExpr(dsl.substitute(_CTX.potential(name), {("y", 0): dsl.var("x", 1)}), 1)
    derivs = [dsl.diff_symbol(V, [nu], [0]) for nu in range(1, 5)]
    box = Box((POTENTIAL_WINDOW, (0.0, 0.0)))
    sups, _, _ = scan_expressions(derivs, box, active_axes={0}, budget=16001, sobol_points=0)
    return tuple(float(s) for s in sups)


def lambdas(spec: LatticeSpec) -> np.ndarray:
    s = potential_sups(spec.potential)
    return np.array([max((gj**2 * s[nu - 1]) ** (1.0 / nu) for nu in range(1, 5)) for gj in spec.g])


def example_constants(spec: LatticeSpec, h: float = 1.0) -> HSpec:
    """M = 1, delta_j = C_1, rho_j = C_1 lambda_j with C_1 = max(8 C_0, 2)."""
    C1 = spec.C1
    lam = lambdas(spec)
    return HSpec(1.0, tuple(C1 * lam), (C1,) * spec.n, h)


def mean_field_C1(potential: str) -> float:
    """rho = delta = C_1 for the mean-field Gibbs symbol.

    Each x_j sees the interaction through d_j W = -(2/n) sum_k V'(x_j - x_k),
    so the one-site scale is max_nu (2 ||V^(nu)||)^(1/nu); the factor 8 and the
    floor 2 mirror the lattice choice.
    """
    s = potential_sups(potential)
    lam = max((2 * s[nu - 1]) ** (1.0 / nu) for nu in range(1, 5))
    return max(8 * lam, 2.0)


def mean_field_constants(n: int, potential: str = "lorentz", h: float = 1.0) -> HSpec:
    c = mean_field_C1(potential)
    return HSpec(1.0, (c,) * n, (c,) * n, h)


def example_window(n: int) -> Box:
    return Box.split(n, EXAMPLE_WINDOW_X, EXAMPLE_WINDOW_P)


@dataclass
class WDerivativeReport:
    alphas: list[tuple[int, ...]]
    ratios: np.ndarray  # scanned sup of |d^a e^W| / (e^W prod (8 C_0 lambda_j)^a_j)

    @property
    def worst(self) -> float:
        return float(np.max(self.ratios))

    @property
    def passed(self) -> bool:
        return self.worst <= 1 + 1e-9


def w_derivative_certify(spec: LatticeSpec, window: tuple[float, float] = EXAMPLE_WINDOW_X, max_order: int = 2) -> WDerivativeReport:
    """|d^a e^W| <= e^W prod_j (8 C_0 lambda_j)^a_j on a lattice over window^n."""
    n = spec.n
    if n > 3:
        raise ValueError("w_derivative_certify supports n <= 3")
    W = dsl.neg(interaction(spec))
    eW = SymbolExpr(dsl.func("exp", W), n)
    emW = dsl.func("exp", dsl.neg(W))
    scale = 8 * spec.C0 * lambdas(spec)
    alphas = list(itertools.product(range(max_order + 1), repeat=n))
    exprs = []
    for a in alphas:
        d = dsl.diff_symbol(eW, a, [0] * n)
        budget = float(np.prod([s**k for s, k in zip(scale, a)]))
        exprs.append(SymbolExpr(dsl.mul(dsl.const(1.0 / budget), dsl.mul(d.root, emW)), n))
    box = Box(tuple(ax for _ in range(n) for ax in (tuple(window), (0.0, 0.0))))
    sups, _, _ = scan_expressions(exprs, box, active_axes={2 * j for j in range(n)}, budget=60_000)
    return WDerivativeReport(alphas, sups)


def log_bound_curve(g_of_j, n_max: int, h: float, C0: float, C1: float | None = None, potential: str = "lorentz", constant: float | None = None) -> np.ndarray:
    """log of M prod_{j<=n} (1 + c h rho_j delta_j) for n = 1..n_max with the example constants.

    Computed without the applicability check; the bound-shape regimes are a
    statement about the product itself.
    """
    from .bounds import THEOREM_CONSTANT

    c = THEOREM_CONSTANT if constant is None else constant
    C1 = max(8 * C0, 2.0) if C1 is None else C1
    s = potential_sups(potential)
    terms = []
    for j in range(1, n_max + 1):
        gj = g_of_j(j)
        lam = max((gj**2 * s[nu - 1]) ** (1.0 / nu) for nu in range(1, 5))
        terms.append(math.log1p(c * h * (C1 * lam) * C1))
    return np.cumsum(terms)
