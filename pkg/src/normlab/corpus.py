"""Test-function corpora shared by the verification suite, tests and scripts."""

from __future__ import annotations

import math

from . import dsl
from .dsl import SymbolContext, SymbolExpr
from .phase import PhaseGrid, PhasePoint, SpatialGrid, WaveFunction, coherent_state, hermite_function


def _p(text: str, n: int = 1) -> SymbolExpr:
    return dsl.parse_symbol(text, SymbolContext(n))


def hermite_coherent(grid: SpatialGrid, count: int = 10, radius: float = 2.0, seed: int = 1998) -> list[tuple[str, WaveFunction]]:
    """Tensor Hermite functions of total degree <= 4 and `count` coherent states with |X| <= radius."""
    import itertools

    import numpy as np

    n = grid.n
    out = []
    for deg in itertools.product(range(5), repeat=n):
        if sum(deg) <= 4:
            out.append((f"h{deg if n > 1 else deg[0]}", hermite_function(deg, grid)))
    rng = np.random.default_rng(seed)
    for _ in range(count):
        v = rng.normal(size=2 * n)
        v *= radius * rng.uniform() ** (1 / (2 * n)) / np.linalg.norm(v)
        X = PhasePoint(v[0::2], v[1::2])
        out.append((f"psi{tuple(np.round(v, 3))}", coherent_state(X, grid)))
    return out


def gaussian_symbols(n: int = 1) -> list[tuple[str, SymbolExpr]]:
    if n == 1:
        texts = [
            "exp(-(x1^2 + p1^2))",
            "exp(-(2*x1^2 + p1^2/2))",
            "exp(-((x1 - 0.5)^2 + (p1 + 0.3)^2))",
            "x1*p1*exp(-(x1^2 + p1^2))",
            "(1 - x1^2)*exp(-(x1^2 + p1^2)/2)",
        ]
    elif n == 2:
        texts = [
            "exp(-(x1^2 + p1^2 + x2^2 + p2^2))",
            "exp(-(x1^2 + 2*p1^2 + x2^2/2 + p2^2))",
            "x1*p2*exp(-(x1^2 + p1^2 + x2^2 + p2^2))",
            "exp(-((x1 - x2)^2 + p1^2 + p2^2 + (x1 + x2)^2/4))",
        ]
    else:
        texts = ["exp(-(" + " + ".join(f"x{j}^2 + p{j}^2" for j in range(1, n + 1)) + "))"]
    return [(t, _p(t, n)) for t in texts]


def trig_symbols() -> list[tuple[str, SymbolExpr]]:
    """Oscillating symbols under a wide Gaussian window (n = 1)."""
    texts = [
        "cos(x1)*exp(-(x1^2 + p1^2)/4)",
        "sin(2*p1)*exp(-(x1^2 + p1^2)/4)",
        "cos(x1 + p1)*exp(-(x1^2 + p1^2)/4)",
        "sin(x1)*cos(p1)*exp(-(x1^2 + p1^2)/3)",
    ]
    return [(t, _p(t)) for t in texts]


# Twelve bounded functions, periodic on the box [-2 pi, 2 pi)^2 used for the
# smoothing-operator certificates.
LEMMA41_TEXTS = (
    "1",
    "cos(x1)",
    "sin(p1)",
    "cos(x1)*sin(2*p1)",
    "cos(x1/2 + p1)",
    "exp(cos(x1))",
    "exp(sin(p1) + cos(x1))",
    "1/(2 + cos(x1))",
    "1/(3 + sin(x1) + cos(p1))",
    "cos(3*x1)*cos(p1/2)",
    "sin(x1)^2*cos(p1)",
    "sin(x1)/(3 + cos(p1))",
)


def lemma41_corpus() -> list[tuple[str, SymbolExpr]]:
    return [(t, _p(t)) for t in LEMMA41_TEXTS]


def lemma41_grid(count: int = 128) -> PhaseGrid:
    return PhaseGrid.uniform(1, 2 * math.pi, count)


def conjugation_functions() -> list[tuple[str, SymbolExpr]]:
    return [("linear", _p("3*x1")), ("16 sin", _p("16*sin(x1)")), ("g^2 lorentz", _p("lorentz(x1)"))]
