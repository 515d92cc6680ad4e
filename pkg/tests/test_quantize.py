import math

import numpy as np
import pytest

from normlab import dsl
from normlab.dsl import SymbolContext, parse_symbol, sample_symbol
from normlab.phase import (
    AxisGrid,
    PhaseGrid,
    PhasePoint,
    SpatialGrid,
    SubsetE,
    WaveFunction,
    coherent_state,
    hermite_function,
    l2_inner,
)
from normlab.quantize import (
    OperatorMatrix,
    anti_wick_quantize,
    coherent_matrix_element,
    decompose_weyl,
    heat_smooth,
    hybrid_quantize,
    matrix_norm,
    multiplier_telescoping_defect,
    operator_norm,
    phi_kernel,
    symbol_decomposition_defect,
    t_operator,
    weyl_plane_wave,
    weyl_quantize,
    wigner,
)


def S(text, n=1):
    return parse_symbol(text, SymbolContext(n))


def hermite_corpus(grid):
    return [hermite_function(k, grid) for k in range(5)]


# -- Weyl ---------------------------------------------------------------------


def test_weyl_of_one_is_identity(small_grid):
    A = weyl_quantize(S("1"), 1.0, small_grid)
    for f in hermite_corpus(small_grid):
        assert (A.apply(f) - f).norm() <= 1e-6 * f.norm()


def test_weyl_of_x_is_multiplication(small_grid):
    A = weyl_quantize(S("x1"), 1.0, small_grid)
    u = small_grid.axes[0].nodes
    for f in hermite_corpus(small_grid):
        assert np.max(np.abs(A.apply(f).values - u * f.values)) <= 1e-6


@pytest.mark.parametrize("h", [0.25, 0.5, 1.0])
def test_weyl_gaussian_norm_closed_form(small_grid, h):
    # Op_h(exp(-(x^2 + xi^2))) is a function of the harmonic oscillator; its top eigenvalue is 1/(1+h)
    A = weyl_quantize(S("exp(-(x1^2 + p1^2))"), h, small_grid)
    assert operator_norm(A) == pytest.approx(1 / (1 + h), abs=1e-8)


def test_weyl_self_adjoint_for_real_symbols(small_grid):
    for text in ("exp(-(x1^2 + p1^2))*cos(x1*p1)", "x1*p1*exp(-(x1^2 + p1^2)/2)", "lorentz(x1)*exp(-p1^2)"):
        assert weyl_quantize(S(text), 0.7, small_grid).hermitian_defect() <= 1e-8


def test_weyl_sampled_on_dual_grid_matches_expression(small_grid):
    F = S("exp(-((x1 - 0.5)^2 + (p1 + 0.3)^2))")
    dual = PhaseGrid.weyl_dual(small_grid, 1.0)
    a = weyl_quantize(F, 1.0, small_grid).weighted()
    b = weyl_quantize(sample_symbol(F, dual), 1.0, small_grid).weighted()
    assert np.max(np.abs(a - b)) < 1e-12


def test_plane_wave_identity_unitarity_and_composition():
    grid = SpatialGrid.uniform(1, 10.0, 128)
    f = coherent_state(PhasePoint([0.3], [0.2]), grid)
    same = weyl_plane_wave([0.0], [0.0], 1.0, f)
    assert np.array_equal(same.values, f.values)
    dx = grid.axes[0].spacing
    a, b = 0.7, 3 * dx
    assert weyl_plane_wave([a], [b], 1.0, f).norm() == pytest.approx(f.norm(), abs=1e-12)
    ab = weyl_plane_wave([a], [b], 1.0, f).values
    # u -> e^{iau} f(u + b): multiplying after the shift gives e^{-iab/2}, shifting after gives e^{+iab/2}
    mult_last = weyl_plane_wave([a], [0.0], 1.0, weyl_plane_wave([0.0], [b], 1.0, f)).values
    shift_last = weyl_plane_wave([0.0], [b], 1.0, weyl_plane_wave([a], [0.0], 1.0, f)).values
    assert np.max(np.abs(mult_last - np.exp(-1j * a * b / 2) * ab)) <= 1e-12
    assert np.max(np.abs(shift_last - np.exp(1j * a * b / 2) * ab)) <= 1e-12


def test_weyl_of_cosine_plane_wave():
    # Re E_{a,b,1} = cos(a x + b xi) quantizes to (W_{a,b} + W_{-a,-b}) / 2
    grid = SpatialGrid.uniform(1, 8.0, 128)
    A = weyl_quantize(S("cos(x1 + 0.5*p1)"), 1.0, grid)
    for f in hermite_corpus(grid):
        expected = 0.5 * (weyl_plane_wave([1.0], [0.5], 1.0, f).values + weyl_plane_wave([-1.0], [-0.5], 1.0, f).values)
        assert np.max(np.abs(A.apply(f).values - expected)) <= 1e-4


# -- anti-Wick --------------------------------------------------------------


def test_anti_wick_of_one_is_identity(ref1):
    A = anti_wick_quantize(sample_symbol(S("1"), ref1.phase), ref1.spatial)
    for f in hermite_corpus(ref1.spatial):
        assert (A.apply(f) - f).norm() <= 1e-6


def test_anti_wick_second_moment(ref1):
    A = anti_wick_quantize(sample_symbol(S("x1^2 + p1^2"), ref1.phase), ref1.spatial)
    psi0 = coherent_state(PhasePoint([0.0], [0.0]), ref1.spatial)
    assert A.matrix_element(psi0, psi0).real == pytest.approx(2.0, abs=1e-4)


def test_anti_wick_positive_and_contractive(ref1):
    F = sample_symbol(S("exp(-(x1^2 + p1^2)/3)*(2 + cos(x1))"), ref1.phase)
    A = anti_wick_quantize(F, ref1.spatial)
    ev = np.linalg.eigvalsh(A.weighted())
    assert ev[0] >= -1e-8
    assert operator_norm(A) <= F.sup() * (1 + 1e-6)


# -- heat smoothing, T(E), decomposition -------------------------------------


def test_heat_smooth_gaussian_closed_form():
    grid = PhaseGrid.uniform(1, 8.0, 128)
    out = heat_smooth(sample_symbol(S("exp(-(x1^2 + p1^2))"), grid), SubsetE((1,)), 0.25)
    # per axis e^{t d^2} e^{-z^2} = (1 + 4t)^{-1/2} e^{-z^2/(1+4t)}
    expected = sample_symbol(S("0.5*exp(-(x1^2 + p1^2)/2)"), grid)
    assert np.max(np.abs(out.values - expected.values)) <= 1e-6


def test_heat_smooth_constant_and_cosine():
    grid = PhaseGrid.uniform(1, 2 * math.pi, 64)
    one = sample_symbol(S("1"), grid)
    assert np.max(np.abs(heat_smooth(one, SubsetE((1,)), 0.25).values - 1)) < 1e-14
    c = sample_symbol(S("cos(x1)"), grid)
    out = heat_smooth(c, SubsetE((1,)), 0.25)
    assert np.max(np.abs(out.values - math.exp(-0.25) * c.values)) <= 1e-8


def test_t_operator_examples():
    grid = PhaseGrid.uniform(1, 2 * math.pi, 64)
    one = sample_symbol(S("1"), grid)
    assert np.max(np.abs(t_operator(one, SubsetE((1,))).values)) <= 1e-12
    assert t_operator(one, SubsetE(())) is one
    c = sample_symbol(S("cos(x1)"), grid)
    out = t_operator(c, SubsetE((1,)))
    assert np.max(np.abs(out.values - (1 - math.exp(-0.25)) * c.values)) <= 1e-8


def test_hybrid_full_E_is_weyl(small_grid):
    F = S("exp(-(x1^2 + p1^2))")
    a = hybrid_quantize(F, SubsetE((1,)), small_grid).weighted()
    b = weyl_quantize(F, 1.0, small_grid).weighted()
    assert np.max(np.abs(a - b)) < 1e-12


def test_hybrid_partial_gaussian_closed_form():
    grid = SpatialGrid.uniform(2, 6.0, 32)
    F = S("exp(-(x1^2 + p1^2 + x2^2 + p2^2))", 2)
    # smoothing the (x2, xi2) pair by e^{Delta/4} halves that factor and spreads it
    smoothed = S("0.5*exp(-(x1^2 + p1^2) - (x2^2 + p2^2)/2)", 2)
    a = hybrid_quantize(F, SubsetE((1,)), grid)
    b = weyl_quantize(smoothed, 1.0, grid)
    assert operator_norm(a - b) <= 1e-6


def test_decomposition_defects(small_grid):
    assert decompose_weyl(S("1"), small_grid) <= 1e-6
    assert decompose_weyl(S("exp(-(x1^2 + p1^2))"), small_grid) <= 1e-4


def test_multiplier_telescoping():
    rng = np.random.default_rng(0)
    for n in (1, 2, 3):
        assert multiplier_telescoping_defect(rng.uniform(0, 5, n)) <= 1e-10
    grid = PhaseGrid.uniform(2, 2 * math.pi, 8)
    F = sample_symbol(S("cos(x1)*sin(p2) + cos(2*x2)", 2), grid)
    assert symbol_decomposition_defect(F) <= 1e-10


# -- Wigner, Phi, coherent matrix elements -----------------------------------


def _wigner_grid(grid):
    return PhaseGrid.from_pairs([(grid.axes[0], AxisGrid(8.0, 64))])


def test_wigner_conjugate_symmetry_and_normalization(small_grid):
    f = coherent_state(PhasePoint([0.4], [-0.2]), small_grid)
    g = hermite_function(1, small_grid)
    wg = _wigner_grid(small_grid)
    Hfg = wigner(f, g, wg).values
    Hgf = wigner(g, f, wg).values
    assert np.max(np.abs(Hgf - np.conj(Hfg))) <= 1e-12
    Hff = wigner(f, f, wg).values
    assert (np.sum(Hff) * wg.cell / (2 * math.pi)).real == pytest.approx(f.norm() ** 2, abs=1e-6)


def test_phi_kernel_values():
    zero = PhasePoint([0.0], [0.0])
    assert phi_kernel(zero, zero, zero) == 1
    rng = np.random.default_rng(2)
    for _ in range(10):
        X, Y, Z = (PhasePoint(rng.normal(size=2), rng.normal(size=2)) for _ in range(3))
        mid = (X + Y).scaled(0.5)
        assert abs(phi_kernel(X, Y, Z)) == pytest.approx(math.exp(-(Z - mid).norm2()), rel=1e-12)


def test_coherent_matrix_element_examples(small_grid):
    pg = PhaseGrid.uniform(1, 10.0, 256)
    one = sample_symbol(S("1"), pg)
    zero = PhasePoint([0.0], [0.0])
    rng = np.random.default_rng(4)
    for _ in range(4):
        X = PhasePoint(rng.uniform(-1, 1, 1), rng.uniform(-1, 1, 1))
        Y = PhasePoint(rng.uniform(-1, 1, 1), rng.uniform(-1, 1, 1))
        ov = l2_inner(coherent_state(X, small_grid), coherent_state(Y, small_grid))
        assert coherent_matrix_element(one, X, Y) == pytest.approx(ov, abs=1e-6)
    G = S("exp(-(x1^2 + p1^2))")
    assert coherent_matrix_element(sample_symbol(G, pg), zero, zero).real == pytest.approx(0.5, abs=1e-6)
    # the quadrature route agrees with sandwiching the FFT-kernel operator
    A = weyl_quantize(G, 1.0, small_grid)
    for _ in range(4):
        X = PhasePoint(rng.uniform(-0.7, 0.7, 1), rng.uniform(-0.7, 0.7, 1))
        Y = PhasePoint(rng.uniform(-0.7, 0.7, 1), rng.uniform(-0.7, 0.7, 1))
        sandwich = A.matrix_element(coherent_state(Y, small_grid), coherent_state(X, small_grid))
        assert coherent_matrix_element(sample_symbol(G, pg), X, Y) == pytest.approx(sandwich, abs=1e-4)


# -- norms --------------------------------------------------------------------


def test_norm_identity_and_rank_one():
    grid = SpatialGrid.uniform(1, 4.0, 64)
    eye = OperatorMatrix(grid, np.eye(64) / grid.cell, grid.cell)
    assert operator_norm(eye) == pytest.approx(1.0, abs=1e-10)
    rng = np.random.default_rng(8)
    u = rng.normal(size=64) + 1j * rng.normal(size=64)
    assert matrix_norm(np.outer(u, u.conj())) == pytest.approx(np.vdot(u, u).real, rel=1e-8)


def test_power_iteration_matches_svd():
    rng = np.random.default_rng(9)
    B = rng.normal(size=(50, 50)) + 1j * rng.normal(size=(50, 50))
    assert matrix_norm(B, "power") == pytest.approx(matrix_norm(B, "svd"), rel=1e-8)
    Hm = B + B.conj().T
    assert matrix_norm(Hm, "eigh") == pytest.approx(matrix_norm(Hm, "svd"), rel=1e-12)


def test_norm_invariant_under_grid_shift(small_grid):
    A = weyl_quantize(S("exp(-((x1 - 1)^2 + p1^2))*(1 + x1*p1)"), 1.0, small_grid).weighted()
    U = np.roll(np.eye(A.shape[0]), 7, axis=0)
    assert matrix_norm(U @ A @ U.T) == pytest.approx(matrix_norm(A), rel=1e-8)
