import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erf

from normlab import bounds
from normlab.bounds import (
    Box,
    HSpec,
    PreconditionError,
    check_hypothesis_H,
    derivative_sup_scan,
    enumerate_I2,
    exp_conjugation_certify,
    fit_hypothesis_H,
    k_weight,
    k_weight_inverse_l1,
    k_weight_inverse_l1_quadrature,
    lemma21_rhs,
    lemma21_rhs_from_sups,
    lemma22_rhs,
    m_of_f,
    conjugation_polynomials,
    rescale_symbol,
    schur_constants,
    smoothing_norm_certify,
    smoothing_op_apply,
    theoretical_bound,
)
from normlab.corpus import lemma41_corpus, lemma41_grid
from normlab.dsl import SymbolContext, eval_symbol, parse_symbol, sample_symbol
from normlab.phase import MultiIndexPair, PhaseGrid, PhasePoint, SubsetE
from normlab.quantize import t_operator
from normlab import verify


def S(text, n=1):
    return parse_symbol(text, SymbolContext(n))


# -- multi-indices and scans ---------------------------------------------------


@pytest.mark.parametrize("n,E", [(1, ()), (2, (1,)), (3, (1, 3)), (3, (1, 2, 3))])
def test_I2_cardinality(n, E):
    pairs = enumerate_I2(SubsetE(E), n)
    assert len(pairs) == 9 ** len(E)
    assert len(set(pairs)) == len(pairs)
    if not E:
        assert pairs == [MultiIndexPair((0,) * n, (0,) * n)]


def test_scan_constant_symbol():
    scan = derivative_sup_scan(S("-2.5"), SubsetE((1,)), Box.cube(1))
    assert scan.sup_of(MultiIndexPair((0,), (0,))) == 2.5
    others = [s for p, s in zip(scan.pairs, scan.sups) if p.order > 0]
    assert max(others) == 0.0


def test_scan_product_of_sines_attains_rho_delta():
    rho, delta = 1.5, 0.75
    F = S(f"sin({rho}*x1)*sin({delta}*p1)")
    scan = derivative_sup_scan(F, SubsetE((1,)), Box.cube(1))
    for p, s in zip(scan.pairs, scan.sups):
        assert s == pytest.approx(rho ** p.alpha[0] * delta ** p.beta[0], rel=1e-9)


def test_scan_gaussian_second_derivative():
    # (4t^2 - 2) e^{-t^2} peaks in modulus at t = 0 with value 2
    scan = derivative_sup_scan(S("exp(-x1^2)"), SubsetE((1,)), Box.cube(1))
    assert scan.sup_of(MultiIndexPair((2,), (0,))) == pytest.approx(2.0, rel=1e-12)


# -- hypothesis (H) -------------------------------------------------------------


def test_H_constant_convention():
    assert check_hypothesis_H(S("3"), HSpec(3.0, (0.0,), (0.0,)), Box.cube(1)).passed


def test_H_sine_pass_and_fail():
    F = S("sin(2*x1)")
    assert check_hypothesis_H(F, HSpec(1.0, (2.0,), (1.0,)), Box.cube(1)).passed
    bad = check_hypothesis_H(F, HSpec(1.0, (1.0,), (1.0,)), Box.cube(1))
    assert not bad.passed
    assert bad.worst_pair.alpha[0] >= 1 and bad.worst_ratio == pytest.approx(4.0, rel=1e-9)


def test_fit_H_recovers_sine_constants():
    spec = fit_hypothesis_H(S("sin(2*x1)*cos(p1/2)"), Box.cube(1))
    assert spec.M == pytest.approx(1.0, rel=1e-9)
    assert spec.rho[0] * spec.delta[0] == pytest.approx(1.0, rel=1e-5)
    assert check_hypothesis_H(S("sin(2*x1)*cos(p1/2)"), spec, Box.cube(1)).passed


# -- the bound ----------------------------------------------------------------


def test_bound_examples():
    assert theoretical_bound(HSpec(1.7, (0.0, 0.0), (5.0, 5.0))) == 1.7
    spec = HSpec(2.0, (1.0, 0.5), (1.0, 1.0), h=1.0)
    c = 81 * math.pi
    assert theoretical_bound(spec) == pytest.approx(2 * (1 + c) * (1 + c / 2), rel=1e-14)
    assert 1 + c == pytest.approx(255.4690, abs=1e-4)


def test_bound_precondition():
    with pytest.raises(PreconditionError):
        theoretical_bound(HSpec(1.0, (2.0,), (1.0,), h=1.0))


positive = st.floats(0.0, 1.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 10), positive, positive, positive, st.floats(0.0, 0.5))
def test_bound_monotone(M, r, d, h, bump):
    base = HSpec(M, (r,), (d,), h=max(h, 1e-3))
    b0 = theoretical_bound(base)
    for spec in (
        HSpec(M + bump, (r,), (d,), base.h),
        HSpec(M, (min(r + bump, 1.0),), (d,), base.h),
        HSpec(M, (r,), (min(d + bump, 1.0),), base.h),
        HSpec(M, (r,), (d,), min(base.h + bump, 1.0)),
    ):
        # bumped specs may leave h rho delta <= 1, so compare the raw product
        assert bounds.bound_product(spec) >= b0 * (1 - 1e-15)


def test_lemma21_arithmetic():
    assert lemma21_rhs_from_sups([1.0] * 9, 1) == pytest.approx(9 * math.pi / 2 * 9, rel=1e-15)
    assert lemma21_rhs_from_sups([1.0] * 9, 1) == pytest.approx(127.2345, abs=1e-4)
    assert lemma21_rhs(S("-0.4"), SubsetE((1,)), Box.cube(1)) == pytest.approx(9 * math.pi / 2 * 0.4, rel=1e-14)


def test_lemma22_zero_rho():
    spec = HSpec(1.0, (0.0, 0.5), (0.0, 0.5))
    assert lemma22_rhs(spec, SubsetE((1,))) == 0.0
    assert lemma22_rhs(spec, SubsetE((2,))) == pytest.approx(18 * 0.25)


def test_lemma22_against_smoothed_scan():
    # sum over I_2(E) of sampled sups of T(E)F stays under M 18 eps^2 for normalized Gaussians
    grid = PhaseGrid.uniform(1, 12.0, 256)
    E = SubsetE((1,))
    for text in ("exp(-(x1^2 + p1^2)/4)", "exp(-(x1^2/4 + p1^2/9))"):
        F0 = S(text)
        F, spec, _ = rescale_symbol(F0, fit_hypothesis_H(F0, Box.cube(1)))
        lhs = bounds.sampled_I2_sum(t_operator(sample_symbol(F, grid), E), E)
        assert lhs <= lemma22_rhs(spec, E) * (1 + 1e-3)


# -- Schur constants and K weight ---------------------------------------------


def test_schur_constants_closed_forms():
    C0, C1, C2 = schur_constants()
    r = math.sqrt(3) / 2
    # (3 - 4z^2) e^{-z^2} = e^{-z^2} + d/dz (2 z e^{-z^2}); sign change at |z| = r
    assert C0 == pytest.approx(2 * erf(r) + 8 * r * math.exp(-r * r) / math.sqrt(math.pi) - 1, abs=1e-12)
    assert C1 == pytest.approx(4 / math.sqrt(math.pi), abs=1e-12)
    assert C2 == pytest.approx(1.0, abs=1e-12)
    assert max(C0, C1, C2) <= 3
    assert bounds.SCHUR_FACTOR >= max(C0, C1, C2) ** 2


def test_k_weight():
    assert k_weight(PhasePoint([0.0], [0.0])) == 1.0
    assert k_weight(PhasePoint([1.0, 2.0], [0.0, 1.0])) == 2 * 1 * 5 * 2
    for n in (1, 2):
        q = k_weight_inverse_l1_quadrature(n)
        assert q == pytest.approx(k_weight_inverse_l1(n), rel=1e-3)
    assert k_weight_inverse_l1(2) == pytest.approx(math.pi**4)


# -- smoothing operators ------------------------------------------------------


def test_smoothing_operators_on_constants_and_cosine():
    grid = lemma41_grid(64)
    one = sample_symbol(S("1"), grid)
    assert smoothing_op_apply("A", 1, one).sup() <= 1e-12
    assert smoothing_op_apply("B", 1, one).sup() <= 1e-12
    assert smoothing_op_apply("C", 1, one).sup() <= 1e-12
    c = sample_symbol(S("cos(x1)"), grid)
    A = smoothing_op_apply("A", 1, c)
    assert np.max(np.abs(A.values - (1 - math.exp(-0.25)) * c.values)) <= 1e-6
    assert A.sup() == pytest.approx(1 - math.exp(-0.25), abs=1e-9)


def test_smoothing_splitting_on_gaussian():
    grid = PhaseGrid.uniform(1, 8.0, 128)
    rep = smoothing_norm_certify([("gauss", S("exp(-(x1^2 + p1^2))"))], grid)
    row = rep.rows[0]
    assert row.split_defect <= 1e-5
    assert rep.passed


def test_smoothing_corpus_certificate():
    corpus = lemma41_corpus()
    assert len(corpus) == 12
    rep = smoothing_norm_certify(corpus, lemma41_grid())
    assert rep.passed, [r for r in rep.rows if not r.passed()]


def test_smoothing_rejects_unresolved_input():
    grid = lemma41_grid(16)
    with pytest.raises(bounds.MarginError):
        smoothing_norm_certify([S("exp(3*cos(x1))")], grid)


# -- rescaling ------------------------------------------------------------------


def test_rescale_identity_case():
    F = S("exp(-(x1^2 + p1^2))*cos(x1)")
    Ft, spec, lam = rescale_symbol(F, HSpec(1.0, (0.7,), (0.7,), h=1.0))
    assert lam[0] == 1.0 and spec.rho == (0.7,) and spec.h == 1.0
    z = PhasePoint([0.3], [-1.1])
    assert eval_symbol(Ft, z) == pytest.approx(eval_symbol(F, z), abs=1e-15)


def test_rescale_arithmetic_and_idempotence():
    F = S("exp(-(x1^2 + p1^2))")
    Ft, spec, lam = rescale_symbol(F, HSpec(1.0, (4.0,), (1.0,), h=0.25))
    assert spec.rho[0] == pytest.approx(1.0) and spec.delta[0] == pytest.approx(1.0)
    assert lam[0] == pytest.approx(0.5)
    _, again, lam2 = rescale_symbol(Ft, spec)
    assert again.rho == spec.rho and lam2[0] == 1.0


# -- M(f) and exponential conjugation --------------------------------------------


def test_m_of_f_examples():
    assert m_of_f(S("3*x1")) == pytest.approx(3.0, rel=1e-12)
    assert m_of_f(S("16*sin(x1)")) == pytest.approx(16.0, rel=1e-9)


def test_m_of_f_gaussian_against_finite_differences():
    x = np.linspace(-8, 8, 8001)  # dx = 2e-3: roundoff ~ eps / dx^4 stays below 1e-5
    f = np.exp(-(x**2))
    dx = x[1] - x[0]
    best = 0.0
    d = f
    for nu in range(1, 5):
        d = np.gradient(d, dx)
        best = max(best, np.max(np.abs(d[10:-10])) ** (1 / nu))
    assert m_of_f(S("exp(-x1^2)")) == pytest.approx(best, rel=1e-4)


def test_conjugation_polynomials_linear_and_zero():
    for nu, P in enumerate(conjugation_polynomials(S("2.5*x1")), start=1):
        assert eval_symbol(P, PhasePoint([0.7], [0.0])).real == pytest.approx(2.5**nu)
    rep = exp_conjugation_certify(S("0*x1"))
    assert rep.sups == [0.0] * 4 and rep.passed


def test_conjugation_certificates():
    for text in ("3*x1", "16*sin(x1)", "lorentz(x1)"):
        assert exp_conjugation_certify(S(text), (-6.0, 6.0)).passed


# -- cross-module invariants --------------------------------------------------


@pytest.mark.parametrize("check", [verify.schur_pointwise, verify.proof_chain, verify.lemma21_sanity])
def test_proof_invariants(check):
    result = check()
    assert result.passed, result.detail
