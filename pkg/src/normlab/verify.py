"""Certificate suites bundled behind ``normlab verify``.

Every check returns a ``Check``; the suite passes iff all of them do. The
quick level stays at n = 1, the full level adds the n = 2, 3 runs.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bounds, corpus, dsl, lattice
from .bounds import Box
from .config import ExperimentConfig
from .phase import AxisGrid, PhaseGrid, PhasePoint, SubsetE, identity_defects, reference_grids
from .quantize import (
    anti_wick_quantize,
    coherent_matrix_element,
    decompose_weyl,
    heat_smooth,
    hybrid_quantize,
    multiplier_telescoping_defect,
    operator_norm,
    phi_kernel_grid,
    t_operator,
    weyl_quantize,
    wigner,
)
from .phase import coherent_state
from .sweep import render_report, run_sweep

VERIFY_SEED = 1998


@dataclass
class Check:
    criterion: str
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  [{self.criterion}] {self.name}: {self.detail}"


def _timed(fn: Callable[[], Check]) -> Check:
    t0 = time.perf_counter()
    try:
        c = fn()
    except Exception as err:  # a crashing check is a failing check
        c = Check(getattr(fn, "criterion", "?"), getattr(fn, "__name__", "check"), False, f"{type(err).__name__}: {err}")
    c.seconds = time.perf_counter() - t0
    return c


def _crit(tag: str):
    def deco(fn):
        fn.criterion = tag
        return fn

    return deco


# ---------------------------------------------------------------------------
# Individual checks
# ---------------------------------------------------------------------------


@_crit("1")
def resolution_of_identity() -> Check:
    t0 = time.perf_counter()
    ref = reference_grids(1)
    funcs = corpus.hermite_coherent(ref.spatial)
    worst = float(np.max(identity_defects([f for _, f in funcs], ref.phase)))
    dt = time.perf_counter() - t0
    return Check("1", "resolution of identity", worst <= 1e-6 and dt < 5, f"max defect {worst:.3e} over {len(funcs)} functions, {dt:.2f}s")


@_crit("2")
def weyl_anti_wick() -> Check:
    t0 = time.perf_counter()
    ref = reference_grids(1)
    dual = PhaseGrid.weyl_dual(ref.spatial, 1.0)
    worst, ok = 0.0, True
    for _, F in corpus.gaussian_symbols(1) + corpus.trig_symbols():
        aw = anti_wick_quantize(dsl.sample_symbol(F, ref.phase), ref.spatial)
        smooth = heat_smooth(dsl.sample_symbol(F, dual), SubsetE((1,)), 0.25)
        gap = operator_norm(aw - weyl_quantize(smooth, 1.0, ref.spatial))
        tol = 1e-4 * max(1.0, dsl.sample_symbol(F, ref.phase).sup())
        ok &= gap <= tol
        worst = max(worst, gap / tol)
    dt = time.perf_counter() - t0
    return Check("2", "Weyl vs anti-Wick", ok and dt < 30, f"worst gap/tolerance {worst:.3e}, {dt:.2f}s")


@_crit("3")
def wigner_coherent() -> Check:
    ref = reference_grids(1)
    g = ref.spatial
    wg = PhaseGrid.from_pairs([(g.axes[0], AxisGrid(8.0, 128))])
    rng = np.random.default_rng(VERIFY_SEED)

    def point():
        r, th = math.sqrt(rng.uniform()), rng.uniform(0, 2 * math.pi)
        return PhasePoint([r * math.cos(th)], [r * math.sin(th)])

    worst = 0.0
    for _ in range(10):
        X, Y = point(), point()
        H = wigner(coherent_state(X, g), coherent_state(Y, g), wg).values
        worst = max(worst, float(np.max(np.abs(H - 2 * phi_kernel_grid(X, Y, wg)))))
    return Check("3", "Wigner/coherent identity", worst <= 1e-6, f"max |H - 2 Phi| {worst:.3e} over 10 pairs")


def decomposition(full: bool) -> Check:
    rng = np.random.default_rng(VERIFY_SEED)
    tele = max(multiplier_telescoping_defect(rng.uniform(0, 6, size=n)) for n in (1, 2, 3) for _ in range(50))
    parts = [f"telescoping {tele:.1e}"]
    ok = tele <= 1e-10
    dims = (1, 2) if full else (1,)
    for n in dims:
        grid = reference_grids(n).spatial
        worst = max(decompose_weyl(F, grid) for _, F in corpus.gaussian_symbols(n))
        ok &= worst <= 1e-3
        parts.append(f"n={n} operator defect {worst:.1e}")
    return Check("4", "subset decomposition", ok, ", ".join(parts))


@_crit("5")
def constants() -> Check:
    C0, C1, C2 = bounds.schur_constants()
    k1 = bounds.k_weight_inverse_l1_quadrature(1)
    k2 = bounds.k_weight_inverse_l1_quadrature(2)
    ok = (
        abs(C2 - 1) <= 1e-12
        and abs(C1 - 4 / math.sqrt(math.pi)) <= 1e-9
        and max(C0, C1, C2) <= 3
        and abs(k1 / bounds.k_weight_inverse_l1(1) - 1) <= 1e-3
        and abs(k2 / bounds.k_weight_inverse_l1(2) - 1) <= 1e-3
        and abs(bounds.k_weight_inverse_l1(1) - math.pi**2) <= 1e-12
    )
    return Check("5", "Schur constants and K weight", ok, f"C=({C0:.6f}, {C1:.9f}, {C2:.12f}), |K_1^-1|_1={k1:.6f}, |K_2^-1|_1/pi^4={k2 / math.pi**4:.6f}")


@_crit("5")
def constant_chain() -> Check:
    """81 pi must equal (9 pi/2) * 18, each factor rebuilt from its ingredients."""
    C = bounds.schur_constants()
    schur_ok = bounds.SCHUR_FACTOR >= max(C) ** 2
    l21 = bounds.SCHUR_FACTOR * bounds.k_weight_inverse_l1(1) / (2 * math.pi)
    per_j = max(bounds.A_NORM, 2 * bounds.BC_NORM, 2 * bounds.D_NORM)
    l22 = 9 * per_j
    rho = np.array([0.3, 0.7, 1.0])
    expanded = sum(
        (bounds.LEMMA21_BASE * bounds.LEMMA22_BASE) ** len(E) * np.prod([rho[j - 1] ** 2 for j in E])
        for E in SubsetE.all_subsets(3)
    )
    product = bounds.bound_product(bounds.HSpec(1.0, tuple(rho), tuple(rho), 1.0))
    ok = (
        schur_ok
        and math.isclose(bounds.LEMMA21_BASE, l21, rel_tol=1e-12)
        and math.isclose(bounds.LEMMA22_BASE, l22, rel_tol=1e-12)
        and math.isclose(bounds.THEOREM_CONSTANT, bounds.LEMMA21_BASE * bounds.LEMMA22_BASE, rel_tol=1e-12)
        and math.isclose(expanded, product, rel_tol=1e-12)
        and math.isclose(bounds.bound_product(bounds.HSpec(1.0, (1.0,), (1.0,), 1.0)), 1 + 81 * math.pi, rel_tol=1e-12)
    )
    return Check(
        "5",
        "constant chain 81pi = (9pi/2) x 18",
        ok,
        f"theorem {bounds.THEOREM_CONSTANT:.6f}, lemma bases {bounds.LEMMA21_BASE:.6f} x {bounds.LEMMA22_BASE:.6f}",
    )


@_crit("6")
def smoothing_operators() -> Check:
    rep = bounds.smoothing_norm_certify(corpus.lemma41_corpus(), corpus.lemma41_grid())
    g = corpus.lemma41_grid()
    phi = dsl.sample_symbol(dsl.parse_symbol("cos(x1)", dsl.SymbolContext(1)), g)
    a_err = float(np.max(np.abs(bounds.smoothing_op_apply("A", 1, phi).values - (1 - math.exp(-0.25)) * phi.values)))
    worst_split = max(r.split_defect for r in rep.rows)
    worst_d = max(r.d_ratio for r in rep.rows)
    ok = rep.passed and len(rep.rows) == 12 and a_err <= 1e-6
    return Check("6", "smoothing operators A, B, C, D", ok, f"12 functions, split defect {worst_split:.1e}, max |Dpsi|/|psi| {worst_d:.4f}, A(cos) error {a_err:.1e}")


def example_hypothesis(full: bool) -> Check:
    dims = (2, 3) if full else (1,)
    worst, fails = 0.0, []
    for n in dims:
        for pot in sorted(dsl.BUILTIN_POTENTIALS):
            for spec in (lattice.LatticeSpec(n, pot), lattice.LatticeSpec.geometric(n, 0.5, pot)):
                F = lattice.gibbs_symbol(lattice.lattice_hamiltonian(spec))
                chk = bounds.check_hypothesis_H(F, lattice.example_constants(spec), lattice.example_window(n))
                worst = max(worst, chk.worst_ratio)
                if not chk.passed:
                    fails.append(f"n={n} {pot} g={spec.g}")
    wn = 3 if full else 1
    wd = [lattice.w_derivative_certify(lattice.LatticeSpec(wn, pot)) for pot in sorted(dsl.BUILTIN_POTENTIALS)]
    w_ok = all(r.passed for r in wd)
    detail = f"worst (H) ratio {worst:.4f} over n={dims}; w-derivative n={wn} worst {max(r.worst for r in wd):.4f}"
    if fails:
        detail += "; failing " + ", ".join(fails)
    return Check("7", "hypothesis (H) for the lattice example", not fails and w_ok, detail)


def headline(full: bool) -> Check:
    t0 = time.perf_counter()
    dims = (1, 2, 3) if full else (1,)
    rows = []
    for example in ("lattice", "mean-field"):
        cfg = ExperimentConfig(example=example, potential="lorentz", n_values=dims, h_values=(0.05, 0.1, 0.5))
        rows += run_sweep(cfg)
    bad = [r for r in rows if r.passed == "false"]
    checked = {(r.symbol.split("@")[0], r.n) for r in rows if r.passed == "true"}
    covered = all((lbl, n) in checked for lbl in ("lattice:lorentz:ones", "mean-field:lorentz") for n in dims)
    skips = sum(r.passed == "skip" for r in rows)
    worst = max((r.norm / r.bound for r in rows if r.passed == "true"), default=float("nan"))
    dt = time.perf_counter() - t0
    ok = not bad and covered and dt < 600
    detail = f"{len(rows)} runs, {len(rows) - skips} certified, {skips} outside h rho delta <= 1, worst norm/bound {worst:.3e}, {dt:.1f}s"
    if bad:
        detail += "; failing " + ", ".join(f"n={r.n} h={r.h} {r.symbol} {r.error}" for r in bad)
    return Check("8", "norm bound headline", ok, detail)


@_crit("9")
def exp_conjugation() -> Check:
    reps = [(name, bounds.exp_conjugation_certify(f, (-6.0, 6.0))) for name, f in corpus.conjugation_functions()]
    ok = all(r.passed for _, r in reps)
    return Check("9", "exponential conjugation", ok, ", ".join(f"{name}: max ratio {max(r.ratios):.3f}" for name, r in reps))


@_crit("10")
def rescaling() -> Check:
    grid = reference_grids(1).spatial
    F = corpus.gaussian_symbols(1)[0][1]
    spec = bounds.fit_hypothesis_H(F, Box.cube(1, 8.0), h=0.25)
    Ft, new, lam = bounds.rescale_symbol(F, spec)
    a = operator_norm(weyl_quantize(F, 0.25, grid))
    b = operator_norm(weyl_quantize(Ft, 1.0, grid))
    rel = abs(a - b) / max(a, b)
    return Check("10", "rescaling to h = 1", rel <= 1e-3 and new.h == 1.0, f"|Op_h F| = {a:.9f}, |Op_1 F~| = {b:.9f}, rel {rel:.1e}")


def summability() -> Check:
    curve = lattice.log_bound_curve(lambda j: 4.0**-j, 50, h=1.0, C0=lattice.admissible_C0([4.0**-j for j in range(1, 51)]))
    delta = math.expm1(curve[49] - curve[39])
    mono = bool(np.all(np.diff(curve) >= 0))
    return Check("11", "bound converges for g_j = 4^-j", mono and delta <= 1e-9, f"relative change n=40 -> 50: {delta:.3e} (needs <= 1e-9)")


@_crit("11")
def growth() -> Check:
    curve = lattice.log_bound_curve(lambda j: 1.0, 60, h=0.1, C0=1.0)
    second = np.max(np.abs(np.diff(curve, 2)))
    slope = curve[1] - curve[0]
    return Check("11", "log bound linear in n for g = 1", second <= 1e-12 * curve[-1], f"slope {slope:.9f} per site, max second difference {second:.1e}")


@_crit("12")
def determinism() -> Check:
    cfg = ExperimentConfig(example="gaussian", n_values=(1,), h_values=(0.5, 1.0))
    a = render_report(run_sweep(cfg), "csv")
    b = render_report(run_sweep(cfg), "csv")
    return Check("12", "sweep determinism", a == b, f"{len(a)} bytes, identical={a == b}")


# invariants that are not numbered criteria


@_crit("inv")
def schur_pointwise() -> Check:
    """K_1(X - Y) |<Op F Psi_Y, Psi_X>| <= 9 N_1(F) for 20 random pairs."""
    pg = PhaseGrid.uniform(1, 12.0, 256)
    rng = np.random.default_rng(VERIFY_SEED)
    worst = 0.0
    for _, F in corpus.gaussian_symbols(1):
        N1 = bounds.lemma21_rhs(F, SubsetE((1,)), Box.cube(1, 8.0)) / bounds.LEMMA21_BASE
        S = dsl.sample_symbol(F, pg)
        for _ in range(20):
            X = PhasePoint(rng.uniform(-2, 2, 1), rng.uniform(-2, 2, 1))
            Y = PhasePoint(rng.uniform(-2, 2, 1), rng.uniform(-2, 2, 1))
            val = bounds.k_weight(X - Y) * abs(coherent_matrix_element(S, X, Y))
            worst = max(worst, val / (bounds.SCHUR_FACTOR * N1))
    return Check("inv", "Schur kernel estimate", worst <= 1 + 1e-3, f"max K|matrix element| / (9 N_1) = {worst:.4f}")


@_crit("inv")
def proof_chain() -> Check:
    """norm <= sum over E of subset bounds <= M prod (1 + 81 pi eps^2), n = 1."""
    grid = reference_grids(1).spatial
    dual = PhaseGrid.weyl_dual(grid, 1.0)
    window = Box.cube(1, 8.0)
    full = SubsetE((1,))
    lines, ok = [], True
    for text in ("exp(-(x1^2 + p1^2)/4)", "exp(-(x1^2/4 + p1^2/9))", "exp(-(x1^2 + p1^2)/9)*cos(x1/3)"):
        F0 = dsl.parse_symbol(text, dsl.SymbolContext(1))
        F, spec, _ = bounds.rescale_symbol(F0, bounds.fit_hypothesis_H(F0, window))
        norm = operator_norm(weyl_quantize(F, 1.0, grid))
        S = dsl.sample_symbol(F, dual)
        # E empty: anti-Wick contracts the sup norm; E = {1}: Lemma 2.1 applied to T(E)F
        subsets = S.sup() + bounds.lemma21_rhs_from_sups([bounds.sampled_I2_sum(t_operator(S, full), full)], 1)
        lemmas = spec.M + bounds.LEMMA21_BASE * bounds.lemma22_rhs(spec, full)
        bound = bounds.theoretical_bound(spec)
        good = norm <= subsets * (1 + 1e-3) and subsets <= lemmas * (1 + 1e-3) and lemmas <= bound * (1 + 1e-3)
        ok &= good
        lines.append(f"{norm:.3f} <= {subsets:.3f} <= {lemmas:.3f} <= {bound:.3f}")
    return Check("inv", "proof chain norm <= subsets <= bound", ok, "; ".join(lines))


@_crit("inv")
def lemma21_sanity() -> Check:
    grid = reference_grids(1).spatial
    worst = 0.0
    for _, F in corpus.gaussian_symbols(1):
        rhs = bounds.lemma21_rhs(F, SubsetE((1,)), Box.cube(1, 8.0))
        worst = max(worst, operator_norm(hybrid_quantize(F, SubsetE((1,)), grid)) / rhs)
    return Check("inv", "hybrid norm <= Lemma 2.1 bound", worst <= 1 + 1e-3, f"max ratio {worst:.4f}")


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


def quick_checks() -> list[Callable[[], Check]]:
    return [
        resolution_of_identity,
        weyl_anti_wick,
        wigner_coherent,
        _crit("4")(lambda: decomposition(False)),
        constants,
        constant_chain,
        smoothing_operators,
        _crit("7")(lambda: example_hypothesis(False)),
        _crit("8")(lambda: headline(False)),
        exp_conjugation,
        rescaling,
        growth,
        determinism,
        schur_pointwise,
        proof_chain,
        lemma21_sanity,
    ]


def full_checks() -> list[Callable[[], Check]]:
    quick = quick_checks()
    replace = {
        "4": _crit("4")(lambda: decomposition(True)),
        "7": _crit("7")(lambda: example_hypothesis(True)),
        "8": _crit("8")(lambda: headline(True)),
    }
    out = [replace.get(getattr(c, "criterion", ""), c) for c in quick]
    out.insert(out.index(growth), _crit("11")(summability))
    return out


def verify_suite(level: str = "quick", echo: Callable[[str], None] | None = None) -> tuple[int, list[Check]]:
    if level not in ("quick", "full"):
        raise ValueError("level must be quick or full")
    checks = []
    for fn in quick_checks() if level == "quick" else full_checks():
        c = _timed(fn)
        checks.append(c)
        if echo:
            echo(c.line())
    return (0 if all(c.passed for c in checks) else 2), checks
