import random
from fractions import Fraction

import pytest
import sympy

from heun_tridiag.classical import HERMITE, HYPERGEOMETRIC, LAGUERRE, ClassicalCase
from heun_tridiag.exactnum import QMatrix
from heun_tridiag.rhalgebra import (
    casimir,
    fit_structure_constants,
    jacobi_identity,
    racah_reduction,
    rho_roots,
    structure_constants,
    verify_algebra,
    verify_reduction,
)
from heun_tridiag.tridiag import TridiagConfig, build_M, canonical_config, random_config
from heun_tridiag.weylops import ID, BasisSpec, op_matrix

x = sympy.Symbol("x")
R = lambda q: sympy.Rational(q.numerator, q.denominator)  # noqa: E731
UNKNOWNS = sympy.symbols("alpha1 alpha2 gamma1 gamma2 delta eps1 eps2 kappa")


def _sympy_ops(cfg):
    c = cfg.case
    if c.tag == HYPERGEOMETRIC:
        L = lambda g: sympy.expand(x * (1 - x) * g.diff(x, 2) + (R(c.nu1) * x + R(c.nu2)) * g.diff(x))  # noqa: E731
    elif c.tag == LAGUERRE:
        L = lambda g: sympy.expand(x * g.diff(x, 2) + (R(c.a) + 1 - x) * g.diff(x))  # noqa: E731
    else:
        L = lambda g: sympy.expand(g.diff(x, 2) - 2 * x * g.diff(x))  # noqa: E731

    def M(g):
        return sympy.expand(R(cfg.tau1) * x * L(g) + R(cfg.tau2) * L(x * g) + R(cfg.tau3) * x * g + R(cfg.tau4) * L(g))

    return L, M


def sympy_structure_constants(cfg, degree=9):
    """Solve both relations for the eight constants from their action on x^0..x^degree."""
    L, M = _sympy_ops(cfg)
    a1, a2, g1, g2, d, e1, e2, k = UNKNOWNS
    Z = lambda g: L(M(g)) - M(L(g))  # noqa: E731
    eqs = []
    for n in range(degree + 1):
        g = x**n
        r1 = M(Z(g)) - Z(M(g)) - (a1 * (L(M(g)) + M(L(g))) + a2 * M(M(g)) + g1 * L(g) + d * M(g) + k * L(L(g)) + e1 * g)
        r2 = Z(L(g)) - L(Z(g)) - (a2 * (L(M(g)) + M(L(g))) + a1 * L(L(g)) + g2 * M(g) + d * L(g) + e2 * g)
        for r in (r1, r2):
            eqs.extend(sympy.Poly(sympy.expand(r), x).all_coeffs())
    sol = sympy.solve(eqs, UNKNOWNS, dict=True)
    assert len(sol) == 1 and len(sol[0]) == 8
    return tuple(sol[0][s] for s in UNKNOWNS)


def _as_sympy(sc):
    return tuple(R(v) for v in (sc.alpha1, sc.alpha2, sc.gamma1, sc.gamma2, sc.delta, sc.eps1, sc.eps2, sc.kappa))


def test_canonical_constants():
    sc = structure_constants(canonical_config())
    assert (sc.alpha1, sc.alpha2, sc.gamma2, sc.kappa) == (-4, 2, -15, Fraction(9, 2))
    assert (sc.gamma1, sc.delta, sc.eps1, sc.eps2) == (Fraction(97, 4), Fraction(-39, 2), Fraction(-105, 2), 99)


@pytest.mark.parametrize("tag", [HYPERGEOMETRIC, LAGUERRE, HERMITE])
def test_constants_match_sympy_oracle(tag):
    rng = random.Random(len(tag) + 40)
    for _ in range(3):
        cfg = random_config(tag, rng)
        assert _as_sympy(structure_constants(cfg)) == sympy_structure_constants(cfg)


def test_hermite_constants():
    sc = structure_constants(random_config(HERMITE, random.Random(1)))
    assert (sc.kappa, sc.gamma2, sc.alpha1, sc.alpha2) == (-6, -4, 0, 0)


def test_kappa_zero_limits():
    for t4 in (Fraction(-1), Fraction(0)):
        assert structure_constants(canonical_config().with_(tau4=t4)).kappa == 0


def test_kappa_laguerre():
    cfg = TridiagConfig(ClassicalCase.laguerre(2), Fraction(1, 3), 1, Fraction(5, 7))
    assert structure_constants(cfg).kappa == 6 * Fraction(5, 7)


@pytest.mark.parametrize("t4", [Fraction(1, 2), Fraction(0)])
def test_verify_algebra_canonical(t4):
    cfg = canonical_config().with_(tau4=t4)
    rep = verify_algebra(cfg, probe_degree=10)
    assert rep.passed and [c.status for c in rep.checks] == ["pass"] * 3


def test_fault_injection_gamma1():
    cfg = canonical_config()
    sc = structure_constants(cfg)
    rep = verify_algebra(cfg, 10, sc=sc.replace(gamma1=sc.gamma1 + 1))
    assert rep.get("[Z,L]").status == "pass"
    bad = rep.get("[M,Z]")
    assert bad.status == "fail"
    L = cfg.case.operator()
    from heun_tridiag.weylops import operator_from_json

    assert operator_from_json(bad.detail["residual"]) == -L


def test_probe_degree_floor():
    with pytest.raises(ValueError):
        verify_algebra(canonical_config(), probe_degree=7)


def test_fit_recovers_closed_forms():
    rng = random.Random(9)
    for tag in (HYPERGEOMETRIC, LAGUERRE, HERMITE):
        cfg = random_config(tag, rng)
        fit = fit_structure_constants(cfg.case.operator(), build_M(cfg), ID)
        assert fit.unique and fit.constants == structure_constants(cfg)


def test_fit_on_matrix_realization():
    """Truncated canonical problem: the same constants hold on the 3x3 matrices."""
    cfg = canonical_config()
    basis = cfg.case.basis(3)
    L = QMatrix(op_matrix(cfg.case.operator(), basis))
    M = QMatrix(op_matrix(build_M(cfg), basis))
    fit = fit_structure_constants(L, M, QMatrix.identity(3))
    assert fit.constants is not None


def test_jacobi_identity():
    cfg = canonical_config()
    assert jacobi_identity(cfg.case.operator(), build_M(cfg))


def test_casimir_canonical():
    cv = casimir(canonical_config(), probe_degree=10)
    assert cv.report.passed and cv.q == cv.observed == 288


def test_casimir_probe_oracle_sympy():
    """Apply the assembled Q to x^0..x^10 with sympy: the same constant every time."""
    cv = casimir(canonical_config(), probe_degree=10)
    Q = cv.Q
    vals = set()
    for n in range(11):
        img = sum(sum(R(v) * x**j for j, v in enumerate(c.coeffs)) * sympy.diff(x**n, x, k) for k, c in enumerate(Q.coeffs))
        vals.add(sympy.simplify(sympy.expand(img) / x**n))
    assert vals == {288}


def test_casimir_nu2_zero():
    cfg = TridiagConfig(ClassicalCase.hypergeometric(-4, 0), Fraction(1, 3), Fraction(5, 2), Fraction(2, 3))
    cv = casimir(cfg)
    assert cv.report.passed and cv.q == 0


def test_casimir_tau4_zero_has_no_Q1():
    cv = casimir(canonical_config().with_(tau4=Fraction(0)))
    assert cv.Q1.is_zero() and cv.report.passed


def test_casimir_other_cases_scalar():
    rng = random.Random(10)
    for tag in (LAGUERRE, HERMITE):
        cv = casimir(random_config(tag, rng))
        assert cv.report.passed and cv.observed is not None and cv.q is None


def test_reduction_canonical():
    cfg = canonical_config()
    red = racah_reduction(structure_constants(cfg), build_M(cfg), cfg.case.operator())
    assert red.status == "rational" and red.roots == (Fraction(1, 2), Fraction(3, 2))
    assert all(r.fit.constants.kappa == 0 for r in red.reductions)
    assert verify_reduction(cfg).passed


def test_reduction_kappa_zero_has_root_zero():
    cfg = canonical_config().with_(tau4=Fraction(0))
    red = racah_reduction(structure_constants(cfg), build_M(cfg), cfg.case.operator())
    assert Fraction(0) in red.roots
    r0 = next(r for r in red.reductions if r.rho == 0)
    assert r0.K == build_M(cfg)


def test_reduction_hermite_unavailable():
    cfg = random_config(HERMITE, random.Random(3))
    status, roots, _ = rho_roots(structure_constants(cfg))
    assert status == "unavailable" and roots == ()
    rep = verify_reduction(cfg)
    assert rep.passed and rep.checks[0].status == "skipped"


def test_reduction_complex_and_irrational_statuses():
    sc = structure_constants(canonical_config())
    assert rho_roots(sc.replace(kappa=Fraction(100)))[0] == "complex"
    assert rho_roots(sc.replace(kappa=Fraction(1)))[0] == "real-irrational"
