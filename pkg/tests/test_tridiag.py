import random
from fractions import Fraction

import pytest
import sympy

from heun_tridiag.classical import HERMITE, HYPERGEOMETRIC, LAGUERRE, ClassicalCase
from heun_tridiag.errors import ConfigError, DegenerateTau, NotHeunShaped, NotNormalizable
from heun_tridiag.tridiag import (
    TridiagConfig,
    build_M,
    canonical_config,
    closed_form_M,
    heun_params,
    heun_rhos,
    random_config,
    recover_taus,
    singularity_structure,
    tridiag_coeffs,
    verify_heun_form,
    verify_tridiagonal,
)
from heun_tridiag.weylops import ID, DiffOperator, Polynomial, op_matrix

x, f = sympy.Symbol("x"), sympy.Function("f")
R = lambda q: sympy.Rational(q.numerator, q.denominator)  # noqa: E731


def _sympy_M(cfg):
    """Independent assembly of t1 X L + t2 L X + t3 X + t4 L acting on f(x)."""
    c = cfg.case
    if c.tag == HYPERGEOMETRIC:
        L = lambda g: x * (1 - x) * g.diff(x, 2) + (R(c.nu1) * x + R(c.nu2)) * g.diff(x)  # noqa: E731
    elif c.tag == LAGUERRE:
        L = lambda g: x * g.diff(x, 2) + (R(c.a) + 1 - x) * g.diff(x)  # noqa: E731
    else:
        L = lambda g: g.diff(x, 2) - 2 * x * g.diff(x)  # noqa: E731
    g = f(x)
    return sympy.expand(R(cfg.tau1) * x * L(g) + R(cfg.tau2) * L(x * g) + R(cfg.tau3) * x * g + R(cfg.tau4) * L(g))


def _apply_sym(op: DiffOperator):
    g = f(x)
    return sympy.expand(sum(sum(R(v) * x**j for j, v in enumerate(c.coeffs)) * g.diff(x, k) for k, c in enumerate(op.coeffs)))


@pytest.mark.parametrize("tag", [HYPERGEOMETRIC, LAGUERRE, HERMITE])
def test_build_M_against_sympy(tag):
    rng = random.Random(len(tag))
    for _ in range(8):
        cfg = random_config(tag, rng)
        assert sympy.expand(_apply_sym(build_M(cfg)) - _sympy_M(cfg)) == 0
        assert build_M(cfg) == closed_form_M(cfg)


def test_canonical_M():
    M = build_M(canonical_config())
    assert M.coeff(2) == Polynomial((0, 1, -1)) * Polynomial((Fraction(1, 2), 1))
    assert heun_rhos(canonical_config())[0] == -6
    assert M.coeff(0) == Polynomial((1, 14))


def test_racah_limit_leading_coefficient():
    M = build_M(canonical_config().with_(tau4=Fraction(0)))
    assert M.coeff(2) == Polynomial((0, 0, 1, -1))


def test_hermite_closed_form():
    cfg = TridiagConfig(ClassicalCase.hermite(), Fraction(1, 2), 1, 1)
    M = build_M(cfg)
    assert M.coeff(2) == Polynomial((1, 1))
    assert M.coeff(1) == Polynomial((1, -2, -2))
    assert M.coeff(0).is_zero()


def test_heun_params_canonical():
    hp = heun_params(canonical_config())
    assert (hp.gamma, hp.delta, hp.epsilon, hp.d) == (2, 3, 1, Fraction(-1, 2))
    assert hp.alpha_beta == -14 and set(hp.roots) == {7, -2}
    assert hp.regularity() == 0
    assert verify_heun_form(canonical_config()).passed


def test_heun_params_limits():
    assert heun_params(canonical_config().with_(tau4=Fraction(0))).d == 0
    cfg = TridiagConfig(ClassicalCase.hypergeometric(-3, 0), Fraction(1, 3), 2, Fraction(1, 5))
    assert heun_params(cfg).gamma == 0
    assert verify_heun_form(cfg).passed


def test_singularities():
    s = singularity_structure(build_M(canonical_config()))
    assert s["finite_singular_points"] == ["-1/2", "0/1", "1/1"]
    assert s["infinity"] == "regular"


def test_coefficients_canonical():
    co = tridiag_coeffs(canonical_config())
    assert [co.xi(n) for n in (1, 2, 3)] == [14, 8, 0]
    assert co.eta(0) == Fraction(33, 5)
    mat = op_matrix(build_M(canonical_config()), canonical_config().case.basis(3))
    assert mat[1][0] == 14 and mat[2][1] == 8 and mat[0][0] == Fraction(33, 5)


def test_xi_equals_zeta_when_taus_equal():
    co = tridiag_coeffs(canonical_config())
    assert all(co.xi(n) == co.zeta(n) for n in range(12))


@pytest.mark.parametrize("tau4", [Fraction(1, 2), Fraction(0)])
def test_verify_tridiagonal(tau4):
    rep = verify_tridiagonal(canonical_config().with_(tau4=tau4), 10)
    assert rep.passed and len(rep.checks) == 11


def test_verify_tridiagonal_random():
    rng = random.Random(21)
    for tag in (HYPERGEOMETRIC, LAGUERRE, HERMITE):
        for _ in range(5):
            assert verify_tridiagonal(random_config(tag, rng), 8).passed


def test_fault_injection_eta5():
    cfg = canonical_config()
    bad = tridiag_coeffs(cfg).perturbed(eta={5: Fraction(1)})
    rep = verify_tridiagonal(cfg, 10, bad)
    assert [c.name for c in rep.failures()] == ["n=5"]


def test_recover_round_trips():
    cfg = canonical_config()
    rec = recover_taus(build_M(cfg))
    assert rec.cfg == cfg and rec.scale == 1 and rec.shift == 0
    rec = recover_taus(build_M(cfg) * 2 + ID * 3, cfg.case)
    assert rec.cfg == cfg and (rec.scale, rec.shift) == (2, 3)
    rec = recover_taus(build_M(cfg.with_(tau4=Fraction(0))), cfg.case)
    assert rec.cfg.tau4 == 0
    rng = random.Random(22)
    for tag in (LAGUERRE, HERMITE):
        c = random_config(tag, rng)
        assert recover_taus(build_M(c), c.case).cfg == c


def test_recover_rejects():
    with pytest.raises(NotHeunShaped):
        recover_taus(DiffOperator((Polynomial(), Polynomial(), Polynomial((0, 0, 0, 0, 1)))))
    with pytest.raises(NotNormalizable):
        recover_taus(DiffOperator((Polynomial((1,)), Polynomial((0, 1)))), canonical_config().case)
    with pytest.raises(NotHeunShaped):
        # tau4 = 0 cannot identify nu1, nu2 without the case
        recover_taus(build_M(canonical_config().with_(tau4=Fraction(0))))


def test_degenerate_tau():
    with pytest.raises(DegenerateTau):
        TridiagConfig(ClassicalCase.hermite(), Fraction(1, 2), 0, 0, Fraction(-1, 2))
    with pytest.raises(ConfigError):
        TridiagConfig(ClassicalCase.hermite(), Fraction(1, 2), 0, 0, Fraction(1, 3))
