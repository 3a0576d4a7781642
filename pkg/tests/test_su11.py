import random
from fractions import Fraction

import pytest

from heun_tridiag.errors import FitInconsistent
from heun_tridiag.su11 import (
    Su11Config,
    casimir_ops,
    kappa_of_beta,
    match_hypergeometric,
    mixed_operator_check,
    mixed_operators,
    operators_json,
    verify_total_relation,
)
from heun_tridiag.weylops import ID, X, second_order

BASE = (Fraction(1, 2), Fraction(3, 4), Fraction(5, 4))


def test_half_spins_total_three():
    cfg = Su11Config(Fraction(1, 2), Fraction(1, 2), Fraction(1, 2), 1)
    assert cfg.sigma4 == Fraction(5, 2) and cfg.total == 3
    assert verify_total_relation(cfg).passed


def test_integer_spins_total():
    cfg = Su11Config(1, 2, 3, 4)
    assert cfg.sigma4 == 10
    assert cfg.total == 10 * 9 + 0 + 2 + 6
    rep = verify_total_relation(cfg)
    assert rep.passed and rep.get("sum as operator").status == "pass"


def test_N0_constants():
    assert verify_total_relation(Su11Config(*BASE, 0)).passed


def test_second_order_parts_cancel():
    rng = random.Random(5)
    for _ in range(10):
        cfg = Su11Config(*(Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(3)), rng.randint(0, 6))
        c12, c23, c31 = casimir_ops(cfg)
        assert (c12.coeff(2) + c23.coeff(2) + c31.coeff(2)).is_zero()
        assert verify_total_relation(cfg).passed


def test_c23_is_affine_hypergeometric():
    cfg = Su11Config(*BASE, 4)
    _, c23, _ = casimir_ops(cfg)
    hm = match_hypergeometric(c23)
    assert hm.scale == -1
    assert hm.case.operator() * hm.scale + ID * hm.shift == c23
    with pytest.raises(FitInconsistent):
        match_hypergeometric(second_order((0, 0, 1), (), ()))


@pytest.mark.parametrize("beta", [0, 1])
def test_kappa_vanishes(beta):
    rep, mat_fit, op_fit = mixed_operator_check(Su11Config(*BASE, 4, beta))
    assert rep.passed
    assert mat_fit.constants.kappa == 0 and op_fit.constants.kappa == 0


def test_kappa_generic_beta():
    rep, mat_fit, op_fit = mixed_operator_check(Su11Config(*BASE, 4, Fraction(1, 3)))
    assert rep.passed and mat_fit.unique
    assert mat_fit.constants == op_fit.constants
    assert mat_fit.constants.kappa == kappa_of_beta(Fraction(1, 3)) == Fraction(4, 3)
    assert rep.get("M tridiagonalizes C23").status == "pass"


def test_kappa_formula_matches_fits():
    for beta in (Fraction(-2), Fraction(1, 2), Fraction(7, 3)):
        L, M = mixed_operators(Su11Config(*BASE, 3, beta))
        from heun_tridiag.rhalgebra import fit_structure_constants

        fit = fit_structure_constants(L, M, ID)
        assert fit.unique and fit.constants.kappa == kappa_of_beta(beta)
        assert fit.constants.alpha1 == 2 * (2 * beta - 1) and fit.constants.alpha2 == -2


def test_bad_N():
    with pytest.raises(ValueError):
        Su11Config(*BASE, -1)


def test_operators_json_shape():
    js = operators_json(Su11Config(*BASE, 2))
    assert set(js) == {"C12", "C23", "C31"}
    assert js["C12"]["order"] == 2
    assert X.order == 0
