import random
from fractions import Fraction

import pytest

from heun_tridiag.classical import (
    ClassicalCase,
    FamilyData,
    family,
    family_table,
    hypergeometric_series_poly,
    inner_product,
    jacobi_structure,
    structure_residual,
    table_csv,
    weight_moments,
)
from heun_tridiag.errors import ParameterPole
from heun_tridiag.weylops import Polynomial, second_order

HYP = ClassicalCase.hypergeometric(-5, 2)


def test_canonical_family():
    L, data = family(HYP)
    assert HYP.omegas == (1, 2)
    assert [data.lam(n) for n in range(4)] == [0, -5, -12, -21]
    assert data.poly(1) == Polynomial((Fraction(-2, 5), 1))


def test_legendre_data():
    data = FamilyData(ClassicalCase.jacobi(0, 0))
    assert data.u(1) == Fraction(1, 12) and data.b(0) == Fraction(1, 2)
    assert data.poly(2) == Polynomial((Fraction(1, 6), -1, 1))


def test_hermite_data():
    case = ClassicalCase.hermite()
    L, data = family(case)
    assert L == second_order((1,), (0, -2), ())
    assert [data.lam(n) for n in range(4)] == [0, -2, -4, -6]
    assert all(data.b(n) == 0 for n in range(5))
    assert [data.u(n) for n in range(1, 4)] == [Fraction(1, 2), 1, Fraction(3, 2)]


@pytest.mark.parametrize(
    "case",
    [ClassicalCase.jacobi(1, 2), ClassicalCase.jacobi(Fraction(1, 2), Fraction(-1, 3)), ClassicalCase.laguerre(Fraction(3, 2)), ClassicalCase.hermite()],
)
def test_eigen_equation(case):
    L, data = family(case)
    for n in range(12):
        assert L.apply(data.poly(n)) == data.poly(n) * data.lam(n)


@pytest.mark.parametrize("case", [ClassicalCase.jacobi(1, 2), ClassicalCase.jacobi(0, 3), ClassicalCase.laguerre(2), ClassicalCase.hermite()])
def test_orthogonality_via_moments(case):
    data = FamilyData(case)
    mom = weight_moments(case, 20)
    for m in range(8):
        for n in range(m):
            assert inner_product(data.poly(m), data.poly(n), mom) == 0
    # ratio of consecutive norms equals u_n
    for n in range(1, 8):
        h = inner_product(data.poly(n), data.poly(n), mom)
        assert h / inner_product(data.poly(n - 1), data.poly(n - 1), mom) == data.u(n)


def test_series_matches_recurrence():
    rng = random.Random(7)
    for _ in range(10):
        w1, w2 = Fraction(rng.randint(0, 8), rng.randint(1, 3)), Fraction(rng.randint(-2, 8), rng.randint(1, 3))
        data = FamilyData(ClassicalCase.jacobi(w1, w2))
        for n in range(8):
            assert hypergeometric_series_poly(w1, w2, n) == data.poly(n)


def test_structure_relation():
    rng = random.Random(8)
    for _ in range(10):
        data = FamilyData(ClassicalCase.jacobi(Fraction(rng.randint(0, 9), 2), Fraction(rng.randint(0, 9), 3)))
        for n in range(10):
            assert structure_residual(data, n).is_zero()
    assert jacobi_structure(FamilyData(HYP), 0) == (0, 0)
    sym = FamilyData(ClassicalCase.jacobi(Fraction(3, 2), Fraction(3, 2)))
    assert all(sym.structure(n)[0] == 0 for n in range(10))


def test_parameter_pole():
    data = FamilyData(ClassicalCase.jacobi(-1, -1))
    with pytest.raises(ParameterPole):
        data.check_range(3)


def test_family_table_csv():
    text = table_csv(family_table(HYP, 3))
    lines = text.strip().split("\n")
    assert lines[0] == "n,lambda,b,u,G,E"
    assert lines[1].startswith("0,0/1,2/5,0/1")
