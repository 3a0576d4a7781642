import random
from fractions import Fraction

import pytest
import sympy

from heun_tridiag.classical import ClassicalCase, FamilyData
from heun_tridiag.errors import SpaceNotPreserved
from heun_tridiag.weylops import (
    D,
    ID,
    X,
    BasisSpec,
    DiffOperator,
    Polynomial,
    commutator,
    expand_in_basis,
    from_monomial,
    op_apply,
    op_compose,
    op_matrix,
    operator_from_json,
    operator_to_json,
    second_order,
    to_monomial,
)

x = sympy.Symbol("x")
HYP = ClassicalCase.hypergeometric(-5, 2)


def _sym(p: Polynomial):
    return sum(sympy.Rational(c.numerator, c.denominator) * x**k for k, c in enumerate(p.coeffs))


def _sym_apply(op: DiffOperator, f):
    return sympy.expand(sum(_sym(c) * sympy.diff(f, x, k) for k, c in enumerate(op.coeffs)))


def _random_op(rng, order=2, deg=3):
    return DiffOperator(Polynomial(Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(deg + 1)) for _ in range(order + 1))


def test_apply_examples():
    assert op_apply(X, Polynomial.monomial(2)) == Polynomial.monomial(3)
    L = HYP.operator()
    assert L.apply(Polynomial((0, 1))) == Polynomial((2, -5))
    P2 = FamilyData(HYP).poly(2)
    assert L.apply(P2) == P2 * -12


def test_canonical_commutation():
    assert op_compose(D, X) - op_compose(X, D) == ID
    assert commutator(D, X) == ID


def test_hermite_square():
    L = ClassicalCase.hermite().operator()
    L2 = L * L
    want = DiffOperator((Polynomial(), Polynomial((0, 4)), Polynomial((-4, 0, 4)), Polynomial((0, -4)), Polynomial((1,))))
    assert L2 == want
    for k in range(7):
        f = x**k
        assert sympy.expand(_sym(L2.apply(Polynomial.monomial(k))) - _sym_apply(L, _sym_apply(L, f))) == 0


def test_self_commutator_zero():
    L = HYP.operator()
    assert commutator(L, L).is_zero()


def test_composition_against_sympy():
    rng = random.Random(3)
    for _ in range(15):
        a, b = _random_op(rng), _random_op(rng)
        ab = a * b
        for k in range(6):
            f = x**k
            assert sympy.expand(_sym(ab.apply(Polynomial.monomial(k))) - _sym_apply(a, _sym_apply(b, f))) == 0


def test_composition_associative():
    rng = random.Random(4)
    a, b, c = (_random_op(rng, 2, 2) for _ in range(3))
    assert (a * b) * c == a * (b * c)


def test_op_matrix_escape():
    with pytest.raises(SpaceNotPreserved) as exc:
        op_matrix(X, BasisSpec("monomial", 3))
    assert (exc.value.index, exc.value.degree) == (2, 3)


def test_op_matrix_diagonal_on_jacobi():
    m = op_matrix(HYP.operator(), BasisSpec("jacobi", 4, (1, 2)))
    assert [m[i][i] for i in range(4)] == [0, -5, -12, -21]
    assert all(m[i][j] == 0 for i in range(4) for j in range(4) if i != j)


def test_op_matrix_rectangular():
    m = op_matrix(X, BasisSpec("monomial", 3), ncols=2)
    assert m == [[0, 0], [1, 0], [0, 1]]


def test_monomial_matrix_has_fraction_entries():
    m = op_matrix(second_order((0, 0, 1), (0, 1), (1,)), BasisSpec("monomial", 3))
    assert all(isinstance(v, Fraction) for row in m for v in row)
    assert m[2][2] == 5 and m[1][1] == 2


def test_expand_and_basis_round_trip():
    basis = BasisSpec("jacobi", 5, (Fraction(1, 2), 3))
    vec = [Fraction(k + 1, 3) for k in range(5)]
    assert from_monomial(to_monomial(vec, basis), basis) == vec
    polys = basis.polynomials()
    assert expand_in_basis(polys[3], polys) == [0, 0, 0, 1, 0]


def test_basis_is_unit_lower_triangular():
    for spec in (BasisSpec("laguerre", 6, (2,)), BasisSpec("hermite", 6), BasisSpec("jacobi", 6, (0, 0))):
        for n, p in enumerate(spec.polynomials()):
            assert p.degree == n and p.lead == 1


def test_operator_json_round_trip():
    rng = random.Random(5)
    op = _random_op(rng)
    assert operator_from_json(operator_to_json(op)) == op


def test_polynomial_evaluation_matches_sum():
    p = Polynomial((Fraction(1, 2), -3, 0, 2))
    t = Fraction(7, 3)
    assert p(t) == sum(c * t**k for k, c in enumerate(p.coeffs))
    assert Polynomial((1, 2, 0, 0)).degree == 1
    assert Polynomial().degree < 0
