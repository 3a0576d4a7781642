import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from heun_tridiag.errors import NonSymmetrizable
from heun_tridiag.exactnum import (
    Q,
    QMatrix,
    TridiagMatrix,
    charpoly,
    fmt,
    fmt_approx,
    isolate_real_roots,
    newton_refine,
    parse_rational,
    rational_sqrt,
    real_root_count,
    solve_rational,
    squarefree,
    symmetrize_tridiag,
    tridiag_eigen,
)

rationals = st.fractions(max_denominator=50).filter(lambda f: abs(f) < 10**6)


@pytest.mark.parametrize("text,value", [("3/4", Fraction(3, 4)), ("-5/1", Fraction(-5)), ("7", Fraction(7)), (" -2/6 ", Fraction(-1, 3))])
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("bad", ["1/0", "1/-2", "0.5", "a/b", "", "1e3"])
def test_parse_rational_rejects(bad):
    with pytest.raises(ValueError):
        parse_rational(bad)


def test_Q_rejects_floats():
    with pytest.raises(TypeError):
        Q(0.5)
    with pytest.raises(TypeError):
        Q(True)


@given(rationals)
def test_fmt_round_trip(q):
    assert parse_rational(fmt(q)) == q


@given(rationals, rationals.filter(lambda b: b != 0))
def test_field_round_trips(a, b):
    assert (a + b) - b == a
    assert (a * b) / b == a


def test_fmt_approx():
    assert fmt_approx(0.1) == "0.10000000000000001"
    assert fmt_approx(1 + 2j) == ["1", "2"]
    assert fmt_approx(complex(3, 0)) == "3"


def test_rational_sqrt():
    assert rational_sqrt(Fraction(9, 4)) == Fraction(3, 2)
    assert rational_sqrt(Fraction(2)) is None
    assert rational_sqrt(Fraction(-1)) is None


def test_solve_rational_unique_and_inconsistent():
    sol = solve_rational([[1, 1], [1, -1]], [3, 1])
    assert sol.unique and sol.solution == (2, 1)
    under = solve_rational([[1, 1]], [2])
    assert under.solution is not None and not under.unique and under.rank == 1
    bad = solve_rational([[1, 1], [2, 2]], [1, 3])
    assert bad.solution is None and bad.inconsistent_row == 1


def _sym_check(m, s, d):
    D = np.diag([float(v) for v in d])
    got = D @ m.dense() @ np.linalg.inv(D)
    assert np.allclose(got, s.dense())
    assert np.allclose(got, got.T)


def test_symmetrize_trivial():
    m = TridiagMatrix((0, 0), (2,), (2,))
    s, d = symmetrize_tridiag(m)
    assert s.super == s.sub == (2,) and d == (1, 1)


def test_symmetrize_scaling():
    m = TridiagMatrix((1, 1), (4,), (1,))
    s, d = symmetrize_tridiag(m)
    assert s.super == (2,) and d == (1, 2)
    _sym_check(m, s, d)


def test_symmetrize_negative_offdiagonals():
    m = TridiagMatrix((Fraction(0),) * 3, (Fraction(-2), Fraction(3)), (Fraction(-8), Fraction(12)))
    s, d = symmetrize_tridiag(m)
    _sym_check(m, s, d)
    assert charpoly(s) == charpoly(m)


def test_non_symmetrizable():
    with pytest.raises(NonSymmetrizable):
        symmetrize_tridiag(TridiagMatrix((0, 0), (-1,), (1,)))


def test_eigen_trivial_cases():
    r = tridiag_eigen(TridiagMatrix((Fraction(7),)))
    assert r.values.tolist() == [7.0] and r.vectors.tolist() == [[1.0]]
    r = tridiag_eigen(TridiagMatrix((0, 0), (1,), (1,)))
    assert np.allclose(r.values, [-1, 1])


def test_eigen_canonical_cubic():
    from heun_tridiag.tridiag import canonical_config, tridiag_coeffs

    m = tridiag_coeffs(canonical_config()).matrix(2)
    assert m.diag == (Fraction(33, 5), Fraction(193, 70), Fraction(-27, 7))
    assert m.sub == (14, 8)
    t = sympy.Symbol("t")
    cp = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row] for row in m.rows()]).charpoly(t)
    assert [sympy.Rational(c.numerator, c.denominator) for c in reversed(charpoly(m))] == cp.all_coeffs()
    roots = sorted(float(z) for z in sympy.real_roots(cp.as_expr()))
    r = tridiag_eigen(m)
    assert len(roots) == 3
    assert np.allclose(r.values, roots, rtol=1e-12)


def _random_matrix(rng, n, symmetrizable):
    diag = [Fraction(rng.randint(-10, 10)) for _ in range(n)]
    sup, sub = [], []
    for _ in range(n - 1):
        a = Fraction(rng.randint(1, 10)) * rng.choice((1, -1))
        c = Fraction(rng.randint(1, 10))
        c = c if not symmetrizable else c * (1 if a > 0 else -1)
        if not symmetrizable:
            c *= rng.choice((1, -1))
        sup.append(a)
        sub.append(c)
    return TridiagMatrix(diag, sup, sub)


def test_eigen_residual_1000_symmetrizable():
    rng = random.Random(11)
    worst = 0.0
    for _ in range(1000):
        m = _random_matrix(rng, rng.randint(1, 20), True)
        r = tridiag_eigen(m)
        assert r.method == "symmetric"
        worst = max(worst, float(np.max(r.residuals)))
    assert worst <= 1e-10


def test_eigen_charpoly_path_complex():
    rng = random.Random(12)
    seen_complex = False
    for _ in range(60):
        m = _random_matrix(rng, rng.randint(2, 9), False)
        r = tridiag_eigen(m)
        assert np.max(r.residuals) <= 1e-10
        ref = np.sort_complex(np.linalg.eigvals(m.dense()))
        assert np.allclose(np.sort_complex(r.values.astype(complex)), ref, atol=1e-8)
        seen_complex |= not r.is_real
    assert seen_complex


def test_charpoly_matches_numpy():
    rng = random.Random(13)
    for _ in range(20):
        m = _random_matrix(rng, 6, False)
        ours = [float(c) for c in reversed(charpoly(m))]
        assert np.allclose(ours, np.poly(m.dense()), rtol=1e-9, atol=1e-6)


def test_degenerate_spectrum_flagged():
    r = tridiag_eigen(TridiagMatrix((Fraction(2), Fraction(2)), (Fraction(0),), (Fraction(0),)))
    assert r.degenerate


def test_root_isolation_and_refinement():
    p = [Fraction(-2), Fraction(0), Fraction(1)]  # t^2 - 2
    intervals = isolate_real_roots(p)
    assert len(intervals) == 2 and real_root_count(p) == 2
    for a, b in intervals:
        assert (a * a - 2) * (b * b - 2) <= 0
    r = newton_refine(p, 1.4, steps=4)
    assert isinstance(r, Fraction) and abs(float(r) - 2**0.5) < 1e-15
    z = newton_refine([Fraction(1), Fraction(0), Fraction(1)], 0.1 + 0.9j, steps=4)
    assert isinstance(z, tuple) and abs(float(z[1]) - 1) < 1e-15


def test_squarefree():
    p = [Fraction(c) for c in (1, -2, 1)]  # (t-1)^2
    sf = squarefree(p)
    assert len(sf) == 2 and sf[0] / sf[1] == -1


def test_qmatrix_algebra():
    A = QMatrix([[1, 2], [3, 4]])
    I = QMatrix.identity(2)
    assert A * I == A and (A - A).is_zero()
    assert (A * A).rows == ((7, 10), (15, 22))
    assert np.allclose((A * A).to_numpy(), np.array([[7, 10], [15, 22]]))
    assert (A * 2 + I).terms() == {(0, 0): 3, (0, 1): 4, (1, 0): 6, (1, 1): 9}


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=3, max_size=3), st.lists(st.integers(1, 6), min_size=2, max_size=2))
def test_symmetrized_preserves_charpoly(diag, offs):
    m = TridiagMatrix([Fraction(v) for v in diag], [Fraction(v) for v in offs], [Fraction(v + 1) for v in offs])
    s, _ = symmetrize_tridiag(m)
    if s.exact:
        assert charpoly(s) == charpoly(m)
    else:
        assert np.allclose([float(c) for c in charpoly(m)], np.poly(s.dense())[::-1])
