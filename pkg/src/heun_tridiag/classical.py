"""Hypergeometric, Laguerre and Hermite operators with their monic families."""

from __future__ import annotations

import csv
import io
import threading
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .errors import ConfigError, ParameterPole
from .exactnum import Q, fmt
from .weylops import BasisSpec, DiffOperator, Polynomial, second_order

HYPERGEOMETRIC = "hypergeometric"
LAGUERRE = "laguerre"
HERMITE = "hermite"
CASES = (HYPERGEOMETRIC, LAGUERRE, HERMITE)


@dataclass(frozen=True)
class ClassicalCase:
    """Which classical operator ``L`` to tridiagonalize.

    ``params`` is ``(nu1, nu2)`` for the hypergeometric operator
    ``x(1-x) d^2 + (nu1 x + nu2) d``, ``(a,)`` for the Laguerre operator
    ``x d^2 + (a+1-x) d`` and empty for the Hermite operator ``d^2 - 2x d``.
    """

    tag: str
    params: tuple = ()

    def __post_init__(self):
        if self.tag not in CASES:
            raise ConfigError(f"unknown case {self.tag!r}")
        want = {HYPERGEOMETRIC: 2, LAGUERRE: 1, HERMITE: 0}[self.tag]
        if len(self.params) != want:
            raise ConfigError(f"{self.tag} takes {want} parameters, got {len(self.params)}")
        object.__setattr__(self, "params", tuple(Q(p) for p in self.params))

    @classmethod
    def hypergeometric(cls, nu1, nu2) -> "ClassicalCase":
        return cls(HYPERGEOMETRIC, (nu1, nu2))

    @classmethod
    def jacobi(cls, w1, w2) -> "ClassicalCase":
        """Hypergeometric case from Jacobi parameters (inverse of ``omegas``)."""
        w1, w2 = Q(w1), Q(w2)
        return cls(HYPERGEOMETRIC, (-2 - w1 - w2, w1 + 1))

    @classmethod
    def laguerre(cls, a) -> "ClassicalCase":
        return cls(LAGUERRE, (a,))

    @classmethod
    def hermite(cls) -> "ClassicalCase":
        return cls(HERMITE, ())

    @property
    def nu1(self) -> Fraction:
        return self.params[0]

    @property
    def nu2(self) -> Fraction:
        return self.params[1]

    @property
    def a(self) -> Fraction:
        return self.params[0]

    @property
    def omegas(self) -> tuple[Fraction, Fraction]:
        """Jacobi parameters ``w1 = nu2 - 1``, ``w2 = -1 - nu1 - nu2``."""
        if self.tag != HYPERGEOMETRIC:
            raise ConfigError("omegas only exist for the hypergeometric case")
        return self.nu2 - 1, -1 - self.nu1 - self.nu2

    def operator(self) -> DiffOperator:
        if self.tag == HYPERGEOMETRIC:
            return second_order((0, 1, -1), (self.nu2, self.nu1), ())
        if self.tag == LAGUERRE:
            return second_order((0, 1), (self.a + 1, -1), ())
        return second_order((1,), (0, -2), ())

    def basis(self, size: int) -> BasisSpec:
        if self.tag == HYPERGEOMETRIC:
            return BasisSpec("jacobi", size, self.omegas)
        if self.tag == LAGUERRE:
            return BasisSpec("laguerre", size, (self.a,))
        return BasisSpec("hermite", size, ())

    def to_json(self) -> dict:
        return {"tag": self.tag, "params": [fmt(p) for p in self.params]}


class FamilyData:
    """Eigenvalues and monic recurrence coefficients of a classical family.

    ``lam(n)``, ``b(n)``, ``u(n)`` are closed forms; ``poly(n)`` builds the monic
    eigenpolynomial from ``P_{n+1} = (x - b_n) P_n - u_n P_{n-1}`` and caches it.
    """

    def __init__(self, case: ClassicalCase):
        self.case = case
        self._polys: list[Polynomial] = [Polynomial.const(Fraction(1))]
        self._lock = threading.Lock()
        if case.tag == HYPERGEOMETRIC:
            self.w1, self.w2 = case.omegas
            self.s = self.w1 + self.w2

    # eigenvalues ---------------------------------------------------------
    def lam(self, n: int) -> Fraction:
        if n < 0:
            return Fraction(0)
        tag = self.case.tag
        if tag == HYPERGEOMETRIC:
            return Fraction(-n * (n - self.case.nu1 - 1))
        if tag == LAGUERRE:
            return Fraction(-n)
        return Fraction(-2 * n)

    # recurrence ----------------------------------------------------------
    def b(self, n: int) -> Fraction:
        tag = self.case.tag
        if tag == LAGUERRE:
            return 2 * n + self.case.a + 1
        if tag == HERMITE:
            return Fraction(0)
        w1, w2, s = self.w1, self.w2, self.s
        if n == 0:
            if s + 2 == 0:
                raise ParameterPole(0, "b_n")
            return (w1 + 1) / (s + 2)
        den = (s + 2 * n) * (s + 2 * n + 2)
        if den == 0:
            raise ParameterPole(n, "b_n")
        return Fraction(1, 2) + (w1 * w1 - w2 * w2) / (2 * den)

    def u(self, n: int) -> Fraction:
        if n <= 0:
            return Fraction(0)
        tag = self.case.tag
        if tag == LAGUERRE:
            return n * (n + self.case.a)
        if tag == HERMITE:
            return Fraction(n, 2)
        w1, w2, s = self.w1, self.w2, self.s
        if n == 1:
            num = (1 + w1) * (1 + w2)
            den = (s + 2) ** 2 * (s + 3)
        else:
            num = n * (n + w1) * (n + w2) * (n + s)
            den = (2 * n + s - 1) * (2 * n + s) ** 2 * (2 * n + s + 1)
        if den == 0:
            raise ParameterPole(n, "u_n")
        return num / den

    def check_range(self, nmax: int) -> None:
        """Raise :class:`ParameterPole` if any coefficient up to ``nmax`` has a pole."""
        for n in range(nmax + 1):
            self.b(n)
            self.u(n)

    def poly(self, n: int) -> Polynomial:
        with self._lock:
            polys = self._polys
            while len(polys) <= n:
                k = len(polys) - 1
                nxt = Polynomial((-self.b(k), 1)) * polys[k]
                if k >= 1:
                    nxt = nxt - polys[k - 1] * self.u(k)
                polys.append(nxt)
            return polys[n]

    def polys(self, count: int) -> list[Polynomial]:
        self.poly(count - 1)
        return list(self._polys[:count])

    # hypergeometric extras -----------------------------------------------
    def structure(self, n: int) -> tuple[Fraction, Fraction]:
        """``(G_n, E_n)`` in ``x(x-1) P_n' = n P_{n+1} + G_n P_n + E_n P_{n-1}``."""
        if self.case.tag != HYPERGEOMETRIC:
            raise ConfigError("structure relation is only defined for the hypergeometric case")
        if n == 0:
            return Fraction(0), Fraction(0)
        w1, w2, s = self.w1, self.w2, self.s
        den = (s + 2 * n) * (s + 2 * n + 2)
        if den == 0:
            raise ParameterPole(n, "G_n")
        g = n * (w1 - w2) * (s + n + 1) / den
        e = -self.u(n) * (n + s + 1)
        return g, e


def family(case: ClassicalCase) -> tuple[DiffOperator, FamilyData]:
    return case.operator(), FamilyData(case)


def basis_family(basis: BasisSpec) -> FamilyData:
    if basis.kind == "jacobi":
        return FamilyData(ClassicalCase.jacobi(*basis.params))
    if basis.kind == "laguerre":
        return FamilyData(ClassicalCase.laguerre(*basis.params))
    if basis.kind == "hermite":
        return FamilyData(ClassicalCase.hermite())
    raise ConfigError(f"no classical family for basis kind {basis.kind!r}")


def jacobi_poly(data: FamilyData, n: int) -> Polynomial:
    return data.poly(n)


def jacobi_structure(data: FamilyData, n: int) -> tuple[Fraction, Fraction]:
    return data.structure(n)


def structure_residual(data: FamilyData, n: int) -> Polynomial:
    """``x(x-1)P_n' - (n P_{n+1} + G_n P_n + E_n P_{n-1})``; zero when the relation holds."""
    g, e = data.structure(n)
    lhs = Polynomial((0, -1, 1)) * data.poly(n).deriv()
    rhs = data.poly(n + 1) * n + data.poly(n) * g
    if n >= 1:
        rhs = rhs + data.poly(n - 1) * e
    return lhs - rhs


def hypergeometric_series_poly(w1, w2, n: int) -> Polynomial:
    """Monic Jacobi polynomial on [0, 1] from the terminating 2F1 sum.

    ``(-1)^n (w1+1)_n / (w1+w2+n+1)_n * 2F1(-n, n+w1+w2+1; w1+1; x)``.
    """
    w1, w2 = Q(w1), Q(w2)
    s = w1 + w2
    norm = Fraction((-1) ** n) * _poch(w1 + 1, n)
    den = _poch(s + n + 1, n)
    if den == 0:
        raise ParameterPole(n, "2F1 normalization")
    norm /= den
    coeffs = []
    for k in range(n + 1):
        c_den = _poch(w1 + 1, k) * factorial(k)
        if c_den == 0:
            raise ParameterPole(n, "2F1 lower parameter")
        coeffs.append(norm * _poch(Fraction(-n), k) * _poch(n + s + 1, k) / c_den)
    return Polynomial(coeffs)


def _poch(a: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for i in range(k):
        out *= a + i
    return out


def weight_moments(case: ClassicalCase, count: int) -> list[Fraction]:
    """Moments ``int x^k w(x) dx`` (up to a constant) for integer-parameter weights.

    Jacobi ``x^w1 (1-x)^w2`` on [0,1] (w1, w2 nonnegative integers), Laguerre
    ``x^a e^-x`` (a nonnegative integer), Hermite ``e^{-x^2}`` normalized by sqrt(pi).
    """
    if case.tag == HYPERGEOMETRIC:
        w1, w2 = case.omegas
        if w1.denominator != 1 or w2.denominator != 1 or w1 < 0 or w2 < 0:
            raise ConfigError("exact moments need nonnegative integer omegas")
        i1, i2 = int(w1), int(w2)
        return [Fraction(factorial(k + i1) * factorial(i2), factorial(k + i1 + i2 + 1)) for k in range(count)]
    if case.tag == LAGUERRE:
        a = case.a
        if a.denominator != 1 or a < 0:
            raise ConfigError("exact moments need a nonnegative integer a")
        return [Fraction(factorial(k + int(a))) for k in range(count)]
    out = []
    for k in range(count):
        if k % 2:
            out.append(Fraction(0))
        else:
            j = k // 2
            out.append(Fraction(factorial(2 * j), 4**j * factorial(j)))
    return out


def inner_product(p: Polynomial, q: Polynomial, moments: list[Fraction]) -> Fraction:
    prod = p * q
    return sum((c * moments[k] for k, c in enumerate(prod.coeffs)), Fraction(0))


def family_table(case: ClassicalCase, nmax: int) -> list[dict]:
    data = FamilyData(case)
    rows = []
    for n in range(nmax + 1):
        row = {"n": n, "lambda": fmt(data.lam(n)), "b": fmt(data.b(n)), "u": fmt(data.u(n))}
        if case.tag == HYPERGEOMETRIC:
            g, e = data.structure(n)
            row["G"], row["E"] = fmt(g), fmt(e)
        else:
            row["G"] = row["E"] = ""
        rows.append(row)
    return rows


def table_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()
