"""Polynomials and polynomial-coefficient differential operators.

A :class:`DiffOperator` is stored in normal order, ``sum_k c_k(x) d^k/dx^k``
with every derivative to the right, so two operators are equal exactly when
their coefficient polynomials are.  Coefficients may be any Python numbers;
exact work uses :class:`fractions.Fraction` throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

from .errors import SpaceNotPreserved
from .exactnum import fmt, parse_rational


def _trimmed(coeffs: Iterable) -> tuple:
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


class Polynomial:
    """Univariate polynomial, ``coeffs[k]`` multiplying ``x**k``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        self.coeffs = _trimmed(coeffs)

    # constructors
    @classmethod
    def const(cls, c) -> "Polynomial":
        return cls((c,))

    @classmethod
    def monomial(cls, k: int, c=1) -> "Polynomial":
        return cls((0,) * k + (c,))

    @classmethod
    def from_roots(cls, roots: Iterable, lead=1) -> "Polynomial":
        p = cls.const(lead)
        for r in roots:
            p = p * cls((-r, 1))
        return p

    @property
    def degree(self) -> int:
        """Degree, with -1 standing in for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, k: int):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    @property
    def lead(self):
        return self.coeffs[-1] if self.coeffs else 0

    def __call__(self, t):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def deriv(self, k: int = 1) -> "Polynomial":
        c = self.coeffs
        for _ in range(k):
            c = tuple(i * c[i] for i in range(1, len(c)))
        return Polynomial(c)

    def __add__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.const(other)
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return Polynomial((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            a, b = self.coeffs, other.coeffs
            if not a or not b:
                return Polynomial()
            out = [0] * (len(a) + len(b) - 1)
            for i, x in enumerate(a):
                if x == 0:
                    continue
                for j, y in enumerate(b):
                    out[i + j] += x * y
            return Polynomial(out)
        if isinstance(other, DiffOperator):
            return NotImplemented
        return Polynomial(c * other for c in self.coeffs)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Polynomial(c / scalar for c in self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            if isinstance(other, (int, Fraction, float)):
                other = Polynomial.const(other)
            else:
                return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def max_abs(self) -> float:
        return max((abs(complex(c)) for c in self.coeffs), default=0.0)

    def __repr__(self):
        if not self.coeffs:
            return "Polynomial(0)"
        return f"Polynomial({list(map(str, self.coeffs))})"


X_POLY = Polynomial((0, 1))


class DiffOperator:
    """Normal-ordered operator ``sum_k coeffs[k](x) * (d/dx)**k``.

    ``a * b`` composes two operators (``b`` acts first); with a scalar or a
    :class:`Polynomial` on the left it multiplies every coefficient.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [c if isinstance(c, Polynomial) else Polynomial.const(c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def identity(cls, c=1) -> "DiffOperator":
        return cls((Polynomial.const(c),))

    @classmethod
    def multiplication(cls, p: Polynomial) -> "DiffOperator":
        return cls((p,))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, k: int) -> Polynomial:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Polynomial()

    def is_zero(self) -> bool:
        return not self.coeffs

    def apply(self, p: Polynomial) -> Polynomial:
        out = Polynomial()
        d = p
        for c in self.coeffs:
            if d.is_zero():
                break
            if not c.is_zero():
                out = out + c * d
            d = d.deriv()
        return out

    __call__ = apply

    def compose(self, other: "DiffOperator") -> "DiffOperator":
        """``self o other`` by the Leibniz rule ``d^i f = sum C(i,k) f^(k) d^(i-k)``."""
        if self.is_zero() or other.is_zero():
            return DiffOperator()
        out: list[Polynomial] = [Polynomial()] * (self.order + other.order + 1)
        for j, b in enumerate(other.coeffs):
            if b.is_zero():
                continue
            derivs = [b]
            for _ in range(self.order):
                derivs.append(derivs[-1].deriv())
            for i, a in enumerate(self.coeffs):
                if a.is_zero():
                    continue
                for k in range(i + 1):
                    bk = derivs[k]
                    if bk.is_zero():
                        break
                    out[i + j - k] = out[i + j - k] + (a * bk) * comb(i, k)
        return DiffOperator(out)

    def __add__(self, other):
        if not isinstance(other, DiffOperator):
            other = DiffOperator.identity(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return DiffOperator(self.coeff(k) + other.coeff(k) for k in range(n))

    __radd__ = __add__

    def __neg__(self):
        return DiffOperator(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, DiffOperator):
            return self.compose(other)
        if isinstance(other, Polynomial):
            return self.compose(DiffOperator.multiplication(other))
        return DiffOperator(c * other for c in self.coeffs)

    def __rmul__(self, other):
        if isinstance(other, Polynomial):
            return DiffOperator(other * c for c in self.coeffs)
        return DiffOperator(c * other for c in self.coeffs)

    def __pow__(self, n: int):
        out = DiffOperator.identity()
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, DiffOperator):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def max_abs(self) -> float:
        return max((c.max_abs() for c in self.coeffs), default=0.0)

    def close_to(self, other: "DiffOperator", tol: float) -> bool:
        """Approximate equality for float-valued sweeps only."""
        return (self - other).max_abs() <= tol

    def terms(self) -> dict[tuple[int, int], object]:
        """Nonzero coefficients keyed by ``(derivative order, power of x)``."""
        return {(k, j): v for k, c in enumerate(self.coeffs) for j, v in enumerate(c.coeffs) if v != 0}

    def __repr__(self):
        if not self.coeffs:
            return "DiffOperator(0)"
        return "DiffOperator(" + " + ".join(f"({c!r})*D^{k}" for k, c in enumerate(self.coeffs) if not c.is_zero()) + ")"

    def pretty(self, var: str = "x") -> str:
        parts = []
        for k, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            poly = poly_str(c, var)
            d = "" if k == 0 else ("∂" if k == 1 else f"∂^{k}")
            parts.append(f"({poly}){d}" if d else f"({poly})")
        return " + ".join(parts) if parts else "0"


def poly_str(p: Polynomial, var: str = "x") -> str:
    terms = []
    for j, c in enumerate(p.coeffs):
        if c == 0:
            continue
        s = str(c)
        terms.append(s if j == 0 else f"{s}*{var}" if j == 1 else f"{s}*{var}^{j}")
    return " + ".join(terms) if terms else "0"


X = DiffOperator.multiplication(X_POLY)
D = DiffOperator((Polynomial(), Polynomial.const(1)))
ID = DiffOperator.identity()


def op_apply(op: DiffOperator, p: Polynomial) -> Polynomial:
    return op.apply(p)


def op_compose(a: DiffOperator, b: DiffOperator) -> DiffOperator:
    return a.compose(b)


def commutator(a: DiffOperator, b: DiffOperator) -> DiffOperator:
    return a * b - b * a


def anticommutator(a: DiffOperator, b: DiffOperator) -> DiffOperator:
    return a * b + b * a


def second_order(c2: Sequence, c1: Sequence, c0: Sequence) -> DiffOperator:
    """Shorthand for ``c2(x) d^2 + c1(x) d + c0(x)`` from ascending coefficient lists."""
    return DiffOperator((Polynomial(c0), Polynomial(c1), Polynomial(c2)))


# ---------------------------------------------------------------------------
# bases and matrix representations


@dataclass(frozen=True)
class BasisSpec:
    """Monic polynomial basis of degrees ``0..size-1``.

    ``kind`` is ``"monomial"``, ``"jacobi"`` (``params = (w1, w2)``),
    ``"laguerre"`` (``params = (a,)``) or ``"hermite"``.
    """

    kind: str
    size: int
    params: tuple = ()

    def polynomials(self) -> list[Polynomial]:
        if self.kind == "monomial":
            return [Polynomial.monomial(k) for k in range(self.size)]
        from .classical import basis_family

        fam = basis_family(self)
        return [fam.poly(n) for n in range(self.size)]


def expand_in_basis(p: Polynomial, polys: Sequence[Polynomial]) -> list:
    """Coefficients ``c`` with ``p = sum c[n] polys[n]`` for a monic graded basis."""
    if p.degree >= len(polys):
        raise SpaceNotPreserved(-1, p.degree)
    out = [0] * len(polys)
    rem = p
    for d in range(p.degree, -1, -1):
        c = rem.coeff(d)
        if c != 0:
            c = c / polys[d].lead if polys[d].lead != 1 else c
            out[d] = c
            rem = rem - polys[d] * c
    return [Fraction(c) if isinstance(c, int) else c for c in out]


def op_matrix(op: DiffOperator, basis: BasisSpec, polys: Sequence[Polynomial] | None = None, ncols: int | None = None) -> list[list]:
    """Matrix of ``op`` on ``basis``: column ``n`` expands ``op(basis[n])``.

    With ``ncols`` only the first ``ncols`` basis elements are mapped, giving a
    rectangular ``size x ncols`` matrix (e.g. images of ``P_0..P_N`` in
    ``P_0..P_{N+1}``).  Raises :class:`SpaceNotPreserved` when some image
    leaves the span.
    """
    polys = list(polys) if polys is not None else basis.polynomials()
    size = len(polys)
    ncols = size if ncols is None else ncols
    cols = []
    for n, p in enumerate(polys[:ncols]):
        img = op.apply(p)
        if img.degree >= size:
            raise SpaceNotPreserved(n, img.degree)
        cols.append(expand_in_basis(img, polys))
    return [[cols[j][i] for j in range(ncols)] for i in range(size)]


def to_monomial_matrix(basis: BasisSpec) -> list[list]:
    """Row ``n`` holds the monomial coefficients of basis element ``n`` (unit lower-triangular)."""
    polys = basis.polynomials()
    return [[p.coeff(k) for k in range(basis.size)] for p in polys]


def from_monomial_matrix(basis: BasisSpec) -> list[list]:
    """Row ``k`` expands ``x**k`` in ``basis`` (unit lower-triangular)."""
    polys = basis.polynomials()
    return [expand_in_basis(Polynomial.monomial(k), polys) for k in range(basis.size)]


def to_monomial(vec: Sequence, basis: BasisSpec) -> list:
    """Monomial coefficients of ``sum vec[n] basis[n]``."""
    p = Polynomial()
    for c, b in zip(vec, basis.polynomials()):
        p = p + b * c
    return [p.coeff(k) for k in range(basis.size)]


def from_monomial(vec: Sequence, basis: BasisSpec) -> list:
    return expand_in_basis(Polynomial(vec), basis.polynomials())


# ---------------------------------------------------------------------------
# JSON


def poly_to_json(p: Polynomial) -> list[str]:
    return [fmt(c) for c in p.coeffs]


def poly_from_json(data: Sequence[str]) -> Polynomial:
    return Polynomial(parse_rational(s) for s in data)


def operator_to_json(op: DiffOperator) -> dict:
    """``{"order": k, "coeffs": [[p/q, ...] per derivative order]}``, ascending powers."""
    return {"order": op.order, "coeffs": [poly_to_json(c) for c in op.coeffs]}


def operator_from_json(data: dict) -> DiffOperator:
    return DiffOperator(poly_from_json(c) for c in data["coeffs"])


def matrix_to_json(m: Sequence[Sequence]) -> list[list[str]]:
    return [[fmt(v) for v in row] for row in m]


def matrix_from_json(data) -> list[list[Fraction]]:
    return [[parse_rational(v) for v in row] for row in data]
