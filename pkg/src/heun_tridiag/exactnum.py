"""Exact rational helpers and tridiagonal eigensolvers.

Rationals are plain :class:`fractions.Fraction` values.  Floating point only
enters through :func:`tridiag_eigen`, which returns ``numpy`` arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import NonSymmetrizable

Scalar = Fraction | int | float | complex


def Q(value) -> Fraction:
    """Coerce ``value`` (int, Fraction, ``"p/q"`` string) to a Fraction.

    Floats are rejected so that no rounding sneaks into exact code paths.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` or ``"p"`` with integer p and positive integer q."""
    s = text.strip()
    if "/" in s:
        num, den = s.split("/", 1)
        num, den = num.strip(), den.strip()
        if not _is_int(num) or not den.isdigit() or int(den) == 0:
            raise ValueError(f"not a rational p/q with q > 0: {text!r}")
        return Fraction(int(num), int(den))
    if not _is_int(s):
        raise ValueError(f"not a rational p/q: {text!r}")
    return Fraction(int(s))


def _is_int(s: str) -> bool:
    body = s[1:] if s[:1] in "+-" else s
    return body.isdigit()


def fmt(q: Scalar) -> str:
    """Canonical ``"p/q"`` string for an exact value (integers as ``"p/1"``)."""
    if isinstance(q, int) and not isinstance(q, bool):
        q = Fraction(q)
    if isinstance(q, Fraction):
        return f"{q.numerator}/{q.denominator}"
    raise TypeError(f"not exact: {q!r}")


def fmt_approx(v: float | complex) -> str | list[str]:
    """17 significant digits; complex values become ``[re, im]``."""
    if isinstance(v, complex) or np.iscomplexobj(v):
        v = complex(v)
        if v.imag == 0.0:
            return f"{v.real:.17g}"
        return [f"{v.real:.17g}", f"{v.imag:.17g}"]
    return f"{float(v):.17g}"


def is_exact(v) -> bool:
    return isinstance(v, (Fraction, int)) and not isinstance(v, bool)


def rational_sqrt(q: Fraction) -> Fraction | None:
    """Exact square root of a nonnegative rational, or None if irrational."""
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


# ---------------------------------------------------------------------------
# exact linear algebra


@dataclass(frozen=True)
class LinearSolution:
    """Result of :func:`solve_rational`.

    ``solution`` is a particular solution (free variables set to zero) or
    ``None`` when the system is inconsistent; ``inconsistent_row`` is then the
    index of the first equation that cannot be satisfied.
    """

    solution: tuple[Fraction, ...] | None
    rank: int
    nvars: int
    inconsistent_row: int | None = None

    @property
    def unique(self) -> bool:
        return self.solution is not None and self.rank == self.nvars


def solve_rational(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> LinearSolution:
    """Gauss-Jordan elimination over the rationals for ``rows @ c = rhs``."""
    nvars = len(rows[0]) if rows else 0
    aug = [[Fraction(v) for v in r] + [Fraction(b)] for r, b in zip(rows, rhs)]
    origin = list(range(len(aug)))
    pivots: list[int] = []
    r = 0
    for col in range(nvars):
        piv = next((i for i in range(r, len(aug)) if aug[i][col] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        origin[r], origin[piv] = origin[piv], origin[r]
        inv = 1 / aug[r][col]
        aug[r] = [v * inv for v in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        pivots.append(col)
        r += 1
        if r == len(aug):
            break
    for i in range(r, len(aug)):
        if aug[i][-1] != 0:
            return LinearSolution(None, r, nvars, inconsistent_row=origin[i])
    sol = [Fraction(0)] * nvars
    for i, col in enumerate(pivots):
        sol[col] = aug[i][-1]
    return LinearSolution(tuple(sol), r, nvars)


# ---------------------------------------------------------------------------
# tridiagonal matrices


@dataclass(frozen=True)
class TridiagMatrix:
    """Tridiagonal matrix with ``super[k] = A[k, k+1]`` and ``sub[k] = A[k+1, k]``."""

    diag: tuple
    super: tuple = ()
    sub: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "diag", tuple(self.diag))
        object.__setattr__(self, "super", tuple(self.super))
        object.__setattr__(self, "sub", tuple(self.sub))
        n = len(self.diag)
        if n < 1:
            raise ValueError("empty tridiagonal matrix")
        if len(self.super) != n - 1 or len(self.sub) != n - 1:
            raise ValueError("off-diagonals must have length n-1")

    @property
    def size(self) -> int:
        return len(self.diag)

    @property
    def exact(self) -> bool:
        return all(is_exact(v) for v in self.diag + self.super + self.sub)

    def dense(self, dtype=None) -> np.ndarray:
        n = self.size
        if dtype is None:
            dtype = complex if any(isinstance(v, complex) for v in self.diag + self.super + self.sub) else float
        a = np.zeros((n, n), dtype=dtype)
        for k in range(n):
            a[k, k] = self.diag[k]
        for k in range(n - 1):
            a[k, k + 1] = self.super[k]
            a[k + 1, k] = self.sub[k]
        return a

    def rows(self) -> list[list]:
        n = self.size
        out = [[Fraction(0)] * n for _ in range(n)]
        for k in range(n):
            out[k][k] = self.diag[k]
        for k in range(n - 1):
            out[k][k + 1] = self.super[k]
            out[k + 1][k] = self.sub[k]
        return out

    def inf_norm(self) -> float:
        return float(np.max(np.sum(np.abs(self.dense()), axis=1)))


def symmetrize_tridiag(m: TridiagMatrix) -> tuple[TridiagMatrix, tuple]:
    """Diagonal similarity making ``m`` symmetric.

    Returns ``(s, d)`` with ``s = D m D^-1`` for ``D = diag(d)``.  Off-diagonal
    entries of ``s`` are ``sqrt(super[k] * sub[k])``; values stay exact
    whenever the square roots are rational.
    """
    off = []
    scale = [Fraction(1)]
    for k, (a, c) in enumerate(zip(m.super, m.sub)):
        prod = a * c
        if not prod > 0:
            raise NonSymmetrizable(k, prod)
        root = rational_sqrt(prod) if is_exact(prod) else None
        ratio = rational_sqrt(Fraction(a) / Fraction(c)) if is_exact(a) and is_exact(c) else None
        off.append(root if root is not None else math.sqrt(prod))
        # d_{k+1}/d_k = a / sqrt(a c), which carries the sign of a
        step = ratio if ratio is not None else math.sqrt(a / c)
        scale.append(scale[-1] * (step if a > 0 else -step))
    return TridiagMatrix(m.diag, tuple(off), tuple(off)), tuple(scale)


# ---------------------------------------------------------------------------
# characteristic polynomial and root isolation


def charpoly(m: TridiagMatrix) -> list[Fraction]:
    """Coefficients (ascending) of det(t I - m) via the continuant recurrence."""
    prev: list = [Fraction(1)]
    cur: list = [-Fraction(m.diag[0]), Fraction(1)]
    for k in range(1, m.size):
        shifted = [Fraction(0)] + cur
        nxt = [s - m.diag[k] * c for s, c in zip(shifted, cur + [Fraction(0)])]
        pc = m.super[k - 1] * m.sub[k - 1]
        for i, v in enumerate(prev):
            nxt[i] -= pc * v
        prev, cur = cur, nxt
    return cur


def _peval(p: Sequence[Fraction], t: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * t + c
    return acc


def _pderiv(p: Sequence[Fraction]) -> list[Fraction]:
    return [k * p[k] for k in range(1, len(p))]


def _prem(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a = list(a)
    while len(a) >= len(b) and any(a):
        f = a[-1] / b[-1]
        off = len(a) - len(b)
        for i, c in enumerate(b):
            a[off + i] -= f * c
        a.pop()
        while a and a[-1] == 0:
            a.pop()
    return a


def _trim(p: list[Fraction]) -> list[Fraction]:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def squarefree(p: Sequence[Fraction]) -> list[Fraction]:
    """p / gcd(p, p') (exact)."""
    a, b = _trim(list(p)), _trim(_pderiv(p))
    if not b:
        return a
    g, h = a, b
    while h:
        g, h = h, _prem(g, h)
    if len(g) == 1:
        return a
    # exact division a / g
    quo = [Fraction(0)] * (len(a) - len(g) + 1)
    rem = list(a)
    for i in range(len(quo) - 1, -1, -1):
        quo[i] = rem[i + len(g) - 1] / g[-1]
        for j, c in enumerate(g):
            rem[i + j] -= quo[i] * c
    return quo


def sturm_sequence(p: Sequence[Fraction]) -> list[list[Fraction]]:
    seq = [_trim(list(p)), _trim(_pderiv(p))]
    while seq[-1] and len(seq[-1]) > 1:
        r = _prem(seq[-2], seq[-1])
        if not r:
            break
        seq.append([-c for c in r])
    return [s for s in seq if s]


def _sign_changes(seq, t: Fraction) -> int:
    signs = [v for v in (_peval(s, t) for s in seq) if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if (a > 0) != (b > 0))


def isolate_real_roots(p: Sequence[Fraction], tol: Fraction | None = None) -> list[tuple[Fraction, Fraction]]:
    """Disjoint rational intervals ``(lo, hi]``, each holding one distinct real root.

    Uses a Sturm sequence of the square-free part.  With ``tol`` the intervals
    are further bisected (on the square-free part alone) until narrower than ``tol``.
    """
    sf = squarefree(p)
    if len(sf) <= 1:
        return []
    seq = sturm_sequence(sf)
    bound = 1 + max(abs(c / sf[-1]) for c in sf[:-1])
    out: list[tuple[Fraction, Fraction]] = []
    stack = [(-bound, bound)]
    while stack:
        a, b = stack.pop()
        n = _sign_changes(seq, a) - _sign_changes(seq, b)
        if n == 0:
            continue
        if n == 1:
            out.append((a, b))
            continue
        mid = (a + b) / 2
        if _peval(sf, mid) == 0:
            eps = (b - a) / 1024
            out.append((mid - eps, mid))
            stack.append((mid, b))
            stack.append((a, mid - eps))
            continue
        stack.append((mid, b))
        stack.append((a, mid))
    out.sort()
    if tol is not None:
        out = [_narrow(sf, a, b, lambda lo, hi: hi - lo < tol) for a, b in out]
    return out


def _narrow(sf, a: Fraction, b: Fraction, done) -> tuple[Fraction, Fraction]:
    """Bisect ``(a, b]`` holding one simple root of ``sf`` until ``done(a, b)``."""
    fb = _peval(sf, b)
    if fb == 0:
        return b, b
    sb = fb > 0
    while not done(a, b):
        mid = (a + b) / 2
        fm = _peval(sf, mid)
        if fm == 0:
            return mid, mid
        if (fm > 0) == sb:
            b = mid
        else:
            a = mid
    return a, b


def real_roots_float(p: Sequence[Fraction]) -> list[float]:
    """Distinct real roots, each isolated exactly and refined to double precision."""
    sf = squarefree(p)
    out = []
    for a, b in isolate_real_roots(p):
        lo, hi = _narrow(sf, a, b, lambda lo, hi: float(hi - lo) <= 2.0**-54 * max(abs(float(lo)), abs(float(hi)), 2.0**-1000))
        out.append(float((lo + hi) / 2))
    return out


def newton_refine(p: Sequence[Fraction], z: complex | float, steps: int = 2):
    """Exact Newton steps on the square-free part of ``p`` starting from a float root.

    Real starts return a Fraction; complex starts return ``(re, im)`` Fractions
    (Gaussian-rational arithmetic).  Each step roughly doubles the digits.
    """
    sf = squarefree(p)
    dp = _pderiv(sf)
    if not isinstance(z, complex) or z.imag == 0:
        t = Fraction(float(z.real if isinstance(z, complex) else z))
        for _ in range(steps):
            d = _peval(dp, t)
            if d == 0:
                break
            t = t - _peval(sf, t) / d
            t = t.limit_denominator(1 << 400)
        return t
    zr, zi = Fraction(z.real), Fraction(z.imag)
    for _ in range(steps):
        fr, fi = _ceval(sf, zr, zi)
        dr, di = _ceval(dp, zr, zi)
        den = dr * dr + di * di
        if den == 0:
            break
        zr, zi = zr - (fr * dr + fi * di) / den, zi - (fi * dr - fr * di) / den
        zr, zi = zr.limit_denominator(1 << 400), zi.limit_denominator(1 << 400)
    return zr, zi


def _ceval(p, xr: Fraction, xi: Fraction) -> tuple[Fraction, Fraction]:
    ar, ai = Fraction(0), Fraction(0)
    for c in reversed(p):
        ar, ai = ar * xr - ai * xi + c, ar * xi + ai * xr
    return ar, ai


def real_root_count(p: Sequence[Fraction]) -> int:
    sf = squarefree(p)
    if len(sf) <= 1:
        return 0
    seq = sturm_sequence(sf)
    bound = 1 + max(abs(c / sf[-1]) for c in sf[:-1])
    return _sign_changes(seq, -bound) - _sign_changes(seq, bound)


# ---------------------------------------------------------------------------
# eigensolver


@dataclass
class EigenResult:
    """Eigenpairs of a tridiagonal matrix.

    ``vectors[:, i]`` belongs to ``values[i]``.  ``method`` is ``"symmetric"``
    or ``"charpoly"``; ``multiplicities`` lists repeated eigenvalues (flagged,
    not hidden); ``residuals[i]`` is the relative residual of pair ``i``.
    """

    values: np.ndarray
    vectors: np.ndarray
    method: str
    residuals: np.ndarray
    multiplicities: dict = field(default_factory=dict)
    conversions: list = field(default_factory=list)

    @property
    def degenerate(self) -> bool:
        return bool(self.multiplicities)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)


def _sort_key(z) -> tuple[float, float]:
    z = complex(z)
    return (z.real, z.imag)


def tridiag_eigen(m: TridiagMatrix, rtol: float = 1e-10) -> EigenResult:
    """Eigenvalues (ascending real part, then imaginary) and eigenvectors.

    Symmetrizable matrices go through ``scipy.linalg.eigh_tridiagonal``;
    otherwise the exact characteristic polynomial is formed and real roots are
    isolated by Sturm bisection, complex ones taken from its companion matrix.
    """
    n = m.size
    conversions = []
    dense = m.dense()
    try:
        sym, scale = symmetrize_tridiag(m)
    except NonSymmetrizable:
        sym = None
    if sym is not None:
        d = np.array([float(v) for v in sym.diag])
        e = np.array([float(v) for v in sym.super])
        if n == 1:
            vals, svecs = d.copy(), np.ones((1, 1))
        else:
            vals, svecs = eigh_tridiagonal(d, e)
        dvec = np.array([float(s) for s in scale])
        # s = D m D^-1  =>  m (D^-1 y) = lam D^-1 y
        vecs = svecs / dvec[:, None]
        method = "symmetric"
        conversions.append("symmetrized matrix converted to float64")
    else:
        if not m.exact:
            raise NonSymmetrizable(-1, None)
        vals, vecs = _charpoly_eigen(m)
        method = "charpoly"
        conversions.append("characteristic-polynomial roots refined to float64")
    order = sorted(range(n), key=lambda i: _sort_key(vals[i]))
    vals = np.asarray(vals)[order]
    vecs = np.asarray(vecs)[:, order]
    if np.iscomplexobj(vals) and np.all(np.abs(np.imag(vals)) == 0):
        vals = np.real(vals)
        vecs = np.real(vecs)
    mult = _multiplicities(vals, m)
    norm = max(float(np.max(np.sum(np.abs(dense), axis=1))), np.finfo(float).tiny)
    res = np.empty(n)
    for i in range(n):
        v = vecs[:, i]
        r = dense @ v - vals[i] * v
        res[i] = np.max(np.abs(r)) / (norm * max(np.max(np.abs(v)), np.finfo(float).tiny))
    return EigenResult(vals, vecs, method, res, mult, conversions)


def _multiplicities(vals: np.ndarray, m: TridiagMatrix) -> dict:
    if m.exact and m.size > 1:
        p = charpoly(m)
        if len(squarefree(p)) == len(p):
            return {}
    out: dict = {}
    scale = max(1.0, float(np.max(np.abs(vals))))
    i = 0
    while i < len(vals):
        j = i
        while j + 1 < len(vals) and abs(vals[j + 1] - vals[i]) <= 1e-9 * scale:
            j += 1
        if j > i:
            out[i] = j - i + 1
        i = j + 1
    return out


def _charpoly_eigen(m: TridiagMatrix) -> tuple[np.ndarray, np.ndarray]:
    n = m.size
    p = charpoly(m)
    real_roots = real_roots_float(p)
    coeffs = np.array([float(c) for c in reversed(p)])
    allroots = np.roots(coeffs) if n > 1 else np.array([float(m.diag[0])])
    complex_roots = [complex(z) for z in allroots if abs(z.imag) > 1e-12 * max(1.0, abs(z))]
    # repeated real roots: each float root of the full polynomial is snapped to the nearest isolated one
    real_full = [z.real for z in allroots if abs(z.imag) <= 1e-12 * max(1.0, abs(z))]
    reals = [min(real_roots, key=lambda r: abs(r - z)) if real_roots else z for z in sorted(real_full)]
    exact = {r: newton_refine(p, r, steps=3) for r in set(reals)}
    polished = []
    for z in complex_roots:
        zr, zi = newton_refine(p, z, steps=3)
        polished.append(((zr, zi), complex(float(zr), float(zi))))
    vals = np.array([float(exact[r]) for r in reals] + [c for _, c in polished], dtype=complex if complex_roots else float)
    targets = [(exact[r], Fraction(0)) for r in reals] + [e for e, _ in polished]
    vecs = np.zeros((n, n), dtype=complex)
    for i, (lam, target) in enumerate(zip(vals, targets)):
        v = _recurrence_vector(m, target)
        if v is None:
            _, _, vh = np.linalg.svd(m.dense(complex) - lam * np.eye(n))
            v = vh[-1].conj()
        vecs[:, i] = v / v[np.argmax(np.abs(v))]
    if not complex_roots:
        vecs = np.real(vecs)
    return vals, vecs


def _recurrence_vector(m: TridiagMatrix, lam: tuple[Fraction, Fraction]) -> np.ndarray | None:
    """Eigenvector from the rows of ``(m - lam) v = 0`` run as a three-term recurrence.

    Evaluated in exact Gaussian-rational arithmetic at a polished eigenvalue,
    which avoids the cancellation a float recurrence would suffer.  Returns
    None when an off-diagonal in the needed direction vanishes.
    """
    n = m.size
    lr, li = lam
    forward = all(v != 0 for v in m.super)
    if not forward and not all(v != 0 for v in m.sub):
        return None
    re = [Fraction(0)] * n
    im = [Fraction(0)] * n
    if forward:
        re[0] = Fraction(1)
        for k in range(n - 1):
            d = m.diag[k]
            pr = m.sub[k - 1] * re[k - 1] if k else 0
            pi = m.sub[k - 1] * im[k - 1] if k else 0
            re[k + 1] = ((lr - d) * re[k] - li * im[k] - pr) / m.super[k]
            im[k + 1] = ((lr - d) * im[k] + li * re[k] - pi) / m.super[k]
    else:
        re[-1] = Fraction(1)
        for k in range(n - 1, 0, -1):
            d = m.diag[k]
            nr = m.super[k] * re[k + 1] if k + 1 < n else 0
            ni = m.super[k] * im[k + 1] if k + 1 < n else 0
            re[k - 1] = ((lr - d) * re[k] - li * im[k] - nr) / m.sub[k - 1]
            im[k - 1] = ((lr - d) * im[k] + li * re[k] - ni) / m.sub[k - 1]
    big = max(max(abs(x) for x in re), max(abs(x) for x in im))
    if big == 0:
        return None
    return np.array([complex(float(r / big), float(i / big)) for r, i in zip(re, im)])


def fit_linear(blocks, nvars: int) -> tuple[LinearSolution, list]:
    """Solve for unknowns ``c`` so that every block satisfies ``target = sum c_i column_i``.

    ``blocks`` is a sequence of ``(target, columns)`` where ``target`` is a
    sparse vector ``{key: value}`` and ``columns`` maps an unknown's index to its
    sparse vector.  Unknowns may be shared between blocks.  Returns the
    :class:`LinearSolution` and the ``(block, key)`` label of every equation
    so an inconsistent row can be reported by name.
    """
    labels: list = []
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for b, (target, columns) in enumerate(blocks):
        keys = set(target)
        for vec in columns.values():
            keys.update(vec)
        for key in sorted(keys):
            row = [Fraction(0)] * nvars
            for i, vec in columns.items():
                row[i] += vec.get(key, 0)
            labels.append((b, key))
            rows.append(row)
            rhs.append(Fraction(target.get(key, 0)))
    if not rows:
        return LinearSolution(tuple([Fraction(0)] * nvars), 0, nvars), labels
    return solve_rational(rows, rhs), labels


class QMatrix:
    """Small dense matrix over exact scalars with the operator-style interface
    (``*`` for products, ``+``/``-``, scalar scaling, ``terms()``) used by the
    structure-constant fitter."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        self.rows = tuple(tuple(r) for r in rows)

    @classmethod
    def identity(cls, n: int, c=1) -> "QMatrix":
        return cls([[Fraction(c) if i == j else Fraction(0) for j in range(n)] for i in range(n)])

    @property
    def n(self) -> int:
        return len(self.rows)

    def __add__(self, other):
        if not isinstance(other, QMatrix):
            other = QMatrix.identity(self.n, other)
        return QMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    __radd__ = __add__

    def __neg__(self):
        return QMatrix([[-a for a in r] for r in self.rows])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, QMatrix):
            cols = list(zip(*other.rows))
            return QMatrix([[sum((a * b for a, b in zip(r, c) if a and b), Fraction(0)) for c in cols] for r in self.rows])
        return QMatrix([[a * other for a in r] for r in self.rows])

    def __rmul__(self, other):
        return self * other

    def __eq__(self, other):
        return isinstance(other, QMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def is_zero(self) -> bool:
        return all(a == 0 for r in self.rows for a in r)

    def terms(self) -> dict:
        return {(i, j): a for i, r in enumerate(self.rows) for j, a in enumerate(r) if a != 0}

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(a) for a in r] for r in self.rows])
