"""The quadratic algebra generated by ``L``, ``M`` and ``Z = [L, M]``.

    [M, Z] = a1 {L, M} + a2 M^2 + g1 L + d M + k L^2 + e1
    [Z, L] = a2 {L, M} + a1 L^2 + g2 M + d L + e2

With ``k = 0`` these are the Racah algebra relations.  Everything here is
checked as an exact identity between normal-ordered operators (or exact
matrices, for finite realizations).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction

from .classical import HERMITE, HYPERGEOMETRIC, LAGUERRE
from .exactnum import fit_linear, fmt, rational_sqrt
from .report import VerificationReport
from .tridiag import TridiagConfig, build_M
from .weylops import ID, DiffOperator, Polynomial, anticommutator, commutator, operator_to_json

NAMES = ("alpha1", "alpha2", "gamma1", "gamma2", "delta", "eps1", "eps2", "kappa")


@dataclass(frozen=True)
class StructureConstants:
    alpha1: Fraction
    alpha2: Fraction
    gamma1: Fraction
    gamma2: Fraction
    delta: Fraction
    eps1: Fraction
    eps2: Fraction
    kappa: Fraction

    @property
    def racah_type(self) -> bool:
        return self.kappa == 0

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, n) for n in NAMES)

    def replace(self, **kw) -> "StructureConstants":
        d = asdict(self)
        d.update(kw)
        return StructureConstants(**d)

    def to_json(self) -> dict:
        return {n: fmt(getattr(self, n)) for n in NAMES}


def structure_constants(cfg: TridiagConfig) -> StructureConstants:
    """Closed-form structure constants of ``(L, M)`` for each classical case."""
    t1, t2, t3, t4 = cfg.tau1, cfg.tau2, cfg.tau3, cfg.tau4
    case = cfg.case
    if case.tag == HYPERGEOMETRIC:
        n1, n2 = case.nu1, case.nu2
        return StructureConstants(
            alpha1=-4 * t4 - 2,
            alpha2=Fraction(2),
            gamma1=4 * (t1 * t2 + t3 * t4) + t4 * (n1 + 2) * (2 * n2 - t4 * n1) + n2 * (2 - n2),
            gamma2=-2 * n1 - n1 * n1,
            delta=-2 * t3 + (n1 + 2) * (t4 * n1 - n2),
            eps1=2 * t1 * t2 * n2 * (n1 + n2) + t3 * n2 * (t4 * (n1 + 2) + 2 - n2),
            eps2=-t3 * n2 * (n1 + 2),
            kappa=6 * t4 * (t4 + 1),
        )
    if case.tag == LAGUERRE:
        a = case.a
        return StructureConstants(
            alpha1=Fraction(-2),
            alpha2=Fraction(0),
            gamma1=4 * t1 * t2 + t4 * (4 * t3 - t4 - 2 * a - 2) + 1 - a * a,
            gamma2=Fraction(-1),
            delta=a + 1 - 2 * t3 + t4,
            eps1=(a + 1) * (t3 * (1 - a - t4) - 2 * t1 * t2),
            eps2=(a + 1) * t3,
            kappa=6 * t4,
        )
    return StructureConstants(
        alpha1=Fraction(0),
        alpha2=Fraction(0),
        gamma1=4 * (1 - 2 * t3 - t4 * t4),
        gamma2=Fraction(-4),
        delta=4 * t4,
        eps1=2 * t3 * (2 - t3) - 8 * t1 * t2,
        eps2=Fraction(0),
        kappa=Fraction(-6),
    )


# ---------------------------------------------------------------------------
# relations


def relation_sides(L, M, sc: StructureConstants, one):
    """``((lhs1, rhs1), (lhs2, rhs2))`` for any realization supporting ``*`` and ``+``."""
    Z = L * M - M * L
    LM = L * M + M * L
    lhs1 = M * Z - Z * M
    rhs1 = LM * sc.alpha1 + M * M * sc.alpha2 + L * sc.gamma1 + M * sc.delta + L * L * sc.kappa + one * sc.eps1
    lhs2 = Z * L - L * Z
    rhs2 = LM * sc.alpha2 + L * L * sc.alpha1 + M * sc.gamma2 + L * sc.delta + one * sc.eps2
    return (lhs1, rhs1), (lhs2, rhs2)


def verify_algebra(
    cfg: TridiagConfig, probe_degree: int = 10, sc: StructureConstants | None = None
) -> VerificationReport:
    """Check the defining relations exactly, by coefficients and on ``x^0..x^D``.

    Residuals are reported as ``lhs - rhs`` operators.
    """
    if probe_degree < 8:
        raise ValueError("probe degree must be at least 8")
    sc = structure_constants(cfg) if sc is None else sc
    L = cfg.case.operator()
    M = build_M(cfg)
    Z = commutator(L, M)
    rep = VerificationReport("racah-heun-algebra")
    rep.add("[L,M]=Z", Z.order <= 3, order=Z.order)
    probes = [Polynomial.monomial(k) for k in range(probe_degree + 1)]
    for label, (lhs, rhs) in zip(("[M,Z]", "[Z,L]"), relation_sides(L, M, sc, ID)):
        res = lhs - rhs
        coeff_ok = res.is_zero()
        probe_ok = all(res.apply(p).is_zero() for p in probes)
        rep.add(
            label,
            coeff_ok and probe_ok,
            coefficients=coeff_ok,
            probes=probe_ok,
            residual=None if coeff_ok else operator_to_json(res),
        )
    return rep


def jacobi_identity(L, M) -> bool:
    Z = commutator(L, M)
    total = commutator(L, commutator(M, Z)) + commutator(M, commutator(Z, L)) + commutator(Z, commutator(L, M))
    return total.is_zero()


@dataclass(frozen=True)
class FitResult:
    """Structure constants solved from the relations; ``constants`` is None if inconsistent."""

    constants: StructureConstants | None
    unique: bool
    rank: int
    violated: tuple | None = None

    def to_json(self) -> dict:
        return {
            "constants": None if self.constants is None else self.constants.to_json(),
            "unique": self.unique,
            "rank": self.rank,
            "violated": None if self.violated is None else [str(v) for v in self.violated],
        }


def fit_structure_constants(L, M, one) -> FitResult:
    """Solve both relations jointly for ``(a1, a2, g1, g2, d, e1, e2, k)``.

    ``L``, ``M`` may be :class:`DiffOperator` (``one = ID``) or
    :class:`~heun_tridiag.exactnum.QMatrix` (``one`` = identity matrix).
    """
    Z = L * M - M * L
    LM, MM, LL = L * M + M * L, M * M, L * L
    t = lambda op: op.terms()  # noqa: E731
    block1 = (t(M * Z - Z * M), {0: t(LM), 1: t(MM), 2: t(L), 4: t(M), 7: t(LL), 5: t(one)})
    block2 = (t(Z * L - L * Z), {1: t(LM), 0: t(LL), 3: t(M), 4: t(L), 6: t(one)})
    sol, labels = fit_linear([block1, block2], len(NAMES))
    if sol.solution is None:
        b, key = labels[sol.inconsistent_row]
        return FitResult(None, False, sol.rank, (("[M,Z]", "[Z,L]")[b], key))
    return FitResult(StructureConstants(*sol.solution), sol.unique, sol.rank)


# ---------------------------------------------------------------------------
# Casimir


def casimir_value_formula(cfg: TridiagConfig) -> Fraction:
    """Scalar value of the Casimir in the differential realization (hypergeometric case)."""
    t1, t2, t3, t4 = cfg.tau1, cfg.tau2, cfg.tau3, cfg.tau4
    n1, n2 = cfg.case.nu1, cfg.case.nu2
    return -2 * n2 * t1 * t2 * (2 + n1) * (n1 + n2) - n2 * t3 * ((2 - n2) * t3 + 2 * (2 + n1) * (t4 + 1))


def casimir_operator(L: DiffOperator, M: DiffOperator, sc: StructureConstants) -> tuple[DiffOperator, DiffOperator]:
    """``(Q0, Q1)``: the Racah-algebra Casimir and its ``k``-proportional correction."""
    a1, a2, g1, g2, d, e1, e2, k = sc.as_tuple()
    Z = commutator(L, M)
    L2, M2 = L * L, M * M
    q0 = (
        Z * Z
        + anticommutator(L2, M) * a1
        + anticommutator(M2, L) * a2
        + L2 * (a1 * a1 + g1)
        + M2 * (a2 * a2 + g2)
        + anticommutator(L, M) * (d + a1 * a2)
        + L * (a1 * d + 2 * e1)
        + M * (a2 * d + 2 * e2)
    )
    q1 = (L2 * L * 2 - L2 * a2 - L * g2) * (k / 3)
    return q0, q1


@dataclass
class CasimirValue:
    q: Fraction | None  # constant from the closed-form value (hypergeometric only)
    observed: Fraction | None  # constant read off the assembled operator, if it is scalar
    Q: DiffOperator
    Q1: DiffOperator
    report: VerificationReport

    def to_json(self) -> dict:
        return {
            "q": None if self.q is None else fmt(self.q),
            "observed": None if self.observed is None else fmt(self.observed),
            "Q1_is_zero": self.Q1.is_zero(),
            "report": self.report.to_json(),
        }


def casimir(cfg: TridiagConfig, probe_degree: int = 10) -> CasimirValue:
    """Assemble ``Q = Q0 + Q1`` and check that it commutes with ``L``, ``M`` and is scalar."""
    L = cfg.case.operator()
    M = build_M(cfg)
    sc = structure_constants(cfg)
    q0, q1 = casimir_operator(L, M, sc)
    Q = q0 + q1
    rep = VerificationReport("casimir")
    rep.add("[Q,L]=0", commutator(Q, L).is_zero())
    rep.add("[Q,M]=0", commutator(Q, M).is_zero())
    observed = Q.coeff(0).coeff(0) if Q.order <= 0 and Q.coeff(0).degree <= 0 else None
    rep.add("Q scalar", observed is not None, order=Q.order)
    # independent route: Q x^k / x^k must be the same constant for every probe
    values = set()
    for k in range(probe_degree + 1):
        img = Q.apply(Polynomial.monomial(k))
        ratio = img.coeff(k) if img == Polynomial.monomial(k, img.coeff(k)) else None
        values.add(ratio)
    probe_const = next(iter(values)) if len(values) == 1 and None not in values else None
    rep.add("probe constant", probe_const is not None and probe_const == observed, value=None if probe_const is None else fmt(probe_const))
    q = None
    if cfg.case.tag == HYPERGEOMETRIC:
        q = casimir_value_formula(cfg)
        rep.add("Q=q", observed == q, q=fmt(q), observed=None if observed is None else fmt(observed))
    else:
        rep.skip("Q=q", reason=f"no closed-form value for the {cfg.case.tag} case", observed=None if observed is None else fmt(observed))
    return CasimirValue(q, observed, Q, q1, rep)


# ---------------------------------------------------------------------------
# reduction K = M - rho L


@dataclass
class Reduction:
    rho: Fraction
    K: object
    fit: FitResult

    def to_json(self) -> dict:
        out = {"rho": fmt(self.rho), "fit": self.fit.to_json()}
        if isinstance(self.K, DiffOperator):
            out["K"] = operator_to_json(self.K)
        return out


@dataclass
class RacahReduction:
    """Outcome of eliminating the ``k L^2`` term.

    ``status`` is ``"rational"`` (exact reductions performed), ``"real-irrational"``
    (real roots, reported as floats), ``"complex"`` (``3 a1^2 - 4 a2 k < 0``: no
    real ``rho``) or ``"unavailable"`` (``a1 = a2 = 0`` with ``k != 0``).
    """

    status: str
    roots: tuple
    discriminant: Fraction | None
    reductions: list

    @property
    def quadratic(self) -> tuple:
        return self._quad

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "roots": [fmt(r) if isinstance(r, Fraction) else repr(r) for r in self.roots],
            "discriminant": None if self.discriminant is None else fmt(self.discriminant),
            "reductions": [r.to_json() for r in self.reductions],
        }


def rho_roots(sc: StructureConstants) -> tuple[str, tuple, Fraction | None]:
    """Roots of ``3 a2 rho^2 + 3 a1 rho + k = 0`` and the reality discriminant ``3 a1^2 - 4 a2 k``."""
    a1, a2, k = sc.alpha1, sc.alpha2, sc.kappa
    if a2 == 0:
        if a1 == 0:
            return ("rational", (Fraction(0),), None) if k == 0 else ("unavailable", (), None)
        return "rational", (-k / (3 * a1),), None
    disc = 3 * a1 * a1 - 4 * a2 * k
    if disc < 0:
        return "complex", (), disc
    full = 9 * a1 * a1 - 12 * a2 * k  # = 3 * disc
    r = rational_sqrt(full)
    if r is not None:
        roots = sorted({(-3 * a1 - r) / (6 * a2), (-3 * a1 + r) / (6 * a2)})
        return "rational", tuple(roots), disc
    s = float(full) ** 0.5
    return "real-irrational", ((-3 * float(a1) - s) / (6 * float(a2)), (-3 * float(a1) + s) / (6 * float(a2))), disc


def racah_reduction(sc: StructureConstants, M, L, one=ID) -> RacahReduction:
    """Form ``K = M - rho L`` for each rational root and re-fit the ``(L, K)`` constants."""
    status, roots, disc = rho_roots(sc)
    reductions = []
    if status == "rational":
        for rho in roots:
            K = M - L * rho
            reductions.append(Reduction(rho, K, fit_structure_constants(L, K, one)))
    return RacahReduction(status, roots, disc, reductions)


def verify_reduction(cfg: TridiagConfig) -> VerificationReport:
    L = cfg.case.operator()
    M = build_M(cfg)
    red = racah_reduction(structure_constants(cfg), M, L)
    rep = VerificationReport("racah-reduction")
    if red.status != "rational":
        rep.skip("kappa'=0", status=red.status, roots=[repr(r) for r in red.roots])
        return rep
    for r in red.reductions:
        c = r.fit.constants
        ok = c is not None and r.fit.unique and c.kappa == 0
        rep.add(f"rho={fmt(r.rho)}", ok, fit=r.fit.to_json())
    return rep
