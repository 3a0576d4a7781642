"""Intermediate Casimir operators of three coupled su(1,1) representations, one-variable realization."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .classical import ClassicalCase
from .errors import FitInconsistent, HeunTridiagError, SpaceNotPreserved
from .exactnum import Q, QMatrix, fmt
from .report import VerificationReport
from .rhalgebra import FitResult, fit_structure_constants
from .tridiag import recover_taus
from .weylops import ID, BasisSpec, DiffOperator, op_matrix, operator_to_json, second_order


@dataclass(frozen=True)
class Su11Config:
    sigma1: Fraction
    sigma2: Fraction
    sigma3: Fraction
    N: int
    beta: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("sigma1", "sigma2", "sigma3", "beta"):
            object.__setattr__(self, name, Q(getattr(self, name)))
        if int(self.N) != self.N or self.N < 0:
            raise ValueError("N must be a nonnegative integer")

    @property
    def sigma4(self) -> Fraction:
        return self.N + self.sigma1 + self.sigma2 + self.sigma3

    def casimirs(self) -> tuple[Fraction, Fraction, Fraction]:
        return tuple(s * (s - 1) for s in (self.sigma1, self.sigma2, self.sigma3))

    @property
    def total(self) -> Fraction:
        """``C12 + C23 + C31 = s4(s4 - 1) + sum s_i(s_i - 1)``."""
        s4 = self.sigma4
        return s4 * (s4 - 1) + sum(self.casimirs())

    def to_json(self) -> dict:
        return {
            "sigma": [fmt(self.sigma1), fmt(self.sigma2), fmt(self.sigma3)],
            "N": self.N,
            "beta": fmt(self.beta),
            "sigma4": fmt(self.sigma4),
        }


def casimir_ops(cfg: Su11Config) -> tuple[DiffOperator, DiffOperator, DiffOperator]:
    """``(C12, C23, C31)``; the zeroth-order term of ``C31`` uses ``2 N s1 (1 - x)``."""
    N, s1, s2, s3 = cfg.N, cfg.sigma1, cfg.sigma2, cfg.sigma3
    c12 = second_order(
        (0, 0, 1, -1),
        (0, 2 * (s1 + s2), N - 1 - 2 * s1),
        ((s1 + s2) * (s1 + s2 - 1), 2 * N * s1),
    )
    k = N + s3 + s2
    c23 = second_order((0, -1, 1), (N - 1 + 2 * s3, 2 * (1 - N - s2 - s3)), (k * (k - 1),))
    # (1 - x)(a x + b) = b + (a - b) x - a x^2
    a, b = N - 1 - 2 * s1, 1 - N - 2 * s3
    c31 = second_order(
        (0, 1, -2, 1),
        (b, a - b, -a),
        (2 * N * s1 + (s3 + s1) * (s3 + s1 - 1), -2 * N * s1),
    )
    return c12, c23, c31


def monomial_realization(op: DiffOperator, N: int) -> QMatrix:
    """Exact matrix of ``op`` on ``1, x, ..., x^N`` (raises SpaceNotPreserved)."""
    return QMatrix(op_matrix(op, BasisSpec("monomial", N + 1)))


def verify_total_relation(cfg: Su11Config) -> VerificationReport:
    rep = VerificationReport("su11-total")
    ops = casimir_ops(cfg)
    for name, op in zip(("C12", "C23", "C31"), ops):
        try:
            monomial_realization(op, cfg.N)
            rep.add(f"{name} preserves deg<=N", True)
        except SpaceNotPreserved as exc:
            rep.add(f"{name} preserves deg<=N", False, error=str(exc))
    total = ops[0] + ops[1] + ops[2]
    on_space = monomial_realization(total, cfg.N) == QMatrix.identity(cfg.N + 1, cfg.total)
    rep.add("sum on deg<=N", on_space, constant=fmt(cfg.total))
    rep.add("sum as operator", total == ID * cfg.total)
    return rep


@dataclass
class HypergeometricMatch:
    """``C23 = scale * L_hyp(nu1, nu2) + shift``."""

    case: ClassicalCase
    scale: Fraction
    shift: Fraction

    def to_json(self) -> dict:
        return {"case": self.case.to_json(), "scale": fmt(self.scale), "shift": fmt(self.shift)}


def match_hypergeometric(op: DiffOperator) -> HypergeometricMatch:
    """Coefficient matching of a second-order operator against ``x(1-x) d^2 + (nu1 x + nu2) d``."""
    lead = op.coeff(2)
    if op.order != 2 or lead.degree != 2 or lead(0) != 0 or lead(1) != 0:
        raise FitInconsistent("leading coefficient is not a multiple of x(1-x)")
    scale = -lead.lead
    c1, c0 = op.coeff(1), op.coeff(0)
    if c1.degree > 1 or c0.degree > 0:
        raise FitInconsistent("lower-order coefficients do not have hypergeometric degrees")
    case = ClassicalCase.hypergeometric(c1.coeff(1) / scale, c1.coeff(0) / scale)
    shift = c0.coeff(0)
    if case.operator() * scale + ID * shift != op:
        raise FitInconsistent("affine match does not reproduce the operator")
    return HypergeometricMatch(case, scale, shift)


def mixed_operators(cfg: Su11Config) -> tuple[DiffOperator, DiffOperator]:
    c12, c23, _ = casimir_ops(cfg)
    return c23, c12 + c23 * cfg.beta


def mixed_operator_check(cfg: Su11Config) -> tuple[VerificationReport, FitResult, FitResult]:
    """Fit the quadratic-algebra constants of ``L = C23``, ``M = C12 + beta C23``.

    The primary fit runs over the matrix realization on degree ``<= N``
    (unique once ``N >= 4``); a second fit over the differential operators
    themselves must agree with it.  ``kappa`` must vanish at ``beta`` in {0, 1}.
    """
    rep = VerificationReport("su11-mixed")
    L, M = mixed_operators(cfg)
    n = cfg.N + 1
    mat_fit = fit_structure_constants(monomial_realization(L, cfg.N), monomial_realization(M, cfg.N), QMatrix.identity(n))
    op_fit = fit_structure_constants(L, M, ID)
    if mat_fit.constants is None:
        raise FitInconsistent(f"no quadratic-algebra relations fit the matrix realization (violated {mat_fit.violated})")
    rep.add("matrix fit consistent", True, unique=mat_fit.unique, rank=mat_fit.rank)
    rep.add("operator fit", op_fit.constants is not None and op_fit.unique, fit=op_fit.to_json())
    best = mat_fit if mat_fit.unique else op_fit
    if mat_fit.unique and op_fit.constants is not None:
        rep.add("fits agree", mat_fit.constants == op_fit.constants)
    kappa = best.constants.kappa if best.constants is not None else None
    if kappa is None:
        rep.skip("kappa", reason="no unique fit")
    elif cfg.beta in (0, 1):
        rep.add("kappa=0 at beta in {0,1}", kappa == 0, kappa=fmt(kappa))
    else:
        rep.add("kappa!=0 for generic beta", kappa != 0, kappa=fmt(kappa))
    try:
        hm = match_hypergeometric(L)
        rep.add("C23 hypergeometric", True, match=hm.to_json())
        try:
            rec = recover_taus(M, hm.case)
            rep.add("M tridiagonalizes C23", True, recovered=rec.to_json())
        except HeunTridiagError as exc:
            rep.skip("M tridiagonalizes C23", reason=str(exc))
    except FitInconsistent as exc:
        rep.add("C23 hypergeometric", False, error=str(exc))
    return rep, mat_fit, op_fit


def kappa_of_beta(beta) -> Fraction:
    """``kappa`` for ``(C23, C12 + beta C23)`` in the differential realization: ``-6 beta (beta - 1)``."""
    beta = Q(beta)
    return -6 * beta * (beta - 1)


def operators_json(cfg: Su11Config) -> dict:
    return {name: operator_to_json(op) for name, op in zip(("C12", "C23", "C31"), casimir_ops(cfg))}
