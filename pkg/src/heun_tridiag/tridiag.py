"""Tridiagonalization ``M = t1 X L + t2 L X + t3 X + t4 L`` of a classical operator.

Builds ``M``, its Heun-equation parameters, the coefficients of its
three-term action on the eigenpolynomials of ``L``, and the inverse map from
a Heun-shaped operator back to ``(t1, t2, t3, t4)``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .classical import HERMITE, HYPERGEOMETRIC, LAGUERRE, ClassicalCase, FamilyData
from .errors import ConfigError, DegenerateTau, NotHeunShaped, NotNormalizable
from .exactnum import Q, fit_linear, fmt, rational_sqrt
from .report import VerificationReport
from .weylops import ID, X, DiffOperator, Polynomial, commutator, poly_to_json, second_order


@dataclass(frozen=True)
class TridiagConfig:
    """Case plus ``tau1..tau4`` with the normalization ``tau1 + tau2 = 1``.

    ``tau2`` defaults to ``1 - tau1``.
    """

    case: ClassicalCase
    tau1: Fraction
    tau3: Fraction
    tau4: Fraction
    tau2: Fraction | None = None

    def __post_init__(self):
        t1 = Q(self.tau1)
        t2 = 1 - t1 if self.tau2 is None else Q(self.tau2)
        object.__setattr__(self, "tau1", t1)
        object.__setattr__(self, "tau2", t2)
        object.__setattr__(self, "tau3", Q(self.tau3))
        object.__setattr__(self, "tau4", Q(self.tau4))
        if t1 + t2 == 0:
            raise DegenerateTau(t1, t2)
        if t1 + t2 != 1:
            raise ConfigError(f"tau1 + tau2 must equal 1, got {t1 + t2}")

    def with_(self, **kw) -> "TridiagConfig":
        if "tau1" in kw and "tau2" not in kw:
            kw["tau2"] = None
        return replace(self, **kw)

    def to_json(self) -> dict:
        return {
            "case": self.case.to_json(),
            "tau1": fmt(self.tau1),
            "tau2": fmt(self.tau2),
            "tau3": fmt(self.tau3),
            "tau4": fmt(self.tau4),
        }


def canonical_config() -> TridiagConfig:
    """nu = (-5, 2), tau = (1/2, 1/2, 33/2, 1/2): Jacobi (1, 2), truncates at N = 2."""
    return TridiagConfig(ClassicalCase.hypergeometric(-5, 2), Fraction(1, 2), Fraction(33, 2), Fraction(1, 2))


# ---------------------------------------------------------------------------
# construction


def assemble_M(cfg: TridiagConfig, L: DiffOperator | None = None) -> DiffOperator:
    """``t1 X L + t2 L X + t3 X + t4 L`` by operator composition."""
    L = cfg.case.operator() if L is None else L
    return X * L * cfg.tau1 + L * X * cfg.tau2 + X * cfg.tau3 + L * cfg.tau4


def closed_form_M(cfg: TridiagConfig) -> DiffOperator:
    """Explicit coefficients of ``M`` for each case (normalized ``t1 + t2 = 1``)."""
    t1, t2, t3, t4 = cfg.tau1, cfg.tau2, cfg.tau3, cfg.tau4
    case = cfg.case
    if case.tag == HYPERGEOMETRIC:
        n1, n2 = case.nu1, case.nu2
        rho2, rho1, rho0 = heun_rhos(cfg)
        r1, r0 = t3 - t1 * n1 + n1, n2 * (1 - t1)
        # x(1-x)(x+t4) = t4 x + (1-t4) x^2 - x^3
        return second_order((0, t4, 1 - t4, -1), (rho0, rho1, rho2), (r0, r1))
    if case.tag == LAGUERRE:
        a = case.a
        return second_order(
            (0, t4, 1),
            (t4 * (1 + a), 3 + a - t4 - 2 * t1, -1),
            (1 - t1 + a * t2, t3 - t2),
        )
    return second_order((t4, 1), (2 * t2, -2 * t4, -2), (0, t3 - 2 * t2))


def heun_rhos(cfg: TridiagConfig) -> tuple[Fraction, Fraction, Fraction]:
    t1, t4 = cfg.tau1, cfg.tau4
    n1, n2 = cfg.case.nu1, cfg.case.nu2
    return n1 + 2 * t1 - 2, 2 - 2 * t1 + n2 + t4 * n1, t4 * n2


def build_M(cfg: TridiagConfig) -> DiffOperator:
    m = assemble_M(cfg)
    if m != closed_form_M(cfg):
        raise AssertionError(f"assembled M disagrees with its closed form for {cfg}")
    return m


# ---------------------------------------------------------------------------
# Heun parameters


@dataclass(frozen=True)
class HeunParams:
    """Parameters of ``psi'' + (g/x + dl/(x-1) + e/(x-d)) psi' + (ab x - q)/(x(x-1)(x-d)) psi = 0``.

    ``alpha`` and ``beta`` are the roots of ``t^2 - ab_sum t + ab``, with
    ``ab_sum = g + dl + e - 1`` fixed by regularity at infinity.  ``roots``
    holds them exactly when rational, else as floats/complex.
    """

    gamma: Fraction
    delta: Fraction
    epsilon: Fraction
    d: Fraction
    alpha_beta: Fraction
    alpha_plus_beta: Fraction
    q_shift: Fraction  # q(lam) = q_shift - lam
    roots: tuple

    def q(self, lam):
        return self.q_shift - lam

    def regularity(self) -> Fraction:
        return self.alpha_plus_beta - self.gamma - self.delta - self.epsilon + 1

    def operator(self, lam) -> DiffOperator:
        """``x(x-1)(x-d)`` times the Heun equation, as an operator."""
        g, dl, e, d = self.gamma, self.delta, self.epsilon, self.d
        xm1 = Polynomial((-1, 1))
        xmd = Polynomial((-d, 1))
        x = Polynomial((0, 1))
        c2 = x * xm1 * xmd
        c1 = xm1 * xmd * g + x * xmd * dl + x * xm1 * e
        c0 = Polynomial((-self.q(lam), self.alpha_beta))
        return DiffOperator((c0, c1, c2))

    def to_json(self) -> dict:
        roots = [fmt(r) if isinstance(r, Fraction) else (f"{r:.17g}" if isinstance(r, float) else [f"{r.real:.17g}", f"{r.imag:.17g}"]) for r in self.roots]
        return {
            "gamma": fmt(self.gamma),
            "delta": fmt(self.delta),
            "epsilon": fmt(self.epsilon),
            "d": fmt(self.d),
            "alpha_beta": fmt(self.alpha_beta),
            "alpha_plus_beta": fmt(self.alpha_plus_beta),
            "q": {"form": "q_shift - lambda", "q_shift": fmt(self.q_shift)},
            "alpha_beta_roots": roots,
        }


def quadratic_roots(s: Fraction, p: Fraction) -> tuple:
    """Roots of ``t^2 - s t + p``: exact when rational, otherwise float or complex."""
    disc = s * s - 4 * p
    r = rational_sqrt(disc)
    if r is not None:
        return ((s + r) / 2, (s - r) / 2)
    if disc > 0:
        root = float(disc) ** 0.5
        return ((float(s) + root) / 2, (float(s) - root) / 2)
    root = complex(0, float(-disc) ** 0.5)
    return ((float(s) + root) / 2, (float(s) - root) / 2)


def heun_params(cfg: TridiagConfig) -> HeunParams:
    if cfg.case.tag != HYPERGEOMETRIC:
        raise ConfigError("heun_params is defined for the hypergeometric case; use singularity_structure")
    n1, n2 = cfg.case.nu1, cfg.case.nu2
    g, dl, e, d = n2, -n1 - n2, 2 * cfg.tau2, -cfg.tau4
    ab = -cfg.tau3 - n1 * cfg.tau2
    apb = g + dl + e - 1
    return HeunParams(g, dl, e, d, ab, apb, cfg.tau2 * n2, quadratic_roots(apb, ab))


def verify_heun_form(cfg: TridiagConfig) -> VerificationReport:
    """``-(M - lam)`` equals ``x(x-1)(x-d)`` times the Heun operator, for all ``lam``.

    The identity is affine in ``lam``, so checking ``lam = 0`` and ``lam = 1`` suffices.
    """
    rep = VerificationReport("heun-form")
    M = build_M(cfg)
    hp = heun_params(cfg)
    for lam in (Fraction(0), Fraction(1)):
        diff = -(M - ID * lam) - hp.operator(lam)
        rep.add(f"lambda={lam}", diff.is_zero(), residual=None if diff.is_zero() else diff.pretty())
    rep.add("regularity", hp.regularity() == 0, value=fmt(hp.regularity()))
    return rep


def singularity_structure(m: DiffOperator) -> dict:
    """Finite singular points (roots of the leading coefficient) and type at infinity.

    Rational roots are reported exactly; infinity is regular when
    ``deg c1 <= deg c2 - 1`` and ``deg c0 <= deg c2 - 2``.
    """
    c2, c1, c0 = m.coeff(2), m.coeff(1), m.coeff(0)
    roots = _rational_roots(c2)
    regular_inf = c1.degree <= c2.degree - 1 and c0.degree <= c2.degree - 2
    return {
        "leading": poly_to_json(c2),
        "monic_first": {"num": poly_to_json(c1), "den": poly_to_json(c2)},
        "monic_zeroth": {"num": poly_to_json(c0), "den": poly_to_json(c2)},
        "finite_singular_points": [fmt(r) for r in roots],
        "infinity": "regular" if regular_inf else "irregular",
    }


def _rational_roots(p: Polynomial) -> list[Fraction]:
    out = []
    rem = p
    for cand in _root_candidates(p):
        while rem.degree > 0 and rem(cand) == 0:
            out.append(cand)
            rem = _divide_linear(rem, cand)
    return sorted(set(out))


def _root_candidates(p: Polynomial) -> list[Fraction]:
    from math import lcm

    if p.degree <= 0:
        return []
    den = lcm(*(Fraction(c).denominator for c in p.coeffs))
    ints = [int(Fraction(c) * den) for c in p.coeffs]
    while ints and ints[0] == 0:
        ints.pop(0)
    cands = {Fraction(0)} if Fraction(p.coeff(0)) == 0 else set()
    a0, an = abs(ints[0]), abs(ints[-1])
    if a0 > 10**12 or an > 10**12:
        return sorted(cands)
    for pp in _divisors(a0):
        for qq in _divisors(an):
            cands.add(Fraction(pp, qq))
            cands.add(Fraction(-pp, qq))
    return sorted(cands)


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0] if n <= 10**6 else [1, n]


def _divide_linear(p: Polynomial, r) -> Polynomial:
    c = list(p.coeffs)
    out = [0] * (len(c) - 1)
    acc = 0
    for i in range(len(c) - 1, 0, -1):
        acc = acc * r + c[i]
        out[i - 1] = acc
    return Polynomial(out)


# ---------------------------------------------------------------------------
# tridiagonal action


@dataclass
class TridiagCoeffs:
    """``M P_n = xi_{n+1} P_{n+1} + eta_n P_n + zeta_n u_n P_{n-1}``.

    ``eta_n = (t1 + t2) lam_n b_n + t3 b_n + t4 lam_n``.  ``overrides`` replaces
    single coefficients, which is how fault-injection tests perturb them.
    """

    cfg: TridiagConfig
    data: FamilyData
    overrides: dict = field(default_factory=dict)

    def xi(self, n: int) -> Fraction:
        if ("xi", n) in self.overrides:
            return self.overrides[("xi", n)]
        c, lam = self.cfg, self.data.lam
        return c.tau1 * lam(n - 1) + c.tau2 * lam(n) + c.tau3

    def zeta(self, n: int) -> Fraction:
        if ("zeta", n) in self.overrides:
            return self.overrides[("zeta", n)]
        c, lam = self.cfg, self.data.lam
        return c.tau1 * lam(n) + c.tau2 * lam(n - 1) + c.tau3

    def eta(self, n: int) -> Fraction:
        if ("eta", n) in self.overrides:
            return self.overrides[("eta", n)]
        c, lam, b = self.cfg, self.data.lam(n), self.data.b(n)
        return (c.tau1 + c.tau2) * lam * b + c.tau3 * b + c.tau4 * lam

    def lower(self, n: int) -> Fraction:
        """Coefficient of ``P_{n-1}`` in ``M P_n``: ``zeta_n u_n``."""
        return self.zeta(n) * self.data.u(n)

    def perturbed(self, **changes) -> "TridiagCoeffs":
        """``perturbed(eta={5: 1})`` adds 1 to ``eta_5``."""
        ov = dict(self.overrides)
        for name, deltas in changes.items():
            for n, dv in deltas.items():
                ov[(name, n)] = getattr(self, name)(n) + dv
        return TridiagCoeffs(self.cfg, self.data, ov)

    def matrix(self, N: int):
        """``(N+1) x (N+1)`` action of ``M`` on ``P_0..P_N`` (column ``n`` = image of ``P_n``)."""
        from .exactnum import TridiagMatrix

        return TridiagMatrix(
            tuple(self.eta(n) for n in range(N + 1)),
            tuple(self.lower(n + 1) for n in range(N)),
            tuple(self.xi(n + 1) for n in range(N)),
        )

    def table(self, nmax: int) -> list[dict]:
        return [
            {
                "n": n,
                "lambda": fmt(self.data.lam(n)),
                "b": fmt(self.data.b(n)),
                "u": fmt(self.data.u(n)),
                "xi": fmt(self.xi(n)),
                "eta": fmt(self.eta(n)),
                "zeta": fmt(self.zeta(n)),
            }
            for n in range(nmax + 1)
        ]


def tridiag_coeffs(cfg: TridiagConfig) -> TridiagCoeffs:
    return TridiagCoeffs(cfg, FamilyData(cfg.case))


def verify_tridiagonal(cfg: TridiagConfig, N: int, coeffs: TridiagCoeffs | None = None) -> VerificationReport:
    """Exact check of ``M P_n - (xi_{n+1} P_{n+1} + eta_n P_n + zeta_n u_n P_{n-1}) = 0``, n = 0..N."""
    coeffs = coeffs if coeffs is not None else tridiag_coeffs(cfg)
    data = coeffs.data
    M = build_M(cfg)
    rep = VerificationReport("tridiagonal")
    for n in range(N + 1):
        rhs = data.poly(n + 1) * coeffs.xi(n + 1) + data.poly(n) * coeffs.eta(n)
        if n >= 1:
            rhs = rhs + data.poly(n - 1) * coeffs.lower(n)
        res = M.apply(data.poly(n)) - rhs
        rep.add(f"n={n}", res.is_zero(), residual=None if res.is_zero() else poly_to_json(res))
    return rep


# ---------------------------------------------------------------------------
# inverse characterization


@dataclass(frozen=True)
class RecoveredConfig:
    """``m == scale * build_M(cfg) + shift * I``."""

    cfg: TridiagConfig
    scale: Fraction
    shift: Fraction

    @property
    def omegas(self) -> tuple[Fraction, Fraction]:
        """Jacobi parameters ``(gamma - 1, delta - 1)`` of the Heun form."""
        hp = heun_params(self.cfg)
        return hp.gamma - 1, hp.delta - 1

    def to_json(self) -> dict:
        out = {"config": self.cfg.to_json(), "scale": fmt(self.scale), "shift": fmt(self.shift)}
        if self.cfg.case.tag == HYPERGEOMETRIC:
            out["omegas"] = [fmt(w) for w in self.omegas]
        return out


def recover_taus(m: DiffOperator, case: ClassicalCase | None = None) -> RecoveredConfig:
    """Write a second-order operator as ``s (t1 X L + t2 L X + t3 X + t4 L) + c``.

    ``m`` is linear in ``(s, s t1, s t3, s t4, c)`` once ``t2 = 1 - t1``:
    ``s L X + s t1 [X, L] + s t3 X + s t4 L + c``, so the parameters come from
    an exact linear solve.  Without ``case`` the hypergeometric ``nu1, nu2`` are
    read off the first-order coefficient (needs ``t4`` outside {0, -1}).
    """
    if m.order > 2 or any(m.coeff(k).degree > k + 1 for k in range(3)):
        raise NotHeunShaped(f"expected order 2 with deg c_k <= k+1, got {m.pretty()}")
    if m.coeff(2).is_zero():
        raise NotNormalizable("second-order coefficient vanishes: no normalization with tau1 + tau2 = 1")
    if case is None:
        case = _infer_hypergeometric(m)
    lead = m.coeff(2)
    if case.tag == HYPERGEOMETRIC and (lead(0) != 0 or lead(1) != 0):
        raise NotHeunShaped("leading coefficient does not vanish at 0 and 1")
    L = case.operator()
    basis = [L * X, commutator(X, L), X, L, ID]
    blocks = [(m.terms(), {i: op.terms() for i, op in enumerate(basis)})]
    sol, labels = fit_linear(blocks, len(basis))
    if sol.solution is None:
        raise NotHeunShaped(f"operator is not tridiagonal on the {case.tag} basis (coefficient {labels[sol.inconsistent_row][1]})")
    s, st1, st3, st4, c = sol.solution
    if s == 0:
        raise NotNormalizable("scale vanishes")
    cfg = TridiagConfig(case, st1 / s, st3 / s, st4 / s)
    if build_M(cfg) * s + ID * c != m:
        raise NotHeunShaped("recovered parameters do not reproduce the operator")
    return RecoveredConfig(cfg, s, c)


def _infer_hypergeometric(m: DiffOperator) -> ClassicalCase:
    lead = m.coeff(2)
    if lead.degree != 3 or lead(0) != 0 or lead(1) != 0:
        raise NotHeunShaped("leading coefficient is not a multiple of x(x-1)(x-a)")
    # lead = s x(1-x)(x+t4) = s(-x^3 + (1-t4) x^2 + t4 x)
    s = -lead.lead
    t4 = 1 - lead.coeff(2) / s
    rho2, rho1, rho0 = (m.coeff(1).coeff(k) / s for k in (2, 1, 0))
    if t4 in (0, -1):
        raise NotHeunShaped("tau4 in {0, -1}: nu1, nu2 are not determined by M alone; pass the case")
    nu2 = rho0 / t4
    nu1 = (rho2 + rho1 - nu2) / (1 + t4)
    return ClassicalCase.hypergeometric(nu1, nu2)


# ---------------------------------------------------------------------------
# sampling


def small_rational(rng: random.Random, num: int = 9, den: int = 6, nonzero: bool = False) -> Fraction:
    while True:
        v = Fraction(rng.randint(-num, num), rng.randint(1, den))
        if not nonzero or v != 0:
            return v


def random_case(tag: str, rng: random.Random, nmax: int = 30) -> ClassicalCase:
    """Random pole-free case over ``0..nmax``."""
    from .errors import ParameterPole

    while True:
        if tag == HYPERGEOMETRIC:
            case = ClassicalCase.jacobi(small_rational(rng), small_rational(rng))
        elif tag == LAGUERRE:
            case = ClassicalCase.laguerre(small_rational(rng))
        elif tag == HERMITE:
            return ClassicalCase.hermite()
        else:
            raise ConfigError(tag)
        try:
            FamilyData(case).check_range(nmax + 2)
        except ParameterPole:
            continue
        return case


def random_config(tag: str, rng: random.Random, nmax: int = 30) -> TridiagConfig:
    case = random_case(tag, rng, nmax)
    return TridiagConfig(case, small_rational(rng), small_rational(rng), small_rational(rng))
