"""Command-line front end.

Every command prints one report (JSON by default) and exits 0 if all checks
pass, 1 if any check fails, 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from . import SCHEMA, __version__
from .classical import HERMITE, HYPERGEOMETRIC, LAGUERRE, ClassicalCase
from .errors import ConfigError, HeunTridiagError
from .exactnum import TridiagMatrix, fmt, parse_rational, symmetrize_tridiag, tridiag_eigen
from .report import FAIL, VerificationReport

CASE_ALIASES = {"hyp": HYPERGEOMETRIC, "hypergeometric": HYPERGEOMETRIC, "jacobi": HYPERGEOMETRIC, "laguerre": LAGUERRE, "lag": LAGUERRE, "hermite": HERMITE, "her": HERMITE}

COMMANDS = ("construct", "verify-algebra", "casimir", "tridiag", "heun-polys", "racah-heun", "wilson-compare", "su11", "selftest")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--case", default="hyp", choices=sorted(CASE_ALIASES))
    common.add_argument("--nu1", type=_rational, default=Fraction(-5))
    common.add_argument("--nu2", type=_rational, default=Fraction(2))
    common.add_argument("--a", type=_rational, default=Fraction(0), help="Laguerre parameter")
    common.add_argument("--tau1", type=_rational, default=Fraction(1, 2))
    common.add_argument("--tau2", type=_rational, default=None)
    common.add_argument("--tau3", type=_rational, default=None, help="default 33/2, or the truncation value when --N is given")
    common.add_argument("--tau4", type=_rational, default=Fraction(1, 2))
    common.add_argument("--N", type=int, default=None)
    common.add_argument("--degree", type=int, default=10, help="probe degree for operator identities")
    common.add_argument("--nmax", type=int, default=10)
    common.add_argument("--beta", type=_rational, default=Fraction(1, 3))
    common.add_argument("--sigma1", type=_rational, default=Fraction(1, 2))
    common.add_argument("--sigma2", type=_rational, default=Fraction(3, 4))
    common.add_argument("--sigma3", type=_rational, default=Fraction(5, 4))
    common.add_argument("--x", type=_rational, action="append", default=None, help="evaluation point (repeatable)")
    common.add_argument("--output", choices=("json", "csv", "pretty"), default="json")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--figures", default=None, metavar="DIR", help="also render PNG figures into DIR")
    common.add_argument("--seed", type=int, default=0, help="selftest sampling seed")

    parser = _Parser(prog="heun-tridiag", description="Heun operators from tridiagonalization: construction and verification.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


# ---------------------------------------------------------------------------
# config helpers


def _case(args) -> ClassicalCase:
    tag = CASE_ALIASES[args.case]
    if tag == HYPERGEOMETRIC:
        return ClassicalCase.hypergeometric(args.nu1, args.nu2)
    if tag == LAGUERRE:
        return ClassicalCase.laguerre(args.a)
    return ClassicalCase.hermite()


def _config(args, truncate_at: int | None = None):
    from .heunpoly import truncation_tau3
    from .tridiag import TridiagConfig

    case = _case(args)
    tau3 = args.tau3
    if tau3 is None:
        tau3 = truncation_tau3(case, args.tau1, args.tau4, truncate_at, args.tau2) if truncate_at is not None else Fraction(33, 2)
    return TridiagConfig(case, args.tau1, tau3, args.tau4, args.tau2)


def _inputs(args) -> dict:
    out = {}
    for key, val in sorted(vars(args).items()):
        if key in ("out", "output", "figures", "command"):
            continue
        if isinstance(val, Fraction):
            out[key] = fmt(val)
        elif isinstance(val, list):
            out[key] = [fmt(v) for v in val]
        else:
            out[key] = val
    return out


# ---------------------------------------------------------------------------
# commands: each returns (results, table, reports, figure-callback)


def cmd_construct(args):
    from .rhalgebra import structure_constants
    from .tridiag import build_M, heun_params, singularity_structure, tridiag_coeffs, verify_heun_form, verify_tridiagonal
    from .weylops import operator_to_json

    cfg = _config(args)
    M = build_M(cfg)
    coeffs = tridiag_coeffs(cfg)
    nmax = args.nmax
    coeffs.data.check_range(nmax + 1)
    table = coeffs.table(nmax)
    results = {"config": cfg.to_json(), "M": operator_to_json(M), "M_pretty": M.pretty(), "structure_constants": structure_constants(cfg).to_json(), "coefficients": table}
    reports = []
    if cfg.case.tag == HYPERGEOMETRIC:
        results["heun"] = heun_params(cfg).to_json()
        reports.append(verify_heun_form(cfg))
    else:
        results["singularities"] = singularity_structure(M)
    reports.append(verify_tridiagonal(cfg, nmax, coeffs))

    def figs(d):
        from .figures import coefficient_plot

        return [coefficient_plot(table, d)]

    return results, table, reports, figs


def cmd_verify_algebra(args):
    from .rhalgebra import jacobi_identity, structure_constants, verify_algebra, verify_reduction
    from .tridiag import build_M

    cfg = _config(args)
    sc = structure_constants(cfg)
    rep = verify_algebra(cfg, args.degree, sc)
    jac = VerificationReport("jacobi-identity")
    jac.add("Jacobi identity", jacobi_identity(cfg.case.operator(), build_M(cfg)))
    red = verify_reduction(cfg)
    results = {"config": cfg.to_json(), "structure_constants": sc.to_json(), "racah_type": sc.racah_type}
    table = [{"name": k, "value": v} for k, v in sc.to_json().items()]
    return results, table, [rep, jac, red], None


def cmd_casimir(args):
    from .rhalgebra import casimir

    cfg = _config(args)
    cv = casimir(cfg, args.degree)
    results = {"config": cfg.to_json(), **{k: v for k, v in cv.to_json().items() if k != "report"}}
    table = [{"q": results["q"], "observed": results["observed"]}]
    return results, table, [cv.report], None


def cmd_tridiag(args):
    from .tridiag import tridiag_coeffs, verify_tridiagonal

    cfg = _config(args)
    coeffs = tridiag_coeffs(cfg)
    coeffs.data.check_range(args.nmax + 1)
    table = coeffs.table(args.nmax)
    rep = verify_tridiagonal(cfg, args.nmax, coeffs)

    def figs(d):
        from .figures import coefficient_plot

        return [coefficient_plot(table, d)]

    return {"config": cfg.to_json(), "coefficients": table}, table, [rep], figs


def cmd_heun_polys(args):
    from .heunpoly import dual_basis_demo, heun_eigensystem, racah_heun_recurrence, truncated_problem, verify_expansion, verify_truncation

    N = 2 if args.N is None else args.N
    cfg = _config(args, truncate_at=N)
    tp = truncated_problem(cfg, N)
    es = heun_eigensystem(tp)
    rr = racah_heun_recurrence(cfg, N)
    ex = verify_expansion(es, rr)
    dual = dual_basis_demo(tp, es)
    results = {"config": cfg.to_json(), "eigensystem": es.to_json(), "dual_basis": dual.to_json()}
    results["eigensystem"].pop("report")
    table = [{"n": n, "lambda": fmt_val} for n, fmt_val in enumerate(results["eigensystem"]["eigenvalues"])]

    def figs(d):
        from .figures import dual_basis_plot, heun_polys_plot

        interval = (0.0, 1.0) if cfg.case.tag == HYPERGEOMETRIC else (-2.0, 4.0)
        return heun_polys_plot(es, d, interval) + [dual_basis_plot(dual, d)]

    return results, table, [verify_truncation(tp), es.report, ex], figs


def cmd_racah_heun(args):
    from .heunpoly import racah_heun_recurrence

    cfg = _config(args)
    rr = racah_heun_recurrence(cfg, args.nmax)
    xs = args.x or [Fraction(0), Fraction(1), Fraction(2)]
    table = rr.table(args.nmax)
    rep = VerificationReport("racah-heun")
    bad = rr.positivity(args.nmax)
    if bad:
        rep.skip("U_n > 0", reason="outside the real-orthogonality regime", indices=bad)
    else:
        rep.add("U_n > 0", True)
    rep.add("B_n = eta_n", all(rr.B(n) == rr.coeffs.eta(n) for n in range(args.nmax + 1)))
    results = {"config": cfg.to_json(), "recurrence": table, "grid": rr.grid(args.nmax, xs)}

    def figs(d):
        from .figures import recurrence_plot

        return [recurrence_plot(rr, args.nmax, d)]

    return results, table, [rep], figs


def cmd_wilson(args):
    from .heunpoly import racah_heun_recurrence, wilson_compare, wilson_params

    cfg = _config(args)
    rep = wilson_compare(cfg, args.nmax)
    params = [w.to_json() for w in wilson_params(cfg)]
    rr = racah_heun_recurrence(cfg, args.nmax)
    return {"config": cfg.to_json(), "wilson": params}, rr.table(args.nmax), [rep], None


def _su11_config(args):
    from .su11 import Su11Config

    N = 4 if args.N is None else args.N
    return Su11Config(args.sigma1, args.sigma2, args.sigma3, N, args.beta)


def cmd_su11(args):
    from .su11 import kappa_of_beta, mixed_operator_check, operators_json, verify_total_relation

    cfg = _su11_config(args)
    total = verify_total_relation(cfg)
    mixed, mat_fit, op_fit = mixed_operator_check(cfg)
    results = {"config": cfg.to_json(), "operators": operators_json(cfg), "total": fmt(cfg.total), "fit": mat_fit.to_json()}
    table = [{"name": k, "value": v} for k, v in (mat_fit.constants.to_json() if mat_fit.constants else {}).items()]

    def figs(d):
        from .figures import kappa_plot

        samples = []
        for b in (Fraction(-1), Fraction(0), Fraction(1, 3), Fraction(1, 2), Fraction(1), Fraction(3, 2)):
            _, f, _ = mixed_operator_check(cfg.__class__(cfg.sigma1, cfg.sigma2, cfg.sigma3, cfg.N, b))
            samples.append((float(b), float(f.constants.kappa)))
        return [kappa_plot(samples, d)]

    mixed.add("kappa(beta) closed form", mat_fit.constants is not None and mat_fit.constants.kappa == kappa_of_beta(cfg.beta))
    return results, table, [total, mixed], figs


def cmd_selftest(args):
    tasks = selftest_tasks(args.seed)
    threads = _threads()
    with ThreadPoolExecutor(max_workers=threads) as pool:
        reports = list(pool.map(lambda t: t[1](), tasks))
    named = []
    for (name, _), rep in zip(tasks, reports):
        rep.name = name
        named.append(rep)
    table = [{"suite": r.name, "passed": r.passed, "checks": len(r.checks)} for r in named]
    return {"suites": table}, table, named, None


def _threads() -> int:
    raw = os.environ.get("HEUN_TRIDIAG_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"HEUN_TRIDIAG_THREADS must be an integer >= 1, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"HEUN_TRIDIAG_THREADS must be an integer >= 1, got {raw!r}")
    return n


def selftest_tasks(seed: int = 0) -> list:
    """Named zero-argument callables, each returning a VerificationReport."""
    from . import heunpoly as hp
    from . import rhalgebra as rh
    from . import su11
    from . import tridiag as td

    canon = td.canonical_config()

    def tridiagonal():
        rep = VerificationReport("tridiagonal")
        rng = random.Random(seed)
        for tag in (HYPERGEOMETRIC, LAGUERRE, HERMITE):
            for k in range(3):
                rep.extend(td.verify_tridiagonal(td.random_config(tag, rng, 12), 10), prefix=f"{tag}{k}")
        return rep

    def heun_form():
        rep = td.verify_heun_form(canon)
        rec = td.recover_taus(td.build_M(canon) * 2 + td.ID * 3)
        rep.add("recover_taus round trip", rec.cfg == canon and rec.scale == 2 and rec.shift == 3)
        return rep

    def algebra():
        rep = VerificationReport("algebra")
        rng = random.Random(seed + 1)
        for tag in (HYPERGEOMETRIC, LAGUERRE, HERMITE):
            cfg = td.random_config(tag, rng, 12)
            rep.extend(rh.verify_algebra(cfg, 10), prefix=tag)
            fit = rh.fit_structure_constants(cfg.case.operator(), td.build_M(cfg), td.ID)
            rep.add(f"{tag}/fit reproduces constants", fit.unique and fit.constants == rh.structure_constants(cfg))
        return rep

    def casimir():
        rep = rh.casimir(canon).report
        rep.extend(rh.verify_reduction(canon), prefix="reduction")
        return rep

    def eigen():
        rep = VerificationReport("eigen")
        sym, scale = symmetrize_tridiag(TridiagMatrix((1, 1), (4,), (1,)))
        rep.add("symmetrize example", sym.super == (2,) and scale == (1, 2))
        rng = random.Random(seed + 2)
        worst = 0.0
        for _ in range(50):
            n = rng.randint(1, 20)
            diag = [Fraction(rng.randint(-10, 10)) for _ in range(n)]
            sup = [Fraction(rng.randint(1, 10)) * rng.choice((1, -1)) for _ in range(n - 1)]
            sub = [s * Fraction(rng.randint(1, 10)) for s in sup]
            res = tridiag_eigen(TridiagMatrix(diag, sup, sub)).residuals
            worst = max(worst, float(max(res)))
        rep.add("random residuals", worst <= 1e-10, max=worst)
        return rep

    def truncation():
        rep = VerificationReport("truncation")
        for N, nus, t4 in ((2, (-5, 2), Fraction(1, 2)), (5, (-11, 2), Fraction(1, 3))):
            tp = hp.truncate(ClassicalCase.hypergeometric(*nus), Fraction(1, 2), t4, N)
            es = hp.heun_eigensystem(tp)
            rep.extend(hp.verify_truncation(tp), prefix=f"N={N}")
            rep.extend(es.report, prefix=f"N={N}")
            rep.extend(hp.verify_expansion(es, hp.racah_heun_recurrence(tp.cfg)), prefix=f"N={N}")
        return rep

    def wilson():
        return hp.wilson_compare(canon.with_(tau4=Fraction(0)), 15)

    def leonard():
        rep = VerificationReport("dual-basis")
        for N in range(2, 7):
            k = hp.dual_basis_demo(hp.truncate(canon.case, canon.tau1, canon.tau4, N))
            z = hp.dual_basis_demo(hp.truncate(canon.case, canon.tau1, Fraction(0), N))
            rep.add(f"N={N} kappa=0 tridiagonal", z.relative_off <= 1e-10, value=z.relative_off)
            rep.add(f"N={N} kappa!=0 not tridiagonal", k.relative_off > 1e-6, value=k.relative_off)
        return rep

    def su():
        rep = VerificationReport("su11")
        rep.extend(su11.verify_total_relation(su11.Su11Config(Fraction(1, 2), Fraction(1, 2), Fraction(1, 2), 1)), prefix="half")
        for beta in (Fraction(0), Fraction(1), Fraction(1, 3)):
            r, _, _ = su11.mixed_operator_check(su11.Su11Config(Fraction(1, 2), Fraction(3, 4), Fraction(5, 4), 4, beta))
            rep.extend(r, prefix=f"beta={beta}")
        return rep

    return [
        ("tridiagonal", tridiagonal),
        ("heun-form", heun_form),
        ("algebra", algebra),
        ("casimir", casimir),
        ("eigen", eigen),
        ("truncation", truncation),
        ("wilson", wilson),
        ("dual-basis", leonard),
        ("su11", su),
    ]


HANDLERS = {
    "construct": cmd_construct,
    "verify-algebra": cmd_verify_algebra,
    "casimir": cmd_casimir,
    "tridiag": cmd_tridiag,
    "heun-polys": cmd_heun_polys,
    "racah-heun": cmd_racah_heun,
    "wilson-compare": cmd_wilson,
    "su11": cmd_su11,
    "selftest": cmd_selftest,
}


# ---------------------------------------------------------------------------
# rendering


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return fmt(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float):
        return f"{obj:.17g}"
    if hasattr(obj, "item"):
        return _jsonable(obj.item())
    return obj


def render(payload: dict, table: list[dict] | None, fmt_name: str) -> str:
    if fmt_name == "json":
        return json.dumps(_jsonable(payload), indent=2) + "\n"
    if fmt_name == "csv":
        rows = table if table else [{"name": c["name"], "status": c["status"]} for c in payload.get("checks", [])]
        buf = io.StringIO()
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _csv_cell(v) for k, v in row.items()})
        return buf.getvalue()
    lines = [f"{payload['command']}: {'PASS' if payload['passed'] else 'FAIL'}"]
    for c in payload.get("checks", []):
        lines.append(f"  [{c['status']:>7}] {c['name']}")
    if table:
        keys = list(table[0])
        lines.append("  " + "  ".join(keys))
        for row in table:
            lines.append("  " + "  ".join(str(_csv_cell(row[k])) for k in keys))
    return "\n".join(lines) + "\n"


def _csv_cell(v):
    if isinstance(v, Fraction):
        return fmt(v)
    if isinstance(v, list):
        return " ".join(str(x) for x in v)
    return v


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


_NEGATIVE = re.compile(r"^-\d+(/\d+)?$")


def _normalize_argv(argv: list[str]) -> list[str]:
    """Join ``--opt -5/2`` into ``--opt=-5/2`` so negative rationals are not read as flags."""
    out: list[str] = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEGATIVE.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def run(argv=None) -> int:
    args = None
    argv = _normalize_argv(list(sys.argv[1:] if argv is None else argv))
    try:
        args = build_parser().parse_args(argv)
        _threads()
        results, table, reports, figs = HANDLERS[args.command](args)
    except HeunTridiagError as exc:
        payload = {"schema": SCHEMA, "version": __version__, **exc.payload()}
        _emit(json.dumps(payload, indent=2) + "\n", getattr(args, "out", None))
        return 2
    checks = []
    for rep in reports:
        for c in rep.checks:
            checks.append({"suite": rep.name, "name": c.name, "status": c.status, "detail": c.detail})
    conversions = sorted({x for rep in reports for x in rep.conversions})
    passed = all(c["status"] != FAIL for c in checks)
    payload = {
        "schema": SCHEMA,
        "version": __version__,
        "command": args.command,
        "inputs": _inputs(args),
        "results": results,
        "checks": checks,
        "passed": passed,
    }
    if conversions:
        payload["approx_conversions"] = conversions
    if args.figures and figs is not None:
        payload["figures"] = figs(args.figures)
    _emit(render(payload, table, args.output), args.out)
    return 0 if passed else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
