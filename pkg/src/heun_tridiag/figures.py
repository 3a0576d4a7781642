"""Matplotlib figures for CLI reports (written to files, Agg backend)."""

from __future__ import annotations

import os
from fractions import Fraction

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_META = {"Software": None}


def _save(fig, directory: str, name: str) -> str:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, name)
    fig.savefig(path, dpi=110, metadata=_META)
    plt.close(fig)
    return path


def coefficient_plot(table: list[dict], directory: str) -> str:
    """``xi_n``, ``eta_n`` and ``zeta_n u_n`` against ``n``."""
    n = [row["n"] for row in table]
    series = {
        "xi_n": [float(Fraction(r["xi"])) for r in table],
        "eta_n": [float(Fraction(r["eta"])) for r in table],
        "zeta_n u_n": [float(Fraction(r["zeta"]) * Fraction(r["u"])) for r in table],
    }
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, ys in series.items():
        ax.plot(n, ys, marker="o", label=label)
    ax.set_xlabel("n")
    ax.set_title("three-term action of M")
    ax.legend()
    ax.grid(alpha=0.3)
    return _save(fig, directory, "tridiag_coefficients.png")


def heun_polys_plot(es, directory: str, interval=(0.0, 1.0)) -> list[str]:
    paths = []
    lam = np.asarray(es.eigenvalues)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.scatter(np.real(lam), np.imag(lam) if np.iscomplexobj(lam) else np.zeros_like(lam), color="C3")
    ax.axhline(0, color="0.7", lw=0.8)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title(f"spectrum of the truncated problem (N={es.problem.N})")
    paths.append(_save(fig, directory, "heun_spectrum.png"))

    xs = np.linspace(*interval, 400)
    fig, ax = plt.subplots(figsize=(6, 4))
    for n, coeffs in enumerate(es.Q):
        vals = np.polynomial.polynomial.polyval(xs, coeffs)
        if np.iscomplexobj(vals):
            vals = vals.real
        top = np.max(np.abs(vals)) or 1.0
        ax.plot(xs, vals / top, label=f"Q_{n}")
    ax.set_xlabel("x")
    ax.set_title("Heun polynomials (scaled to max 1)")
    if len(es.Q) <= 8:
        ax.legend(fontsize="small")
    ax.grid(alpha=0.3)
    paths.append(_save(fig, directory, "heun_polynomials.png"))
    return paths


def recurrence_plot(rr, nmax: int, directory: str) -> str:
    n = np.arange(nmax + 1)
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    axes[0].plot(n, [float(rr.B(k)) for k in n], marker="o")
    axes[0].set_title("B_n")
    axes[1].plot(n[1:], [float(rr.U(k)) for k in n[1:]], marker="o", color="C1")
    axes[1].set_title("U_n")
    for ax in axes:
        ax.set_xlabel("n")
        ax.grid(alpha=0.3)
    fig.tight_layout()
    return _save(fig, directory, "racah_heun_recurrence.png")


def dual_basis_plot(result, directory: str) -> str:
    A = np.abs(result.L_dual)
    A = A[np.ix_(result.ordering, result.ordering)]
    top = A.max() or 1.0
    fig, ax = plt.subplots(figsize=(4.5, 4))
    im = ax.imshow(np.log10(A / top + 1e-18), cmap="viridis", vmin=-16, vmax=0)
    fig.colorbar(im, ax=ax, label="log10 |L_mn| / max")
    ax.set_title("L in the M-eigenbasis")
    return _save(fig, directory, "dual_basis.png")


def kappa_plot(samples: list[tuple[float, float]], directory: str) -> str:
    from .su11 import kappa_of_beta

    bs = np.linspace(-2, 2, 200)
    fig, ax = plt.subplots(figsize=(5, 3.6))
    ax.plot(bs, [float(kappa_of_beta(Fraction(b).limit_denominator(1000))) for b in bs], color="0.5", label="-6 beta (beta - 1)")
    if samples:
        ax.scatter(*zip(*samples), color="C3", zorder=3, label="fitted")
    ax.set_xlabel("beta")
    ax.set_ylabel("kappa")
    ax.legend()
    ax.grid(alpha=0.3)
    return _save(fig, directory, "su11_kappa.png")
