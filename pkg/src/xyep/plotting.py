"""Static figures for the CLI: scatter plots and heat maps.

Everything renders through the Agg backend.  SVG output is made byte-stable
by fixing the hash salt used for element ids and dropping the date stamp.
"""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_STYLE = {
    "svg.hashsalt": "xyep",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "figure.figsize": (5.0, 4.0),
}


def _unit_circle(ax, **kw):
    t = np.linspace(0, 2 * np.pi, 721)
    ax.plot(np.cos(t), np.sin(t), **kw)


def render(fig, fmt="svg", description=None) -> bytes:
    """Serialize and close ``fig``; no timestamps or tool stamps are written.

    ``description`` (SVG only) lands in the document metadata, which is where
    the CLI stores its run configuration.
    """
    buf = io.BytesIO()
    if fmt == "svg":
        meta = {"Date": None}
        if description is not None:
            meta["Description"] = description
    else:
        meta = {"Software": None}
    with plt.rc_context(_STYLE):
        fig.savefig(buf, format=fmt, metadata=meta)
    plt.close(fig)
    return buf.getvalue()


def quasi_figure(q, title=""):
    """Quasi-energies in the complex plane, coloured by sector."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for sector, marker in (("odd", "o"), ("even", "s")):
            e = q.sector(sector)
            ax.scatter(e.real, e.imag, marker=marker, facecolors="none",
                       edgecolors="C0" if sector == "odd" else "C1", label=f"{sector} sites")
        ax.set_xlabel(r"Re $\epsilon$")
        ax.set_ylabel(r"Im $\epsilon$")
        ax.set_title(title)
        ax.legend()
    return fig


def spectrum_figure(ff, ed=None, title=""):
    """Free-fermion energies (circles) against ED energies (crosses)."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        E = ff.sorted()
        ax.scatter(E.real, E.imag, s=40, facecolors="none", edgecolors="C0", label="free fermion")
        if ed is not None:
            D = ed.sorted()
            ax.scatter(D.real, D.imag, s=14, marker="x", color="C3", label="exact diagonalization")
        ax.set_xlabel("Re E")
        ax.set_ylabel("Im E")
        ax.set_title(title)
        ax.legend()
    return fig


def eps_figure(records, title=""):
    """EP locations in the lambda plane with the unit circle."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 4.5))
        _unit_circle(ax, color="0.6", lw=0.8)
        for ring, c in (("inner", "C0"), ("outer", "C3")):
            z = np.array([r.lambda_ep for r in records if r.ring == ring], dtype=complex)
            ax.scatter(z.real, z.imag, s=12, color=c, label=f"{ring} ring")
        ax.set_aspect("equal")
        ax.set_xlabel(r"Re $\lambda$")
        ax.set_ylabel(r"Im $\lambda$")
        ax.set_title(title)
        ax.legend()
    return fig


def rings_figure(reports):
    """EP rings for several L side by side in one panel."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 4.5))
        _unit_circle(ax, color="0.6", lw=0.8)
        for i, rep in enumerate(reports):
            z = np.array(rep.lambdas, dtype=complex)
            ax.scatter(z.real, z.imag, s=8, color=f"C{i}", label=f"L={rep.L}")
        ax.set_aspect("equal")
        ax.set_xlabel(r"Re $\lambda$")
        ax.set_ylabel(r"Im $\lambda$")
        ax.legend()
    return fig


def gap_figure(landscape, records=None):
    """log10 of the minimal quasi-energy gap, EPs overlaid."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        g = np.log10(np.maximum(landscape.gap, 1e-16))
        extent = [landscape.re[0], landscape.re[-1], landscape.im[0], landscape.im[-1]]
        im = ax.imshow(g, origin="lower", extent=extent, aspect="auto", cmap="viridis")
        fig.colorbar(im, ax=ax, label=r"log$_{10}$ min gap")
        if records:
            z = np.array([r.lambda_ep for r in records], dtype=complex)
            ax.scatter(z.real, z.imag, s=10, marker="x", color="w")
        ax.set_xlabel(r"Re $\lambda$")
        ax.set_ylabel(r"Im $\lambda$")
    return fig


def pt_figure(reports):
    """Conjugation defect and number of complex pairs along the imaginary axis."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        x = [r.lam.imag for r in reports]
        ax.semilogy(x, [max(r.conjugation_defect, 1e-17) for r in reports], "o-", ms=3, label="defect")
        ax.set_xlabel(r"$\lambda_I$")
        ax.set_ylabel("conjugation defect")
        ax2 = ax.twinx()
        ax2.plot(x, [r.conjugate_pair_count for r in reports], "s--", ms=3, color="C1")
        ax2.set_ylabel("complex-conjugate pairs")
    return fig


def phase_figure(diagram):
    """Winding number over the lambda plane; red line is |lambda| = 1."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 4.5))
        extent = [diagram.re[0], diagram.re[-1], diagram.im[0], diagram.im[-1]]
        w = np.where(diagram.boundary, np.nan, diagram.w).astype(float)
        im = ax.imshow(w, origin="lower", extent=extent, cmap="coolwarm", vmin=-1, vmax=1)
        fig.colorbar(im, ax=ax, ticks=[-1, 1], label="w")
        _unit_circle(ax, color="red", lw=1.0)
        ax.set_xlabel(r"Re $\lambda$")
        ax.set_ylabel(r"Im $\lambda$")
    return fig
