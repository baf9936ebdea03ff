"""CSV reports and the matplotlib figures rendered alongside them."""

from __future__ import annotations

import math
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .diagnostics import ConvergenceReport
from .energies import StepReport
from .spectral import Field

__all__ = [
    "SERIES_COLUMNS",
    "SeriesWriter",
    "write_convergence_csv",
    "write_sweep_csv",
    "render_series_figure",
    "render_field_figure",
    "render_convergence_figure",
    "render_sweep_figure",
]

SERIES_COLUMNS = (
    "step",
    "t",
    "energy_modified",
    "energy_original",
    "mass",
    "pcg_iterations",
    "pcg_residual",
    "dissipation_defect",
    "max_abs_phi",
)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


class SeriesWriter:
    """Appends one CSV row of diagnostics per time step."""

    def __init__(self, path):
        self.path = path
        self.rows: list[tuple] = []
        self._fh = open(path, "w", encoding="utf-8")
        self._fh.write(",".join(SERIES_COLUMNS) + "\n")

    def append(self, step: int, t: float, report: StepReport) -> None:
        row = (
            step,
            t,
            report.energy_modified,
            report.energy_original,
            report.mass,
            report.pcg_iterations,
            report.pcg_residual,
            report.dissipation_defect,
            report.max_abs_phi,
        )
        self.rows.append(row)
        self._fh.write(",".join(_fmt(v) for v in row) + "\n")

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_convergence_csv(path, report: ConvergenceReport) -> None:
    lines = ["dt,err_phi_l2,err_phi_h1,err_U_l2,err_w_acc"]
    for i, dt in enumerate(report.dts):
        w_acc = report.errors_w_integrated[i] if report.errors_w_integrated is not None else math.nan
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    dt,
                    report.errors_phi_l2[i],
                    report.errors_phi_h1[i],
                    report.errors_U_l2[i],
                    w_acc,
                )
            )
        )
    rates = ", ".join(
        f"{name}={fit.rate:.4f} (R2={fit.r_squared:.4f})" for name, fit in sorted(report.rates.items())
    )
    lines.append(f"# rates: {rates}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_sweep_csv(path, rows: Sequence[dict]) -> None:
    lines = ["dt,steps,max_energy_increase,tolerance,passed"]
    for row in rows:
        lines.append(
            ",".join(
                (
                    _fmt(row["dt"]),
                    str(row["steps"]),
                    _fmt(row["max_energy_increase"]),
                    _fmt(row["tolerance"]),
                    str(int(row["passed"])),
                )
            )
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


# --- figures ---------------------------------------------------------------------


def render_series_figure(rows: Sequence[tuple], path) -> None:
    """Energy and mass history for one simulation."""
    if not rows:
        return
    data = np.asarray([[float(v) for v in row] for row in rows])
    t = data[:, 1]
    fig, (ax_e, ax_m) = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True)
    ax_e.plot(t, data[:, 2], label="quadratized energy", lw=1.5)
    ax_e.plot(t, data[:, 3], label="free energy", lw=1.2, ls="--")
    ax_e.set_ylabel("energy")
    ax_e.legend(frameon=False)
    ax_m.plot(t, data[:, 4], color="tab:green", lw=1.5)
    ax_m.set_ylabel("mass")
    ax_m.set_xlabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_field_figure(field: Field, path, title: str | None = None) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    if field.grid.dim == 1:
        (x,) = field.grid.coordinates()
        ax.plot(x, field.values, lw=1.5)
        ax.set_xlabel("x")
        ax.set_ylabel("phi")
    else:
        l1, l2 = field.grid.lengths
        im = ax.imshow(
            field.values.T,
            origin="lower",
            extent=[0.0, l1, 0.0, l2],
            cmap="RdBu_r",
            interpolation="nearest",
        )
        fig.colorbar(im, ax=ax, label="phi")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_convergence_figure(report: ConvergenceReport, path) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    dts = np.asarray(report.dts)
    series = [
        ("phi L2", report.errors_phi_l2),
        ("phi H1", report.errors_phi_h1),
        ("U L2", report.errors_U_l2),
        ("combined", report.errors_combined),
    ]
    for label, errs in series:
        ax.loglog(dts, errs, "o-", label=label, lw=1.2, ms=4)
    anchor = report.errors_combined[0]
    ax.loglog(dts, anchor * dts / dts[0], "k:", lw=1.0, label="slope 1")
    rate = report.rates["combined"]
    ax.set_title(f"{report.scheme}: combined rate {rate.rate:.3f} (R2={rate.r_squared:.4f})")
    ax.set_xlabel("dt")
    ax.set_ylabel("error at final time")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sweep_figure(rows: Sequence[dict], path) -> None:
    if not rows:
        return
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    dts = [row["dt"] for row in rows]
    floor = 1e-18
    increases = [max(row["max_energy_increase"], floor) for row in rows]
    tolerances = [max(row["tolerance"], floor) for row in rows]
    ax.loglog(dts, increases, "o-", label="max energy increase", lw=1.2)
    ax.loglog(dts, tolerances, "s--", label="allowed", lw=1.0)
    ax.set_xlabel("dt")
    ax.set_ylabel("single-step energy increase")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
