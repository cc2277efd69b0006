"""Figure rendering for validation reports.

Figures are written next to the delimited output of the validate command;
the measurement and mapping commands stay figure-free and emit CSV only.
Uses the non-interactive backend so rendering works headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .validate import FLAT_ANGLES, FLAT_RADII, ValidationReport  # noqa: E402


def _flat_error_grid(report: ValidationReport) -> np.ndarray:
    grid = np.full((len(FLAT_RADII), len(FLAT_ANGLES)), np.nan)
    for c in report.suite_cases("flat"):
        if "radius" not in c.detail or c.case == "sweep_runtime_s":
            continue
        i = FLAT_RADII.index(c.detail["radius"])
        j = FLAT_ANGLES.index(c.target)
        grid[i, j] = c.error
    return grid


def render_flat_errors(report: ValidationReport, path: Path) -> None:
    """Radius-by-angle grid of mean-angle errors, annotated per cell."""
    grid = _flat_error_grid(report)
    fig, ax = plt.subplots(figsize=(7.2, 5.0))
    lim = max(8.0, float(np.nanmax(np.abs(grid))) if np.isfinite(grid).any()
              else 8.0)
    im = ax.imshow(grid, cmap="RdBu_r", vmin=-lim, vmax=lim, aspect="auto")
    ax.set_xticks(range(len(FLAT_ANGLES)),
                  [f"{a:g}" for a in FLAT_ANGLES])
    ax.set_yticks(range(len(FLAT_RADII)), [f"{r}" for r in FLAT_RADII])
    ax.set_xlabel("target angle (deg)")
    ax.set_ylabel("droplet radius (voxels)")
    ax.set_title("flat-wall sweep: mean angle error (deg)")
    for i in range(len(FLAT_RADII)):
        for j in range(len(FLAT_ANGLES)):
            v = grid[i, j]
            ax.text(j, i, "n/a" if not np.isfinite(v) else f"{v:+.1f}",
                    ha="center", va="center", fontsize=9,
                    color="black" if abs(v) < 0.6 * lim or not np.isfinite(v)
                    else "white")
    fig.colorbar(im, ax=ax, label="error (deg)")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_rmse(report: ValidationReport, path: Path) -> None:
    """Error magnitude against droplet radius."""
    rows = report.rmse_by_radius()
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    if rows:
        radii = [r for r, _, _ in rows]
        rmse = [v for _, v, _ in rows]
        ax.plot(radii, rmse, "o-", color="tab:blue")
        ax.set_xscale("log")
        ax.set_xticks(radii, [str(r) for r in radii])
    ax.set_xlabel("droplet radius (voxels)")
    ax.set_ylabel("RMSE of mean angle (deg)")
    ax.set_title("resolution dependence of the flat sweep")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_grain(report: ValidationReport, path: Path) -> None:
    """Grain-case mean and mode errors with the acceptance band."""
    cases = [c for c in report.suite_cases("grain") if c.case != "mode_scatter"]
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    if cases:
        x = np.arange(len(cases))
        mean_err = [c.error for c in cases]
        mode_err = [c.detail.get("mode_deg", np.nan) - c.target for c in cases]
        ax.bar(x - 0.18, mean_err, width=0.36, label="mean", color="tab:blue")
        ax.bar(x + 0.18, mode_err, width=0.36, label="mode", color="tab:orange")
        ax.set_xticks(x, [f"{c.target:.1f}" for c in cases])
        ax.axhspan(-5, 5, color="green", alpha=0.12, label="±5° band")
        ax.legend()
    ax.set_xlabel("analytic angle (deg)")
    ax.set_ylabel("error (deg)")
    ax.set_title("droplet-on-grain cases")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_curvature(report: ValidationReport, path: Path) -> None:
    """Relative curvature deviation of the smoothed spheres."""
    cases = [c for c in report.suite_cases("curvature")
             if c.case.startswith("sphere_r") and "counts" not in c.case]
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    if cases:
        radii = [c.detail["radius"] for c in cases]
        dev = [100.0 * (c.measured / c.target - 1.0) for c in cases]
        ref = [100.0 * (c.detail["kappa_reference"] / c.target - 1.0)
               if "kappa_reference" in c.detail else np.nan for c in cases]
        x = np.arange(len(cases))
        ax.bar(x - 0.18, dev, width=0.36, label="this pipeline",
               color="tab:blue")
        ax.bar(x + 0.18, ref, width=0.36, label="reference mesh bench",
               color="tab:gray")
        ax.set_xticks(x, [f"r={r}" for r in radii])
        ax.axhline(0.0, color="black", lw=0.8)
        ax.legend()
    ax.set_ylabel("mean curvature deviation from 1/r (%)")
    ax.set_title("smoothed-sphere curvature bench")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_validation_figures(report: ValidationReport, outdir) -> list[Path]:
    """All validation figures; returns the written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    renderers = [("validation_flat_errors.png", render_flat_errors,
                  "flat"), ("validation_rmse.png", render_rmse, "flat"),
                 ("validation_grain.png", render_grain, "grain"),
                 ("validation_curvature.png", render_curvature, "curvature")]
    have = {c.suite for c in report.cases}
    for name, renderer, suite in renderers:
        if suite not in have:
            continue
        target = outdir / name
        renderer(report, target)
        written.append(target)
    return written
