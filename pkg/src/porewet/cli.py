"""Command-line entry points.

Subcommands: phantom (synthetic test volumes), measure (contact angles from
a segmented volume), map (wettability field from measurements), validate
(self-checking accuracy suite with figures), curvature (smoothed-sphere
bench). Exit codes: 0 success, 1 validation-threshold failure, 2 usage or
configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io
from .config import PipelineConfig, apply_overrides, load_config
from .errors import DimensionError, ParameterError
from .meshing import mean_curvature
from .pipeline import measure_volume
from .validate import (RMSE_HEADER, TREND_HEADER, VALIDATION_HEADER,
                       ValidationReport, report_rows, rmse_rows, run_all,
                       run_curvature_suite, trend_rows)
from .volume import PhantomSpec, gen_flat_droplet, gen_grain_droplet
from .wetmap import build_field, field_histogram

HISTOGRAM_HEADER = ["theta_low", "theta_high", "count"]


def _outdir(args) -> Path:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_pipeline_config(args) -> PipelineConfig:
    cfg = load_config(getattr(args, "config", None))
    return apply_overrides(cfg, getattr(args, "set", None) or [])


def _require_inputs(*paths) -> None:
    """Inputs named by configuration must exist before any work starts."""
    for p in paths:
        if p is not None and not Path(p).exists():
            raise ParameterError(f"input file not found: {p}")


def cmd_phantom(args) -> int:
    out = _outdir(args)
    if args.kind == "flat":
        spec = PhantomSpec("flat", args.radius, target_angle=args.theta,
                           margin=args.margin)
        vol = gen_flat_droplet(spec)
        analytic = float(args.theta)
        stem = args.name or f"flat_r{args.radius:g}_theta{args.theta:g}"
    else:
        spec = PhantomSpec("grain", args.rd, grain_radius=args.rg,
                           center_separation=args.sep, margin=args.margin)
        vol, analytic = gen_grain_droplet(spec)
        stem = args.name or f"grain_rg{args.rg:g}_rd{args.rd:g}_sep{args.sep:g}"
    io.save_volume(vol, out / f"{stem}.raw")
    io.write_json(out / f"{stem}_report.json", {
        "kind": args.kind,
        "dims": list(vol.dims),
        "theta_analytical": analytic,
    })
    print(f"wrote {out / (stem + '.raw')} "
          f"(theta_analytical {io.fmt6(analytic)} deg)")
    return 0


def cmd_measure(args) -> int:
    cfg = _load_pipeline_config(args)
    _require_inputs(args.volume)
    out = _outdir(args)
    vol = io.load_volume(args.volume)
    result = measure_volume(vol, cfg)

    io.write_measurements_csv(out / "measurements.csv",
                              result.all_measurements())
    io.write_summary_csv(out / "summary.csv",
                         [p.stats for p in result.paths if p.stats is not None])
    io.write_paths_csv(out / "paths.csv",
                       [p.smoothed for p in result.paths])
    if result.pair is not None and args.meshes:
        curvature = mean_curvature(result.pair.parent) if args.vertex_curvature \
            else None
        io.write_interface_ply(out / "interfaces.ply", result.pair, curvature)

    mean, std, count = result.global_stats()
    io.write_json(out / "run_report.json", {
        "loops": len(result.paths),
        "measured_loops": sum(1 for p in result.paths if p.measured),
        "accepted_nodes": count,
        "global_mean_deg": mean,
        "global_std_deg": std,
        "warnings": result.notes,
    })
    for note in result.notes:
        print(f"warning: {note}", file=sys.stderr)
    if count:
        print(f"contact angle: {io.fmt6(mean)} +/- {io.fmt6(std)} deg "
              f"over {count} nodes on {len(result.paths)} loop(s)")
    else:
        print("no contact-angle measurements")
    return 0


def cmd_map(args) -> int:
    cfg = _load_pipeline_config(args)
    _require_inputs(args.volume, args.measurements, args.summary)
    out = _outdir(args)
    vol = io.load_volume(args.volume)
    paths = io.read_measured_paths(args.measurements, args.summary)
    field = build_field(vol, paths, cfg.mapping)
    io.save_field(field, out / "wetmap.raw")

    hist = field_histogram(field)
    rows = [[float(hist.edges[i]), float(hist.edges[i + 1]), int(n)]
            for i, n in enumerate(hist.counts)]
    io.write_csv(out / "histogram.csv", HISTOGRAM_HEADER, rows)

    warnings = []
    if not paths:
        warnings.append("no measured paths; invaded voxels fall back to "
                        "unassigned")
    io.write_json(out / "map_report.json", {
        "total_assigned": hist.total_assigned,
        "fraction_water_wet": hist.fraction_water_wet,
        "fraction_intermediate": hist.fraction_intermediate,
        "fraction_oil_wet": hist.fraction_oil_wet,
        "warnings": warnings,
    })
    for note in warnings:
        print(f"warning: {note}", file=sys.stderr)
    print(f"assigned {hist.total_assigned} voxels "
          f"-> {out / 'wetmap.raw'}")
    return 0


def cmd_validate(args) -> int:
    cfg = _load_pipeline_config(args)
    suites = tuple(s.strip() for s in args.suites.split(",") if s.strip())
    unknown = set(suites) - {"flat", "grain", "curvature"}
    if unknown:
        raise ParameterError(f"unknown suite(s): {sorted(unknown)}")
    out = _outdir(args)

    report = run_all(cfg, suites=suites)
    io.write_csv(out / "validation.csv", VALIDATION_HEADER,
                 report_rows(report))
    io.write_csv(out / "validation_rmse.csv", RMSE_HEADER, rmse_rows(report))
    io.write_csv(out / "validation_trend.csv", TREND_HEADER,
                 trend_rows(report))
    io.write_json(out / "validation.json", {
        "passed": report.passed,
        "runtime_s": report.runtime_s,
        "cases": len(report.cases),
        "failures": [c.case for c in report.failures],
    })
    if cfg.figures:
        from .report import render_validation_figures
        for fig_path in render_validation_figures(report, out):
            print(f"figure {fig_path}")

    for c in report.cases:
        print(f"{c.status:>4}  {c.suite}/{c.case}: measured "
              f"{io.fmt6(c.measured)} target {io.fmt6(c.target)} "
              f"(error {io.fmt6(c.error)})")
    n_fail = len(report.failures)
    print(f"validation {'PASSED' if report.passed else 'FAILED'} "
          f"({len(report.cases)} cases, {n_fail} failures, "
          f"{io.fmt6(report.runtime_s)} s)")
    return 0 if report.passed else 1


def cmd_curvature(args) -> int:
    radii = tuple(args.radius) if args.radius else (50, 28, 6)
    cases = run_curvature_suite(iterations=args.iterations, lam=args.lam,
                                mu=args.mu, radii=radii)
    if args.output is not None:
        out = _outdir(args)
        report = ValidationReport(cases, 0.0)
        io.write_csv(out / "curvature.csv", VALIDATION_HEADER,
                     report_rows(report))
        print(f"wrote {out / 'curvature.csv'}")
    for c in cases:
        print(f"{c.status:>4}  {c.case}: measured {io.fmt6(c.measured)} "
              f"target {io.fmt6(c.target)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="porewet",
        description="Pore-scale contact angles and wettability maps from "
                    "segmented voxel volumes.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config=True):
        p.add_argument("-o", "--output", default=".",
                       help="output directory (created if missing)")
        if config:
            p.add_argument("-c", "--config", default=None,
                           help="TOML parameter file")
            p.add_argument("--set", action="append", metavar="KEY=VALUE",
                           help="override one parameter, e.g. "
                            "--set taubin.iterations_ff=8")

    p = sub.add_parser("phantom", help="generate a synthetic test volume")
    kind = p.add_subparsers(dest="kind", required=True)
    flat = kind.add_parser("flat", help="spherical droplet on a flat wall")
    flat.add_argument("--radius", type=float, required=True,
                      help="droplet radius in voxels")
    flat.add_argument("--theta", type=float, required=True,
                      help="target contact angle in degrees")
    grain = kind.add_parser("grain", help="droplet wrapped on a spherical "
                                          "grain")
    grain.add_argument("--rg", type=float, required=True,
                       help="grain radius in voxels")
    grain.add_argument("--rd", type=float, required=True,
                       help="droplet radius in voxels")
    grain.add_argument("--sep", type=float, required=True,
                       help="center separation in voxels")
    for sp in (flat, grain):
        sp.add_argument("--margin", type=int, default=5,
                        help="empty border around the body (voxels)")
        sp.add_argument("--name", default=None, help="output file stem")
        add_common(sp, config=False)
        sp.set_defaults(func=cmd_phantom)

    p = sub.add_parser("measure", help="measure contact angles in a "
                                       "segmented volume")
    p.add_argument("volume", help="raw volume (with JSON sidecar)")
    p.add_argument("--no-meshes", dest="meshes", action="store_false",
                   help="skip the tagged PLY surface export")
    p.add_argument("--vertex-curvature", action="store_true",
                   help="add per-vertex curvature to the PLY export")
    add_common(p)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("map", help="interpolate measurements into a "
                                   "wettability field")
    p.add_argument("volume", help="raw volume the measurements came from")
    p.add_argument("--measurements", required=True,
                   help="per-node measurement CSV")
    p.add_argument("--summary", required=True, help="per-path summary CSV")
    add_common(p)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("validate", help="run the self-checking accuracy "
                                        "suite")
    p.add_argument("--suites", default="flat,grain,curvature",
                   help="comma-separated subset of flat,grain,curvature")
    add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("curvature", help="smoothed-sphere curvature bench")
    p.add_argument("--radius", type=int, action="append",
                   help="sphere radius, repeatable (default 50 28 6)")
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--lam", type=float, default=0.5)
    p.add_argument("--mu", type=float, default=-0.53)
    p.add_argument("-o", "--output", default=None,
                   help="also write curvature.csv here")
    p.set_defaults(func=cmd_curvature)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, DimensionError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
