"""Command-line entry point: ``cvbeam {simulate,pipeline,codebook inspect}``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from .array import half_power_beamwidth, worst_case_crossover_gain, worst_case_pointing_error
from .config import default_config, dump_config, load_config
from .errors import CvbeamError
from .experiment import emit_heatmap_csv, emit_summary, run_grid_experiment
from .pipeline import run_detection_pipeline
from .protocol import write_sessions_jsonl

log = logging.getLogger("cvbeam")


def _cmd_simulate(args) -> int:
    if args.print_defaults:
        sys.stdout.write(dump_config(default_config()))
        return 0
    if args.out is None:
        raise CvbeamError("simulate needs --out (or --print-defaults)")
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = run_grid_experiment(cfg)
    emit_heatmap_csv(result.cells, out / "heatmap.csv")
    text = emit_summary(result.summary, "text", cfg, result.cells)
    (out / "summary.txt").write_text(text, encoding="utf-8")
    (out / "summary.json").write_text(emit_summary(result.summary, "json", cfg, result.cells), encoding="utf-8")
    if args.sessions:
        write_sessions_jsonl((s for pair in result.sessions for s in pair), out / "sessions.jsonl")
    sys.stdout.write(text)
    return 0


def _cmd_pipeline(args) -> int:
    cfg = load_config(args.config)
    result = run_detection_pipeline(args.detections, cfg)
    records = []
    for e in result.estimates:
        x, y, z = e.position.as_tuple()
        records.append(
            {
                "frame_id": e.record.frame_id,
                "x": x,
                "y": y,
                "z": z,
                "r": e.spherical.r,
                "theta_deg": e.spherical.theta_deg,
                "phi_deg": e.spherical.phi_deg,
            }
        )
    report = {
        "localized": len(result.estimates),
        "person_records": result.n_person,
        "malformed_lines": result.n_malformed,
        "rejected_records": result.n_rejected,
        "mean_distance_error_cm": result.stats.mean_distance_cm if result.stats else None,
        "mean_angle_error_deg": result.stats.mean_angle_deg if result.stats else None,
    }
    if args.json:
        json.dump({"summary": report, "estimates": records}, sys.stdout, indent=2)
        sys.stdout.write("\n")
        return 0
    for r in records:
        print(
            f"frame {r['frame_id']}: x={r['x']:.4f} y={r['y']:.4f} z={r['z']:.4f} m  "
            f"r={r['r']:.4f} m theta={r['theta_deg']:.4f} deg phi={r['phi_deg']:.4f} deg"
        )
    for k, v in report.items():
        print(f"{k}: {'-' if v is None else (f'{v:.6g}' if isinstance(v, float) else v)}")
    return 0


def _cmd_codebook_inspect(args) -> int:
    cfg = load_config(args.config)
    cb = cfg.codebook
    step_h, step_v = cb.lattice_step
    g_min = worst_case_crossover_gain(cb)
    print(f"array: {cfg.bs_array.n_h}x{cfg.bs_array.n_v}, spacing {cfg.bs_array.spacing_wavelengths} wavelengths")
    print(f"oversampling: {cb.oversampling[0]}x{cb.oversampling[1]}")
    print(f"codewords: {len(cb)} ({int(cb.visible.sum())} in the visible region)")
    print(f"lattice spacing (direction cosine): h={step_h:.6g} v={step_v:.6g}")
    print(f"worst-case crossover gain: {10 * math.log10(g_min):.4f} dB ({g_min:.6f} of peak)")
    print(f"worst-case pointing error, theta <= 60 deg: {worst_case_pointing_error(cb):.4f} deg")
    for axis, n in (("h", cfg.bs_array.n_h), ("v", cfg.bs_array.n_v)):
        hpbw = f"{half_power_beamwidth(cfg.bs_array, axis):.4f} deg" if n >= 2 else "n/a (single element)"
        print(f"half-power beamwidth ({axis}): {hpbw}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cvbeam", description="5G-BM vs vision-aided beam management simulator")
    p.add_argument("-v", "--verbose", action="store_true", help="log every config field and warning")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the grid rate-map experiment")
    sim.add_argument("--config", help="config file (defaults when omitted)")
    sim.add_argument("--out", help="output directory")
    sim.add_argument("--sessions", action="store_true", help="also write sessions.jsonl")
    sim.add_argument("--print-defaults", action="store_true", help="print the default config and exit")
    sim.set_defaults(func=_cmd_simulate)

    pipe = sub.add_parser("pipeline", help="localize detections from a JSON-lines file")
    pipe.add_argument("--detections", required=True)
    pipe.add_argument("--config")
    pipe.add_argument("--json", action="store_true", help="machine-readable output")
    pipe.set_defaults(func=_cmd_pipeline)

    cbk = sub.add_parser("codebook", help="codebook tools")
    cbk_sub = cbk.add_subparsers(dest="action", required=True)
    insp = cbk_sub.add_parser("inspect", help="print codebook statistics")
    insp.add_argument("--config")
    insp.set_defaults(func=_cmd_codebook_inspect)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (CvbeamError, OSError) as exc:
        print(f"cvbeam: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
