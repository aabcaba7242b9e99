"""Command-line entry point: run scenarios and write plot-ready tables.

Subcommands:
    run              integrate one scenario, write trajectory.csv + summary
    sensitivity      one-at-a-time parameter sweep, relative-variation tables
    homog-compare    resolved vs averaged transport, velocity traces + errors
    evaluate-starch  starch digestion benchmark, JSON verdict

All tables are comma-separated UTF-8 with LF line endings, a units-bearing
header row, and 17-significant-digit floats so that identical configs
reproduce byte-identical files. The output directory is taken from
--out, else the DIGESTSIM_OUT environment variable, else ./digestsim-out.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .analysis import (HomogenizationEntry, compare_homogenization,
                       evaluate_starch, homogenization_error,
                       sensitivity_sweep)
from .config import ScenarioConfig, build_scenario, load_scenario
from .errors import ConfigError, DigestsimError
from .integrator import Trajectory

TRAJECTORY_HEADER = ("t_s", "x_m", "v_mps", "a_s_g", "a_ns_g", "a_nd_g",
                     "b_int_g", "b_abs_g", "w_g", "e_g", "absorbed_cum_g")

_TRAJECTORY_FIELDS = ("x", "v", "a_s", "a_ns", "a_nd", "b_int", "b_abs",
                      "w", "e", "absorbed_cum")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="\n")
    os.replace(tmp, path)


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) if isinstance(v, float) else str(v)
                          for v in row) for row in rows)
    _atomic_write(path, "\n".join(lines) + "\n")


def _write_json(path: Path, obj) -> None:
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_trajectory(path: Path, tr: Trajectory) -> None:
    rows = [[t] + [getattr(s, name) for name in _TRAJECTORY_FIELDS]
            for t, s in zip(tr.times, tr.states)]
    _write_csv(path, TRAJECTORY_HEADER, rows)


def _summary_dict(tr: Trajectory) -> dict:
    out = {
        "exit_flag": tr.exit_flag,
        "exit_time_s": tr.exit_time,
        "samples": len(tr.times),
    }
    out.update(tr.diagnostics)
    return out


def _load(args) -> ScenarioConfig:
    if args.config is None:
        return build_scenario(None)
    return load_scenario(args.config)


def _out_dir(args) -> Path:
    if args.out is not None:
        out = Path(args.out)
    elif os.environ.get("DIGESTSIM_OUT"):
        out = Path(os.environ["DIGESTSIM_OUT"])
    else:
        out = Path("digestsim-out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _audit_ok(scenario: ScenarioConfig, tr: Trajectory) -> bool:
    return (tr.diagnostics["ledger_drift_rel"]
            <= 10.0 * scenario.integration.rel_tol)


def cmd_run(args) -> int:
    scenario = _load(args)
    if args.validate_only:
        print("config OK")
        return 0
    out = _out_dir(args)
    tr = scenario.run()
    write_trajectory(out / "trajectory.csv", tr)
    summary = _summary_dict(tr)
    audit_ok = _audit_ok(scenario, tr)
    summary["ledger_audit_ok"] = audit_ok
    _write_json(out / "run_summary.json", summary)
    print(f"run: {tr.exit_flag}, exit_time_s="
          f"{_fmt(tr.exit_time) if tr.exit_time is not None else 'n/a'}, "
          f"ledger_drift_rel={_fmt(tr.diagnostics['ledger_drift_rel'])}")
    if tr.exit_flag == "degenerate_state":
        print(f"degenerate: {tr.diagnostics.get('degenerate_reason', '')}",
              file=sys.stderr)
        return 1
    if not audit_ok:
        print("mass ledger audit failed", file=sys.stderr)
        return 1
    return 0


def _cell_filename(parameter: str, factor: float) -> str:
    return f"sensitivity_{parameter}_x{factor:g}.csv"


def cmd_sensitivity(args) -> int:
    scenario = _load(args)
    if args.validate_only:
        print("config OK")
        return 0
    out = _out_dir(args)
    report = sensitivity_sweep(scenario, jobs=args.jobs)
    header = ("t_s", "relvar_a_s", "relvar_b_abs", "relvar_v")
    for cell in report.cells:
        if not cell.ok:
            continue
        rows = zip(cell.times, cell.relvar["a_s"], cell.relvar["b_abs"],
                   cell.relvar["v"])
        _write_csv(out / _cell_filename(cell.parameter, cell.factor),
                   header, ([float(v) for v in row] for row in rows))
    summary_rows = []
    for cell in sorted(report.cells, key=lambda c: (c.parameter, c.factor)):
        for output in ("a_s", "b_abs", "v"):
            summary_rows.append([
                cell.parameter, cell.resolved, float(cell.factor), output,
                float(cell.max_rv.get(output, float("nan"))),
                float(cell.avg_rv.get(output, float("nan"))),
                "ok" if cell.ok else f"failed: {cell.error}",
            ])
    _write_csv(out / "sensitivity_summary.csv",
               ("parameter", "resolved_parameter", "factor", "output",
                "max_relvar", "timeavg_relvar", "status"),
               summary_rows)
    failed = [c for c in report.cells if not c.ok]
    print(f"sensitivity: {len(report.cells)} cells, {len(failed)} failed")
    for cell in failed:
        print(f"  {cell.parameter} x{cell.factor:g}: {cell.error}",
              file=sys.stderr)
    return 0 if not failed else 1


def cmd_homog_compare(args) -> int:
    scenario = _load(args)
    if args.validate_only:
        print("config OK")
        return 0
    out = _out_dir(args)
    entry, grid, v3, v4 = compare_homogenization(scenario)
    rows = [[float(t), float(a), float(b)] for t, a, b in zip(grid, v3, v4)]
    _write_csv(out / "velocity_traces.csv", ("t_s", "v_m3_mps", "v_m4_mps"),
               rows)
    entries: list[HomogenizationEntry] = [entry]
    extra = [eps for eps in scenario.homog_eps_list
             if eps != scenario.params.pulse_width_eps]
    if extra:
        entries.extend(homogenization_error(scenario, extra))
    _write_csv(out / "homog_errors.csv",
               ("pulse_width_eps_s", "pulse_period_s",
                "sup_position_error_frac", "max_windowed_velocity_error",
                "mean_windowed_velocity_error", "transient_s"),
               [[e.eps, e.period, e.sup_position_error,
                 e.max_windowed_velocity_error,
                 e.mean_windowed_velocity_error, e.transient_s]
                for e in entries])
    print(f"homog-compare: sup position error "
          f"{100 * entry.sup_position_error:.3f}% of L, max windowed "
          f"velocity error {100 * entry.max_windowed_velocity_error:.3f}%")
    return 0


def cmd_evaluate_starch(args) -> int:
    scenario = _load(args)
    if args.validate_only:
        print("config OK")
        return 0
    out = _out_dir(args)
    result = evaluate_starch(scenario)
    _write_json(out / "starch_evaluation.json", {
        "inputs": {"wet_digesta_g": result.wet_input_g,
                   "dry_matter_g": result.dry_input_g},
        "outputs": {"wet_digesta_pct": result.wet_output_pct,
                    "dry_matter_g": result.dry_output_g},
        "reference": {"wet_digesta_pct": result.reference_wet_output_pct,
                      "dry_matter_g": result.reference_dry_output_g},
        "tolerances": {"wet_digesta_pp": result.wet_tolerance_pp,
                       "dry_matter_g": result.dry_tolerance_g},
        "experimental_reference": result.experimental_reference,
        "wet_ok": result.wet_ok,
        "dry_ok": result.dry_ok,
        "passed": result.passed,
        "exit_flag": result.exit_flag,
        "exit_time_s": result.exit_time_s,
    })
    print(f"evaluate-starch: wet {result.wet_output_pct:.2f}% "
          f"(ref {result.reference_wet_output_pct}%), dry "
          f"{result.dry_output_g:.4f} g (ref {result.reference_dry_output_g} g)"
          f" -> {'PASS' if result.passed else 'FAIL'}")
    return 0 if result.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="digestsim",
        description="Bolus transit and digestion simulation")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in (("run", cmd_run),
                       ("sensitivity", cmd_sensitivity),
                       ("homog-compare", cmd_homog_compare),
                       ("evaluate-starch", cmd_evaluate_starch)):
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, default=None,
                        help="scenario file (defaults are used if omitted)")
        sp.add_argument("--out", type=Path, default=None,
                        help="output directory (default: $DIGESTSIM_OUT or "
                             "./digestsim-out)")
        sp.add_argument("--jobs", type=int, default=1,
                        help="parallel reruns for sweeps")
        sp.add_argument("--validate-only", action="store_true",
                        help="parse and validate the config, run nothing")
        sp.add_argument("--seedless", action="store_true",
                        help="reserved; every run is already deterministic")
        sp.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DigestsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
