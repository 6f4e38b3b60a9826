"""Command-line entry points: simulate, validate, field.

Exit codes: 0 success, 1 validation/run failure, 2 usage or config
errors.  Flags override the corresponding config keys.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="gravsheets",
        description="Event-driven dynamics of 1D periodic self-gravitating sheets")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one experiment from a config file")
    sim.add_argument("config", help="path to key=value run configuration")
    sim.add_argument("--n-pairs", type=int, default=None)
    sim.add_argument("--gamma", type=float, default=None)
    sim.add_argument("--t-end", type=float, default=None)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--mode", choices=("periodic", "symmetric"), default=None)
    sim.add_argument("--out", default=None, help="output directory")
    sim.add_argument("--tolerance", type=float, default=None,
                     help="crossing-root tolerance")

    val = sub.add_parser("validate", help="run the invariant battery")
    val.add_argument("--tier", choices=("fast", "full"), default="fast")
    val.add_argument("--report", default=None, help="write the JSON report here")

    fld = sub.add_parser("field", help="tabulate potential/field laws over a grid")
    fld.add_argument("config", help="path to key=value run configuration")
    fld.add_argument("sources", help="text file with one source position per line")
    fld.add_argument("--grid-points", type=int, default=257)
    fld.add_argument("--n-max", type=int, default=10_000,
                     help="series truncation for the spectral columns")
    fld.add_argument("--out", default=None, help="output table path (default stdout)")
    return parser


def _load_config(args):
    from .runio import ConfigError, override_config, parse_config

    try:
        cfg = parse_config(args.config)
        return override_config(
            cfg,
            n_pairs=getattr(args, "n_pairs", None),
            gamma=getattr(args, "gamma", None),
            t_end=getattr(args, "t_end", None),
            seed=getattr(args, "seed", None),
            mode=getattr(args, "mode", None),
            out_dir=getattr(args, "out", None),
            root_tolerance=getattr(args, "tolerance", None),
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE) from None


def _cmd_simulate(args) -> int:
    from .domain import SystemState
    from .experiments import make_waterbag, run_experiment
    from .runio import write_diagnostics, write_manifest, write_snapshot

    run_cfg = _load_config(args)
    domain = run_cfg.domain()
    spec = run_cfg.waterbag()
    out_dir = Path(run_cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    schedule = run_cfg.schedule()
    initial = make_waterbag(spec, domain, mirror=run_cfg.mirrored())
    snapshot_names = []
    try:
        frames = run_experiment(
            run_cfg.mode, spec, domain, schedule, initial_state=initial,
            histogram_bins=run_cfg.histogram_bins,
            cluster_threshold=run_cfg.cluster_threshold,
            symmetry_break_eps=run_cfg.symmetry_break_eps,
            root_tol=run_cfg.root_tolerance)
    except Exception as exc:  # flag partial outputs, keep what exists
        write_manifest(out_dir / "manifest.json", run_cfg, snapshot_names,
                       status="failed", error=str(exc))
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    for idx, frame in enumerate(frames):
        name = f"snapshot_{idx:05d}.dat"
        state = SystemState(frame.time, frame.positions, frame.velocities,
                            frame.labels)
        write_snapshot(out_dir / name, state, run_cfg, frame.n_events,
                       wrapped_positions=frame.positions)
        snapshot_names.append(name)
    write_diagnostics(out_dir / "diagnostics.dat", frames)
    write_manifest(out_dir / "manifest.json", run_cfg, snapshot_names,
                   status="complete")
    print(f"wrote {len(snapshot_names)} snapshots to {out_dir}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    from .runio import write_report
    from .validate import run_validation

    report = run_validation(args.tier)
    for check in report["checks"]:
        status = "pass" if check["passed"] else "FAIL"
        print(f"[{status}] {check['name']}: measured {check['measured']:.3e}"
              f" vs tolerance {check['tolerance']:.3e}")
    if args.report:
        write_report(args.report, report)
    print(f"tier={report['tier']} checks={len(report['checks'])} "
          f"passed={report['passed']} ({report['seconds']}s)")
    return EXIT_OK if report["passed"] else EXIT_FAILURE


def _read_sources(path, domain):
    sources = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            value = float(line)
        except ValueError:
            print(f"{path}:{lineno}: not a number: {raw!r}", file=sys.stderr)
            raise SystemExit(EXIT_USAGE) from None
        if not (-domain.half_length <= value < domain.half_length):
            print(f"{path}:{lineno}: source {value} outside "
                  f"[-L, L) with L = {domain.half_length}", file=sys.stderr)
            raise SystemExit(EXIT_USAGE)
        sources.append(value)
    return np.asarray(sources)


def _cmd_field(args) -> int:
    from .domain import (primitive_cell_total_field,
                         single_particle_potential, total_field)
    from .spectral import FourierTruncation, series_field, series_potential

    run_cfg = _load_config(args)
    domain = run_cfg.domain()
    if args.grid_points < 2:
        print("--grid-points must be >= 2", file=sys.stderr)
        return EXIT_USAGE
    sources = _read_sources(args.sources, domain)
    xs = (-domain.half_length
          + domain.period * np.arange(args.grid_points) / args.grid_points)
    if sources.size:
        phi_sum = sum(single_particle_potential(xs, xj, domain) for xj in sources)
        e_sum = total_field(xs, sources, domain)
        trunc = FourierTruncation(args.n_max)
        phi_series = series_potential(xs, sources, trunc, domain)
        e_series = series_field(xs, sources, trunc, domain)
        e_prim = primitive_cell_total_field(xs, sources, domain)
    else:
        phi_sum = e_sum = phi_series = e_series = e_prim = np.zeros_like(xs)
    lines = ["# columns: x phi_sum e_sum phi_series e_series e_primitive",
             f"# sources: {sources.size}   n_max: {args.n_max}"]
    for row in zip(xs, phi_sum, e_sum, phi_series, e_series, e_prim):
        lines.append(" ".join(format(v, ".17g") for v in row))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.grid_points} rows to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; normalize other codes
        return EXIT_USAGE if exc.code not in (0,) else 0
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "validate":
            return _cmd_validate(args)
        return _cmd_field(args)
    except SystemExit as exc:
        return int(exc.code)


if __name__ == "__main__":
    sys.exit(main())
