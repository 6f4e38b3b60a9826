"""Run configuration, snapshot/diagnostics file formats, manifests.

The config format is flat ``key = value`` text ('#' comments, blank
lines allowed) so runs diff cleanly.  Snapshots are delimited text with
a commented header echoing the full config; every float is written with
17 significant digits so files round-trip bit-exactly and reruns of the
same config produce byte-identical data.
"""

import json
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .domain import DomainConfig, SystemState
from .experiments import BOUNDARY_MODES, PLACEMENTS, WaterbagSpec

FORMAT_VERSION = 1


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


@dataclass(frozen=True)
class RunConfig:
    """Everything a `simulate` run needs; defaults follow the scaled
    convention half_length = n_pairs (mean gap 1, unit natural rate)."""

    n_pairs: int = 16
    half_length: float | None = None   # None -> n_pairs (scaled units)
    coupling: float = 1.0
    gamma: float = 0.0
    v0: float = 0.5
    placement: str = "lattice"
    seed: int = 1
    zero_mean_velocity: bool = True
    mode: str = "periodic"
    mirror_ic: bool | None = None      # None -> (mode == "symmetric")
    symmetry_break_eps: float = 0.0
    t_end: float = 10.0
    snapshot_interval: float = 1.0
    out_dir: str = "out"
    root_tolerance: float = 1e-12
    histogram_bins: int | None = None  # None -> 2N/8
    cluster_threshold: float | None = None  # None -> L/(4N)

    def __post_init__(self):
        if self.n_pairs < 1:
            raise ValueError(f"n_pairs must be >= 1, got {self.n_pairs}")
        if self.t_end <= 0:
            raise ValueError(f"t_end must be > 0, got {self.t_end}")
        if self.snapshot_interval <= 0:
            raise ValueError(f"snapshot_interval must be > 0, got {self.snapshot_interval}")
        if self.mode not in BOUNDARY_MODES:
            raise ValueError(f"mode must be one of {BOUNDARY_MODES}")
        if self.placement not in PLACEMENTS:
            raise ValueError(f"placement must be one of {PLACEMENTS}")
        if self.root_tolerance <= 0:
            raise ValueError("root_tolerance must be > 0")

    def domain(self) -> DomainConfig:
        half = self.half_length if self.half_length is not None else float(self.n_pairs)
        return DomainConfig(half_length=half, n_pairs=self.n_pairs,
                            coupling=self.coupling, gamma=self.gamma)

    def waterbag(self) -> WaterbagSpec:
        return WaterbagSpec(count=2 * self.n_pairs, v0=self.v0,
                            placement=self.placement, seed=self.seed,
                            zero_mean_velocity=self.zero_mean_velocity)

    def mirrored(self) -> bool:
        return self.mode == "symmetric" if self.mirror_ic is None else self.mirror_ic

    def schedule(self):
        n_steps = int(round(self.t_end / self.snapshot_interval))
        ts = [k * self.snapshot_interval for k in range(n_steps + 1)]
        if ts[-1] < self.t_end - 1e-12 * self.t_end:
            ts.append(self.t_end)
        return ts

    def echo_lines(self):
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, bool):
                out.append(f"{f.name} = {'true' if v else 'false'}")
            elif isinstance(v, float):
                out.append(f"{f.name} = {_fmt(v)}")
            else:
                out.append(f"{f.name} = {v}")
        return out


class ConfigError(ValueError):
    """Config file problem, annotated with the offending line number."""


_BOOL_WORDS = {"true": True, "false": False, "yes": True, "no": False,
               "1": True, "0": False}

_INT_KEYS = {"n_pairs", "seed", "histogram_bins"}
_FLOAT_KEYS = {"half_length", "coupling", "gamma", "v0", "symmetry_break_eps",
               "t_end", "snapshot_interval", "root_tolerance",
               "cluster_threshold"}
_BOOL_KEYS = {"zero_mean_velocity", "mirror_ic"}
_STR_KEYS = {"placement", "mode", "out_dir"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _BOOL_KEYS | _STR_KEYS


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            if key in _INT_KEYS:
                values[key] = int(val)
            elif key in _FLOAT_KEYS:
                values[key] = float(val)
            elif key in _BOOL_KEYS:
                values[key] = _BOOL_WORDS[val.lower()]
            else:
                values[key] = val
        except (ValueError, KeyError):
            raise ConfigError(
                f"{source}:{lineno}: bad value {val!r} for {key!r}") from None
    try:
        return RunConfig(**values)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def parse_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config_text(text, source=str(path))


def override_config(cfg: RunConfig, **overrides) -> RunConfig:
    kept = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **kept) if kept else cfg


# ---------------------------------------------------------------------------
# snapshots
# ---------------------------------------------------------------------------


def write_snapshot(path, state: SystemState, run_cfg: RunConfig,
                   event_count: int, wrapped_positions=None):
    """One output time: commented header + one `label x v` row per sheet.
    Positions are written wrapped into the primitive cell."""
    from .domain import wrap_to_cell

    q = (np.asarray(wrapped_positions) if wrapped_positions is not None
         else np.asarray(wrap_to_cell(state.positions, run_cfg.domain())))
    lines = [f"# gravsheets snapshot format {FORMAT_VERSION}"]
    lines += [f"# cfg {line}" for line in run_cfg.echo_lines()]
    lines.append(f"# time = {_fmt(state.time)}")
    lines.append(f"# events = {event_count}")
    lines.append("# columns: label x_wrapped v")
    for lab, x, v in zip(state.labels, q, state.velocities):
        lines.append(f"{int(lab)} {_fmt(x)} {_fmt(v)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_snapshot(path):
    """Parse a snapshot back into (SystemState with wrapped positions,
    meta dict with 'time', 'events', 'config')."""
    meta = {"config_lines": []}
    labels, xs, vs = [], [], []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("cfg "):
                meta["config_lines"].append(body[4:])
            elif body.startswith("time ="):
                meta["time"] = float(body.split("=", 1)[1])
            elif body.startswith("events ="):
                meta["events"] = int(body.split("=", 1)[1])
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 3 columns, got {len(parts)}")
        labels.append(int(parts[0]))
        xs.append(float(parts[1]))
        vs.append(float(parts[2]))
    meta["config"] = parse_config_text("\n".join(meta.pop("config_lines")),
                                       source=f"{path}#header")
    order = np.argsort(np.asarray(xs), kind="stable")
    state = SystemState(meta.get("time", 0.0), np.asarray(xs)[order],
                        np.asarray(vs)[order], np.asarray(labels)[order])
    return state, meta


def write_diagnostics(path, frames):
    """Series file: one row per output time."""
    lines = [f"# gravsheets diagnostics format {FORMAT_VERSION}",
             "# columns: time xc_wrapped xc_cover v_c energy cluster_count n_events"]
    for f in frames:
        energy = _fmt(f.energy) if f.energy is not None else "nan"
        lines.append(" ".join([_fmt(f.time), _fmt(f.xc_wrapped), _fmt(f.xc_cover),
                               _fmt(f.v_c), energy, str(f.cluster_count),
                               str(f.n_events)]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_diagnostics(path):
    rows = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        t, xcw, xcc, vc, energy, clusters, events = line.split()
        rows.append({"time": float(t), "xc_wrapped": float(xcw),
                     "xc_cover": float(xcc), "v_c": float(vc),
                     "energy": float(energy), "cluster_count": int(clusters),
                     "n_events": int(events)})
    return rows


def write_manifest(path, run_cfg: RunConfig, snapshot_names, status: str,
                   error: str | None = None):
    from . import __version__
    from .accel import BACKEND

    payload = {
        "format_version": FORMAT_VERSION,
        "package_version": __version__,
        "backend": BACKEND,
        "rng": "numpy default_rng (PCG64)",
        "seed": run_cfg.seed,
        "status": status,
        "config": dict(line.split(" = ", 1) for line in run_cfg.echo_lines()),
        "snapshots": list(snapshot_names),
    }
    if error is not None:
        payload["error"] = error
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# validation reports
# ---------------------------------------------------------------------------


def write_report(path, report: dict):
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")


def read_report(path) -> dict:
    return json.loads(Path(path).read_text())
