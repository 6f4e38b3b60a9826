#!/usr/bin/env python3
"""Time the hot kernels on both backends (numba vs pure Python/numpy).

Each backend runs in its own subprocess because the backend is chosen at
import time from GRAVSHEETS_NUMBA.  Usage:

    python benchmarks/compare_backends.py             # full comparison
    GRAVSHEETS_NUMBA=0 python benchmarks/compare_backends.py --worker

Numbers are wall-clock seconds per case (numba timings exclude JIT
compilation: every case runs once for warmup).
"""

import argparse
import json
import os
import subprocess
import sys
import time

CASES = [
    ("series field, 1000 pts x 2e4 harmonics", "series"),
    ("pair energy, 2N = 1024", "pair_energy"),
    ("event loop, 2N = 256 to T = 8", "events"),
    ("RK4 oracle, 2N = 8, dt = 1e-4, T = 2", "rk4"),
]


def run_case(tag):
    import numpy as np

    from gravsheets.domain import DomainConfig
    from gravsheets.engine import SheetEngine
    from gravsheets.experiments import WaterbagSpec, make_waterbag
    from gravsheets.kernels import pair_potential_energy
    from gravsheets.reference import integrate_reference
    from gravsheets.spectral import FourierTruncation, series_field

    if tag == "series":
        cfg = DomainConfig(half_length=1.0, n_pairs=1)
        xs = np.linspace(-1, 1, 1000, endpoint=False)
        work = lambda: series_field(xs, [0.0], FourierTruncation(20_000), cfg)
    elif tag == "pair_energy":
        rng = np.random.default_rng(0)
        q = rng.uniform(-512, 512, 1024)
        work = lambda: pair_potential_energy(q, 1.0, 512.0)
    elif tag == "events":
        cfg = DomainConfig.scaled(128, gamma=0.7071067811865476)
        spec = WaterbagSpec(count=256, v0=0.5, seed=1)

        def work():
            eng = SheetEngine(make_waterbag(spec, cfg), cfg)
            eng.advance_to(8.0)
            return eng.event_count
    elif tag == "rk4":
        cfg = DomainConfig.scaled(4)
        st = make_waterbag(WaterbagSpec(count=8, v0=0.5, seed=2), cfg)
        work = lambda: integrate_reference(st, cfg, 2.0, 1e-4)
    else:
        raise ValueError(tag)

    meta = work()  # warmup (and JIT compile on the numba backend)
    t0 = time.perf_counter()
    work()
    seconds = time.perf_counter() - t0
    extra = f" ({meta} events)" if tag == "events" else ""
    return seconds, extra


def worker():
    from gravsheets.accel import BACKEND

    out = {"backend": BACKEND, "cases": {}}
    for label, tag in CASES:
        seconds, extra = run_case(tag)
        out["cases"][label] = {"seconds": seconds, "note": extra}
    print(json.dumps(out))


def compare():
    results = {}
    for backend_flag in ("1", "0"):
        env = dict(os.environ, GRAVSHEETS_NUMBA=backend_flag)
        proc = subprocess.run([sys.executable, __file__, "--worker"],
                              env=env, capture_output=True, text=True,
                              check=True)
        payload = json.loads(proc.stdout.strip().splitlines()[-1])
        results[payload["backend"]] = payload["cases"]
    width = max(len(label) for label, _ in CASES)
    print(f"{'case':<{width}}  {'numba':>10}  {'python':>10}  speedup")
    for label, _ in CASES:
        a = results["numba"][label]["seconds"]
        b = results["python"][label]["seconds"]
        note = results["numba"][label]["note"]
        print(f"{label:<{width}}  {a:>9.4f}s  {b:>9.4f}s  {b / a:>6.1f}x{note}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--worker", action="store_true")
    args = parser.parse_args()
    worker() if args.worker else compare()
