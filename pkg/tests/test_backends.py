"""The pure-Python fallback must agree with the numba backend.

The backend is fixed at import time, so the fallback runs in a
subprocess with GRAVSHEETS_NUMBA=0 and reports its numbers as JSON.
The two backends are not bit-identical (libm vs vectorized
transcendentals), so trajectories are compared at 1e-9 after a short
chaotic run and the direct kernels at near machine precision.
"""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from gravsheets.accel import USING_NUMBA

WORKER = r"""
import json
import numpy as np
from gravsheets.accel import BACKEND
from gravsheets.domain import DomainConfig
from gravsheets.engine import SheetEngine
from gravsheets.experiments import WaterbagSpec, make_waterbag
from gravsheets.kernels import pair_potential_energy
from gravsheets.spectral import FourierTruncation, series_field
from gravsheets.reference import integrate_reference

cfg = DomainConfig.scaled(4)
spec = WaterbagSpec(count=8, v0=0.5, seed=2)
state = make_waterbag(spec, cfg)
eng = SheetEngine(state.copy(), cfg)
eng.advance_to(2.0)
st = eng.state()
oracle, crossings = integrate_reference(state.copy(), cfg, 1.0, 1e-4)
xs = np.linspace(-1, 1, 64, endpoint=False)
unit = DomainConfig(half_length=1.0, n_pairs=1)
print(json.dumps({
    "backend": BACKEND,
    "positions": st.positions.tolist(),
    "velocities": st.velocities.tolist(),
    "labels": st.labels.tolist(),
    "events": eng.event_count,
    "oracle_x": oracle.positions.tolist(),
    "crossings": crossings,
    "series": series_field(xs, [0.3], FourierTruncation(3000), unit).tolist(),
    "pair_energy": pair_potential_energy(state.positions, 1.0, cfg.half_length),
}))
"""


@pytest.mark.skipif(not USING_NUMBA,
                    reason="needs the numba backend as the comparison point")
def test_fallback_values_agree():
    env = dict(os.environ, GRAVSHEETS_NUMBA="0")
    proc = subprocess.run([sys.executable, "-c", WORKER], env=env,
                          capture_output=True, text=True, check=True)
    got = json.loads(proc.stdout.strip().splitlines()[-1])
    assert got["backend"] == "python"

    from gravsheets.domain import DomainConfig
    from gravsheets.engine import SheetEngine
    from gravsheets.experiments import WaterbagSpec, make_waterbag
    from gravsheets.kernels import pair_potential_energy
    from gravsheets.reference import integrate_reference
    from gravsheets.spectral import FourierTruncation, series_field

    cfg = DomainConfig.scaled(4)
    spec = WaterbagSpec(count=8, v0=0.5, seed=2)
    state = make_waterbag(spec, cfg)
    eng = SheetEngine(state.copy(), cfg)
    eng.advance_to(2.0)
    st = eng.state()
    assert got["events"] == eng.event_count
    assert got["labels"] == st.labels.tolist()
    assert np.abs(np.array(got["positions"]) - st.positions).max() < 1e-9
    assert np.abs(np.array(got["velocities"]) - st.velocities).max() < 1e-9

    oracle, crossings = integrate_reference(state.copy(), cfg, 1.0, 1e-4)
    assert got["crossings"] == crossings
    assert np.abs(np.array(got["oracle_x"]) - oracle.positions).max() < 1e-9

    xs = np.linspace(-1, 1, 64, endpoint=False)
    unit = DomainConfig(half_length=1.0, n_pairs=1)
    series = series_field(xs, [0.3], FourierTruncation(3000), unit)
    assert np.abs(np.array(got["series"]) - series).max() < 1e-10
    assert got["pair_energy"] == pytest.approx(
        pair_potential_energy(state.positions, 1.0, cfg.half_length), rel=1e-12)
