"""Invariant battery behind `gravsheets validate`.

Each check measures an error against its tolerance and lands in a
machine-readable report.  The `fast` tier covers the closed-form /
series / screened-sum oracle chain and the engine algebra; `full` adds
the brute-force trajectory comparisons and a conservation run.
"""

import time

import numpy as np
from scipy.integrate import quad

from .domain import (DomainConfig, single_particle_field,
                     single_particle_potential, total_energy, total_field,
                     wrap_to_cell)
from .engine import (SheetEngine, build_propagator, next_crossing_time,
                     velocities_from_gaps)
from .experiments import WaterbagSpec, make_waterbag
from .reference import gap_first_zero_reference, integrate_reference
from .spectral import (FourierTruncation, ScreeningParameter,
                       fourier_coefficients, screened_limit_potential,
                       screened_potential_closed, screened_potential_direct,
                       screening_kernel_coefficient, series_field)

TIERS = ("fast", "full")


def _check(name, measured, tolerance):
    return {"name": name, "measured": float(measured),
            "tolerance": float(tolerance),
            "passed": bool(measured <= tolerance)}


def _fields_periodicity(rng):
    cfg = DomainConfig(half_length=1.7, n_pairs=5, coupling=0.8)
    x = rng.uniform(-10, 10, 10_000)
    x1 = rng.uniform(-10, 10, 10_000)
    dphi = np.abs(single_particle_potential(x + 2 * cfg.half_length, x1, cfg)
                  - single_particle_potential(x, x1, cfg)).max()
    de = np.abs(single_particle_field(x + 2 * cfg.half_length, x1, cfg)
                - single_particle_field(x, x1, cfg)).max()
    yield _check("pair potential 2L-periodicity", dphi, 1e-12)
    yield _check("pair field 2L-periodicity", de, 1e-12)
    # E = -dphi/dx away from the kinks
    xs = rng.uniform(0.05, 0.95, 2000) * cfg.half_length
    h = 1e-6
    fd = -(single_particle_potential(xs + h, 0.0, cfg)
           - single_particle_potential(xs - h, 0.0, cfg)) / (2 * h)
    rel = np.abs(fd - single_particle_field(xs, 0.0, cfg)) / cfg.coupling
    yield _check("field is minus potential gradient", rel.max(), 1e-6)


def _total_field_checks(rng):
    cfg = DomainConfig(half_length=8.0, n_pairs=16)
    q = np.sort(rng.uniform(-cfg.half_length, cfg.half_length, cfg.n_sheets))
    xs = rng.uniform(-cfg.half_length, cfg.half_length, 200)
    pairwise = sum(single_particle_field(xs, xj, cfg) for xj in q)
    err = np.abs(total_field(xs, q, cfg) - pairwise).max()
    yield _check("total field equals pairwise image sum", err, 1e-12)
    # replica rewrite invariance of the field each sheet experiences
    # (per-sheet field evaluated at its own current representative, so
    # the self-exclusion tie stays exact)
    base = total_field(q, q, cfg)
    worst = 0.0
    for k in range(cfg.n_sheets):
        shifted = q.copy()
        shifted[k] += cfg.period
        worst = max(worst, np.abs(total_field(shifted, shifted, cfg) - base).max())
    yield _check("field invariant under replica rewrite", worst, 1e-12)


def _series_checks():
    cfg = DomainConfig(half_length=1.0, n_pairs=1)
    n_max = 10_000
    xs = -cfg.half_length + cfg.period * np.arange(1000) / 1000.0
    keep = np.abs(wrap_to_cell(xs, cfg)) >= 4 * cfg.half_length / n_max
    closed = single_particle_field(xs[keep], 0.0, cfg)
    err1 = series_field(xs[keep], [0.0], FourierTruncation(n_max), cfg) - closed
    err2 = series_field(xs[keep], [0.0], FourierTruncation(2 * n_max), cfg) - closed
    rms1 = float(np.sqrt(np.mean(err1 ** 2)))
    rms2 = float(np.sqrt(np.mean(err2 ** 2)))
    yield _check("series field rms error at n_max=1e4", rms1,
                 3.0 * cfg.coupling / n_max)
    yield _check("series field error halves when n_max doubles",
                 abs(rms1 / rms2 - 2.0), 0.4)


def _screening_checks(rng):
    cfg = DomainConfig(half_length=1.3, n_pairs=3, coupling=0.9)
    x, x1 = 0.4, -0.23
    scr = ScreeningParameter(kappa=5.0 / cfg.half_length, r_max=12)
    direct = screened_potential_direct(x, x1, scr, cfg)
    closed = screened_potential_closed(x, x1, scr.kappa, cfg)
    rel = abs(direct - closed) / abs(closed)
    yield _check("direct image sum vs geometric closed form", rel, 1e-10)
    lim = screened_limit_potential(x, x1, cfg)
    for u in (1e-2, 1e-3):
        kap = u / cfg.half_length
        diff = abs(screened_potential_closed(x, x1, kap, cfg) - lim)
        # convergence is O(kappa^2), comfortably within an O(kappa) budget
        yield _check(f"closed form near its limit at kappa*L={u:g}", diff,
                     u * cfg.coupling * cfg.half_length)
    worst = 0.0
    for _ in range(3):
        kap = rng.uniform(0.5, 3.0)
        n = int(rng.integers(1, 12))
        om = np.pi * n / cfg.half_length
        val, _err = quad(lambda t: t * np.exp(-kap * t), 0, np.inf,
                         weight="cos", wvar=om)
        worst = max(worst, abs(2 * val - screening_kernel_coefficient(kap, n, cfg))
                    / abs(screening_kernel_coefficient(kap, n, cfg)))
    yield _check("screening kernel coefficient vs quadrature", worst, 1e-6)
    q = rng.uniform(-1, 1, 8)
    yield _check("fourier coefficient conjugacy",
                 abs(fourier_coefficients(q, 4, cfg)
                     - np.conj(fourier_coefficients(q, -4, cfg))), 1e-14)


def _engine_checks(rng):
    cfg = DomainConfig.scaled(6)
    for _ in range(4):
        z0 = rng.uniform(0.05, 1.8)
        w0 = rng.uniform(-1.2, 0.3)
        p = build_propagator(z0, w0, cfg)
        z, w = p.evaluate(0.0)
        yield _check("propagator reproduces initial conditions",
                     max(abs(z - z0), abs(w - w0)) / max(abs(z0), abs(w0), 1.0),
                     1e-14)
        t_root = next_crossing_time(p, 0.0)
        t_ref = gap_first_zero_reference(z0, w0, cfg, dt=1e-6, t_max=40.0)
        if t_root is None:
            yield _check("crossing-time root agrees with brute force",
                         0.0 if (t_ref is None or t_ref > 39.0) else np.inf, 1e-9)
        else:
            yield _check("crossing-time root agrees with brute force",
                         abs(t_root - t_ref), 1e-9)
    w = rng.normal(size=12)
    w -= w.mean()
    v = velocities_from_gaps(w, 0.37, cfg=DomainConfig.scaled(6))
    err = max(abs(np.diff(v) - w[:-1]).max(), abs(v.mean() - 0.37))
    yield _check("gap-velocity inversion", err, 1e-12)


def _trajectory_checks():
    for n_pairs in (1, 2, 4):
        cfg = DomainConfig.scaled(n_pairs)
        spec = WaterbagSpec(count=cfg.n_sheets, v0=0.5, seed=2)
        state = make_waterbag(spec, cfg)
        eng = SheetEngine(state.copy(), cfg)
        eng.advance_to(2.0)
        se = eng.state()
        so, _ = integrate_reference(state, cfg, 2.0, 1e-5)
        i_e = np.argsort(se.labels)
        i_o = np.argsort(so.labels)
        dx = wrap_to_cell(se.positions[i_e] - so.positions[i_o], cfg)
        yield _check(f"event-driven vs RK4 trajectory (2N={cfg.n_sheets})",
                     float(np.abs(dx).max()), 1e-6 * cfg.half_length)


def _conservation_check():
    cfg = DomainConfig.scaled(16)
    spec = WaterbagSpec(count=cfg.n_sheets, v0=0.5, seed=5)
    eng = SheetEngine(make_waterbag(spec, cfg), cfg)
    e0 = total_energy(eng.state(), cfg)
    drift = 0.0
    t = 0.0
    while eng.event_count < 2000:
        t += 1.0
        eng.advance_to(t)
        drift = max(drift, abs(total_energy(eng.state(), cfg) - e0) / abs(e0))
    yield _check("energy conservation (gamma = 0)", drift, 1e-8)
    gv = eng.gap_view()
    rz, rw = gv.closure_residuals(cfg)
    yield _check("ring closure sum(z) - 2L", abs(rz), 1e-10 * cfg.period)
    yield _check("ring closure sum(w)", abs(rw), 1e-10)


def run_validation(tier: str = "fast") -> dict:
    if tier not in TIERS:
        raise ValueError(f"tier must be one of {TIERS}, got {tier!r}")
    rng = np.random.default_rng(20240811)
    started = time.time()
    checks = []
    for gen in (_fields_periodicity(rng), _total_field_checks(rng),
                _series_checks(), _screening_checks(rng), _engine_checks(rng)):
        checks.extend(gen)
    if tier == "full":
        checks.extend(_trajectory_checks())
        checks.extend(_conservation_check())
    return {
        "tier": tier,
        "seconds": round(time.time() - started, 3),
        "passed": all(c["passed"] for c in checks),
        "checks": checks,
    }
