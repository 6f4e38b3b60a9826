import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from scipy.integrate import quad

from gravsheets.domain import (DomainConfig, primitive_cell_total_field,
                               single_particle_field,
                               single_particle_potential, wrap_to_cell)
from gravsheets.spectral import (FourierTruncation, ScreeningParameter,
                                 fourier_coefficients,
                                 primitive_cell_series_field,
                                 replica_quadratic_potential,
                                 screened_limit_potential,
                                 screened_potential_closed,
                                 screened_potential_direct,
                                 screening_kernel_coefficient, series_field,
                                 series_potential)

CFG = DomainConfig(half_length=1.0, n_pairs=1, coupling=1.0)


def psi_closed_highprec(y, kappa, cfg, dps=50):
    """Independent high-precision evaluation of the screened closed form
    (generating bracket differentiated numerically in mpmath)."""
    with mp.workdps(dps):
        g = mp.mpf(cfg.coupling)
        L = mp.mpf(cfg.half_length)
        yy = mp.mpf(y)
        r_lo = mp.floor(yy / (2 * L))
        y_lt = yy - 2 * r_lo * L
        y_gt = y_lt - 2 * L

        def bracket(k):
            return ((mp.e ** (-k * y_lt) + mp.e ** (k * y_gt))
                    / (1 - mp.e ** (-2 * k * L)) - 1 / (k * L))

        return float((g / 2) * (-mp.diff(bracket, mp.mpf(kappa))))


# ---------------------------------------------------------------------------
# Fourier coefficients
# ---------------------------------------------------------------------------


def test_fourier_coefficient_single_particle_at_origin():
    for n in (1, 2, 5, -3):
        c = fourier_coefficients([0.0], n, CFG)
        assert c == pytest.approx(1.0 / (2 * CFG.half_length))


def test_fourier_coefficient_lattice_cancellation():
    cfg = DomainConfig(half_length=4.0, n_pairs=4)
    q = -cfg.half_length + (np.arange(8) + 0.5) * cfg.period / 8
    for n in (1, 2, 3, 5, 7):
        assert abs(fourier_coefficients(q, n, cfg)) < 1e-14
    # n a multiple of 2N survives
    assert abs(fourier_coefficients(q, 8, cfg)) == pytest.approx(8 / cfg.period)


def test_fourier_coefficient_rejects_dc_and_conjugates():
    with pytest.raises(ValueError):
        fourier_coefficients([0.1], 0, CFG)
    rng = np.random.default_rng(0)
    q = rng.uniform(-1, 1, 16)
    c = fourier_coefficients(q, 6, CFG)
    assert abs(c.conjugate() - fourier_coefficients(q, -6, CFG)) < 1e-14
    assert abs(c) <= 16 / (2 * CFG.half_length) + 1e-12


def test_fourier_coefficient_against_direct_sum():
    rng = np.random.default_rng(1)
    q = rng.uniform(-1, 1, 9)
    n = 4
    direct = sum(complex(math.cos(-math.pi * n * xj), math.sin(-math.pi * n * xj))
                 for xj in q) / 2.0
    assert abs(fourier_coefficients(q, n, CFG) - direct) < 1e-13


# ---------------------------------------------------------------------------
# truncated series vs closed forms
# ---------------------------------------------------------------------------


def test_series_potential_matches_closed_up_to_constant():
    n_max = 100_000
    xs = np.linspace(-1, 1, 1000, endpoint=False)
    got = series_potential(xs, [0.0], FourierTruncation(n_max), CFG)
    closed = single_particle_potential(xs, 0.0, CFG)
    shift = np.mean(got - closed)
    assert np.abs(got - closed - shift).max() < 1e-4 * CFG.coupling * CFG.half_length
    # and the constant is the analytic -gL/6 series offset
    assert shift == pytest.approx(-CFG.coupling * CFG.half_length / 6.0, abs=1e-5)


def test_series_potential_value_at_source():
    # at the source the sum telescopes to -(gL/pi^2) * sum 1/n^2; the
    # independent oracle is the partial sum with its integral tail bound
    n_max = 20_000
    got = float(series_potential(0.0, [0.0], FourierTruncation(n_max), CFG))
    partial = sum(1.0 / (n * n) for n in range(1, n_max + 1))
    oracle = -(CFG.coupling * CFG.half_length / math.pi ** 2) * partial
    assert got == pytest.approx(oracle, rel=1e-12)
    limit = -CFG.coupling * CFG.half_length / 6.0
    assert abs(got - limit) < 2.0 / (math.pi ** 2 * n_max)


def test_series_symmetries():
    trunc = FourierTruncation(500)
    d = 0.373
    pa = series_potential(d, [0.0], trunc, CFG)
    pb = series_potential(-d, [0.0], trunc, CFG)
    assert abs(float(pa) - float(pb)) < 1e-12
    ea = series_field(d, [0.0], trunc, CFG)
    eb = series_field(-d, [0.0], trunc, CFG)
    assert abs(float(ea) + float(eb)) < 1e-12
    for n_max in (1, 10, 1000):
        assert float(series_field(0.6, [0.6], FourierTruncation(n_max), CFG)) == 0.0


def test_series_field_near_closed_form():
    got = float(series_field(0.5, [0.0], FourierTruncation(10_000), CFG))
    want = float(single_particle_field(0.5, 0.0, CFG))
    assert abs(got - want) < 1e-3 * CFG.coupling


def test_series_field_error_halves_when_truncation_doubles():
    xs = np.linspace(-1, 1, 1000, endpoint=False)
    closed = single_particle_field(xs, 0.0, CFG)
    errs = {}
    for n_max in (10_000, 20_000):
        keep = np.abs(wrap_to_cell(xs, CFG)) >= 4 * CFG.half_length / n_max
        e = series_field(xs[keep], [0.0], FourierTruncation(n_max), CFG) - closed[keep]
        errs[n_max] = (np.abs(e).max(), float(np.sqrt(np.mean(e ** 2))))
    for idx in (0, 1):  # max-norm and rms both scale as 1/n_max
        ratio = errs[10_000][idx] / errs[20_000][idx]
        assert 1.6 < ratio < 2.4


def test_series_translation_invariance():
    rng = np.random.default_rng(2)
    src = rng.uniform(-1, 1, 3)
    xs = rng.uniform(-1, 1, 50)
    trunc = FourierTruncation(2000)
    d = 0.4217
    a = series_field(xs, src, trunc, CFG)
    b = series_field(xs + d, src + d, trunc, CFG)
    assert np.abs(a - b).max() < 1e-12


# ---------------------------------------------------------------------------
# screened replica sums
# ---------------------------------------------------------------------------


def test_screened_direct_tail_bound_and_warning():
    cfg = DomainConfig(half_length=1.0, n_pairs=1, coupling=2.0)
    scr = ScreeningParameter(kappa=5.0, r_max=10)
    assert math.exp(-2 * scr.kappa * cfg.half_length * scr.r_max) < 1e-21
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        screened_potential_direct(0.3, 0.0, scr, cfg)
    with pytest.warns(RuntimeWarning):
        screened_potential_direct(0.3, 0.0, ScreeningParameter(0.05, 2), cfg)


def test_screened_direct_matches_geometric_closed_form():
    cfg = DomainConfig(half_length=1.3, n_pairs=2, coupling=0.7)
    rng = np.random.default_rng(3)
    for _ in range(20):
        x, x1 = rng.uniform(-1.3, 1.3, 2)
        kappa = rng.uniform(2.0, 8.0) / cfg.half_length
        r_max = int(np.ceil(30.0 / (2 * kappa * cfg.half_length))) + 2
        direct = screened_potential_direct(x, x1, ScreeningParameter(kappa, r_max),
                                           cfg, tol=1e-11)
        closed = screened_potential_closed(x, x1, kappa, cfg)
        assert abs(direct - closed) <= 1e-10 * abs(closed)


def test_screened_closed_rejects_bad_kappa_and_matches_highprec():
    with pytest.raises(ValueError):
        screened_potential_closed(0.1, 0.0, 0.0, CFG)
    cfg = DomainConfig(half_length=1.7, n_pairs=3, coupling=1.1)
    for u in (3.0, 0.5, 0.04, 0.01, 1e-3, 1e-4):
        kappa = u / cfg.half_length
        got = screened_potential_closed(0.55, 0.02, kappa, cfg)
        want = psi_closed_highprec(0.53, kappa, cfg)
        assert got == pytest.approx(want, rel=1e-9), f"kappa*L={u}"


def test_screened_limit_chain_constants():
    # quadratic replica form sits gL/2 below the contact-normalized
    # potential; the screening limit sits gL/6 below it
    cfg = DomainConfig(half_length=2.0, n_pairs=4, coupling=0.9)
    g, L = cfg.coupling, cfg.half_length
    rng = np.random.default_rng(4)
    for _ in range(40):
        x, x1 = rng.uniform(-6, 6, 2)
        phi = float(single_particle_potential(x, x1, cfg))
        quad_form = replica_quadratic_potential(x, x1, cfg)
        lim = screened_limit_potential(x, x1, cfg)
        assert quad_form == pytest.approx(phi - g * L / 2, abs=1e-12)
        assert lim == pytest.approx(phi - g * L / 6, abs=1e-12)


def test_screened_limit_at_replica_boundary_both_bracketings():
    # y = 0: offsets (0, -2L) or (2L, 0) give the same symmetric sums
    g, L = CFG.coupling, CFG.half_length
    lim = screened_limit_potential(0.0, 0.0, CFG)
    assert lim == pytest.approx(-(g / (8 * L)) * 4 * L * L + g * L / 3)
    eps = 1e-12
    assert screened_limit_potential(eps, 0.0, CFG) == pytest.approx(lim, abs=1e-11)
    assert screened_limit_potential(-eps, 0.0, CFG) == pytest.approx(lim, abs=1e-11)


def test_screened_convergence_is_second_order_in_kappa():
    # the generating bracket is odd under kappa -> -kappa, so the linear
    # coefficient cancels identically and successive decades of kappa
    # shrink the distance to the limit by ~100
    cfg = DomainConfig(half_length=1.0, n_pairs=1, coupling=1.0)
    y = 0.3
    lim = screened_limit_potential(y, 0.0, cfg)
    diffs = [abs(screened_potential_closed(y, 0.0, u / cfg.half_length, cfg) - lim)
             for u in (1e-2, 1e-3, 1e-4)]
    assert diffs[0] > diffs[1] > diffs[2]
    for a, b in zip(diffs, diffs[1:]):
        assert 90 < a / b < 110
    # an O(kappa) bound a fortiori
    for u, d in zip((1e-2, 1e-3, 1e-4), diffs):
        assert d <= u * cfg.coupling * cfg.half_length


def test_screening_kernel_coefficient_against_quadrature():
    rng = np.random.default_rng(5)
    for _ in range(3):
        kappa = rng.uniform(0.3, 4.0)
        n = int(rng.integers(1, 9))
        om = math.pi * n / CFG.half_length
        val, _ = quad(lambda u: u * math.exp(-kappa * u), 0, np.inf,
                      weight="cos", wvar=om)
        assert 2 * val == pytest.approx(
            screening_kernel_coefficient(kappa, n, CFG), rel=1e-6)


# ---------------------------------------------------------------------------
# primitive-cell series (negative control)
# ---------------------------------------------------------------------------


def test_primitive_series_vanishes_at_cell_endpoints():
    rng = np.random.default_rng(6)
    src = rng.uniform(-1, 1, 5)
    for n_max in (3, 50, 500):
        e = primitive_cell_series_field(np.array([-1.0, 1.0]), src,
                                        FourierTruncation(n_max), CFG)
        assert np.abs(e).max() < 1e-13


def test_primitive_series_matches_closed_control():
    xs = np.linspace(-0.95, 0.95, 41)
    src = [0.21]
    got = primitive_cell_series_field(xs, src, FourierTruncation(20_000), CFG)
    want = primitive_cell_total_field(xs, np.array(src), CFG)
    assert np.abs(got - want).max() < 2e-3 * CFG.coupling


def test_primitive_series_odd_for_symmetric_pair():
    src = [-0.4, 0.4]
    xs = np.linspace(0.05, 0.9, 10)
    plus = primitive_cell_series_field(xs, src, FourierTruncation(800), CFG)
    minus = primitive_cell_series_field(-xs, src, FourierTruncation(800), CFG)
    assert np.abs(plus + minus).max() < 1e-12
