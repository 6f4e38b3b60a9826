import numpy as np
import pytest

from gravsheets.domain import (DomainConfig, SystemState, primitive_cell_field,
                               primitive_cell_total_field,
                               single_particle_field, single_particle_potential,
                               total_energy, total_field, wrap_to_cell)

CFG = DomainConfig(half_length=1.0, n_pairs=1, coupling=1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        DomainConfig(half_length=-1.0, n_pairs=1)
    with pytest.raises(ValueError):
        DomainConfig(half_length=1.0, n_pairs=0)
    with pytest.raises(ValueError):
        DomainConfig(half_length=1.0, n_pairs=1, coupling=0.0)
    with pytest.raises(ValueError):
        DomainConfig(half_length=1.0, n_pairs=1, gamma=-0.1)
    with pytest.raises(ValueError):
        DomainConfig(half_length=1.0, n_pairs=1, interaction="coulomb")
    scaled = DomainConfig.scaled(7)
    assert scaled.half_length == 7.0
    assert scaled.stiffness == 1.0
    assert scaled.mean_gap == 1.0


def test_wrap_examples():
    assert wrap_to_cell(0.0, CFG) == 0.0
    assert wrap_to_cell(1.0, CFG) == -1.0          # +L identifies with -L
    assert wrap_to_cell(2.5, CFG) == pytest.approx(0.5, abs=1e-15)


def test_wrap_is_periodic_and_in_cell():
    rng = np.random.default_rng(0)
    x = rng.uniform(-50, 50, 10_000)
    w = wrap_to_cell(x, CFG)
    assert np.all(w >= -CFG.half_length) and np.all(w < CFG.half_length)
    assert np.abs(wrap_to_cell(x + CFG.period, CFG) - w).max() < 1e-12


def test_pair_potential_examples():
    assert single_particle_potential(0.3, 0.3, CFG) == 0.0
    # separation L: phi = (g/2)(L - L/2) = gL/4
    assert single_particle_potential(1.0, 0.0, CFG) == pytest.approx(0.25)


def test_pair_potential_periodicity_and_symmetry():
    rng = np.random.default_rng(1)
    x = rng.uniform(-8, 8, 10_000)
    x1 = rng.uniform(-8, 8, 10_000)
    phi = single_particle_potential(x, x1, CFG)
    assert np.abs(single_particle_potential(x + 2.0, x1, CFG) - phi).max() < 1e-12
    # either way around the circle
    assert np.abs(single_particle_potential(x1, x, CFG) - phi).max() < 1e-12
    # shared translation changes nothing
    d = 0.8137
    assert np.abs(single_particle_potential(x + d, x1 + d, CFG) - phi).max() < 1e-12


def test_field_examples_and_oddness():
    assert single_particle_field(0.2, 0.2, CFG) == 0.0
    # antipode: field vanishes half way around the circle
    assert single_particle_field(-0.5 + 1.0, 0.5, CFG) == pytest.approx(0.0, abs=1e-15)
    assert single_particle_field(0.5, 0.0, CFG) == pytest.approx(-0.25)
    rng = np.random.default_rng(2)
    d = rng.uniform(-0.999, 0.999, 1000)
    e = single_particle_field(d, 0.0, CFG)
    assert np.abs(single_particle_field(-d, 0.0, CFG) + e).max() < 1e-14
    assert np.abs(single_particle_field(d + 2.0, 0.0, CFG) - e).max() < 1e-12


def test_field_is_minus_gradient_of_potential():
    rng = np.random.default_rng(3)
    # stay away from the kinks at 0 and +-L
    d = np.concatenate([rng.uniform(0.02, 0.98, 3000),
                        rng.uniform(-0.98, -0.02, 3000)])
    h = 1e-7
    fd = -(single_particle_potential(d + h, 0.0, CFG)
           - single_particle_potential(d - h, 0.0, CFG)) / (2 * h)
    rel = np.abs(fd - single_particle_field(d, 0.0, CFG))
    assert rel.max() < 1e-6


def test_total_field_symmetric_pair_vanishes_at_center():
    cfg = DomainConfig(half_length=1.0, n_pairs=1)
    assert total_field(0.0, np.array([-0.4, 0.4]), cfg) == pytest.approx(0.0, abs=1e-15)


def test_total_field_matches_pairwise_sum():
    cfg = DomainConfig(half_length=3.0, n_pairs=8)
    rng = np.random.default_rng(4)
    q = np.sort(rng.uniform(-3, 3, cfg.n_sheets))
    xs = rng.uniform(-3, 3, 300)
    pairwise = sum(single_particle_field(xs, xj, cfg) for xj in q)
    assert np.abs(total_field(xs, q, cfg) - pairwise).max() < 1e-12


def test_total_field_replica_rewrite_invariance():
    cfg = DomainConfig(half_length=4.0, n_pairs=12)
    rng = np.random.default_rng(5)
    for _ in range(50):
        q = np.sort(rng.uniform(-4, 4, cfg.n_sheets))
        base = total_field(q, q, cfg)
        k = int(rng.integers(cfg.n_sheets))
        shifted = q.copy()
        shifted[k] += cfg.period * (1 if rng.random() < 0.5 else -1)
        assert np.abs(total_field(shifted, shifted, cfg) - base).max() < 1e-12


def test_total_field_empty_and_state_input():
    cfg = DomainConfig(half_length=1.0, n_pairs=1)
    assert total_field(0.3, np.array([]), cfg) == 0.0
    st = SystemState(0.0, np.array([-0.5, 0.5]), np.zeros(2), np.arange(2))
    assert total_field(0.0, st, cfg) == pytest.approx(0.0, abs=1e-15)


def test_primitive_cell_field_is_a_negative_control():
    g, L = CFG.coupling, CFG.half_length
    assert primitive_cell_field(0.0, 0.0, CFG) == 0.0
    # a sheet off-center accelerates itself
    assert primitive_cell_field(0.4, 0.4, CFG) == pytest.approx(g * 0.4 / (2 * L))
    # constant offset from the consistent law, everywhere
    rng = np.random.default_rng(6)
    x = rng.uniform(-0.99, 0.99, 2000)
    x1 = 0.37
    diff = (single_particle_field(x, x1, CFG)
            - primitive_cell_field(x, x1, CFG))
    assert np.abs(diff + g * x1 / (2 * L)).max() < 1e-14


def test_boundary_rewrite_continuity_vs_primitive_control():
    cfg = DomainConfig(half_length=1.0, n_pairs=2)
    # one sheet exactly at +L rewritten to -L: same circle point
    others = np.array([-0.6, 0.1, 0.7])
    for edge in (1.0, -1.0):
        q = np.sort(np.concatenate([others, [edge]]))
        e = np.array([total_field(x, q, cfg) for x in others])
        if edge == 1.0:
            e_plus = e
        else:
            e_minus = e
    assert np.abs(e_plus - e_minus).max() < 1e-12
    # the primitive-cell law jumps by g at interior points
    prim_plus = primitive_cell_total_field(others, np.concatenate([others, [1.0]]), cfg)
    prim_minus = primitive_cell_total_field(others, np.concatenate([others, [-1.0]]), cfg)
    jump = np.abs(prim_plus - prim_minus)
    assert jump.min() > 0.5 * cfg.coupling


def test_state_validation():
    cfg = DomainConfig(half_length=1.0, n_pairs=2)
    good = SystemState(0.0, np.array([-0.9, -0.3, 0.2, 0.8]), np.zeros(4),
                       np.arange(4))
    good.validate(cfg)
    with pytest.raises(ValueError):
        SystemState(0.0, np.array([0.2, -0.3, 0.5, 0.8]), np.zeros(4),
                    np.arange(4)).validate(cfg)
    with pytest.raises(ValueError):
        SystemState(0.0, np.array([-0.9, -0.3, 0.2, 1.5]), np.zeros(4),
                    np.arange(4)).validate(cfg)  # window > 2L


def test_total_energy_two_sheet_value():
    cfg = DomainConfig(half_length=1.0, n_pairs=1)
    st = SystemState(0.0, np.array([-0.25, 0.25]), np.array([-0.5, 0.5]),
                     np.arange(2))
    # kinetic 2 * v^2/2 = 0.25; pair potential phi1(0.5) = (1/2)(0.5 - 0.125)
    assert total_energy(st, cfg) == pytest.approx(0.25 + 0.5 * (0.5 - 0.125))
