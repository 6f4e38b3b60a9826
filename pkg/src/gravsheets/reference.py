"""Brute-force reference integrators (validation oracles only).

These deliberately avoid the event-driven machinery: the N-body oracle
integrates the raw equations of motion dv/dt + gamma v = E(x) with
fixed-step RK4, evaluating the field from wrapped coordinates by rank
counting, and the gap oracle integrates the single-gap law directly.
They exist to check the exact engine, never to drive production runs.

An acceleration is discontinuous at a crossing, which would cost plain
RK4 O(dt) locally per event; when `refine_crossings` is on (default), a
step whose trial end state breaks the current ordering is re-tried at
half the step until the crossing is isolated below ~dt * 2^-20, so step
boundaries align with crossings and the integrator keeps its smooth
order.  Crossing counts are tallied from ordering changes.
"""

import math

import numpy as np

from .accel import maybe_njit
from .domain import DomainConfig, SystemState


@maybe_njit(cache=True)
def _field_accel(x, v, g, l_half, n_pairs, gamma, q, rank, out):
    """out[i] = E(x_i) - gamma v_i with E from the wrapped configuration:
    g [ (N/L)(x - x_c) + (N_right - N_left)/2 ]."""
    m = x.size
    mean = 0.0
    for i in range(m):
        q[i] = (x[i] + l_half) % (2.0 * l_half) - l_half
        mean += q[i]
    mean /= m
    order = np.argsort(q)
    for idx in range(m):
        rank[order[idx]] = idx
    for i in range(m):
        count_term = 0.5 * (m - 1 - 2 * rank[i])
        out[i] = g * ((n_pairs / l_half) * (q[i] - mean) + count_term) - gamma * v[i]


@maybe_njit(cache=True)
def _rk4_trial(x, v, h, g, l_half, n_pairs, gamma,
               q, rank, a1, a2, a3, a4, xt, vt, xo, vo):
    m = x.size
    _field_accel(x, v, g, l_half, n_pairs, gamma, q, rank, a1)
    for i in range(m):
        xt[i] = x[i] + 0.5 * h * v[i]
        vt[i] = v[i] + 0.5 * h * a1[i]
    _field_accel(xt, vt, g, l_half, n_pairs, gamma, q, rank, a2)
    # stage-3 position uses the stage-2 velocity, so build xt before
    # overwriting vt
    for i in range(m):
        xt[i] = x[i] + 0.5 * h * vt[i]
    for i in range(m):
        vt[i] = v[i] + 0.5 * h * a2[i]
    _field_accel(xt, vt, g, l_half, n_pairs, gamma, q, rank, a3)
    for i in range(m):
        xo[i] = x[i] + h * vt[i]
        vo[i] = v[i] + h * a3[i]
    _field_accel(xo, vo, g, l_half, n_pairs, gamma, q, rank, a4)
    for i in range(m):
        k_x = (v[i] + 2.0 * (v[i] + 0.5 * h * a1[i]) + 2.0 * vt[i]
               + (v[i] + h * a3[i]))
        k_v = a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]
        xo[i] = x[i] + (h / 6.0) * k_x
        vo[i] = v[i] + (h / 6.0) * k_v


@maybe_njit(cache=True)
def _order_broken(x, perm):
    for i in range(perm.size - 1):
        if x[perm[i + 1]] < x[perm[i]]:
            return True
    return False


@maybe_njit(cache=True)
def _count_transpositions(old_perm, new_perm):
    """Adjacent transpositions between two orderings = inversions of the
    old order mapped through the new one (one per pair that swapped)."""
    m = old_perm.size
    pos = np.empty(m, dtype=np.int64)
    for i in range(m):
        pos[new_perm[i]] = i
    seq = np.empty(m, dtype=np.int64)
    for i in range(m):
        seq[i] = pos[old_perm[i]]
    count = 0
    for i in range(m - 1):
        for k in range(i + 1, m):
            if seq[i] > seq[k]:
                count += 1
    return count


@maybe_njit(cache=True)
def _integrate_nbody(x, v, t_end, dt, g, l_half, n_pairs, gamma, refine):
    """Integrate in place from t = 0 to t_end; returns crossing count."""
    m = x.size
    q = np.empty(m)
    rank = np.empty(m, dtype=np.int64)
    a1 = np.empty(m)
    a2 = np.empty(m)
    a3 = np.empty(m)
    a4 = np.empty(m)
    xt = np.empty(m)
    vt = np.empty(m)
    xo = np.empty(m)
    vo = np.empty(m)
    perm = np.argsort(x)
    crossings = 0
    # floor on the bisected step: small enough that a crossing inside it
    # is invisible (error ~ g * h_floor), large enough that t += h still
    # advances the double-precision clock
    h_floor = dt * 2.0 ** -20
    t = 0.0
    while t < t_end - 1e-15 * t_end:
        h = dt
        if t + h > t_end:
            h = t_end - t
        while True:
            _rk4_trial(x, v, h, g, l_half, n_pairs, gamma,
                       q, rank, a1, a2, a3, a4, xt, vt, xo, vo)
            broken = _order_broken(xo, perm)
            if (not broken) or (not refine) or h <= h_floor:
                break
            h *= 0.5
        for i in range(m):
            x[i] = xo[i]
            v[i] = vo[i]
        t += h
        if broken:
            new_perm = np.argsort(x)
            crossings += _count_transpositions(perm, new_perm)
            perm = new_perm
    return crossings


def integrate_reference(state: SystemState, cfg: DomainConfig, t_end: float,
                        dt: float, refine_crossings: bool = True):
    """Fixed-step RK4 evolution of a copy of `state` to state.time + t_end.

    Returns (final SystemState ordered by position with labels tracked,
    crossing count).  Sheets keep their array identity during the
    integration; the returned state is re-sorted so it compares directly
    with engine output.
    """
    x = state.positions.astype(np.float64).copy()
    v = state.velocities.astype(np.float64).copy()
    crossings = _integrate_nbody(x, v, float(t_end), float(dt),
                                 cfg.coupling, cfg.half_length,
                                 cfg.n_pairs, cfg.gamma,
                                 refine_crossings)
    order = np.argsort(x, kind="stable")
    return SystemState(state.time + t_end, x[order], v[order],
                       state.labels[order]), crossings


@maybe_njit(cache=True)
def _gap_rhs(z, w, a_stiff, g, gamma):
    return w, a_stiff * z - g - gamma * w


@maybe_njit(cache=True)
def _gap_rk4_step(z, w, h, a_stiff, g, gamma):
    k1z, k1w = _gap_rhs(z, w, a_stiff, g, gamma)
    k2z, k2w = _gap_rhs(z + 0.5 * h * k1z, w + 0.5 * h * k1w, a_stiff, g, gamma)
    k3z, k3w = _gap_rhs(z + 0.5 * h * k2z, w + 0.5 * h * k2w, a_stiff, g, gamma)
    k4z, k4w = _gap_rhs(z + h * k3z, w + h * k3w, a_stiff, g, gamma)
    return (z + (h / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z),
            w + (h / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w))


@maybe_njit(cache=True)
def _gap_first_zero(z0, w0, a_stiff, g, gamma, dt, t_max):
    """First t > 0 with z(t) = 0 along the single-gap law, by RK4
    marching plus in-step bisection; inf if none before t_max."""
    t = 0.0
    z, w = z0, w0
    while t < t_max:
        zn, wn = _gap_rk4_step(z, w, dt, a_stiff, g, gamma)
        if zn <= 0.0:
            lo, hi = 0.0, dt
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                zm, _wm = _gap_rk4_step(z, w, mid, a_stiff, g, gamma)
                if zm <= 0.0:
                    hi = mid
                else:
                    lo = mid
                if hi - lo < 1e-16 * (1.0 + t):
                    break
            return t + 0.5 * (lo + hi)
        z, w = zn, wn
        t += dt
    return math.inf


def gap_first_zero_reference(z0: float, w0: float, cfg: DomainConfig,
                             dt: float = 1e-6, t_max: float = 50.0):
    """Oracle for `next_crossing_time` on a fresh gap: brute-force RK4
    integration of the smooth gap law up to its first zero."""
    t = _gap_first_zero(float(z0), float(w0), cfg.stiffness, cfg.coupling,
                        cfg.gamma, float(dt), float(t_max))
    return None if math.isinf(t) else float(t)
