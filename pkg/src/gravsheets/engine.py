"""Exact event-driven time evolution.

Between crossings every cyclic gap z_j = x_{j+1} - x_j follows the
linear law  dw/dt + gamma w = A z - g  (A = g N / L) in closed form, and
the center of mass obeys dv_c/dt + gamma v_c = 0 independently, so the
only events are gap collapses.  At a crossing the two slots swap
velocities (labels swap; slot accelerations are rank-determined), which
in gap variables reads w_j -> -w_j with both cyclic neighbors absorbing
the old w_j.  Crossing times are located analytically per gap and kept
in a versioned min-heap; processing an event touches three gaps, so a
run costs O(log N) per event.

Positions live on the covering line; sheet order never changes by
construction and the cover window x[-1] - x[0] = 2L - z_wrap stays
within one period.  Wrapping happens only in diagnostics and I/O.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _evcore as core
from .domain import DomainConfig, SystemState


def characteristic_rates(cfg: DomainConfig):
    """(lam_plus, lam_minus): roots of lam^2 + gamma lam - A = 0, with
    lam_plus > 0 > lam_minus whenever A > 0."""
    a = cfg.stiffness
    if not a > 0:
        raise ValueError(f"stiffness must be positive, got {a}")
    disc = math.sqrt(cfg.gamma * cfg.gamma + 4.0 * a)
    return 0.5 * (-cfg.gamma + disc), 0.5 * (-cfg.gamma - disc)


@dataclass(frozen=True)
class GapPropagator:
    """Closed-form gap solution z(t) = z* + alpha e^{lam_p (t-t_ref)}
    + beta e^{lam_m (t-t_ref)}."""

    lambda_plus: float
    lambda_minus: float
    z_star: float
    alpha: float
    beta: float
    t_ref: float

    def evaluate(self, t):
        """(z, w) at time t."""
        return core._zw_scalar(t - self.t_ref, self.lambda_plus,
                               self.lambda_minus, self.z_star,
                               core._sign(self.alpha), core._log_abs(self.alpha),
                               core._sign(self.beta), core._log_abs(self.beta))


@dataclass(frozen=True)
class CrossingEvent:
    """A scheduled gap collapse; stale once the gap's version moves on."""

    time: float
    gap_index: int
    version: int


@dataclass(frozen=True)
class CenterOfMassTrack:
    """Analytic center-of-mass motion on the cover: v_c(t) decays as
    e^{-gamma (t - t0)} and x_c integrates it; both are smooth through
    crossings (positions and the velocity multiset are continuous)."""

    x0: float
    v0: float
    gamma: float
    t0: float = 0.0

    def velocity(self, t):
        return self.v0 * math.exp(-self.gamma * (t - self.t0))

    def position(self, t):
        dt = t - self.t0
        if self.gamma == 0.0:
            return self.x0 + self.v0 * dt
        return self.x0 + self.v0 * (-math.expm1(-self.gamma * dt)) / self.gamma


@dataclass
class GapView:
    """Materialized cyclic gaps and gap velocities.  Closure constraints:
    sum(z) = 2L and sum(w) = 0 (maintained by renormalization)."""

    z: np.ndarray
    w: np.ndarray

    def closure_residuals(self, cfg: DomainConfig):
        return float(self.z.sum() - cfg.period), float(self.w.sum())


def build_propagator(z0: float, w0: float, cfg: DomainConfig,
                     t_ref: float = 0.0) -> GapPropagator:
    """Propagator matching z(t_ref) = z0, w(t_ref) = w0."""
    lam_p, lam_m = characteristic_rates(cfg)
    z_star = cfg.mean_gap
    denom = lam_p - lam_m
    alpha = (w0 - lam_m * (z0 - z_star)) / denom
    beta = (lam_p * (z0 - z_star) - w0) / denom
    return GapPropagator(lam_p, lam_m, z_star, alpha, beta, t_ref)


def next_crossing_time(p: GapPropagator, t_now: float, tol: float = 1e-12):
    """Smallest t > t_now + tol with z(t) = 0, or None if the gap never
    vanishes (positive minimum, or pure decay toward z*)."""
    tau = core._root_after((t_now - p.t_ref) + tol, tol,
                           p.lambda_plus, p.lambda_minus, p.z_star,
                           core._sign(p.alpha), core._log_abs(p.alpha),
                           core._sign(p.beta), core._log_abs(p.beta))
    if math.isnan(tau):
        raise RuntimeError(f"crossing bracket failed for {p}")
    if math.isinf(tau):
        return None
    return p.t_ref + tau


def gaps_from_state(state: SystemState, cfg: DomainConfig) -> GapView:
    """Cyclic gaps of an ordered state; the wrap gap closes the ring:
    z[-1] = 2L + x[0] - x[-1]."""
    x, v = state.positions, state.velocities
    z = np.empty(x.size)
    w = np.empty(x.size)
    z[:-1] = np.diff(x)
    z[-1] = cfg.period + x[0] - x[-1]
    w[:-1] = np.diff(v)
    w[-1] = v[0] - v[-1]
    return GapView(z, w)


def _affine_chain(deltas: np.ndarray, mean_value: float) -> np.ndarray:
    """Values y with y[r+1] - y[r] = deltas[r] and mean(y) = mean_value
    (the first 2N-1 deltas determine everything; the cyclic closure is
    consistency, not information)."""
    m = deltas.size
    k = np.arange(m - 1, 0, -1, dtype=np.float64)
    y0 = mean_value - float(k @ deltas[:m - 1]) / m
    out = np.empty(m)
    out[0] = y0
    out[1:] = y0 + np.cumsum(deltas[:m - 1])
    return out


def velocities_from_gaps(w, v_c: float, cfg: DomainConfig,
                         closure_tol: float = 1e-8) -> np.ndarray:
    """Slot velocities from gap velocities plus the center-of-mass
    velocity: v[r+1] - v[r] = w[r] and mean(v) = v_c.  Rejects an
    inconsistent closure sum(w) != 0."""
    w = np.asarray(w, dtype=np.float64)
    scale = max(1.0, float(np.abs(w).max()) if w.size else 0.0)
    if abs(float(w.sum())) > closure_tol * scale:
        raise ValueError(f"gap velocities do not close the ring: sum(w) = {w.sum()}")
    return _affine_chain(w, v_c)


def positions_from_gaps(z, x_c: float, cfg: DomainConfig,
                        closure_tol: float = 1e-6) -> np.ndarray:
    """Slot positions from gaps plus the center of mass (cover line).
    Zero gaps survive the cumulative reconstruction as exact ties (the
    chain rounding is folded forward so ordering never inverts)."""
    z = np.asarray(z, dtype=np.float64)
    if abs(float(z.sum()) - cfg.period) > closure_tol * cfg.period:
        raise ValueError(f"gaps do not close the ring: sum(z) = {z.sum()}")
    return np.maximum.accumulate(_affine_chain(z, x_c))


def apply_crossing(state: SystemState, gaps: GapView, j: int,
                   cfg: DomainConfig, tol: float = 1e-9):
    """Crossing algebra at gap j (0-based, cyclic) as a pure function:
    returns (state', gaps').  Requires z[j] ~ 0 and w[j] < 0 (adjacent
    sheets meeting); velocities of the two slots swap (identities swap),
    positions are untouched, and sum(z), sum(w) are conserved exactly.
    """
    m = gaps.z.size
    if abs(gaps.z[j]) > tol * cfg.mean_gap:
        raise ValueError(f"gap {j} is not closed: z = {gaps.z[j]}")
    if gaps.w[j] >= 0.0:
        raise ValueError(f"gap {j} is not closing: w = {gaps.w[j]}")
    s2 = (j + 1) % m
    jm = (j - 1) % m
    z = gaps.z.copy()
    w = gaps.w.copy()
    wj = w[j]
    z[j] = 0.0
    w[j] = -wj
    if jm == s2:
        w[jm] += 2.0 * wj
    else:
        w[jm] += wj
        w[s2] += wj
    new_state = state.copy()
    new_state.velocities[j], new_state.velocities[s2] = \
        state.velocities[s2], state.velocities[j]
    new_state.labels[j], new_state.labels[s2] = \
        state.labels[s2], state.labels[j]
    return new_state, GapView(z, w)


class SheetEngine:
    """Event-driven evolver for one ordered sheet system.

    The engine owns per-gap propagators, a versioned event heap and the
    analytic center-of-mass track.  `advance_to` processes every
    crossing strictly before the target time; `state()` materializes
    (and renormalizes) the slot representation at the current time.
    Single-threaded by design: event ordering is a global total order.
    """

    def __init__(self, state: SystemState, cfg: DomainConfig,
                 root_tol: float = 1e-12, renorm_time: float | None = None,
                 log_capacity: int = 0):
        state.validate(cfg)
        self.cfg = cfg
        self.root_tol = float(root_tol)
        lam_p, lam_m = characteristic_rates(cfg)
        self._lam_p, self._lam_m = lam_p, lam_m
        self._z_star = cfg.mean_gap
        # residuals of the closure constraints obey the same unstable ODE
        # as the gaps, so renormalize a couple of e-folds apart
        self.renorm_time = 2.0 / lam_p if renorm_time is None else float(renorm_time)

        m = cfg.n_sheets
        self._m = m
        self._time = float(state.time)
        x_c, v_c = state.center_of_mass()
        self.com = CenterOfMassTrack(x_c, v_c, cfg.gamma, self._time)
        self.labels = state.labels.copy()

        gv = gaps_from_state(state, cfg)
        z = gv.z * (cfg.period / gv.z.sum())
        w = gv.w - gv.w.sum() / m

        self._t_ref = np.empty(m)
        self._sa = np.empty(m)
        self._la = np.empty(m)
        self._sb = np.empty(m)
        self._lb = np.empty(m)
        self._ver = np.zeros(m, dtype=np.int64)
        cap = max(64, 6 * m)
        self._ht = np.empty(cap)
        self._hj = np.empty(cap, dtype=np.int64)
        self._hv = np.empty(cap, dtype=np.int64)
        self._hn = 0
        self._events = 0
        self._last_renorm = self._time
        self._log_t = np.empty(log_capacity)
        self._log_j = np.empty(log_capacity, dtype=np.int64)
        self._log_n = 0

        for j in range(m):
            core._set_prop(j, z[j], w[j], self._time, self._t_ref,
                           self._sa, self._la, self._sb, self._lb,
                           lam_p, lam_m, self._z_star)
            self._hn, ok = core._schedule(
                j, self._time, self.root_tol, self._ht, self._hj, self._hv,
                self._hn, self._ver, self._t_ref, self._sa, self._la,
                self._sb, self._lb, lam_p, lam_m, self._z_star)
            if not ok:
                self._raise_root_failure(j)

    # -- properties ---------------------------------------------------

    @property
    def time(self) -> float:
        return self._time

    @property
    def event_count(self) -> int:
        return self._events

    def event_log(self):
        """(times, gap indices) of processed events, when logging was
        enabled with log_capacity."""
        return self._log_t[:self._log_n].copy(), self._log_j[:self._log_n].copy()

    # -- evolution ----------------------------------------------------

    def advance_to(self, t_target: float) -> int:
        """Process all crossings with event time < t_target (in order)
        and move the clock to t_target.  Returns events processed."""
        if t_target < self._time:
            raise ValueError(f"cannot advance backwards: {t_target} < {self._time}")
        done = self._run(t_target, np.inf)
        self._time = float(t_target)
        return done

    def advance_events(self, n_events: int, t_max: float = np.inf) -> int:
        """Process up to n_events crossings (stopping at t_max); the
        clock moves to the last processed event time."""
        done = self._run(t_max, n_events)
        return done

    def _run(self, t_target, max_events) -> int:
        total = 0
        while True:
            (self._hn, done, self._last_renorm, self._log_n,
             status, fail_gap) = core._advance(
                t_target, max_events - total, self.root_tol,
                self.renorm_time, self._last_renorm, self.cfg.period,
                self._ht, self._hj, self._hv, self._hn, self._ver,
                self.labels, self._t_ref, self._sa, self._la, self._sb,
                self._lb, self._lam_p, self._lam_m, self._z_star,
                self._log_t, self._log_j, self._log_n)
            total += done
            self._events += done
            if done:
                self._time = max(self._time, self._last_rebuild_time())
            if status == core.STATUS_ROOT_FAILURE:
                self._raise_root_failure(fail_gap)
            if status == core.STATUS_HEAP_FULL:
                self._grow_heap()
                continue
            return total

    def _last_rebuild_time(self) -> float:
        # the newest propagator origin is exactly the time of the last
        # processed event (or cadence renormalization)
        return float(self._t_ref.max())

    def _grow_heap(self):
        cap = 2 * self._ht.size
        for name in ("_ht", "_hj", "_hv"):
            arr = getattr(self, name)
            grown = np.empty(cap, dtype=arr.dtype)
            grown[:arr.size] = arr
            setattr(self, name, grown)

    def _raise_root_failure(self, j):
        raise RuntimeError(
            "crossing-time bracketing failed for gap "
            f"{j}: t_ref={self._t_ref[j]}, alpha sign={self._sa[j]} "
            f"log={self._la[j]}, beta sign={self._sb[j]} log={self._lb[j]}, "
            f"z*={self._z_star}, lambda=({self._lam_p}, {self._lam_m})")

    # -- materialization ----------------------------------------------

    def renormalize(self):
        """Measure and redistribute the closure residuals at the current
        time; rebuilds and reschedules every gap."""
        if self._hn + self._m + 4 >= self._ht.size:
            self._hn = core._heap_compact(self._ht, self._hj, self._hv,
                                          self._hn, self._ver)
        self._hn, bad = core._renorm_all(
            self._time, self.cfg.period, self.root_tol, self._ht, self._hj,
            self._hv, self._hn, self._ver, self._t_ref, self._sa, self._la,
            self._sb, self._lb, self._lam_p, self._lam_m, self._z_star)
        self._last_renorm = self._time
        if bad >= 0:
            self._raise_root_failure(bad)

    def gap_view(self, renormalize: bool = True) -> GapView:
        if renormalize:
            self.renormalize()
        z, w = core._materialize(self._time, self._t_ref, self._sa, self._la,
                                 self._sb, self._lb, self._lam_p, self._lam_m,
                                 self._z_star)
        return GapView(z, w)

    def state(self, renormalize: bool = True) -> SystemState:
        """Ordered SystemState at the current time (cover coordinates)."""
        gv = self.gap_view(renormalize=renormalize)
        x = positions_from_gaps(gv.z, self.com.position(self._time), self.cfg)
        v = velocities_from_gaps(gv.w, self.com.velocity(self._time), self.cfg)
        return SystemState(self._time, x, v, self.labels.copy())

    def load_state(self, state: SystemState):
        """Replace the dynamical state in place (same sheet count),
        keeping event counters; used by harness-level re-symmetrization."""
        state.validate(self.cfg)
        if float(state.time) != self._time:
            raise ValueError("load_state must keep the current time")
        x_c, v_c = state.center_of_mass()
        self.com = CenterOfMassTrack(x_c, v_c, self.cfg.gamma, self._time)
        self.labels = state.labels.copy()
        gv = gaps_from_state(state, self.cfg)
        z = gv.z * (self.cfg.period / gv.z.sum())
        w = gv.w - gv.w.sum() / self._m
        for j in range(self._m):
            core._set_prop(j, z[j], w[j], self._time, self._t_ref,
                           self._sa, self._la, self._sb, self._lb,
                           self._lam_p, self._lam_m, self._z_star)
        if self._hn + self._m + 4 >= self._ht.size:
            self._hn = core._heap_compact(self._ht, self._hj, self._hv,
                                          self._hn, self._ver)
        for j in range(self._m):
            self._hn, ok = core._schedule(
                j, self._time, self.root_tol, self._ht, self._hj, self._hv,
                self._hn, self._ver, self._t_ref, self._sa, self._la,
                self._sb, self._lb, self._lam_p, self._lam_m, self._z_star)
            if not ok:
                self._raise_root_failure(j)
        self._last_renorm = self._time
