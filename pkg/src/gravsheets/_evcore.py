"""Event-loop core: gap propagators, crossing-time roots, versioned heap.

Everything here operates on flat arrays so the whole loop compiles under
numba; with the fallback backend the same code runs interpreted.

State per gap j (M = 2N gaps):
    t_ref[j]            local time origin of the propagator
    sa[j], la[j]        sign and log-magnitude of the growing-mode
                        amplitude alpha (la = -inf encodes alpha = 0)
    sb[j], lb[j]        same for the decaying-mode amplitude beta
    ver[j]              version stamp for lazy heap deletion

Between crossings each gap follows

    z(t) = z* + alpha e^{lam_p (t - t_ref)} + beta e^{lam_m (t - t_ref)}

with lam_p > 0 > lam_m the roots of lam^2 + gamma lam - A = 0 and
z* = L/N the equilibrium spacing.  Amplitudes are stored in sign/log
form so mode terms are evaluated as exp(lam tau + log|amp|), which stays
in range even when a propagator survives a long quiet stretch.

The heap orders events by (time, gap index); equal-time events therefore
resolve in ascending gap index, making degenerate simultaneous contacts
a deterministic sequence of pair swaps.  Entries are invalidated by
version bumps and dropped lazily; compaction runs when the fixed
capacity fills.  Per event only the crossing gap and its two cyclic
neighbors are rebuilt and rescheduled, so an event costs O(log N).

Constraint upkeep: the crossing update conserves sum(w) exactly and the
root polish keeps the clamped z at true zero to near machine precision,
but residuals in sum(z) - 2L and sum(w) obey the same unstable gap ODE
and grow like e^{lam_p t}; the loop therefore redistributes the measured
residuals uniformly over all gaps on a fixed time cadence (and the
engine does the same at every materialization).
"""

import math

import numpy as np

from .accel import maybe_njit

EXP_CAP = 700.0  # exp argument cap; physical evaluations never reach it

STATUS_OK = 0
STATUS_ROOT_FAILURE = 1
STATUS_HEAP_FULL = 2


@maybe_njit(cache=True)
def _log_abs(a):
    if a == 0.0:
        return -math.inf
    return math.log(abs(a))


@maybe_njit(cache=True)
def _sign(a):
    if a > 0.0:
        return 1.0
    if a < 0.0:
        return -1.0
    return 0.0


@maybe_njit(cache=True)
def _mode_z(tau, lam, s, lg):
    arg = lam * tau + lg
    if arg > EXP_CAP:
        arg = EXP_CAP
    return s * math.exp(arg)


@maybe_njit(cache=True)
def _zw_scalar(tau, lam_p, lam_m, z_star, sa, la, sb, lb):
    za = _mode_z(tau, lam_p, sa, la)
    zb = _mode_z(tau, lam_m, sb, lb)
    return z_star + za + zb, lam_p * za + lam_m * zb


@maybe_njit(cache=True)
def _gap_eval(j, t, t_ref, sa, la, sb, lb, lam_p, lam_m, z_star):
    return _zw_scalar(t - t_ref[j], lam_p, lam_m, z_star,
                      sa[j], la[j], sb[j], lb[j])


@maybe_njit(cache=True)
def _set_prop(j, z0, w0, t, t_ref, sa, la, sb, lb, lam_p, lam_m, z_star):
    denom = lam_p - lam_m
    dz = z0 - z_star
    alpha = (w0 - lam_m * dz) / denom
    beta = (lam_p * dz - w0) / denom
    sa[j] = _sign(alpha)
    la[j] = _log_abs(alpha)
    sb[j] = _sign(beta)
    lb[j] = _log_abs(beta)
    t_ref[j] = t


@maybe_njit(cache=True)
def _root_after(tau_min, tol, lam_p, lam_m, z_star, sa, la, sb, lb):
    """Earliest tau >= tau_min with z(tau) = 0; inf if none, nan on
    bracketing failure.

    The unique extremum (when -beta lam_m / (alpha lam_p) > 0, i.e. the
    amplitudes share a sign) splits the half-line into monotone pieces,
    so z has at most two roots; the earliest sign change is bracketed
    and closed in by safeguarded Newton-bisection to width <= tol, then
    polished so the residual z is near machine zero.
    """
    if sa == 0.0:
        if sb < 0.0:
            tau = (math.log(z_star) - lb) / lam_m
            if tau >= tau_min:
                return tau
        return math.inf

    z_at_min, _w = _zw_scalar(tau_min, lam_p, lam_m, z_star, sa, la, sb, lb)

    has_ext = sa * sb > 0.0
    tau_ext = -math.inf
    if has_ext:
        tau_ext = ((lb + math.log(-lam_m)) - (la + math.log(lam_p))) / (lam_p - lam_m)

    if sa > 0.0:
        if z_at_min <= 0.0:
            return tau_min
        if not has_ext or tau_ext <= tau_min:
            return math.inf
        z_ext, _w = _zw_scalar(tau_ext, lam_p, lam_m, z_star, sa, la, sb, lb)
        if z_ext > 0.0:
            return math.inf
        lo = tau_min
        hi = tau_ext
    else:
        # alpha < 0: z -> -inf, a root is certain
        lo = tau_min
        if has_ext and tau_ext > tau_min:
            lo = tau_ext  # maximum first; earliest root may follow it only
            z_lo, _w = _zw_scalar(lo, lam_p, lam_m, z_star, sa, la, sb, lb)
            if z_at_min <= 0.0:
                return tau_min
            if z_lo <= 0.0:
                # maximum below zero: root precedes it, inside [tau_min, tau_ext]
                hi = lo
                lo = tau_min
                z_lo = z_at_min
            else:
                hi = math.nan  # expand below
        else:
            if z_at_min <= 0.0:
                return tau_min
            z_lo = z_at_min
            hi = math.nan
        if math.isnan(hi):
            # expand until the growing mode pushes z negative
            span = 1.0 / lam_p
            # asymptotic estimate of where |alpha| e^{lam_p tau} swallows the rest
            bmag = 0.0
            if sb != 0.0:
                barg = lam_m * lo + lb
                if barg > EXP_CAP:
                    barg = EXP_CAP
                bmag = math.exp(barg)
            guess = (math.log(2.0 * z_star + bmag + z_lo) - la) / lam_p
            hi = guess if guess > lo + span else lo + span
            ok = False
            for _ in range(400):
                z_hi, _w = _zw_scalar(hi, lam_p, lam_m, z_star, sa, la, sb, lb)
                if z_hi < 0.0:
                    ok = True
                    break
                hi = lo + 2.0 * (hi - lo) + span
            if not ok:
                return math.nan

    # safeguarded Newton-bisection on [lo, hi], z(lo) > 0 >= z(hi)
    x = 0.5 * (lo + hi)
    for _ in range(200):
        if hi - lo <= tol:
            break
        z, w = _zw_scalar(x, lam_p, lam_m, z_star, sa, la, sb, lb)
        if z == 0.0:
            lo = x
            hi = x
            break
        if z > 0.0:
            lo = x
        else:
            hi = x
        xn = -1.0
        if w != 0.0:
            xn = x - z / w
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        x = xn
    # polish: residual z down to rounding so clamping z := 0 stays honest
    x = 0.5 * (lo + hi)
    for _ in range(4):
        z, w = _zw_scalar(x, lam_p, lam_m, z_star, sa, la, sb, lb)
        if w == 0.0:
            break
        step = z / w
        xn = x - step
        if xn < tau_min:
            xn = tau_min
        x = xn
        if abs(step) < 1e-18 * (1.0 + abs(x)):
            break
    if x < tau_min:
        x = tau_min
    return x


# ---------------------------------------------------------------------------
# binary min-heap keyed on (time, gap index), lazy deletion via versions
# ---------------------------------------------------------------------------


@maybe_njit(cache=True)
def _heap_less(ht, hj, i, k):
    if ht[i] != ht[k]:
        return ht[i] < ht[k]
    return hj[i] < hj[k]


@maybe_njit(cache=True)
def _heap_swap(ht, hj, hv, i, k):
    ht[i], ht[k] = ht[k], ht[i]
    hj[i], hj[k] = hj[k], hj[i]
    hv[i], hv[k] = hv[k], hv[i]


@maybe_njit(cache=True)
def _sift_down(ht, hj, hv, n, start):
    i = start
    while True:
        left = 2 * i + 1
        right = left + 1
        smallest = i
        if left < n and _heap_less(ht, hj, left, smallest):
            smallest = left
        if right < n and _heap_less(ht, hj, right, smallest):
            smallest = right
        if smallest == i:
            return
        _heap_swap(ht, hj, hv, i, smallest)
        i = smallest


@maybe_njit(cache=True)
def _heap_push(ht, hj, hv, n, t, j, v):
    ht[n] = t
    hj[n] = j
    hv[n] = v
    i = n
    while i > 0:
        parent = (i - 1) // 2
        if _heap_less(ht, hj, i, parent):
            _heap_swap(ht, hj, hv, i, parent)
            i = parent
        else:
            break
    return n + 1


@maybe_njit(cache=True)
def _heap_pop(ht, hj, hv, n):
    n -= 1
    ht[0] = ht[n]
    hj[0] = hj[n]
    hv[0] = hv[n]
    _sift_down(ht, hj, hv, n, 0)
    return n


@maybe_njit(cache=True)
def _heap_compact(ht, hj, hv, n, ver):
    """Drop stale entries and re-heapify (Floyd)."""
    k = 0
    for i in range(n):
        if hv[i] == ver[hj[i]]:
            ht[k] = ht[i]
            hj[k] = hj[i]
            hv[k] = hv[i]
            k += 1
    for start in range(k // 2 - 1, -1, -1):
        _sift_down(ht, hj, hv, k, start)
    return k


# ---------------------------------------------------------------------------
# scheduling, renormalization, event loop
# ---------------------------------------------------------------------------


@maybe_njit(cache=True)
def _schedule(j, t_now, tol, ht, hj, hv, hn, ver,
              t_ref, sa, la, sb, lb, lam_p, lam_m, z_star):
    ver[j] += 1
    tau_min = (t_now - t_ref[j]) + tol
    tau = _root_after(tau_min, tol, lam_p, lam_m, z_star,
                      sa[j], la[j], sb[j], lb[j])
    if math.isnan(tau):
        return hn, False
    if not math.isinf(tau):
        hn = _heap_push(ht, hj, hv, hn, t_ref[j] + tau, j, ver[j])
    return hn, True


@maybe_njit(cache=True)
def _materialize(t, t_ref, sa, la, sb, lb, lam_p, lam_m, z_star):
    m = t_ref.size
    zs = np.empty(m, dtype=np.float64)
    ws = np.empty(m, dtype=np.float64)
    for j in range(m):
        z, w = _gap_eval(j, t, t_ref, sa, la, sb, lb, lam_p, lam_m, z_star)
        # a gap exactly at contact reconstructs to +-eps*z*; report 0
        if z < 0.0:
            z = 0.0
        zs[j] = z
        ws[j] = w
    return zs, ws


@maybe_njit(cache=True)
def _renorm_all(t, period, tol, ht, hj, hv, hn, ver,
                t_ref, sa, la, sb, lb, lam_p, lam_m, z_star):
    """Rescale the gaps onto sum(z) = 2L, shift the gap velocities onto
    sum(w) = 0, rebuild every propagator at t and reschedule.  The
    multiplicative rescale keeps gaps nonnegative and leaves closed gaps
    exactly closed (an additive shift would be swallowed by the z >= 0
    clamp at a gap that sits at zero, leaving residual behind).
    Requires heap capacity for M fresh entries (caller compacts first).
    """
    m = t_ref.size
    zs, ws = _materialize(t, t_ref, sa, la, sb, lb, lam_p, lam_m, z_star)
    scale = period / zs.sum()
    dw = ws.sum() / m
    for j in range(m):
        _set_prop(j, zs[j] * scale, ws[j] - dw, t, t_ref, sa, la, sb, lb,
                  lam_p, lam_m, z_star)
        hn, ok = _schedule(j, t, tol, ht, hj, hv, hn, ver,
                           t_ref, sa, la, sb, lb, lam_p, lam_m, z_star)
        if not ok:
            return hn, j
    return hn, -1


@maybe_njit(cache=True)
def _advance(t_target, max_events, tol, renorm_dt, last_renorm, period,
             ht, hj, hv, hn, ver, labels,
             t_ref, sa, la, sb, lb, lam_p, lam_m, z_star,
             log_t, log_j, log_n):
    """Process crossings with event time < t_target, at most max_events.

    Returns (hn, events, last_renorm, log_n, status, fail_gap).
    """
    m = t_ref.size
    cap = ht.size
    events = 0
    status = STATUS_OK
    fail_gap = -1
    while hn > 0 and events < max_events:
        if hv[0] != ver[hj[0]]:
            hn = _heap_pop(ht, hj, hv, hn)
            continue
        t_e = ht[0]
        if t_e >= t_target:
            break
        if renorm_dt > 0.0 and t_e - last_renorm > renorm_dt:
            if hn + m + 4 >= cap:
                hn = _heap_compact(ht, hj, hv, hn, ver)
                if hn + m + 4 >= cap:
                    status = STATUS_HEAP_FULL
                    break
            hn, bad = _renorm_all(t_e, period, tol, ht, hj, hv, hn, ver,
                                  t_ref, sa, la, sb, lb, lam_p, lam_m, z_star)
            last_renorm = t_e
            if bad >= 0:
                status = STATUS_ROOT_FAILURE
                fail_gap = bad
                break
            continue  # re-peek: versions moved
        j = hj[0]
        hn = _heap_pop(ht, hj, hv, hn)

        if hn + 4 >= cap:
            hn = _heap_compact(ht, hj, hv, hn, ver)
            if hn + 4 >= cap:
                status = STATUS_HEAP_FULL
                break

        zj, wj = _gap_eval(j, t_e, t_ref, sa, la, sb, lb, lam_p, lam_m, z_star)
        if wj > 0.0:
            # receding gap: the scheduled root was a numerical graze; rebuild
            if zj < 0.0:
                zj = 0.0
            _set_prop(j, zj, wj, t_e, t_ref, sa, la, sb, lb,
                      lam_p, lam_m, z_star)
            hn, ok = _schedule(j, t_e, tol, ht, hj, hv, hn, ver,
                               t_ref, sa, la, sb, lb, lam_p, lam_m, z_star)
            if not ok:
                status = STATUS_ROOT_FAILURE
                fail_gap = j
                break
            continue

        jm = j - 1 if j > 0 else m - 1
        jp = j + 1 if j < m - 1 else 0
        zm, wm = _gap_eval(jm, t_e, t_ref, sa, la, sb, lb, lam_p, lam_m, z_star)
        zp, wp = _gap_eval(jp, t_e, t_ref, sa, la, sb, lb, lam_p, lam_m, z_star)

        # crossing: w_j flips sign, both cyclic neighbors absorb old w_j
        # (for M = 2 the single neighbor absorbs it twice), the two slots
        # swap velocities -- realized here as a label swap since slot
        # accelerations are tied to rank, not identity.  The crossing
        # gap's residual z (evaluation noise at the located root) is
        # split over the neighbors so sum(z) is conserved exactly; the
        # symmetric split keeps mirror-paired populations bit-mirrored.
        _set_prop(j, 0.0, -wj, t_e, t_ref, sa, la, sb, lb, lam_p, lam_m, z_star)
        if jm == jp:
            zm += zj
            if zm < 0.0:
                zm = 0.0
            _set_prop(jm, zm, wm + 2.0 * wj, t_e, t_ref, sa, la, sb, lb,
                      lam_p, lam_m, z_star)
        else:
            zm += 0.5 * zj
            zp += 0.5 * zj
            if zm < 0.0:
                zm = 0.0
            if zp < 0.0:
                zp = 0.0
            _set_prop(jm, zm, wm + wj, t_e, t_ref, sa, la, sb, lb,
                      lam_p, lam_m, z_star)
            _set_prop(jp, zp, wp + wj, t_e, t_ref, sa, la, sb, lb,
                      lam_p, lam_m, z_star)
        s2 = j + 1 if j < m - 1 else 0
        tmp = labels[j]
        labels[j] = labels[s2]
        labels[s2] = tmp

        hn, ok = _schedule(j, t_e, tol, ht, hj, hv, hn, ver,
                           t_ref, sa, la, sb, lb, lam_p, lam_m, z_star)
        if ok:
            hn, ok = _schedule(jm, t_e, tol, ht, hj, hv, hn, ver,
                               t_ref, sa, la, sb, lb, lam_p, lam_m, z_star)
        if ok and jp != jm:
            hn, ok = _schedule(jp, t_e, tol, ht, hj, hv, hn, ver,
                               t_ref, sa, la, sb, lb, lam_p, lam_m, z_star)
        if not ok:
            status = STATUS_ROOT_FAILURE
            fail_gap = j
            break

        if log_n < log_t.size:
            log_t[log_n] = t_e
            log_j[log_n] = j
            log_n += 1
        events += 1
    return hn, events, last_renorm, log_n, status, fail_gap
