"""Hot numeric kernels with numba and pure-numpy implementations.

Each kernel has a numba scalar-loop variant (compiled when the numba
backend is active) and a vectorized numpy variant; module-level names
dispatch to the active backend.  `benchmarks/compare_backends.py` times
the two side by side.
"""

import math

import numpy as np

from .accel import USING_NUMBA, maybe_njit

# ---------------------------------------------------------------------------
# truncated Fourier sums:  C(s) = sum_{n=1..nmax} cos(n s)/n^2
#                          S(s) = sum_{n=1..nmax} sin(n s)/n
# Kahan accumulation keeps the n >= 1e5 partial sums clean.
# ---------------------------------------------------------------------------


@maybe_njit(cache=True)
def _cos_series_loop(s, n_max):
    out = np.empty_like(s)
    for i in range(s.size):
        si = s[i]
        acc = 0.0
        comp = 0.0
        for n in range(1, n_max + 1):
            term = math.cos(n * si) / (n * n)
            y = term - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
        out[i] = acc
    return out


@maybe_njit(cache=True)
def _sin_series_loop(s, n_max):
    out = np.empty_like(s)
    for i in range(s.size):
        si = s[i]
        acc = 0.0
        comp = 0.0
        for n in range(1, n_max + 1):
            term = math.sin(n * si) / n
            y = term - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
        out[i] = acc
    return out


_N_CHUNK = 4096
_S_CHUNK = 256


def _series_numpy(s, n_max, trig, power):
    out = np.zeros_like(s)
    for i0 in range(0, s.size, _S_CHUNK):
        sb = s[i0:i0 + _S_CHUNK, None]
        acc = np.zeros(sb.size)
        for n0 in range(1, n_max + 1, _N_CHUNK):
            n = np.arange(n0, min(n0 + _N_CHUNK, n_max + 1), dtype=np.float64)
            acc += (trig(sb * n) / n ** power).sum(axis=1)
        out[i0:i0 + _S_CHUNK] = acc
    return out


def _cos_series_numpy(s, n_max):
    return _series_numpy(s, n_max, np.cos, 2)


def _sin_series_numpy(s, n_max):
    return _series_numpy(s, n_max, np.sin, 1)


# ---------------------------------------------------------------------------
# pairwise periodic potential energy over wrapped positions
# ---------------------------------------------------------------------------


@maybe_njit(cache=True)
def _pair_energy_loop(q, g, L):
    tot = 0.0
    for i in range(q.size - 1):
        qi = q[i]
        for j in range(i + 1, q.size):
            d = qi - q[j]
            d -= 2.0 * L * math.floor((d + L) / (2.0 * L))
            tot += abs(d) - d * d / (2.0 * L)
    return 0.5 * g * tot


def _pair_energy_numpy(q, g, L):
    d = q[:, None] - q[None, :]
    d -= 2.0 * L * np.floor((d + L) / (2.0 * L))
    phi = np.abs(d) - d * d / (2.0 * L)
    iu = np.triu_indices(q.size, k=1)
    return 0.5 * g * float(phi[iu].sum())


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

if USING_NUMBA:
    _cos_series = _cos_series_loop
    _sin_series = _sin_series_loop
    _pair_energy = _pair_energy_loop
else:
    _cos_series = _cos_series_numpy
    _sin_series = _sin_series_numpy
    _pair_energy = _pair_energy_numpy


def cos_over_n2_sum(s, n_max: int):
    """sum_{n=1}^{n_max} cos(n s)/n^2, elementwise over s."""
    s = np.atleast_1d(np.asarray(s, dtype=np.float64))
    return _cos_series(np.ascontiguousarray(s), int(n_max))


def sin_over_n_sum(s, n_max: int):
    """sum_{n=1}^{n_max} sin(n s)/n, elementwise over s."""
    s = np.atleast_1d(np.asarray(s, dtype=np.float64))
    return _sin_series(np.ascontiguousarray(s), int(n_max))


def pair_potential_energy(q, g: float, L: float) -> float:
    """Sum of the pair potential over all distinct pairs of wrapped
    positions q (O(N^2); used at diagnostic times only)."""
    q = np.ascontiguousarray(np.asarray(q, dtype=np.float64))
    if q.size < 2:
        return 0.0
    return float(_pair_energy(q, float(g), float(L)))
