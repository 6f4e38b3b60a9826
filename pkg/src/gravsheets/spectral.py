"""Independent spectral and screened-sum oracles for the closed forms.

Three independent routes to the periodic potential/field are provided:

* truncated Fourier series over harmonics of the cell,
* a direct sum over periodic images with exponential screening
  exp(-kappa |x - x'|) and the uniform background subtracted,
* the closed geometric-series form of that screened sum, whose
  kappa -> 0 limit is the quadratic replica form.

They agree up to additive constants in the potential (constants are
never compared across conventions; fields, or best-fit-constant-removed
potentials, are).  With phi normalized to vanish at contact, the series
and screened limits both sit at phi1 - g*L/6.

The screened closed form converges to its limit at second order in
kappa: the first-order coefficient vanishes identically because the
braced generating expression is odd under kappa -> -kappa.  For
kappa*L below a switch point the closed form is evaluated through that
odd small-kappa expansion, which is free of the 1/kappa^2 cancellation
that dominates double-precision roundoff otherwise.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .domain import DomainConfig, wrap_to_cell
from .kernels import cos_over_n2_sum, sin_over_n_sum


@dataclass(frozen=True)
class FourierTruncation:
    """Highest retained harmonic of the cell (n = 0 never contributes:
    the background makes the source mass-neutral)."""

    n_max: int

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")


@dataclass(frozen=True)
class ScreeningParameter:
    """Exponential screening rate kappa and replica truncation r_max for
    the direct image sum.  The truncation tail is geometric with ratio
    exp(-2 kappa L)."""

    kappa: float
    r_max: int

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if self.r_max < 1:
            raise ValueError(f"r_max must be >= 1, got {self.r_max}")


def fourier_coefficients(positions, n: int, cfg: DomainConfig) -> complex:
    """Density-fluctuation Fourier amplitude c_n = (1/2L) sum_j
    exp(-i pi n x_j / L) for unit-mass sheets; rejects n = 0."""
    if n == 0:
        raise ValueError("n = 0 carries no fluctuation (background cancels)")
    q = wrap_to_cell(np.asarray(positions, dtype=np.float64), cfg)
    L = cfg.half_length
    return complex(np.exp(-1j * math.pi * n * q / L).sum() / (2.0 * L))


def _scalar_or_array(out, scalar):
    return float(out[0]) if scalar else out


def series_potential(x, positions, trunc: FourierTruncation, cfg: DomainConfig):
    """Truncated-series potential; converges (O(1/n_max^2) pointwise away
    from sources) to sum_j phi1(x - x_j) - (number of sources) g L / 6."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    pos = np.asarray(positions, dtype=np.float64)
    g, L = cfg.coupling, cfg.half_length
    out = np.zeros_like(x)
    for xj in pos:
        s = math.pi * (x - xj) / L
        out += cos_over_n2_sum(s, trunc.n_max)
    return _scalar_or_array(-(g * L / math.pi ** 2) * out, scalar)


def series_field(x, positions, trunc: FourierTruncation, cfg: DomainConfig):
    """Truncated-series field; converges pointwise to the total field
    except at the sources themselves (Gibbs zone of width ~ harmonic
    wavelength 2L/n_max); exactly zero at a source for every truncation,
    matching the sgn(0) = 0 self-force convention."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    pos = np.asarray(positions, dtype=np.float64)
    g, L = cfg.coupling, cfg.half_length
    out = np.zeros_like(x)
    for xj in pos:
        s = math.pi * (x - xj) / L
        out += sin_over_n_sum(s, trunc.n_max)
    return _scalar_or_array(-(g / math.pi) * out, scalar)


def primitive_cell_series_field(x, positions, trunc: FourierTruncation,
                                cfg: DomainConfig):
    """Series field of the primitive cell's content alone.  Forced to
    vanish at x = +-L for every source set and truncation (a mass-neutral
    slice), which is exactly why it cannot represent the field on the
    circle; converges to `primitive_cell_field` summed over sources.

    The +n/-n terms of the two-sided sum are conjugate, so the field is
    assembled as -2g sum_{n>=1} Im(term_n), real by construction.
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    pos = np.asarray(positions, dtype=np.float64)
    g, L = cfg.coupling, cfg.half_length
    out = np.zeros(x.size, dtype=np.float64)
    ns = np.arange(1, trunc.n_max + 1, dtype=np.float64)
    alternating = (-1.0) ** ns
    for xj in pos:
        cn = np.exp(-1j * math.pi * ns * xj / L) / (2.0 * L)
        basis = np.exp(1j * math.pi * np.outer(x, ns) / L) - alternating
        term = cn[None, :] * (L / (math.pi * ns))[None, :] * basis
        out -= 2.0 * g * term.imag.sum(axis=1)
    return _scalar_or_array(out, scalar)


def _bracketing_offsets(y, L):
    """Y< = y - 2 r L >= 0 and Y> = Y< - 2L for the replica interval
    containing y; at a replica boundary either bracketing choice gives
    the same symmetric combinations."""
    r_lo = math.floor(y / (2.0 * L))
    y_lt = y - 2.0 * L * r_lo
    return y_lt, y_lt - 2.0 * L


def screened_potential_direct(x, x1, scr: ScreeningParameter, cfg: DomainConfig,
                              tol: float = 1e-12) -> float:
    """Screened potential of one sheet by direct truncated image sum,
    background contribution g/(2 kappa^2 L) subtracted.

    Warns when the geometric tail bound exp(-2 kappa L r_max) exceeds
    `tol`.
    """
    g, L = cfg.coupling, cfg.half_length
    k = scr.kappa
    if math.exp(-2.0 * k * L * scr.r_max) > tol:
        warnings.warn(
            f"replica truncation tail exp(-2*kappa*L*r_max) = "
            f"{math.exp(-2.0 * k * L * scr.r_max):.3e} exceeds tol = {tol:.3e}",
            RuntimeWarning, stacklevel=2)
    y = float(wrap_to_cell(np.asarray(x, dtype=np.float64) - x1, cfg))
    r = np.arange(-scr.r_max, scr.r_max + 1, dtype=np.float64)
    u = np.abs(y - 2.0 * L * r)
    tot = float(np.sum(u * np.exp(-k * u)))
    return 0.5 * g * tot - 0.5 * g / (k * k * L)


_SERIES_SWITCH = 0.05  # kappa*L below this: odd-expansion evaluation


def _closed_moments(a: float, order: int):
    """m_k = a^k + (2-a)^k for the dimensionless offsets a = Y</L."""
    b = 2.0 - a
    return [a ** k + b ** k for k in range(order + 1)]


def screened_potential_closed(x, x1, kappa: float, cfg: DomainConfig) -> float:
    """Closed geometric-series form of the screened single-sheet
    potential (analytic -d/dkappa applied; background already removed).

    Rejects kappa <= 0.  Converges to `screened_limit_potential` as
    O(kappa^2); below kappa*L = 0.05 the equivalent small-kappa odd
    expansion is used to dodge the 1/kappa^2 roundoff cancellation.
    """
    if kappa <= 0:
        raise ValueError(f"kappa must be > 0, got {kappa}")
    g, L = cfg.coupling, cfg.half_length
    y = float(wrap_to_cell(np.asarray(x, dtype=np.float64) - x1, cfg))
    y_lt, y_gt = _bracketing_offsets(y, L)
    u = kappa * L
    if u < _SERIES_SWITCH:
        a = y_lt / L
        m = _closed_moments(a, 6)
        s1 = m[2] / 4.0 - 2.0 / 3.0
        s3 = m[2] / 12.0 - m[3] / 12.0 + m[4] / 48.0 - 1.0 / 45.0
        s5 = (2.0 / 945.0 - m[2] / 180.0 + m[4] / 144.0
              - m[5] / 240.0 + m[6] / 1440.0)
        return -0.5 * g * L * (s1 + 3.0 * s3 * u * u + 5.0 * s5 * u ** 4)
    e_lt = math.exp(-kappa * y_lt)
    e_gt = math.exp(kappa * y_gt)
    d = -math.expm1(-2.0 * kappa * L)
    dd = 2.0 * L * math.exp(-2.0 * kappa * L)
    return 0.5 * g * ((y_lt * e_lt - y_gt * e_gt) / d
                      + dd * (e_lt + e_gt) / (d * d)
                      - 1.0 / (kappa * kappa * L))


def screened_limit_potential(x, x1, cfg: DomainConfig) -> float:
    """kappa -> 0 limit of the closed screened potential:
    -(g/8L)(Y<^2 + Y>^2) + gL/3, i.e. phi1 - gL/6 (the quadratic replica
    form carries the constant -gL/2 relative to the contact-normalized
    phi1; the screening limit adds gL/3 on top of it)."""
    g, L = cfg.coupling, cfg.half_length
    y = float(wrap_to_cell(np.asarray(x, dtype=np.float64) - x1, cfg))
    y_lt, y_gt = _bracketing_offsets(y, L)
    return -(g / (8.0 * L)) * (y_lt * y_lt + y_gt * y_gt) + g * L / 3.0


def replica_quadratic_potential(x, x1, cfg: DomainConfig) -> float:
    """The bare quadratic replica form -(g/8L)(Y<^2 + Y>^2); equals
    phi1 - gL/2."""
    g, L = cfg.coupling, cfg.half_length
    y = float(wrap_to_cell(np.asarray(x, dtype=np.float64) - x1, cfg))
    y_lt, y_gt = _bracketing_offsets(y, L)
    return -(g / (8.0 * L)) * (y_lt * y_lt + y_gt * y_gt)


def screening_kernel_coefficient(kappa: float, n: int, cfg: DomainConfig) -> float:
    """Closed form of the screening convolution kernel per harmonic:
    2 (kappa^2 - (pi n / L)^2) / (kappa^2 + (pi n / L)^2)^2, i.e. the
    integral of |u| exp(-kappa |u|) cos(pi n u / L)."""
    om = math.pi * n / cfg.half_length
    return 2.0 * (kappa * kappa - om * om) / (kappa * kappa + om * om) ** 2
