"""Domain types and closed-form periodic potential/field laws.

The system is 2N equal-mass sheets on a circle of circumference 2L
(primitive cell [-L, L), endpoints identified).  Masses are folded into
the single coupling g: the acceleration field of one sheet at
displacement d (wrapped to [-L, L)) is

    E1(d) = (g/2) * (d/L - sgn(d)),        sgn(0) = 0,

and the pair potential, zero at contact, is

    phi1(d) = (g/2) * (|d| - d^2 / (2L)).

Both are periodic with period 2L and depend only on the wrapped
displacement; each sheet carries its own uniform neutralizing
background, which is what produces the linear d/L terms.

The total field on the circle (`total_field`) depends explicitly on the
center of mass of the wrapped configuration; that dependence is exactly
what keeps the field unchanged when a sheet is re-represented by a
periodic image.  `primitive_cell_field` is the field of the cell's
content alone; it is *not* translation invariant on the circle and is
kept as a documented negative control.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class DomainConfig:
    """Geometry and coupling of the periodic sheet system.

    Attributes
    ----------
    half_length : float
        L > 0; the primitive cell is [-L, L).
    n_pairs : int
        N >= 1; the system holds 2N sheets.
    coupling : float
        g > 0, field-strength units (all masses folded in).
    gamma : float
        Friction coefficient >= 0 (comoving/cosmological damping).
    interaction : str
        Reserved; must be "gravitational".
    """

    half_length: float
    n_pairs: int
    coupling: float = 1.0
    gamma: float = 0.0
    interaction: str = field(default="gravitational")

    def __post_init__(self):
        if not self.half_length > 0:
            raise ValueError(f"half_length must be > 0, got {self.half_length}")
        if self.n_pairs < 1:
            raise ValueError(f"n_pairs must be >= 1, got {self.n_pairs}")
        if not self.coupling > 0:
            raise ValueError(f"coupling must be > 0, got {self.coupling}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.interaction != "gravitational":
            raise ValueError(f"unsupported interaction {self.interaction!r}")

    @property
    def period(self) -> float:
        return 2.0 * self.half_length

    @property
    def n_sheets(self) -> int:
        return 2 * self.n_pairs

    @property
    def stiffness(self) -> float:
        """A = g N / L, the square of the natural (Jeans) rate."""
        return self.coupling * self.n_pairs / self.half_length

    @property
    def mean_gap(self) -> float:
        """Equilibrium spacing L / N."""
        return self.half_length / self.n_pairs

    @classmethod
    def scaled(cls, n_pairs: int, gamma: float = 0.0) -> "DomainConfig":
        """Dimensionless convention: L = N (mean gap 1) and g = 1 (A = 1,
        time measured in units of the natural rate)."""
        return cls(half_length=float(n_pairs), n_pairs=n_pairs,
                   coupling=1.0, gamma=gamma)


@dataclass
class SystemState:
    """Rank-ordered sheet positions/velocities on the covering line.

    positions are nondecreasing with x[-1] - x[0] <= 2L; `labels` carry
    particle identities through crossings (slots keep the ordering).
    """

    time: float
    positions: np.ndarray
    velocities: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64)
        self.velocities = np.asarray(self.velocities, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        n = self.positions.size
        if self.velocities.size != n or self.labels.size != n:
            raise ValueError("positions/velocities/labels size mismatch")

    @property
    def n_sheets(self) -> int:
        return self.positions.size

    def validate(self, cfg: DomainConfig):
        if self.n_sheets != cfg.n_sheets:
            raise ValueError(f"state holds {self.n_sheets} sheets, config wants {cfg.n_sheets}")
        d = np.diff(self.positions)
        if np.any(d < 0):
            raise ValueError("positions not sorted")
        span = self.positions[-1] - self.positions[0]
        if span > cfg.period * (1 + 1e-12):
            raise ValueError(f"cover window {span} exceeds period {cfg.period}")
        if not (np.all(np.isfinite(self.positions)) and np.all(np.isfinite(self.velocities))):
            raise ValueError("non-finite state")
        return self

    def copy(self) -> "SystemState":
        return SystemState(self.time, self.positions.copy(),
                           self.velocities.copy(), self.labels.copy())

    def center_of_mass(self):
        """Cover-line (x_c, v_c)."""
        return float(self.positions.mean()), float(self.velocities.mean())


def wrap_to_cell(x, cfg: DomainConfig):
    """Map coordinate(s) to the primitive cell [-L, L).  Total function;
    +L wraps to -L (the two are the same point on the circle)."""
    L = cfg.half_length
    return (np.asarray(x) + L) % (2.0 * L) - L


def single_particle_potential(x, x1, cfg: DomainConfig):
    """Periodic potential of one sheet at x1, evaluated at x.

    Zero at contact; depends only on the wrapped separation, so either
    way around the circle gives the same value.
    """
    d = wrap_to_cell(np.asarray(x, dtype=np.float64) - x1, cfg)
    return 0.5 * cfg.coupling * (np.abs(d) - d * d / (2.0 * cfg.half_length))


def single_particle_field(x, x1, cfg: DomainConfig):
    """Field of one sheet at x1, evaluated at x (sgn(0)=0 convention, so
    a sheet exerts no force on itself).  Vanishes at contact and at the
    antipode x1 - L."""
    d = wrap_to_cell(np.asarray(x, dtype=np.float64) - x1, cfg)
    return 0.5 * cfg.coupling * (d / cfg.half_length - np.sign(d))


def total_field(x, state, cfg: DomainConfig):
    """Total field at x from all sheets of `state` (positions may be any
    cover representatives; everything is wrapped internally).

    Equals the pairwise sum of `single_particle_field` and is invariant
    under re-representing any sheet by a periodic image: the shift of the
    wrapped center of mass cancels the change in the left/right counts.
    `state` may be a SystemState or a bare position array.
    """
    positions = state.positions if hasattr(state, "positions") else np.asarray(state)
    q = wrap_to_cell(positions, cfg)
    xw = wrap_to_cell(x, cfg)
    scalar = np.ndim(xw) == 0
    xw = np.atleast_1d(xw).astype(np.float64)
    if q.size == 0:
        out = np.zeros_like(xw)
        return float(out[0]) if scalar else out
    qs = np.sort(q)
    n_left = np.searchsorted(qs, xw, side="left")
    n_right = q.size - np.searchsorted(qs, xw, side="right")
    # each source carries its own background: the linear term scales with
    # the actual source count (q.size = 2N for a full system state)
    out = 0.5 * cfg.coupling * ((q.size / cfg.half_length) * (xw - qs.mean())
                                + (n_right - n_left))
    return float(out[0]) if scalar else out


def primitive_cell_field(x, x1, cfg: DomainConfig):
    """Field of one sheet plus background restricted to the primitive
    cell, as a function of the raw coordinates (no wrapping).

    NOT a field on the circle: it vanishes at x = +-L for any source, is
    not translation invariant, and a sheet at x1 != 0 accelerates itself
    (value g*x1/(2L) at its own position).  Kept as a negative control
    against the consistent `single_particle_field`; the two differ by the
    constant -g*x1/(2L) everywhere.
    """
    x = np.asarray(x, dtype=np.float64)
    return 0.5 * cfg.coupling * (x / cfg.half_length + np.sign(np.asarray(x1) - x))


def primitive_cell_total_field(x, positions, cfg: DomainConfig):
    """Sum of `primitive_cell_field` over sources (raw coordinates)."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    positions = np.asarray(positions, dtype=np.float64)
    if positions.size == 0:
        return np.zeros_like(x)
    return 0.5 * cfg.coupling * (
        positions.size * x / cfg.half_length
        + np.sign(positions[None, :] - x[:, None]).sum(axis=1)
    )


def total_energy(state, cfg: DomainConfig) -> float:
    """Kinetic plus pairwise periodic potential energy (per unit mass).
    Conserved by the frictionless dynamics; crossings keep positions and
    velocities continuous."""
    from .kernels import pair_potential_energy

    q = wrap_to_cell(state.positions, cfg)
    kinetic = 0.5 * float(np.sum(state.velocities ** 2))
    return kinetic + pair_potential_energy(q, cfg.coupling, cfg.half_length)
