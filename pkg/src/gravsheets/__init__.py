"""gravsheets: exact event-driven dynamics of one-dimensional periodic
self-gravitating sheet systems, with closed-form periodic fields and a
spectral/screened validation suite."""

__version__ = "0.1.0"

from .accel import BACKEND, USING_NUMBA
from .domain import (
    DomainConfig,
    SystemState,
    primitive_cell_field,
    primitive_cell_total_field,
    single_particle_field,
    single_particle_potential,
    total_energy,
    total_field,
    wrap_to_cell,
)
from .engine import (
    CenterOfMassTrack,
    CrossingEvent,
    GapPropagator,
    GapView,
    SheetEngine,
    apply_crossing,
    build_propagator,
    gaps_from_state,
    next_crossing_time,
    positions_from_gaps,
    velocities_from_gaps,
)
from .experiments import (
    DiagnosticsFrame,
    WaterbagSpec,
    center_of_mass_trace,
    cluster_proxy,
    compare_boundary_modes,
    make_waterbag,
    run_experiment,
)
from .spectral import (
    FourierTruncation,
    ScreeningParameter,
    fourier_coefficients,
    primitive_cell_series_field,
    replica_quadratic_potential,
    screened_limit_potential,
    screened_potential_closed,
    screened_potential_direct,
    screening_kernel_coefficient,
    series_field,
    series_potential,
)

__all__ = [name for name in dir() if not name.startswith("_")]
