"""Sub-wavelength atom traps from position-dependent dark and dressed states.

Energies are angular frequencies in rad/s (hbar = 1), lengths in meters.
"""
from .core import (
    CONTROL_WAVELENGTH,
    YB171,
    AtomSpecies,
    DomainError,
    NanotrapError,
    UsageError,
    angular_to_hz,
    e_sigma,
    e_w,
    hz_to_angular,
)
from .schemes import Scheme, SchemeConfig, single_bound_state_config
from .adiabatic import SpatialGrid, diagonalize_grid, geometric_potentials
from .solver import (
    BoundStateResult,
    count_bound_states,
    density_overlap,
    solve_branch,
    solve_multichannel,
    solve_single_channel,
)
from .losses import LossReport, lifetime_report, pe_admixture_numeric, pe_scaling
from .design import TrapDesign, generate_table, solve_width_for_lifetime

__version__ = "0.1.0"
