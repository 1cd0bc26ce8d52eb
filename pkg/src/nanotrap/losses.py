"""Loss rates and lifetimes of the sub-wavelength traps.

Relations that hold only up to factors of order unity are evaluated with
prefactor 1.  Absolute lifetimes are therefore order-of-magnitude estimates;
the power laws in s are exact.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import analytic
from .adiabatic import (
    AdiabaticDecomposition,
    GeometricPotentials,
    SpatialGrid,
    diagonalize_grid,
    first_derivative,
    geometric_potentials,
)
from .analytic import NoEnhancementWarning, TrapShapeParams
from .core import DomainError, UsageError
from .schemes import QuadraticLocal, Scheme, SchemeConfig, control_field
from .solver import BoundStateResult, solve_single_channel


@dataclass(frozen=True)
class LossReport:
    """Loss channels of one trap; rates in rad/s, lifetime in seconds."""
    gamma_d1: float
    gamma_d2: float
    gamma_lz: float
    p_e: float
    gamma_total: float
    lifetime: float

    def __post_init__(self):
        for name in ("gamma_d1", "gamma_d2", "gamma_lz", "p_e", "gamma_total"):
            if getattr(self, name) < 0:
                raise DomainError(f"LossReport.{name} must be >= 0, got {getattr(self, name)}")

    @classmethod
    def from_rates(cls, gamma_d1: float, gamma_d2: float, gamma_lz: float, p_e: float) -> "LossReport":
        total = gamma_d1 + gamma_d2 + gamma_lz
        return cls(gamma_d1, gamma_d2, gamma_lz, p_e, total, 1.0 / total if total > 0 else math.inf)

    def to_dict(self) -> dict:
        """JSON-ready mapping; an infinite lifetime becomes the string ``"inf"``."""
        out = asdict(self)
        return {k: ("inf" if v == math.inf else v) for k, v in out.items()}


def gamma_eit(gamma: float, v_depth: float, e_w: float, omega_p: float):
    """(Gamma_D1, Gamma_D2, Gamma_total) = Gamma*(V^2, E_w^2, V^2 + E_w^2)/Omega_p^2."""
    if omega_p == 0:
        raise DomainError("gamma_eit: omega_p must be nonzero")
    if gamma < 0:
        raise DomainError(f"gamma_eit: gamma must be >= 0, got {gamma}")
    d1 = gamma * v_depth**2 / omega_p**2
    d2 = gamma * e_w**2 / omega_p**2
    return d1, d2, d1 + d2


def pe_scaling(scheme, s: float, e_sigma: float, omega0: float) -> float:
    """s^p (E_sigma/Omega0)^2 with p = 8 for the red AC scheme and 6 otherwise."""
    scheme = Scheme(scheme)
    if not omega0 > 0:
        raise DomainError(f"pe_scaling: omega0 must be positive, got {omega0}")
    if s < 1:
        warnings.warn(f"s = {s:.4g} < 1, no sub-wavelength enhancement", NoEnhancementWarning, stacklevel=2)
    power = 8 if scheme is Scheme.RED_AC else 6
    return s**power * (e_sigma / omega0) ** 2


def gamma_lz(e_w: float, gap: float, nu: float = 1.0) -> float:
    """Landau-Zener style tunnelling rate E_w exp(-nu*gap/E_w)."""
    if gap < 0:
        raise DomainError(f"gamma_lz: gap must be >= 0, got {gap}")
    if not nu > 0:
        raise DomainError(f"gamma_lz: nu must be positive, got {nu}")
    if not e_w > 0:
        return 0.0
    return float(e_w * math.exp(-nu * gap / e_w))


def _lowest_branch_r_amplitude(config: SchemeConfig, x: np.ndarray) -> np.ndarray:
    # <r|0(x)> of the trapped (lowest) dressed state
    frames = np.linalg.eigh(config.hamiltonian(x))[1]
    return frames[:, 0, 0]


def pe_admixture_numeric(state: BoundStateResult, config: SchemeConfig, k: int = 0) -> float:
    """Excited-state fraction of state `k`.

    Two-level schemes: sum |psi_r|^2 (Omega_c/Delta)^2 h.  A single-channel
    (effective) state is lifted onto the trapped dressed state first.
    EIT schemes need the full three-channel state and return sum |psi_e|^2 h.
    """
    x, h = state.x, state.grid.h
    if config.scheme.is_three_level:
        if state.n_channels != 3:
            raise UsageError(f"EIT admixture needs the 3-channel state, got {state.n_channels} channel(s)")
        return float(np.sum(np.abs(state.channel(2, k)) ** 2) * h)
    if state.n_channels == 2:
        psi_r = state.channel(0, k)
    elif state.n_channels == 1:
        psi_r = state.channel(0, k) * _lowest_branch_r_amplitude(config, x)
    else:
        raise UsageError(f"two-level admixture needs 1 or 2 channels, got {state.n_channels}")
    ratio = np.asarray(control_field(config.profile, x)) / config.delta
    return float(np.sum(np.abs(psi_r) ** 2 * ratio**2) * h)


def geometric_peak(config: SchemeConfig, trap: TrapShapeParams) -> float:
    """Largest value of the dark-state geometric potential, in rad/s."""
    if isinstance(config.profile, QuadraticLocal):
        # 4 E_w xt^2/((eta + xt^2)^2 + 1)^2 on a fine xt grid
        xt = np.linspace(0.0, 10.0, 20001)
        d = (trap.eta + xt**2) ** 2 + 1.0
        return float(np.max(4.0 * trap.e_w * xt**2 / d**2))
    return trap.e_w


def _eit_depth(config: SchemeConfig, trap: TrapShapeParams, x: np.ndarray) -> float:
    if isinstance(config.profile, QuadraticLocal):
        v = analytic.v_tot_modified_eit(trap.delta_r, trap.eta, trap.w, config.species, x)
    else:
        v = analytic.v_tot_eit(trap.delta_r, trap.w, config.species, x)
    return max(0.0, -float(np.min(v)))


def lifetime_report(
    config: SchemeConfig,
    trap: Optional[TrapShapeParams] = None,
    state: Optional[BoundStateResult] = None,
    nu: float = 1.0,
) -> LossReport:
    """Combine the loss channels appropriate to the scheme.

    EIT schemes: Gamma_D1 = Gamma V^2/Omega_p^2 with V the well depth,
    Gamma_D2 = Gamma U_peak^2/Omega_p^2, tunnelling across the gap Omega_p.
    AC schemes: Gamma_D1 = Gamma P_e from the bound state, no Gamma_D2,
    tunnelling across |Delta| (improved) or none (red, nothing lies below).
    """
    trap = trap or TrapShapeParams.from_config(config)
    g = config.gamma
    if config.scheme.is_three_level:
        x = state.x if state is not None else np.linspace(-10 * trap.w, 10 * trap.w, 4001)
        depth = _eit_depth(config, trap, x)
        d1, _, _ = gamma_eit(g, depth, trap.e_w, config.omega_p)
        d2 = g * geometric_peak(config, trap) ** 2 / config.omega_p**2
        if state is not None and state.n_channels == 3:
            p_e = pe_admixture_numeric(state, config)
        else:
            p_e = (depth**2 + geometric_peak(config, trap) ** 2) / config.omega_p**2
        lz = gamma_lz(trap.e_w, config.omega_p, nu)
        return LossReport.from_rates(d1, d2, lz, p_e)
    if state is None:
        raise UsageError("AC-scheme lifetime needs a bound state to weigh the admixture")
    p_e = pe_admixture_numeric(state, config)
    lz = gamma_lz(trap.e_w, abs(config.delta), nu) if config.scheme is Scheme.IMPROVED_AC else 0.0
    return LossReport.from_rates(g * p_e, 0.0, lz, p_e)


def scaling_lifetime(scheme, s: float, e_sigma: float, omega0: float, gamma: float) -> float:
    """1/(Gamma s^p (E_sigma/Omega0)^2), the lifetime the design tables invert."""
    rate = gamma * pe_scaling(scheme, s, e_sigma, omega0)
    return 1.0 / rate if rate > 0 else math.inf


# -- non-adiabatic losses of the dark state -------------------------------------

@dataclass(frozen=True)
class DarkStateSolution:
    """Ground state on the dark branch with its adiabatic data."""
    state: BoundStateResult
    decomposition: AdiabaticDecomposition
    potentials: GeometricPotentials
    branch: int
    effective_potential: np.ndarray


def dark_branch_ground_state(config: SchemeConfig, grid: SpatialGrid, check: bool = True) -> DarkStateSolution:
    """Ground state of E_D(x) + (hbar/2m)|dD/dx|^2 on the dark branch."""
    if not config.scheme.is_three_level:
        raise UsageError(f"dark_branch_ground_state needs an EIT scheme, got {config.scheme.value}")
    decomp = diagonalize_grid(config, grid)
    geo = geometric_potentials(decomp, check=check)
    b = config.scheme.trapping_branch
    v = decomp.energies[:, b] + geo.scalar_energy(config.species)[:, b, b].real
    state = solve_single_channel(v, grid, config.species, check_convergence=False)
    return DarkStateSolution(state, decomp, geo, b, v)


def nonadiabatic_admixture(config: SchemeConfig, solution: DarkStateSolution) -> float:
    """Bright-state weight sum_b ||C_b psi||^2 h / Omega_p^2 fed by the dark-state motion.

    C_b psi = -(hbar/2m)[U_bD psi + 2 (R^dag R')_bD psi'] is the part of the
    kinetic operator that leaves the dark branch.
    """
    psi = solution.state.channel(0).real
    h = solution.state.grid.h
    amp = solution.potentials.coupling_energy(config.species, psi, first_derivative(psi, h), solution.branch)
    others = [b for b in range(amp.shape[1]) if b != solution.branch]
    return float(np.sum(np.abs(amp[:, others]) ** 2) * h / config.omega_p**2)


def nonadiabatic_loss_proxy(config: SchemeConfig, grid: SpatialGrid) -> float:
    """Gamma times `nonadiabatic_admixture`, a Gamma_D2-like rate in rad/s."""
    return config.gamma * nonadiabatic_admixture(config, dark_branch_ground_state(config, grid))


def matched_modified_eit(config: SchemeConfig, eta: float = 1.0, span: float = 10.0) -> SchemeConfig:
    """Modified-EIT trap with the width, probe and well depth of a linear-node EIT trap."""
    if config.scheme is not Scheme.EIT:
        raise UsageError(f"matched_modified_eit starts from an EIT trap, got {config.scheme.value}")
    w = config.trap_width()
    xs = np.linspace(-span * w, span * w, 20001)
    depth = -float(np.min(analytic.v_tot_eit(config.delta_r, w, config.species, xs)))
    delta_r = analytic.modified_eit_delta_r(depth, eta, w, config.species, span)
    return SchemeConfig(Scheme.MODIFIED_EIT, QuadraticLocal(config.omega_p, eta, w), config.omega_p,
                        config.species, delta_r=delta_r, gamma=config.gamma)


def fit_loglog_slope(s_values, p_values) -> float:
    """Least-squares slope of log p against log s."""
    ls, lp = np.log(np.asarray(s_values, float)), np.log(np.asarray(p_values, float))
    return float(np.polyfit(ls, lp, 1)[0])


__all__ = [
    "LossReport", "gamma_eit", "pe_scaling", "gamma_lz", "pe_admixture_numeric", "lifetime_report",
    "scaling_lifetime", "dark_branch_ground_state", "nonadiabatic_admixture", "nonadiabatic_loss_proxy",
    "fit_loglog_slope", "matched_modified_eit", "geometric_peak", "DarkStateSolution",
]
