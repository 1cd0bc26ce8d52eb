"""Control-field profiles and position dependent atom-light Hamiltonians.

Basis ordering is ``(r, g, e)`` for the three-level EIT Hamiltonian and
``(r, g)`` for the two-level AC-Stark Hamiltonians.  Matrix elements are the
half-Rabi frequencies that appear in the Hamiltonian (the full Rabi
frequencies are 2*Omega).

Sign of ``delta`` (the single-photon detuning, the (e, e) matrix entry): the
light shift of |r> is ``-Omega_c**2/delta``.  A trap in the improved AC scheme
therefore needs ``delta < 0`` and the red AC scheme ``delta > 0``.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from .core import YB171, AtomSpecies, DomainError, UsageError, e_w


class PerturbativeValidityWarning(UserWarning):
    """The adiabatic elimination of |e> is outside its factor-10 margin."""


class Scheme(str, enum.Enum):
    EIT = "eit"
    IMPROVED_AC = "improved_ac"
    RED_AC = "red_ac"
    MODIFIED_EIT = "modified_eit"

    @property
    def is_three_level(self) -> bool:
        return self in (Scheme.EIT, Scheme.MODIFIED_EIT)

    @property
    def trapping_branch(self) -> int:
        """Index (ascending at the box edge) of the adiabatic branch that traps."""
        return 1 if self.is_three_level else 0


# -- control profiles ---------------------------------------------------------

@dataclass(frozen=True)
class GaussianDip:
    """Omega0*(1 - exp(-x^2/sigma^2))**(1/2); a node at x = 0.

    With ``odd=True`` the profile changes sign through the node, like a
    Hermite-Gauss mode, which keeps the dressed frames smooth at x = 0.
    """
    omega0: float
    sigma: float
    odd: bool = False

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        amp = self.omega0 * np.sqrt(-np.expm1(-(x / self.sigma) ** 2))
        return np.sign(x) * amp if self.odd else amp


@dataclass(frozen=True)
class GaussianPeak:
    """Omega0*exp(-x^2/(2 sigma^2)); the intensity carries exp(-x^2/sigma^2)."""
    omega0: float
    sigma: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.omega0 * np.exp(-0.5 * (x / self.sigma) ** 2)


@dataclass(frozen=True)
class CosineLattice:
    """Omega0*(1 + nu - cos(k x))."""
    omega0: float
    k: float
    nu: float = 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.omega0 * (1.0 + self.nu - np.cos(self.k * x))


@dataclass(frozen=True)
class LinearLocal:
    """Omega0*x/sigma, the small-x form of the Gaussian dip (signed)."""
    omega0: float
    sigma: float

    def __call__(self, x):
        return self.omega0 * np.asarray(x, dtype=float) / self.sigma


@dataclass(frozen=True)
class QuadraticLocal:
    """Omega_p*(eta + (x/w)^2), the expansion of a lifted cosine near its minimum."""
    omega_p: float
    eta: float
    w: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.omega_p * (self.eta + (x / self.w) ** 2)


ControlProfile = Union[GaussianDip, GaussianPeak, CosineLattice, LinearLocal, QuadraticLocal]


def _validate_profile(profile: ControlProfile) -> None:
    amp = profile.omega_p if isinstance(profile, QuadraticLocal) else profile.omega0
    if not amp > 0:
        raise DomainError(f"{type(profile).__name__}: amplitude must be positive, got {amp}")
    if isinstance(profile, CosineLattice):
        if not profile.k > 0:
            raise DomainError(f"CosineLattice: k must be positive, got {profile.k}")
        if profile.nu < 0:
            raise DomainError(f"CosineLattice: nu must be >= 0, got {profile.nu}")
    elif isinstance(profile, QuadraticLocal):
        if not profile.w > 0:
            raise DomainError(f"QuadraticLocal: w must be positive, got {profile.w}")
        if profile.eta < 0:
            raise DomainError(f"QuadraticLocal: eta must be >= 0, got {profile.eta}")
    elif not profile.sigma > 0:
        raise DomainError(f"{type(profile).__name__}: sigma must be positive, got {profile.sigma}")


def control_field(profile: ControlProfile, x):
    """Control Rabi frequency Omega_c(x) in rad/s (vectorised over `x`)."""
    out = profile(x)
    return float(out) if np.ndim(out) == 0 else out


# -- scheme configuration -----------------------------------------------------

@dataclass(frozen=True)
class SchemeConfig:
    """All laser and atom parameters of one trapping scheme (angular units).

    Attributes
    ----------
    omega_p : probe coupling (uniform)
    delta : single-photon detuning, the (e, e) entry; signed
    delta_r : two-photon detuning of |r> in the EIT schemes
    delta_small : two-photon detuning of |r> in the AC schemes
    gamma : linewidth of |e>
    off_resonant : ``(Omega, Delta_off)`` pairs of couplings outside the model
    delta_hfs : hyperfine splitting bounding Omega_0 in the EIT level scheme
    """
    scheme: Scheme
    profile: ControlProfile
    omega_p: float
    species: AtomSpecies = YB171
    delta: float = 0.0
    delta_r: float = 0.0
    delta_small: float = 0.0
    gamma: float = 0.0
    off_resonant: tuple = field(default_factory=tuple)
    delta_hfs: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "off_resonant", tuple(tuple(map(float, c)) for c in self.off_resonant))
        _validate_profile(self.profile)
        if self.gamma < 0:
            raise DomainError(f"gamma must be >= 0, got {self.gamma}")
        if self.omega_p < 0:
            raise DomainError(f"omega_p must be >= 0, got {self.omega_p}")

    def with_(self, **changes) -> "SchemeConfig":
        return replace(self, **changes)

    @property
    def omega0(self) -> float:
        p = self.profile
        return p.omega_p * (1.0 + p.eta) if isinstance(p, QuadraticLocal) else p.omega0

    def hamiltonian(self, x):
        if self.scheme.is_three_level:
            return hamiltonian_eit(self, x)
        return hamiltonian_two_level(self, x)

    def trap_width(self) -> float:
        """Width w of the sub-wavelength trap implied by the parameters."""
        p = self.profile
        if isinstance(p, QuadraticLocal):
            return p.w
        if self.scheme.is_three_level:
            if isinstance(p, CosineLattice):
                return np.sqrt(2.0 * self.omega_p / p.omega0) / p.k
            return p.sigma * self.omega_p / p.omega0
        if self.delta == 0 or self.omega_p == 0:
            raise DomainError("AC-scheme width needs nonzero delta and omega_p")
        sigma = 1.0 / p.k if isinstance(p, CosineLattice) else p.sigma
        return sigma / enhancement(p.omega0, self.delta, self.omega_p)

    def e_w(self) -> float:
        return e_w(self.species, self.trap_width())


def enhancement(omega0: float, delta: float, omega_p: float) -> float:
    return float(np.sqrt(omega0**2 / (abs(delta) * omega_p)))


def _require(config: SchemeConfig, allowed: Sequence[Scheme], what: str) -> None:
    if config.scheme not in allowed:
        names = ", ".join(s.value for s in allowed)
        raise UsageError(f"{what} needs scheme in {{{names}}}, got {config.scheme.value}")


def hamiltonian_eit(config: SchemeConfig, x):
    """3x3 EIT Hamiltonian in the basis (r, g, e); shape (3, 3) or (n, 3, 3)."""
    _require(config, (Scheme.EIT, Scheme.MODIFIED_EIT), "hamiltonian_eit")
    oc = np.asarray(control_field(config.profile, x), dtype=float)
    h = np.zeros(oc.shape + (3, 3))
    h[..., 0, 0] = config.delta_r
    h[..., 0, 2] = h[..., 2, 0] = oc
    h[..., 1, 2] = h[..., 2, 1] = config.omega_p
    h[..., 2, 2] = config.delta
    return h


def hamiltonian_two_level(config: SchemeConfig, x):
    """2x2 Hamiltonian with |e> eliminated, basis (r, g); shape (2, 2) or (n, 2, 2)."""
    _require(config, (Scheme.IMPROVED_AC, Scheme.RED_AC), "hamiltonian_two_level")
    if config.delta == 0:
        raise DomainError("hamiltonian_two_level: delta = 0, |e> cannot be eliminated")
    oc = np.asarray(control_field(config.profile, x), dtype=float)
    largest = max(float(np.max(np.abs(oc))), config.omega_p, abs(config.delta_small))
    if abs(config.delta) < 10.0 * largest:
        warnings.warn(
            f"|delta| = {abs(config.delta):.4g} rad/s is below 10x max(Omega_c, Omega_p, |delta_small|)"
            f" = {10 * largest:.4g} rad/s",
            PerturbativeValidityWarning,
            stacklevel=2,
        )
    h = np.zeros(oc.shape + (2, 2))
    h[..., 0, 0] = config.delta_small - oc**2 / config.delta
    h[..., 0, 1] = h[..., 1, 0] = config.omega_p
    return h


# -- constructors for matched single-bound-state traps ------------------------

def single_bound_state_config(
    scheme,
    s: float,
    omega0: float,
    sigma: float,
    species: AtomSpecies = YB171,
    gamma: float = 0.0,
    profile: Optional[str] = None,
    eta: float = 1.0,
    delta_r_ew: float = -2.0,
) -> SchemeConfig:
    """Parameters of a trap of width sigma/s tuned to hold one bound state.

    EIT: Omega_p = Omega0/s and delta_r = ``delta_r_ew`` * E_w.
    AC schemes: Omega_p = E_w and |delta| = Omega0^2/(s^2 Omega_p).
    Modified EIT: Omega_c = Omega_p(eta + (x/w)^2) with Omega_p = Omega0/(1+eta).

    `profile` picks the control shape: ``"gaussian"`` (default) or ``"local"``
    for the small-x expansion.
    """
    scheme = Scheme(scheme)
    if not s > 0:
        raise DomainError(f"enhancement s must be positive, got {s}")
    w = sigma / s
    ew = e_w(species, w)
    profile = profile or "gaussian"
    if profile not in ("gaussian", "local"):
        raise UsageError(f"profile must be 'gaussian' or 'local', got {profile!r}")
    local = profile == "local"
    if scheme is Scheme.EIT:
        prof = LinearLocal(omega0, sigma) if local else GaussianDip(omega0, sigma, odd=True)
        return SchemeConfig(scheme, prof, omega0 / s, species, delta_r=delta_r_ew * ew, gamma=gamma)
    if scheme is Scheme.MODIFIED_EIT:
        omega_p = omega0 / (1.0 + eta)
        return SchemeConfig(scheme, QuadraticLocal(omega_p, eta, w), omega_p, species,
                            delta_r=delta_r_ew * ew, gamma=gamma)
    omega_p = ew
    delta = omega0**2 / (s**2 * omega_p)
    if scheme is Scheme.IMPROVED_AC:
        prof = LinearLocal(omega0, sigma) if local else GaussianDip(omega0, sigma)
        return SchemeConfig(scheme, prof, omega_p, species, delta=-delta, gamma=gamma)
    if local:
        raise UsageError("red AC scheme has no local profile; its trap sits on the beam peak")
    return SchemeConfig(scheme, GaussianPeak(omega0, sigma), omega_p, species,
                        delta=delta, delta_small=omega0**2 / delta, gamma=gamma)


# -- level-scheme constraints -------------------------------------------------

@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    value: float
    bound: float
    passed: bool


@dataclass(frozen=True)
class ConstraintReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]


def validate_level_constraints(config: SchemeConfig, w: float) -> ConstraintReport:
    """Check off-resonant light shifts and the hyperfine bound against E_w.

    Each off-resonant coupling (Omega, Delta_off) passes iff
    Omega^2/|Delta_off| < 0.1*E_w.  With ``delta_hfs`` set, Omega0 must satisfy
    Omega0 < sqrt(delta_hfs*E_w).  Boundaries count as failures.
    """
    ew = e_w(config.species, w)
    checks = []
    for i, (omega, detuning) in enumerate(config.off_resonant):
        shift = omega**2 / abs(detuning) if detuning else np.inf
        checks.append(ConstraintCheck(f"light_shift[{i}]", shift, 0.1 * ew, bool(shift < 0.1 * ew)))
    if config.delta_hfs is not None:
        bound = float(np.sqrt(config.delta_hfs * ew))
        checks.append(ConstraintCheck("hyperfine", config.omega0, bound, bool(config.omega0 < bound)))
    return ConstraintReport(tuple(checks))


__all__ = [
    "Scheme", "SchemeConfig", "GaussianDip", "GaussianPeak", "CosineLattice", "LinearLocal",
    "QuadraticLocal", "ControlProfile", "control_field", "hamiltonian_eit", "hamiltonian_two_level",
    "single_bound_state_config", "validate_level_constraints", "ConstraintReport",
    "PerturbativeValidityWarning", "enhancement",
]
