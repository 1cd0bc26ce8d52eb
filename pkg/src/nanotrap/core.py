"""Physical constants, unit conventions and the elementary energy scales.

Internally every energy is an angular frequency in rad/s (hbar = 1), lengths
are in meters and masses in kilograms.  Anything shown to a user is a cyclic
frequency (Hz), i.e. the angular value divided by 2*pi.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import constants as csts

HBAR = csts.hbar
AMU = csts.physical_constants["atomic mass constant"][0]
TWO_PI = 2.0 * np.pi

#: default control wavelength for the Yb-171 design grid
CONTROL_WAVELENGTH = 1983.5e-9


class NanotrapError(Exception):
    """Base class for errors raised by this package."""


class DomainError(NanotrapError, ValueError):
    """A physical argument lies outside the domain of a formula."""


class UsageError(NanotrapError, ValueError):
    """Arguments are individually valid but used inconsistently."""


@dataclass(frozen=True)
class AtomSpecies:
    label: str
    mass: float  # kg

    def __post_init__(self):
        if not self.mass > 0:
            raise DomainError(f"mass of {self.label!r} must be positive, got {self.mass}")

    @classmethod
    def from_amu(cls, label: str, mass_amu: float) -> "AtomSpecies":
        return cls(label, mass_amu * AMU)

    @property
    def hbar_over_2m(self) -> float:
        """Kinetic prefactor hbar/(2m) in m^2 rad/s."""
        return HBAR / (2.0 * self.mass)


YB171 = AtomSpecies.from_amu("171Yb", 171.0)

SPECIES = {"yb171": YB171}


def get_species(name: str) -> AtomSpecies:
    try:
        return SPECIES[name.lower()]
    except KeyError:
        raise UsageError(f"unknown atom {name!r}; known: {sorted(SPECIES)}") from None


def hz_to_angular(f):
    return TWO_PI * np.asarray(f, dtype=float) if np.ndim(f) else TWO_PI * float(f)


def angular_to_hz(omega):
    return np.asarray(omega, dtype=float) / TWO_PI if np.ndim(omega) else float(omega) / TWO_PI


def _kinetic_scale(species: AtomSpecies, length, name: str):
    length = np.asarray(length, dtype=float)
    if np.any(~(length > 0)):
        raise DomainError(f"{name} must be positive, got {length}")
    with np.errstate(over="ignore"):
        out = species.hbar_over_2m / length**2
    return float(out) if out.ndim == 0 else out


def e_w(species: AtomSpecies, w) -> float:
    """Confinement energy hbar/(2 m w^2) of a trap of width `w`, in rad/s.

    ``w = inf`` gives 0.
    """
    return _kinetic_scale(species, w, "trap width w")


def e_sigma(species: AtomSpecies, sigma) -> float:
    """Recoil-like energy hbar/(2 m sigma^2) at the beam scale `sigma`, in rad/s."""
    return _kinetic_scale(species, sigma, "beam scale sigma")
