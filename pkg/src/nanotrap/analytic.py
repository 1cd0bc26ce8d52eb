"""Closed-form trap potentials and geometric couplings.

All functions are vectorised over ``x`` and return angular frequencies.  They
serve both as production formulas and as oracles for the numerical modules.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import AtomSpecies, DomainError, UsageError, e_w
from .schemes import Scheme


class NoEnhancementWarning(UserWarning):
    """s <= 1: the trap is not narrower than the beam."""


@dataclass(frozen=True)
class TrapShapeParams:
    w: float
    e_w: float
    omega_p: float
    delta_r: float = 0.0
    eta: float = 0.0

    def __post_init__(self):
        if not self.w > 0:
            raise DomainError(f"trap width must be positive, got {self.w}")
        if self.eta < 0:
            raise DomainError(f"eta must be >= 0, got {self.eta}")

    @classmethod
    def from_config(cls, config) -> "TrapShapeParams":
        w = config.trap_width()
        eta = getattr(config.profile, "eta", 0.0)
        return cls(w, e_w(config.species, w), config.omega_p, config.delta_r, eta)


def _scalar(v):
    return float(v) if np.ndim(v) == 0 else v


def _xt(x, w):
    if not w > 0:
        raise DomainError(f"trap width must be positive, got {w}")
    return np.asarray(x, dtype=float) / w


def v_tot_eit(delta_r: float, w: float, species: AtomSpecies, x):
    """Dark-state potential for a linear control node:
    delta_r/(1+xt^2) + E_w/(1+xt^2)^2 with xt = x/w."""
    q = 1.0 + _xt(x, w) ** 2
    return _scalar(delta_r / q + e_w(species, w) / q**2)


def e0_improved_ac(omega_p: float, w: float, x):
    """Light shift of the trapped dressed state, Omega_p*(xt^2/2 - sqrt(1 + xt^4/4))."""
    xt2 = _xt(x, w) ** 2
    # rewritten as -Omega_p/(xt^2/2 + sqrt(1 + xt^4/4)) to avoid cancellation in the tail
    return _scalar(-omega_p / (0.5 * xt2 + np.sqrt(1.0 + 0.25 * xt2**2)))


def alpha_beta(species: AtomSpecies, w: float, x, scheme=Scheme.IMPROVED_AC):
    """Diagonal (alpha) and off-diagonal (beta) geometric couplings of the AC schemes.

    alpha = E_w 4 xt^2/(4 + xt^4)^2,  beta = E_w (6 xt^4 - 8)/(4 + xt^4)^2.
    """
    scheme = Scheme(scheme)
    if scheme not in (Scheme.IMPROVED_AC, Scheme.RED_AC):
        raise UsageError(f"alpha_beta is defined for the AC schemes, got {scheme.value}")
    xt = _xt(x, w)
    ew = e_w(species, w)
    den = (4.0 + xt**4) ** 2
    return _scalar(ew * 4.0 * xt**2 / den), _scalar(ew * (6.0 * xt**4 - 8.0) / den)


def nonadiabatic_matrix(species: AtomSpecies, w: float, x, scheme=Scheme.IMPROVED_AC):
    """U = [[alpha, -beta], [beta, alpha]] (improved AC) or its off-diagonal sign flip (red AC).

    Ordering is (|0>, |+>); shape (2, 2) or (n, 2, 2).
    """
    scheme = Scheme(scheme)
    a, b = alpha_beta(species, w, x, scheme)
    a, b = np.asarray(a), np.asarray(b)
    sign = -1.0 if scheme is Scheme.IMPROVED_AC else 1.0
    u = np.empty(a.shape + (2, 2))
    u[..., 0, 0] = u[..., 1, 1] = a
    u[..., 0, 1] = sign * b
    u[..., 1, 0] = -sign * b
    return u


def enhancement_s(omega0: float, delta: float, omega_p: float) -> float:
    """Enhancement factor s = sqrt(Omega0^2/(|Delta| Omega_p)) of the AC schemes."""
    if delta == 0:
        raise DomainError("enhancement_s: delta must be nonzero")
    if not omega_p > 0:
        raise DomainError(f"enhancement_s: omega_p must be positive, got {omega_p}")
    s = float(np.sqrt(omega0**2 / (abs(delta) * omega_p)))
    if s <= 1.0:
        warnings.warn(f"s = {s:.4g} <= 1, no sub-wavelength enhancement", NoEnhancementWarning, stacklevel=2)
    return s


def v_tot_modified_eit(delta_r: float, eta: float, w: float, species: AtomSpecies, x):
    """Dark-state potential for a lifted quadratic control minimum Omega_p(eta + xt^2).

    delta_r/(q^2 + 1) + 4 E_w xt^2/(q^2 + 1)^2 with q = eta + xt^2.
    """
    if eta < 0:
        raise DomainError(f"eta must be >= 0, got {eta}")
    xt = _xt(x, w)
    d = (eta + xt**2) ** 2 + 1.0
    return _scalar(delta_r / d + 4.0 * e_w(species, w) * xt**2 / d**2)


def modified_eit_delta_r(depth: float, eta: float, w: float, species: AtomSpecies, span: float = 10.0) -> float:
    """delta_r that gives the modified-EIT potential the minimum value ``-depth``."""
    if not depth > 0:
        raise DomainError(f"depth must be positive, got {depth}")
    xs = np.linspace(-span * w, span * w, 20001)
    ew = e_w(species, w)

    def excess(dr):
        return float(np.min(v_tot_modified_eit(dr, eta, w, species, xs))) + depth

    hi = 0.0
    lo = -depth
    while excess(lo) > 0:
        lo *= 2.0
        if lo < -1e6 * max(depth, ew):
            raise DomainError("no delta_r reaches the requested depth")
    return float(brentq(excess, lo, hi, xtol=1e-14 * depth, rtol=1e-13))
