"""Trap widths reachable for a target lifetime, and the tabulated design grids.

The lifetime law is T * Gamma * s^p * (E_sigma/Omega0)^2 = 1 with p = 6 for the
EIT and improved AC schemes and p = 8 for the red AC scheme.  Solving for s
gives every other column: w = sigma/s and E_w = s^2 E_sigma.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from .core import CONTROL_WAVELENGTH, TWO_PI, YB171, AtomSpecies, DomainError, angular_to_hz, e_sigma, e_w
from .losses import pe_scaling
from .schemes import ConstraintReport, Scheme, single_bound_state_config, validate_level_constraints


class NoEnhancementError(DomainError):
    """The lifetime target cannot be met with a trap narrower than sigma."""


def scaling_power(scheme) -> int:
    return 8 if Scheme(scheme) is Scheme.RED_AC else 6


@dataclass(frozen=True)
class TrapDesign:
    scheme: Scheme
    omega0: float
    gamma: float
    sigma: float
    T: float
    w: float
    s: float
    e_w: float
    perturbative: bool
    detuning_valid: Optional[bool]
    constraints: ConstraintReport

    @property
    def flags(self) -> List[str]:
        """Names of failed validity checks (empty when all pass)."""
        out = []
        if not self.perturbative:
            out.append("perturbativity")
        if self.detuning_valid is False:
            out.append("detuning")
        out += [c.name for c in self.constraints.failures()]
        return out


def solve_width_for_lifetime(
    scheme,
    species: AtomSpecies,
    omega0: float,
    sigma: float,
    T: float,
    gamma: float,
    off_resonant: Sequence[Tuple[float, float]] = (),
    delta_hfs: Optional[float] = None,
) -> TrapDesign:
    """Largest enhancement s whose scaling lifetime equals `T`.

    The perturbativity flag requires s^3 < Omega0/E_sigma; the detuning flag
    (AC schemes only) requires |Delta| > Omega0 for the matched trap with
    Omega_p = E_w.
    """
    scheme = Scheme(scheme)
    for name, val in (("omega0", omega0), ("sigma", sigma), ("T", T), ("gamma", gamma)):
        if not (val > 0 and math.isfinite(val)):
            raise DomainError(f"solve_width_for_lifetime: {name} must be positive and finite, got {val}")
    es = e_sigma(species, sigma)
    p = scaling_power(scheme)
    s = ((omega0 / es) ** 2 / (T * gamma)) ** (1.0 / p)
    if s <= 1.0:
        raise NoEnhancementError(f"s = {s:.6g} <= 1: lifetime {T} s is out of reach at this Omega0 and sigma")
    w = sigma / s
    perturbative = s**3 < omega0 / es
    if scheme.is_three_level:
        detuning_valid = None
    else:
        detuning_valid = omega0**2 / (s**2 * e_w(species, w)) > omega0
    config = single_bound_state_config(scheme, s, omega0, sigma, species)
    if off_resonant or delta_hfs is not None:
        constraints = validate_level_constraints(config.with_(off_resonant=tuple(off_resonant), delta_hfs=delta_hfs), w)
    else:
        constraints = ConstraintReport(())
    return TrapDesign(scheme, omega0, gamma, sigma, T, w, s, s**2 * es, perturbative, detuning_valid, constraints)


def calibrate_gamma(scheme, species: AtomSpecies, omega0: float, sigma: float, T: float, s: float) -> float:
    """Linewidth for which the design law maps (omega0, sigma, T) to `s`."""
    if not s > 0:
        raise DomainError(f"calibrate_gamma: s must be positive, got {s}")
    return 1.0 / (T * pe_scaling(scheme, s, e_sigma(species, sigma), omega0))


def cosine_double_trap_scaling(s: float, e_sigma: float, omega0: float) -> float:
    """Excited fraction s^6 (E_sigma/Omega0)^2 of the two-level cosine double trap.

    It equals the improved AC value, so this geometry matches the s^6 schemes
    without beating them.
    """
    return pe_scaling(Scheme.IMPROVED_AC, s, e_sigma, omega0)


# -- tables ---------------------------------------------------------------------

Row = Tuple[float, float, float]  # (omega0 rad/s, sigma m, T s)


@dataclass(frozen=True)
class TableRow:
    omega0: float
    sigma: float
    T: float
    design: Optional[TrapDesign] = None
    error: Optional[str] = None


def generate_table(scheme, species: AtomSpecies, rows: Iterable[Row], gamma: float, workers: int = 1) -> List[TableRow]:
    """Solve every row; a failing row carries its error message instead of a design."""

    def one(row):
        omega0, sigma, T = row
        try:
            return TableRow(omega0, sigma, T, solve_width_for_lifetime(scheme, species, omega0, sigma, T, gamma))
        except DomainError as exc:
            return TableRow(omega0, sigma, T, error=str(exc))

    rows = list(rows)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, rows))
    return [one(r) for r in rows]


TABLE_COLUMNS = ("omega0_hz", "sigma_m", "T_s", "w_m", "s", "Ew_hz", "flags")


def table_records(table: Sequence[TableRow]) -> List[list]:
    out = []
    for r in table:
        head = [angular_to_hz(r.omega0), r.sigma, r.T]
        if r.design is None:
            out.append(head + ["", "", "", f"error: {r.error}"])
        else:
            d = r.design
            out.append(head + [d.w, d.s, angular_to_hz(d.e_w), ";".join(d.flags) or "ok"])
    return out


def table_csv(table: Sequence[TableRow]) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(TABLE_COLUMNS)
    for rec in table_records(table):
        out.writerow([repr(float(v)) if isinstance(v, float) else v for v in rec])
    return buf.getvalue()


# -- tabulated grid for 171Yb at a 1983.5 nm control wavelength ------------------

APPENDIX_OMEGA0_MHZ = (1, 100, 200, 600, 1000, 5000, 16000)
APPENDIX_SIGMAS = (CONTROL_WAVELENGTH / TWO_PI, 3e-6)
APPENDIX_TIMES = (0.1, 0.01)
#: anchor row (1 MHz, lambda/2pi, 100 ms) and its tabulated s
APPENDIX_ANCHOR = (TWO_PI * 1e6, CONTROL_WAVELENGTH / TWO_PI, 0.1)
APPENDIX_ANCHOR_S = 1.91555


def appendix_rows(times: Sequence[float] = APPENDIX_TIMES) -> List[Row]:
    """Design grid ordered by T, then sigma, then Omega0."""
    return [
        (TWO_PI * 1e6 * f, sigma, T)
        for T in times
        for sigma in APPENDIX_SIGMAS
        for f in APPENDIX_OMEGA0_MHZ
    ]


def appendix_gamma(scheme=Scheme.EIT, species: AtomSpecies = YB171, anchor_s: float = APPENDIX_ANCHOR_S) -> float:
    omega0, sigma, T = APPENDIX_ANCHOR
    return calibrate_gamma(scheme, species, omega0, sigma, T, anchor_s)


def appendix_table(scheme=Scheme.EIT, species: AtomSpecies = YB171, workers: int = 1) -> List[TableRow]:
    """Both lifetime grids with Gamma calibrated on the anchor row."""
    return generate_table(scheme, species, appendix_rows(), appendix_gamma(scheme, species), workers)


__all__ = [
    "TrapDesign", "NoEnhancementError", "solve_width_for_lifetime", "calibrate_gamma",
    "cosine_double_trap_scaling", "generate_table", "TableRow", "table_csv", "table_records",
    "TABLE_COLUMNS", "appendix_rows", "appendix_gamma", "appendix_table", "scaling_power",
]
