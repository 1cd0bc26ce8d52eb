"""Born-Oppenheimer decomposition of H_al on a grid and geometric potentials.

The frames R(x) are gauge fixed so that they vary smoothly with x: branches
are followed by maximal overlap rather than energy ordering, and each column's
phase is chosen to make its overlap with the previous point real and positive.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import AtomSpecies, DomainError, NanotrapError
from .schemes import SchemeConfig, UsageError, control_field


class DegeneracyError(NanotrapError):
    """Two adiabatic energies coincide; the frame is not differentiable there."""


class GridTooCoarseError(NanotrapError):
    """Finite differences of the frames have not converged on this grid."""

    def __init__(self, message: str, suggested_n: int):
        super().__init__(message)
        self.suggested_n = suggested_n


@dataclass(frozen=True)
class SpatialGrid:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)) or not self.x_max > self.x_min:
            raise DomainError(f"grid needs x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if int(self.n) != self.n or self.n < 16:
            raise DomainError(f"grid needs an integer n >= 16, got {self.n}")

    @classmethod
    def symmetric(cls, half_width: float, n: int = 4096) -> "SpatialGrid":
        return cls(-half_width, half_width, n)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    def coarsened(self) -> "SpatialGrid":
        """Same span with the spacing doubled (needs odd n to share points)."""
        return SpatialGrid(self.x_min, self.x_max, (self.n + 1) // 2)


@dataclass(frozen=True)
class AdiabaticDecomposition:
    """Eigen-decomposition of H_al at every grid point.

    ``energies[i, b]`` is the energy of branch ``b`` at ``x[i]`` and
    ``frames[i, :, b]`` its eigenvector.  Branches are ordered by energy at
    ``x_min`` and then continued by overlap, so across a sharp avoided crossing
    the branch order can differ from the ascending order (see `ascending`).
    """
    grid: SpatialGrid
    energies: np.ndarray
    frames: np.ndarray
    norms: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def dim(self) -> int:
        return self.frames.shape[-1]

    @property
    def ascending(self) -> np.ndarray:
        return np.sort(self.energies, axis=1)

    def populations(self, branch: int) -> np.ndarray:
        """|<basis|branch>|^2, shape (n, dim)."""
        return np.abs(self.frames[:, :, branch]) ** 2


@dataclass(frozen=True)
class GeometricPotentials:
    """U = R^dag d2R/dx2 (1/m^2) and A = i R^dag dR/dx (1/m) at every grid point."""
    grid: SpatialGrid
    U: np.ndarray
    A: np.ndarray

    def scalar_energy(self, species: AtomSpecies) -> np.ndarray:
        """Geometric scalar potential in rad/s, -(hbar/2m) U.

        Its diagonal is (hbar/2m)|dR/dx|^2 >= 0, the familiar repulsive term.
        """
        return -species.hbar_over_2m * self.U

    def coupling_energy(self, species: AtomSpecies, psi: np.ndarray, dpsi: np.ndarray, source: int):
        """Non-adiabatic amplitude fed from branch `source` into every branch.

        Applies the off-diagonal part of R^dag (p^2/2m) R (hbar = 1) to a wave
        function ``psi`` living in branch `source`:
        -(hbar/2m) [U psi + 2 R^dag R' psi'], returned with shape (n, dim).
        """
        k = species.hbar_over_2m
        rdr = -1j * self.A[:, :, source]  # R^dag R'
        return -k * (self.U[:, :, source] * psi[:, None] + 2.0 * rdr * dpsi[:, None])


def _sample(h_sampler: Callable, x: np.ndarray) -> np.ndarray:
    try:
        h = np.asarray(h_sampler(x))
    except (ValueError, TypeError):
        h = None  # scalar-only sampler
    if h is None or h.ndim == 2:
        h = np.stack([np.asarray(h_sampler(xi)) for xi in x])
    if h.ndim != 3 or h.shape[0] != x.size or h.shape[1] != h.shape[2]:
        raise UsageError(f"h_sampler must return (n, d, d) matrices, got shape {h.shape}")
    if h.shape[1] not in (2, 3):
        raise UsageError(f"h_sampler dimension must be 2 or 3, got {h.shape[1]}")
    if not np.array_equal(h, np.conj(np.swapaxes(h, 1, 2))):
        raise UsageError("h_sampler returned a non-Hermitian matrix")
    return h


def diagonalize_grid(h_sampler, grid: SpatialGrid, degeneracy_tol: float = 1e-12) -> AdiabaticDecomposition:
    """Diagonalize ``h_sampler(x)`` on `grid` with a smooth gauge.

    `h_sampler` maps an array of positions to an ``(n, d, d)`` array of
    Hermitian matrices (a `SchemeConfig` works, via its ``hamiltonian``).
    """
    if isinstance(h_sampler, SchemeConfig):
        h_sampler = h_sampler.hamiltonian
    x = grid.x
    h = _sample(h_sampler, x)
    vals, vecs = np.linalg.eigh(h)
    scale = np.max(np.abs(vals), axis=1)
    gaps = np.min(np.diff(vals, axis=1), axis=1)
    bad = np.nonzero(gaps <= degeneracy_tol * scale)[0]
    if bad.size:
        i = bad[0]
        raise DegeneracyError(
            f"degenerate adiabatic energies at x = {x[i]:.6g} m (gap {gaps[i]:.3g} rad/s); "
            "perturb the parameters or move the grid"
        )

    frames = np.empty_like(vecs)
    energies = np.empty_like(vals)
    first = vecs[0]
    lead = first[np.argmax(np.abs(first), axis=0), np.arange(first.shape[1])]
    frames[0] = first * (np.conj(lead) / np.abs(lead))
    energies[0] = vals[0]
    for i in range(1, x.size):
        ov = frames[i - 1].conj().T @ vecs[i]  # ov[a, b] = <prev_a|new_b>
        _, perm = linear_sum_assignment(-np.abs(ov))
        cols = vecs[i][:, perm]
        phase = np.diagonal(ov[:, perm])
        frames[i] = cols * (np.conj(phase) / np.abs(phase))
        energies[i] = vals[i][perm]
    if np.isrealobj(h):
        frames = frames.real
    return AdiabaticDecomposition(grid, energies, frames, scale)


def first_derivative(f: np.ndarray, h: float) -> np.ndarray:
    """Second-order central differences, one-sided second order at the ends (axis 0)."""
    return np.gradient(f, h, axis=0, edge_order=2)


def second_derivative(f: np.ndarray, h: float) -> np.ndarray:
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h**2
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h**2
    out[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / h**2
    return out


def _potentials(frames: np.ndarray, h: float):
    rh = np.conj(np.swapaxes(frames, 1, 2))
    u = rh @ second_derivative(frames, h)
    a = 1j * (rh @ first_derivative(frames, h))
    return u, a


def geometric_potentials(decomp: AdiabaticDecomposition, rtol: float = 1e-3, check: bool = True) -> GeometricPotentials:
    """Numerical U = R^dag d2R and A = i R^dag dR of a decomposition.

    With `check`, U is recomputed on every other grid point; the Richardson
    error estimate ``|U_2h - U_h|/3`` at interior points must stay below
    ``rtol * max|U_h|``, otherwise `GridTooCoarseError` suggests a larger n.
    """
    h = decomp.grid.h
    u, a = _potentials(decomp.frames, h)
    # finite differences break the anti-Hermiticity of R^dag R' at O(h^2)
    a = 0.5 * (a + np.conj(np.swapaxes(a, 1, 2)))
    if check and decomp.grid.n >= 33:
        u2, _ = _potentials(decomp.frames[::2], 2.0 * h)
        m = u2.shape[0]
        inner = slice(2, m - 2)
        diff = np.abs(u2[inner] - u[::2][inner]) / 3.0
        scale = np.max(np.abs(u))
        worst = float(np.max(diff)) if diff.size else 0.0
        if scale > 0 and worst > rtol * scale:
            factor = math.sqrt(worst / (rtol * scale))
            suggested = int(math.ceil(decomp.grid.n * factor * 1.5))
            raise GridTooCoarseError(
                f"geometric potentials not converged: error estimate {worst / scale:.2e} of max|U| "
                f"> rtol {rtol:.1e}; try n >= {suggested}",
                suggested,
            )
    return GeometricPotentials(decomp.grid, u, a)


def dark_state(config: SchemeConfig, x):
    """Normalised (Omega_c|g> - Omega_p|r>) in the basis (r, g, e)."""
    if not config.scheme.is_three_level:
        raise UsageError(f"dark_state needs an EIT scheme, got {config.scheme.value}")
    oc = np.asarray(control_field(config.profile, x), dtype=float)
    op = np.full_like(oc, config.omega_p)
    norm = np.hypot(oc, op)
    if np.any(norm == 0):
        raise DomainError("dark state undefined where Omega_c = Omega_p = 0")
    d = np.zeros(oc.shape + (3,))
    d[..., 0] = -op / norm
    d[..., 1] = oc / norm
    return d


def write_csv(path, decomp: AdiabaticDecomposition, geo: GeometricPotentials | None = None) -> None:
    """Export energies (and U, A entries when given) one row per grid point."""
    d = decomp.dim
    header = ["x"] + [f"E_{b}" for b in range(d)]
    if geo is not None:
        for name in ("U", "A"):
            for i in range(d):
                for j in range(d):
                    header += [f"Re_{name}_{i}{j}", f"Im_{name}_{i}{j}"]
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(header)
        for i, xi in enumerate(decomp.x):
            row = [xi, *decomp.energies[i]]
            if geo is not None:
                for mat in (geo.U[i], geo.A[i]):
                    for v in np.asarray(mat, dtype=complex).ravel():
                        row += [v.real, v.imag]
            out.writerow([repr(float(v)) for v in row])


__all__ = [
    "SpatialGrid", "AdiabaticDecomposition", "GeometricPotentials", "DegeneracyError",
    "GridTooCoarseError", "diagonalize_grid", "geometric_potentials", "dark_state", "write_csv",
    "first_derivative", "second_derivative",
]
