"""Finite-difference bound states of single- and multi-channel 1D Hamiltonians.

The kinetic term -(hbar/2m) d^2/dx^2 uses the three-point stencil with
Dirichlet walls at the first and last grid points (psi = 0 there), so the
unknowns are the n - 2 interior points.  Energies are angular frequencies.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.linalg import eig_banded, eigh_tridiagonal
from scipy.sparse.linalg import splu

from .adiabatic import AdiabaticDecomposition, SpatialGrid, diagonalize_grid
from .core import AtomSpecies, NanotrapError, UsageError
from .schemes import SchemeConfig


class NoBoundStateError(NanotrapError):
    """No eigenvalue lies below the threshold."""


class GridError(NanotrapError):
    """The ground-state energy is not converged on this grid."""


@dataclass(frozen=True)
class BoundStateResult:
    """Bound states on a grid.

    ``wavefunctions[k, i, c]`` is channel ``c`` of state ``k`` at ``x[i]``,
    normalised so that sum_c sum_i |psi|^2 h = 1.
    """
    grid: SpatialGrid
    energies: np.ndarray
    wavefunctions: np.ndarray
    threshold: float

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def n_channels(self) -> int:
        return self.wavefunctions.shape[2]

    def __len__(self) -> int:
        return self.energies.size

    def density(self, k: int = 0) -> np.ndarray:
        return np.sum(np.abs(self.wavefunctions[k]) ** 2, axis=1)

    @property
    def norms(self) -> np.ndarray:
        return np.array([np.sum(self.density(k)) * self.grid.h for k in range(len(self))])

    @property
    def widths(self) -> np.ndarray:
        """rms spatial width of every state, in meters."""
        x, h = self.x, self.grid.h
        out = []
        for k in range(len(self)):
            rho = self.density(k)
            mean = np.sum(x * rho) * h
            out.append(np.sqrt(max(np.sum((x - mean) ** 2 * rho) * h, 0.0)))
        return np.array(out)

    def channel(self, c: int, k: int = 0) -> np.ndarray:
        if not 0 <= c < self.n_channels:
            raise UsageError(f"state has {self.n_channels} channel(s), no channel {c}")
        return self.wavefunctions[k, :, c]


def _fix_sign(vecs: np.ndarray) -> np.ndarray:
    # largest-magnitude entry real and positive, per column
    idx = np.argmax(np.abs(vecs), axis=0)
    lead = vecs[idx, np.arange(vecs.shape[1])]
    return vecs * (np.conj(lead) / np.abs(lead))


def _tridiagonal_solve(v: np.ndarray, kinetic: float, k: int):
    m = v.size - 2
    k = min(k, m)
    diag = 2.0 * kinetic + v[1:-1]
    off = np.full(m - 1, -kinetic)
    return eigh_tridiagonal(diag, off, select="i", select_range=(0, k - 1))


def _package(grid, vals, vecs, channels, threshold, k_states) -> BoundStateResult:
    bound = np.nonzero(vals < threshold)[0][:k_states]
    if bound.size == 0:
        raise NoBoundStateError(
            f"no bound state: lowest energy {vals[0]:.6g} rad/s is not below threshold {threshold:.6g} rad/s"
        )
    vecs = _fix_sign(vecs[:, bound]) / np.sqrt(grid.h)
    psi = np.zeros((bound.size, grid.n, channels), dtype=vecs.dtype)
    psi[:, 1:-1, :] = vecs.T.reshape(bound.size, grid.n - 2, channels)
    return BoundStateResult(grid, vals[bound], psi, float(threshold))


def _check_convergence(e_fine: float, e_coarse: float, rtol: float) -> None:
    if abs(e_fine - e_coarse) >= rtol * abs(e_fine):
        raise GridError(
            f"ground-state energy not converged: {e_fine:.8g} vs {e_coarse:.8g} rad/s at doubled spacing; "
            "refine the grid"
        )


def solve_single_channel(
    potential: Union[Callable, np.ndarray],
    grid: SpatialGrid,
    species: AtomSpecies,
    k_states: int = 1,
    threshold: Optional[float] = None,
    check_convergence: bool = True,
    rtol: float = 1e-3,
) -> BoundStateResult:
    """Lowest `k_states` bound states of -(hbar/2m) d^2/dx^2 + V(x).

    `potential` maps positions (m) to rad/s, or is an array of values on the
    grid (then the convergence check is skipped).  The default threshold is
    the lower of the two box-edge potential values.
    """
    x = grid.x
    if not callable(potential):
        v = np.asarray(potential, dtype=float)
        if v.shape != x.shape:
            raise UsageError(f"potential array has shape {v.shape}, grid has {x.shape}")
        check_convergence = False
    else:
        v = np.broadcast_to(np.asarray(potential(x), dtype=float), x.shape)
    if threshold is None:
        threshold = min(v[0], v[-1])
    kinetic = species.hbar_over_2m / grid.h**2
    vals, vecs = _tridiagonal_solve(v, kinetic, k_states)
    result = _package(grid, vals, vecs, 1, threshold, k_states)
    if check_convergence:
        coarse = grid.coarsened()
        vc = np.broadcast_to(np.asarray(potential(coarse.x), dtype=float), coarse.x.shape)
        e_coarse = _tridiagonal_solve(vc, species.hbar_over_2m / coarse.h**2, 1)[0][0]
        _check_convergence(result.energies[0], e_coarse, rtol)
    return result


def _banded(h_al: np.ndarray, kinetic: float) -> np.ndarray:
    """Lower banded storage of H_al + kinetic term, channels interleaved per point."""
    n, c, _ = h_al.shape
    size = n * c
    band = np.zeros((c + 1, size), dtype=h_al.dtype)
    for a in range(c):
        for b in range(a, c):
            # element (i*c + b, i*c + a) sits on sub-diagonal b - a
            band[b - a, a::c] = h_al[:, b, a]
    band[0] += 2.0 * kinetic
    band[c, : size - c] = -kinetic
    return band


def _sparse_from_band(band: np.ndarray):
    c = band.shape[0] - 1
    size = band.shape[1]
    diags = [band[0]] + [band[d, : size - d] for d in range(1, c + 1)]
    lower = sparse.diags(diags, [-d for d in range(c + 1)], shape=(size, size), format="csc")
    return lower + sparse.triu(lower.conj().T, k=1, format="csc")


def _multichannel_eigs(h_al, kinetic, k, window):
    """Eigenvalues from the banded solver, eigenvectors by inverse iteration.

    Banded eigenvectors cost O(N^3) in LAPACK; a sparse LU per eigenvalue is
    linear in N.
    """
    band = _banded(h_al, kinetic)
    size = band.shape[1]
    if window is None:
        k = min(k, size)
        vals = eig_banded(band, lower=True, eigvals_only=True, select="i", select_range=(0, k - 1))
    else:
        vals = eig_banded(band, lower=True, eigvals_only=True, select="v", select_range=window)
    vecs = np.zeros((size, vals.size), dtype=band.dtype)
    if vals.size == 0:
        return vals, vecs
    op = _sparse_from_band(band)
    eye = sparse.identity(size, dtype=band.dtype, format="csc")
    # roundoff floor of the eigenvalues, eps * ||H|| with ||H|| ~ 4 * kinetic
    floor = 1e-13 * (4.0 * kinetic + np.max(np.abs(vals)))
    # neighbours beyond the computed set are at least as far as the last gap
    ext = np.concatenate(([-np.inf], vals, [np.inf]))
    rng = np.random.default_rng(0)
    for i, lam in enumerate(vals):
        gap = min(lam - ext[i], ext[i + 2] - lam)
        if not np.isfinite(gap):
            gap = max(abs(lam), kinetic * 1e-6)
        shift = lam - max(1e-4 * gap, floor)
        lu = splu((op - shift * eye).tocsc())
        v = rng.standard_normal(size).astype(band.dtype)
        for _ in range(6):
            v = lu.solve(v)
            v /= np.linalg.norm(v)
        # deflate earlier vectors so close pairs stay orthogonal
        v -= vecs[:, :i] @ (vecs[:, :i].conj().T @ v)
        vecs[:, i] = v / np.linalg.norm(v)
    return vals, vecs


def _sample_hamiltonian(h_sampler, x):
    if isinstance(h_sampler, SchemeConfig):
        h_sampler = h_sampler.hamiltonian
    h = np.asarray(h_sampler(x))
    if h.ndim != 3 or h.shape[0] != x.size:
        raise UsageError(f"h_sampler must return (n, d, d) matrices, got shape {h.shape}")
    return h


def solve_multichannel(
    h_sampler,
    grid: SpatialGrid,
    species: AtomSpecies,
    k_states: int = 1,
    threshold: Optional[float] = None,
    window: Optional[Tuple[float, float]] = None,
    check_convergence: bool = True,
    rtol: float = 1e-3,
) -> BoundStateResult:
    """Bound states of H_al(x) + p^2/2m in the bare basis.

    No gauge potentials are involved: the kinetic term is diagonal in the bare
    states, so the treatment is exact up to discretisation.  The default
    threshold is the lowest adiabatic energy at the box edges.  With `window`
    only eigenvalues inside ``(lo, hi]`` are computed; use it to reach states
    of an excited branch that sit above a lower continuum.
    """
    x = grid.x
    h_all = _sample_hamiltonian(h_sampler, x)
    if threshold is None:
        edge = np.linalg.eigvalsh(h_all[[0, -1]])
        threshold = float(np.min(edge[:, 0]))
    kinetic = species.hbar_over_2m / grid.h**2
    vals, vecs = _multichannel_eigs(h_all[1:-1], kinetic, k_states, window)
    if vals.size == 0:
        raise NoBoundStateError(f"no eigenvalue in window {window}")
    c = h_all.shape[1]
    result = _package(grid, vals, vecs, c, threshold, k_states if window is None else vals.size)
    if check_convergence and window is None:
        coarse = grid.coarsened()
        hc = _sample_hamiltonian(h_sampler, coarse.x)
        band = _banded(hc[1:-1], species.hbar_over_2m / coarse.h**2)
        e_coarse = eig_banded(band, lower=True, eigvals_only=True, select="i", select_range=(0, 0))[0]
        _check_convergence(result.energies[0], e_coarse, rtol)
    return result


def solve_branch(
    config: SchemeConfig,
    grid: SpatialGrid,
    branch: Optional[int] = None,
    min_population: float = 0.5,
) -> BoundStateResult:
    """Full multichannel states bound on one adiabatic branch.

    The energy window runs from the branch minimum to the branch value at the
    box edge; states of other branches that fall inside it (box states of a
    lower continuum) are dropped unless `branch` holds at least
    `min_population` of their weight.  `branch` defaults to the scheme's
    trapping branch.
    """
    branch = config.scheme.trapping_branch if branch is None else branch
    decomp = diagonalize_grid(config, grid)
    e_b = decomp.energies[:, branch]
    threshold = float(min(e_b[0], e_b[-1]))
    lo = float(np.min(e_b))
    lo -= 1e-3 * max(threshold - lo, abs(lo), 1e-300)
    full = solve_multichannel(config, grid, config.species, threshold=threshold, window=(lo, threshold))
    keep = [k for k in range(len(full)) if branch_populations(full, decomp, k)[branch] >= min_population]
    if not keep:
        raise NoBoundStateError(f"no state on branch {branch} below {threshold:.6g} rad/s")
    return BoundStateResult(grid, full.energies[keep], full.wavefunctions[keep], threshold)


def count_bound_states(result: BoundStateResult, threshold: Optional[float] = None) -> int:
    """Number of energies strictly below `threshold` (default: the result's own)."""
    threshold = result.threshold if threshold is None else threshold
    return int(np.count_nonzero(result.energies < threshold))


def density_overlap(a: BoundStateResult, b: BoundStateResult, i: int = 0, j: int = 0) -> float:
    """Bhattacharyya overlap sum(sqrt(rho_a rho_b)) h of channel-summed densities."""
    if a.grid != b.grid:
        raise UsageError("density_overlap needs both states on the same grid")
    return float(np.sum(np.sqrt(a.density(i) * b.density(j))) * a.grid.h)


def branch_populations(result: BoundStateResult, decomp: AdiabaticDecomposition, k: int = 0) -> np.ndarray:
    """Weight of state `k` on each adiabatic branch, sum_x |<branch(x)|psi(x)>|^2 h."""
    if result.grid != decomp.grid:
        raise UsageError("branch_populations needs the decomposition on the state's grid")
    amp = np.einsum("icb,ic->ib", np.conj(decomp.frames), result.wavefunctions[k])
    return np.sum(np.abs(amp) ** 2, axis=0) * result.grid.h


def branch_amplitudes(result: BoundStateResult, decomp: AdiabaticDecomposition, k: int = 0) -> np.ndarray:
    """<branch(x)|psi(x)> for every branch, shape (n, dim)."""
    if result.grid != decomp.grid:
        raise UsageError("branch_amplitudes needs the decomposition on the state's grid")
    return np.einsum("icb,ic->ib", np.conj(decomp.frames), result.wavefunctions[k])


def write_csv(path, result: BoundStateResult, k: int = 0) -> None:
    """One row per grid point: x, Re/Im psi per channel, density."""
    header = ["x"]
    for c in range(result.n_channels):
        header += [f"Re_psi_{c}", f"Im_psi_{c}"]
    header.append("rho")
    psi = result.wavefunctions[k].astype(complex)
    rho = result.density(k)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(header)
        for i, xi in enumerate(result.x):
            row = [xi]
            for c in range(result.n_channels):
                row += [psi[i, c].real, psi[i, c].imag]
            row.append(rho[i])
            out.writerow([repr(float(v)) for v in row])
