import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import eig

from conftest import OMEGA0, SIGMA
from nanotrap import analytic, losses
from nanotrap.adiabatic import SpatialGrid, diagonalize_grid
from nanotrap.core import YB171, UsageError, e_w
from nanotrap.schemes import Scheme, single_bound_state_config
from nanotrap.solver import (
    GridError,
    NoBoundStateError,
    branch_populations,
    count_bound_states,
    density_overlap,
    solve_branch,
    solve_multichannel,
    solve_single_channel,
    write_csv,
)

K = YB171.hbar_over_2m
W = 150e-9
EW = e_w(YB171, W)


def _harmonic(omega):
    length = math.sqrt(2 * K / omega)
    return (lambda x: omega**2 * x**2 / (4 * K)), length


def test_harmonic_ladder():
    omega = 2 * np.pi * 1e3
    v, length = _harmonic(omega)
    res = solve_single_channel(v, SpatialGrid.symmetric(10 * length, 4096), YB171, 4, threshold=np.inf)
    assert np.allclose(res.energies / omega, [0.5, 1.5, 2.5, 3.5], rtol=1e-3)
    assert np.allclose(res.norms, 1.0, atol=1e-12)


def test_box_ladder():
    depth = 1e4 * EW
    res = solve_single_channel(lambda x: np.where(np.abs(x) < W, 0.0, depth),
                               SpatialGrid.symmetric(1.0001 * W, 4096), YB171, 4, threshold=np.inf,
                               check_convergence=False)
    ratios = res.energies / res.energies[0]
    assert np.allclose(ratios, [1, 4, 9, 16], rtol=1e-2)


def test_decoupled_channels_union():
    omega = 2 * np.pi * 1e3
    v, length = _harmonic(omega)
    grid = SpatialGrid.symmetric(10 * length, 1024)
    offset = 0.7 * omega

    def h(x):
        out = np.zeros((np.size(x), 2, 2))
        out[:, 0, 0] = v(x)
        out[:, 1, 1] = v(x) + offset
        return out

    full = solve_multichannel(h, grid, YB171, 4, threshold=np.inf)
    a = solve_single_channel(v, grid, YB171, 4, threshold=np.inf).energies
    union = np.sort(np.concatenate([a, a + offset]))[:4]
    assert np.allclose(full.energies, union, rtol=1e-9)


def test_improved_ac_effective_matches_full():
    cfg = single_bound_state_config(Scheme.IMPROVED_AC, 20, OMEGA0, SIGMA)
    grid = SpatialGrid.symmetric(10 * cfg.trap_width(), 4096)
    eff = solve_single_channel(lambda x: analytic.e0_improved_ac(cfg.omega_p, cfg.trap_width(), x), grid, YB171, 3)
    full = solve_multichannel(cfg, grid, YB171, 3)
    assert count_bound_states(eff) == 1 and count_bound_states(full) == 1
    assert density_overlap(eff, full) >= 0.99


def test_eit_full_solve_dark_window():
    cfg = single_bound_state_config(Scheme.EIT, 20, OMEGA0, SIGMA, profile="local")
    grid = SpatialGrid.symmetric(10 * cfg.trap_width(), 4096)
    full = solve_branch(cfg, grid)
    dec = diagonalize_grid(cfg, grid)
    for k in range(len(full)):
        assert branch_populations(full, dec, k)[1] > 0.999
    # the dark-branch spectrum agrees with the closed-form dark potential
    eff = solve_single_channel(lambda x: analytic.v_tot_eit(cfg.delta_r, cfg.trap_width(), YB171, x), grid, YB171, 4)
    assert full.energies[0] == pytest.approx(eff.energies[0], rel=1e-3)
    # the 1/x^2 tail binds a second, shallow state (documented deviation)
    assert len(full) == count_bound_states(eff) == 2


def test_count_bound_states():
    omega = 2 * np.pi * 1e3
    v, length = _harmonic(omega)
    res = solve_single_channel(v, SpatialGrid.symmetric(10 * length, 1024), YB171, 3, threshold=np.inf)
    assert count_bound_states(res, threshold=-1.0) == 0
    assert count_bound_states(res, threshold=2.0 * omega) == 2


def test_deep_well_binds_several():
    grid = SpatialGrid.symmetric(10 * W, 4096)
    res = solve_single_channel(lambda x: np.where(np.abs(x) < W / 2, -100 * EW, 0.0), grid, YB171, 5,
                               check_convergence=False)
    assert count_bound_states(res, 0.0) >= 2


def test_no_bound_state():
    with pytest.raises(NoBoundStateError):
        solve_single_channel(lambda x: np.zeros_like(x), SpatialGrid.symmetric(W, 256), YB171)


def test_convergence_failure():
    grid = SpatialGrid.symmetric(10 * W, 32)
    with pytest.raises(GridError):
        solve_single_channel(lambda x: analytic.e0_improved_ac(EW, W, x), grid, YB171)


def test_overlap_properties():
    omega = 2 * np.pi * 1e3
    v, length = _harmonic(omega)
    grid = SpatialGrid.symmetric(10 * length, 1024)
    a = solve_single_channel(v, grid, YB171, 2, threshold=np.inf)
    assert density_overlap(a, a) == pytest.approx(1.0, abs=1e-12)
    assert density_overlap(a, a, 0, 1) == pytest.approx(density_overlap(a, a, 1, 0))
    left = solve_single_channel(lambda x: np.where(x < 0, v(x + 5 * length), 1e9 * omega),
                                grid, YB171, threshold=np.inf, check_convergence=False)
    right = solve_single_channel(lambda x: np.where(x > 0, v(x - 5 * length), 1e9 * omega),
                                 grid, YB171, threshold=np.inf, check_convergence=False)
    assert density_overlap(left, right) < 1e-6
    other = solve_single_channel(v, SpatialGrid.symmetric(10 * length, 1023), YB171, threshold=np.inf)
    with pytest.raises(UsageError):
        density_overlap(a, other)


def test_second_order_convergence():
    omega = 2 * np.pi * 1e3
    v, length = _harmonic(omega)
    ns = (256, 512, 1024)
    errs, hs = [], []
    for n in ns:
        g = SpatialGrid.symmetric(8 * length, n)
        errs.append(abs(solve_single_channel(v, g, YB171, threshold=np.inf, check_convergence=False).energies[0] - omega / 2))
        hs.append(g.h)
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert abs(slope - 2) <= 0.2


def test_variational_box_widening():
    h = W / 100
    energies = []
    for half in (2 * W, 4 * W, 8 * W):
        n = int(round(2 * half / h)) + 1
        res = solve_single_channel(lambda x: analytic.e0_improved_ac(EW, W, x), SpatialGrid.symmetric(half, n), YB171,
                                   threshold=0.0, check_convergence=False)
        energies.append(res.energies[0])
    assert energies[0] >= energies[1] >= energies[2]


@settings(max_examples=15, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.5, 4.0))
def test_parity_of_even_wells(depth, width):
    grid = SpatialGrid.symmetric(10 * W, 513)
    res = solve_single_channel(lambda x: -depth * EW / np.cosh(x / (width * W)) ** 2, grid, YB171,
                               threshold=np.inf, check_convergence=False)
    rho = res.density(0)
    assert np.allclose(rho, rho[::-1], atol=1e-6 * rho.max())
    assert res.norms[0] == pytest.approx(1.0, abs=1e-8)


def test_nonhermitian_decay_cross_check():
    """-i Gamma/2 on |e> reproduces Gamma * P_e for the red AC trap."""
    cfg = single_bound_state_config(Scheme.RED_AC, 10, OMEGA0, SIGMA, gamma=1.0)
    w = cfg.trap_width()
    grid = SpatialGrid.symmetric(10 * w, 768)
    state = solve_multichannel(cfg, grid, YB171)
    p_e = losses.pe_admixture_numeric(state, cfg)
    # complex detuning: -Omega_c^2/(Delta - i Gamma/2) on the |r> diagonal
    gamma = 1e-3 * cfg.delta
    x = grid.x[1:-1]
    oc = cfg.profile(x)
    m = x.size
    kin = K / grid.h**2
    hmat = np.zeros((2 * m, 2 * m), dtype=complex)
    idx = np.arange(m)
    hmat[2 * idx, 2 * idx] = cfg.delta_small - oc**2 / (cfg.delta - 0.5j * gamma) + 2 * kin
    hmat[2 * idx + 1, 2 * idx + 1] = 2 * kin
    hmat[2 * idx, 2 * idx + 1] = hmat[2 * idx + 1, 2 * idx] = cfg.omega_p
    hmat[2 * idx[:-1], 2 * idx[1:]] = hmat[2 * idx[1:], 2 * idx[:-1]] = -kin
    hmat[2 * idx[:-1] + 1, 2 * idx[1:] + 1] = hmat[2 * idx[1:] + 1, 2 * idx[:-1] + 1] = -kin
    vals = eig(hmat, right=False)
    ground = vals[np.argmin(np.abs(vals - state.energies[0]))]
    assert -2 * ground.imag / gamma == pytest.approx(p_e, rel=1e-2)


def test_operator_symmetry_and_norms():
    cfg = single_bound_state_config(Scheme.IMPROVED_AC, 20, OMEGA0, SIGMA)
    grid = SpatialGrid.symmetric(10 * cfg.trap_width(), 1024)
    res = solve_multichannel(cfg, grid, YB171, 1)
    assert np.all(np.isreal(res.energies))
    assert np.allclose(res.norms, 1.0, atol=1e-10)
    assert res.widths[0] > 0


def test_csv_export(tmp_path):
    cfg = single_bound_state_config(Scheme.IMPROVED_AC, 20, OMEGA0, SIGMA)
    grid = SpatialGrid.symmetric(10 * cfg.trap_width(), 1024)
    res = solve_multichannel(cfg, grid, YB171)
    path = tmp_path / "state.csv"
    write_csv(path, res)
    lines = path.read_text().splitlines()
    assert lines[0] == "x,Re_psi_0,Im_psi_0,Re_psi_1,Im_psi_1,rho"
    assert len(lines) == grid.n + 1
