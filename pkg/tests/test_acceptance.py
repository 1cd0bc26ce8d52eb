"""Acceptance suite: one pass/fail line per criterion (see the summary section)."""
import csv
import io
import math
import time

import numpy as np
import pytest
from scipy.linalg import eigh

from conftest import OMEGA0, SIGMA, record
from printed_tables import ALL_ROWS, TABLE_100MS, TABLE_10MS, sigma_of

from nanotrap import analytic, cli, losses, solver
from nanotrap.adiabatic import SpatialGrid, diagonalize_grid, geometric_potentials
from nanotrap.core import HBAR, TWO_PI, YB171, e_w
from nanotrap.schemes import GaussianDip, Scheme, SchemeConfig, single_bound_state_config

NORMS = []  # every state norm computed by this suite, checked by criterion 9


def _track(result):
    NORMS.extend(np.atleast_1d(result.norms).tolist())
    return result


def _printed(table, mhz, key):
    return next(r for r in table if r[0] == mhz and r[5] == key)


# -- 1 -----------------------------------------------------------------------------

def test_criterion_1_appendix_reproduction(tmp_path):
    out = tmp_path / "appendix.csv"
    t0 = time.perf_counter()
    code = cli.main(["design", "--appendix-a", "-o", str(out)])
    elapsed = time.perf_counter() - t0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    worst = 0.0
    matched = 0
    for row in rows:
        mhz = float(row["omega0_hz"]) / 1e6
        sigma = float(row["sigma_m"])
        key = "3um" if abs(sigma - 3e-6) < 1e-12 else "lambda/2pi"
        table = TABLE_100MS if abs(float(row["T_s"]) - 0.1) < 1e-12 else TABLE_10MS
        printed = _printed(table, round(mhz), key)
        got = (float(row["w_m"]) * 1e9, float(row["s"]), float(row["Ew_hz"]) / 1e3)
        for g, p in zip(got, printed[1:4]):
            worst = max(worst, abs(g - p) / p)
        matched += 1
    passed = code == 0 and matched == 28 and worst < 2e-3 and elapsed < 1.0
    record(1, passed, f"{matched}/28 rows, worst relative deviation {worst:.2e} (< 2e-3), runtime {elapsed:.3f} s (< 1 s)")
    assert code == 0 and matched == 28
    assert worst < 2e-3
    assert elapsed < 1.0


# -- 2 -----------------------------------------------------------------------------

def test_criterion_2_gamma_independent_scalings():
    s = {(r[0], r[4], r[5]): r[2] for r in ALL_ROWS}
    lam = "lambda/2pi"
    sigma_ratio = sigma_of("3um") / sigma_of(lam)
    named = [
        ("Omega0^(1/3)", s[(1000, 100, lam)] / s[(1, 100, lam)], 1000 ** (1 / 3)),
        ("T^(-1/6)", s[(1, 10, lam)] / s[(1, 100, lam)], 10 ** (1 / 6)),
        ("sigma^(2/3)", s[(1, 100, "3um")] / s[(1, 100, lam)], sigma_ratio ** (2 / 3)),
    ]
    named_ok = all(abs(got - want) <= 1e-3 for _, got, want in named)
    # every pair of printed rows obeys the same power laws
    worst = 0.0
    for (f1, t1, k1), s1 in s.items():
        for (f2, t2, k2), s2 in s.items():
            pred = (f2 / f1) ** (1 / 3) * (t2 / t1) ** (-1 / 6) * (sigma_of(k2) / sigma_of(k1)) ** (2 / 3)
            worst = max(worst, abs(s2 / s1 - pred) / pred)
    passed = named_ok and worst <= 1e-3
    detail = ", ".join(f"{n}: {g:.6f} vs {w:.6f}" for n, g, w in named)
    record(2, passed, f"{detail}; worst pairwise relative deviation {worst:.1e} (<= 1e-3)")
    for _, got, want in named:
        assert abs(got - want) <= 1e-3
    assert worst <= 1e-3


# -- 3 -----------------------------------------------------------------------------

def test_criterion_3_row_identities():
    worst_s = worst_e = 0.0
    for mhz, w_nm, s, ew_khz, _, key in ALL_ROWS:
        w = w_nm * 1e-9
        worst_s = max(worst_s, abs(sigma_of(key) / w - s) / s)
        ew_hz = HBAR / (2 * YB171.mass * w**2) / TWO_PI
        worst_e = max(worst_e, abs(ew_hz - ew_khz * 1e3) / (ew_khz * 1e3))
    passed = worst_s < 1e-3 and worst_e < 1e-3
    record(3, passed, f"28 rows: worst |s - sigma/w|/s = {worst_s:.1e}, worst E_w deviation = {worst_e:.1e} (< 1e-3)")
    assert worst_s < 1e-3
    assert worst_e < 1e-3


# -- 4 -----------------------------------------------------------------------------

def _fig2b(s):
    config = single_bound_state_config(Scheme.IMPROVED_AC, s, OMEGA0, SIGMA)
    w = config.trap_width()
    grid = SpatialGrid.symmetric(10 * w, 4096)
    t0 = time.perf_counter()
    e0 = np.linalg.eigvalsh(config.hamiltonian(grid.x))[:, 0]
    eff = _track(solver.solve_single_channel(e0, grid, YB171))
    full = _track(solver.solve_multichannel(config, grid, YB171))
    decomp = diagonalize_grid(config, grid)
    adiabatic = eff.channel(0)[:, None] * decomp.frames[:, :, 0]
    if np.vdot(adiabatic.ravel(), full.wavefunctions[0].ravel()).real < 0:
        adiabatic = -adiabatic
    elapsed = time.perf_counter() - t0
    overlap = solver.density_overlap(eff, full)
    dev = np.max(np.abs(full.wavefunctions[0] - adiabatic)) / np.max(np.abs(full.wavefunctions[0]))
    return overlap, float(dev), elapsed


def test_criterion_4_effective_vs_full():
    results = {s: _fig2b(s) for s in (10, 20, 40)}
    passed = all(o >= 0.99 and d > 0.05 and t < 10 for o, d, t in results.values())
    detail = "; ".join(f"s={s}: overlap {o:.5f}, channel deviation {d:.3f}, {t:.2f} s" for s, (o, d, t) in results.items())
    record(4, passed, detail + " (need overlap >= 0.99, deviation > 0.05, < 10 s)")
    for o, d, t in results.values():
        assert o >= 0.99
        assert d > 0.05
        assert t < 10


# -- 5 -----------------------------------------------------------------------------

def _eit_oracle_error(n):
    config = single_bound_state_config(Scheme.EIT, 20, OMEGA0, SIGMA, profile="local").with_(delta_r=0.0)
    w = config.trap_width()
    grid = SpatialGrid.symmetric(10 * w, n)
    geo = geometric_potentials(diagonalize_grid(config, grid), check=False)
    scalar = geo.scalar_energy(YB171)[:, 1, 1].real
    x = grid.x
    inner = np.abs(x) <= 3 * w
    exact = e_w(YB171, w) / (1 + (x[inner] / w) ** 2) ** 2
    return np.max(np.abs(scalar[inner] - exact)) / np.max(np.abs(exact)), grid.h


def _ac_oracle_error(n):
    config = single_bound_state_config(Scheme.IMPROVED_AC, 20, OMEGA0, SIGMA, profile="local")
    w = config.trap_width()
    grid = SpatialGrid.symmetric(10 * w, n)
    geo = geometric_potentials(diagonalize_grid(config, grid), check=False)
    u = geo.scalar_energy(YB171)
    x = grid.x
    inner = np.abs(x) <= 3 * w
    alpha, beta = analytic.alpha_beta(YB171, w, x[inner])
    err_a = np.max(np.abs(u[inner, 0, 0].real - alpha)) / np.max(np.abs(alpha))
    off = u[inner, 0, 1].real
    # the sign of the off-diagonal entry depends on the gauge; U stays antisymmetric
    err_b = np.max(np.abs(np.abs(off) - np.abs(beta))) / np.max(np.abs(beta))
    antisym = np.max(np.abs(u[inner, 0, 1] + u[inner, 1, 0])) / np.max(np.abs(beta))
    return max(err_a, err_b, antisym), grid.h


def test_criterion_5_geometric_potential_oracles():
    ns = (512, 1024, 2048, 4096)
    lines, ok = [], True
    for name, fn in (("EIT U_D", _eit_oracle_error), ("improved AC alpha/beta", _ac_oracle_error)):
        errs, hs = zip(*(fn(n) for n in ns))
        slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        good = errs[-1] < 1e-3 and abs(slope - 2) <= 0.2
        ok &= good
        lines.append(f"{name}: error {errs[-1]:.2e} at n=4096, slope {slope:.3f}")
    record(5, ok, "; ".join(lines) + " (need < 1e-3, slope 2 +/- 0.2)")
    assert ok


# -- 6 -----------------------------------------------------------------------------

def _pe_slope(scheme):
    s_values = (10, 20, 40)
    pes = []
    for s in s_values:
        config = single_bound_state_config(scheme, s, OMEGA0, SIGMA)
        grid = SpatialGrid.symmetric(10 * config.trap_width(), 4096)
        state = _track(solver.solve_multichannel(config, grid, YB171))
        pes.append(losses.pe_admixture_numeric(state, config))
    return losses.fit_loglog_slope(s_values, pes)


def test_criterion_6_loss_scaling():
    improved = _pe_slope(Scheme.IMPROVED_AC)
    red = _pe_slope(Scheme.RED_AC)
    gap = red - improved
    passed = abs(improved - 6) <= 0.3 and abs(red - 8) <= 0.3 and abs(gap - 2) <= 0.4
    record(6, passed, f"slopes improved AC {improved:.3f} (6 +/- 0.3), red AC {red:.3f} (8 +/- 0.3), gap {gap:.3f} (2 +/- 0.4)")
    assert abs(improved - 6) <= 0.3
    assert abs(red - 8) <= 0.3
    assert abs(gap - 2) <= 0.4


# -- 7 -----------------------------------------------------------------------------

def _dense_levels(v, h, k=6):
    kin = YB171.hbar_over_2m / h**2
    m = v.size - 2
    mat = np.diag(2 * kin + v[1:-1]) - kin * (np.eye(m, k=1) + np.eye(m, k=-1))
    return eigh(mat, eigvals_only=True, subset_by_index=[0, k - 1])


def _richardson_count(potential, w):
    fine = SpatialGrid.symmetric(10 * w, 4097)
    coarse = fine.coarsened()
    v_f, v_c = potential(fine.x), potential(coarse.x)
    levels = (4 * _dense_levels(v_f, fine.h) - _dense_levels(v_c, coarse.h)) / 3
    threshold = min(v_f[0], v_f[-1])
    return int(np.sum(levels < threshold)), levels, threshold


def test_criterion_7_single_bound_state():
    eit = single_bound_state_config(Scheme.EIT, 20, OMEGA0, SIGMA, profile="local")
    w = eit.trap_width()
    ew = e_w(YB171, w)
    n_eit, lv_eit, th_eit = _richardson_count(lambda x: analytic.v_tot_eit(eit.delta_r, w, YB171, x), w)
    ac = single_bound_state_config(Scheme.IMPROVED_AC, 20, OMEGA0, SIGMA)
    n_ac, lv_ac, th_ac = _richardson_count(lambda x: analytic.e0_improved_ac(ac.omega_p, w, x), w)
    passed = n_eit == 1 and n_ac == 1
    bound_eit = ", ".join(f"{e / ew:.4f}" for e in lv_eit[lv_eit < th_eit])
    bound_ac = ", ".join(f"{e / ew:.4f}" for e in lv_ac[lv_ac < th_ac])
    record(7, passed, f"EIT (delta_r = -2 E_w): {n_eit} bound [{bound_eit}] E_w; "
                      f"improved AC (Omega_p = E_w): {n_ac} bound [{bound_ac}] E_w (need exactly 1 each)")
    assert n_ac == 1
    assert n_eit == 1


# -- 8 -----------------------------------------------------------------------------

def test_criterion_8_modified_eit_suppression():
    eit = single_bound_state_config(Scheme.EIT, 20, OMEGA0, SIGMA, profile="local", gamma=TWO_PI * 1e6)
    mod = losses.matched_modified_eit(eit, eta=1.0)
    grid = SpatialGrid.symmetric(10 * eit.trap_width(), 4097)
    lin_sol = losses.dark_branch_ground_state(eit, grid)
    mod_sol = losses.dark_branch_ground_state(mod, grid)
    _track(lin_sol.state)
    _track(mod_sol.state)
    ratio = (mod.gamma * losses.nonadiabatic_admixture(mod, mod_sol)) / (eit.gamma * losses.nonadiabatic_admixture(eit, lin_sol))
    depth_eit = -np.min(lin_sol.effective_potential)
    depth_mod = -np.min(mod_sol.effective_potential)
    passed = ratio <= 0.6
    record(8, passed, f"non-adiabatic loss ratio modified/linear = {ratio:.3f} (<= 0.6); "
                      f"well depths {depth_eit / eit.e_w():.3f} vs {depth_mod / eit.e_w():.3f} E_w")
    assert ratio <= 0.6


# -- 9 -----------------------------------------------------------------------------

def test_criterion_9_dark_state_and_normalization():
    config = SchemeConfig(Scheme.EIT, GaussianDip(OMEGA0, SIGMA, odd=True), OMEGA0 / 20,
                          delta=TWO_PI * 3e7, delta_r=0.0)
    grid = SpatialGrid.symmetric(3 * SIGMA, 4096)
    h = config.hamiltonian(grid.x)
    vals = np.linalg.eigvalsh(h)
    norm_h = np.linalg.norm(h, ord=2, axis=(1, 2))
    dark = np.min(np.abs(vals), axis=1) / norm_h
    # a few extra states of every solver path
    eit = single_bound_state_config(Scheme.EIT, 20, OMEGA0, SIGMA, profile="local")
    g = SpatialGrid.symmetric(10 * eit.trap_width(), 4096)
    _track(solver.solve_branch(eit, g))
    ac = single_bound_state_config(Scheme.IMPROVED_AC, 20, OMEGA0, SIGMA)
    _track(solver.solve_multichannel(ac, SpatialGrid.symmetric(10 * ac.trap_width(), 4096), YB171, k_states=3))
    omega = TWO_PI * 1e3
    length = math.sqrt(2 * YB171.hbar_over_2m / omega)
    _track(solver.solve_single_channel(lambda x: omega**2 * x**2 / (4 * YB171.hbar_over_2m),
                                       SpatialGrid.symmetric(10 * length, 4096), YB171, 5, threshold=np.inf))
    norm_err = max(abs(n - 1) for n in NORMS)
    passed = dark.max() < 1e-12 and norm_err < 1e-8
    record(9, passed, f"max |E_D|/||H|| = {dark.max():.1e} (< 1e-12); {len(NORMS)} states, "
                      f"max |norm - 1| = {norm_err:.1e} (< 1e-8)")
    assert dark.max() < 1e-12
    assert norm_err < 1e-8
