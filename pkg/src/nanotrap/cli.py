"""Command-line front end: ``nanotrap {potential,eigen,lifetime,design}``.

Configuration is a flat YAML mapping (``grid:`` and ``output:`` sub-mappings
are also accepted) and ``--set key=value`` overrides it.  Frequencies are
cyclic, in Hz, with an ``_hz`` suffix; lengths are in meters with ``_m``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import traceback
from typing import Any, Dict, Optional

import numpy as np
import yaml

from . import analytic, design, losses, solver
from .adiabatic import SpatialGrid, diagonalize_grid, geometric_potentials
from .core import (
    CONTROL_WAVELENGTH,
    TWO_PI,
    AtomSpecies,
    NanotrapError,
    angular_to_hz,
    e_sigma,
    get_species,
    hz_to_angular,
)
from .schemes import (
    CosineLattice,
    GaussianDip,
    GaussianPeak,
    LinearLocal,
    QuadraticLocal,
    Scheme,
    SchemeConfig,
    single_bound_state_config,
)

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

#: key -> (unit, description)
CONFIG_KEYS: Dict[str, tuple] = {
    "scheme": ("-", "eit | improved_ac | red_ac | modified_eit | harmonic"),
    "atom": ("-", "atomic species (yb171)"),
    "mass_amu": ("amu", "overrides the mass of `atom`"),
    "omega0_hz": ("Hz", "peak control Rabi frequency Omega0/2pi"),
    "omegap_hz": ("Hz", "probe Rabi frequency Omega_p/2pi"),
    "delta_hz": ("Hz", "single-photon detuning Delta/2pi (signed)"),
    "deltar_hz": ("Hz", "two-photon detuning of |r> in EIT schemes"),
    "delta_small_hz": ("Hz", "two-photon detuning of |r> in AC schemes"),
    "gamma_hz": ("Hz", "excited-state linewidth Gamma/2pi"),
    "sigma_m": ("m", "beam length scale (default lambda_m/2pi)"),
    "lambda_m": ("m", "control wavelength (default 1983.5e-9)"),
    "profile": ("-", "gaussian | local | cosine | quadratic"),
    "eta": ("-", "control offset of the quadratic (modified EIT) profile"),
    "nu": ("-", "offset of the cosine profile"),
    "w_m": ("m", "trap width of the quadratic profile"),
    "s": ("-", "enhancement; builds the matched single-bound-state trap"),
    "deltar_ew": ("E_w", "two-photon detuning of matched EIT traps (default -2)"),
    "trap_freq_hz": ("Hz", "oscillator frequency of the harmonic test scheme"),
    "xspan_w": ("w", "grid half-width in trap widths (default 10)"),
    "n": ("-", "grid points (default 4096)"),
    "k_states": ("-", "number of bound states to report (default 1)"),
    "lz_nu": ("-", "tunnelling exponent factor (default 1)"),
    "sweep": ("-", "list of s values (or true for [10, 20, 40]) for a P_e slope fit"),
    "adiabatic": ("-", "potential: add adiabatic energies"),
    "geometry": ("-", "potential: add U (1/m^2) and A (1/m) entries"),
    "T_s": ("s", "target lifetime of a single design row"),
    "rows": ("-", "design rows [[omega0_hz, sigma_m, T_s], ...]"),
    "anchor": ("-", "Gamma calibration row [omega0_hz, sigma_m, T_s, s]"),
    "format": ("-", "csv | json"),
    "output": ("path", "output file (default stdout)"),
}


class ConfigError(NanotrapError):
    """Invalid or inconsistent configuration."""


# -- configuration ----------------------------------------------------------------

def _flatten(raw: Dict[str, Any]) -> Dict[str, Any]:
    flat = {}
    for key, val in raw.items():
        if key == "grid" and isinstance(val, dict):
            flat.update(val)
        elif key == "output" and isinstance(val, dict):
            if "path" in val:
                flat["output"] = val["path"]
            if "format" in val:
                flat["format"] = val["format"]
            extra = set(val) - {"path", "format"}
            if extra:
                raise ConfigError(f"unknown key 'output.{sorted(extra)[0]}'")
        else:
            flat[key] = val
    return flat


def load_config(path: Optional[str], overrides) -> Dict[str, Any]:
    cfg: Dict[str, Any] = {}
    if path:
        try:
            with open(path) as fh:
                raw = yaml.safe_load(fh) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"config {path!r} must be a mapping")
        cfg.update(_flatten(raw))
    for item in overrides or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        try:
            cfg[key.strip()] = yaml.safe_load(value)
        except yaml.YAMLError as exc:
            raise ConfigError(f"--set {key}: {exc}") from None
    unknown = sorted(set(cfg) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config key '{unknown[0]}'")
    return cfg


def _num(cfg, key, default=None, required=False):
    if key not in cfg or cfg[key] is None:
        if required:
            raise ConfigError(f"missing config key '{key}'")
        return default
    val = cfg[key]
    if isinstance(val, str):
        # YAML 1.1 reads exponents without a dot ("3e-6") as strings
        try:
            return float(val)
        except ValueError:
            pass
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"config key '{key}' must be a number, got {val!r}")
    return float(val)


def _int(cfg, key, default):
    val = cfg.get(key, default)
    if isinstance(val, bool) or not isinstance(val, int) and not (isinstance(val, float) and val.is_integer()):
        raise ConfigError(f"config key '{key}' must be an integer, got {val!r}")
    return int(val)


def _species(cfg) -> AtomSpecies:
    base = get_species(str(cfg.get("atom", "yb171")))
    if "mass_amu" in cfg:
        return AtomSpecies.from_amu(base.label, _num(cfg, "mass_amu"))
    return base


def _sigma(cfg) -> float:
    if "sigma_m" in cfg:
        return _num(cfg, "sigma_m")
    return _num(cfg, "lambda_m", CONTROL_WAVELENGTH) / TWO_PI


def _scheme_name(cfg) -> str:
    name = str(cfg.get("scheme", "eit")).lower()
    if name != "harmonic":
        try:
            Scheme(name)
        except ValueError:
            raise ConfigError(f"unknown scheme {name!r}") from None
    return name


def build_scheme(cfg) -> SchemeConfig:
    """SchemeConfig from config keys (angular units internally)."""
    scheme = Scheme(_scheme_name(cfg))
    species = _species(cfg)
    sigma = _sigma(cfg)
    omega0 = hz_to_angular(_num(cfg, "omega0_hz", required=scheme is not Scheme.MODIFIED_EIT or "s" in cfg))
    gamma = hz_to_angular(_num(cfg, "gamma_hz", 0.0))
    profile = cfg.get("profile")
    if "s" in cfg:
        return single_bound_state_config(
            scheme, _num(cfg, "s"), omega0, sigma, species, gamma, profile,
            eta=_num(cfg, "eta", 1.0), delta_r_ew=_num(cfg, "deltar_ew", -2.0),
        )
    omega_p = hz_to_angular(_num(cfg, "omegap_hz", required=True))
    profile = profile or ("quadratic" if scheme is Scheme.MODIFIED_EIT else "gaussian")
    if profile == "gaussian":
        if scheme is Scheme.RED_AC:
            prof = GaussianPeak(omega0, sigma)
        else:
            prof = GaussianDip(omega0, sigma, odd=scheme.is_three_level)
    elif profile == "local":
        prof = LinearLocal(omega0, sigma)
    elif profile == "cosine":
        prof = CosineLattice(omega0, 1.0 / sigma, _num(cfg, "nu", 0.0))
    elif profile == "quadratic":
        prof = QuadraticLocal(omega_p, _num(cfg, "eta", 1.0), _num(cfg, "w_m", required=True))
    else:
        raise ConfigError(f"unknown profile {profile!r}")
    return SchemeConfig(
        scheme, prof, omega_p, species,
        delta=hz_to_angular(_num(cfg, "delta_hz", 0.0)),
        delta_r=hz_to_angular(_num(cfg, "deltar_hz", 0.0)),
        delta_small=hz_to_angular(_num(cfg, "delta_small_hz", 0.0)),
        gamma=gamma,
    )


def _harmonic(cfg):
    species = _species(cfg)
    omega = hz_to_angular(_num(cfg, "trap_freq_hz", required=True))
    if not omega > 0:
        raise ConfigError("config key 'trap_freq_hz' must be positive")
    length = math.sqrt(2.0 * species.hbar_over_2m / omega)  # oscillator length sqrt(hbar/(m omega))
    return species, omega, length


def _grid(cfg, width: float) -> SpatialGrid:
    span = _num(cfg, "xspan_w", 10.0)
    return SpatialGrid.symmetric(span * width, _int(cfg, "n", 4096))


def _workers() -> int:
    raw = os.environ.get("NANOTRAP_THREADS", "1")
    try:
        val = int(raw)
    except ValueError:
        raise ConfigError(f"NANOTRAP_THREADS must be an integer, got {raw!r}") from None
    if val < 1:
        raise ConfigError(f"NANOTRAP_THREADS must be >= 1, got {val}")
    return val


# -- output -----------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(header)
    for row in rows:
        out.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not serialisable: {type(obj).__name__}")


def _json_clean(obj):
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, dict):
        return {k: _json_clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _json_clean(obj.tolist())
    if isinstance(obj, np.generic):
        return _json_clean(obj.item())
    return obj


def _json_text(payload) -> str:
    return json.dumps(_json_clean(payload), indent=2, sort_keys=True, default=_json_default) + "\n"


def write_output(text: str, path: Optional[str]) -> None:
    """Write to `path` atomically (temp file + rename), or to stdout."""
    if not path or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".nanotrap-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _format(cfg, default: str) -> str:
    fmt = str(cfg.get("format", default)).lower()
    if fmt not in ("csv", "json"):
        raise ConfigError(f"config key 'format' must be csv or json, got {fmt!r}")
    return fmt


# -- subcommands ------------------------------------------------------------------

def _analytic_potential(config: SchemeConfig, x):
    trap = analytic.TrapShapeParams.from_config(config)
    if config.scheme is Scheme.EIT:
        return analytic.v_tot_eit(trap.delta_r, trap.w, config.species, x)
    if config.scheme is Scheme.MODIFIED_EIT:
        return analytic.v_tot_modified_eit(trap.delta_r, trap.eta, trap.w, config.species, x)
    return analytic.e0_improved_ac(config.omega_p, trap.w, x)


def cmd_potential(cfg):
    """Analytic trap potential, optionally with adiabatic energies and U, A."""
    fmt = _format(cfg, "csv")
    if _scheme_name(cfg) == "harmonic":
        species, omega, length = _harmonic(cfg)
        grid = _grid(cfg, length)
        x = grid.x
        v = omega**2 * x**2 / (4.0 * species.hbar_over_2m)
        header, cols = ["x_m", "V_analytic_hz"], [x, angular_to_hz(v)]
        return _emit_table(fmt, header, cols)
    config = build_scheme(cfg)
    grid = _grid(cfg, config.trap_width())
    x = grid.x
    header = ["x_m", "V_analytic_hz"]
    cols = [x, angular_to_hz(_analytic_potential(config, x))]
    want_geo = bool(cfg.get("geometry", False))
    if cfg.get("adiabatic", False) or want_geo:
        decomp = diagonalize_grid(config, grid)
        for b in range(decomp.dim):
            header.append(f"E_{b}_hz")
            cols.append(angular_to_hz(decomp.energies[:, b]))
        if want_geo:
            geo = geometric_potentials(decomp)
            for name, mat in (("U", geo.U), ("A", geo.A)):
                for i in range(decomp.dim):
                    for j in range(decomp.dim):
                        header += [f"Re_{name}_{i}{j}", f"Im_{name}_{i}{j}"]
                        cols += [mat[:, i, j].real, mat[:, i, j].imag]
    return _emit_table(fmt, header, cols)


def _emit_table(fmt, header, cols):
    if fmt == "json":
        return _json_text({h: np.asarray(c) for h, c in zip(header, cols)})
    return _csv_text(header, zip(*cols))


def _adiabatic_projection(config: SchemeConfig, eff: solver.BoundStateResult, full: solver.BoundStateResult):
    """psi_eff(x) R_b(x) in the bare basis, sign matched to the full state."""
    decomp = diagonalize_grid(config, eff.grid)
    b = config.scheme.trapping_branch
    comp = eff.channel(0)[:, None] * decomp.frames[:, :, b]
    if np.real(np.vdot(comp.ravel(), full.wavefunctions[0].ravel())) < 0:
        comp = -comp
    return comp


def eigen_data(cfg) -> Dict[str, Any]:
    """Effective and full solves with their densities, components and overlap."""
    k = _int(cfg, "k_states", 1)
    if _scheme_name(cfg) == "harmonic":
        species, omega, length = _harmonic(cfg)
        grid = _grid(cfg, length)
        res = solver.solve_single_channel(
            lambda x: omega**2 * x**2 / (4.0 * species.hbar_over_2m), grid, species, k, threshold=np.inf
        )
        return {"grid": grid, "effective": res, "full": None, "components": None,
                "summary": {"scheme": "harmonic", "energies_hz": angular_to_hz(res.energies),
                            "energies_over_freq": res.energies / omega, "norms": res.norms}}
    config = build_scheme(cfg)
    grid = _grid(cfg, config.trap_width())
    if config.scheme.is_three_level:
        dark = losses.dark_branch_ground_state(config, grid)
        eff = solver.solve_single_channel(dark.effective_potential, grid, config.species, k)
        full = solver.solve_branch(config, grid)
    else:
        decomp_e0 = np.linalg.eigvalsh(config.hamiltonian(grid.x))[:, 0]
        eff = solver.solve_single_channel(decomp_e0, grid, config.species, k)
        full = solver.solve_multichannel(config, grid, config.species, k)
    comps = _adiabatic_projection(config, eff, full)
    peak = np.max(np.abs(full.wavefunctions[0]))
    deviation = float(np.max(np.abs(full.wavefunctions[0] - comps)) / peak)
    ew = config.e_w()
    summary = {
        "scheme": config.scheme.value,
        "w_m": config.trap_width(),
        "Ew_hz": angular_to_hz(ew),
        "effective_energies_hz": angular_to_hz(eff.energies),
        "full_energies_hz": angular_to_hz(full.energies),
        "effective_energies_over_Ew": eff.energies / ew,
        "full_energies_over_Ew": full.energies / ew,
        "threshold_effective_hz": angular_to_hz(eff.threshold),
        "threshold_full_hz": angular_to_hz(full.threshold),
        "bound_states_effective": solver.count_bound_states(eff),
        "bound_states_full": solver.count_bound_states(full),
        "density_overlap": solver.density_overlap(eff, full),
        "max_channel_deviation": deviation,
        "norms_effective": eff.norms,
        "norms_full": full.norms,
    }
    return {"grid": grid, "effective": eff, "full": full, "components": comps, "summary": summary}


def cmd_eigen(cfg):
    fmt = _format(cfg, "json")
    data = eigen_data(cfg)
    eff, full, comps = data["effective"], data["full"], data["components"]
    header = ["x_m", "rho_eff"]
    cols = [data["grid"].x, eff.density(0)]
    if full is not None:
        header.append("rho_full")
        cols.append(full.density(0))
        for c in range(full.n_channels):
            header += [f"Re_psi_full_{c}", f"Im_psi_full_{c}", f"psi_adiabatic_{c}"]
            psi = full.channel(c).astype(complex)
            cols += [psi.real, psi.imag, np.real(comps[:, c])]
    if fmt == "json":
        payload = dict(data["summary"])
        payload["profiles"] = {h: np.asarray(c) for h, c in zip(header, cols)}
        return _json_text(payload)
    return _csv_text(header, zip(*cols))


def _sweep_values(cfg):
    raw = cfg.get("sweep")
    if raw is True:
        return [10.0, 20.0, 40.0]
    if not isinstance(raw, list) or len(raw) < 2:
        raise ConfigError("config key 'sweep' must be true or a list of at least two s values")
    return [float(v) for v in raw]


def pe_sweep(cfg, s_values):
    scheme = Scheme(_scheme_name(cfg))
    if scheme.is_three_level:
        raise ConfigError("config key 'sweep' needs an AC scheme (improved_ac or red_ac)")
    species, sigma = _species(cfg), _sigma(cfg)
    omega0 = hz_to_angular(_num(cfg, "omega0_hz", required=True))
    p_e = []
    for s in s_values:
        config = single_bound_state_config(scheme, s, omega0, sigma, species)
        grid = _grid(cfg, config.trap_width())
        state = solver.solve_multichannel(config, grid, species, 1)
        p_e.append(losses.pe_admixture_numeric(state, config))
    return {
        "s": s_values,
        "p_e": p_e,
        "p_e_scaling": [losses.pe_scaling(scheme, s, e_sigma(species, sigma), omega0) for s in s_values],
        "slope": losses.fit_loglog_slope(s_values, p_e),
        "expected_slope": design.scaling_power(scheme),
    }


def cmd_lifetime(cfg):
    _format(cfg, "json")
    if "sweep" in cfg:
        payload = {"sweep": pe_sweep(cfg, _sweep_values(cfg))}
        if not any(k in cfg for k in ("omegap_hz", "s")):
            return _json_text(payload)
    else:
        payload = {}
    config = build_scheme(cfg)
    trap = analytic.TrapShapeParams.from_config(config)
    nu = _num(cfg, "lz_nu", 1.0)
    state = None
    grid = _grid(cfg, trap.w)
    if not config.scheme.is_three_level:
        state = solver.solve_multichannel(config, grid, config.species, 1)
    report = losses.lifetime_report(config, trap, state, nu)
    payload.update({
        "scheme": config.scheme.value,
        "w_m": trap.w,
        "Ew_hz": angular_to_hz(trap.e_w),
        "omegap_hz": angular_to_hz(config.omega_p),
        "rate_units": "rad/s",
        "report": report.to_dict(),
    })
    return _json_text(payload)


def _design_rows(cfg):
    rows = cfg.get("rows")
    if rows is None:
        if "T_s" in cfg:
            return [(hz_to_angular(_num(cfg, "omega0_hz", required=True)), _sigma(cfg), _num(cfg, "T_s"))]
        raise ConfigError("design needs 'rows', 'T_s' or --appendix-a")
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, (list, tuple)) or len(row) != 3:
            raise ConfigError(f"config key 'rows[{i}]' must be [omega0_hz, sigma_m, T_s]")
        try:
            f, sigma, T = (float(v) for v in row)
        except (TypeError, ValueError):
            raise ConfigError(f"config key 'rows[{i}]' must hold numbers") from None
        out.append((hz_to_angular(f), sigma, T))
    return out


def _design_gamma(cfg, scheme, species):
    if "gamma_hz" in cfg:
        return hz_to_angular(_num(cfg, "gamma_hz"))
    if "anchor" in cfg:
        anchor = cfg["anchor"]
        if not isinstance(anchor, (list, tuple)) or len(anchor) != 4:
            raise ConfigError("config key 'anchor' must be [omega0_hz, sigma_m, T_s, s]")
        f, sigma, T, s = (float(v) for v in anchor)
        return design.calibrate_gamma(scheme, species, hz_to_angular(f), sigma, T, s)
    return design.appendix_gamma(scheme, species)


def cmd_design(cfg, appendix: bool = False):
    fmt = _format(cfg, "csv")
    scheme = Scheme(_scheme_name(cfg)) if "scheme" in cfg else Scheme.EIT
    species = _species(cfg)
    rows = design.appendix_rows() if appendix else _design_rows(cfg)
    gamma = _design_gamma(cfg, scheme, species)
    table = design.generate_table(scheme, species, rows, gamma, workers=_workers())
    if fmt == "json":
        recs = [dict(zip(design.TABLE_COLUMNS, r)) for r in design.table_records(table)]
        return _json_text({"gamma_hz": angular_to_hz(gamma), "rows": recs})
    return design.table_csv(table)


# -- entry point ------------------------------------------------------------------

def _epilog() -> str:
    lines = ["config keys (YAML file or --set key=value):"]
    for key, (unit, text) in CONFIG_KEYS.items():
        lines.append(f"  {key:<15} [{unit}] {text}")
    lines += ["", "exit codes: 0 success, 2 config error, 3 numerical error",
              "env: NANOTRAP_THREADS caps worker threads for table rows"]
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.RawDescriptionHelpFormatter
    parser = argparse.ArgumentParser(prog="nanotrap", description="Sub-wavelength dark-state trap toolkit.",
                                     epilog=_epilog(), formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "potential": "trap potential curves (CSV: x_m, V_analytic_hz, ...)",
        "eigen": "effective vs full bound states, densities and overlap",
        "lifetime": "loss rates and lifetime (JSON)",
        "design": "trap widths for target lifetimes (CSV table)",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text, epilog=_epilog(), formatter_class=fmt)
        p.add_argument("--config", "-c", help="YAML config file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
        p.add_argument("-o", "--output", help="output path (default stdout)")
        if name == "design":
            p.add_argument("--appendix-a", action="store_true",
                           help="tabulated 171Yb grid, both 100 ms and 10 ms lifetimes")
    return parser


def _origin(exc: BaseException) -> str:
    """Module of the innermost package frame that raised `exc`."""
    name = "nanotrap"
    for frame, _ in traceback.walk_tb(exc.__traceback__):
        mod = frame.f_globals.get("__name__", "")
        if mod.startswith("nanotrap"):
            name = mod
    return name


def _fail(stage: str, exc: BaseException, code: int) -> int:
    sys.stderr.write(f"nanotrap: {stage} error in {_origin(exc)}: {exc}\n")
    return code


COMMANDS = {"potential": cmd_potential, "eigen": cmd_eigen, "lifetime": cmd_lifetime, "design": cmd_design}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args.set)
        out_path = args.output or cfg.get("output")
        # validate everything that does not need a solve
        if args.command != "design":
            _grid(cfg, 1.0)
            sweep_only = args.command == "lifetime" and "sweep" in cfg and not any(k in cfg for k in ("omegap_hz", "s"))
            if _scheme_name(cfg) != "harmonic" and not sweep_only:
                build_scheme(cfg)
        elif args.command == "design":
            _workers()
            if not getattr(args, "appendix_a", False):
                _design_rows(cfg)
    except (NanotrapError, ValueError, TypeError) as exc:
        return _fail("config", exc, EXIT_CONFIG)
    try:
        if args.command == "design":
            text = cmd_design(cfg, appendix=args.appendix_a)
        else:
            text = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        return _fail("config", exc, EXIT_CONFIG)
    except (NanotrapError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return _fail("numerical", exc, EXIT_NUMERICAL)
    write_output(text, out_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
