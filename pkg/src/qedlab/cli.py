"""Experiment driver: figure presets, parameter sweeps, CSV emission.

Configuration is plain ``key = value`` INI text.  A config (or packaged
preset) expands into one single-method run per ``[variant ...]`` section (or
per entry of ``[preset] methods``); every run sweeps the cartesian product of
the axes in ``[sweep]`` and writes one self-describing CSV whose header
embeds the fully resolved configuration.  Repeated runs produce bitwise
identical files.

Subcommands::

    qedlab ground   --config FILE | --preset NAME  [--out DIR]
    qedlab spectrum --config FILE | --preset NAME  [--out DIR]
    qedlab validate --config FILE | --preset NAME

``QEDLAB_WORKERS`` bounds the sweep worker pool (default: half the CPUs).
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import dynamics, exact, pheg, photon_free, qedft
from .grid import Grid1D, Potential1D, build_grid, soft_coulomb, zero_potential
from .modes import ModeSet, coupling_from_g_ratio, single_mode

GROUND_METHODS = ("exact-pf", "exact-pzw", "pzw-selfpol", "photon-free", "pheg",
                  "qedft-px", "qedft-pxlda", "maxwell", "pxlda-maxwell")
SPECTRUM_METHODS = ("exact-pf", "exact-pzw", "photon-free", "maxwell",
                    "pxlda-maxwell")
PERIODIC_ONLY = ("pheg",)
DIRICHLET_ONLY = ("exact-pzw", "pzw-selfpol", "qedft-px", "qedft-pxlda",
                  "maxwell", "pxlda-maxwell")

_FLOAT_FMT = "{:.11e}"  # 12 significant digits, fixed scientific notation

EXC_COLUMNS = 8  # excitation-distribution sectors flattened into the row


@dataclass(frozen=True)
class RunConfig:
    """One fully resolved single-method run."""

    label: str
    method: str
    kind: str                      # "ground" | "spectrum"
    n_points: int = 301
    spacing: float = 0.1
    boundary: str = "dirichlet"
    fd_order: int = 4
    potential_kind: str = "soft_coulomb"
    xi: float = 1.0
    omega: str | float = "resonance"
    lam: float | None = None
    g_ratio: float | None = None
    n_electrons: int = 1
    max_n: int = 40
    pheg_potential_mode: str = "raw"
    kappa: float = 1.0
    spin_factor: str = "closed_shell"
    mollify: bool = False
    pf_form: str = "dressed_bilinear"
    include_zero_point: bool = False
    dt: float = 5e-4
    t_end: float = 1000.0
    damping: float = 5e-3
    kick_strength: float = 1e-4
    kick_center: float = 1.0
    kick_width: float = 1e-2
    record_stride: int = 20
    omega_response_max: float = 1.5
    omega_axis_min: float = 0.05
    omega_axis_max: float = 1.0
    omega_axis_points: int = 60
    sweep: dict = field(default_factory=dict)
    deviation_of: str | None = None

    def describe(self) -> list[str]:
        skip = {"sweep"}
        lines = [f"{k} = {v}" for k, v in sorted(vars(self).items()) if k not in skip]
        for axis, values in sorted(self.sweep.items()):
            lines.append(f"sweep.{axis} = {', '.join(str(v) for v in values)}")
        return lines


# ---------------------------------------------------------------------------
# config parsing

def _parse_axis(text: str) -> list[float]:
    """Either 'a, b, c' or 'start:stop:count' (inclusive linspace)."""
    text = text.strip()
    if ":" in text:
        start, stop, count = text.split(":")
        return [float(x) for x in np.linspace(float(start), float(stop), int(count))]
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _load_ini(preset: str | None, config_path: str | None) -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    if preset is not None:
        ref = resources.files("qedlab.presets").joinpath(f"{preset}.cfg")
        if not ref.is_file():
            raise SystemExit(f"unknown preset {preset!r}")
        parser.read_string(ref.read_text())
    if config_path is not None:
        if not Path(config_path).is_file():
            raise SystemExit(f"config file not found: {config_path}")
        parser.read(config_path)
    if preset is None and config_path is None:
        raise SystemExit("need --config and/or --preset")
    return parser


def load_run_configs(preset: str | None, config_path: str | None,
                     kind: str) -> tuple[str, list[RunConfig]]:
    """Expand an INI file into per-method RunConfigs."""
    ini = _load_ini(preset, config_path)
    label = ini.get("preset", "label", fallback=preset or "run")

    def base_kwargs(section_overrides: dict) -> dict:
        get = ini.get
        kw = dict(
            n_points=ini.getint("grid", "n_points", fallback=301),
            spacing=ini.getfloat("grid", "spacing", fallback=0.1),
            boundary=get("grid", "boundary", fallback="dirichlet"),
            fd_order=ini.getint("grid", "fd_order", fallback=4),
            potential_kind=get("potential", "kind", fallback="soft_coulomb"),
            xi=ini.getfloat("potential", "xi", fallback=1.0),
            n_electrons=ini.getint("modes", "n_electrons", fallback=1),
            max_n=ini.getint("truncation", "max_n", fallback=40),
            pheg_potential_mode=get("pheg", "potential_mode", fallback="raw"),
            kappa=ini.getfloat("functional", "kappa", fallback=1.0),
            spin_factor=get("functional", "spin_factor", fallback="closed_shell"),
            mollify=ini.getboolean("functional", "mollify", fallback=False),
            pf_form=get("exact", "form", fallback="dressed_bilinear"),
            include_zero_point=ini.getboolean("exact", "include_zero_point",
                                              fallback=False),
            dt=ini.getfloat("dynamics", "dt", fallback=5e-4),
            t_end=ini.getfloat("dynamics", "t_end", fallback=1000.0),
            damping=ini.getfloat("dynamics", "damping", fallback=5e-3),
            kick_strength=ini.getfloat("dynamics", "kick_strength", fallback=1e-4),
            kick_center=ini.getfloat("dynamics", "kick_center", fallback=1.0),
            kick_width=ini.getfloat("dynamics", "kick_width", fallback=1e-2),
            record_stride=ini.getint("dynamics", "record_stride", fallback=20),
            omega_response_max=ini.getfloat("dynamics", "omega_max", fallback=1.5),
            omega_axis_min=ini.getfloat("dynamics", "omega_axis_min", fallback=0.05),
            omega_axis_max=ini.getfloat("dynamics", "omega_axis_max", fallback=1.0),
            omega_axis_points=ini.getint("dynamics", "omega_axis_points", fallback=60),
            deviation_of=ini.get("preset", "deviation_of", fallback=None),
        )
        omega_raw = get("modes", "omega", fallback="resonance")
        kw["omega"] = omega_raw if omega_raw == "resonance" else float(omega_raw)
        if ini.has_option("modes", "g_ratio"):
            kw["g_ratio"] = ini.getfloat("modes", "g_ratio")
        if ini.has_option("modes", "lambda"):
            kw["lam"] = ini.getfloat("modes", "lambda")
        sweep = {}
        if ini.has_section("sweep"):
            for axis in ini.options("sweep"):
                if axis not in ("lambda", "omega", "xi", "kappa"):
                    raise SystemExit(f"unknown sweep axis {axis!r}")
                sweep[axis] = _parse_axis(ini.get("sweep", axis))
        kw["sweep"] = sweep
        kw.update(section_overrides)
        return kw

    configs = []
    variant_sections = [s for s in ini.sections() if s.startswith("variant ")]
    if variant_sections:
        for sec in variant_sections:
            overrides = {}
            method = ini.get(sec, "method")
            for key in ("max_n",):
                if ini.has_option(sec, key):
                    overrides["max_n"] = ini.getint(sec, key)
            for key in ("potential_mode",):
                if ini.has_option(sec, key):
                    overrides["pheg_potential_mode"] = ini.get(sec, key)
            for key in ("form",):
                if ini.has_option(sec, key):
                    overrides["pf_form"] = ini.get(sec, key)
            for key in ("mollify",):
                if ini.has_option(sec, key):
                    overrides["mollify"] = ini.getboolean(sec, key)
            for key in ("kappa",):
                if ini.has_option(sec, key):
                    overrides["kappa"] = ini.getfloat(sec, key)
            name = sec[len("variant "):].strip()
            configs.append(RunConfig(label=f"{label}_{name}", method=method,
                                     kind=kind, **base_kwargs(overrides)))
    else:
        methods = []
        if ini.has_option("preset", "methods"):
            methods = [m.strip() for m in ini.get("preset", "methods").split(",")]
        elif ini.has_option("run", "method"):
            methods = [ini.get("run", "method")]
        else:
            raise SystemExit("no method given ([run] method or [preset] methods)")
        for method in methods:
            configs.append(RunConfig(label=f"{label}_{method}", method=method,
                                     kind=kind, **base_kwargs({})))

    allowed = GROUND_METHODS if kind == "ground" else SPECTRUM_METHODS
    for cfg in configs:
        if cfg.method not in allowed:
            raise SystemExit(f"method {cfg.method!r} not valid for {kind} runs "
                             f"(expected one of {allowed})")
    return label, configs


# ---------------------------------------------------------------------------
# shared setup helpers

def _make_grid(cfg: RunConfig) -> Grid1D:
    return build_grid(cfg.n_points, cfg.spacing, cfg.boundary)


def _make_potential(cfg: RunConfig, grid: Grid1D, xi: float) -> Potential1D:
    if cfg.potential_kind == "soft_coulomb":
        return soft_coulomb(grid, xi)
    if cfg.potential_kind == "zero":
        return zero_potential(grid)
    raise SystemExit(f"unknown potential kind {cfg.potential_kind!r}")


def _resolve_omega(cfg: RunConfig, grid: Grid1D, v: Potential1D,
                   omega_value) -> float:
    if omega_value == "resonance":
        return exact.resonance_frequency(grid, v, cfg.fd_order)
    return float(omega_value)


def _resolve_lambda(cfg: RunConfig, omega: float, lam_value) -> float:
    if lam_value is not None:
        return float(lam_value)
    if cfg.g_ratio is not None:
        return coupling_from_g_ratio(omega, cfg.g_ratio)
    if cfg.lam is not None:
        return cfg.lam
    raise SystemExit("coupling underdetermined: give lambda, g_ratio, or a "
                     "lambda sweep axis")


def _sweep_points(cfg: RunConfig) -> list[dict]:
    axes = {"lambda": [None], "omega": [None], "xi": [None], "kappa": [None]}
    axes.update(cfg.sweep)
    points = []
    for xi in axes["xi"]:
        for om in axes["omega"]:
            for lam in axes["lambda"]:
                for kap in axes["kappa"]:
                    points.append({"xi": xi, "omega": om, "lambda": lam,
                                   "kappa": kap})
    return points


# ---------------------------------------------------------------------------
# ground-state runner

GROUND_COLUMNS = (
    ["method", "status", "lambda", "omega", "xi", "kappa", "max_n", "energy",
     "dipole", "dipole_variance", "photon_number", "photon_number_dressed",
     "scf_iterations"]
    + [f"exc_p{i}" for i in range(EXC_COLUMNS)]
)


def ground_point(cfg: RunConfig, point: dict) -> dict:
    """Evaluate one sweep point; exceptions are reported via the status column."""
    row = {c: np.nan for c in GROUND_COLUMNS}
    row["method"] = cfg.method
    row["scf_iterations"] = 0
    xi = point["xi"] if point["xi"] is not None else cfg.xi
    kappa = point["kappa"] if point["kappa"] is not None else cfg.kappa
    grid = _make_grid(cfg)
    v = _make_potential(cfg, grid, xi)
    omega = _resolve_omega(cfg, grid, v, point["omega"] if point["omega"]
                           is not None else cfg.omega)
    lam = _resolve_lambda(cfg, omega, point["lambda"])
    row.update({"lambda": lam, "omega": omega, "xi": xi, "kappa": kappa,
                "max_n": cfg.max_n})
    try:
        _ground_observables(cfg, grid, v, omega, lam, kappa, row)
        row["status"] = "ok"
    except Exception as err:  # noqa: BLE001 - per-point isolation
        row["status"] = f"failed({type(err).__name__})"
        row.setdefault("error", str(err))
    return row


def _ground_observables(cfg: RunConfig, grid, v, omega, lam, kappa, row) -> None:
    ms = single_mode(omega, lam, cfg.n_electrons)
    method = cfg.method
    if method in ("exact-pf", "exact-pzw"):
        trunc = exact.FockTruncation(cfg.max_n)
        if method == "exact-pf":
            h = exact.build_pf_hamiltonian(grid, v, ms, trunc, cfg.pf_form,
                                           cfg.include_zero_point, cfg.fd_order)
            gauge = "pf_dressed" if cfg.pf_form == "dressed_bilinear" else "pf_bare"
        else:
            h = exact.build_pzw_hamiltonian(grid, v, ms, trunc,
                                            cfg.include_zero_point, cfg.fd_order)
            gauge = "pzw"
        state = exact.solve_coupled_ground_state(h, grid, ms, trunc, gauge)
        obs = exact.observables(state)
        row["energy"] = state.energy
        row["dipole"] = obs["dipole"]
        row["dipole_variance"] = obs["dipole_variance"]
        row["photon_number"] = obs["photon_number"][0]
        row["photon_number_dressed"] = obs.get("photon_number_dressed",
                                               obs["photon_number"])[0]
        _fill_distribution(row, obs["excitation_distribution"][0])
    elif method == "pzw-selfpol":
        h = exact.build_pzw_selfpol_hamiltonian(grid, v, ms, cfg.fd_order)
        energy, vec = exact.ground_state(h)
        row["energy"] = energy
        _fill_density_stats(row, vec, grid)
        row["photon_number"] = 0.0
        row["photon_number_dressed"] = 0.0
    elif method == "photon-free":
        h = photon_free.build_static_pf_free_hamiltonian(
            grid, v, ms, cfg.include_zero_point, cfg.fd_order)
        energy, vec = exact.ground_state(h)
        row["energy"] = energy
        rec = photon_free.reconstruct_photon_observables(vec, ms, grid, cfg.fd_order)
        row["photon_number"] = rec["photon_number"][0]
        row["photon_number_dressed"] = rec["photon_number_dressed"][0]
        if grid.is_dirichlet():
            _fill_density_stats(row, vec, grid)
    elif method == "pheg":
        ham = pheg.build_pheg_hamiltonian(grid, v, ms, cfg.max_n,
                                          cfg.pheg_potential_mode,
                                          cfg.include_zero_point)
        energy, amp = pheg.pheg_ground_state(ham)
        row["energy"] = energy
        row["photon_number"] = pheg.pheg_photon_number(amp, ham)[0]
        row["photon_number_dressed"] = float(
            np.dot(np.arange(ham.max_n + 1),
                   pheg.excitation_distribution(amp, ham)[0]))
        _fill_distribution(row, pheg.excitation_distribution(amp, ham)[0])
    elif method in ("qedft-px", "qedft-pxlda", "pxlda-maxwell"):
        functional = "px_orbital" if method == "qedft-px" else "pxlda"
        xc = qedft.XcConfig(functional=functional, kappa=kappa,
                            spin_factor=cfg.spin_factor,
                            mollify_external=cfg.mollify)
        ks = qedft.scf_solve(grid, v, ms, xc, fd_order=cfg.fd_order)
        row["energy"] = ks.energy
        row["scf_iterations"] = ks.iterations
        dip = integrate_density(ks.density, grid)
        row["dipole"], row["dipole_variance"] = dip
        rec = photon_free.reconstruct_photon_observables(
            ks.orbital, ms, grid, cfg.fd_order)
        row["photon_number"] = rec["photon_number"][0]
        row["photon_number_dressed"] = rec["photon_number_dressed"][0]
    elif method == "maxwell":
        h = exact.matter_hamiltonian(grid, v, cfg.fd_order)
        energy, vec = exact.ground_state(h)
        row["energy"] = energy  # classical field: no ground-state effect
        _fill_density_stats(row, vec, grid)
        row["photon_number"] = 0.0
        row["photon_number_dressed"] = 0.0
    else:
        raise SystemExit(f"unhandled method {method!r}")


def integrate_density(rho: np.ndarray, grid: Grid1D) -> tuple[float, float]:
    total = np.sum(rho) * grid.spacing
    mean = np.sum(rho * grid.coords) * grid.spacing / total
    var = np.sum(rho * grid.coords**2) * grid.spacing / total - mean**2
    return float(mean), float(var)


def _fill_density_stats(row, vec, grid) -> None:
    rho = np.abs(vec) ** 2
    row["dipole"], row["dipole_variance"] = integrate_density(rho, grid)


def _fill_distribution(row, dist) -> None:
    for i in range(EXC_COLUMNS):
        row[f"exc_p{i}"] = float(dist[i]) if i < len(dist) else 0.0


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if value is None:
        return "nan"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return _FLOAT_FMT.format(float(value))


def _write_csv(path: Path, cfg: RunConfig, columns: list[str],
               rows: list[dict]) -> None:
    lines = [f"# {line}" for line in cfg.describe()]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_format_cell(row.get(c)) for c in columns))
    path.write_text("\n".join(lines) + "\n")


def _pool_size() -> int:
    env = os.environ.get("QEDLAB_WORKERS")
    if env:
        return max(1, int(env))
    return max(1, (os.cpu_count() or 2) // 2)


def _ground_task(args):
    cfg, point = args
    return ground_point(cfg, point)


def run_ground(cfg: RunConfig, out_dir: Path) -> tuple[Path, int]:
    """Sweep all points for one method; returns (csv path, number of failures)."""
    points = _sweep_points(cfg)
    if any(len(vals) == 0 for vals in cfg.sweep.values()):
        raise SystemExit("empty sweep axis")
    workers = _pool_size()
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_ground_task, [(cfg, p) for p in points]))
    else:
        rows = [ground_point(cfg, p) for p in points]
    rows.sort(key=lambda r: (r["xi"], r["omega"], r["lambda"], r["kappa"]))
    path = out_dir / f"{cfg.label}.csv"
    _write_csv(path, cfg, GROUND_COLUMNS, rows)
    failures = sum(1 for r in rows if r["status"] != "ok")
    return path, failures


def emit_deviation_csv(label: str, configs: list[RunConfig], out_dir: Path) -> None:
    """If a variant named `reference` exists, emit |observable - reference| tables."""
    ref_cfg = next((c for c in configs if c.label.endswith("_reference")), None)
    if ref_cfg is None or ref_cfg.deviation_of is None:
        return
    column = ref_cfg.deviation_of
    ref_rows = _read_csv_rows(out_dir / f"{ref_cfg.label}.csv")
    ref_map = {(r["xi"], r["omega"], r["lambda"]): float(r[column])
               for r in ref_rows if r["status"] == "ok"}
    for cfg in configs:
        if cfg is ref_cfg:
            continue
        rows = _read_csv_rows(out_dir / f"{cfg.label}.csv")
        out_lines = [f"# deviation of {column} vs {ref_cfg.label}",
                     "lambda,omega,xi,deviation"]
        for r in rows:
            key = (r["xi"], r["omega"], r["lambda"])
            if r["status"] == "ok" and key in ref_map:
                dev = abs(float(r[column]) - ref_map[key])
                out_lines.append(",".join([r["lambda"], r["omega"], r["xi"],
                                           _FLOAT_FMT.format(dev)]))
        (out_dir / f"{cfg.label}_deviation.csv").write_text(
            "\n".join(out_lines) + "\n")


def _read_csv_rows(path: Path) -> list[dict]:
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    return [dict(zip(header, ln.split(","))) for ln in lines[1:]]


# ---------------------------------------------------------------------------
# spectrum runner

_SPECTRUM_SYSTEM = {
    "exact-pf": "exact_pf",
    "exact-pzw": "exact_pzw",
    "photon-free": "photon_free",
    "maxwell": "maxwell_classical",
    "pxlda-maxwell": "pxlda_maxwell",
}


def _spectrum_task(args):
    cfg, omega_cav = args
    grid = _make_grid(cfg)
    v = _make_potential(cfg, grid, cfg.xi)
    ratio = cfg.g_ratio if cfg.g_ratio is not None else 0.136
    lam = coupling_from_g_ratio(omega_cav, ratio)
    ms = single_mode(omega_cav, lam, cfg.n_electrons)
    kick = dynamics.KickProtocol(cfg.kick_strength, cfg.kick_center, cfg.kick_width)
    run = dynamics.SpectrumRun(cfg.dt, cfg.t_end, cfg.damping,
                               cfg.omega_response_max, cfg.record_stride)
    trunc = exact.FockTruncation(cfg.max_n)
    xc = None
    if cfg.method == "pxlda-maxwell":
        xc = qedft.XcConfig(functional="pxlda", kappa=cfg.kappa,
                            spin_factor=cfg.spin_factor)
    try:
        out = dynamics.kick_and_spectrum(_SPECTRUM_SYSTEM[cfg.method], grid, v, ms,
                                         trunc, kick, run, cfg.fd_order, xc)
        return (omega_cav, "ok", out["omega"], out["amplitude"],
                out["norm_drift"], out["energy_drift"])
    except Exception as err:  # noqa: BLE001
        return (omega_cav, f"failed({type(err).__name__}: {err})", None, None,
                np.nan, np.nan)


def cavity_omega_axis(cfg: RunConfig) -> np.ndarray:
    """Points in (omega_axis_min, omega_axis_max], evenly spaced."""
    n = cfg.omega_axis_points
    step = (cfg.omega_axis_max - cfg.omega_axis_min) / n
    return cfg.omega_axis_min + step * np.arange(1, n + 1)


def run_spectrum(cfg: RunConfig, out_dir: Path) -> tuple[Path, int]:
    if cfg.sweep.get("omega"):
        omegas = np.array(sorted(cfg.sweep["omega"]))
    elif isinstance(cfg.omega, (int, float)):
        omegas = np.array([float(cfg.omega)])
    else:
        omegas = cavity_omega_axis(cfg)
    workers = _pool_size()
    tasks = [(cfg, float(om)) for om in omegas]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_spectrum_task, tasks))
    else:
        results = [_spectrum_task(t) for t in tasks]

    omega_axis = next((r[2] for r in results if r[2] is not None), None)
    path = out_dir / f"{cfg.label}.csv"
    lines = [f"# {line}" for line in cfg.describe()]
    for om, status, *_rest, ndrift, edrift in results:
        lines.append(f"# point omega_cavity={_FLOAT_FMT.format(om)} status={status} "
                     f"norm_drift={ndrift:.3e} energy_drift={edrift:.3e}")
    if omega_axis is None:
        lines.append("omega")
        path.write_text("\n".join(lines) + "\n")
        return path, len(results)
    header = ["omega"] + ["d_omega_cav_" + _FLOAT_FMT.format(r[0]) for r in results]
    lines.append(",".join(header))
    for i, om in enumerate(omega_axis):
        cells = [_FLOAT_FMT.format(om)]
        for r in results:
            cells.append(_FLOAT_FMT.format(r[3][i]) if r[3] is not None else "nan")
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")
    _write_plot_script(path, cfg)
    failures = sum(1 for r in results if r[1] != "ok")
    return path, failures


def _write_plot_script(csv_path: Path, cfg: RunConfig) -> None:
    """Generated gnuplot text reproducing the heat-map style (not executed here)."""
    script = f"""\
# gnuplot script for {csv_path.name}: |d(omega)| map over cavity frequencies
set datafile separator ','
set datafile commentschars '#'
set pm3d map
set logscale cb
set xlabel 'cavity frequency (Ha)'
set ylabel 'response frequency (Ha)'
set title '{cfg.label}'
splot '{csv_path.name}' matrix nonuniform with image notitle
"""
    csv_path.with_suffix(".plot").write_text(script)


# ---------------------------------------------------------------------------
# validate

def validate(configs: list[RunConfig]) -> list[str]:
    report = []
    for cfg in configs:
        report.append(f"[{cfg.label}] method={cfg.method}")
        compatible = True
        if cfg.method in PERIODIC_ONLY and cfg.boundary != "periodic":
            report.append("  INCOMPATIBLE: requires a periodic grid")
            compatible = False
        if cfg.method in DIRICHLET_ONLY and cfg.boundary != "dirichlet":
            report.append("  INCOMPATIBLE: requires a dirichlet grid")
            compatible = False
        dim = cfg.n_points * (cfg.max_n + 1) if cfg.method.startswith("exact") \
            else cfg.n_points
        report.append(f"  coupled dimension {dim} "
                      f"(~{dim * dim * 16 / 1e6:.1f} MB dense, "
                      f"~{dim * 10 * 16 / 1e6:.2f} MB sparse)")
        if compatible:
            grid = _make_grid(cfg)
            v = _make_potential(cfg, grid, cfg.xi)
            points = _sweep_points(cfg)
            for point in points[:8]:
                omega = _resolve_omega(cfg, grid, v, point["omega"]
                                       if point["omega"] is not None else cfg.omega)
                try:
                    lam = _resolve_lambda(cfg, omega, point["lambda"])
                except SystemExit as err:
                    report.append(f"  point: {err}")
                    break
                ms = single_mode(omega, lam, cfg.n_electrons)
                report.append(
                    f"  point omega={omega:.6f} lambda={lam:.6f} -> "
                    f"dressed omega={ms.dressed_omegas[0]:.6f}")
            if len(points) > 8:
                report.append(f"  ... {len(points) - 8} more sweep points")
    return report


# ---------------------------------------------------------------------------
# entry point

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qedlab", description="cavity-QED benchmark experiment driver")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("ground", "spectrum", "validate"):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="INI config file")
        p.add_argument("--preset", default=None,
                       help="packaged preset name (fig2..fig10)")
        if name != "validate":
            p.add_argument("--out", default=".", help="output directory")
    args = parser.parse_args(argv)

    kind = "spectrum" if args.command == "spectrum" else "ground"
    label, configs = load_run_configs(args.preset, args.config, kind)

    if args.command == "validate":
        print("\n".join(validate(configs)))
        return 0

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    total_failures = 0
    for cfg in configs:
        runner = run_ground if args.command == "ground" else run_spectrum
        path, failures = runner(cfg, out_dir)
        total_failures += failures
        print(f"wrote {path} ({failures} failed points)")
    if args.command == "ground":
        emit_deviation_csv(label, configs, out_dir)
    return 1 if total_failures else 0


if __name__ == "__main__":
    sys.exit(main())
