"""Run configuration, persistence, and the limit studies.

Configs are flat ``key = value`` text with sections (INI style). A run
writes a versioned diagnostics CSV, per-snapshot field CSVs, and a JSON
sidecar with grid and parameter metadata; sweeps and comparisons add a JSON
report. All outputs are deterministic for a fixed config.
"""

from __future__ import annotations

import configparser
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .core import Field, Grid, GrowthLaw, ModelParams
from .diagnostics import DIAGNOSTICS_COLUMNS, DIAGNOSTICS_SCHEMA, BoundsReport, bounds_report
from .elliptic import EllipticConfig
from .galerkin import SpectralBasis, galerkin_stable_dt, initial_galerkin_state, simulate_galerkin
from .stepper import StepConfig, Trajectory, simulate, stable_dt, initial_state

__all__ = [
    "IcSpec",
    "RunConfig",
    "RunResult",
    "SweepReport",
    "EquivalenceReport",
    "GalerkinCompareReport",
    "load_config",
    "parse_overrides",
    "initial_field",
    "ic_profile_1d",
    "run",
    "sweep_sigma",
    "sweep_gamma",
    "equivalence_check",
    "galerkin_compare",
    "write_diagnostics_csv",
    "write_snapshot_csv",
]

THREAD_ENV = "RDCH_THREADS"
SNAPSHOT_SCHEMA = "rdch-snapshot-v1"
REPORT_SCHEMA = "rdch-report-v1"

_IC_KINDS = ("constant", "cosine_bump", "tanh_interface", "random_smooth")


@dataclass(frozen=True)
class IcSpec:
    """Named initial-profile generators; densities start in [0, 1] by default."""

    kind: str = "cosine_bump"
    constant: float = 0.5
    baseline: float = 0.5
    amplitude: float = 0.3
    frequency: int = 1
    center: float = 0.5
    width: float = 0.05
    seed: int = 0
    cutoff: int = 6
    allow_above_one: bool = False

    def __post_init__(self):
        if self.kind not in _IC_KINDS:
            raise ValueError(f"initial kind must be one of {_IC_KINDS}")
        if self.cutoff < 1 or self.frequency < 0:
            raise ValueError("cutoff and frequency must be positive")


def ic_profile_1d(ic: IcSpec, length: float):
    """Callable x -> n0(x) shared by the grid sampler and the spectral projector."""
    if ic.kind == "constant":
        return lambda x: np.full_like(np.asarray(x, float), ic.constant)
    if ic.kind == "cosine_bump":
        k = ic.frequency * math.pi / length
        return lambda x: ic.baseline + ic.amplitude * np.cos(k * np.asarray(x, float))
    if ic.kind == "tanh_interface":
        return lambda x: ic.baseline + ic.amplitude * 0.5 * (
            1.0 - np.tanh((np.asarray(x, float) - ic.center) / ic.width))
    # random_smooth: a seeded low-wavenumber cosine sum, normalized to the amplitude
    rng = np.random.default_rng(ic.seed)
    ks = np.arange(1, ic.cutoff + 1)
    coeffs = rng.standard_normal(ic.cutoff) / (1.0 + ks) ** 2
    sample = np.linspace(0.0, length, 4097)
    raw_sample = np.cos(np.outer(sample, ks * math.pi / length)) @ coeffs
    scale = float(np.max(np.abs(raw_sample))) or 1.0

    def profile(x):
        raw = np.cos(np.outer(np.atleast_1d(np.asarray(x, float)), ks * math.pi / length)) @ coeffs
        out = ic.baseline + ic.amplitude * raw / scale
        return out.reshape(np.shape(x))

    return profile


def initial_field(ic: IcSpec, grid: Grid) -> Field:
    if grid.dim == 1:
        vals = ic_profile_1d(ic, grid.extents[0])(grid.centers(0))
    else:
        X, Y = grid.meshgrid()
        Lx, Ly = grid.extents
        if ic.kind == "constant":
            vals = np.full(grid.shape, ic.constant)
        elif ic.kind == "cosine_bump":
            vals = ic.baseline + ic.amplitude * (np.cos(ic.frequency * math.pi * X / Lx)
                                                 * np.cos(ic.frequency * math.pi * Y / Ly))
        elif ic.kind == "tanh_interface":
            vals = ic.baseline + ic.amplitude * 0.5 * (1.0 - np.tanh((X - ic.center) / ic.width))
        else:
            rng = np.random.default_rng(ic.seed)
            vals = np.zeros(grid.shape)
            for kx in range(ic.cutoff + 1):
                for ky in range(ic.cutoff + 1):
                    if kx == 0 and ky == 0:
                        continue
                    a = rng.standard_normal() / (1.0 + kx + ky) ** 2
                    vals += a * np.cos(kx * math.pi * X / Lx) * np.cos(ky * math.pi * Y / Ly)
            scale = float(np.max(np.abs(vals))) or 1.0
            vals = ic.baseline + ic.amplitude * vals / scale
    vals = np.asarray(vals, dtype=float)
    if float(vals.min()) < -1e-12:
        raise ValueError("initial density must be nonnegative")
    if not ic.allow_above_one and float(vals.max()) > 1.0 + 1e-12:
        raise ValueError("initial density exceeds 1; set initial.allow_above_one to override")
    return Field(grid, np.maximum(vals, 0.0))


@dataclass(frozen=True)
class RunConfig:
    grid: Grid
    params: ModelParams
    step: StepConfig
    elliptic: EllipticConfig
    ic: IcSpec
    record_stride: int = 100
    snapshot_times: tuple = ("begin", "end")
    track_identities: bool = False
    store_fields: bool = False
    sweep_sigmas: tuple[float, ...] = (1e-1, 1e-2, 1e-3)
    sweep_gammas: tuple[float, ...] = (5.0, 20.0, 80.0)
    galerkin_modes: int = 32
    galerkin_dt: float | None = None

    def resolved_snapshot_times(self) -> tuple[float, ...]:
        out = []
        for s in self.snapshot_times:
            if s == "begin":
                out.append(0.0)
            elif s == "end":
                out.append(self.step.t_end)
            else:
                out.append(float(s))
        return tuple(sorted(set(out)))


_DEFAULTS: dict[str, dict[str, str]] = {
    "grid": {"dim": "1", "length_x": "1.0", "cells_x": "256",
             "length_y": "1.0", "cells_y": "64"},
    "model": {"sigma": "1.0", "delta": "1.0", "gamma": "4.0", "eps_mobility": "0.0",
              "growth_kind": "zero", "growth_amplitude": "1.0", "growth_mu_h": "1.0"},
    "stepping": {"formulation": "ch", "dt_init": "1e-3", "cfl_safety": "0.4",
                 "dt_min": "1e-13", "t_end": "1.0", "mobility_mode": "degenerate",
                 "face_mobility": "upwind", "dt_policy": "adaptive",
                 "dt_refresh_every": "1", "positivity_clip_report": "false"},
    "elliptic": {"newton_tol": "1e-10", "newton_max_iter": "50", "damping": "1.0",
                 "linear_tol": "1e-12"},
    "initial": {"kind": "cosine_bump", "constant": "0.5", "baseline": "0.5",
                "amplitude": "0.3", "frequency": "1", "center": "0.5", "width": "0.05",
                "seed": "0", "cutoff": "6", "allow_above_one": "false"},
    "output": {"record_stride": "100", "snapshot_times": "begin,end",
               "track_identities": "false", "store_fields": "false"},
    "sweep": {"sigmas": "1e-1,1e-2,1e-3", "gammas": "5,20,80"},
    "galerkin": {"modes": "32", "dt": "auto"},
}


def parse_overrides(pairs) -> dict[tuple[str, str], str]:
    out = {}
    for raw in pairs or ():
        if "=" not in raw or "." not in raw.split("=", 1)[0]:
            raise ValueError(f"override must look like section.key=value, got {raw!r}")
        key, value = raw.split("=", 1)
        section, name = key.split(".", 1)
        out[(section.strip(), name.strip())] = value.strip()
    return out


def _as_bool(s: str) -> bool:
    if s.lower() in ("true", "1", "yes", "on"):
        return True
    if s.lower() in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def load_config(path: str | Path | None = None, overrides=()) -> RunConfig:
    """Read an INI config (or the defaults) and apply section.key=value overrides."""
    table = {sec: dict(vals) for sec, vals in _DEFAULTS.items()}
    if path is not None:
        cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        read = cp.read(str(path))
        if not read:
            raise FileNotFoundError(f"config file {path} not found")
        for sec in cp.sections():
            if sec not in table:
                raise ValueError(f"unknown config section [{sec}]")
            for key, value in cp.items(sec):
                if key not in table[sec]:
                    raise ValueError(f"unknown config key {sec}.{key}")
                table[sec][key] = value
    for (sec, key), value in parse_overrides(overrides).items():
        if sec not in table or key not in table[sec]:
            raise ValueError(f"unknown override target {sec}.{key}")
        table[sec][key] = value
    return _build_config(table)


def _build_config(t: dict[str, dict[str, str]]) -> RunConfig:
    g = t["grid"]
    dim = int(g["dim"])
    if dim == 1:
        grid = Grid.interval(float(g["length_x"]), int(g["cells_x"]))
    elif dim == 2:
        grid = Grid.rectangle((float(g["length_x"]), float(g["length_y"])),
                              (int(g["cells_x"]), int(g["cells_y"])))
    else:
        raise ValueError("grid.dim must be 1 or 2")
    m = t["model"]
    if m["growth_kind"] == "zero":
        growth = GrowthLaw.none()
    else:
        growth = GrowthLaw.homeostatic(float(m["growth_amplitude"]), float(m["growth_mu_h"]))
    params = ModelParams(sigma=float(m["sigma"]), delta=float(m["delta"]),
                         gamma=float(m["gamma"]), eps_mobility=float(m["eps_mobility"]),
                         growth=growth)
    s = t["stepping"]
    step = StepConfig(formulation=s["formulation"], dt_init=float(s["dt_init"]),
                      cfl_safety=float(s["cfl_safety"]), dt_min=float(s["dt_min"]),
                      t_end=float(s["t_end"]), mobility_mode=s["mobility_mode"],
                      face_mobility=s["face_mobility"], dt_policy=s["dt_policy"],
                      dt_refresh_every=int(s["dt_refresh_every"]),
                      positivity_clip_report=_as_bool(s["positivity_clip_report"]))
    e = t["elliptic"]
    elliptic = EllipticConfig(newton_tol=float(e["newton_tol"]),
                              newton_max_iter=int(e["newton_max_iter"]),
                              damping=float(e["damping"]),
                              linear_tol=float(e["linear_tol"]))
    i = t["initial"]
    ic = IcSpec(kind=i["kind"], constant=float(i["constant"]), baseline=float(i["baseline"]),
                amplitude=float(i["amplitude"]), frequency=int(i["frequency"]),
                center=float(i["center"]), width=float(i["width"]), seed=int(i["seed"]),
                cutoff=int(i["cutoff"]), allow_above_one=_as_bool(i["allow_above_one"]))
    o = t["output"]
    snapshot_times = tuple(tok.strip() for tok in o["snapshot_times"].split(",") if tok.strip())
    sw = t["sweep"]
    gal = t["galerkin"]
    gal_dt = None if gal["dt"].strip() == "auto" else float(gal["dt"])
    return RunConfig(
        grid=grid, params=params, step=step, elliptic=elliptic, ic=ic,
        record_stride=int(o["record_stride"]),
        snapshot_times=snapshot_times,
        track_identities=_as_bool(o["track_identities"]),
        store_fields=_as_bool(o["store_fields"]),
        sweep_sigmas=tuple(float(v) for v in sw["sigmas"].split(",") if v.strip()),
        sweep_gammas=tuple(float(v) for v in sw["gammas"].split(",") if v.strip()),
        galerkin_modes=int(gal["modes"]),
        galerkin_dt=gal_dt,
    )


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_diagnostics_csv(path: Path, records) -> None:
    with open(path, "w", newline="") as f:
        f.write(",".join(DIAGNOSTICS_COLUMNS) + "\n")
        for r in records:
            f.write(",".join(_fmt(v) for v in r.as_row()) + "\n")


def write_snapshot_csv(path: Path, state) -> None:
    grid = state.grid
    cols = []
    if grid.dim == 1:
        header = "x,n,w,mu,p"
        cols.append(grid.centers(0))
    else:
        header = "x,y,n,w,mu,p"
        X, Y = grid.meshgrid()
        cols.extend([X.ravel(), Y.ravel()])
    cols.extend([state.n.values.ravel(), state.w.values.ravel(),
                 state.mu.values.ravel(), state.p.values.ravel()])
    with open(path, "w", newline="") as f:
        f.write(header + "\n")
        for row in zip(*cols):
            f.write(",".join(_fmt(v) for v in row) + "\n")


def _config_dict(config: RunConfig) -> dict:
    d = {
        "grid": {"dim": config.grid.dim, "extents": list(config.grid.extents),
                 "cells": list(config.grid.cells)},
        "model": asdict(config.params),
        "stepping": asdict(config.step),
        "elliptic": asdict(config.elliptic),
        "initial": asdict(config.ic),
        "output": {"record_stride": config.record_stride,
                   "snapshot_times": list(config.snapshot_times),
                   "track_identities": config.track_identities,
                   "store_fields": config.store_fields},
    }
    return d


def _write_meta(out_dir: Path, config: RunConfig, snapshots, traj: Trajectory,
                bounds: BoundsReport) -> Path:
    meta = {
        "schema": {"diagnostics": DIAGNOSTICS_SCHEMA, "snapshot": SNAPSHOT_SCHEMA,
                   "report": REPORT_SCHEMA},
        "version": __version__,
        "config": _config_dict(config),
        "snapshots": snapshots,
        "summary": {
            "total_steps": traj.total_steps,
            "mass0": traj.mass0,
            "n_min_overall": traj.n_min_overall,
            "negative_steps": traj.negative_steps,
            "violations": bounds.violations,
        },
    }
    path = out_dir / "meta.json"
    path.write_text(json.dumps(meta, indent=2, sort_keys=True))
    return path


@dataclass
class RunResult:
    config: RunConfig
    trajectory: Trajectory
    bounds: BoundsReport
    out_dir: Path | None = None
    diagnostics_path: Path | None = None
    snapshot_paths: tuple[Path, ...] = ()

    @property
    def exit_code(self) -> int:
        return 2 if self.bounds.violations else 0


def run(config: RunConfig, out_dir: str | Path | None = None) -> RunResult:
    """Simulate one config and optionally persist the CSV/JSON artifacts."""
    n0 = initial_field(config.ic, config.grid)
    traj = simulate(n0, config.params, config.step,
                    elliptic_cfg=config.elliptic,
                    record_stride=config.record_stride,
                    snapshot_times=config.resolved_snapshot_times(),
                    track_identities=config.track_identities,
                    store_fields=config.store_fields)
    bounds = bounds_report(traj, config.params)
    result = RunResult(config=config, trajectory=traj, bounds=bounds)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        diag = out / "diagnostics.csv"
        write_diagnostics_csv(diag, traj.records)
        snap_paths = []
        snap_meta = []
        for idx, snap in enumerate(traj.snapshots):
            p = out / f"snapshot_{idx:04d}.csv"
            write_snapshot_csv(p, snap)
            snap_paths.append(p)
            snap_meta.append({"file": p.name, "t": snap.t})
        _write_meta(out, config, snap_meta, traj, bounds)
        result.out_dir = out
        result.diagnostics_path = diag
        result.snapshot_paths = tuple(snap_paths)
    return result


def _thread_count(n_jobs: int) -> int:
    env = os.environ.get(THREAD_ENV)
    if env:
        return max(1, min(int(env), n_jobs))
    return max(1, min(4, n_jobs))


def _run_many(configs: list[RunConfig], out_dirs: list[Path | None]) -> list[RunResult]:
    with ThreadPoolExecutor(max_workers=_thread_count(len(configs))) as pool:
        futures = [pool.submit(run, cfg, od) for cfg, od in zip(configs, out_dirs)]
        return [f.result() for f in futures]


def _grad_gap_l2(state, grid: Grid) -> float:
    """L2 face-difference distance between grad w and grad n."""
    total = 0.0
    for axis, h in enumerate(grid.spacings):
        d = (np.diff(state.w.values, axis=axis) - np.diff(state.n.values, axis=axis)) / h
        total += float(np.sum(d * d))
    return math.sqrt(grid.cell_volume * total)


@dataclass
class SweepReport:
    parameter: str
    values: list[float]
    metrics: dict[str, list[float]]
    ratios: dict[str, list[float]]
    flags: list[str]

    @property
    def ok(self) -> bool:
        return not self.flags

    def to_json(self) -> str:
        return json.dumps({"schema": REPORT_SCHEMA, "parameter": self.parameter,
                           "values": self.values, "metrics": self.metrics,
                           "ratios": self.ratios, "flags": self.flags},
                          indent=2, sort_keys=True)


def _successive_ratios(values: list[float]) -> list[float]:
    out = []
    for a, b in zip(values, values[1:]):
        out.append(a / b if b != 0 else math.inf)
    return out


def sweep_sigma(config: RunConfig, sigmas=None, out_dir: str | Path | None = None) -> SweepReport:
    """Vanishing-relaxation study against the sigma = 0 reference run."""
    sigmas = list(config.sweep_sigmas if sigmas is None else sigmas)
    if not sigmas or any(s <= 0 for s in sigmas):
        raise ValueError("sigma list must be positive")
    if not all(a > b for a, b in zip(sigmas, sigmas[1:])):
        raise ValueError("sigma list must be strictly decreasing")
    if config.step.formulation != "ch":
        raise ValueError("the sigma sweep compares against the sigma = 0 limit; "
                         "use the potential formulation")
    members = [replace(config, params=replace(config.params, sigma=s)) for s in sigmas]
    reference = replace(config, params=replace(config.params, sigma=0.0))
    out = Path(out_dir) if out_dir is not None else None
    dirs: list[Path | None] = [out / f"sigma_{s:g}" if out else None for s in sigmas]
    dirs.append(out / "sigma_0" if out else None)
    results = _run_many(members + [reference], dirs)
    ref_n = results[-1].trajectory.final_state.n
    distances = []
    mu_scaled = []
    wgrad_gap = []
    for res, s in zip(results[:-1], sigmas):
        fin = res.trajectory.final_state
        d = fin.n.values - ref_n.values
        distances.append(math.sqrt(config.grid.cell_volume * float(np.sum(d * d))))
        scaled = (s / config.params.delta) * fin.mu.values
        mu_scaled.append(math.sqrt(config.grid.cell_volume * float(np.sum(scaled * scaled))))
        wgrad_gap.append(_grad_gap_l2(fin, config.grid))
    flags = []
    if not all(a > b for a, b in zip(distances, distances[1:])):
        flags.append("distance_to_reference_not_decreasing")
    if not all(a > b for a, b in zip(mu_scaled, mu_scaled[1:])):
        flags.append("scaled_potential_not_decreasing")
    for res in results:
        flags.extend(f"member_{res.config.params.sigma:g}:{v}" for v in res.bounds.violations)
    report = SweepReport(
        parameter="sigma", values=sigmas,
        metrics={"distance_to_reference": distances,
                 "scaled_potential_l2": mu_scaled,
                 "w_gradient_gap": wgrad_gap},
        ratios={"distance_to_reference": _successive_ratios(distances)},
        flags=flags)
    if out is not None:
        (out / "report.json").write_text(report.to_json())
    return report


def sweep_gamma(config: RunConfig, gammas=None, out_dir: str | Path | None = None) -> SweepReport:
    """Stiff-pressure study: max(w) approaches 1 and p (w - 1) approaches 0."""
    gammas = list(config.sweep_gammas if gammas is None else gammas)
    if not gammas or any(g <= 1 for g in gammas):
        raise ValueError("gamma list entries must exceed 1")
    if not all(a < b for a, b in zip(gammas, gammas[1:])):
        raise ValueError("gamma list must be strictly increasing")
    members = [replace(config, params=replace(config.params, gamma=g)) for g in gammas]
    out = Path(out_dir) if out_dir is not None else None
    dirs = [out / f"gamma_{g:g}" if out else None for g in gammas]
    results = _run_many(members, dirs)
    max_w = []
    compl = []
    p_inf = []
    for res in results:
        rec = res.trajectory.records[-1]
        max_w.append(rec.w_max)
        compl.append(rec.complementarity)
        p_inf.append(rec.p_max)
    flags = []
    if len(gammas) > 1:
        # only the positive excess matters for the stiff limit sup w <= 1
        excess = [max(w - 1.0, 0.0) for w in max_w]
        if not all(a >= b - 1e-12 for a, b in zip(excess, excess[1:])):
            flags.append("w_excess_not_decreasing")
        if not all(a > b for a, b in zip(compl, compl[1:])):
            flags.append("complementarity_not_decreasing")
    if max_w[-1] > 1.0 + 0.1:
        flags.append("terminal_w_exceeds_limit")
    for res, g in zip(results, gammas):
        flags.extend(f"member_{g:g}:{v}" for v in res.bounds.violations)
    report = SweepReport(
        parameter="gamma", values=gammas,
        metrics={"terminal_max_w": max_w, "terminal_complementarity": compl,
                 "terminal_pressure_inf": p_inf},
        ratios={"terminal_complementarity": _successive_ratios(compl)} if len(gammas) > 1 else {},
        flags=flags)
    if out is not None:
        (out / "report.json").write_text(report.to_json())
    return report


@dataclass
class EquivalenceReport:
    cells: list[int]
    differences_inf: list[float]
    refinement_ratio: float
    mu_crosscheck_max: float
    dts: list[float]
    flags: list[str]

    @property
    def ok(self) -> bool:
        return not self.flags

    def to_json(self) -> str:
        return json.dumps({"schema": REPORT_SCHEMA, **asdict(self)}, indent=2, sort_keys=True)


def equivalence_check(config: RunConfig, out_dir: str | Path | None = None) -> EquivalenceReport:
    """Run both formulations at matched fixed dt on a grid pair and compare."""
    if not config.params.is_relaxed:
        raise ValueError("the chemotaxis form needs sigma > 0")
    cells_list = [config.grid.cells[0], 2 * config.grid.cells[0]]
    diffs = []
    dts = []
    cross = 0.0
    for cells in cells_list:
        grid = (Grid.interval(config.grid.extents[0], cells) if config.grid.dim == 1
                else Grid.rectangle(config.grid.extents, (cells, cells)))
        n0 = initial_field(config.ic, grid)
        state0 = initial_state(n0, config.params, config.elliptic)
        dt_bound = min(
            stable_dt(state0, config.params, replace(config.step, formulation="ch")),
            stable_dt(state0, config.params, replace(config.step, formulation="ks")))
        dt = 0.8 * dt_bound
        dts.append(dt)
        trajs = {}
        for form in ("ch", "ks"):
            cfg = replace(config.step, formulation=form, dt_policy="fixed", dt_init=dt)
            trajs[form] = simulate(n0, config.params, cfg, elliptic_cfg=config.elliptic,
                                   record_stride=config.record_stride)
            residuals = trajs[form].record_array("elliptic_residual")
            cross = max(cross, (config.params.delta / config.params.sigma)
                        * float(np.max(residuals)))
        d = trajs["ks"].final_state.n.values - trajs["ch"].final_state.n.values
        diffs.append(float(np.max(np.abs(d))))
    ratio = diffs[0] / diffs[1] if diffs[1] > 0 else math.inf
    tol_cross = 10.0 * (config.params.delta / config.params.sigma) * config.elliptic.newton_tol
    flags = []
    if ratio < 2.0:
        flags.append("refinement_ratio_below_2")
    if cross > tol_cross:
        flags.append("potential_crosscheck_exceeds_tolerance")
    report = EquivalenceReport(cells=cells_list, differences_inf=diffs,
                               refinement_ratio=ratio, mu_crosscheck_max=cross,
                               dts=dts, flags=flags)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(report.to_json())
    return report


@dataclass
class GalerkinCompareReport:
    modes: int
    cells: int
    relative_l2: float
    fv_steps: int
    spectral_dt: float
    flags: list[str]

    @property
    def ok(self) -> bool:
        return not self.flags

    def to_json(self) -> str:
        return json.dumps({"schema": REPORT_SCHEMA, **asdict(self)}, indent=2, sort_keys=True)


def galerkin_compare(config: RunConfig, out_dir: str | Path | None = None,
                     tol: float = 1e-2) -> GalerkinCompareReport:
    """Cross-validate the grid solver against the spectral one on an interval."""
    if config.grid.dim != 1:
        raise ValueError("the spectral comparison is 1D only")
    if config.params.eps_mobility <= 0 or config.step.mobility_mode != "regularized":
        raise ValueError("the spectral layer needs a regularized mobility; set "
                         "model.eps_mobility > 0 and stepping.mobility_mode=regularized")
    fv = run(config)
    basis = SpectralBasis(config.grid.extents[0], config.galerkin_modes)
    profile = ic_profile_1d(config.ic, config.grid.extents[0])
    eps = config.params.eps_mobility
    if config.galerkin_dt is not None:
        dt = config.galerkin_dt
    else:
        state0 = initial_galerkin_state(profile, basis, config.params)
        dt = 0.5 * galerkin_stable_dt(state0, basis, config.params, eps)
    n_steps = max(1, int(math.ceil(config.step.t_end / dt)))
    dt = config.step.t_end / n_steps
    spec = simulate_galerkin(profile, basis, config.params, eps, dt, config.step.t_end)
    centers = config.grid.centers(0)
    spectral_n = basis.eval_at(spec.coeffs[-1], centers)
    fv_n = fv.trajectory.final_state.n.values
    num = float(np.sqrt(np.sum((spectral_n - fv_n) ** 2)))
    den = float(np.sqrt(np.sum(fv_n ** 2))) or 1.0
    rel = num / den
    flags = [] if rel <= tol else ["spectral_fv_distance_exceeds_tolerance"]
    report = GalerkinCompareReport(modes=config.galerkin_modes, cells=config.grid.cells[0],
                                   relative_l2=rel, fv_steps=fv.trajectory.total_steps,
                                   spectral_dt=dt, flags=flags)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(report.to_json())
    return report
