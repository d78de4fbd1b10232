"""Config-driven scenario runs: CSV time series, sweep grids, summaries.

A scenario file is flat ``key = value`` text with dotted section names
(see ``configs/`` for the shipped recipes); CLI flags override file
values.  Every run is a fixed-step integration with no randomness, so
repeated runs of one config produce bit-identical CSVs; floats are
written with 17 significant digits to make that checkable.

Exit-code contract used by the CLI: 0 success, 2 config validation
failure, 3 runtime invariant breach.
"""

import json
from dataclasses import asdict, dataclass, replace
from functools import partial
from multiprocessing import Pool
from pathlib import Path

import numpy as np

from .dynamics import DissipationParams, evolve_lindblad, evolve_schrodinger
from .errors import ConfigValidationError, SimulationError, TruncationOverflowError
from .hilbert import SpaceSignature, annihilation, basis_state, embed, sigma_minus
from .model import ThreeLevelBasis, free_energy_diagonal, h_int3, h_tqd_closed
from .observables import populations, with_fidelity
from .pulse import PulseSchedule

SCENARIO_NAMES = ("fig2", "fig4", "fig5", "fig6", "custom")
ENGINE_NAMES = ("schrodinger", "lindblad")
TOP_PHONON_LIMIT = 1e-4
POPULATION_LOW, POPULATION_HIGH = -1e-9, 1.0 + 1e-9

_DEFAULT_V = (0.25, 0.75, 1.5, 2.0)
_DEFAULT_DISSIPATION = DissipationParams(0.005, 0.005, 5e-5, 50.0)

_PRESETS = {
    "fig2": dict(v_list=_DEFAULT_V, engine="schrodinger", tqd=False, diagonal=True),
    "fig4": dict(v_list=_DEFAULT_V, engine="schrodinger", tqd=True, diagonal=False),
    "fig5": dict(v_list=(0.25, 0.75), engine="lindblad", tqd=True, diagonal=False,
                 dissipation=_DEFAULT_DISSIPATION),
    "fig6": dict(v_list=(0.75,), engine="lindblad", tqd=True, diagonal=False,
                 dissipation=_DEFAULT_DISSIPATION),
    "custom": dict(),
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved description of one scenario run."""

    scenario: str
    v_list: tuple = _DEFAULT_V
    gamma: float = 20.0
    g_max: float = 1.0
    omega_m: float = 1.0
    omega_q: float = 1.0
    engine: str = "schrodinger"
    tqd: bool = False
    diagonal: bool = False
    dissipation: DissipationParams = DissipationParams(0.0, 0.0, 0.0, 0.0)
    n_c: int = 2
    n_m: int = 6
    dt: float = 1e-3
    stride: int = 10
    t_end_factor: float = 12.0
    sweep_kappa: tuple = (0.0, 0.05)
    sweep_gamma_q: tuple = (0.0, 0.05)
    sweep_resolution: int = 11
    out_dir: str = "out"

    def violations(self) -> list:
        bad = []
        if self.scenario not in SCENARIO_NAMES:
            bad.append(f"scenario must be one of {SCENARIO_NAMES}, got {self.scenario!r}")
        if self.engine not in ENGINE_NAMES:
            bad.append(f"engine must be one of {ENGINE_NAMES}, got {self.engine!r}")
        if not self.v_list:
            bad.append("v_list must not be empty")
        if any(v <= 0 for v in self.v_list):
            bad.append(f"all v values must be positive, got {self.v_list}")
        if self.gamma <= 0:
            bad.append(f"gamma must be positive, got {self.gamma}")
        if self.g_max <= 0:
            bad.append(f"g_max must be positive, got {self.g_max}")
        if self.omega_m <= 0:
            bad.append(f"omega_m must be positive, got {self.omega_m}")
        if self.scenario == "fig2" and self.tqd:
            bad.append("fig2 is the plain adiabatic scenario: tqd must be false")
        if self.scenario == "fig4" and not self.tqd:
            bad.append("fig4 is the counter-diabatic scenario: tqd must be true")
        if self.scenario in ("fig5", "fig6"):
            if self.engine != "lindblad":
                bad.append(f"{self.scenario} requires engine=lindblad")
            if not self.tqd:
                bad.append(f"{self.scenario} requires tqd=true")
        if self.scenario != "custom" and self.omega_m != self.omega_q:
            bad.append(
                f"{self.scenario} declares the resonant point: omega_m must equal "
                f"omega_q, got {self.omega_m} and {self.omega_q}"
            )
        if self.scenario == "fig6":
            if self.sweep_resolution < 2:
                bad.append(f"fig6 grid resolution must be >= 2, got {self.sweep_resolution}")
            for name, rng in (("kappa", self.sweep_kappa), ("gamma_q", self.sweep_gamma_q)):
                if rng[0] < 0 or rng[1] < rng[0]:
                    bad.append(f"sweep {name} range must satisfy 0 <= min <= max, got {rng}")
        if self.n_c < 2 or self.n_m < 2:
            bad.append(f"truncations must be >= 2, got n_c={self.n_c}, n_m={self.n_m}")
        if self.dt <= 0:
            bad.append(f"dt must be positive, got {self.dt}")
        if self.stride < 1:
            bad.append(f"stride must be >= 1, got {self.stride}")
        if self.t_end_factor <= 0:
            bad.append(f"t_end_factor must be positive, got {self.t_end_factor}")
        return bad

    def validate(self):
        bad = self.violations()
        if bad:
            raise ConfigValidationError(bad)


def _parse_bool(key, text):
    lowered = text.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ConfigValidationError([f"{key}: expected a boolean, got {text!r}"])


def _parse_float(key, text):
    try:
        return float(text)
    except ValueError:
        raise ConfigValidationError([f"{key}: expected a number, got {text!r}"]) from None


def _parse_int(key, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigValidationError([f"{key}: expected an integer, got {text!r}"]) from None


def _parse_float_list(key, text):
    return tuple(_parse_float(key, part.strip()) for part in text.split(",") if part.strip())


def load_config_entries(path) -> dict:
    """Read a flat key=value config file; '#' starts a comment."""
    entries = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigValidationError([f"{path}:{lineno}: expected 'key = value', got {raw!r}"])
        key, value = line.split("=", 1)
        entries[key.strip()] = value.strip()
    return entries


def config_from_file(path, scenario=None, v_list=None, out_dir=None) -> ScenarioConfig:
    """Build a ScenarioConfig from a file plus optional CLI overrides.

    Precedence: scenario preset < file keys < explicit overrides.
    """
    entries = load_config_entries(path)
    name = scenario or entries.get("scenario")
    if name is None:
        raise ConfigValidationError([f"{path}: missing 'scenario' key (or --scenario flag)"])
    if name not in _PRESETS:
        raise ConfigValidationError([f"scenario must be one of {SCENARIO_NAMES}, got {name!r}"])

    fields = dict(scenario=name)
    fields.update(_PRESETS[name])

    base_diss = fields.get("dissipation", ScenarioConfig.dissipation)
    diss = {"kappa": base_diss.kappa, "gamma_q": base_diss.gamma_q,
            "gamma_m": base_diss.gamma_m, "n_th": base_diss.n_th}
    simple = {
        "pulse.v": ("v_list", _parse_float_list),
        "pulse.gamma": ("gamma", _parse_float),
        "pulse.g_max": ("g_max", _parse_float),
        "model.omega_m": ("omega_m", _parse_float),
        "model.omega_q": ("omega_q", _parse_float),
        "engine": ("engine", lambda k, v: v),
        "tqd": ("tqd", _parse_bool),
        "diagonal": ("diagonal", _parse_bool),
        "truncation.n_c": ("n_c", _parse_int),
        "truncation.n_m": ("n_m", _parse_int),
        "run.dt": ("dt", _parse_float),
        "run.stride": ("stride", _parse_int),
        "run.t_end_factor": ("t_end_factor", _parse_float),
        "output.dir": ("out_dir", lambda k, v: v),
        "sweep.resolution": ("sweep_resolution", _parse_int),
    }
    sweep_bounds = {
        "sweep.kappa_min": ("sweep_kappa", 0),
        "sweep.kappa_max": ("sweep_kappa", 1),
        "sweep.gamma_q_min": ("sweep_gamma_q", 0),
        "sweep.gamma_q_max": ("sweep_gamma_q", 1),
    }
    for key, value in entries.items():
        if key == "scenario":
            continue
        if key in simple:
            field_name, parse = simple[key]
            fields[field_name] = parse(key, value)
        elif key.startswith("dissipation."):
            channel = key.split(".", 1)[1]
            if channel not in diss:
                raise ConfigValidationError([f"unknown config key {key!r}"])
            diss[channel] = _parse_float(key, value)
        elif key in sweep_bounds:
            field_name, pos = sweep_bounds[key]
            bounds = list(fields.get(field_name, getattr(ScenarioConfig, field_name)))
            bounds[pos] = _parse_float(key, value)
            fields[field_name] = tuple(bounds)
        else:
            raise ConfigValidationError([f"unknown config key {key!r}"])

    try:
        fields["dissipation"] = DissipationParams(**diss)
    except ValueError as exc:
        raise ConfigValidationError([str(exc)]) from None

    if v_list is not None:
        fields["v_list"] = tuple(float(v) for v in v_list)
    if out_dir is not None:
        fields["out_dir"] = str(out_dir)
    config = ScenarioConfig(**fields)
    config.validate()
    return config


def _h3_callback(config: ScenarioConfig, schedule: PulseSchedule):
    diag = free_energy_diagonal(config.omega_m, config.omega_q) if config.diagonal else None
    tqd = config.tqd

    def h(t):
        out = h_int3(schedule, t)
        if diag is not None:
            out = out + diag
        if tqd:
            out = out + h_tqd_closed(schedule, t)
        return out

    return h


@dataclass(frozen=True)
class RunResult:
    """Observables and diagnostics of a single (scenario, v) run."""

    v: float
    times: np.ndarray
    p_phi1: np.ndarray
    p_phi2: np.ndarray
    p_phi3: np.ndarray
    norm_or_trace: np.ndarray
    fidelity: np.ndarray | None
    diagnostics: dict


def run_single(config: ScenarioConfig, v: float) -> RunResult:
    """Run one rapidity value of a scenario and collect observables."""
    schedule = PulseSchedule(v=v, gamma=config.gamma, g_max=config.g_max)
    t_span = (0.0, config.t_end_factor / v)
    h3 = _h3_callback(config, schedule)

    if config.engine == "schrodinger":
        basis = ThreeLevelBasis.bare()
        psi0 = basis_state(basis.signature, (0,))
        traj = evolve_schrodinger(h3, psi0, t_span, config.dt, config.stride)
        record = populations(traj, basis)
        drift = float(np.abs(traj.norm_or_trace - 1.0).max())
        diagnostics = {"max_abs_drift": drift}
        fid = None
    else:
        sig = SpaceSignature.cavity_phonon_qubit(config.n_c, config.n_m)
        basis = ThreeLevelBasis.in_space(sig)
        dim = sig.total_dim
        block = np.ix_(basis.indices, basis.indices)

        def h_lifted(t):
            out = np.zeros((dim, dim), dtype=complex)
            out[block] = h3(t)
            return out

        a = embed(annihilation(config.n_c), 0, sig)
        b = embed(annihilation(config.n_m), 1, sig)
        sm = embed(sigma_minus(), 2, sig)
        rho0 = basis_state(sig, (1, 0, 0)).to_density()
        traj = evolve_lindblad(h_lifted, rho0, config.dissipation,
                               (a, sm, b, b.dag()), t_span, config.dt, config.stride)
        record = with_fidelity(populations(traj, basis), traj)
        fid = record.fidelity

        top_idx = [sig.flat_index((nc, config.n_m - 1, q))
                   for nc in range(config.n_c) for q in range(2)]
        top_pop = traj.states[:, top_idx, top_idx].real.sum(axis=1)
        max_top = float(top_pop.max())
        if max_top >= TOP_PHONON_LIMIT:
            raise TruncationOverflowError(
                f"top phonon level population {max_top:.3e} reached the limit "
                f"{TOP_PHONON_LIMIT}; increase truncation.n_m"
            )
        diagnostics = {
            "max_abs_drift": float(np.abs(traj.norm_or_trace - 1.0).max()),
            "min_eigenvalue": float(traj.min_eigenvalue.min()),
            "max_hermitization": float(traj.max_hermitization),
            "max_top_phonon": max_top,
            "peak_fidelity": record.peak_fidelity,
            "time_of_peak": record.time_of_peak,
            "final_fidelity": float(fid[-1]),
        }

    diagnostics.update({
        "peak_p_phi3": float(record.p_phi3.max()),
        "final_p_phi3": float(record.p_phi3[-1]),
        "max_p_phi2": float(record.p_phi2.max()),
        "final_p_phi1": float(record.p_phi1[-1]),
    })
    return RunResult(
        v=v,
        times=record.times,
        p_phi1=record.p_phi1,
        p_phi2=record.p_phi2,
        p_phi3=record.p_phi3,
        norm_or_trace=traj.norm_or_trace,
        fidelity=fid,
        diagnostics=diagnostics,
    )


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _timeseries_path(out_dir: Path, scenario: str, v: float) -> Path:
    return out_dir / f"{scenario}_v{v:g}.csv"


def write_timeseries_csv(path, result: RunResult) -> None:
    columns = ["t", "p_phi1", "p_phi2", "p_phi3"]
    series = [result.times, result.p_phi1, result.p_phi2, result.p_phi3]
    if result.fidelity is not None:
        columns.append("fidelity")
        series.append(result.fidelity)
    columns.append("norm_or_trace")
    series.append(result.norm_or_trace)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in zip(*series):
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def validate_timeseries_csv(path) -> None:
    """Self-check of an emitted CSV: monotone time, bounded populations."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    expected_heads = ("t", "p_phi1", "p_phi2", "p_phi3")
    if tuple(header[:4]) != expected_heads or header[-1] != "norm_or_trace":
        raise SimulationError(f"{path}: malformed header {header}")
    if not rows:
        raise SimulationError(f"{path}: no data rows")
    data = np.array([[float(x) for x in row] for row in rows])
    if data.shape[1] != len(header):
        raise SimulationError(f"{path}: ragged rows")
    t = data[:, 0]
    if not np.all(np.diff(t) > 0):
        raise SimulationError(f"{path}: time column is not strictly increasing")
    bounded = data[:, 1:4] if "fidelity" not in header else data[:, 1:5]
    if bounded.min() < POPULATION_LOW or bounded.max() > POPULATION_HIGH:
        raise SimulationError(f"{path}: population outside [{POPULATION_LOW}, {POPULATION_HIGH}]")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _write_summary(out_dir: Path, name: str, summary: dict) -> Path:
    path = out_dir / name
    with open(path, "w", newline="\n") as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def run_scenario(config: ScenarioConfig, jobs: int = 1) -> dict:
    """Run a scenario, emit its CSVs and JSON summary, return the summary.

    Runs for distinct v values (or grid points, for the sweep scenario)
    are independent and dispatched to a worker pool when jobs > 1;
    outputs are merged in key order so concurrency never changes them.
    """
    config.validate()
    if config.scenario == "fig6":
        return sweep_fig6(config, jobs=jobs)

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    v_values = sorted(config.v_list)
    if jobs > 1 and len(v_values) > 1:
        with Pool(processes=min(jobs, len(v_values))) as pool:
            results = pool.map(partial(run_single, config), v_values)
    else:
        results = [run_single(config, v) for v in v_values]

    summary = {"scenario": config.scenario, "config": asdict(config), "runs": {}, "files": []}
    for result in results:
        path = _timeseries_path(out_dir, config.scenario, result.v)
        write_timeseries_csv(path, result)
        validate_timeseries_csv(path)
        summary["runs"][f"{result.v:g}"] = dict(result.diagnostics, csv=path.name)
        summary["files"].append(path.name)
    summary_path = _write_summary(out_dir, f"{config.scenario}_summary.json", summary)
    summary["files"].append(summary_path.name)
    return summary


def _sweep_point(config: ScenarioConfig, point) -> tuple:
    kappa, gamma_q = point
    diss = DissipationParams(kappa, gamma_q, config.dissipation.gamma_m,
                             config.dissipation.n_th)
    result = run_single(replace(config, dissipation=diss), config.v_list[0])
    return kappa, gamma_q, result.diagnostics["peak_fidelity"], result.diagnostics


def sweep_fig6(config: ScenarioConfig, jobs: int = 1) -> dict:
    """Peak transfer fidelity over a (kappa, gamma_q) grid at fixed v."""
    config.validate()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    kappas = np.linspace(config.sweep_kappa[0], config.sweep_kappa[1], config.sweep_resolution)
    gammas = np.linspace(config.sweep_gamma_q[0], config.sweep_gamma_q[1],
                         config.sweep_resolution)
    points = [(float(k), float(g)) for k in kappas for g in gammas]

    if jobs > 1:
        with Pool(processes=min(jobs, len(points))) as pool:
            rows = pool.map(partial(_sweep_point, config), points)
    else:
        rows = [_sweep_point(config, p) for p in points]
    rows.sort(key=lambda row: (row[0], row[1]))

    grid_path = out_dir / f"{config.scenario}_grid.csv"
    with open(grid_path, "w", newline="\n") as fh:
        fh.write("kappa,gamma_q,peak_fidelity\n")
        for kappa, gamma_q, peak, _ in rows:
            fh.write(f"{_fmt(kappa)},{_fmt(gamma_q)},{_fmt(peak)}\n")
    validate_grid_csv(grid_path)

    peaks = [row[2] for row in rows]
    best = rows[int(np.argmax(peaks))]
    summary = {
        "scenario": config.scenario,
        "config": asdict(config),
        "grid": {
            "rows": len(rows),
            "best_peak_fidelity": best[2],
            "best_point": {"kappa": best[0], "gamma_q": best[1]},
            "worst_peak_fidelity": float(min(peaks)),
        },
        "diagnostics_maxima": {
            "max_abs_drift": max(row[3]["max_abs_drift"] for row in rows),
            "max_hermitization": max(row[3]["max_hermitization"] for row in rows),
            "max_top_phonon": max(row[3]["max_top_phonon"] for row in rows),
            "min_eigenvalue": min(row[3]["min_eigenvalue"] for row in rows),
        },
        "files": [grid_path.name],
    }
    summary_path = _write_summary(out_dir, f"{config.scenario}_summary.json", summary)
    summary["files"].append(summary_path.name)
    return summary


def validate_grid_csv(path) -> None:
    with open(path) as fh:
        header = fh.readline().strip()
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if header != "kappa,gamma_q,peak_fidelity":
        raise SimulationError(f"{path}: malformed header {header!r}")
    if not rows:
        raise SimulationError(f"{path}: no data rows")
    data = np.array([[float(x) for x in row] for row in rows])
    keys = list(map(tuple, data[:, :2]))
    if keys != sorted(keys):
        raise SimulationError(f"{path}: rows are not sorted by (kappa, gamma_q)")
    if data[:, 2].min() < POPULATION_LOW or data[:, 2].max() > POPULATION_HIGH:
        raise SimulationError(f"{path}: fidelity outside [{POPULATION_LOW}, {POPULATION_HIGH}]")


def convergence_report(config: ScenarioConfig) -> dict:
    """dt-halving check on the first configured v value.

    Runs at dt, dt/2 and dt/4 and compares final observables; for a
    4th-order scheme the two successive differences shrink by ~16x once
    dt is in the convergent regime (ratios are noise when the errors sit
    at double-precision level).
    """
    config.validate()
    v = sorted(config.v_list)[0]
    finals = []
    for factor in (1, 2, 4):
        result = run_single(replace(config, dt=config.dt / factor), v)
        values = [result.p_phi1[-1], result.p_phi2[-1], result.p_phi3[-1]]
        if result.fidelity is not None:
            values.append(result.fidelity[-1])
        finals.append(np.array(values))
    diff_coarse = float(np.abs(finals[0] - finals[1]).max())
    diff_fine = float(np.abs(finals[1] - finals[2]).max())
    ratio = diff_coarse / diff_fine if diff_fine > 0 else float("inf")
    return {
        "v": v,
        "dt": config.dt,
        "final_values_dt": finals[0].tolist(),
        "diff_dt_vs_half": diff_coarse,
        "diff_half_vs_quarter": diff_fine,
        "observed_ratio": ratio,
    }
