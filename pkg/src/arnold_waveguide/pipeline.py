"""
Experiment orchestration: resolve a run configuration, execute the selected run and
write its artifacts and manifest.
"""

from __future__ import annotations

import json
import math
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, ValidationError

from arnold_waveguide.config import get_config
from arnold_waveguide.errors import ConfigFileNotFoundError, ConfigInvariantError, ConfigSchemaError, FitError, NumericalError
from arnold_waveguide.export import (
    Table,
    classical_table,
    evolution_table,
    export_results,
    poincare_table,
    resonance_table,
    scan_table,
    spectrum_table,
)
from arnold_waveguide.init import PACKAGE_NAME, get_code_version, logger
from arnold_waveguide.models import (
    DEFAULT_FORCE_RATIO,
    ClassicalSummary,
    CompareEntry,
    CompareSummary,
    EnergyMode,
    EvolutionSummary,
    Manifest,
    ModelParams,
    QuasienergySummary,
    RunConfig,
    RunKind,
    RunSummary,
    SeparatrixSummary,
    SpectrumSummary,
    commensurate_driving,
)
from arnold_waveguide.physics.basis import Truncation, locate_resonance, unperturbed_energy
from arnold_waveguide.physics.classical import Geometry, poincare_section, resonance_map
from arnold_waveguide.physics.ensemble import run_ensemble, seed_stochastic_layer
from arnold_waveguide.physics.fitting import fit_classical_diffusion
from arnold_waveguide.physics.floquet import detect_localization, evolve, fit_diffusion, one_period_propagator, quasienergy_analysis, select_initial_state
from arnold_waveguide.physics.spectrum import check_truncation_convergence, classify_central_groups, compute_spectrum, scan_separatrix
from arnold_waveguide.utils import sanitize_filename


POINCARE_BOUNCES = 200
RESONANCE_MAP_ORDER = 4
QUASIENERGY_COLUMNS = ("quasienergy", "q_variance", "q_bar")

# ModelParams field -> dotted experiment-file key
_PARAM_KEYS = {
    "d": "model.d",
    "a": "model.a",
    "k": "model.k",
    "n0": "model.n0",
    "m0": "model.m0",
    "f0": "driving.f0",
    "omega1": "driving.omega1",
    "omega2": "driving.omega2",
    "period": "driving.period",
}


@dataclass
class PipelineResult:
    """Outcome of `run_pipeline`."""

    output_dir: Path
    summary: RunSummary | CompareSummary
    artifacts: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    exit_code: int = 0


@dataclass
class _RunOutput:
    summary: RunSummary | CompareSummary
    tables: dict[str, Table] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)


def _config_error(e: ValidationError, params_level: bool = False) -> ConfigInvariantError | ConfigSchemaError:
    """Translate the first pydantic error into a config error naming the dotted key."""
    error = e.errors()[0]
    if error["type"] == "invariant_violation":
        raw_key = str((error.get("ctx") or {}).get("key", ""))
        key = _PARAM_KEYS.get(raw_key, raw_key) if params_level else raw_key
        return ConfigInvariantError(f"Invalid configuration value for '{key}': {error['msg']}", key=key)
    loc = [str(part) for part in error["loc"]]
    if params_level and loc and loc[0] in _PARAM_KEYS:
        loc = _PARAM_KEYS[loc[0]].split(".") + loc[1:]
    key = ".".join(loc) or "<root>"
    return ConfigSchemaError(f"Invalid configuration value for '{key}': {error['msg']}", key=key)


def _resolve(config: RunConfig) -> RunConfig:
    """Fill omitted resonance, driving, truncation and numerics from the scale preset."""
    settings = get_config()
    scale = settings.get_scale(config.scale)
    model, driving = config.model, config.driving

    omega_target = model.omega_target if model.omega_target is not None else float(scale["omega_target"])
    n0, m0 = model.n0, model.m0
    if n0 is None or m0 is None:
        n0, m0, detuning = locate_resonance(omega_target, model.d, model.k, model.direction)
        logger.info("Resolved resonance n0=%d, m0=%d (detuning %.6g) for omega_target=%s", n0, m0, detuning, omega_target)
    omega_n0 = model.direction * (n0 + model.k) + 0.5

    omega1, omega2, period = driving.omega1, driving.omega2, driving.period
    if omega1 is None or omega2 is None:
        preset = scale.get("driving_frequencies")
        if preset and model.n0 is None and model.omega_target is None:
            omega1, omega2 = float(preset[0]), float(preset[1])
            period = 2 * math.pi * driving.cycles[0] / omega1
        else:
            omega1, omega2, period = commensurate_driving(omega_n0, driving.cycles)
    elif period is None:
        period = 2 * math.pi * driving.cycles[0] / omega1

    truncation = config.truncation
    numerics = config.numerics
    ensemble = config.ensemble
    fit_end = numerics.fit_window[1]
    return config.model_copy(
        update={
            "model": model.model_copy(update={"n0": n0, "m0": m0, "omega_target": omega_target}),
            "driving": driving.model_copy(update={"omega1": omega1, "omega2": omega2, "period": period}),
            "truncation": truncation.model_copy(
                update={
                    "r_max": truncation.r_max or int(scale["r_max"]),
                    "p_window": truncation.p_window or int(scale["p_window"]),
                    "q_window": truncation.q_window or int(scale["q_window"]),
                }
            ),
            "numerics": numerics.model_copy(
                update={
                    "steps_per_period": numerics.steps_per_period or int(scale["steps_per_period"]),
                    "n_total": numerics.n_total or int(scale["n_total"]),
                    "record_every": numerics.record_every or int(scale["record_every"]),
                }
            ),
            "ensemble": ensemble.model_copy(update={"count": ensemble.count or int(scale["ensemble_count"]), "n_periods": ensemble.n_periods or fit_end}),
        }
    )


def load_config(path: str | Path, run: RunKind | str | None = None, scale: str | None = None, seed: int | None = None, output_dir: str | Path | None = None) -> RunConfig:
    """
    Read, validate and resolve an experiment file.

    Args:
        path: JSON experiment file
        run: Overrides the file's run kind
        scale: Overrides the file's scale preset
        seed: Overrides ensemble.seed
        output_dir: Overrides output_dir

    Returns:
        Fully resolved RunConfig

    Raises:
        ConfigFileNotFoundError: If the file does not exist
        ConfigSchemaError: On invalid JSON, unknown keys or bad types
        ConfigInvariantError: If a physical invariant is violated
        ResonanceNotFoundError: If n0/m0 are omitted and no resonance is found
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigFileNotFoundError(f"Experiment file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigSchemaError(f"Experiment file {path} is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigSchemaError(f"Experiment file {path} must contain a JSON object", key="<root>")

    if run is not None:
        raw["run"] = str(run)
    if scale is not None:
        raw["scale"] = scale
    if seed is not None:
        raw.setdefault("ensemble", {})["seed"] = seed
    if output_dir is not None:
        raw["output_dir"] = str(output_dir)
    return resolve_config(raw)


def resolve_config(raw: dict[str, Any]) -> RunConfig:
    """Validate and resolve an experiment given as a dict; see `load_config`."""
    try:
        config = RunConfig.model_validate(raw)
    except ValidationError as e:
        raise _config_error(e) from e

    resolved = _resolve(config)
    try:
        resolved = RunConfig.model_validate(resolved.model_dump())
    except ValidationError as e:
        raise _config_error(e) from e
    try:
        resolved.params()
    except ValidationError as e:
        raise _config_error(e, params_level=True) from e
    logger.debug("Resolved configuration: %s", resolved.model_dump_json())
    return resolved


def _truncation(config: RunConfig) -> Truncation:
    return Truncation.symmetric(config.truncation.r_max, config.truncation.p_window)


def _spectrum_run(config: RunConfig, params: ModelParams) -> _RunOutput:
    truncation = _truncation(config)
    block, groups = compute_spectrum(params, truncation)
    groups, infos, warnings = classify_central_groups(groups)
    central = groups.central_qs()

    separatrix = [SeparatrixSummary(q=q, s_sep=info.s_sep, M_s=info.M_s, pair_fraction=info.pair_fraction, bottom_spread=info.bottom_spread, n_levels=len(groups.group(q).levels)) for q, info in sorted(infos.items())]
    convergence = None
    if config.spectrum.check_convergence:
        tracked = min(len(groups.group(0).levels), 2 * infos[0].s_sep) if 0 in infos else len(groups.group(0).levels)
        convergence = check_truncation_convergence(params, truncation, tracked)
    tables = {"spectrum.csv": spectrum_table(groups)}
    scan = []
    if config.spectrum.scan_amplitudes:
        scan = scan_separatrix(params, truncation, config.spectrum.scan_amplitudes)
        tables["separatrix_scan.csv"] = scan_table(scan)

    summary = SpectrumSummary(
        dimension=block.dimension,
        n_groups=len(groups.groups),
        central_groups=central,
        group_spacing_mean=groups.group_spacing_mean(central),
        separatrix=separatrix,
        convergence=convergence,
        scan=scan,
    )
    return _RunOutput(summary=RunSummary(run=config.run, seed=config.ensemble.seed, params_echo=params.model_dump(), spectrum=summary), tables=tables, warnings=warnings)


def _quantum_diffusion(config: RunConfig, params: ModelParams, n_periods: int) -> tuple[EvolutionSummary, Any, list[str]]:
    """Spectrum, propagator and evolution from the configured initial state."""
    truncation = _truncation(config)
    block, groups = compute_spectrum(params, truncation)
    groups, infos, warnings = classify_central_groups(groups)
    initial = config.initial_state
    state, s = select_initial_state(groups, initial.q, initial.selector, initial.s, infos.get(initial.q))

    driving = params.driving(config.driving.f_scale)
    propagator = one_period_propagator(block, driving, config.numerics.steps_per_period, eigensystem=(groups.eigenvalues, groups.eigenvectors))
    record = evolve(state, propagator, groups, n_periods, config.numerics.record_every, config.truncation.q_window)
    warnings.extend(record.warnings)
    D_q, slope_error = fit_diffusion(record, config.numerics.fit_window)

    t_sat = plateau = status = None
    try:
        localization = detect_localization(record)
        t_sat, plateau, status = localization.t_sat, localization.plateau_level, localization.status
    except FitError as e:
        logger.info("Localization detection skipped: %s", e)

    summary = EvolutionSummary(
        initial_q=initial.q,
        initial_s=s,
        selector=initial.selector,
        steps_per_period=propagator.step_count,
        unitarity_defect=propagator.unitarity_defect,
        D_q=D_q,
        slope_error=slope_error,
        fit_window=config.numerics.fit_window,
        t_sat=t_sat,
        plateau_level=plateau,
        localization=status,
        max_leakage=float(np.max(record.leakage)),
    )
    return summary, record, warnings


def _evolve_run(config: RunConfig, params: ModelParams) -> _RunOutput:
    summary, record, warnings = _quantum_diffusion(config, params, config.numerics.n_total)
    run_summary = RunSummary(run=config.run, seed=config.ensemble.seed, params_echo=params.model_dump(), evolution=summary)
    return _RunOutput(summary=run_summary, tables={"evolution.csv": evolution_table(record)}, warnings=warnings)


def _qe_run(config: RunConfig, params: ModelParams) -> _RunOutput:
    block, groups = compute_spectrum(params, _truncation(config))
    driving = params.driving(config.driving.f_scale)
    propagator = one_period_propagator(block, driving, config.numerics.steps_per_period, eigensystem=(groups.eigenvalues, groups.eigenvectors))
    states = quasienergy_analysis(propagator, groups)
    variances = np.array([s.q_variance for s in states])
    summary = QuasienergySummary(n_states=len(states), max_q_variance=float(variances.max()), mean_q_variance=float(variances.mean()), q_window=config.truncation.q_window)
    table = Table(QUASIENERGY_COLUMNS, [(s.quasienergy, s.q_variance, s.q_bar) for s in states])
    return _RunOutput(summary=RunSummary(run=config.run, seed=config.ensemble.seed, params_echo=params.model_dump(), quasienergy=summary), tables={"quasienergies.csv": table})


def _finite_fit(times: np.ndarray, values: np.ndarray, window: tuple[float, float]) -> tuple[float, float]:
    mask = np.isfinite(values)
    return fit_classical_diffusion(times[mask], values[mask], window)


def _classical_diffusion(config: RunConfig, params: ModelParams, with_sections: bool) -> tuple[ClassicalSummary, dict[str, Table], list[str]]:
    ensemble_cfg = config.ensemble
    geometry = Geometry(d=params.d, a=params.a)
    driving = params.driving()
    energy = unperturbed_energy(params.n0, params.m0, params.k, params.d)
    period = params.period
    times = period * np.arange(0, ensemble_cfg.n_periods + 1, config.numerics.record_every)

    ensemble = seed_stochastic_layer(energy, ensemble_cfg.eta, ensemble_cfg.delta, ensemble_cfg.count, ensemble_cfg.seed, geometry)
    record = run_ensemble(ensemble, driving, geometry, times, max_workers=get_config().max_workers)
    warnings = list(record.warnings)

    window = (config.numerics.fit_window[0] * period, config.numerics.fit_window[1] * period)
    d_total, e_total = _finite_fit(times, record.var_total, window)
    d_kinetic, e_kinetic = _finite_fit(times, record.var_kinetic, window)
    mode = ensemble_cfg.energy_mode
    d_cl, error = (d_total, e_total) if mode == EnergyMode.TOTAL else (d_kinetic, e_kinetic)

    summary = ClassicalSummary(
        energy=energy,
        count=len(ensemble),
        dropped=record.dropped,
        energy_mode=mode,
        D_cl=d_cl,
        slope_error=error,
        D_cl_total=d_total,
        D_cl_total_error=e_total,
        D_cl_kinetic=d_kinetic,
        D_cl_kinetic_error=e_kinetic,
    )
    tables: dict[str, Table] = {}
    if with_sections:
        tables["classical.csv"] = classical_table(record, mode)
        sections = []
        for state in ensemble.states[: ensemble_cfg.poincare_trajectories]:
            try:
                sections.append(poincare_section(state, POINCARE_BOUNCES, driving, geometry, max_time=float(times[-1])))
            except NumericalError as e:
                message = f"Poincaré section truncated: {e}"
                logger.warning(message)
                warnings.append(message)
                sections.append([])
        tables["poincare.csv"] = poincare_table(sections)
        tables["resonances.csv"] = resonance_table(resonance_map(energy, params.d, RESONANCE_MAP_ORDER, driving))
    return summary, tables, warnings


def _classical_run(config: RunConfig, params: ModelParams) -> _RunOutput:
    summary, tables, warnings = _classical_diffusion(config, params, with_sections=True)
    return _RunOutput(summary=RunSummary(run=config.run, seed=config.ensemble.seed, params_echo=params.model_dump(), classical=summary), tables=tables, warnings=warnings)


def _compare_run(config: RunConfig, params: ModelParams) -> _RunOutput:
    ratio = config.compare.force_ratio
    warnings = []
    if ratio != DEFAULT_FORCE_RATIO:
        message = f"f0/a = {ratio:g} differs from {DEFAULT_FORCE_RATIO:g}; neighbouring resonances may overlap"
        logger.warning(message)
        warnings.append(message)

    n_periods = config.numerics.fit_window[1]
    entries = []
    for a in config.compare.amplitudes:
        scaled = params.with_amplitude(a, f0=ratio * a)
        quantum, _, quantum_warnings = _quantum_diffusion(config, scaled, n_periods)
        classical, _, classical_warnings = _classical_diffusion(config, scaled, with_sections=False)
        warnings.extend(quantum_warnings + classical_warnings)
        entries.append(
            CompareEntry(
                a=a,
                f0=scaled.f0,
                D_cl=classical.D_cl,
                D_cl_error=classical.slope_error,
                D_q=quantum.D_q,
                D_q_error=quantum.slope_error,
                ratio=quantum.D_q / classical.D_cl if classical.D_cl != 0 else None,
            )
        )
        logger.info("Compare a=%s: D_q=%.6g, D_cl=%.6g", a, quantum.D_q, classical.D_cl)

    summary = CompareSummary(force_ratio=ratio, seed=config.ensemble.seed, entries=entries, quantum_weaker=all(e.D_q < e.D_cl for e in entries))
    return _RunOutput(summary=summary, warnings=warnings)


_RUNS: dict[RunKind, Callable[[RunConfig, ModelParams], _RunOutput]] = {
    RunKind.SPECTRUM: _spectrum_run,
    RunKind.EVOLVE: _evolve_run,
    RunKind.QE: _qe_run,
    RunKind.CLASSICAL: _classical_run,
    RunKind.COMPARE: _compare_run,
}


def output_dir_for(config: RunConfig) -> Path:
    if config.output_dir:
        return Path(config.output_dir)
    return get_config().output_dir / config.run.value


def run_pipeline(config: RunConfig) -> PipelineResult:
    """
    Execute a resolved run and write its artifacts.

    Every artifact except `manifest.json` is byte-identical across invocations with the
    same configuration; the manifest additionally records the wall-clock time.

    Args:
        config: Resolved configuration from `load_config`

    Returns:
        PipelineResult with the summary, artifact names and warnings

    Raises:
        ArnoldWaveguideError: Propagated from the numerical modules
    """
    started = time.perf_counter()
    params = config.params()
    out = output_dir_for(config)
    logger.info("Running '%s' at scale '%s' into %s", config.run, config.scale, out)

    result = _RUNS[config.run](config, params)

    artifacts: dict[str, Table | BaseModel] = {"config.resolved.json": config}
    artifacts.update(result.tables)
    artifacts["compare.json" if config.run == RunKind.COMPARE else "summary.json"] = result.summary
    for name, record in artifacts.items():
        export_results(record, "csv" if name.endswith(".csv") else "json", out / name)

    names = sorted(artifacts) + ["manifest.json"]
    manifest = Manifest(
        tool=PACKAGE_NAME,
        version=get_code_version(),
        run=config.run,
        seed=config.ensemble.seed,
        config=config.model_dump(mode="json"),
        artifacts=names,
        warnings=result.warnings,
        wall_clock_seconds=round(time.perf_counter() - started, 3),
    )
    export_results(manifest, "json", out / "manifest.json")
    logger.info("Run '%s' finished with %d warnings", config.run, len(result.warnings))
    return PipelineResult(output_dir=out, summary=result.summary, artifacts=names, warnings=result.warnings)


def available_experiments() -> dict[str, Path]:
    """
    Experiment files in the configured experiments folder, keyed by name.

    `evolve.json` and `evolve.sample.json` both map to 'evolve'; the non-sample file wins.
    """
    folder = get_config().experiments_dir
    if not folder.is_dir():
        logger.debug("Experiments folder %s does not exist", folder)
        return {}
    found: dict[str, Path] = {}
    for path in sorted(folder.glob("*.json")):
        name = path.name.removesuffix(".json").removesuffix(".sample")
        if name not in found or not path.name.endswith(".sample.json"):
            found[name] = path
    return found


def experiment_path(name: str) -> Path:
    """
    Path of a named experiment.

    Raises:
        ConfigFileNotFoundError: If no experiment has that name
    """
    experiments = available_experiments()
    safe = sanitize_filename(name) or ""
    if safe not in experiments:
        raise ConfigFileNotFoundError(f"Unknown experiment '{name}'. Available: {sorted(experiments)}")
    return experiments[safe]
