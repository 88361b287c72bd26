"""
Experiment orchestration: one function per experiment kind, each returning an
ExperimentResult that `run` writes to disk.
"""
import math
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from rfcqed.adiabatic.analytics import (
    critical_dos_ratio,
    dm_potential,
    excited_lambda_critical_sq,
    lambda_critical,
    tunnel_splitting,
    two_qubit_quartic,
    two_qubit_unperturbed,
)
from rfcqed.adiabatic.born_oppenheimer import (
    PotentialSurfaceSet,
    XGrid,
    build_surfaces,
    critical_coupling_scan,
    default_grid,
    density_of_states_ratio,
    doublet_splitting,
    excited_label,
    find_minima,
    ground_label,
    nonadiabatic_coupling,
    solve_bound_states,
    spin_sectors,
)
from rfcqed.circuit.flux_qubit import calibrate_flux_bias, flux_qubit_spectrum
from rfcqed.circuit.normal_modes import normal_modes
from rfcqed.circuit.two_mode import compare_surfaces, single_mode_params, two_mode_bo_surfaces
from rfcqed.config import settings
from rfcqed.errors import NumericalError, ParameterError, ValidationFailure
from rfcqed.experiments.artifacts import ExperimentResult, write_result
from rfcqed.experiments.schemas import ExperimentConfig
from rfcqed.experiments.validation import (
    ORACLES,
    circuit_benchmarks,
    failed_gating,
    results_frame,
    run_checks,
)
from rfcqed.probes.ramsey import (
    RamseySession,
    classical_frequency,
    modulation_frequency,
    ramsey_scan,
    ramsey_snapshots,
    revival_peaks,
    t2_feasibility,
    trace_contrast,
)
from rfcqed.probes.spectroscopy import (
    spectrum_bo_approx,
    spectrum_ground,
    spectrum_thermal,
    strong_coupling_condition,
    sum_rule,
)
from rfcqed.quantum.models import ModelParams
from rfcqed.utils.logger import get_logger, log_banner

logger = get_logger("rfcqed.experiments.runner")


def _grid(config: ExperimentConfig, p: ModelParams) -> XGrid:
    numerics = config.numerics
    if numerics.grid_half_width is None:
        grid = default_grid(p)
        if grid.points == numerics.grid_points:
            return grid
        return XGrid.symmetric(grid.x_max, numerics.grid_points)
    return XGrid.symmetric(numerics.grid_half_width, numerics.grid_points)


def _tag(value: float) -> str:
    return f"{value:g}".replace(".", "p").replace("-", "m")


def minima_frame(surfaces: PotentialSurfaceSet, branches: int = 4) -> pd.DataFrame:
    rows = []
    for n in range(min(branches, surfaces.count)):
        for x_min, v_min in find_minima(surfaces.branches[n], surfaces.x):
            rows.append({"branch": n, "label": surfaces.labels[n], "X_min": x_min, "V_min": v_min})
    return pd.DataFrame(rows, columns=["branch", "label", "X_min", "V_min"])


# --- per-kind experiments ---------------------------------------------------------------

def run_potentials(config: ExperimentConfig) -> ExperimentResult:
    base = config.params()
    couplings = config.potentials.lambda_sq_values
    tables: Dict[str, pd.DataFrame] = {}
    minima: List[pd.DataFrame] = []
    for lambda_sq in couplings or [base.lambda_sq]:
        p = ModelParams.from_dimensionless(lambda_sq, base.mu, base.epsilon, base.N, base.omega_q)
        surfaces = build_surfaces(_grid(config, p), p)
        suffix = f"_l2_{_tag(lambda_sq)}" if couplings else ""
        tables[f"potentials{suffix}"] = surfaces.to_frame()
        tables[f"sectors{suffix}"] = surfaces.sector_frame()
        found = minima_frame(surfaces)
        found.insert(0, "lambda_sq", lambda_sq)
        minima.append(found)
        logger.info(f"📊 lambda^2={lambda_sq:.4g}: {surfaces.count} branches, labels {surfaces.labels[:4]}")
    tables["minima"] = pd.concat(minima, ignore_index=True)
    return ExperimentResult("potentials", tables, {"derived": base.derived()})


def run_bound_states(config: ExperimentConfig) -> ExperimentResult:
    p = config.params()
    surfaces = build_surfaces(_grid(config, p), p)
    numerics = config.numerics
    tables: Dict[str, pd.DataFrame] = {}
    levels, summary, bound = [], {}, {}
    for branch in config.bound_states.branches:
        states = solve_bound_states(surfaces, branch, p.mu, numerics.k_max, numerics.richardson)
        bound[branch] = states
        tables[f"wavefunctions_{branch}"] = states.to_frame()
        levels.extend({"branch": str(branch), "k": k, "energy": e} for k, e in enumerate(states.energies))
        if len(states.energies) >= 2:
            summary[str(branch)] = {
                "splitting": doublet_splitting(states),
                "dos_ratio": density_of_states_ratio(states),
            }
    tables["levels"] = pd.DataFrame(levels, columns=["branch", "k", "energy"])

    couplings = []
    branches = config.bound_states.branches
    if config.bound_states.nonadiabatic:
        for n, m in zip(branches[:-1], branches[1:]):
            try:
                value = nonadiabatic_coupling(surfaces, bound[n], n, m)
            except NumericalError as e:
                logger.warning(f"⚠️ Non-adiabatic estimate {n}/{m} skipped: {e}")
                value = math.nan
            couplings.append({"n": str(n), "m": str(m), "C": value})
    tables["nonadiabatic"] = pd.DataFrame(couplings, columns=["n", "m", "C"])

    metadata = {"derived": p.derived(), "branches": summary, "grid": surfaces.grid.model_dump()}
    if p.lambda_sq > 0:
        metadata["tunnel_splitting_formula"] = tunnel_splitting(p.lam, p.lambda_c, p.mu)
        metadata["critical_dos_ratio"] = critical_dos_ratio(p.lambda_c, p.mu)
    return ExperimentResult("bound_states", tables, metadata)


def _spectrum(config: ExperimentConfig, thermal: bool) -> ExperimentResult:
    p = config.params()
    section = config.spectrum
    cfg = section.to_config(config.numerics.fock_cutoff)
    result = spectrum_thermal(p, cfg) if thermal else spectrum_ground(p, cfg)
    integral, expected = sum_rule(result, cfg.gamma)
    tables = {"spectrum": result.to_frame(), "peaks": result.peaks_frame()}
    metadata = {
        **result.metadata,
        "strong_coupling": strong_coupling_condition(p, cfg.gamma).model_dump(),
        "sum_rule": {"integral": integral, "expected": expected},
    }
    if section.bo_approx and not thermal:
        approx = spectrum_bo_approx(p, cfg, build_surfaces(_grid(config, p), p))
        tables["spectrum_bo"] = approx.to_frame()
        tables["peaks_bo"] = approx.peaks_frame()
    return ExperimentResult("spectrum_thermal" if thermal else "spectrum", tables, metadata)


def run_spectrum(config: ExperimentConfig) -> ExperimentResult:
    return _spectrum(config, thermal=False)


def run_spectrum_thermal(config: ExperimentConfig) -> ExperimentResult:
    return _spectrum(config, thermal=True)


def run_ramsey(config: ExperimentConfig) -> ExperimentResult:
    p = config.params()
    cfg = config.ramsey
    session = RamseySession(p, cfg)
    trace = ramsey_scan(p, session=session)
    tables = {"ramsey": trace.to_frame()}
    if cfg.snapshot_times:
        for tau, snapshot in ramsey_snapshots(session, trace.pulse, cfg.snapshot_times).items():
            tables[f"wavepacket_t{_tag(tau)}"] = snapshot.to_frame()

    revivals = revival_peaks(trace)
    metadata: Dict[str, Any] = {
        **trace.metadata,
        "contrast": trace_contrast(trace),
        "modulation_frequency": modulation_frequency(trace),
        "revivals": [{"tau_w": t, "P_0": v} for t, v in revivals],
    }
    try:
        metadata["classical_frequency"] = classical_frequency(p)
    except ParameterError as e:
        logger.info(f"📊 No classical frequency: {e}")
    if cfg.resonator_frequency_hz is not None:
        metadata["t2_feasibility"] = t2_feasibility(cfg.resonator_frequency_hz, cfg.t2_us)
    return ExperimentResult("ramsey", tables, metadata)


def run_circuit(config: ExperimentConfig) -> ExperimentResult:
    section = config.circuit
    cp = section.elements
    if section.calibrate:
        cp = calibrate_flux_bias(cp, section.target_ghz)
    modes = normal_modes(cp)
    spectrum = flux_qubit_spectrum(cp, levels=section.levels)
    _, mapping = single_mode_params(cp, spectrum, modes, fock=section.plus_fock)

    grid = XGrid.symmetric(section.grid_half_width, section.grid_points)
    two_mode = two_mode_bo_surfaces(
        cp, grid, levels=section.levels, plus_fock=section.plus_fock, branches=section.branches,
        spectrum=spectrum, modes=modes,
    )
    single = build_surfaces(grid, two_mode.params)
    deviation = compare_surfaces(single, two_mode, section.compare_x_max, count=section.branches)
    _, dressed_mapping = single_mode_params(cp, spectrum, modes, dressed=True, fock=section.plus_fock)

    summary = modes.summary()
    values = {**summary, **{key: mapping[key] for key in ("omega_q_ghz", "mu", "lambda_sq")}}
    benchmarks = results_frame(circuit_benchmarks(values))
    benchmarks["deviation"] = (benchmarks["value"] - benchmarks["target"]).abs() / benchmarks["target"].abs()

    metadata = {
        "elements": cp.model_dump(),
        "derived_elements": cp.derived(),
        "normal_modes": summary,
        "closed_form_deviation": modes.closed_form_deviation,
        "limit_deviation": modes.limit_deviation,
        "single_mode": mapping,
        "single_mode_dressed": dressed_mapping,
        "qubit_levels_ghz": spectrum.energies - spectrum.energies[0],
        "surface_deviation": deviation,
        "surface_asymmetry": float(np.max(np.abs(two_mode.branches - two_mode.branches[:, ::-1]))),
        "benchmarks": {row["name"]: row for row in benchmarks.to_dict(orient="records")},
    }
    tables = {
        "two_mode_potentials": two_mode.to_frame(),
        "single_mode_potentials": single.to_frame(),
        "benchmarks": benchmarks,
    }
    return ExperimentResult("circuit", tables, metadata)


def _scan(p: ModelParams, key: str) -> float:
    try:
        return critical_coupling_scan(p, key)
    except ParameterError as e:
        logger.warning(f"⚠️ No transition for {key}: {e}")
        return math.nan


def oracle_tables(p: ModelParams, grid: XGrid) -> Dict[str, pd.DataFrame]:
    """Numeric sector curves next to the closed forms that apply to these parameters."""
    x = grid.values
    surfaces = build_surfaces(grid, p)
    tables = {"sectors": surfaces.sector_frame()}
    if p.epsilon == -1.0:
        columns = {"X": x}
        for sector in spin_sectors(p.N):
            if sector.copy:
                continue
            for k in range(sector.dimension):
                m = -sector.spin + k
                columns[f"s{sector.spin:g}_m{m:g}"] = dm_potential(sector.spin, m, x, p.lam)
        tables["dicke_potentials"] = pd.DataFrame(columns)
    if p.N == 2:
        closed = two_qubit_unperturbed(x, p.lam, p.epsilon)
        quartic = two_qubit_quartic(x, p.lam, p.epsilon)
        tables["two_qubit_closed_form"] = pd.DataFrame({"X": x, **closed, "triplet_quartic": quartic.potential})
    critical = [{
        "branch": ground_label(p.N),
        "numeric": _scan(p, ground_label(p.N)),
        "formula": lambda_critical(p.N) ** 2,
    }]
    if p.N == 2 and p.epsilon > -1:
        critical.append({
            "branch": excited_label(2),
            "numeric": _scan(p, excited_label(2)),
            "formula": excited_lambda_critical_sq(p.epsilon),
        })
    tables["critical_couplings"] = pd.DataFrame(critical, columns=["branch", "numeric", "formula"])
    return tables


def run_oracles(config: ExperimentConfig) -> ExperimentResult:
    tables: Dict[str, pd.DataFrame] = {}
    metadata: Dict[str, Any] = {}
    if config.model is not None:
        p = config.params()
        tables.update(oracle_tables(p, _grid(config, p)))
        metadata["derived"] = p.derived()
    results = run_checks(ORACLES)
    tables["oracles"] = results_frame(results)
    metadata["failed"] = failed_gating(results)
    return ExperimentResult("oracles", tables, metadata)


def run_validate(config: ExperimentConfig) -> ExperimentResult:
    section = config.validate_
    results = run_checks(section.checks, quick=section.quick)
    failed = failed_gating(results)
    metadata = {
        "quick": section.quick,
        "checks": len(results),
        "passed": sum(row.passed for row in results),
        "failed": failed,
    }
    return ExperimentResult("validate", {"checks": results_frame(results)}, metadata)


def _run_sweep(config: ExperimentConfig) -> ExperimentResult:
    from rfcqed.experiments.sweep import run_sweep

    return run_sweep(config)


EXPERIMENTS: Dict[str, Callable[[ExperimentConfig], ExperimentResult]] = {
    "potentials": run_potentials,
    "bound_states": run_bound_states,
    "spectrum": run_spectrum,
    "spectrum_thermal": run_spectrum_thermal,
    "ramsey": run_ramsey,
    "circuit": run_circuit,
    "oracles": run_oracles,
    "validate": run_validate,
    "sweep": _run_sweep,
}


def execute(config: ExperimentConfig) -> ExperimentResult:
    """Run an experiment in memory; adds the resolved config to the metadata."""
    result = EXPERIMENTS[config.kind](config)
    result.metadata = {"config": config.resolved(), **result.metadata}
    result.metadata.setdefault("tolerances", {
        "bo_level_tolerance": settings.bo_level_tolerance,
        "truncation_tolerance": settings.truncation_tolerance,
        "hermiticity_rtol": settings.hermiticity_rtol,
    })
    return result


def run(config: ExperimentConfig, out_dir: Optional[Union[str, Path]] = None) -> ExperimentResult:
    """
    Execute and write artifacts. Validation-type runs write their tables first
    and then raise ValidationFailure if a gating check failed.
    """
    out_dir = Path(out_dir or config.output_dir or settings.output_dir)
    log_banner(logger, f"🚀 {config.kind} -> {out_dir}")
    start = time.time()
    result = execute(config)
    write_result(result, out_dir)
    logger.info(f"✅ {config.kind} finished in {time.time() - start:.1f}s")

    failed = result.metadata.get("failed") or []
    if failed:
        raise ValidationFailure(f"{len(failed)} gating checks failed: {', '.join(failed)}")
    return result
