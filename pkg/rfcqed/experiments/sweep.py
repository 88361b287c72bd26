"""
One-key parameter sweeps. Every point is a full experiment run written to
point_NNN/; the aggregate tables collect minima, peaks and Ramsey contrasts
in long format with the swept key as the leading column.
"""
from multiprocessing import Pool
from typing import Any, Dict, List, Tuple

import pandas as pd
from tqdm import tqdm

from rfcqed.config import settings
from rfcqed.errors import ConfigError
from rfcqed.experiments.artifacts import ExperimentResult
from rfcqed.experiments.schemas import ExperimentConfig, parse_config, with_override
from rfcqed.utils.logger import get_logger

logger = get_logger("rfcqed.experiments.sweep")

# aggregate file stem -> per-point table it is built from
AGGREGATES = {"minima": "minima", "peaks": "peaks"}

Job = Tuple[int, Dict[str, Any], str, Any, str]


def point_name(index: int) -> str:
    return f"point_{index:03d}"


def _run_point(job: Job) -> Tuple[int, ExperimentResult]:
    """Top-level worker so it can be pickled by multiprocessing."""
    from rfcqed.experiments.runner import execute

    index, document, key, value, kind = job
    config = with_override(parse_config(document), key, value, kind=kind)
    return index, execute(config)


def _jobs(config: ExperimentConfig) -> List[Job]:
    sweep = config.sweep
    if sweep is None:
        raise ConfigError("section missing", key_path="sweep")
    if not sweep.values:
        raise ConfigError("sweep values must not be empty", key_path="sweep.values")
    document = config.resolved()
    # fail on a bad key before any worker starts
    with_override(config, sweep.key, sweep.values[0], kind=sweep.experiment)
    return [(i, document, sweep.key, value, sweep.experiment) for i, value in enumerate(sweep.values)]


def _collect(jobs: List[Job], workers: int) -> Dict[int, ExperimentResult]:
    results: Dict[int, ExperimentResult] = {}
    progress = tqdm(total=len(jobs), desc="sweep", unit="point")
    if workers > 1:
        with Pool(workers) as pool:
            for index, result in pool.imap(_run_point, jobs):
                results[index] = result
                progress.update()
    else:
        for job in jobs:
            index, result = _run_point(job)
            results[index] = result
            progress.update()
    progress.close()
    return results


def _scalars(metadata: Dict[str, Any]) -> Dict[str, Any]:
    return {k: v for k, v in metadata.items() if isinstance(v, (int, float, str, bool)) and k != "kind"}


def aggregate(key: str, values: List[Any], results: Dict[int, ExperimentResult]) -> Dict[str, pd.DataFrame]:
    """Long-format aggregate tables keyed by file stem."""
    summary, contrast = [], []
    stacked: Dict[str, List[pd.DataFrame]] = {stem: [] for stem in AGGREGATES}
    for index, value in enumerate(values):
        result = results[index]
        summary.append({key: value, "point": point_name(index), **_scalars(result.metadata)})
        for stem, table in AGGREGATES.items():
            if table in result.tables:
                frame = result.tables[table].copy()
                frame.insert(0, key, value)
                stacked[stem].append(frame)
        if result.kind == "ramsey":
            contrast.append({
                key: value,
                "contrast": result.metadata["contrast"],
                "modulation_frequency": result.metadata["modulation_frequency"],
                "fidelity": result.metadata.get("fidelity"),
            })

    tables = {"summary": pd.DataFrame(summary)}
    for stem, frames in stacked.items():
        if frames:
            tables[stem] = pd.concat(frames, ignore_index=True)
    if contrast:
        tables["contrast"] = pd.DataFrame(contrast, columns=[key, "contrast", "modulation_frequency", "fidelity"])
    return tables


def run_sweep(config: ExperimentConfig) -> ExperimentResult:
    """Run config.sweep.experiment once per value of config.sweep.key."""
    jobs = _jobs(config)
    sweep = config.sweep
    workers = max(1, settings.workers)
    logger.info(
        f"🚀 Sweeping {sweep.key} over {len(jobs)} values ({sweep.experiment}, {workers} worker"
        f"{'s' if workers > 1 else ''})"
    )
    results = _collect(jobs, workers)

    failed = sorted({name for result in results.values() for name in result.metadata.get("failed", [])})
    return ExperimentResult(
        kind="sweep",
        tables=aggregate(sweep.key, list(sweep.values), results),
        metadata={"key": sweep.key, "values": list(sweep.values), "experiment": sweep.experiment,
                  "workers": workers, "failed": failed},
        children={point_name(i): results[i] for i in range(len(jobs))},
    )
