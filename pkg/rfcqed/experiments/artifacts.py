"""
CSV / JSON writers. Data files carry no timestamps so repeated runs are
byte-identical.
"""
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
import pandas as pd
import pydantic
import scipy

import rfcqed
from rfcqed.config import settings
from rfcqed.utils.logger import get_logger

logger = get_logger("rfcqed.experiments.artifacts")

METADATA_FILE = "metadata.json"


@dataclass
class ExperimentResult:
    """Tables keyed by file stem plus the run metadata; children go to sub-directories."""

    kind: str
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)
    children: Dict[str, "ExperimentResult"] = field(default_factory=dict)


def library_versions() -> Dict[str, str]:
    return {
        "rfcqed": rfcqed.__version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
        "pydantic": pydantic.VERSION,
    }


def to_jsonable(value: Any) -> Any:
    """numpy scalars/arrays to plain Python; non-finite floats to None."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, pydantic.BaseModel):
        return to_jsonable(value.model_dump(mode="json"))
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_table(frame: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=settings.csv_float_format)
    return path


def write_metadata(metadata: Dict[str, Any], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    document = dict(metadata)
    document["versions"] = library_versions()
    path.write_text(json.dumps(to_jsonable(document), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def write_result(result: ExperimentResult, out_dir: Path) -> List[Path]:
    """Write every table as <stem>.csv and the metadata file; returns the written paths."""
    written = [write_table(frame, out_dir / f"{stem}.csv") for stem, frame in result.tables.items()]
    written.append(write_metadata({"kind": result.kind, **result.metadata}, out_dir / METADATA_FILE))
    for name, child in result.children.items():
        written.extend(write_result(child, out_dir / name))
    logger.info(f"✅ Wrote {len(written)} artifacts to {out_dir}")
    return written
