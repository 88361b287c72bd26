"""
Experiment configuration documents (YAML or JSON). Every section rejects
unknown keys; loading errors carry the dotted key path of the offending entry.
"""
import copy
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from rfcqed.circuit.elements import CircuitParams
from rfcqed.config import REFERENCE_CIRCUIT, settings
from rfcqed.errors import ConfigError
from rfcqed.probes.ramsey import RamseyConfig
from rfcqed.probes.spectroscopy import SpectrumConfig
from rfcqed.quantum.models import ModelParams

ExperimentKind = Literal[
    "potentials",
    "bound_states",
    "spectrum",
    "spectrum_thermal",
    "ramsey",
    "circuit",
    "oracles",
    "validate",
    "sweep",
]


# settings that replace each other when one of them is overridden
EXCLUSIVE: Dict[str, tuple] = {
    "model.g": ("lambda_sq",),
    "model.lambda_sq": ("g",),
    "model.omega_r": ("mu", "omega_ratio"),
    "model.mu": ("omega_r", "omega_ratio"),
    "model.omega_ratio": ("omega_r", "mu"),
}


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelSection(StrictModel):
    """Either physical (omega_r, g) or dimensionless (mu or omega_ratio, lambda_sq) parameters."""

    omega_q: float = Field(default=1.0, gt=0)
    omega_r: Optional[float] = Field(default=None, gt=0)
    mu: Optional[float] = Field(default=None, gt=0)
    omega_ratio: Optional[float] = Field(default=None, gt=0)  # omega_r / omega_q
    g: Optional[float] = None
    lambda_sq: Optional[float] = Field(default=None, ge=0)
    epsilon: float = Field(default=0.0, ge=-1.0)
    N: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _one_of_each(self) -> "ModelSection":
        scales = [v for v in (self.omega_r, self.mu, self.omega_ratio) if v is not None]
        if len(scales) != 1:
            raise ValueError("give exactly one of omega_r, mu, omega_ratio")
        if (self.g is None) == (self.lambda_sq is None):
            raise ValueError("give exactly one of g, lambda_sq")
        return self

    def resolve(self) -> ModelParams:
        if self.omega_r is not None:
            omega_r = self.omega_r
        elif self.omega_ratio is not None:
            omega_r = self.omega_ratio * self.omega_q
        else:
            omega_r = self.omega_q / self.mu ** 0.5
        g = self.g if self.g is not None else (self.lambda_sq * omega_r * self.omega_q) ** 0.5
        return ModelParams(omega_r=omega_r, omega_q=self.omega_q, g=g, epsilon=self.epsilon, N=self.N)


class NumericsSection(StrictModel):
    grid_half_width: Optional[float] = Field(default=None, gt=0)  # None: widened default grid
    grid_points: int = Field(default_factory=lambda: settings.default_grid_points, ge=201)
    fock_cutoff: Optional[int] = Field(default=None, ge=1)
    k_levels: int = Field(default=10, ge=1)
    k_max: int = Field(default=6, ge=1)  # bound states per branch
    richardson: bool = False


class PotentialsSection(StrictModel):
    lambda_sq_values: Optional[List[float]] = None  # several surface sets in one run


class BoundStatesSection(StrictModel):
    branches: List[Union[int, str]] = Field(default_factory=lambda: [0, 1])
    nonadiabatic: bool = True


class SpectrumSection(StrictModel):
    gamma: float = Field(gt=0)
    omega_min: float
    omega_max: float
    omega_points: int = Field(default=2001, ge=3)
    temperature: float = Field(default=0.0, ge=0)
    probe_site: int = Field(default=1, ge=1)
    eigenpair_count: Optional[int] = Field(default=None, ge=2)
    prominence: float = Field(default=1e-3, gt=0)
    bo_approx: bool = False
    bo_levels: int = Field(default=60, ge=1)

    @model_validator(mode="after")
    def _window(self) -> "SpectrumSection":
        if self.omega_max <= self.omega_min:
            raise ValueError("omega_max must exceed omega_min")
        return self

    def to_config(self, fock_cutoff: Optional[int] = None) -> SpectrumConfig:
        return SpectrumConfig.uniform(
            self.omega_min,
            self.omega_max,
            self.omega_points,
            gamma=self.gamma,
            temperature=self.temperature,
            probe_site=self.probe_site,
            eigenpair_count=self.eigenpair_count,
            fock_cutoff=fock_cutoff,
            prominence=self.prominence,
            bo_levels=self.bo_levels,
        )


class CircuitSection(StrictModel):
    elements: CircuitParams = Field(default_factory=lambda: CircuitParams(**REFERENCE_CIRCUIT))
    calibrate: bool = False  # True moves the flux bias off the sweet spot
    target_ghz: float = Field(default=8.0, gt=0)
    levels: int = Field(default=5, ge=2)
    plus_fock: int = Field(default=6, ge=1)
    branches: int = Field(default=3, ge=1)
    grid_half_width: float = Field(default=3.0, gt=0)
    grid_points: int = Field(default=301, ge=201)
    compare_x_max: float = Field(default=2.0, gt=0)

    @field_validator("elements", mode="before")
    @classmethod
    def _table_defaults(cls, value):
        if isinstance(value, dict):
            return {**REFERENCE_CIRCUIT, **value}
        return value


class ValidateSection(StrictModel):
    quick: bool = False
    checks: Optional[List[str]] = None


class SweepSection(StrictModel):
    key: str  # dotted path, e.g. model.lambda_sq
    values: List[Any]
    experiment: ExperimentKind = "potentials"

    @model_validator(mode="after")
    def _sweepable(self) -> "SweepSection":
        if not self.values:
            raise ValueError("sweep values must not be empty")
        if self.experiment in ("sweep", "validate"):
            raise ValueError(f"cannot sweep a '{self.experiment}' experiment")
        return self


class ExperimentConfig(StrictModel):
    kind: ExperimentKind
    model: Optional[ModelSection] = None
    numerics: NumericsSection = Field(default_factory=NumericsSection)
    potentials: PotentialsSection = Field(default_factory=PotentialsSection)
    bound_states: BoundStatesSection = Field(default_factory=BoundStatesSection)
    spectrum: Optional[SpectrumSection] = None
    ramsey: RamseyConfig = Field(default_factory=RamseyConfig)
    circuit: CircuitSection = Field(default_factory=CircuitSection)
    validate_: ValidateSection = Field(default_factory=ValidateSection, alias="validate")
    sweep: Optional[SweepSection] = None
    output_dir: Optional[str] = None

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    @model_validator(mode="after")
    def _sections_for_kind(self) -> "ExperimentConfig":
        kind = self.sweep.experiment if self.kind == "sweep" and self.sweep else self.kind
        if self.kind == "sweep" and self.sweep is None:
            raise ValueError("a sweep needs a 'sweep' section")
        if kind in ("potentials", "bound_states", "spectrum", "spectrum_thermal", "ramsey") and self.model is None:
            raise ValueError(f"'{kind}' needs a 'model' section")
        if kind in ("spectrum", "spectrum_thermal") and self.spectrum is None:
            raise ValueError(f"'{kind}' needs a 'spectrum' section")
        if kind == "spectrum_thermal" and self.spectrum.temperature <= 0:
            raise ValueError("spectrum_thermal needs spectrum.temperature > 0")
        return self

    def params(self) -> ModelParams:
        if self.model is None:
            raise ConfigError("section missing", key_path="model")
        return self.model.resolve()

    def resolved(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True, exclude_none=True)


def _key_path(location) -> str:
    return ".".join(str(part) for part in location if part not in ("function-after",))


def parse_config(document: Dict[str, Any]) -> ExperimentConfig:
    if not isinstance(document, dict):
        raise ConfigError("config must be a mapping")
    try:
        return ExperimentConfig.model_validate(document)
    except ValidationError as exc:
        error = exc.errors()[0]
        raise ConfigError(error["msg"], key_path=_key_path(error["loc"]) or None) from exc


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML in {path}: {exc}") from exc
    return parse_config(document)


def with_override(config: ExperimentConfig, key: str, value: Any, kind: Optional[str] = None) -> ExperimentConfig:
    """Copy of the config with the dotted `key` set to `value` (and optionally another kind)."""
    document = copy.deepcopy(config.resolved())
    if kind is not None:
        document["kind"] = kind
        document.pop("sweep", None)
    node = document
    parts = key.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError("swept key does not name a nested setting", key_path=key)
    for alternative in EXCLUSIVE.get(key, ()):
        node.pop(alternative, None)
    node[parts[-1]] = value
    return parse_config(document)
