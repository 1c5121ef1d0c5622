"""Configuration for gqla training runs.

A configuration is a flat YAML mapping. Values are resolved in three layers:
the named `preset` from the packaged presets, then the file keys, then the
command line overrides.
"""

from typing import Any, Literal, cast

import yaml
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from gqla.core import (
    BpConfig,
    CodeDimensions,
    DensitySpec,
    ErrorPatternSpec,
    GqlaError,
    OptimizerSpec,
    OptimizerVariant,
)
from gqla.platform.assets import read_asset


class TrainingConfig(BaseModel):
    """Hyper-parameters of one training session."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True, frozen=True)

    n: int = Field(gt=0)
    k: int = Field(gt=0)
    alpha: float = Field(gt=0)
    n_errors: int = Field(ge=0)
    threshold_t: int = Field(ge=1, alias="threshold_T")
    init_density: float = Field(ge=0, le=1)
    val_ebno_db: float

    batch_size: int = Field(default=8, gt=0)
    max_epochs: int = Field(default=256, ge=0)
    steps_per_epoch: int = Field(default=100, gt=0)
    train_iterations: int = Field(default=3, gt=0)
    val_iterations: int = Field(default=5, gt=0)
    val_target_rel: float = Field(default=0.3, gt=0)
    val_max_blocks: int = Field(default=10**6, gt=0)
    patience: int = Field(default=10, gt=0)
    optimizer: OptimizerVariant = "mb_gqla_update_matrix"
    learning_rate: float = Field(default=1.0, gt=0)
    init_magnitude: float = Field(default=1e-3, gt=0)
    epsilon: float = Field(default=1e-7, gt=0, lt=1)
    gradient_mode: Literal["exact", "pass_through"] = "pass_through"
    seed: int = Field(default=0, ge=0)
    preset: str | None = None

    @field_validator("val_max_blocks", mode="before")
    @classmethod
    def accept_float_block_counts(cls, value: Any) -> Any:
        """Allow `1e6` style block counts."""
        if isinstance(value, float) and value.is_integer():
            return int(value)
        return value

    @model_validator(mode="after")
    def check_consistency(self) -> "TrainingConfig":
        """Cross-field checks."""
        if not 0 < self.k < self.n:
            raise ValueError(f"need 0 < k < n, got n={self.n}, k={self.k}")
        if self.n_errors > self.n:
            raise ValueError(f"n_errors={self.n_errors} exceeds n={self.n}")
        if self.max_epochs > 0 and self.patience > self.max_epochs:
            raise ValueError("patience must not exceed max_epochs")
        return self

    @property
    def dims(self) -> CodeDimensions:
        """Code dimensions."""
        return CodeDimensions(self.n, self.k)

    @property
    def density(self) -> DensitySpec:
        """Initialization density."""
        return DensitySpec(self.init_density)

    @property
    def error_pattern(self) -> ErrorPatternSpec:
        """Training channel."""
        return ErrorPatternSpec(self.n_errors, self.alpha)

    @property
    def optimizer_spec(self) -> OptimizerSpec:
        """Optimizer hyper-parameters."""
        return OptimizerSpec(
            variant=self.optimizer,
            threshold_t=self.threshold_t,
            learning_rate=self.learning_rate,
            init_magnitude=self.init_magnitude,
        )

    @property
    def train_bp(self) -> BpConfig:
        """Decoder used for gradients."""
        return BpConfig(
            iterations=self.train_iterations,
            epsilon=self.epsilon,
            gradient_mode=self.gradient_mode,
        )

    @property
    def val_bp(self) -> BpConfig:
        """Decoder used for validation."""
        return BpConfig(iterations=self.val_iterations, epsilon=self.epsilon)


def get_presets() -> dict[str, dict[str, Any]]:
    """Get the packaged presets by name."""
    presets = yaml.safe_load(read_asset("presets.yml")) or {}
    return cast(dict[str, dict[str, Any]], presets)


def parse_overrides(pairs: list[str] | tuple[str, ...]) -> dict[str, Any]:
    """Parse `key=value` pairs; values are read as YAML scalars."""
    overrides: dict[str, Any] = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise GqlaError(
                "config", f"Override '{pair}' is not of the form key=value."
            )
        try:
            overrides[key.strip()] = yaml.safe_load(value) if value else None
        except yaml.YAMLError as e:
            raise GqlaError("config", f"Override '{pair}' has an invalid value.") from e
    return overrides


def _read_config_file(path: str) -> dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data: Any = yaml.safe_load(f) or {}
    except OSError as e:
        raise GqlaError("config", f"Cannot read config file {path}: {e}.") from e
    except yaml.YAMLError as e:
        raise GqlaError("config", f"Config file {path} is not valid YAML: {e}.") from e
    if not isinstance(data, dict):
        raise GqlaError("config", f"Config file {path} must be a key: value mapping.")
    return cast(dict[str, Any], data)


def _normalize(values: dict[str, Any]) -> dict[str, Any]:
    return {("threshold_t" if k == "threshold_T" else k): v for k, v in values.items()}


def _describe(error: ValidationError) -> str:
    missing: list[str] = []
    invalid: list[str] = []
    for err in error.errors():
        key = ".".join(str(p) for p in err["loc"]) or "<config>"
        if err["type"] == "missing":
            missing.append(key)
        else:
            invalid.append(f"{key} ({err['msg']})")
    parts: list[str] = []
    if missing:
        parts.append(f"missing keys: {', '.join(missing)}")
    if invalid:
        parts.append(f"invalid keys: {'; '.join(invalid)}")
    return "; ".join(parts)


def resolve_training_config(
    values: dict[str, Any], overrides: dict[str, Any] | None = None
) -> TrainingConfig:
    """Apply the preset layer and validate."""
    merged = {**_normalize(values), **_normalize(overrides or {})}
    preset_name = merged.get("preset")
    layered: dict[str, Any] = {}
    if preset_name is not None:
        presets = get_presets()
        if preset_name not in presets:
            raise GqlaError(
                "config",
                f"Unknown preset '{preset_name}'. Available: {', '.join(presets)}.",
            )
        layered.update(presets[preset_name])
    layered.update(merged)
    try:
        return TrainingConfig.model_validate(layered)
    except ValidationError as e:
        raise GqlaError("config", f"Configuration is invalid: {_describe(e)}.") from e


def load_training_config(
    path: str | None, overrides: dict[str, Any] | None = None
) -> TrainingConfig:
    """Load a training config file (optional) with overrides on top."""
    values = _read_config_file(path) if path else {}
    return resolve_training_config(values, overrides)
