import hashlib
import json
import logging

from collections import OrderedDict
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Union

import yaml

from qgarchbench.components.diagnostics import DEFAULT_HIST_BINS
from qgarchbench.model import DEFAULT_SIM_BURN_IN, DEFAULT_TRUE_PARAMS, PARAM_NAMES, QgarchParams
from qgarchbench.samplers.adaptive import AdaptationSchedule
from qgarchbench.samplers.metropolis import MetropolisSettings
from qgarchbench.utils.env_utils import MAIN_RANDOM_SEED
from qgarchbench.utils.errors import ConfigError, InvalidParamsError

logger = logging.getLogger(__name__)


def _int(value: Any) -> int:
    if isinstance(value, bool) or float(value) != int(float(value)):
        raise ValueError(f"expected an integer, got {value!r}")
    return int(float(value))


def _optional_int(value: Any) -> Optional[int]:
    return None if value is None else _int(value)


def _bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    if str(value).lower() in ("1", "true", "yes", "on"):
        return True
    if str(value).lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def _optional_str(value: Any) -> Optional[str]:
    return None if value is None else str(value)


# flat key -> parser, in file order
FLAT_KEYS: Dict[str, Callable[[Any], Any]] = OrderedDict(
    [
        ("alpha", float),
        ("beta", float),
        ("omega", float),
        ("gamma", float),
        ("n_obs", _int),
        ("sim_burn_in", _int),
        ("data_seed", _int),
        ("chain_seed", _int),
        ("burn_in", _int),
        ("pilot", _int),
        ("refresh", _int),
        ("analysis_samples", _int),
        ("nu", float),
        ("freeze_after", _optional_int),
        ("metropolis_burn_in", _int),
        ("metropolis_samples", _int),
        ("step_alpha", float),
        ("step_beta", float),
        ("step_omega", float),
        ("step_gamma", float),
        ("one_at_a_time", _bool),
        ("hist_bins", _int),
        ("acf_t_max", _optional_int),
        ("parallel", _bool),
        ("output_dir", _optional_str),
    ]
)


@dataclass(frozen=True)
class ExperimentConfig:
    true_params: QgarchParams = DEFAULT_TRUE_PARAMS
    n_obs: int = 2000
    sim_burn_in: int = DEFAULT_SIM_BURN_IN
    data_seed: int = MAIN_RANDOM_SEED
    chain_seed: int = MAIN_RANDOM_SEED
    schedule: AdaptationSchedule = field(default_factory=AdaptationSchedule)
    metropolis: MetropolisSettings = field(default_factory=MetropolisSettings)
    hist_bins: int = DEFAULT_HIST_BINS
    # None picks min(N - 1, max(100, N // 10))
    acf_t_max: Optional[int] = None
    # run the two chains in separate processes
    parallel: bool = False
    output_dir: Optional[str] = None

    def validate(self) -> "ExperimentConfig":
        try:
            self.true_params.validate()
            self.true_params.unconditional_variance()
        except InvalidParamsError as e:
            raise ConfigError(str(e)) from e
        if self.n_obs < 2:
            raise ConfigError(f"n_obs must be >= 2, got {self.n_obs}")
        if self.sim_burn_in < 0:
            raise ConfigError(f"sim_burn_in must be >= 0, got {self.sim_burn_in}")
        for name in ("data_seed", "chain_seed"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        self.schedule.validate()
        self.metropolis.validate()
        if self.hist_bins < 2:
            raise ConfigError(f"hist_bins must be >= 2, got {self.hist_bins}")
        if self.acf_t_max is not None and self.acf_t_max < 1:
            raise ConfigError(f"acf_t_max must be >= 1, got {self.acf_t_max}")
        return self

    def to_flat(self) -> Dict[str, Any]:
        flat: Dict[str, Any] = OrderedDict(self.true_params.as_dict())
        flat["n_obs"] = self.n_obs
        flat["sim_burn_in"] = self.sim_burn_in
        flat["data_seed"] = self.data_seed
        flat["chain_seed"] = self.chain_seed
        flat["burn_in"] = self.schedule.burn_in
        flat["pilot"] = self.schedule.pilot
        flat["refresh"] = self.schedule.refresh
        flat["analysis_samples"] = self.schedule.analysis_samples
        flat["nu"] = float(self.schedule.nu)
        flat["freeze_after"] = self.schedule.freeze_after
        flat["metropolis_burn_in"] = self.metropolis.burn_in
        flat["metropolis_samples"] = self.metropolis.samples
        for name, step in zip(PARAM_NAMES, self.metropolis.step_sizes):
            flat[f"step_{name}"] = float(step)
        flat["one_at_a_time"] = self.metropolis.one_at_a_time
        flat["hist_bins"] = self.hist_bins
        flat["acf_t_max"] = self.acf_t_max
        flat["parallel"] = self.parallel
        flat["output_dir"] = self.output_dir
        return flat

    @classmethod
    def from_flat(cls, values: Mapping[str, Any]) -> "ExperimentConfig":
        unknown = sorted(set(values) - set(FLAT_KEYS))
        if unknown:
            raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")
        flat = cls().to_flat()
        for key, value in values.items():
            try:
                flat[key] = FLAT_KEYS[key](value)
            except (TypeError, ValueError) as e:
                raise ConfigError(f"{key}: {e}") from None
        config = cls(
            true_params=QgarchParams(*(flat[name] for name in PARAM_NAMES)),
            n_obs=flat["n_obs"],
            sim_burn_in=flat["sim_burn_in"],
            data_seed=flat["data_seed"],
            chain_seed=flat["chain_seed"],
            schedule=AdaptationSchedule(
                burn_in=flat["burn_in"],
                pilot=flat["pilot"],
                refresh=flat["refresh"],
                analysis_samples=flat["analysis_samples"],
                nu=flat["nu"],
                freeze_after=flat["freeze_after"],
            ),
            metropolis=MetropolisSettings(
                step_sizes=tuple(flat[f"step_{name}"] for name in PARAM_NAMES),
                burn_in=flat["metropolis_burn_in"],
                samples=flat["metropolis_samples"],
                one_at_a_time=flat["one_at_a_time"],
                window=flat["refresh"],
            ),
            hist_bins=flat["hist_bins"],
            acf_t_max=flat["acf_t_max"],
            parallel=flat["parallel"],
            output_dir=flat["output_dir"],
        )
        return config.validate()

    def with_overrides(self, **overrides: Any) -> "ExperimentConfig":
        """Flat-key overrides; None values leave the current setting."""
        flat = self.to_flat()
        flat.update({k: v for k, v in overrides.items() if v is not None})
        return ExperimentConfig.from_flat(flat)

    def with_output_dir(self, output_dir: Union[str, Path]) -> "ExperimentConfig":
        return replace(self, output_dir=str(output_dir))

    @property
    def config_hash(self) -> str:
        flat = self.to_flat()
        flat.pop("output_dir")
        canonical = json.dumps(flat, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ExperimentConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"Config file {path} must exist.")
        with open(path, "r") as fp:
            try:
                values = yaml.safe_load(fp)
            except yaml.YAMLError as e:
                raise ConfigError(f"{path}: {e}") from e
        if values is None:
            values = {}
        if not isinstance(values, Mapping):
            raise ConfigError(f"{path}: expected a key-value mapping")
        return cls.from_flat(values)

    def dump(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        with open(path, "w") as fp:
            yaml.safe_dump(dict(self.to_flat()), fp, sort_keys=False)
        return path
