"""
Run Configuration
Flat, versioned settings shared by every subcommand, loaded from JSON or YAML
"""

import json
import math
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from dotenv import load_dotenv
from loguru import logger

from src.distributions.families import DistributionSpec, parse_family_token
from src.errors import ConfigError, InvalidParameterError
from src.grid.convolution import METHODS
from src.grid.grid_density import DEFAULT_STEP, GridSpec, covering_grid, default_grid

SCHEMA_VERSION = 1
OUTPUT_DIR_ENV = "ENTROPIC_LAB_OUTPUT_DIR"
FORMATS = ("csv", "json", "svg")
R2_POLYNOMIALS = ("he4", "printed")
MAX_SWEEP_N = 4096
SKEWED_MIXTURE = "mixture:0.25,1.5,0.25,0.75,-0.5,0.25"


def dyadic_range(lo: int, hi: int) -> List[int]:
    """Powers of two times lo up to hi: 8:512 -> [8, 16, ..., 512]"""
    if lo < 1 or hi < lo:
        raise InvalidParameterError("ns", f"need 1 <= lo <= hi, got {lo}:{hi}")
    values = []
    n = lo
    while n <= hi:
        values.append(n)
        n *= 2
    return values


def parse_ns(text: str) -> List[int]:
    """Either a dyadic range `lo:hi` or an explicit list `8,12,20`"""
    try:
        if ":" in text:
            lo, hi = text.split(":", 1)
            return dyadic_range(int(lo), int(hi))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InvalidParameterError("ns", f"expected lo:hi or a comma list, got '{text}'")


@dataclass(frozen=True)
class RunConfig:
    """
    Effective settings of one run

    Defaults < config file < environment < command-line flags. Families are kept as
    `kind:p1,p2` tokens so the configuration dumps and re-loads without loss.
    """

    families: List[str] = field(default_factory=lambda: [SKEWED_MIXTURE])
    delta0: float = 1.0
    L: Optional[float] = None
    step: float = DEFAULT_STEP
    ns: List[int] = field(default_factory=lambda: dyadic_range(8, 512))
    n: int = 16
    u: float = math.sqrt(1.5)
    k: int = 2
    delta1: float = 1.0
    r2_polynomial: str = "he4"
    method: str = "spectral"
    output_dir: str = "outputs"
    formats: List[str] = field(default_factory=lambda: list(FORMATS))
    workers: int = 1
    timing: bool = False
    progress: bool = False

    def __post_init__(self):
        if not self.families:
            raise InvalidParameterError("families", "at least one family token is required")
        for token in self.families:
            parse_family_token(token)
        if not self.delta0 > 0:
            raise InvalidParameterError("delta0", f"must be positive, got {self.delta0}")
        if not 0 < self.delta1 <= 1.0:
            raise InvalidParameterError("delta1", f"must lie in (0, 1], got {self.delta1}")
        if not self.step > 0:
            raise InvalidParameterError("step", f"must be positive, got {self.step}")
        if self.L is not None and not self.L > 0:
            raise InvalidParameterError("L", f"must be positive, got {self.L}")
        if not self.ns:
            raise InvalidParameterError("ns", "at least one sample size is required")
        if any(b <= a for a, b in zip(self.ns, self.ns[1:])):
            raise InvalidParameterError("ns", f"must be strictly increasing, got {self.ns}")
        if self.ns[0] < 1 or self.ns[-1] > MAX_SWEEP_N:
            raise InvalidParameterError("ns", f"must lie in [1, {MAX_SWEEP_N}], got {self.ns}")
        if self.n < 1:
            raise InvalidParameterError("n", f"must be at least 1, got {self.n}")
        if not 1.0 <= self.u < math.sqrt(2.0):
            raise InvalidParameterError("u", f"must lie in [1, sqrt(2)), got {self.u}")
        if self.k not in (0, 1, 2):
            raise InvalidParameterError("k", f"must be 0, 1 or 2, got {self.k}")
        if self.r2_polynomial not in R2_POLYNOMIALS:
            raise InvalidParameterError("r2_polynomial", f"expected one of {R2_POLYNOMIALS}")
        if self.method not in METHODS:
            raise InvalidParameterError("method", f"expected one of {METHODS}")
        unknown = sorted(set(self.formats) - set(FORMATS))
        if unknown:
            raise InvalidParameterError("formats", f"unknown formats {unknown}, expected {FORMATS}")
        if self.workers < 1:
            raise InvalidParameterError("workers", f"must be at least 1, got {self.workers}")

    # ------------------------------------------------------------------
    # Derived objects
    # ------------------------------------------------------------------
    def specs(self) -> List[DistributionSpec]:
        return [parse_family_token(token) for token in self.families]

    def grid(self, n: int) -> GridSpec:
        """Working grid of W_n; a single standardized summand gets a grid covering its tail"""
        if self.L is None and n == 1:
            spec = self.specs()[0]
            return covering_grid([spec.scaled(1.0 / math.sqrt(spec.variance))], 1, step=self.step)
        return default_grid(n, step=self.step, L=self.L)

    @property
    def output_path(self) -> Path:
        return Path(self.output_dir)

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------
    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        """Build from a flat mapping carrying `schema: 1`; unknown keys are rejected"""
        if not isinstance(data, dict):
            raise ConfigError(f"config must be a flat mapping, got {type(data).__name__}")
        data = dict(data)
        schema = data.pop("schema", None)
        if schema != SCHEMA_VERSION:
            raise ConfigError(f"unsupported config schema {schema!r}, expected {SCHEMA_VERSION}")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys {unknown}")
        for key in ("families", "ns", "formats"):
            if key in data and not isinstance(data[key], list):
                raise ConfigError(f"'{key}' must be a list")
        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        data = {"schema": SCHEMA_VERSION}
        data.update(asdict(self))
        return data

    def dump(self, path: Union[str, Path]) -> Path:
        """Write the configuration as JSON (or YAML for .yaml/.yml paths)"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        if path.suffix in (".yaml", ".yml"):
            text = yaml.safe_dump(self.to_dict(), sort_keys=True)
        else:
            text = json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        path.write_text(text, encoding="utf-8")
        logger.info(f"Wrote effective configuration to {path}")
        return path

    def with_overrides(self, **overrides) -> "RunConfig":
        """Copy with every non-None override applied"""
        changes = {key: value for key, value in overrides.items() if value is not None}
        return replace(self, **changes) if changes else self


def load_config(path: Union[str, Path]) -> RunConfig:
    """
    Read a flat JSON or YAML configuration file

    Raises:
        ConfigError: malformed document, unknown keys or unsupported schema
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix in (".yaml", ".yml"):
            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot parse {path}: {e}")
    config = RunConfig.from_dict(data)
    logger.info(f"Loaded configuration from {path} ({len(config.families)} families)")
    return config


def apply_environment(config: RunConfig) -> RunConfig:
    """Apply the output-directory override from the environment or a .env file"""
    load_dotenv()
    output_dir = os.getenv(OUTPUT_DIR_ENV)
    if output_dir:
        logger.debug(f"{OUTPUT_DIR_ENV} overrides output_dir with {output_dir}")
        return replace(config, output_dir=output_dir)
    return config
