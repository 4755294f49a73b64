# config.py

import os
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional

from dotenv import dotenv_values, load_dotenv

from services.errors import ConfigError

load_dotenv()

DEFAULT_SEED = int(os.getenv("HARNACK_SEED", "42"))
DEFAULT_T_MIN = float(os.getenv("HARNACK_T_MIN", "1e-3"))
OUTPUT_DIR = os.getenv("HARNACK_OUTPUT_DIR", "reports")
RECORD_RUNS = os.getenv("HARNACK_RECORD", "1") not in ("0", "false", "False", "")
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

DEFAULT_TOLERANCES = {
    "acvt": 1.0e-10,
    "identity": 1.0e-10,
    "second_variation": 1.0e-6,
    "nonnegativity": 1.0e-6,
    "cone": 1.0e-8,
    "riccati": 1.0e-6,
    "rk4_order": 0.3,
    "evolution": 1.0e-9,
    "hamilton": 1.0e-9,
    "lemma": 1.0e-10,
    "grid_residual": 0.1,
    "rate": 0.3,
    "harnack": 1.0e-6,
    "soliton": 1.0e-6,
    "transport": 1.0e-6,
}

DEFAULT_PROVIDERS = {
    "identity-suite": None,
    "cone-check": None,
    "ode-invariance": None,
    "verify-evolution": "sphere:n=3,r0=1",
    "harnack-scan": "sphere:n=3,r0=1",
    "soliton-detect": "cigar",
}

DEFAULT_DIMS = {
    "identity-suite": [3, 4, 5],
    "cone-check": [4, 5],
    "ode-invariance": [3, 4, 5],
}


def parse_tolerance(text: str):
    """`name=value` -> (name, float value > 0)."""
    if "=" not in text:
        raise ConfigError(f"expected --tol name=value, got {text!r}")
    name, value = (part.strip() for part in text.split("=", 1))
    if name not in DEFAULT_TOLERANCES:
        raise ConfigError(f"unknown tolerance {name!r}; known: {', '.join(sorted(DEFAULT_TOLERANCES))}")
    try:
        number = float(value)
    except ValueError as exc:
        raise ConfigError(f"tolerance {name} is not a number: {value!r}") from exc
    if not number > 0:
        raise ConfigError(f"tolerance {name} must be positive")
    return name, number


def _parse_dims(text) -> List[int]:
    if isinstance(text, (list, tuple)):
        dims = [int(d) for d in text]
    else:
        try:
            dims = [int(d) for d in str(text).split(",") if d.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad dims {text!r}") from exc
    if not dims or min(dims) < 2:
        raise ConfigError("dims must all be at least 2 (no curvature in dimension 1)")
    return dims


def _env_tolerances() -> Dict[str, float]:
    found = {}
    for name in DEFAULT_TOLERANCES:
        value = os.getenv(f"HARNACK_TOL_{name.upper()}")
        if value is not None:
            found.update([parse_tolerance(f"{name}={value}")])
    return found


@dataclass
class RunConfig:
    command: str
    seed: int = DEFAULT_SEED
    dims: List[int] = field(default_factory=lambda: [3, 4, 5])
    samples: int = 5
    instances: int = 25
    provider: Optional[str] = None
    mode: Optional[str] = None
    tolerances: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    out_dir: str = OUTPUT_DIR
    record: bool = RECORD_RUNS
    t_min: float = DEFAULT_T_MIN

    def tol(self, name: str) -> float:
        return self.tolerances[name]

    def echo(self) -> dict:
        """Config as stored in reports; excludes nothing but the output location."""
        return {
            "command": self.command,
            "seed": self.seed,
            "dims": list(self.dims),
            "samples": self.samples,
            "instances": self.instances,
            "provider": self.provider,
            "mode": self.mode,
            "tolerances": dict(sorted(self.tolerances.items())),
            "t_min": self.t_min,
        }


def load_run_config(command: str, args=None, config_path: Optional[str] = None, overrides: Iterable[str] = ()) -> RunConfig:
    """Builds a RunConfig with precedence CLI flag > config file > environment > default."""
    cfg = RunConfig(command=command, provider=DEFAULT_PROVIDERS.get(command), dims=list(DEFAULT_DIMS.get(command, [3, 4, 5])))
    cfg.tolerances.update(_env_tolerances())

    config_path = config_path or getattr(args, "config", None)
    if config_path:
        if not os.path.exists(config_path):
            raise ConfigError(f"config file not found: {config_path}")
        values = {k.upper(): v for k, v in dotenv_values(config_path).items() if v is not None}
        try:
            if "SEED" in values:
                cfg.seed = int(values["SEED"])
            if "SAMPLES" in values:
                cfg.samples = int(values["SAMPLES"])
            if "INSTANCES" in values:
                cfg.instances = int(values["INSTANCES"])
        except ValueError as exc:
            raise ConfigError(f"{config_path}: {exc}") from exc
        if "DIMS" in values:
            cfg.dims = _parse_dims(values["DIMS"])
        cfg.provider = values.get("PROVIDER", cfg.provider)
        cfg.mode = values.get("MODE", cfg.mode)
        cfg.out_dir = values.get("OUT", cfg.out_dir)
        for key, value in values.items():
            if key.startswith("TOL_"):
                cfg.tolerances.update([parse_tolerance(f"{key[4:].lower()}={value}")])

    if args is not None:
        if getattr(args, "seed", None) is not None:
            cfg.seed = args.seed
        if getattr(args, "dims", None):
            cfg.dims = _parse_dims(args.dims)
        if getattr(args, "samples", None) is not None:
            cfg.samples = args.samples
        if getattr(args, "instances", None) is not None:
            cfg.instances = args.instances
        if getattr(args, "provider", None):
            cfg.provider = args.provider
        if getattr(args, "mode", None):
            cfg.mode = args.mode
        if getattr(args, "out", None):
            cfg.out_dir = args.out
        if getattr(args, "no_record", False):
            cfg.record = False
        overrides = list(overrides) + list(getattr(args, "tol", None) or [])
    for item in overrides:
        cfg.tolerances.update([parse_tolerance(item)])

    if cfg.samples < 1 or cfg.instances < 1:
        raise ConfigError("samples and instances must be positive")
    cfg.dims = _parse_dims(cfg.dims)
    return cfg
