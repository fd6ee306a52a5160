import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, Optional

import attrs

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .errors import ConfigError, StorageError
from .schemas import EstimatorSettings, LambdaGrid, RunConfig, SimulationConfig

CONFIG_ENV = "SFOFR_CONFIG"
LOG_ENV = "SFOFR_LOG"

_NUMBER = (int, float)

# Allowed keys per section and the TOML types they accept.
SECTIONS: Dict[str, Dict[str, Any]] = {
    "bases": {"num_y": int, "num_x": int, "degree": int},
    "iv": {"lags": int, "allow_pinv": bool},
    "lambda": {"rho": list, "beta": list, "allow_zero": bool, "fixed": list},
    "bootstrap": {"replicates": int, "alpha": _NUMBER},
    "simulation": {
        "n_train": int,
        "n_test": int,
        "eta": _NUMBER,
        "grid_size": int,
        "replications": int,
        "noise_sd": _NUMBER,
    },
    "spatial": {"neighbors": int, "distance": str},
    "neumann": {"tol": _NUMBER, "max_iter": int},
    "moran": {"num_funcs": int},
    "io": {"out_dir": str},
}
TOP_LEVEL = {"schema_version": int, "seed": int, "jobs": int}


def get_config_path() -> Optional[Path]:
    """Get the default config path from the environment."""
    value = os.getenv(CONFIG_ENV)
    return Path(value) if value else None


def _check_type(where: str, value, expected):
    # bool is an int subclass; keep the two apart.
    if expected is not bool and isinstance(value, bool):
        raise ConfigError(f"{where} must be a number or string, got a boolean")
    if not isinstance(value, expected):
        names = expected.__name__ if isinstance(expected, type) else "number"
        raise ConfigError(f"{where} must be of type {names}, got {type(value).__name__}")


def _section(data: dict, name: str) -> dict:
    section = data.get(name, {})
    if not isinstance(section, dict):
        raise ConfigError(f"[{name}] must be a table")
    allowed = SECTIONS[name]
    for key, value in section.items():
        if key not in allowed:
            raise ConfigError(f"Unknown key '{key}' in [{name}]", details=f"allowed: {sorted(allowed)}")
        _check_type(f"{name}.{key}", value, allowed[key])
    return section


def from_mapping(data: dict) -> RunConfig:
    """Validate a parsed config tree and build a RunConfig.

    Raises:
        ConfigError: On unknown sections or keys, wrong types or invalid values
    """
    for key, value in data.items():
        if key in TOP_LEVEL:
            _check_type(key, value, TOP_LEVEL[key])
        elif key not in SECTIONS:
            raise ConfigError(f"Unknown config section or key '{key}'")

    bases = _section(data, "bases")
    iv = _section(data, "iv")
    lam = _section(data, "lambda")
    boot = _section(data, "bootstrap")
    sim = _section(data, "simulation")
    spatial = _section(data, "spatial")
    neumann = _section(data, "neumann")
    moran = _section(data, "moran")
    io = _section(data, "io")
    seed = data.get("seed", 0)

    try:
        estimator = EstimatorSettings(
            num_y=bases.get("num_y", 10),
            num_x=bases.get("num_x", 10),
            degree=bases.get("degree", 3),
            lags=iv.get("lags", 2),
            allow_pinv=iv.get("allow_pinv", True),
            neumann_tol=float(neumann.get("tol", 0.001)),
            max_iter=neumann.get("max_iter", 1000),
        )
        grid = None
        if "rho" in lam or "beta" in lam:
            default = LambdaGrid.default()
            grid = LambdaGrid(
                rho_values=lam.get("rho", default.rho_values),
                beta_values=lam.get("beta", default.beta_values),
                allow_zero=lam.get("allow_zero", False),
            )
        fixed = lam.get("fixed")
        return RunConfig(
            schema_version=data.get("schema_version", 1),
            estimator=estimator,
            grid=grid,
            fixed_lambdas=tuple(float(v) for v in fixed) if fixed is not None else None,
            bootstrap_replicates=boot.get("replicates", 199),
            alpha=float(boot.get("alpha", 0.05)),
            simulation=SimulationConfig(
                n_train=sim.get("n_train", 100),
                n_test=sim.get("n_test", 1000),
                eta=float(sim.get("eta", 0.1)),
                grid_size=sim.get("grid_size", 101),
                seed=seed,
                replications=sim.get("replications", 50),
                noise_sd=float(sim.get("noise_sd", 1.0)),
            ),
            neighbors=spatial.get("neighbors", 4),
            distance=spatial.get("distance", "haversine"),
            moran_num_funcs=moran.get("num_funcs", 13),
            out_dir=io.get("out_dir"),
            seed=seed,
            jobs=data.get("jobs", 1),
        )
    except (TypeError, ValueError) as e:
        raise ConfigError("Invalid configuration value", details=str(e)) from e


def load_config(path=None) -> RunConfig:
    """Load a TOML run config; without a path (or SFOFR_CONFIG) use the defaults."""
    path = Path(path) if path else get_config_path()
    if path is None:
        return RunConfig()
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except FileNotFoundError as e:
        raise StorageError("Config file not found", path=str(path)) from e
    except OSError as e:
        raise StorageError("Failed to read config file", path=str(path), details=str(e)) from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError("Config file is not valid TOML", path=str(path), details=str(e)) from e
    try:
        return from_mapping(data)
    except ConfigError as e:
        e.path = e.path or str(path)
        e.args = (e._format_message(),)
        raise


def with_overrides(config: RunConfig, seed=None, jobs=None, out_dir=None) -> RunConfig:
    """Apply command-line overrides; None leaves a value untouched."""
    changes = {}
    if seed is not None:
        changes["seed"] = seed
        changes["simulation"] = attrs.evolve(config.simulation, seed=seed)
    if jobs is not None:
        changes["jobs"] = jobs
    if out_dir is not None:
        changes["out_dir"] = str(out_dir)
    return attrs.evolve(config, **changes) if changes else config


def configure_logging(level: Optional[str] = None):
    """Configure the root logger from level or SFOFR_LOG (default WARNING)."""
    name = (level or os.getenv(LOG_ENV) or "WARNING").upper()
    numeric = logging.getLevelName(name)
    if not isinstance(numeric, int):
        raise ConfigError(f"Unknown log level '{name}'")
    logging.basicConfig(
        level=numeric, format="%(levelname)s %(name)s: %(message)s", force=True
    )
