"""
Configuration for matchlab campaigns and budgets
Module defaults, optionally overridden by .matchlab/config.toml
"""
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from matchlab.errors import ConfigError

logger = logging.getLogger(__name__)

# =============================================================================
# CAMPAIGN TARGETS
# domain decides which instance generator a target uses
# =============================================================================

THEOREM_CONFIG = {
    "thm31": {
        "domain": "group",
        "description": "locally matched implies matched (all pairs, small groups)",
        "bounds": {"max_order": 10},
    },
    "thm35": {
        "domain": "group",
        "description": "matching property iff torsion-free or prime cyclic",
        "bounds": {"primes": [2, 3, 5, 7], "composites": [4, 6, 8, 9, 10, 12], "extra_groups": [[2, 2]]},
    },
    "thm41": {
        "domain": "group",
        "description": "cyclic groups with generator targets are matched",
        "bounds": {"max_order": 10},
    },
    "cor36": {
        "domain": "group",
        "description": "pairs smaller than the smallest subgroup are matched",
        "bounds": {"groups": [[9], [25], [3, 9]]},
    },
    "kneser": {
        "domain": "group",
        "description": "Kneser inequality with the sumset stabilizer",
        "bounds": {"max_cyclic": 30, "products": [[2, 12], [3, 9], [2, 2, 4], [4, 6]]},
    },
    "thm24": {
        "domain": "linear",
        "description": "dimension criterion agrees with matched-basis search",
        "bounds": {"fields": [[2, 2], [2, 3], [2, 4], [3, 2], [3, 3], [3, 4]], "max_dim": 3},
    },
    "thm42": {
        "domain": "linear",
        "description": "primitive targets are always matched",
        "bounds": {"fields": [[2, 4], [2, 6]]},
    },
    "thm51": {
        "domain": "linear",
        "description": "linear locally matched implies matched",
        "bounds": {"fields": [[2, 4], [3, 2]], "basis_trials": 200},
    },
    "remark56": {
        "domain": "linear",
        "description": "strong matchings are matched (and locally matched)",
        "bounds": {"fields": [[2, 4], [2, 6], [3, 2]], "basis_trials": 200},
    },
    "linear_kneser": {
        "domain": "linear",
        "description": "linear Kneser inequality with the stabilizer subfield",
        "bounds": {"fields": [[2, 4], [2, 5], [2, 6], [3, 2], [3, 4]]},
    },
    "thm25": {
        "domain": "linear",
        "description": "linear matching property iff the degree has no proper divisor",
        "bounds": {"fields": [[2, 2], [2, 3], [2, 4], [2, 5], [2, 6], [3, 2], [3, 3]], "basis_trials": 50},
    },
    "tamper": {
        "domain": "certificate",
        "description": "single-field mutations of certificates never verify",
        "bounds": {},
    },
}

# Global budgets (all overridable from [budgets] in the settings file)
BUDGETS = {
    "ordered_basis_budget": 10**6,
    "subspace_budget": 10**5,
    "exhaustive_instance_budget": 5 * 10**6,
    "max_criterion_dim": 20,
    "bijection_oracle_limit": 8,
}

DEFAULT_SETTINGS_PATH = Path(".matchlab") / "config.toml"


@dataclass(frozen=True)
class Settings:
    """Resolved settings handed to campaigns and linear searches"""

    ordered_basis_budget: int = BUDGETS["ordered_basis_budget"]
    subspace_budget: int = BUDGETS["subspace_budget"]
    exhaustive_instance_budget: int = BUDGETS["exhaustive_instance_budget"]
    max_criterion_dim: int = BUDGETS["max_criterion_dim"]
    bijection_oracle_limit: int = BUDGETS["bijection_oracle_limit"]
    basis_trials: int = 200
    subspace_trials: int = 200
    progress_every: int = 10_000
    max_finding_certificates: int = 10
    log_level: str = "INFO"
    theorem_overrides: dict = field(default_factory=dict, compare=False)


# TOML table -> Settings fields it may set
_SECTION_KEYS = {
    "budgets": set(BUDGETS),
    "campaign": {"basis_trials", "subspace_trials", "progress_every", "max_finding_certificates"},
    "logging": {"log_level"},
}


def load_settings(path=None, **overrides) -> Settings:
    """
    Build Settings from module defaults, the TOML file and explicit overrides.

    Args:
        path: settings file; defaults to .matchlab/config.toml when it exists
        overrides: final values (None values are ignored)

    Returns:
        Settings
    """
    values = {}
    theorem_overrides = {}

    settings_path = Path(path) if path is not None else DEFAULT_SETTINGS_PATH
    if settings_path.exists():
        try:
            with open(settings_path, "rb") as f:
                raw = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"Cannot parse settings file {settings_path}: {e}")

        for section, table in raw.items():
            if section == "theorems":
                # [theorems.thm31] max_order = 8
                for target, bounds in table.items():
                    if target not in THEOREM_CONFIG:
                        raise ConfigError(f"Unknown theorem id '{target}' in {settings_path}")
                    theorem_overrides[target] = dict(bounds)
                continue
            if section not in _SECTION_KEYS:
                raise ConfigError(f"Unknown settings section [{section}] in {settings_path}")
            for key, value in table.items():
                if key not in _SECTION_KEYS[section]:
                    raise ConfigError(f"Unknown key '{key}' in [{section}] of {settings_path}")
                values[key] = value
        logger.debug("Loaded settings from %s", settings_path)
    elif path is not None:
        raise ConfigError(f"Settings file not found: {settings_path}")

    known = {f.name for f in fields(Settings)}
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in known:
            raise ConfigError(f"Unknown setting '{key}'")
        values[key] = value

    return replace(Settings(), theorem_overrides=theorem_overrides, **values)


def theorem_bounds(target: str, settings: Settings = None) -> dict:
    """Default bounds of a campaign target merged with settings overrides"""
    if target not in THEOREM_CONFIG:
        raise ConfigError(f"Unknown theorem id '{target}'; choose from {', '.join(THEOREM_CONFIG)}")
    bounds = dict(THEOREM_CONFIG[target]["bounds"])
    if settings is not None:
        bounds.update(settings.theorem_overrides.get(target, {}))
    return bounds


def get_theorem_ids() -> list:
    """List of campaign target ids"""
    return list(THEOREM_CONFIG.keys())
