"""Run configuration: flat dotted-key JSON files with CLI flag overrides.

Resolution order (later wins): built-in defaults, config file, CLI flags.
The master seed falls back to the SHOTINTENT_SEED environment variable
when neither a flag nor the file sets it.
"""
from __future__ import annotations

import json
import os
from pathlib import Path

from .errors import MalformedRow, UnknownConfigKey

DEFAULTS = {
    "preprocess.drop": 10,
    "preprocess.cap": 50,
    "preprocess.v_min": 0.5,
    "train.max_epochs": 2500,
    "train.patience": 100,
    "train.batch_size": 32,
    "train.learning_rate": 1e-3,
    "train.class_weighting": False,
    "forest.n_trees": 200,
    "cv.workers": 1,
    "seed": 0,
}

SEED_ENV_VAR = "SHOTINTENT_SEED"


def load_config_file(path: str | Path) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedRow(f"{path}: invalid JSON: {exc}")
    if not isinstance(raw, dict):
        raise MalformedRow(f"{path}: config must be a JSON object")
    for key in raw:
        if key not in DEFAULTS:
            raise UnknownConfigKey(f"{path}: unknown config key {key!r}")
    return raw


def resolve_config(
    config_path: str | Path | None = None,
    overrides: dict | None = None,
    seed_flag: int | None = None,
) -> dict:
    """Merge defaults, file, and flags; returns the fully resolved mapping."""
    resolved = dict(DEFAULTS)
    file_cfg = load_config_file(config_path) if config_path else {}
    resolved.update(file_cfg)
    for key, value in (overrides or {}).items():
        if key not in DEFAULTS:
            raise UnknownConfigKey(f"unknown config key {key!r}")
        if value is not None:
            resolved[key] = value

    if seed_flag is not None:
        resolved["seed"] = seed_flag
    elif "seed" not in file_cfg:
        env_seed = os.environ.get(SEED_ENV_VAR)
        if env_seed is not None:
            try:
                resolved["seed"] = int(env_seed)
            except ValueError:
                raise MalformedRow(f"{SEED_ENV_VAR}={env_seed!r} is not an integer")
    return resolved


def config_to_json(resolved: dict) -> str:
    return json.dumps(resolved, indent=2, sort_keys=True) + "\n"
