# config_manager.py
"""
Configuration management: YAML settings layered over built-in defaults
"""

import copy
import logging
import os
from typing import Any, Dict, Optional

import yaml

try:
    from dotenv import load_dotenv
except ImportError:
    load_dotenv = None

from ..core.exceptions import InputError

logger = logging.getLogger(__name__)

THREADS_ENV_VAR = "ROUGH_TOOLKIT_THREADS"

DEFAULT_CONFIG: Dict[str, Dict[str, Any]] = {
    'tensor': {
        'max_depth': 6,
        'shuffle_tol': 1e-10,
        'lie_tol': 1e-10,
    },
    'integrator': {
        'min_steps': 64,
        'max_step': 0.01,
        'blowup_threshold': 1e8,
    },
    'orbit': {
        'tau': 0.3,
        'mean_length': 2.0,
        'rank_tol': 1e-8,
        'budget': 50,
        'bracket_depth': 3,
    },
    'rde': {
        'substeps': 64,
    },
    'reach': {
        'segments': 4,
        'tolerance': 1e-6,
        'restarts': 8,
        'round_size': 4,
        'fd_step': 1e-6,
        'max_nfev': 2000,
        'regularization': 1e-8,
        'horizon': 1.0,
    },
    'system_settings': {
        'log_level': 'INFO',
        'threads': 1,
    },
}


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class ConfigManager:
    """Loads config/config.yaml and answers dotted-key lookups"""

    def __init__(self, config_path: Optional[str] = "config/config.yaml"):
        if load_dotenv is not None:
            load_dotenv()
        else:
            logger.debug("python-dotenv not installed; .env files are ignored")
        self.config_path = config_path
        self.config = copy.deepcopy(DEFAULT_CONFIG)

        if config_path and os.path.exists(config_path):
            try:
                with open(config_path, 'r', encoding='utf-8') as f:
                    loaded = yaml.safe_load(f) or {}
            except yaml.YAMLError as e:
                mark = getattr(e, 'problem_mark', None)
                if mark is not None:
                    raise InputError(f"Invalid configuration file {config_path}", mark.line + 1, mark.column + 1) from None
                raise InputError(f"Invalid configuration file {config_path}: {e}") from None
            if not isinstance(loaded, dict):
                raise InputError(f"Configuration file {config_path} must contain a mapping")
            self.config = _deep_merge(self.config, loaded)
            logger.debug("Loaded configuration from %s", config_path)
        elif config_path:
            logger.debug("No configuration at %s, using defaults", config_path)

    def get(self, key: str, default: Any = None) -> Any:
        """Dotted lookup, e.g. get('reach.tolerance', 1e-6)"""
        node: Any = self.config
        for part in key.split('.'):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def set(self, key: str, value: Any):
        parts = key.split('.')
        node = self.config
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value

    def thread_cap(self, override: Optional[int] = None) -> int:
        """--threads beats the environment variable, which beats the config file"""
        if override is not None:
            return max(1, int(override))
        env_value = os.environ.get(THREADS_ENV_VAR)
        if env_value:
            try:
                return max(1, int(env_value))
            except ValueError:
                logger.warning("Ignoring non-integer %s=%r", THREADS_ENV_VAR, env_value)
        return max(1, int(self.get('system_settings.threads', 1)))

    @staticmethod
    def write_default(config_path: str = "config/config.yaml") -> str:
        """Create a configuration file holding the built-in defaults"""
        directory = os.path.dirname(config_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(config_path, 'w', encoding='utf-8') as f:
            yaml.dump(DEFAULT_CONFIG, f, default_flow_style=False, indent=2, sort_keys=False)
        logger.info("Created configuration file: %s", config_path)
        return config_path
