"""
Configuration Loader
Loads and manages toolkit settings from settings.yaml
"""
import copy
import yaml
from pathlib import Path
from typing import Dict, Any, Optional
from src.utils import get_logger

logger = get_logger(__name__)

DEFAULT_SETTINGS: Dict[str, Any] = {
    'limits': {
        'max_dim': 2 ** 14,
        'singular_threshold': 1e-12,
    },
    'tolerances': {
        'hermitian': 1e-12,
        'projector': 1e-12,
        'validate_b': 1e-12,
        'relations': 1e-11,
        'ybe': 1e-10,
        'rtt': 1e-10,
        'abcd': 1e-10,
        'transfer': 1e-9,
        'charges': 1e-9,
        'hamiltonian': 1e-10,
        'interpolation': 1e-9,
        'derivative': 1e-6,
    },
    'charges': {
        'extra_nodes': 1,
    },
    'derivative': {
        'step': 1e-5,
        'richardson': True,
    },
    'parallel': {
        'use_multiprocessing': True,
        'num_processes': None,
        'chunk_size': 4,
        'min_tasks': 16,
    },
    'report': {
        'schema_version': 1,
    },
    'logging': {
        'level': 'INFO',
        'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    },
}


def _merge(base: Dict, override: Dict) -> Dict:
    """Recursively overlay override onto a copy of base"""
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class Config:
    """Configuration manager"""

    def __init__(self, config_path: Optional[str] = None):
        if config_path is None:
            # Default to config/settings.yaml relative to project root
            project_root = Path(__file__).parent.parent
            config_path = project_root / "config" / "settings.yaml"

        self.config_path = Path(config_path)
        self.config = self._load_config()

    def _load_config(self) -> Dict:
        """Load configuration from YAML file, overlaid on the defaults"""
        if not self.config_path.exists():
            logger.warning(f"Config file not found: {self.config_path}. Using defaults.")
            return self._get_default_config()

        try:
            with open(self.config_path, 'r') as f:
                loaded = yaml.safe_load(f) or {}
            logger.debug(f"Loaded configuration from {self.config_path}")
            return _merge(DEFAULT_SETTINGS, loaded)
        except (OSError, yaml.YAMLError) as e:
            logger.error(f"Error loading config: {str(e)}. Using defaults.")
            return self._get_default_config()

    def _get_default_config(self) -> Dict:
        """Return default configuration"""
        return copy.deepcopy(DEFAULT_SETTINGS)

    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Get configuration value using dot notation

        Example:
        --------
        config.get('tolerances.ybe')
        config.get('limits.max_dim')
        """
        keys = key_path.split('.')
        value = self.config

        for key in keys:
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default

        return value

    def tolerance(self, check: str) -> float:
        """Default tolerance of a named check"""
        return float(self.get(f'tolerances.{check}', 1e-10))

    def max_dim(self) -> int:
        return int(self.get('limits.max_dim', 2 ** 14))

    def singular_threshold(self) -> float:
        return float(self.get('limits.singular_threshold', 1e-12))

    def get_parallel_params(self) -> Dict:
        """Get sweep execution parameters"""
        return self.get('parallel', {})


# Global config instance
_config = None


def get_config(config_path: Optional[str] = None) -> Config:
    """Get global config instance"""
    global _config
    if _config is None or config_path is not None:
        _config = Config(config_path)
    return _config
