"""Configuration module for run parameters and process settings"""

from .settings import Settings, get_settings
from .run_config import (
    Architecture,
    EnvConfig,
    RunConfig,
    SweepSpec,
    TrainConfig,
    build_run_config,
    default_run_config,
    load_config,
)

__all__ = [
    'Settings',
    'get_settings',
    'Architecture',
    'EnvConfig',
    'RunConfig',
    'SweepSpec',
    'TrainConfig',
    'build_run_config',
    'default_run_config',
    'load_config',
]
