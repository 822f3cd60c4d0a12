"""
Process Settings Module

Logging and output settings, read from NOMA_DRL_* environment variables
after an optional .env file.
"""

import os
from dataclasses import dataclass, fields
from pathlib import Path

from dotenv import load_dotenv

ENV_PREFIX = "NOMA_DRL_"
ENV_FILES = (Path(".env"), Path(__file__).parent.parent.parent / ".env")


@dataclass(frozen=True)
class Settings:
    """
    Process-wide settings.

    Each field is overridden by NOMA_DRL_<FIELD>, e.g. NOMA_DRL_LOG_LEVEL.

    Attributes:
        log_level: Package logger level
        log_file: Path of the detailed log file
        output_dir: Default directory for run outputs
    """
    log_level: str = "DEBUG"
    log_file: str = str(Path("logs") / "noma_drl.log")
    output_dir: str = "runs"

    @staticmethod
    def variable(name: str) -> str:
        return ENV_PREFIX + name.upper()


def _load_env_file() -> None:
    # The working directory wins over the project root; set variables are kept
    for path in ENV_FILES:
        if path.exists():
            load_dotenv(path)
            return


def get_settings() -> Settings:
    """
    Current settings.

    The environment is read on every call so tests and subprocesses can
    change it.
    """
    _load_env_file()
    defaults = Settings()
    return Settings(**{
        f.name: os.getenv(Settings.variable(f.name), getattr(defaults, f.name))
        for f in fields(Settings)
    })
