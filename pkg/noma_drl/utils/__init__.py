"""Utility modules"""

from .logger import setup_logger, get_logger
from .seeding import derive_seed, derive_seeds

__all__ = ['setup_logger', 'get_logger', 'derive_seed', 'derive_seeds']
