"""Partition-safety simulator: frame codec, endpoint checks, fault-injected
channels, scenario runner and cycle-jitter analyzer."""

from ._safesim import *  # noqa: F401,F403
from ._safesim import __doc__  # noqa: F401

__version__ = "0.1.0"
