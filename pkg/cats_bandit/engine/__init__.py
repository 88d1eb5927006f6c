"""
Engine module for the CATS bandit tool.
"""

from .cats_engine import CatsEngine, EngineConfig, EngineProtocolError, InteractionRecord, NoPendingActionError
from .interaction_log import read_log, write_log

__all__ = [
    'CatsEngine',
    'EngineConfig',
    'EngineProtocolError',
    'InteractionRecord',
    'NoPendingActionError',
    'read_log',
    'write_log',
]
