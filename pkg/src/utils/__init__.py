"""Input and output helpers for the walk toolkit."""

from .state_loader import LoadedState, StateFileLoader
from . import writers

__all__ = ["LoadedState", "StateFileLoader", "writers"]
