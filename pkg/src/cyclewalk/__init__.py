"""Grover walks on the 4-cycle with two tails and on the periodic chain of 4-cycles."""

from .arc_graph import GraphKind, WalkState, build_graph
from .errors import CycleWalkError, WindowOverflowError

__all__ = ["GraphKind", "WalkState", "build_graph", "CycleWalkError", "WindowOverflowError"]
