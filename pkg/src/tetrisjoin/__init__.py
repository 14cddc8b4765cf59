"""Box-cover and join evaluation by geometric resolution (the Tetris family)."""

from .boxindex import BoxOracle, KnowledgeBase
from .dyadic import format_box, interval, parse_box
from .engine import RunStats, Trace, solve, tetris, tetris_skeleton

__all__ = ["BoxOracle", "KnowledgeBase", "RunStats", "Trace", "format_box", "interval",
           "parse_box", "solve", "tetris", "tetris_skeleton"]
