"""Exact dense *-algebra kernel and simplicity deciders for one-sided subshifts."""

from __future__ import annotations

__version__ = "0.1.0"

from .shift_kernel import FollowerAutomaton, SubshiftSpec, UPPoint, compile_spec, load_spec

__all__ = ["FollowerAutomaton", "SubshiftSpec", "UPPoint", "compile_spec", "load_spec", "__version__"]
