"""Optimal control of marked point processes: solvers, simulators and checks."""

from ._mppctl import *  # noqa: F401,F403
from ._mppctl import MppctlError, ModelSpec, Policy, Trajectory

__all__ = [name for name in dir() if not name.startswith("_")]
