"""Batch figure rendering for routhsim CSV trajectory and report files."""

from .io import SchemaError, load_table
from .figures import PlotSpec, render

__all__ = ["SchemaError", "load_table", "PlotSpec", "render"]
