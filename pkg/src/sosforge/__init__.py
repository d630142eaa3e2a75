"""Workbench for transition system specifications and branching bisimulation congruence formats."""

__version__ = "0.1.0"
