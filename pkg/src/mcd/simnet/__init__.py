"""Deterministic simulation of the full system against an ideal-model oracle."""

from .graphgen import SocialGraph, gen_graph
from .oracle import OracleExpectation, ideal_oracle
from .scenarios import SCENARIO_NAMES, Scenario, run_scenario

__all__ = [
    "SocialGraph",
    "gen_graph",
    "OracleExpectation",
    "ideal_oracle",
    "Scenario",
    "run_scenario",
    "SCENARIO_NAMES",
]
