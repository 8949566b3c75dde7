"""Correlated node behavior model for mobile ad hoc networks.

Four-state semi-Markov model of node misbehavior (forward, drop, inject,
loss), correlated clusters of nodes, parameter estimation from traffic
counters and survivability sweeps.
"""

__version__ = "0.1.0"

from .behavior import (BehaviorParams, BehaviorState, ClusterState, StatusThresholds,
                       build_tpm, classify_status, validate_params)
from .correlation import compose_cluster, compose_pair, correlated_functions
from .estimation import TrafficRecord, estimate_params, lifetime, project_feasible
from .scenarios import Metric, Scenario, SweepConfig, run_sweep, survivability
from .smp import (SojournFamily, SojournSpec, limiting_distribution, occupancy_estimate,
                  simulate, simulate_many, stationary, transient_occupancy)

__all__ = [
    "BehaviorParams", "BehaviorState", "ClusterState", "StatusThresholds", "build_tpm",
    "classify_status", "validate_params", "compose_cluster", "compose_pair",
    "correlated_functions", "TrafficRecord", "estimate_params", "lifetime", "project_feasible",
    "Metric", "Scenario", "SweepConfig", "run_sweep", "survivability", "SojournFamily",
    "SojournSpec", "limiting_distribution", "occupancy_estimate", "simulate", "simulate_many",
    "stationary", "transient_occupancy",
]
