"""Simulator for storage-heterogeneous distributed cache clusters.

A central server and m caches behind a root node serve batches of
requests for n unit-size files. Two placement/delivery policies are
provided, PPMM (proportional replication with maximum-matching delivery)
and KS+MLP (knapsack-selected replication with least-popular-first
matching), together with a lower bound on the optimal rate and the
figure presets used for the desk-scale experiments.
"""
from hetcache.bounds import prop1_lower_bound, regime_exponent
from hetcache.harness import (
    ExperimentSpec,
    SweepResult,
    preset_fig4,
    preset_fig5,
    preset_fig6,
    run_sweep,
    run_trial,
)
from hetcache.ksmlp import ksmlp_placement, mlp_deliver
from hetcache.popularity import PopularityModel, RequestBatch, build_popularity, sample_batch
from hetcache.ppmm import ppmm_deliver, ppmm_place, ppmm_replication
from hetcache.system import DeliveryReport, PlacementMap, StorageProfile, SystemConfig

__version__ = "0.1.0"

__all__ = [
    "DeliveryReport", "ExperimentSpec", "PlacementMap", "PopularityModel", "RequestBatch",
    "StorageProfile", "SweepResult", "SystemConfig", "build_popularity", "ksmlp_placement",
    "mlp_deliver", "ppmm_deliver", "ppmm_place", "ppmm_replication", "preset_fig4",
    "preset_fig5", "preset_fig6", "prop1_lower_bound", "regime_exponent", "run_sweep",
    "run_trial", "sample_batch",
]
