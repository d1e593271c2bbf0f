"""Few-photon linear-optics simulation and Lie-algebraic invariants."""

from .campaign import CampaignConfig, emit_report, run_campaign, tv_to_ideal
from .fock import PureState, enumerate_basis, evolve, fock_state, superposition
from .invariants import (
    ExpectationRecord,
    invariant_I,
    lie_basis,
    measure_expectations_circuit,
    measure_expectations_direct,
    quantity_Q,
)
from .noise import NoiseConfig
from .pnr import ClickTally, reconstruct_distribution, simulate_clicks
from .tensors import correlation_tensor, transform_tensor, unfold
from .transforms import clements_decompose, haar_random_unitary, mesh_compose, permanent

__all__ = [
    "CampaignConfig",
    "ClickTally",
    "ExpectationRecord",
    "NoiseConfig",
    "PureState",
    "clements_decompose",
    "correlation_tensor",
    "emit_report",
    "enumerate_basis",
    "evolve",
    "fock_state",
    "haar_random_unitary",
    "invariant_I",
    "lie_basis",
    "measure_expectations_circuit",
    "measure_expectations_direct",
    "mesh_compose",
    "permanent",
    "quantity_Q",
    "reconstruct_distribution",
    "run_campaign",
    "simulate_clicks",
    "superposition",
    "transform_tensor",
    "tv_to_ideal",
    "unfold",
]
