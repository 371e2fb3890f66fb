"""Entropy, KL divergences, L1 distance and information identities"""

from src.information.divergences import (
    DivergenceReport,
    FisherBoundReport,
    awgn_mutual_information,
    awgn_symmetric_divergence,
    entropy,
    entropy_gap,
    entropy_jump,
    gaussian_counterpart,
    kl,
    fisher_divergence_bound,
    symmetric_kl,
    total_variation_l1,
)

__all__ = [
    "DivergenceReport",
    "FisherBoundReport",
    "awgn_mutual_information",
    "awgn_symmetric_divergence",
    "entropy",
    "entropy_gap",
    "entropy_jump",
    "gaussian_counterpart",
    "kl",
    "fisher_divergence_bound",
    "symmetric_kl",
    "total_variation_l1",
]
