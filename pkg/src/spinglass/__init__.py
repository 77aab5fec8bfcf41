"""Simulation and verification toolkit for mean-field spin-glass Gibbs
measures: exact finite-N tables, the Bolthausen-Sznitman coalescent,
Ruelle probability cascades, and statistical tests of the structural
properties of the infinite-volume limit (exchangeability, ultrametricity,
Ghirlanda-Guerra identities, stochastic stability, singularity)."""

from .coalescent import (
    CoalescentRun,
    Partition,
    coalescence_times,
    merger_rate,
    merger_size_pmf,
    partition_at,
    simulate_bs_coalescent,
    ultrametric_violations,
)
from .errors import CapacityError, ConfigError, NumericError
from .gibbs import GibbsTable, build_gibbs, build_perturbed_gibbs, overlap_moment, sample_replicas
from .identities import GGReport, GGTestSpec, f_delta, gg_check, singularity_curve
from .model import (
    CovarianceFunction,
    DisorderRealization,
    draw_disorder,
    hamiltonian,
    overlap,
    perturbation_field,
    random_spins,
)
from .observables import (
    Estimate,
    Monomial,
    estimate_observable,
    evaluate_monomial,
    exchangeability_test,
    overlap_matrix,
    validate_overlap_matrix,
)
from .oracles import CascadeOracle, GibbsOracle, RpcOracle, SphereOracle
from .rpc import (
    DiscreteDirectingMeasure,
    ParameterFunction,
    l1_distance,
    pd_cascade,
    phi_lambda,
    right_cont_inverse,
    rpc_overlaps,
    sample_from_directing,
    sample_pair_overlaps,
    sample_tilt_field,
)
from .seeding import derive_key, rng_from

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "CascadeOracle",
    "CoalescentRun",
    "ConfigError",
    "CovarianceFunction",
    "DiscreteDirectingMeasure",
    "DisorderRealization",
    "Estimate",
    "GGReport",
    "GGTestSpec",
    "GibbsOracle",
    "GibbsTable",
    "Monomial",
    "NumericError",
    "ParameterFunction",
    "Partition",
    "RpcOracle",
    "SphereOracle",
    "build_gibbs",
    "build_perturbed_gibbs",
    "coalescence_times",
    "derive_key",
    "draw_disorder",
    "estimate_observable",
    "evaluate_monomial",
    "exchangeability_test",
    "f_delta",
    "gg_check",
    "hamiltonian",
    "l1_distance",
    "merger_rate",
    "merger_size_pmf",
    "overlap",
    "overlap_matrix",
    "overlap_moment",
    "partition_at",
    "pd_cascade",
    "perturbation_field",
    "phi_lambda",
    "random_spins",
    "right_cont_inverse",
    "rng_from",
    "rpc_overlaps",
    "sample_from_directing",
    "sample_pair_overlaps",
    "sample_replicas",
    "sample_tilt_field",
    "simulate_bs_coalescent",
    "singularity_curve",
    "ultrametric_violations",
    "validate_overlap_matrix",
]
