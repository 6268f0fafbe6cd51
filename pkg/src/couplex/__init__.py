"""Couplings and monotonicity tooling for speed-change exclusion processes.

The package is organised in layers: ring/state primitives (:mod:`couplex.lattice`),
rate specifications and the model zoo (:mod:`couplex.models`), the monotonicity
checker (:mod:`couplex.monotone`), coupling-rate construction
(:mod:`couplex.coupling`), exact finite-ring verification (:mod:`couplex.exact`),
stochastic simulation (:mod:`couplex.simulate`), closed-form reference tables
(:mod:`couplex.golden`), and configuration/CLI plumbing (:mod:`couplex.config`,
:mod:`couplex.cli`).
"""

from .lattice import (
    Config,
    CoupledState,
    apply_jump,
    as_config,
    discrepancy_count,
    format_configuration,
    is_ordered,
    join,
    leq,
    parse_configuration,
)
from .models import (
    RateSpec,
    ValidationReport,
    custom_table,
    gg_symmetrized,
    make_model,
    model_ids,
    rate,
    sep,
    speed_change_decreasing,
    speed_change_increasing,
    traffic2,
    two_star_step,
    two_step,
    validate_spec,
)
from .monotone import (
    StrictnessReport,
    Verdict,
    Violation,
    check_arrival_condition,
    check_departure_condition,
    is_monotone,
    strictness_report,
)
from .coupling import (
    KINDS,
    CouplingTable,
    CrossCheckReport,
    TransitionAudit,
    attractive_rates,
    coupled_transitions,
    coupling_table,
    increasing_rates,
    oneD_cross_check,
    phi,
    phibar,
    strict_rates,
)
from .exact import (
    BalanceReport,
    BlockingReport,
    ExtinctionReport,
    GeneratorMatrix,
    StationaryDistribution,
    audit_discrepancy_monotone,
    audit_order_preservation,
    blocking_scan,
    check_sector_uniform_stationary,
    coupled_generator,
    discrepancy_extinction,
    marginal_errors,
    pair_states,
    ring_configs,
    single_generator,
    stationary_distribution,
    transient_distribution,
)
from .simulate import (
    Trajectory,
    discrepancy_pair,
    observable_report,
    random_configuration,
    simulate_coupled,
    simulate_single,
)

__version__ = "0.1.0"

__all__ = [
    "Config",
    "CoupledState",
    "RateSpec",
    "ValidationReport",
    "Verdict",
    "Violation",
    "StrictnessReport",
    "CouplingTable",
    "TransitionAudit",
    "CrossCheckReport",
    "GeneratorMatrix",
    "StationaryDistribution",
    "BalanceReport",
    "BlockingReport",
    "ExtinctionReport",
    "Trajectory",
    "KINDS",
    "apply_jump",
    "as_config",
    "attractive_rates",
    "audit_discrepancy_monotone",
    "audit_order_preservation",
    "blocking_scan",
    "check_arrival_condition",
    "check_departure_condition",
    "check_sector_uniform_stationary",
    "coupled_generator",
    "coupled_transitions",
    "coupling_table",
    "custom_table",
    "discrepancy_count",
    "discrepancy_extinction",
    "discrepancy_pair",
    "format_configuration",
    "gg_symmetrized",
    "increasing_rates",
    "is_monotone",
    "is_ordered",
    "join",
    "leq",
    "make_model",
    "marginal_errors",
    "model_ids",
    "observable_report",
    "oneD_cross_check",
    "pair_states",
    "parse_configuration",
    "phi",
    "phibar",
    "random_configuration",
    "rate",
    "ring_configs",
    "sep",
    "simulate_coupled",
    "simulate_single",
    "single_generator",
    "speed_change_decreasing",
    "speed_change_increasing",
    "stationary_distribution",
    "strict_rates",
    "strictness_report",
    "traffic2",
    "transient_distribution",
    "two_star_step",
    "two_step",
    "validate_spec",
]
