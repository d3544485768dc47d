"""Cooperative platoon braking simulator with certified minimum-distance bounds.

The package simulates a string of vehicles under a spacing controller while
the leader performs an emergency stop and inter-vehicle radio packets are
lost.  Instead of integrating on a fixed fine grid, the step size is chosen
adaptively so that the minimum inter-vehicle distance read off the discrete
trajectory is within a user-chosen ``alpha`` of the continuous-time minimum.

Typical use::

    from platoonsim import load_scenario, run, certified_min

    config = load_scenario("scenarios/default.json")
    trace = run(config)
    print(trace.d_prime_min, certified_min(trace, config.rule.alpha))
"""

from .backend import BACKEND
from .braking import (
    BrakeParams,
    BrakeSchedule,
    build_schedule,
    compute_t_star,
    ref_state_at_brake,
    ref_velocity,
    u0_continuous,
    u0_discrete,
)
from .comms import LossModel, LossSchedule, derive_seed, loss_bit, realize, update_u_hat
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DimensionError,
    DomainError,
    PlatoonSimError,
    StepResolutionError,
    ValidationError,
)
from .linalg import expm, lambert_w, log_norm, spectral_norm, sym_eigvals
from .model import (
    PlatoonMatrices,
    PlatoonParams,
    PlatoonState,
    assemble,
    build_q,
    distances,
    initial_state,
    velocities,
)
from .oracle import BoundReport, OracleConfig, certify, dense_distances, rk4_reference
from .scenario import ScenarioError, load_scenario, scenario_from_dict
from .simulator import (
    CertifiedInterval,
    Engine,
    SimConfig,
    SimTrace,
    V_STOP,
    certified_min,
    propagate,
    run,
    summary_dict,
    write_summary_json,
    write_trace_csv,
)
from .stepper import (
    StepRule,
    max_step_theorem1,
    max_step_theorem2,
    next_instant,
    next_tick,
    raw_to_ticks,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundReport",
    "BrakeParams",
    "BrakeSchedule",
    "CertifiedInterval",
    "ConfigurationError",
    "ConvergenceError",
    "DimensionError",
    "DomainError",
    "Engine",
    "LossModel",
    "LossSchedule",
    "OracleConfig",
    "PlatoonMatrices",
    "PlatoonParams",
    "PlatoonSimError",
    "PlatoonState",
    "ScenarioError",
    "SimConfig",
    "SimTrace",
    "StepResolutionError",
    "StepRule",
    "V_STOP",
    "ValidationError",
    "assemble",
    "build_q",
    "build_schedule",
    "certified_min",
    "certify",
    "compute_t_star",
    "dense_distances",
    "derive_seed",
    "distances",
    "expm",
    "initial_state",
    "lambert_w",
    "load_scenario",
    "log_norm",
    "loss_bit",
    "max_step_theorem1",
    "max_step_theorem2",
    "next_instant",
    "next_tick",
    "propagate",
    "raw_to_ticks",
    "realize",
    "ref_state_at_brake",
    "ref_velocity",
    "rk4_reference",
    "run",
    "scenario_from_dict",
    "spectral_norm",
    "summary_dict",
    "sym_eigvals",
    "u0_continuous",
    "u0_discrete",
    "update_u_hat",
    "velocities",
    "write_summary_json",
    "write_trace_csv",
]
