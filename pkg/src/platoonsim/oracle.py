"""Independent fine-grained integrators for certifying simulation runs.

Deliberately slow and deliberately separate: the dense mode uses scipy's
matrix exponential (a different algorithm family from the in-house one)
and the rk4 mode does not use a matrix exponential at all, so a defect in
the production propagation path cannot certify itself.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm as _scipy_expm

from . import backend
from .errors import ConfigurationError, ValidationError
from .model import assemble, idx_pos
from .simulator import certified_min

__all__ = [
    "OracleConfig",
    "BoundReport",
    "dense_distances",
    "rk4_reference",
    "certify",
]


@dataclass(frozen=True)
class OracleConfig:
    substeps_per_interval: int = 1000
    integrator: str = "dense_expm"

    def __post_init__(self):
        if int(self.substeps_per_interval) != self.substeps_per_interval or self.substeps_per_interval < 10:
            raise ConfigurationError(
                f"substeps_per_interval must be an integer >= 10, got {self.substeps_per_interval!r}"
            )
        object.__setattr__(self, "substeps_per_interval", int(self.substeps_per_interval))
        if self.integrator not in ("dense_expm", "rk4"):
            raise ConfigurationError(f"unknown integrator {self.integrator!r}; use 'dense_expm' or 'rk4'")


@dataclass
class BoundReport:
    """Outcome of re-checking one trace against the fine oracle."""

    per_interval: np.ndarray
    max_deviation: float
    oracle_d_min: float
    alpha: float
    passed: bool
    sound: bool
    interval: object


def rk4_reference(x_tilde0, dt_total, substeps, mats):
    """Classical fourth-order integration of the lifted dynamics."""
    if substeps < 10:
        raise ConfigurationError(f"substeps must be >= 10, got {substeps!r}")
    a = mats.A_tilde
    x = np.array(x_tilde0, dtype=float)
    h = dt_total / substeps
    for _ in range(substeps):
        k1 = a @ x
        k2 = a @ (x + 0.5 * h * k1)
        k3 = a @ (x + 0.5 * h * k2)
        k4 = a @ (x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x


def _check_trace(config, trace):
    if trace.config != config:
        raise ValidationError("trace was not produced from the given configuration")
    if trace.state_snapshots is None:
        raise ValidationError("trace lacks state snapshots; rerun with keep_states=True")


def _interval_scan(config, trace, oracle):
    """Yield (max deviation, sampled minimum) across all intervals."""
    mats_params = config.params
    n = mats_params.n
    dim = 3 + 6 * n
    ia = np.array([idx_pos(i - 1) for i in range(2, n + 1)], dtype=np.int64)
    ib = np.array([idx_pos(i) for i in range(2, n + 1)], dtype=np.int64)
    lengths = mats_params.lengths[1:].copy()
    tick = mats_params.T / config.rule.n_bar
    m = oracle.substeps_per_interval
    snaps = trace.state_snapshots
    mats = assemble(mats_params, require_positive_mu=False)
    devs = np.zeros(trace.k_prime_end)
    overall_min = float(trace.distances[0].min())
    psub_cache = {}
    for k in range(trace.k_prime_end):
        dticks = int(trace.ticks[k + 1] - trace.ticks[k])
        xp = snaps[k, :dim]
        u = snaps[k, dim:]
        if oracle.integrator == "dense_expm":
            entry = psub_cache.get(dticks)
            if entry is None:
                p = _scipy_expm(mats.A_tilde * (dticks * tick / m))
                entry = (np.ascontiguousarray(p[:dim, :dim]), np.ascontiguousarray(p[:dim, dim:]))
                psub_cache[dticks] = entry
            dev, dmin = backend.interval_max_dev(entry, xp, u, m, ia, ib, lengths)
        else:
            dev, dmin = _rk4_interval(mats.A_tilde, snaps[k], dticks * tick, m, ia, ib, lengths, dim)
        devs[k] = dev
        if dmin < overall_min:
            overall_min = dmin
    return devs, overall_min


def _rk4_interval(a, x0, dt, substeps, ia, ib, lengths, dim):
    h = dt / substeps
    x = x0.copy()
    d0 = x[ia] - x[ib] - lengths
    max_dev = 0.0
    min_d = float(d0.min())
    for _ in range(substeps):
        k1 = a @ x
        k2 = a @ (x + 0.5 * h * k1)
        k3 = a @ (x + 0.5 * h * k2)
        k4 = a @ (x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        d = x[ia] - x[ib] - lengths
        max_dev = max(max_dev, float(np.max(np.abs(d - d0))))
        min_d = min(min_d, float(d.min()))
    return max_dev, min_d


def dense_distances(config, trace, oracle):
    """Per-interval worst deviation |d_i(t) - d_i(t_k)| at substep resolution."""
    _check_trace(config, trace)
    devs, _ = _interval_scan(config, trace, oracle)
    return devs


def certify(config, trace, oracle):
    """Full bound check: deviations, oracle minimum, certificate containment.

    The certificate claim is on the unclamped sampled minimum; a collision
    trace reports a void certificate, for which containment is checked
    against the raw (pre-clamp) minimum instead.
    """
    _check_trace(config, trace)
    devs, oracle_min = _interval_scan(config, trace, oracle)
    alpha = config.rule.alpha
    max_dev = float(devs.max()) if devs.size else 0.0
    interval = certified_min(trace, alpha)
    tol = 1e-9
    raw_min = float(trace.distances.min())
    if trace.stop_reason == "collision":
        sound = (raw_min - alpha - tol <= oracle_min <= raw_min + alpha + tol) and oracle_min <= interval.hi + tol
    else:
        sound = interval.lo - tol <= oracle_min <= interval.hi + tol
    return BoundReport(
        per_interval=devs,
        max_deviation=max_dev,
        oracle_d_min=oracle_min,
        alpha=alpha,
        passed=bool(max_dev <= alpha),
        sound=bool(sound),
        interval=interval,
    )
