"""Single-run simulation driver.

A run alternates two phases per communication period: the input update at
the period's first instant (braking sample plus the loss-gated hold rule)
in Python, and the certified stepping to the period's last tick in the
selected backend kernel.  Matrix exponentials are memoized by integer
tick count and shared across runs of the same Engine, which is what makes
large Monte-Carlo campaigns cheap.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import backend, comms, linalg, model
from .braking import build_schedule, u0_discrete
from .errors import ConfigurationError
from .stepper import StepRule

__all__ = [
    "SimConfig",
    "SimTrace",
    "CertifiedInterval",
    "Engine",
    "run",
    "propagate",
    "certified_min",
    "write_trace_csv",
    "summary_dict",
    "write_summary_json",
    "V_STOP",
]

# standstill threshold: exponential decay never reaches exactly zero
V_STOP = 1e-3

_STATUS_TO_REASON = {
    backend.REACHED_END: "reached_t_end",
    backend.COLLISION: "collision",
    backend.STANDSTILL: "standstill",
    backend.RESOLUTION: "resolution_error",
}


def _aligned_periods(t_end, T):
    """Number of communication periods in [0, t_end]; t_end must be on-grid."""
    if not t_end > 0:
        raise ConfigurationError(f"t_end must be > 0, got {t_end!r}")
    periods = round(t_end / T)
    if periods < 1 or abs(periods * T - t_end) > 1e-9 * max(1.0, T):
        raise ConfigurationError(f"t_end={t_end!r} must be a positive integer multiple of T={T!r}")
    return periods


@dataclass(frozen=True)
class SimConfig:
    params: model.PlatoonParams
    brake: object
    loss: comms.LossModel
    rule: StepRule
    t_end: float

    def __post_init__(self):
        _aligned_periods(self.t_end, self.params.T)

    @property
    def n_periods(self):
        return _aligned_periods(self.t_end, self.params.T)


@dataclass
class SimTrace:
    """Recorded instants of one run plus its headline numbers.

    ``distances`` keeps the raw sampled values (negative at a collision
    instant); ``d_prime_min`` applies the collision clamp to 0.
    """

    config: SimConfig
    ticks: np.ndarray
    instants: np.ndarray
    distances: np.ndarray
    velocities: np.ndarray
    d_prime_min: float
    k_prime_end: int
    stop_reason: str
    state_snapshots: np.ndarray | None = None


@dataclass(frozen=True)
class CertifiedInterval:
    lo: float
    hi: float
    void: bool


class Engine:
    """Reusable simulation context for one (params, brake, rule, t_end).

    Holds the assembled matrices, the braking schedule, and the expm memo;
    ``run`` may be called many times with different loss models (the
    Monte-Carlo pattern).  The memo only ever stores values that are pure
    functions of the tick count, so sharing it across concurrent runs is
    safe and cannot change results.
    """

    def __init__(self, params, brake, rule, t_end, growth_norm="frobenius", u_ctrl_init=0.0, mats=None):
        self.params = params
        self.brake = brake
        self.rule = rule
        self.t_end = float(t_end)
        self._periods = _aligned_periods(self.t_end, params.T)
        self.growth_norm = growth_norm
        self.u_ctrl_init = u_ctrl_init
        if mats is None:
            mats = model.assemble(params, require_positive_mu=(rule.kind == "theorem2"))
        elif rule.kind == "theorem2" and mats.mu_Atilde <= 0.0:
            raise ConfigurationError(
                f"theorem2 rule needs a positive log norm, got mu={mats.mu_Atilde!r}"
            )
        self.mats = mats
        self.sched = build_schedule(params, brake)
        n = params.n
        self._dim = model.state_dim(n)
        self._tick = params.T / rule.n_bar
        self._ia = np.array([model.idx_pos(i - 1) for i in range(2, n + 1)], dtype=np.int64)
        self._ib = np.array([model.idx_pos(i) for i in range(2, n + 1)], dtype=np.int64)
        self._lengths = params.lengths[1:].copy()
        self._vel_idx = np.array([model.idx_vel(i) for i in range(n + 1)], dtype=np.int64)
        self._ctrl_idx = np.array([model.idx_ctrl(i) for i in range(1, n)], dtype=np.int64)
        if rule.kind == "theorem1":
            self._rule_kind = backend.RULE_THEOREM1
            self._growth_c = self.mats.norm_Ac_frob if growth_norm == "frobenius" else self.mats.norm_Ac
        else:
            self._rule_kind = backend.RULE_THEOREM2
            self._growth_c = self.mats.norm_Ac_frob
        self._cache = {}

    def _expm_cb(self, delta):
        p = linalg.expm(self.mats.A_tilde, delta * self._tick)
        entry = (
            np.ascontiguousarray(p[: self._dim, : self._dim]),
            np.ascontiguousarray(p[: self._dim, self._dim :]),
        )
        self._cache[delta] = entry
        return entry

    def run(self, loss_model, keep_states=False):
        params, rule = self.params, self.rule
        n = params.n
        schedule = comms.realize(loss_model, n)
        state0 = model.initial_state(params, self.u_ctrl_init)
        xp = state0.x.copy()
        u = state0.u.copy()
        nbar = rule.n_bar
        c_end = self._periods * nbar
        cap = 4096
        ticks_buf = np.empty(cap, dtype=np.int64)
        dists_buf = np.empty((cap, n - 1))
        vels_buf = np.empty((cap, n + 1))
        states_buf = np.empty((cap, model.lifted_dim(n))) if keep_states else None

        c = 0
        row = 0
        status = backend.PERIOD_DONE
        z_cache = {}
        while True:
            if status == backend.PERIOD_DONE:
                j = c // nbar
                u0_j = u0_discrete(j, self.sched, params.T)
                u[0] = u0_j
                u[1] = u0_j
                for i in range(1, n):
                    if schedule.bit(i, j) == 0:
                        u[1 + i] = xp[self._ctrl_idx[i - 1]]
                z_cache = {}
            else:  # buffer full: double every buffer and resume mid-period
                cap *= 2
                ticks_buf = _grow(ticks_buf, cap)
                dists_buf = _grow(dists_buf, cap)
                vels_buf = _grow(vels_buf, cap)
                if states_buf is not None:
                    states_buf = _grow(states_buf, cap)
            status, row, c = backend.advance_period(
                xp,
                u,
                c,
                c_end,
                nbar,
                self._rule_kind,
                rule.alpha,
                rule.inflate,
                self._tick,
                self._growth_c,
                1.0 / params.tau_d,
                1.0 / params.h,
                self.mats.mu_Atilde,
                self.mats.phi,
                self._ia,
                self._ib,
                self._lengths,
                self._vel_idx,
                V_STOP,
                self._cache,
                z_cache,
                self._expm_cb,
                ticks_buf,
                dists_buf,
                vels_buf,
                states_buf,
                row,
            )
            if status in (backend.PERIOD_DONE, backend.BUFFER_FULL):
                continue
            break

        ticks = ticks_buf[:row].copy()
        dists = dists_buf[:row].copy()
        stop_reason = _STATUS_TO_REASON[status]
        d_prime_min = 0.0 if status == backend.COLLISION else float(dists.min())
        config = SimConfig(params=params, brake=self.brake, loss=loss_model, rule=rule, t_end=self.t_end)
        return SimTrace(
            config=config,
            ticks=ticks,
            instants=ticks * self._tick,
            distances=dists,
            velocities=vels_buf[:row].copy(),
            d_prime_min=d_prime_min,
            k_prime_end=row - 1,
            stop_reason=stop_reason,
            state_snapshots=states_buf[:row].copy() if keep_states else None,
        )


def _grow(buf, cap):
    out = np.empty((cap,) + buf.shape[1:], dtype=buf.dtype)
    out[: buf.shape[0]] = buf
    return out


def run(config, keep_states=False, growth_norm="frobenius", u_ctrl_init=0.0):
    """Run one simulation from a SimConfig."""
    eng = Engine(
        config.params,
        config.brake,
        config.rule,
        config.t_end,
        growth_norm=growth_norm,
        u_ctrl_init=u_ctrl_init,
    )
    return eng.run(config.loss, keep_states=keep_states)


def propagate(x_tilde, dt, mats):
    """Exact propagation of the lifted state over dt (input block frozen)."""
    return linalg.expm(mats.A_tilde, dt) @ np.asarray(x_tilde)


def certified_min(trace, alpha):
    """Interval certified to contain the continuous-time minimum distance.

    On a collision stop the lower end is clamped to 0 and the certificate
    is void: a minimum this close to zero carries no safety guarantee.
    """
    d = trace.d_prime_min
    if trace.stop_reason == "collision":
        return CertifiedInterval(lo=0.0, hi=d + alpha, void=True)
    return CertifiedInterval(lo=d - alpha, hi=d + alpha, void=False)


def write_trace_csv(trace, path):
    """Write the per-instant trace; the final row carries the stop reason."""
    n = trace.config.params.n
    cols = ["k", "t"] + [f"d_{i}" for i in range(2, n + 1)] + [f"v_{i}" for i in range(n + 1)]
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for k in range(trace.k_prime_end + 1):
            cells = [str(k), repr(float(trace.instants[k]))]
            cells += [repr(float(v)) for v in trace.distances[k]]
            cells += [repr(float(v)) for v in trace.velocities[k]]
            fh.write(",".join(cells) + "\n")
        fh.write(f"stop_reason,{trace.stop_reason}\n")


def summary_dict(trace):
    interval = certified_min(trace, trace.config.rule.alpha)
    return {
        "d_prime_min": trace.d_prime_min,
        "k_prime_end": trace.k_prime_end,
        "stop_reason": trace.stop_reason,
        "certified_interval": [interval.lo, interval.hi],
        "certificate_void": interval.void,
        "alpha": trace.config.rule.alpha,
        "rule": trace.config.rule.kind,
        "n_bar": trace.config.rule.n_bar,
        "backend": backend.BACKEND,
    }


def write_summary_json(trace, path):
    with open(path, "w", newline="\n") as fh:
        json.dump(summary_dict(trace), fh, indent=2, sort_keys=True)
        fh.write("\n")
