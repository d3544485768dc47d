"""Reference-vehicle braking law.

The reference cruises with zero desired acceleration until ``t_brake``,
then commands ``max(-gamma, -eta * v0)``: a constant full brake until the
speed drops to ``gamma/eta`` at the switch time ``t_star``, and a
proportional brake afterwards.  Everything downstream needs this signal
only at communication instants, so the whole trajectory is carried as
closed forms rather than integrated numerically.

Only the overdamped and critically damped closed-loop regimes
(``eta <= 1/(4 tau_d)``) are supported.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ConvergenceError, DomainError
from .linalg import lambert_w

__all__ = [
    "BrakeParams",
    "BrakeSchedule",
    "build_schedule",
    "ref_state_at_brake",
    "compute_t_star",
    "u0_continuous",
    "u0_discrete",
    "ref_velocity",
]

# classification slack for eta against the critical value 1/(4 tau_d)
_REGIME_TOL = 1e-12


@dataclass(frozen=True)
class BrakeParams:
    t_brake: float
    gamma: float
    eta: float

    def __post_init__(self):
        if not self.t_brake > 0:
            raise ConfigurationError(f"t_brake must be > 0, got {self.t_brake!r}")
        if not self.gamma > 0:
            raise ConfigurationError(f"gamma must be > 0, got {self.gamma!r}")
        if not self.eta > 0:
            raise ConfigurationError(f"eta must be > 0, got {self.eta!r}")


@dataclass(frozen=True)
class BrakeSchedule:
    """Precomputed constants of the braking trajectory.

    ``lambda1/lambda2/beta2/beta3`` are set in the overdamped regime and
    ``lambda3/beta4/beta5`` in the critically damped one; the inapplicable
    fields are None.  ``v_at_star`` is the speed entering the proportional
    phase: ``gamma/eta`` normally, or the brake-time speed when the brake
    starts already below that threshold (then ``t_star == t_brake``).
    """

    params: BrakeParams
    tau_d: float
    v0_init: float
    a0_init: float
    v0_at_brake: float
    a0_at_brake: float
    t_star: float
    v_at_star: float
    a_at_star: float
    regime: str
    beta1: float
    beta2: float | None
    beta3: float | None
    beta4: float | None
    beta5: float | None
    lambda1: float | None
    lambda2: float | None
    lambda3: float | None


def ref_state_at_brake(params, brake):
    """Reference (v0, a0) at t_brake under zero input from t = 0.

    The acceleration relaxes as ``a0_init * exp(-t/tau_d)`` and the
    velocity integrates it.
    """
    tau = params.tau_d
    decay = np.exp(-brake.t_brake / tau)
    v0b = params.v0_init + params.a0_init * tau * (1.0 - decay)
    a0b = params.a0_init * decay
    return float(v0b), float(a0b)


def _v_constant_brake(t, brake, v0b, a0b, tau):
    """Speed during the constant -gamma phase, t >= t_brake."""
    dt = t - brake.t_brake
    return v0b + tau * (a0b + brake.gamma) * (1.0 - np.exp(-dt / tau)) - brake.gamma * dt


def compute_t_star(brake, v0b, a0b, tau_d):
    """Switch time at which the constant brake hands over to -eta*v0.

    Solves the constant-phase speed profile for ``v0(t) = gamma/eta`` in
    closed form through the Lambert W function.  Both real branches are
    evaluated; candidates before ``t_brake`` are discarded and the
    survivor is verified against the speed profile directly.  If the
    brake-time speed is already at or below ``gamma/eta``, the switch is
    immediate.
    """
    gamma, eta, t_b = brake.gamma, brake.eta, brake.t_brake
    v_star = gamma / eta
    if v0b <= v_star:
        return t_b

    beta1 = (v_star - v0b - tau_d * a0b - gamma * tau_d - gamma * t_b) / (gamma * tau_d)
    arg = -(a0b + gamma) / gamma * np.exp(t_b / tau_d + beta1)

    candidates = []
    for branch in ("principal", "minus_one"):
        try:
            w = lambert_w(arg, branch)
        except (DomainError, ConvergenceError):
            continue
        t = -tau_d * beta1 + tau_d * w
        if t >= t_b - 1e-9:
            candidates.append(max(t, t_b))

    tol = 1e-9 * max(1.0, v_star)
    for t in sorted(candidates):
        if abs(_v_constant_brake(t, brake, v0b, a0b, tau_d) - v_star) <= tol:
            return float(t)
    raise ConvergenceError(
        f"no consistent switch time found for brake={brake!r}, v0b={v0b!r}, a0b={a0b!r}"
    )


def build_schedule(params, brake):
    """Classify the damping regime and precompute all trajectory constants."""
    tau = params.tau_d
    crit = 4.0 * brake.eta * tau
    if crit > 1.0 + _REGIME_TOL:
        raise ConfigurationError(
            f"eta={brake.eta!r} with tau_d={tau!r} gives an underdamped "
            "proportional-braking phase (eta > 1/(4 tau_d)), which is not supported"
        )
    regime = "critically_damped" if abs(crit - 1.0) <= _REGIME_TOL else "overdamped"

    v0b, a0b = ref_state_at_brake(params, brake)
    t_star = compute_t_star(brake, v0b, a0b, tau)
    v_at_star = min(v0b, brake.gamma / brake.eta)
    a_at_star = (a0b + brake.gamma) * np.exp((brake.t_brake - t_star) / tau) - brake.gamma

    beta1 = (
        brake.gamma / brake.eta - v0b - tau * a0b - brake.gamma * tau - brake.gamma * brake.t_brake
    ) / (brake.gamma * tau)

    lam1 = lam2 = lam3 = beta2 = beta3 = beta4 = beta5 = None
    if regime == "overdamped":
        root = np.sqrt(1.0 - crit)
        lam1 = (-1.0 + root) / (2.0 * tau)
        lam2 = (-1.0 - root) / (2.0 * tau)
        beta2 = (a_at_star - lam2 * v_at_star) / (lam1 - lam2)
        beta3 = (lam1 * v_at_star - a_at_star) / (lam1 - lam2)
    else:
        lam3 = -1.0 / (2.0 * tau)
        beta4 = v_at_star
        beta5 = a_at_star - lam3 * v_at_star

    return BrakeSchedule(
        params=brake,
        tau_d=tau,
        v0_init=params.v0_init,
        a0_init=params.a0_init,
        v0_at_brake=v0b,
        a0_at_brake=a0b,
        t_star=float(t_star),
        v_at_star=float(v_at_star),
        a_at_star=float(a_at_star),
        regime=regime,
        beta1=float(beta1),
        beta2=beta2,
        beta3=beta3,
        beta4=beta4,
        beta5=beta5,
        lambda1=lam1,
        lambda2=lam2,
        lambda3=lam3,
    )


def _v_proportional(dt, sched):
    """Speed during the proportional phase, dt = t - t_star >= 0."""
    if sched.regime == "overdamped":
        return sched.beta2 * np.exp(sched.lambda1 * dt) + sched.beta3 * np.exp(sched.lambda2 * dt)
    return np.exp(sched.lambda3 * dt) * (sched.beta4 + sched.beta5 * dt)


def u0_continuous(t, sched):
    """Desired acceleration of the reference at continuous time t."""
    brake = sched.params
    if t < brake.t_brake:
        return 0.0
    if t < sched.t_star:
        return -brake.gamma
    return float(-brake.eta * _v_proportional(t - sched.t_star, sched))


def u0_discrete(k, sched, T):
    """Desired acceleration held over the k-th communication interval.

    Samples the continuous law's case structure at ``t = k*T``.
    """
    if k < 0:
        raise IndexError(f"instant index must be >= 0, got {k}")
    return u0_continuous(k * T, sched)


def ref_velocity(t, sched):
    """Reference speed at continuous time t, all phases."""
    brake = sched.params
    tau = sched.tau_d
    if t < brake.t_brake:
        return float(sched.v0_init + sched.a0_init * tau * (1.0 - np.exp(-t / tau)))
    if t < sched.t_star:
        return float(_v_constant_brake(t, brake, sched.v0_at_brake, sched.a0_at_brake, tau))
    return float(_v_proportional(t - sched.t_star, sched))
