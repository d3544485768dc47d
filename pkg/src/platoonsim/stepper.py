"""Certified step-size rules and grid placement of simulation instants.

Both rules return the largest step for which every inter-vehicle distance
is guaranteed to stay within ``alpha`` of its value at the step's start.
``theorem1`` bounds the deviation through an exponential-growth constant
of the plant matrix; ``theorem2`` works on the lifted state and uses the
logarithmic norm, which is much smaller here, so its steps are larger.

Simulation instants live on the grid of integer multiples of ``T/N_bar``
inside each communication interval; ``next_instant`` quantizes a raw step
onto that grid and never crosses a communication boundary, so the set of
simulation instants always contains the communication instants.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, StepResolutionError

__all__ = [
    "StepRule",
    "max_step_theorem1",
    "max_step_theorem2",
    "raw_to_ticks",
    "next_tick",
    "next_instant",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class StepRule:
    """Which rule to apply, the certified bound, and the grid resolution.

    ``inflate`` scales the raw step and exists so the validation tooling
    can deliberately break the guarantee as a negative control; leave it
    at 1.0 for certified results.
    """

    kind: str
    alpha: float
    n_bar: int = 100_000
    inflate: float = 1.0

    def __post_init__(self):
        if self.kind not in ("theorem1", "theorem2"):
            raise ConfigurationError(f"unknown step rule {self.kind!r}; use 'theorem1' or 'theorem2'")
        if not self.alpha > 0:
            raise ConfigurationError(f"alpha must be > 0, got {self.alpha!r}")
        if int(self.n_bar) != self.n_bar or self.n_bar < 1:
            raise ConfigurationError(f"n_bar must be an integer >= 1, got {self.n_bar!r}")
        object.__setattr__(self, "n_bar", int(self.n_bar))
        if not self.inflate > 0:
            raise ConfigurationError(f"inflate must be > 0, got {self.inflate!r}")


def max_step_theorem1(x, u, mats, alpha, growth_norm="frobenius"):
    """Norm-based certified step from state x and held input u.

    Returns ``ln( alpha / (sqrt(2) (‖x‖ + ‖B_c u‖/c)) + 1 ) / c`` where
    ``c`` is an exponential growth constant of A_c: any upper bound on the
    spectral norm keeps the guarantee, and the Frobenius norm (default) is
    the conventional choice here.  Degenerate zero denominator returns
    +inf; the caller caps the step at the next communication instant.
    """
    if not alpha > 0:
        raise ConfigurationError(f"alpha must be > 0, got {alpha!r}")
    if growth_norm == "frobenius":
        c = mats.norm_Ac_frob
    elif growth_norm == "spectral":
        c = mats.norm_Ac
    else:
        raise ConfigurationError(f"unknown growth_norm {growth_norm!r}")
    denom = np.linalg.norm(np.asarray(x)) + np.linalg.norm(mats.B_c @ np.asarray(u)) / c
    if denom == 0.0:
        return math.inf
    return math.log(alpha / (_SQRT2 * denom) + 1.0) / c


def max_step_theorem2(x_tilde, mats, alpha, allow_nonpositive_mu=False):
    """Log-norm certified step from the lifted state.

    Returns ``ln( mu alpha / (phi ‖x̃‖) + 1 ) / mu`` with ``mu`` the
    logarithmic norm of the lifted matrix.  Requires ``mu > 0``; with
    ``allow_nonpositive_mu`` the ``mu -> 0`` limit ``alpha / (phi ‖x̃‖)``
    is used instead (valid for mu <= 0, where growth is even slower).
    """
    if not alpha > 0:
        raise ConfigurationError(f"alpha must be > 0, got {alpha!r}")
    mu = mats.mu_Atilde
    norm = float(np.linalg.norm(np.asarray(x_tilde)))
    if norm == 0.0:
        return math.inf
    if mu <= 0.0:
        if not allow_nonpositive_mu:
            raise ConfigurationError(
                f"mu_Atilde = {mu:.3e} is not positive; the theorem2 rule requires "
                "mu > 0 (set allow_nonpositive_mu=True for the limit-form fallback)"
            )
        return alpha / (mats.phi * norm)
    return math.log(mu * alpha / (mats.phi * norm) + 1.0) / mu


def raw_to_ticks(raw_step, T, n_bar):
    """Quantize a raw step to grid ticks, clamped into [1, n_bar].

    Raises
    ------
    StepResolutionError
        If the step is below one tick: the guarantee cannot be honored on
        this grid, so the caller must raise n_bar or alpha.
    """
    if raw_step == math.inf:
        return n_bar
    nu = math.floor(raw_step * n_bar / T)
    if nu < 1:
        raise StepResolutionError(
            f"certified step {raw_step:.3e} s is below one grid tick "
            f"({T / n_bar:.3e} s); increase n_bar or alpha"
        )
    return min(nu, n_bar)


def next_tick(c, nu, n_bar):
    """Advance a tick count by nu, stopping at the communication boundary."""
    return c + min(n_bar - c % n_bar, nu)


def next_instant(t_k, raw_step, T, n_bar):
    """Float wrapper over the integer grid arithmetic.

    ``t_k`` must already sit on the T/n_bar grid.
    """
    tick = T / n_bar
    c = round(t_k / tick)
    if abs(c * tick - t_k) > 1e-9 * max(T, abs(t_k)):
        raise ConfigurationError(f"t_k={t_k!r} is not aligned to the T/n_bar grid")
    nu = raw_to_ticks(raw_step, T, n_bar)
    return next_tick(c, nu, n_bar) * tick
