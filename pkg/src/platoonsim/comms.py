"""Packet-loss models and the hold/update rule for received inputs.

Two loss processes are supported on the follower-to-follower links
(i = 1..n-1): a deterministic pattern with exactly ``ell`` failures
between successes, and independent Bernoulli losses.  Bernoulli bits are
a pure hash of (seed, link, instant) so schedules need no storage, are
order-independent, and replay identically across processes.

Link 0 carries the reference's desired acceleration to the first
follower and is never lossy; instant 0 is a forced success on every
link.
"""

from dataclasses import dataclass

from .errors import ConfigurationError
from .model import PlatoonState, idx_ctrl

__all__ = [
    "LossModel",
    "LossSchedule",
    "loss_bit",
    "realize",
    "update_u_hat",
    "derive_seed",
]

_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(z):
    z = (z + _GOLDEN) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def derive_seed(base, index):
    """Stable 64-bit child seed for the index-th member of a campaign."""
    return _splitmix64((int(base) ^ _splitmix64(int(index))) & _M64)


@dataclass(frozen=True)
class LossModel:
    kind: str
    ell: int | None = None
    p: float | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind == "consecutive":
            if self.ell is None or int(self.ell) != self.ell or self.ell < 1:
                raise ConfigurationError(f"consecutive losses need an integer ell >= 1, got {self.ell!r}")
            object.__setattr__(self, "ell", int(self.ell))
        elif self.kind == "bernoulli":
            if self.p is None or not 0.0 <= self.p <= 1.0:
                raise ConfigurationError(f"bernoulli losses need p in [0, 1], got {self.p!r}")
            if self.seed is None or int(self.seed) != self.seed or not 0 <= self.seed <= _M64:
                raise ConfigurationError(f"bernoulli losses need a 64-bit unsigned seed, got {self.seed!r}")
            object.__setattr__(self, "seed", int(self.seed))
        else:
            raise ConfigurationError(f"unknown loss kind {self.kind!r}; use 'consecutive' or 'bernoulli'")


def loss_bit(model, i, j):
    """Loss indicator for link i at instant j: 1 means the packet is lost."""
    if i < 1:
        raise IndexError(f"lossy links are numbered from 1, got i={i}")
    if j < 0:
        raise IndexError(f"instant index must be >= 0, got j={j}")
    if j == 0:
        return 0
    if model.kind == "consecutive":
        return 0 if j % (model.ell + 1) == 0 else 1
    word = _splitmix64(model.seed ^ (i << 40) ^ j)
    return 1 if (word >> 11) * 2.0**-53 < model.p else 0


@dataclass(frozen=True)
class LossSchedule:
    """Loss bits for every link of an n-follower platoon.

    A thin deterministic view over a LossModel; ``bit(i, j)`` is valid for
    any instant without precomputation.
    """

    model: LossModel
    n: int

    def bit(self, i, j):
        if not 1 <= i <= self.n - 1:
            raise IndexError(f"link index must be in 1..{self.n - 1}, got {i}")
        return loss_bit(self.model, i, j)


def realize(model, n):
    """Bind a loss model to a platoon size, yielding per-link bits."""
    if n < 2:
        raise ConfigurationError(f"a loss schedule needs n >= 2, got {n}")
    return LossSchedule(model=model, n=n)


def update_u_hat(state, schedule, j, u0_j):
    """Apply the communication-instant update to the held input vector.

    Entry 0 (the reference input) and entry 1 (its lossless copy) are set
    to ``u0_j``; each follower link i >= 1 either delivers the current
    controller output of vehicle i or holds its previous value, per the
    loss bit.  Returns a new state; the plant block is untouched.
    """
    u = state.u.copy()
    u[0] = u0_j
    u[1] = u0_j
    for i in range(1, schedule.n):
        if schedule.bit(i, j) == 0:
            u[1 + i] = state.x[idx_ctrl(i)]
    return PlatoonState(x=state.x.copy(), u=u, t=state.t)
