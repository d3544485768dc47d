"""Platoon parameters, state layout, and system-matrix assembly.

State vector layout (length 3 + 6n)::

    [ p0, v0, a0 | e_1, de_1, p_1, v_1, a_1, u_1 | ... | e_n, ..., u_n ]

where vehicle 0 is the virtual reference and vehicles 1..n are followers.
``e_i`` is the spacing error of the constant time-gap policy, ``de_i`` its
derivative, and ``u_i`` the output of vehicle i's feedback controller.

Input vector layout (length 1 + n)::

    [ u0 | uhat_0, uhat_1, ..., uhat_{n-1} ]

``u0`` is the reference's desired acceleration and ``uhat_i`` the most
recently received copy of vehicle i's controller output, consumed by
vehicle i+1.  ``uhat_0`` always equals ``u0``: the reference needs no
radio link.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import ConfigurationError

__all__ = [
    "PlatoonParams",
    "PlatoonMatrices",
    "PlatoonState",
    "assemble",
    "build_q",
    "initial_state",
    "state_dim",
    "input_dim",
    "lifted_dim",
    "idx_pos",
    "idx_vel",
    "idx_ctrl",
    "distances",
    "velocities",
]


def state_dim(n):
    return 3 + 6 * n


def input_dim(n):
    return 1 + n


def lifted_dim(n):
    return 4 + 7 * n


def idx_pos(i):
    """Index of p_i in the state layout (i = 0 is the reference)."""
    return 0 if i == 0 else 6 * i - 1


def idx_vel(i):
    """Index of v_i in the state layout."""
    return 1 if i == 0 else 6 * i


def idx_ctrl(i):
    """Index of u_i (controller output) in the state layout, i >= 1."""
    if i < 1:
        raise IndexError(f"controller outputs exist only for followers, got i={i}")
    return 6 * i + 2


@dataclass(frozen=True)
class PlatoonParams:
    """Scenario parameters for an n-follower platoon.

    ``L`` may be a single length applied to every vehicle or a sequence of
    n per-vehicle lengths (for followers 1..n).
    """

    n: int
    tau_d: float
    h: float
    r: float
    L: object
    k_p: float
    k_d: float
    T: float
    v0_init: float
    a0_init: float = 0.0
    p_lead_init: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ConfigurationError(f"n must be an integer >= 2, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        for name in ("tau_d", "h", "T"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be > 0, got {getattr(self, name)!r}")
        if not self.r > 0:
            raise ConfigurationError(f"r must be > 0, got {self.r!r}")
        if np.ndim(self.L) == 0:
            lengths = (float(self.L),) * self.n
        else:
            lengths = tuple(float(v) for v in self.L)
            if len(lengths) != self.n:
                raise ConfigurationError(f"L must have one length per follower ({self.n}), got {len(lengths)}")
        if any(not v > 0 for v in lengths):
            raise ConfigurationError(f"vehicle lengths must all be > 0, got {lengths!r}")
        object.__setattr__(self, "L", lengths)
        if not self.v0_init >= 0:
            raise ConfigurationError(f"v0_init must be >= 0, got {self.v0_init!r}")

    @property
    def lengths(self):
        """Per-vehicle lengths as an array indexed by follower (L_1..L_n)."""
        return np.asarray(self.L, dtype=float)


@dataclass(frozen=True, eq=False)
class PlatoonMatrices:
    """Assembled system matrices plus cached norm constants.

    ``norm_Ac`` is the spectral (largest-singular-value) norm of A_c and
    ``norm_Ac_frob`` the Frobenius norm.  Either works as the exponential
    growth constant in the norm-based step rule, since the rule stays
    valid for any upper bound on the spectral norm; the Frobenius value is
    the default there (see stepper).  ``mu_Atilde`` is the logarithmic
    norm of the lifted matrix and ``phi`` the largest gain from the lifted
    state to any distance derivative.
    """

    params: PlatoonParams
    A_c: np.ndarray
    B_c: np.ndarray
    A_tilde: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    q: tuple
    norm_Ac: float
    norm_Ac_frob: float
    mu_Atilde: float
    phi: float

    @property
    def n(self):
        return self.params.n

    @property
    def dim(self):
        return state_dim(self.params.n)

    @property
    def dim_lifted(self):
        return lifted_dim(self.params.n)

    @property
    def q_matrix(self):
        """The q_i selectors stacked as rows (shape (n-1, dim))."""
        return np.vstack(self.q)


@dataclass
class PlatoonState:
    """Per-run mutable state: plant vector x, input vector u, and time."""

    x: np.ndarray
    u: np.ndarray
    t: float = 0.0

    def lifted(self):
        return np.concatenate([self.x, self.u])


def build_q(i, n):
    """Distance selector for the pair (i-1, i): +1 at p_{i-1}, -1 at p_i.

    Defined for followers i in 2..n, so that ``q_i @ x`` equals
    ``p_{i-1} - p_i`` under the documented state layout.
    """
    if not 2 <= i <= n:
        raise IndexError(f"distance selectors exist for i in 2..{n}, got i={i}")
    q = np.zeros(state_dim(n))
    q[idx_pos(i - 1)] = 1.0
    q[idx_pos(i)] = -1.0
    return q


def _freeze(a):
    a.flags.writeable = False
    return a


def assemble(params, require_positive_mu=True):
    """Build A_c, B_c, the lifted matrix, selectors, and norm constants.

    Raises
    ------
    ConfigurationError
        If the logarithmic norm of the lifted matrix is not positive while
        ``require_positive_mu`` is set; the theorem2 step rule needs a
        positive value (see ``max_step_theorem2`` for the limit-form
        fallback).
    """
    n, tau, h = params.n, params.tau_d, params.h
    kp, kd = params.k_p, params.k_d
    dim = state_dim(n)

    m_blk = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0 / tau]])
    n_blk = np.array(
        [
            [0.0, 0.0, 0.0, -1.0, -h, 0.0],
            [0.0, 0.0, 0.0, 0.0, h / tau - 1.0, -h / tau],
            [0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, -1.0 / tau, 1.0 / tau],
            [kp / h, kd / h, 0.0, 0.0, 0.0, -1.0 / h],
        ]
    )
    g_blk = np.zeros((6, 3))
    g_blk[0, 1] = 1.0
    g_blk[1, 2] = 1.0
    h_blk = np.zeros((6, 6))
    h_blk[0, 3] = 1.0
    h_blk[1, 4] = 1.0

    a_c = np.zeros((dim, dim))
    a_c[0:3, 0:3] = m_blk
    for i in range(1, n + 1):
        row = 3 + 6 * (i - 1)
        a_c[row : row + 6, row : row + 6] = n_blk
        if i == 1:
            a_c[row : row + 6, 0:3] = g_blk
        else:
            a_c[row : row + 6, row - 6 : row] = h_blk

    b_c = np.zeros((dim, input_dim(n)))
    b_c[2, 0] = 1.0 / tau
    for i in range(1, n + 1):
        b_c[3 + 6 * (i - 1) + 5, i] = 1.0 / h

    dim_l = lifted_dim(n)
    a_tilde = np.zeros((dim_l, dim_l))
    a_tilde[:dim, :dim] = a_c
    a_tilde[:dim, dim:] = b_c

    b1 = np.zeros((dim_l, dim))
    b1[:dim, :] = np.eye(dim)
    b2 = np.zeros((dim_l, input_dim(n)))
    b2[dim:, :] = np.eye(input_dim(n))

    q = tuple(_freeze(build_q(i, n)) for i in range(2, n + 1))
    qmat = np.vstack(q)
    # largest gain from the lifted state to any d-dot: rows of [q_i A_c | q_i B_c]
    coupling = np.hstack([qmat @ a_c, qmat @ b_c])
    phi = float(np.max(np.linalg.norm(coupling, axis=1)))

    norm_ac = linalg.spectral_norm(a_c)
    norm_ac_frob = float(np.linalg.norm(a_c))
    mu = linalg.log_norm(a_tilde)
    if require_positive_mu and not mu > 0.0:
        raise ConfigurationError(
            f"logarithmic norm of the lifted matrix is {mu:.3e}; the theorem2 "
            "step rule requires a positive value (pass require_positive_mu=False "
            "to assemble anyway and rely on the documented limit-form fallback)"
        )

    return PlatoonMatrices(
        params=params,
        A_c=_freeze(a_c),
        B_c=_freeze(b_c),
        A_tilde=_freeze(a_tilde),
        b1=_freeze(b1),
        b2=_freeze(b2),
        q=q,
        norm_Ac=norm_ac,
        norm_Ac_frob=norm_ac_frob,
        mu_Atilde=mu,
        phi=phi,
    )


def initial_state(params, u_ctrl_init=0.0):
    """Steady-cruise initial condition.

    Every vehicle starts at ``v0_init`` and ``a0_init``; positions are
    spaced by the time-gap policy target ``r + h*v0_init`` behind the lead
    position, so the spacing errors start at ``-L_i``.  Controller outputs
    start at ``u_ctrl_init`` (zero by default) and the held inputs are
    initialized to the matching controller outputs.
    """
    n = params.n
    v0, a0 = params.v0_init, params.a0_init
    gap = params.r + params.h * v0
    lengths = params.lengths

    x = np.zeros(state_dim(n))
    x[0] = params.p_lead_init
    x[1] = v0
    x[2] = a0
    for i in range(1, n + 1):
        row = 3 + 6 * (i - 1)
        p_i = params.p_lead_init - gap * i
        x[row + 0] = gap - lengths[i - 1] - (params.r + params.h * v0)
        x[row + 1] = -params.h * a0
        x[row + 2] = p_i
        x[row + 3] = v0
        x[row + 4] = a0
        x[row + 5] = u_ctrl_init

    u = np.zeros(input_dim(n))
    u[0] = 0.0
    u[1] = 0.0
    u[2:] = u_ctrl_init
    return PlatoonState(x=x, u=u, t=0.0)


def distances(x, mats):
    """Inter-vehicle distances d_i = p_{i-1} - p_i - L_i for i = 2..n."""
    return mats.q_matrix @ np.asarray(x)[: mats.dim] - mats.params.lengths[1:]


def velocities(x, n):
    """All vehicle velocities [v_0, v_1, ..., v_n] from a state vector."""
    x = np.asarray(x)
    idx = [idx_vel(i) for i in range(n + 1)]
    return x[idx]
