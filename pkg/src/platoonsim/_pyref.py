"""Reference implementation of the hot simulation kernels.

The compiled extension in ``_speedups.pyx`` mirrors these routines
exactly; this module is the always-available fallback and the behavioural
reference for the backend parity tests.  Status codes returned by
``advance_period`` are shared by both implementations.

The lifted state is carried split as (plant block, input block): the
input block is constant between communication instants, so propagation
over one step is ``xp <- P11 @ xp + P12 @ u`` with the blocks of the
lifted matrix exponential, and the ``P12 @ u`` product is reused for
every step of a period that lands on the same tick count.
"""

import math

import numpy as np

PERIOD_DONE = 0
REACHED_END = 1
COLLISION = 2
STANDSTILL = 3
RESOLUTION = 4
BUFFER_FULL = 5

RULE_THEOREM1 = 0
RULE_THEOREM2 = 1

_SQRT2 = math.sqrt(2.0)


def advance_period(
    xp,
    u,
    c,
    c_end,
    nbar,
    rule_kind,
    alpha,
    inflate,
    tick,
    growth_c,
    inv_tau,
    inv_h,
    mu,
    phi,
    ia,
    ib,
    lengths,
    vel_idx,
    v_stop,
    cache,
    z_cache,
    expm_cb,
    out_ticks,
    out_dists,
    out_vels,
    out_states,
    row_start,
):
    """Advance from tick ``c`` to the end of its communication period.

    Records every simulation instant into the ``out_*`` buffers starting
    at ``row_start`` and stops early on collision, standstill, horizon
    end, step-resolution failure, or a full buffer.  Returns
    ``(status, next_row, c)`` with the state advanced in place.
    """
    cap = out_ticks.shape[0]
    row = row_start

    # per-call constants: the input block is frozen for the whole period
    bu_norm = math.sqrt(
        (u[0] * inv_tau) ** 2 + float(np.sum((u[1:] * inv_h) ** 2))
    )
    u_norm2 = float(u @ u)

    while True:
        if row == cap:
            return BUFFER_FULL, row, c
        d = xp[ia] - xp[ib] - lengths
        v = xp[vel_idx]
        out_ticks[row] = c
        out_dists[row] = d
        out_vels[row] = v
        if out_states is not None:
            out_states[row, : xp.shape[0]] = xp
            out_states[row, xp.shape[0] :] = u
        row += 1

        if np.any(d <= 0.0):
            return COLLISION, row, c
        if np.all(np.abs(v) <= v_stop):
            return STANDSTILL, row, c
        if c == c_end:
            return REACHED_END, row, c

        xp_norm = float(np.linalg.norm(xp))
        if rule_kind == RULE_THEOREM1:
            denom = xp_norm + bu_norm / growth_c
            raw = math.inf if denom == 0.0 else math.log(alpha / (_SQRT2 * denom) + 1.0) / growth_c
        else:
            xt_norm = math.sqrt(xp_norm * xp_norm + u_norm2)
            raw = math.inf if xt_norm == 0.0 else math.log(mu * alpha / (phi * xt_norm) + 1.0) / mu

        if raw == math.inf:
            nu = nbar
        else:
            nu = int(math.floor(raw * inflate / tick))
            if nu < 1:
                return RESOLUTION, row, c
            if nu > nbar:
                nu = nbar
        delta = min(nbar - c % nbar, nu)

        entry = cache.get(delta)
        if entry is None:
            entry = expm_cb(delta)
        z = z_cache.get(delta)
        if z is None:
            z = entry[1] @ u
            z_cache[delta] = z
        xp[:] = entry[0] @ xp + z
        c += delta
        if c % nbar == 0:
            return PERIOD_DONE, row, c


def interval_max_dev(p_sub, xp0, u0, substeps, ia, ib, lengths):
    """Worst distance deviation over one inter-instant interval.

    Repropagates the interval's start state through ``substeps``
    applications of the substep propagator blocks ``p_sub = (P11, P12)``
    and returns ``(max_dev, min_d)``: the largest ``|d_i(t) - d_i(t_k)|``
    over all substep samples and the smallest sampled distance.
    """
    p11, p12 = p_sub
    xp = xp0.copy()
    z = p12 @ u0
    d0 = xp[ia] - xp[ib] - lengths
    max_dev = 0.0
    min_d = float(np.min(d0))
    for _ in range(substeps):
        xp = p11 @ xp + z
        d = xp[ia] - xp[ib] - lengths
        dev = float(np.max(np.abs(d - d0)))
        if dev > max_dev:
            max_dev = dev
        dmin = float(np.min(d))
        if dmin < min_d:
            min_d = dmin
    return max_dev, min_d
