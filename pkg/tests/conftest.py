import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from platoonsim import BrakeParams, LossModel, PlatoonParams, SimConfig, StepRule


def default_params(n=8, **overrides):
    """The braking scenario the repo ships as scenarios/default.json."""
    fields = dict(
        n=n,
        tau_d=1.5,
        h=0.6,
        r=10.0,
        L=4.7,
        k_p=0.2,
        k_d=1.2,
        T=0.1,
        v0_init=30.0,
        a0_init=0.0,
        p_lead_init=200.0,
    )
    fields.update(overrides)
    return PlatoonParams(**fields)


@pytest.fixture(scope="session")
def v_params():
    return default_params()


@pytest.fixture(scope="session")
def v_params_n3():
    return default_params(n=3)


@pytest.fixture(scope="session")
def v_brake():
    return BrakeParams(t_brake=5.0, gamma=1.2, eta=0.1)


@pytest.fixture(scope="session")
def v_mats(v_params):
    from platoonsim import assemble

    return assemble(v_params)


@pytest.fixture(scope="session")
def v_mats_n3(v_params_n3):
    from platoonsim import assemble

    return assemble(v_params_n3)


def short_config(**overrides):
    """n=3 braking run over 5 s; cheap enough for per-test simulation."""
    fields = dict(
        params=default_params(n=3),
        brake=BrakeParams(t_brake=1.0, gamma=1.2, eta=0.1),
        loss=LossModel(kind="consecutive", ell=7),
        rule=StepRule(kind="theorem2", alpha=1.0, n_bar=100000),
        t_end=5.0,
    )
    fields.update(overrides)
    return SimConfig(**fields)


@pytest.fixture(scope="session")
def quick_config():
    return short_config()


@pytest.fixture(scope="session")
def quick_trace(quick_config):
    from platoonsim import Engine

    eng = Engine(quick_config.params, quick_config.brake, quick_config.rule, quick_config.t_end)
    return eng.run(quick_config.loss, keep_states=True)


def brake_draws(count, seed):
    """Exactly ``count`` brake/vehicle draws spanning both damping regimes.

    The brake-time speed is placed above gamma/eta so a proper switch
    exists, and every tenth draw sits exactly on the critical damping
    line.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        tau = float(rng.uniform(0.8, 2.5))
        eta = 1.0 / (4.0 * tau) if len(out) % 10 == 0 else float(rng.uniform(0.02, 1.0 / (4.0 * tau)))
        gamma = float(rng.uniform(0.5, 3.0))
        t_brake = float(rng.uniform(0.5, 8.0))
        a0 = float(rng.uniform(-2.0, 2.0))
        v_target = gamma / eta * float(rng.uniform(1.05, 2.5))
        v0 = v_target - a0 * tau * (1.0 - np.exp(-t_brake / tau))
        if v0 < 0.0:
            continue
        out.append(
            (
                default_params(tau_d=tau, v0_init=v0, a0_init=a0),
                BrakeParams(t_brake=t_brake, gamma=gamma, eta=eta),
            )
        )
    return out
