"""Certification-oracle tests.

The oracle exists to catch a broken kernel, so most checks here are about
its independence and its refusal to certify bad traces: a run with the
deliberately inflated step rule must fail the bound check.
"""

import math
from types import SimpleNamespace

import numpy as np
import pytest

from platoonsim import (
    BoundReport,
    ConfigurationError,
    Engine,
    LossModel,
    OracleConfig,
    StepRule,
    ValidationError,
    certify,
    dense_distances,
    rk4_reference,
    run,
)

from conftest import default_params, short_config


# --------------------------------------------------------- configuration


def test_oracle_config_validation():
    cfg = OracleConfig()
    assert cfg.substeps_per_interval == 1000 and cfg.integrator == "dense_expm"
    with pytest.raises(ConfigurationError):
        OracleConfig(substeps_per_interval=9)
    with pytest.raises(ConfigurationError):
        OracleConfig(substeps_per_interval=100.5)
    with pytest.raises(ConfigurationError):
        OracleConfig(integrator="euler")


# ------------------------------------------------------------ rk4 core


def test_rk4_scalar_decay():
    # x' = -x over one unit: stub bundle with a 1x1 lifted matrix
    mats = SimpleNamespace(A_tilde=np.array([[-1.0]]))
    x = rk4_reference(np.array([1.0]), 1.0, 1000, mats)
    assert x[0] == pytest.approx(math.exp(-1.0), rel=1e-10)
    with pytest.raises(ConfigurationError):
        rk4_reference(np.array([1.0]), 1.0, 5, mats)


def test_rk4_is_fourth_order():
    mats = SimpleNamespace(A_tilde=np.array([[0.0, 1.0], [-1.0, 0.0]]))
    exact = np.array([math.cos(2.0), -math.sin(2.0)])
    x0 = np.array([1.0, 0.0])
    err = [
        float(np.max(np.abs(rk4_reference(x0, 2.0, m, mats) - exact)))
        for m in (10, 20, 40)
    ]
    # halving the step divides the error by about 2^4
    assert 12.0 < err[0] / err[1] < 20.0
    assert 12.0 < err[1] / err[2] < 20.0


# -------------------------------------------------------- certify: happy


@pytest.fixture(scope="module")
def certified_quick():
    cfg = short_config()
    tr = run(cfg, keep_states=True)
    report = certify(cfg, tr, OracleConfig(substeps_per_interval=40))
    return cfg, tr, report


def test_certify_passes_quick_run(certified_quick):
    cfg, tr, report = certified_quick
    assert isinstance(report, BoundReport)
    assert report.passed and report.sound
    assert report.alpha == 1.0
    assert report.per_interval.shape == (tr.k_prime_end,)
    assert report.max_deviation == report.per_interval.max()
    assert report.max_deviation <= 1.0
    assert report.interval.lo <= report.oracle_d_min <= report.interval.hi
    # the sampled continuous minimum can only sit below the instant minimum
    assert report.oracle_d_min <= tr.d_prime_min + 1e-12


def test_certify_tighter_alpha_still_bounded(certified_quick):
    """The observed deviations are far below alpha here; alpha/2 still passes."""
    cfg, tr, _ = certified_quick
    half = short_config(rule=StepRule(kind="theorem2", alpha=0.5))
    tr_half = run(half, keep_states=True)
    report = certify(half, tr_half, OracleConfig(substeps_per_interval=40))
    assert report.passed and report.sound
    assert report.max_deviation <= 0.5


def test_integrators_agree(certified_quick):
    cfg, tr, dense_report = certified_quick
    rk4_report = certify(cfg, tr, OracleConfig(substeps_per_interval=40, integrator="rk4"))
    assert rk4_report.passed and rk4_report.sound
    assert rk4_report.max_deviation == pytest.approx(dense_report.max_deviation, abs=1e-9)
    assert rk4_report.oracle_d_min == pytest.approx(dense_report.oracle_d_min, abs=1e-9)
    assert np.allclose(rk4_report.per_interval, dense_report.per_interval, atol=1e-9)


def test_dense_distances_matches_certify(certified_quick):
    cfg, tr, report = certified_quick
    devs = dense_distances(cfg, tr, OracleConfig(substeps_per_interval=40))
    assert np.array_equal(devs, report.per_interval)


def test_zero_dynamics_has_zero_deviation():
    """Gains off, nothing moving: every sampled deviation is exactly 0."""
    cfg = short_config(
        params=default_params(n=3, v0_init=0.0, a0_init=0.0, k_p=0.0, k_d=0.0),
        loss=LossModel(kind="bernoulli", p=0.0, seed=4),
        rule=StepRule(kind="theorem1", alpha=1.0),
        t_end=0.5,
    )
    tr = run(cfg, keep_states=True)
    report = certify(cfg, tr, OracleConfig(substeps_per_interval=20))
    assert np.array_equal(report.per_interval, np.zeros(tr.k_prime_end))
    assert report.oracle_d_min == tr.d_prime_min


# ------------------------------------------------- certify: must refuse


def test_inflated_steps_fail_certification():
    """Negative control: scaling the certified step up must break the bound."""
    cfg = short_config(
        rule=StepRule(kind="theorem2", alpha=1e-3, inflate=1e6),
        t_end=3.0,
    )
    tr = run(cfg, keep_states=True)
    report = certify(cfg, tr, OracleConfig(substeps_per_interval=40))
    assert not report.passed
    assert report.max_deviation > 1e-3


def test_certify_rejects_foreign_trace():
    cfg = short_config()
    tr = run(cfg, keep_states=True)
    other = short_config(t_end=4.0)
    with pytest.raises(ValidationError):
        certify(other, tr, OracleConfig(substeps_per_interval=20))


def test_certify_requires_snapshots():
    cfg = short_config()
    tr = run(cfg, keep_states=False)
    with pytest.raises(ValidationError):
        certify(cfg, tr, OracleConfig(substeps_per_interval=20))
