"""Compiled-vs-reference kernel parity.

The two kernels run the identical decision procedure on the identical
integer grid, so tick sequences and stop reasons must agree exactly;
floating-point trajectories may differ by accumulation order and are
compared to near machine precision.
"""

import os
import subprocess
import sys

import numpy as np
import pytest

from platoonsim import Engine, LossModel, StepRule, backend, run
from platoonsim import _pyref

from conftest import short_config


def test_backend_reports_selection():
    assert backend.BACKEND in ("compiled", "python")
    # this repo ships the extension; the envvar is the only reason to fall back
    if os.environ.get("PLATOONSIM_FORCE_PYTHON") != "1":
        assert backend.BACKEND == "compiled"


def test_force_python_env(tmp_path):
    code = "import platoonsim; print(platoonsim.BACKEND)"
    env = dict(os.environ, PLATOONSIM_FORCE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "python"


def _run_with_kernel(cfg, kernel, monkeypatch):
    monkeypatch.setattr(backend, "advance_period", kernel)
    eng = Engine(cfg.params, cfg.brake, cfg.rule, cfg.t_end)
    return eng.run(cfg.loss, keep_states=True)


@pytest.mark.skipif(backend.BACKEND != "compiled", reason="only one kernel available")
@pytest.mark.parametrize(
    "overrides",
    [
        {},
        {"loss": LossModel(kind="bernoulli", p=0.6, seed=17)},
        {"rule": StepRule(kind="theorem1", alpha=0.5)},
    ],
)
def test_kernel_parity(overrides, monkeypatch):
    from platoonsim import _speedups

    cfg = short_config(**overrides)
    fast = _run_with_kernel(cfg, _speedups.advance_period, monkeypatch)
    ref = _run_with_kernel(cfg, _pyref.advance_period, monkeypatch)

    assert np.array_equal(fast.ticks, ref.ticks)
    assert fast.stop_reason == ref.stop_reason
    assert fast.k_prime_end == ref.k_prime_end
    assert np.allclose(fast.distances, ref.distances, rtol=1e-9, atol=1e-9)
    assert np.allclose(fast.velocities, ref.velocities, rtol=1e-9, atol=1e-9)
    assert np.allclose(fast.state_snapshots, ref.state_snapshots, rtol=1e-9, atol=1e-9)
    assert fast.d_prime_min == pytest.approx(ref.d_prime_min, abs=1e-9)


@pytest.mark.skipif(backend.BACKEND != "compiled", reason="only one kernel available")
def test_interval_scan_parity():
    from platoonsim import _speedups
    from platoonsim.linalg import expm

    cfg = short_config()
    tr = run(cfg, keep_states=True)
    eng = Engine(cfg.params, cfg.brake, cfg.rule, cfg.t_end)
    dim = eng._dim
    tick = cfg.params.T / cfg.rule.n_bar
    k = tr.k_prime_end // 2
    dticks = int(tr.ticks[k + 1] - tr.ticks[k])
    p = expm(eng.mats.A_tilde, dticks * tick / 50)
    entry = (np.ascontiguousarray(p[:dim, :dim]), np.ascontiguousarray(p[:dim, dim:]))
    args = (entry, tr.state_snapshots[k, :dim], tr.state_snapshots[k, dim:], 50, eng._ia, eng._ib, eng._lengths)
    dev_fast, min_fast = _speedups.interval_max_dev(*args)
    dev_ref, min_ref = _pyref.interval_max_dev(*args)
    assert dev_fast == pytest.approx(dev_ref, abs=1e-12)
    assert min_fast == pytest.approx(min_ref, abs=1e-12)
