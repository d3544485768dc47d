"""Compare the compiled stepping kernel against the pure-Python fallback.

Runs the default braking scenario once per backend (forcing the fallback via
a subprocess with PLATOONSIM_FORCE_PYTHON=1) and prints wall time plus the
achieved step count.  The two kernels accumulate matrix-vector products in
different orders, so floats agree only to roundoff; the step sequence and
stop reason must match exactly.

Usage: python benchmarks/bench_backends.py [scenario.json]
"""

import json
import os
import subprocess
import sys
import time

HERE = os.path.dirname(os.path.abspath(__file__))
DEFAULT_SCENARIO = os.path.join(HERE, "..", "scenarios", "default.json")

_WORKER = r"""
import json, sys, time
import platoonsim

config = platoonsim.load_scenario(sys.argv[1])
engine = platoonsim.Engine(config.params, config.brake, config.rule, config.t_end)
engine.run(config.loss)  # warm the propagator cache
t0 = time.perf_counter()
trace = engine.run(config.loss)
elapsed = time.perf_counter() - t0
print(json.dumps({
    "backend": platoonsim.BACKEND,
    "seconds": elapsed,
    "k_prime_end": trace.k_prime_end,
    "d_prime_min": trace.d_prime_min,
}))
"""


def run_backend(scenario, force_python):
    env = dict(os.environ)
    if force_python:
        env["PLATOONSIM_FORCE_PYTHON"] = "1"
    else:
        env.pop("PLATOONSIM_FORCE_PYTHON", None)
    out = subprocess.run(
        [sys.executable, "-c", _WORKER, scenario],
        env=env,
        check=True,
        capture_output=True,
        text=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    scenario = sys.argv[1] if len(sys.argv) > 1 else DEFAULT_SCENARIO
    results = [run_backend(scenario, force_python=False), run_backend(scenario, force_python=True)]
    for res in results:
        print(
            f"{res['backend']:>9}: {res['seconds']:8.3f} s "
            f"({res['k_prime_end']} steps, d_prime_min={res['d_prime_min']:.4f})"
        )
    if results[0]["backend"] == results[1]["backend"]:
        print("note: compiled extension unavailable, both runs used the fallback")
    else:
        assert results[0]["k_prime_end"] == results[1]["k_prime_end"], "backend step mismatch"
        assert abs(results[0]["d_prime_min"] - results[1]["d_prime_min"]) < 1e-8
        speedup = results[1]["seconds"] / results[0]["seconds"]
        print(f"speedup: {speedup:.1f}x")


if __name__ == "__main__":
    main()
