"""Command-line front end: single runs, gain sweeps, Monte-Carlo campaigns,
and oracle-backed validation.

All outputs are plain CSV/JSON written under ``--out``; every source of
randomness is an explicit seed, so rerunning any command with identical
inputs reproduces its output files byte for byte.

Exit codes: 0 success, 1 malformed scenario, 2 collision, 3 step
resolution failure, 4 validation bound violation.
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace
from multiprocessing import Pool

from . import oracle as oracle_mod
from .comms import LossModel, derive_seed
from .errors import PlatoonSimError
from .model import assemble
from .scenario import ScenarioError, load_scenario
from .simulator import Engine, summary_dict, write_summary_json, write_trace_csv
from .stepper import StepRule

EXIT_OK = 0
EXIT_BAD_SCENARIO = 1
EXIT_COLLISION = 2
EXIT_RESOLUTION = 3
EXIT_BOUND_VIOLATION = 4

_REASON_EXIT = {
    "reached_t_end": EXIT_OK,
    "standstill": EXIT_OK,
    "collision": EXIT_COLLISION,
    "resolution_error": EXIT_RESOLUTION,
}


@dataclass(frozen=True)
class SweepSpec:
    config: object
    kp_values: tuple
    kd_values: tuple
    rules: tuple


@dataclass(frozen=True)
class CampaignSpec:
    config: object
    runs: int
    base_seed: int
    settings: tuple
    bin_width: float


def _fmt(x):
    return repr(float(x))


def _grid(text, what):
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise ScenarioError(what, f"expected start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise ScenarioError(what, f"bad range {text!r}")
    count = int(round((stop - start) / step)) + 1
    return tuple(round(start + i * step, 10) for i in range(count))


def _load(args, rule_choices=("theorem1", "theorem2")):
    config = load_scenario(args.scenario)
    rule = config.rule
    if getattr(args, "rule", None) and args.rule in rule_choices:
        rule = replace(rule, kind=args.rule)
    if getattr(args, "alpha", None) is not None:
        rule = replace(rule, alpha=args.alpha)
    if getattr(args, "nbar", None) is not None:
        rule = replace(rule, n_bar=args.nbar)
    config = replace(config, rule=rule)
    if getattr(args, "seed", None) is not None:
        if config.loss.kind != "bernoulli":
            raise ScenarioError("loss.seed", "--seed applies only to bernoulli loss models")
        config = replace(config, loss=replace(config.loss, seed=args.seed))
    return config


def _outdir(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


# ---------------------------------------------------------------- simulate

def cmd_simulate(args):
    config = _load(args)
    out = _outdir(args)
    eng = Engine(config.params, config.brake, config.rule, config.t_end)
    trace = eng.run(config.loss)
    trace_path = os.path.join(out, "trace.csv")
    summary_path = os.path.join(out, "summary.json")
    write_trace_csv(trace, trace_path)
    write_summary_json(trace, summary_path)
    print(
        f"d_prime_min={trace.d_prime_min:.6f} k_prime_end={trace.k_prime_end} "
        f"stop_reason={trace.stop_reason}"
    )
    print(f"wrote {trace_path} and {summary_path}")
    return _REASON_EXIT[trace.stop_reason]


# ------------------------------------------------------------------- sweep

_SWEEP_CTX = None


def _sweep_init(spec):
    global _SWEEP_CTX
    _SWEEP_CTX = spec


def _sweep_cell(cell):
    kp, kd = cell
    spec = _SWEEP_CTX
    config = spec.config
    params = replace(config.params, k_p=kp, k_d=kd)
    mats = assemble(params, require_positive_mu=False)
    results = []
    for kind in spec.rules:
        eng = Engine(params, config.brake, replace(config.rule, kind=kind), config.t_end, mats=mats)
        tr = eng.run(config.loss)
        results.append((tr.d_prime_min, tr.k_prime_end, tr.stop_reason))
    return kp, kd, results


def sweep_rows(spec, threads=1):
    """Run the grid and return (header, rows) with deterministic ordering."""
    cells = [(kp, kd) for kp in spec.kp_values for kd in spec.kd_values]
    if threads > 1 and len(cells) > 1:
        with Pool(threads, initializer=_sweep_init, initargs=(spec,)) as pool:
            results = pool.map(_sweep_cell, cells, chunksize=max(1, len(cells) // (threads * 4)))
    else:
        _sweep_init(spec)
        results = [_sweep_cell(c) for c in cells]
    if len(spec.rules) == 1:
        header = ["k_p", "k_d", "d_prime_min", "k_prime_end", "stop_reason"]
    else:
        header = ["k_p", "k_d"]
        for kind in spec.rules:
            header += [f"d_prime_min_{kind}", f"k_prime_end_{kind}", f"stop_reason_{kind}"]
    rows = []
    for kp, kd, per_rule in results:
        row = [_fmt(kp), _fmt(kd)]
        for d, k_end, reason in per_rule:
            row += [_fmt(d), str(k_end), reason]
        rows.append(row)
    return header, rows


def cmd_sweep(args):
    config = _load(args, rule_choices=("theorem1", "theorem2"))
    rules = ("theorem1", "theorem2") if args.rule in (None, "both") else (args.rule,)
    spec = SweepSpec(
        config=config,
        kp_values=_grid(args.kp_range, "--kp-range"),
        kd_values=_grid(args.kd_range, "--kd-range"),
        rules=rules,
    )
    header, rows = sweep_rows(spec, threads=args.threads)
    out = _outdir(args)
    path = os.path.join(out, "sweep.csv")
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    print(f"wrote {path} ({len(rows)} grid points)")
    return EXIT_OK


# -------------------------------------------------------------- montecarlo

_MC_CTX = None


def _mc_init(config, kp, kd, base_seed):
    global _MC_CTX
    params = replace(config.params, k_p=kp, k_d=kd)
    engine = Engine(params, config.brake, config.rule, config.t_end)
    _MC_CTX = (engine, config.loss.p, base_seed)


def _mc_run(r):
    engine, p, base_seed = _MC_CTX
    loss = LossModel(kind="bernoulli", p=p, seed=derive_seed(base_seed, r))
    tr = engine.run(loss)
    return r, tr.d_prime_min, tr.k_prime_end, tr.stop_reason


def campaign_results(spec, kp, kd, threads=1):
    """All per-run results for one (k_p, k_d) setting, ordered by run index."""
    runs = range(spec.runs)
    if threads > 1 and spec.runs > 1:
        with Pool(threads, initializer=_mc_init, initargs=(spec.config, kp, kd, spec.base_seed)) as pool:
            results = pool.map(_mc_run, runs, chunksize=max(1, spec.runs // (threads * 8)))
    else:
        _mc_init(spec.config, kp, kd, spec.base_seed)
        results = [_mc_run(r) for r in runs]
    return results


def histogram(values, width):
    """Fixed-width binning from 0; returns (bin_lo, bin_hi, count) rows."""
    if not values:
        return []
    nbins = int(max(values) // width) + 1
    counts = [0] * nbins
    for v in values:
        counts[min(int(v // width), nbins - 1)] += 1
    return [(i * width, (i + 1) * width, counts[i]) for i in range(nbins)]


def cmd_montecarlo(args):
    config = _load(args)
    if config.loss.kind != "bernoulli":
        raise ScenarioError("loss.kind", "montecarlo requires a bernoulli loss model")
    settings = []
    for text in args.setting or []:
        try:
            kp, kd = (float(v) for v in text.split(","))
        except ValueError:
            raise ScenarioError("--setting", f"expected kp,kd got {text!r}") from None
        settings.append((kp, kd))
    if not settings:
        settings = [(config.params.k_p, config.params.k_d)]
    base_seed = args.seed if args.seed is not None else config.loss.seed
    spec = CampaignSpec(
        config=config,
        runs=args.runs,
        base_seed=base_seed,
        settings=tuple(settings),
        bin_width=args.bin_width,
    )
    out = _outdir(args)
    for kp, kd in spec.settings:
        results = campaign_results(spec, kp, kd, threads=args.threads)
        tag = f"kp{kp:g}_kd{kd:g}"
        runs_path = os.path.join(out, f"runs_{tag}.csv")
        with open(runs_path, "w", newline="\n") as fh:
            fh.write("run,seed,d_prime_min,k_prime_end,stop_reason\n")
            for r, d, k_end, reason in results:
                fh.write(f"{r},{derive_seed(spec.base_seed, r)},{_fmt(d)},{k_end},{reason}\n")
        hist_path = os.path.join(out, f"hist_{tag}.csv")
        with open(hist_path, "w", newline="\n") as fh:
            fh.write("bin_lo,bin_hi,count\n")
            for lo, hi, count in histogram([d for _, d, _, _ in results], spec.bin_width):
                fh.write(f"{_fmt(lo)},{_fmt(hi)},{count}\n")
        collisions = sum(1 for _, _, _, reason in results if reason == "collision")
        print(f"setting k_p={kp:g} k_d={kd:g}: {spec.runs} runs, {collisions} collisions")
        print(f"wrote {runs_path} and {hist_path}")
    return EXIT_OK


# ---------------------------------------------------------------- validate

def cmd_validate(args):
    config = _load(args)
    if args.inflate_steps != 1.0:
        config = replace(config, rule=replace(config.rule, inflate=args.inflate_steps))
    ocfg = oracle_mod.OracleConfig(substeps_per_interval=args.substeps, integrator=args.integrator)
    eng = Engine(config.params, config.brake, config.rule, config.t_end)
    trace = eng.run(config.loss, keep_states=True)
    report = oracle_mod.certify(config, trace, ocfg)
    out = _outdir(args)
    path = os.path.join(out, "validation.json")
    doc = {
        "passed": report.passed,
        "sound": report.sound,
        "alpha": report.alpha,
        "max_deviation": report.max_deviation,
        "oracle_d_min": report.oracle_d_min,
        "intervals": int(report.per_interval.size),
        "violations": int((report.per_interval > report.alpha).sum()),
        "certified_interval": [report.interval.lo, report.interval.hi],
        "certificate_void": report.interval.void,
        "d_prime_min": trace.d_prime_min,
        "stop_reason": trace.stop_reason,
        "substeps": ocfg.substeps_per_interval,
        "integrator": ocfg.integrator,
        "rule": config.rule.kind,
        "inflate": config.rule.inflate,
    }
    with open(path, "w", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(
        f"max_deviation={report.max_deviation:.6e} alpha={report.alpha} "
        f"passed={report.passed} sound={report.sound}"
    )
    print(f"wrote {path}")
    if not (report.passed and report.sound):
        return EXIT_BOUND_VIOLATION
    return EXIT_OK


# -------------------------------------------------------------------- main

def _add_common(sp, rule_choices=("theorem1", "theorem2")):
    sp.add_argument("scenario", help="path to scenario JSON")
    sp.add_argument("--rule", choices=list(rule_choices), default=None)
    sp.add_argument("--alpha", type=float, default=None, help="certified bound in meters")
    sp.add_argument("--nbar", type=int, default=None, help="grid ticks per communication interval")
    sp.add_argument("--seed", type=int, default=None, help="64-bit seed override")
    sp.add_argument("--out", default=".", help="output directory")
    sp.add_argument("--threads", type=int, default=os.cpu_count() or 1)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="platoonsim",
        description="Platoon braking simulator with certified distance bounds",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="run one scenario")
    _add_common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="gain-grid sweep")
    _add_common(sp, rule_choices=("theorem1", "theorem2", "both"))
    sp.add_argument("--kp-range", default="0.2:0.5:0.05", help="start:stop:step")
    sp.add_argument("--kd-range", default="0.2:1.3:0.05", help="start:stop:step")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("montecarlo", help="seeded campaign over loss realizations")
    _add_common(sp)
    sp.add_argument("--runs", type=int, required=True)
    sp.add_argument("--setting", action="append", help="kp,kd pair; repeatable")
    sp.add_argument("--bin-width", type=float, default=0.5)
    sp.set_defaults(func=cmd_montecarlo)

    sp = sub.add_parser("validate", help="re-check a run against the fine oracle")
    _add_common(sp)
    sp.add_argument("--substeps", type=int, default=1000)
    sp.add_argument("--integrator", choices=("dense_expm", "rk4"), default="dense_expm")
    sp.add_argument(
        "--inflate-steps",
        type=float,
        default=1.0,
        help="scale raw steps (negative-control hook; breaks the certificate)",
    )
    sp.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_BAD_SCENARIO
    except PlatoonSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_SCENARIO


if __name__ == "__main__":
    sys.exit(main())
