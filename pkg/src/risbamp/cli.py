"""Command-line driver: `risbamp run|sweep|selftest`.

`run` executes the Monte Carlo trials of a single configuration, `sweep`
varies one axis over a value list, `selftest` runs the oracle suite. Exit
code 0 on success; 2 when --strict is set and any trial diverged.
"""

import argparse
import csv
import json
import math
import os
import sys

from .bamp import BampConfig
from .harness import (
    ExperimentSpec,
    default_priors,
    emit,
    monte_carlo,
    run_trial,
    spec_from_dict,
)
from .model import GenConfig, SystemDims, with_overrides

DESK_DIMS = dict(M=16, K=48, N=24, T=64, T_p=20, K_p=12)


def default_spec():
    gen = GenConfig(dims=SystemDims(**DESK_DIMS))
    eng = BampConfig(priors=default_priors(gen))
    return ExperimentSpec(gen=gen, engine=eng, sweep_axis="snr_db",
                          sweep_values=(gen.snr_db,), n_trials=10, base_seed=0)


def load_spec(path):
    with open(path) as fh:
        return spec_from_dict(json.load(fh))


def _parse_values(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _apply_overrides(spec, args):
    import dataclasses

    gen, eng = spec.gen, spec.engine
    if args.scheme:
        eng = dataclasses.replace(eng, scheme=args.scheme)
    if args.damping is not None:
        eng = dataclasses.replace(eng, damping=args.damping)
    if args.snr is not None and args.command == "run":
        gen = with_overrides(gen, snr_db=args.snr[0])
    if not eng.priors:
        eng = dataclasses.replace(eng, priors=default_priors(gen))
    values = spec.sweep_values
    axis = spec.sweep_axis
    if args.command == "run":
        axis, values = "snr_db", (gen.snr_db,)
    elif args.command == "sweep":
        axis = args.axis
        if args.snr is not None and axis == "snr_db":
            values = args.snr
        elif args.values is not None:
            values = args.values
    return ExperimentSpec(
        gen=gen,
        engine=eng,
        sweep_axis=axis,
        sweep_values=values,
        n_trials=args.trials if args.trials else spec.n_trials,
        base_seed=args.seed if args.seed is not None else spec.base_seed,
    )


def _run_experiment(spec, args):
    out_dir = args.out or "."
    result = monte_carlo(spec, trial_fn=run_trial)
    csv_path, json_path = emit(result, out_dir, spec=spec)
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")
    if args.trace:
        trace_path = os.path.join(out_dir, f"trace_seed{spec.base_seed}.csv")
        with open(trace_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("iter", "layer", "residual", "nmse_x", "nmse_b", "nmse_r"))
            run_trial(spec, spec.base_seed, trace_writer=w)
        print(f"wrote {trace_path}")
    for p in result.points:
        print(
            f"{spec.sweep_axis}={p.sweep_value:g}: "
            f"nmse b/r/x = {p.mean_nmse_b_db:.2f}/{p.mean_nmse_r_db:.2f}/"
            f"{p.mean_nmse_x_db:.2f} dB, divergence {p.divergence_rate:.1%}"
        )
    diverged = any(p.divergence_rate > 0 for p in result.points)
    if args.strict and diverged:
        return 2
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(prog="risbamp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON experiment spec")
        p.add_argument("--snr", type=_parse_values, help="comma list of SNR dB values")
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--scheme", choices=("bamp", "butamp"))
        p.add_argument("--damping", type=float)
        p.add_argument("--out", help="output directory")
        p.add_argument("--trace", action="store_true",
                       help="dump per-iteration diagnostics for the first seed")
        p.add_argument("--strict", action="store_true",
                       help="exit 2 when any trial diverged")
        if name == "sweep":
            p.add_argument("--axis", default="snr_db",
                           choices=("snr_db", "T_p", "K_p", "N", "damping"))
            p.add_argument("--values", type=_parse_values,
                           help="comma list of sweep values")
    sub.add_parser("selftest")
    args = parser.parse_args(argv)

    if args.command == "selftest":
        from .selftest import run_selftest

        results = run_selftest()
        return 0 if all(r.passed for r in results) else 1

    spec = load_spec(args.config) if args.config else default_spec()
    spec = _apply_overrides(spec, args)
    return _run_experiment(spec, args)


if __name__ == "__main__":
    sys.exit(main())
