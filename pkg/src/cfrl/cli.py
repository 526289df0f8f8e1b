"""Command line front end.

Subcommands cover the pipeline stages: ``mine`` candidate rules from a CSV,
``fit`` a rule list by annealing search, ``gibbs`` a fitted list's posterior
by sampling, ``recovery`` for the planted-recovery study, and ``rerun`` to
replay a recorded run and confirm its outputs reproduce byte for byte.

Every run writes a manifest.json recording the arguments, the package
version, and sha256 digests of all inputs and outputs. Exit codes: 0 on
success, 2 for configuration problems, 3 for input problems, 4 for numerical
failures.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from ._util import file_digest, named_rng, write_csv, write_json
from .anneal import AnnealConfig, ModelScorer, anneal
from .errors import ConfigError, InputError, NumericalError
from .gibbs import run_gibbs, trace_effect_summary
from .ingest import ingest, load_ingest_config
from .mining import RulePool, mine_rules
from .model import Hyperparameters, SubgroupStats
from .recovery import RecoveryConfig, run_recovery_study
from .rulelist import RuleList, subgroup_counts


def _load_dataset(args):
    config = load_ingest_config(args.spec)
    dataset, names, n_dropped = ingest(args.data, config)
    return dataset, names, n_dropped


def _manifest(args, command, inputs, outputs, started, extra=None):
    doc = {
        "command": command,
        "argv": list(args.argv),
        "version": __version__,
        "seed": getattr(args, "seed", None),
        "inputs": {os.path.abspath(p): file_digest(p) for p in inputs},
        "outputs": {os.path.abspath(p): file_digest(p) for p in outputs},
        "elapsed_seconds": round(time.monotonic() - started, 3),
    }
    if extra:
        doc.update(extra)
    path = os.path.join(args.out_dir, "manifest.json")
    write_json(path, doc)
    return path


def cmd_mine(args):
    started = time.monotonic()
    dataset, names, n_dropped = _load_dataset(args)
    pool = mine_rules(dataset.rule_features, names, args.min_support, args.max_clauses)
    os.makedirs(args.out_dir, exist_ok=True)
    pool_path = os.path.join(args.out_dir, "pool.json")
    pool.save(pool_path)
    _manifest(args, "mine", [args.data, args.spec], [pool_path], started,
              extra={"n_rows": dataset.n_rows, "n_dropped": n_dropped,
                     "n_features": len(names), "n_rules": len(pool)})
    print(f"rows kept {dataset.n_rows} (dropped {n_dropped}), "
          f"features {len(names)}, rules mined {len(pool)}")
    print(f"wrote {pool_path}")
    return 0


def _fit_report(scorer, rule_list, pool, names):
    post, trace = scorer.fit(rule_list)
    counts = subgroup_counts(rule_list, scorer.dataset.rule_features)
    z = scorer.assign(rule_list)
    treated = np.bincount(z - 1, weights=scorer.dataset.t, minlength=rule_list.n_blocks)
    blocks = []
    for l, rule in enumerate(rule_list.blocks()):
        blocks.append({
            "position": l + 1,
            "clauses": list(rule.clauses),
            "rule": rule.describe(names),
            "n_rows": int(counts[l]),
            "n_treated": int(treated[l]),
            "effect_mean": float(post.effect_mean[l]),
            "effect_sd": float(post.effect_sd[l]),
        })
    return post, {
        "score": trace.final,
        "n_sweeps": trace.n_sweeps,
        "converged": bool(trace.converged),
        "blocks": blocks,
        "rule_list": rule_list.to_json(),
    }


def cmd_fit(args):
    started = time.monotonic()
    dataset, names, _ = _load_dataset(args)
    pool = RulePool.load(args.pool)
    if tuple(pool.feature_names) != tuple(names):
        raise ConfigError("pool was mined against a different feature vocabulary")
    rng = named_rng(args.seed, "fit")
    scorer = ModelScorer(dataset)
    config = AnnealConfig(n_steps=args.steps, temperature=args.temperature,
                          init_length=args.init_length)
    result = anneal(scorer, list(pool), config, rng)

    os.makedirs(args.out_dir, exist_ok=True)
    _, report = _fit_report(scorer, result.best, pool, names)
    report["n_scored"] = result.n_scored
    model_path = os.path.join(args.out_dir, "model.json")
    write_json(model_path, report)
    trace_path = os.path.join(args.out_dir, "search_trace.csv")
    header, rows = result.trace_rows()
    write_csv(trace_path, header, rows)
    _manifest(args, "fit", [args.data, args.spec, args.pool],
              [model_path, trace_path], started)
    print(f"best score {result.best_score:.3f} with {result.best.n_rules} rules "
          f"({result.n_scored} lists fitted)")
    for block in report["blocks"]:
        print(f"  {block['position']}. {block['rule']}: "
              f"effect {block['effect_mean']:+.2f} (sd {block['effect_sd']:.2f}), "
              f"n={block['n_rows']}")
    print(f"wrote {model_path}")
    return 0


def cmd_gibbs(args):
    started = time.monotonic()
    dataset, names, _ = _load_dataset(args)
    with open(args.model, "r", encoding="utf-8") as f:
        model_doc = json.load(f)
    rule_list = RuleList.from_json(model_doc["rule_list"])
    z_stats = SubgroupStats.from_data(
        ModelScorer(dataset).assign(rule_list), dataset.confounders,
        dataset.t, dataset.y, rule_list.n_blocks,
    )
    hyper = Hyperparameters.from_outcomes(dataset.y)
    rng = named_rng(args.seed, "gibbs")
    trace = run_gibbs(z_stats, hyper, args.gibbs_steps, rng, burn_in=args.burn_in)

    os.makedirs(args.out_dir, exist_ok=True)
    trace_path = os.path.join(args.out_dir, "gibbs_trace.csv")
    trace.to_csv(trace_path)
    summary = trace_effect_summary(trace)
    summary_path = os.path.join(args.out_dir, "gibbs_summary.json")
    write_json(summary_path, {
        "n_steps": trace.n_steps,
        "burn_in": trace.burn_in,
        "n_kept": trace.n_kept,
        "effect_mean": [float(v) for v in summary["effect_mean"]],
        "effect_sd": [float(v) for v in summary["effect_sd"]],
    })
    _manifest(args, "gibbs", [args.data, args.spec, args.model],
              [trace_path, summary_path], started)
    print(f"kept {trace.n_kept} of {trace.n_steps} sweeps (burn-in {trace.burn_in})")
    print(f"wrote {trace_path}")
    return 0


def cmd_recovery(args):
    started = time.monotonic()
    sizes = tuple(int(s) for s in args.sizes.split(","))
    config = RecoveryConfig(
        sizes=sizes, n_replicates=args.replicates, n_steps=args.steps,
        temperature=args.temperature, init_length=args.init_length,
    )
    result = run_recovery_study(config, args.seed)

    os.makedirs(args.out_dir, exist_ok=True)
    json_path = os.path.join(args.out_dir, "recovery.json")
    write_json(json_path, result.to_json())
    csv_path = os.path.join(args.out_dir, "recovery.csv")
    rows = [
        [n, rep, int(result.distances[n][rep])]
        for n in result.sizes for rep in range(config.n_replicates)
    ]
    write_csv(csv_path, ["size", "replicate", "edit_distance"], rows)
    _manifest(args, "recovery", [], [json_path, csv_path], started)
    for n, mean in zip(result.sizes, result.mean_distance):
        print(f"n={n}: mean edit distance {mean:.2f}")
    print(f"wrote {json_path}")
    return 0


def cmd_rerun(args):
    with open(args.manifest, "r", encoding="utf-8") as f:
        doc = json.load(f)
    argv = doc["argv"]
    print(f"replaying: {' '.join(argv)}")
    code = main(argv)
    if code != 0:
        return code
    stale = []
    for path, digest in doc["outputs"].items():
        if not os.path.exists(path) or file_digest(path) != digest:
            stale.append(path)
    if stale:
        for path in stale:
            print(f"output changed: {path}", file=sys.stderr)
        return 1
    print(f"all {len(doc['outputs'])} outputs reproduced byte for byte")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cfrl",
        description="Falling-effect rule lists: mine, search, sample, study.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    mine = sub.add_parser("mine", help="mine candidate rules from a CSV")
    mine.add_argument("--data", required=True, help="input CSV")
    mine.add_argument("--spec", required=True, help="ingestion config JSON")
    mine.add_argument("--min-support", type=float, default=0.05)
    mine.add_argument("--max-clauses", type=int, default=2)
    mine.add_argument("--out-dir", required=True)
    mine.add_argument("--seed", type=int, default=0)
    mine.set_defaults(func=cmd_mine)

    fit = sub.add_parser("fit", help="search for the best rule list")
    fit.add_argument("--data", required=True)
    fit.add_argument("--spec", required=True)
    fit.add_argument("--pool", required=True, help="pool.json from mine")
    fit.add_argument("--steps", type=int, default=5000)
    fit.add_argument("--temperature", type=float, default=1.0)
    fit.add_argument("--init-length", type=int, default=3)
    fit.add_argument("--out-dir", required=True)
    fit.add_argument("--seed", type=int, default=0)
    fit.set_defaults(func=cmd_fit)

    gibbs = sub.add_parser("gibbs", help="sample the posterior of a fitted list")
    gibbs.add_argument("--data", required=True)
    gibbs.add_argument("--spec", required=True)
    gibbs.add_argument("--model", required=True, help="model.json from fit")
    gibbs.add_argument("--gibbs-steps", type=int, default=7500)
    gibbs.add_argument("--burn-in", type=int, default=None)
    gibbs.add_argument("--out-dir", required=True)
    gibbs.add_argument("--seed", type=int, default=0)
    gibbs.set_defaults(func=cmd_gibbs)

    recovery = sub.add_parser("recovery", help="planted-list recovery study")
    recovery.add_argument("--sizes", default="500,2000,8000",
                          help="comma-separated sample sizes")
    recovery.add_argument("--replicates", type=int, default=10)
    recovery.add_argument("--steps", type=int, default=1500)
    recovery.add_argument("--temperature", type=float, default=1.0)
    recovery.add_argument("--init-length", type=int, default=0)
    recovery.add_argument("--out-dir", required=True)
    recovery.add_argument("--seed", type=int, default=0)
    recovery.set_defaults(func=cmd_recovery)

    rerun = sub.add_parser("rerun", help="replay a manifest and verify outputs")
    rerun.add_argument("manifest", help="manifest.json from a previous run")
    rerun.set_defaults(func=cmd_rerun)
    return parser


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = list(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
