"""``factgate`` command line.

    factgate generate      --out-dir DIR [--n-factual 20 --n-nonfactual 20]
    factgate sample        --data bench.csv --out sampled.csv --sample-n 70
    factgate extract-facts --data bench.csv --facts facts.jsonl
    factgate score         --data bench.csv --facts facts.jsonl --scores scores.jsonl
    factgate train         --scores scores.jsonl --model model.json
    factgate predict       --scores scores.jsonl --model model.json --out predictions.jsonl
    factgate evaluate      --scores scores.jsonl --model model.json --out report.json
    factgate diagnose      --scores scores.jsonl --out diagnostics.json

Global flags (--config, --backend, --cache, --seed, --concurrency, ...) are
accepted before or after the subcommand.  Flags override the TOML config.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import jsonschema

from . import pipeline
from .dataset import SamplePlan
from .errors import FactgateError
from .synthetic import PERTURBATIONS, SyntheticSpec

log = logging.getLogger("factgate")


def _global_flags() -> argparse.ArgumentParser:
    # SUPPRESS keeps a flag given before the subcommand from being reset by the subparser
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    S = argparse.SUPPRESS
    g.add_argument("--config", type=Path, default=S, help="TOML config file")
    g.add_argument("--backend", choices=("remote", "heuristic"), default=S)
    g.add_argument("--model-id", dest="model_id", default=S, help="backend model identifier")
    g.add_argument("--api-url", dest="api_url", default=S,
                   help="completion endpoint (default: $FACTGATE_API_URL)")
    g.add_argument("--cache", dest="cache_path", type=Path, default=S, help="JSONL response cache")
    g.add_argument("--seed", type=int, default=S)
    g.add_argument("--concurrency", dest="concurrency_limit", type=int, default=S)
    g.add_argument("-v", "--verbose", action="store_true", default=S)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(
        prog="factgate",
        description="Atomic-fact factual consistency scoring with Naive Bayes.",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    path_flags = {
        "data": ("--data", "data_path"),
        "facts": ("--facts", "facts_path"),
        "scores": ("--scores", "scores_path"),
        "model": ("--model", "model_path"),
        "out": ("--out", "out_path"),
    }

    def add(name, help_, *flags):
        sp = sub.add_parser(name, help=help_, parents=[common])
        for flag in flags:
            if flag == "sample":
                sp.add_argument("--sample-n", dest="sample_n", type=int, default=S,
                                help="draw this many records (seeded by --seed)")
                sp.add_argument("--stratify", action="store_true", default=S,
                                help="stratify the sample by label")
            else:
                opt, dest = path_flags[flag]
                sp.add_argument(opt, dest=dest, type=Path, default=S)
        return sp

    g = add("generate", "write a synthetic labeled corpus (bench.csv + facts.jsonl)")
    g.add_argument("--out-dir", type=Path, required=True)
    g.add_argument("--n-factual", type=int, default=20)
    g.add_argument("--n-nonfactual", type=int, default=20)
    g.add_argument("--perturbations", nargs="+", choices=PERTURBATIONS, default=list(PERTURBATIONS))

    add("sample", "write a seeded sample of a benchmark file", "data", "out", "sample")
    add("extract-facts", "decompose records into atomic facts via the backend", "data", "facts", "sample")
    add("score", "score every summary/source fact pair and aggregate features",
        "data", "facts", "scores", "sample")
    t = add("train", "fit Naive Bayes on the val cut of a scores file", "scores", "model")
    t.add_argument("--nb", choices=("gaussian", "bernoulli"), default=S)
    add("predict", "per-summary verdicts from a trained model", "scores", "model", "out")
    e = add("evaluate", "AUC/accuracy/F1/precision on the test cut", "scores", "model", "out")
    e.add_argument("--objective", dest="threshold_objective",
                   choices=("accuracy", "balanced_accuracy"), default=S)
    d = add("diagnose", "feature correlation matrix and PCA explained variance", "scores", "out")
    d.add_argument("--k", dest="pca_k", type=int, default=S)
    return parser


_CONFIG_KEYS = {
    "backend", "model_id", "api_url", "cache_path", "seed", "concurrency_limit", "data_path",
    "facts_path", "scores_path", "model_path", "out_path", "nb", "threshold_objective", "pca_k",
}


def config_from_args(args: argparse.Namespace) -> pipeline.RunConfig:
    ns = vars(args)
    overrides = {k: ns[k] for k in _CONFIG_KEYS if k in ns}
    if "config" in ns:
        config = pipeline.RunConfig.from_toml(ns["config"], **overrides)
    else:
        config = pipeline.RunConfig.from_mapping(overrides)

    seed = ns.get("seed", config.sample.seed if config.sample else config.seed)
    if "sample_n" in ns:
        config.sample = SamplePlan(ns["sample_n"], seed, bool(ns.get("stratify", False)))
    elif config.sample is not None and ("seed" in ns or "stratify" in ns):
        config.sample = SamplePlan(
            config.sample.n, seed, bool(ns.get("stratify", config.sample.stratify_by_label))
        )
    return config


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.captureWarnings(True)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = config_from_args(args)
        cmd = args.command
        if cmd == "generate":
            spec = SyntheticSpec(args.n_factual, args.n_nonfactual, config.seed, tuple(args.perturbations))
            outputs = pipeline.cmd_generate(config, spec, args.out_dir)
        elif cmd == "sample":
            outputs = pipeline.cmd_sample(config)
        elif cmd == "extract-facts":
            outputs = pipeline.cmd_extract_facts(config)
        elif cmd == "score":
            outputs = pipeline.cmd_score(config)
        elif cmd == "train":
            outputs = pipeline.cmd_train(config)
        elif cmd == "predict":
            outputs = pipeline.cmd_predict(config)
        elif cmd == "evaluate":
            outputs = pipeline.cmd_evaluate(config)
        elif cmd == "diagnose":
            outputs = pipeline.cmd_diagnose(config)
        else:  # pragma: no cover - argparse rejects unknown commands
            parser.error(f"unknown command {cmd}")
    except (FactgateError, ValueError, OSError, KeyError, jsonschema.ValidationError) as exc:
        print(f"factgate {args.command}: error: {exc}", file=sys.stderr)
        return 1
    for out in outputs if isinstance(outputs, tuple) else (outputs,):
        print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
