"""Sample an AggreFact-format benchmark and run it through a completion backend.

Needs FACTGATE_API_KEY and FACTGATE_API_URL (or --api-url) for the remote
backend.  Responses are cached, so an interrupted run resumes where it stopped.

    python3 scripts/run_aggrefact.py --data aggre_fact_final.csv --model-id my-model --n 70
"""

import argparse
import sys
from pathlib import Path

from factgate import cli


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--data", type=Path, required=True)
    ap.add_argument("--out", type=Path, default=Path("runs/aggrefact"))
    ap.add_argument("--backend", choices=("remote", "heuristic"), default="remote")
    ap.add_argument("--model-id")
    ap.add_argument("--api-url")
    ap.add_argument("--facts", type=Path, help="manually written facts (JSONL); extracted otherwise")
    ap.add_argument("--n", type=int, default=70)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--concurrency", type=int, default=4)
    args = ap.parse_args()

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    g = ["--backend", args.backend, "--seed", str(args.seed), "--cache", str(out / "cache.jsonl"),
         "--concurrency", str(args.concurrency)]
    if args.model_id:
        g += ["--model-id", args.model_id]
    if args.api_url:
        g += ["--api-url", args.api_url]

    facts = out / "facts.jsonl"
    if args.facts:
        facts.write_bytes(args.facts.read_bytes())
    sampled = out / "sample.csv"
    steps = [
        ["sample", "--data", args.data, "--out", sampled, "--sample-n", args.n, "--stratify"],
        ["extract-facts", "--data", sampled, "--facts", facts],
        ["score", "--data", sampled, "--facts", facts, "--scores", out / "scores.jsonl"],
        ["train", "--scores", out / "scores.jsonl", "--model", out / "model.json"],
        ["evaluate", "--scores", out / "scores.jsonl", "--model", out / "model.json", "--out", out / "report.json"],
        ["diagnose", "--scores", out / "scores.jsonl", "--out", out / "diagnostics.json"],
    ]
    for step in steps:
        rc = cli.main([str(a) for a in step] + g)
        if rc != 0:
            sys.exit(rc)
    print((out / "report.json").read_text())


if __name__ == "__main__":
    main()
