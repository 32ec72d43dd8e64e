import json

import pytest

from factgate import cli, pipeline
from factgate.backend import HeuristicBackend, make_backend
from factgate.dataset import write_benchmark
from factgate.errors import FactgateError, SingleClassTraining
from factgate.facts import load_manual_facts
from factgate.pipeline import RunConfig
from factgate.synthetic import SyntheticSpec, generate


@pytest.fixture
def corpus(tmp_path):
    config = RunConfig()
    bench, facts = pipeline.cmd_generate(config, SyntheticSpec(10, 10, seed=4), tmp_path)
    return tmp_path, bench, facts


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_extract_three_records_then_noop(tmp_path):
    records, _ = generate(SyntheticSpec(2, 1, seed=0))
    write_benchmark(records, tmp_path / "b.csv")
    facts = tmp_path / "f.jsonl"
    assert run("extract-facts", "--data", tmp_path / "b.csv", "--facts", facts) == 0
    lines = facts.read_text().splitlines()
    assert len(lines) == 3
    assert all(json.loads(ln)["provenance"] == "backend" for ln in lines)
    before = facts.read_bytes()
    assert run("extract-facts", "--data", tmp_path / "b.csv", "--facts", facts) == 0
    assert facts.read_bytes() == before


def test_extract_keeps_manual_facts(corpus):
    _, bench, facts = corpus
    before = facts.read_bytes()
    assert run("extract-facts", "--data", bench, "--facts", facts) == 0
    assert facts.read_bytes() == before


def test_missing_data_file_fails(tmp_path, capsys):
    assert run("extract-facts", "--data", tmp_path / "nope.csv", "--facts", tmp_path / "f.jsonl") != 0
    assert "not found" in capsys.readouterr().err


def _score(tmp_path, bench, facts, cache):
    backend = make_backend("heuristic", cache_path=cache)
    config = RunConfig(data_path=bench, facts_path=facts, scores_path=tmp_path / "scores.jsonl")
    pipeline.cmd_score(config, backend)
    return backend


def test_query_count_resume_and_warm_cache(corpus):
    tmp_path, bench, facts = corpus
    docs = load_manual_facts(facts)
    expected = sum(len(d.summary.facts) * len(d.source.facts) * 8 for d in docs)
    distinct = len({(s, t) for d in docs for s in d.summary.texts for t in d.source.texts}) * 8
    cache = tmp_path / "cache.jsonl"

    raw = HeuristicBackend()
    pipeline.cmd_score(RunConfig(data_path=bench, facts_path=facts, scores_path=tmp_path / "raw.jsonl"), raw)
    assert raw.calls == expected
    cold = _score(tmp_path, bench, facts, cache)
    # repeated (summary fact, source fact) pairs are answered from the cache
    assert cold.inner.calls == distinct
    scores = (tmp_path / "scores.jsonl").read_bytes()

    warm = _score(tmp_path, bench, facts, cache)
    assert warm.inner.calls == 0
    assert (tmp_path / "scores.jsonl").read_bytes() == scores

    # simulate an interrupted run: drop the last 10 cache entries and a half-written line
    lines = cache.read_text().splitlines()
    cache.write_text("\n".join(lines[:-10]) + "\n" + lines[-10][: len(lines[-10]) // 2])
    resumed = _score(tmp_path, bench, facts, cache)
    assert resumed.inner.calls == 10
    assert (tmp_path / "scores.jsonl").read_bytes() == scores


def test_score_lines_shape(corpus):
    tmp_path, bench, facts = corpus
    _score(tmp_path, bench, facts, None)
    lines = pipeline.load_scores(tmp_path / "scores.jsonl")
    first = lines[0]
    assert set(first["features"]) == {"prede", "ente", "circe", "corefe", "linke", "oute", "grame", "supported"}
    assert len(first["pairs"][0]) == 8


def _scored(corpus):
    tmp_path, bench, facts = corpus
    _score(tmp_path, bench, facts, None)
    return pipeline.load_scores(tmp_path / "scores.jsonl")


def test_training_ignores_test_cut(corpus):
    lines = _scored(corpus)
    base = pipeline.train_from_scores(lines).to_dict()
    poisoned = []
    for ln in lines:
        if ln["cut"] == "test":
            ln = {**ln, "label": 1 - ln["label"], "features": {k: 0.5 for k in ln["features"]}}
        poisoned.append(ln)
    assert pipeline.train_from_scores(poisoned).to_dict() == base


def test_training_without_val_fails(corpus):
    lines = [ln for ln in _scored(corpus) if ln["cut"] == "test"]
    with pytest.raises(SingleClassTraining):
        pipeline.train_from_scores(lines)


def test_constant_score_auc_half():
    rows = [("D", c, y, 0.4) for c in ("val", "test") for y in (0, 1, 0, 1)]
    report = pipeline.evaluate_verdicts(rows, "accuracy")
    assert report.auc == 0.5


def test_per_dataset_metrics():
    rows = [
        ("A", "val", 1, 0.9), ("A", "val", 0, 0.1), ("A", "test", 1, 0.8), ("A", "test", 0, 0.2),
        ("B", "val", 1, 0.3), ("B", "val", 0, 0.2), ("B", "test", 1, 0.35), ("B", "test", 0, 0.1),
        ("C", "test", 1, 0.7),
    ]
    report = pipeline.evaluate_verdicts(rows, "accuracy")
    assert set(report.per_dataset) == {"A", "B", "C"}
    assert report.per_dataset["B"].threshold == pytest.approx(0.25)
    assert report.per_dataset["C"].auc is None
    assert report.per_dataset["C"].threshold == report.threshold
    d = report.to_dict()
    assert d["per_dataset"]["C"]["auc"] is None


def test_diagnose_duplicate_feature_correlation():
    lines = []
    for i, v in enumerate([0.1, 0.5, 0.3, 0.9, 0.7]):
        feats = {k: 0.2 + 0.1 * ((i * (j + 1)) % 5) for j, k in enumerate(
            ["prede", "ente", "circe", "corefe", "linke", "oute", "grame", "supported"])}
        feats["prede"] = feats["circe"] = v
        lines.append({"features": feats})
    diag = pipeline.diagnose(lines, 3)
    assert diag["correlation"][0][2] == pytest.approx(1.0, abs=1e-12)
    assert len(diag["pca"]["ratios"]) == 3


def test_full_cli_pipeline(corpus):
    tmp_path, bench, facts = corpus
    common = ["--cache", tmp_path / "cache.jsonl", "--seed", 4]
    assert run("score", "--data", bench, "--facts", facts, "--scores", tmp_path / "s.jsonl", *common) == 0
    assert run("train", "--scores", tmp_path / "s.jsonl", "--model", tmp_path / "m.json") == 0
    assert run("evaluate", "--scores", tmp_path / "s.jsonl", "--model", tmp_path / "m.json",
               "--out", tmp_path / "r.json") == 0
    assert run("predict", "--scores", tmp_path / "s.jsonl", "--model", tmp_path / "m.json",
               "--out", tmp_path / "p.jsonl") == 0
    assert run("diagnose", "--scores", tmp_path / "s.jsonl", "--out", tmp_path / "d.json") == 0
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["auc"] >= 0.9
    preds = (tmp_path / "p.jsonl").read_text().splitlines()
    assert len(preds) == 20


def test_bernoulli_train_flag(corpus):
    tmp_path, bench, facts = corpus
    _score(tmp_path, bench, facts, None)
    assert run("train", "--nb", "bernoulli", "--scores", tmp_path / "scores.jsonl",
               "--model", tmp_path / "m.json") == 0
    assert json.loads((tmp_path / "m.json").read_text())["kind"] == "bernoulli"


def test_toml_config_flags_override(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text(
        'backend = "heuristic"\nseed = 7\nthreshold_objective = "balanced_accuracy"\n'
        'scores_path = "a.jsonl"\n[sample]\nn = 5\nseed = 7\n'
    )
    config = RunConfig.from_toml(cfg)
    assert config.seed == 7 and config.sample.n == 5
    assert str(config.scores_path) == "a.jsonl"
    args = cli.build_parser().parse_args(["--config", str(cfg), "train", "--scores", "b.jsonl", "--seed", "9"])
    config = cli.config_from_args(args)
    assert str(config.scores_path) == "b.jsonl"
    assert config.seed == 9 and config.sample.seed == 9
    assert config.threshold_objective == "balanced_accuracy"


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("colour = 'blue'\n")
    with pytest.raises(ValueError, match="unknown config"):
        RunConfig.from_toml(cfg)


def test_sample_command(corpus, tmp_path):
    _, bench, _ = corpus
    out = tmp_path / "s.csv"
    assert run("sample", "--data", bench, "--out", out, "--sample-n", 5, "--seed", 1) == 0
    assert len(out.read_text().splitlines()) == 6


def test_no_path_configured():
    with pytest.raises(FactgateError):
        pipeline.cmd_train(RunConfig())
