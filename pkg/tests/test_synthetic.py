import pytest
from hypothesis import given
from hypothesis import strategies as st

from factgate.backend import HeuristicBackend
from factgate.dataset import dumps_benchmark
from factgate.facts import dumps_facts
from factgate.rng import SplitMix64
from factgate.scoring import aggregate_all, score_pairs
from factgate.synthetic import (
    PLAYERS,
    TEAMS,
    SyntheticSpec,
    entity_swap,
    generate,
    predicate_negation,
)


def test_counts_and_balance():
    records, facts = generate(SyntheticSpec(5, 5, seed=3))
    assert len(records) == len(facts) == 10
    assert sum(r.label for r in records) == 5
    assert len({r.key for r in records}) == 10
    assert [f.doc_id for f in facts] == [r.key for r in records]


def test_cuts_balanced_within_class():
    records, _ = generate(SyntheticSpec(20, 20))
    for label in (0, 1):
        cuts = [r.cut for r in records if r.label == label]
        assert cuts.count("val") == cuts.count("test") == 10


@given(st.integers(0, 2**64 - 1))
def test_same_seed_byte_identical(seed):
    spec = SyntheticSpec(3, 3, seed=seed)
    a, fa = generate(spec)
    b, fb = generate(spec)
    assert dumps_benchmark(a, "csv") == dumps_benchmark(b, "csv")
    assert dumps_facts(fa) == dumps_facts(fb)


def test_different_seeds_differ():
    a, _ = generate(SyntheticSpec(3, 3, seed=1))
    b, _ = generate(SyntheticSpec(3, 3, seed=2))
    assert dumps_benchmark(a, "csv") != dumps_benchmark(b, "csv")


def test_factual_summaries_copy_source():
    records, facts = generate(SyntheticSpec(6, 1, seed=9))
    for r, f in zip(records, facts):
        if r.label == 1:
            assert set(f.summary.texts) <= set(f.source.texts)


def test_entity_swap_introduces_absent_entity():
    source = "Barrow beat Taunton at Holker Street."
    out = entity_swap("Barrow beat Taunton", source, SplitMix64(5))
    new = {w for w in out.split() if w in TEAMS or w in PLAYERS} - set(source.replace(".", "").split())
    assert len(new) == 1
    assert out != "Barrow beat Taunton"


def test_entity_swap_needs_entity():
    with pytest.raises(ValueError):
        entity_swap("nothing to swap here", "", SplitMix64(0))


def test_negation_inserts_not():
    assert predicate_negation("Yates has scored twice.") == "Yates has not scored twice."


def test_spec_validation():
    with pytest.raises(ValueError):
        SyntheticSpec(0, 3)
    with pytest.raises(ValueError):
        SyntheticSpec(3, 3, perturbations=("sarcasm",))


def _features(doc):
    return aggregate_all(score_pairs(doc.summary, doc.source, HeuristicBackend()))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_heuristic_invariants(seed):
    records, facts = generate(SyntheticSpec(6, 6, seed=seed))
    for r, doc in zip(records, facts):
        feats = _features(doc)
        if r.label == 1:
            for v in feats:
                assert v.to_dict()["supported"] >= 0.99
                assert v.to_dict()["oute"] <= 0.01
        elif r.model_name == "synthetic-out_of_article_addition":
            assert max(v.to_dict()["oute"] for v in feats) >= 0.5
        else:
            # the perturbed fact no longer matches its source sentence exactly
            assert min(v.to_dict()["supported"] for v in feats) < 0.99
