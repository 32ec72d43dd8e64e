"""Labeled toy corpus with known ground truth, for end-to-end checks.

Source documents are short match reports built from template sentences.
Factual summaries copy two source sentences verbatim; non-factual ones copy
two and corrupt one of them with a single named perturbation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import FactSet, Origin, Provenance
from .dataset import BenchRecord
from .facts import DocFacts
from .rng import SplitMix64

PERTURBATIONS = ("entity_swap", "predicate_negation", "out_of_article_addition")

TEAMS = (
    "Barrow", "Taunton", "Kendal", "Morecambe", "Halifax", "Gateshead", "Wrexham",
    "Tranmere", "Chester", "Southport", "Woking", "Dagenham", "Eastleigh", "Aldershot",
    "Boreham", "Maidstone", "Dorking", "Yeovil", "Torquay", "Bromley",
)
PLAYERS = (
    "Williams", "Yates", "Harrison", "Okafor", "Lindqvist", "Moreno", "Fitzgerald",
    "Adeyemi", "Kowalski", "Brennan", "Takahashi", "Ferreira", "Dunmore", "Hale",
)
VENUES = (
    "Holker Street", "Wordsworth Drive", "Globe Arena", "The Shay", "Racecourse Ground",
    "Prenton Park", "Haig Avenue", "Kingfield Stadium", "Silverlake Stadium",
)
DAYS = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday")

# Each template uses "has" as its auxiliary; negation inserts "not" right after it.
_TEMPLATES = (
    "{team} has defeated {team2} at {venue} on {day}.",
    "{player} has scored the opening goal for {team} against {team2}.",
    "{team} has signed {player} from {team2} on a permanent deal.",
    "{player} has received a yellow card during the {day} match.",
    "{team2} has appointed a new manager after losing to {team}.",
    "{player} has captained {team} for the first time at {venue}.",
)

# Vocabulary for out-of-article sentences; shares no token with anything above.
_NOVEL_SUBJECTS = ("Quorvex", "Zelmarine", "Brightwick", "Ostrava", "Velloran", "Marquette")
_NOVEL_SENTENCES = (
    "{x} announced record quarterly profits yesterday.",
    "{x} unveiled plans involving floating solar panels.",
    "{x} reported unusually heavy snowfall overnight.",
    "{x} opened an aquarium featuring rare jellyfish.",
)


@dataclass(frozen=True)
class SyntheticSpec:
    n_factual: int = 20
    n_nonfactual: int = 20
    seed: int = 0
    perturbations: tuple[str, ...] = PERTURBATIONS

    def __post_init__(self):
        if self.n_factual < 1 or self.n_nonfactual < 1:
            raise ValueError("need at least one factual and one non-factual record")
        bad = set(self.perturbations) - set(PERTURBATIONS)
        if bad or not self.perturbations:
            raise ValueError(f"perturbations must be a non-empty subset of {PERTURBATIONS}")


def _source_sentences(rng: SplitMix64, n: int = 4) -> list[str]:
    teams = list(TEAMS)
    rng.shuffle(teams)
    players = list(PLAYERS)
    rng.shuffle(players)
    templates = list(_TEMPLATES)
    rng.shuffle(templates)
    sentences = []
    for k, tpl in enumerate(templates[:n]):
        sentences.append(
            tpl.format(
                team=teams[0],
                team2=teams[1 + k % 2],
                player=players[k],
                venue=rng.choice(VENUES),
                day=rng.choice(DAYS),
            )
        )
    return sentences


def _capitalized_words(sentence: str) -> list[str]:
    words = [w.strip(".,") for w in sentence.split()]
    return [w for w in words if w[:1].isupper() and len(w) >= 2]


def entity_swap(sentence: str, source_text: str, rng: SplitMix64) -> str:
    """Replace one capitalized entity word with a team/player name absent from the source."""
    candidates = [w for w in _capitalized_words(sentence) if w in TEAMS or w in PLAYERS]
    if not candidates:
        raise ValueError(f"no swappable entity in {sentence!r}")
    target = rng.choice(candidates)
    pool = TEAMS if target in TEAMS else PLAYERS
    source_words = set(w.strip(".,") for w in source_text.split())
    replacements = [name for name in pool if name not in source_words]
    replacement = rng.choice(replacements)
    words = sentence.split(" ")
    for idx, w in enumerate(words):
        if w.strip(".,") == target:
            words[idx] = w.replace(target, replacement)
            break
    return " ".join(words)


def predicate_negation(sentence: str) -> str:
    if " has " not in sentence:
        raise ValueError(f"no auxiliary to negate in {sentence!r}")
    return sentence.replace(" has ", " has not ", 1)


def out_of_article_sentence(rng: SplitMix64) -> str:
    return rng.choice(_NOVEL_SENTENCES).format(x=rng.choice(_NOVEL_SUBJECTS))


def generate(spec: SyntheticSpec) -> tuple[list[BenchRecord], list[DocFacts]]:
    """Build the corpus.  Records alternate val/test within each class so both
    cuts are balanced; two dataset names split the corpus for per-dataset metrics."""
    rng = SplitMix64(spec.seed)
    records: list[BenchRecord] = []
    facts: list[DocFacts] = []

    plan = [1] * spec.n_factual + [0] * spec.n_nonfactual
    class_counter = {0: 0, 1: 0}
    for n, label in enumerate(plan):
        k = class_counter[label]
        class_counter[label] += 1
        cut = "val" if k % 2 == 0 else "test"
        origin = "cnndm" if (k // 2) % 2 == 0 else "xsum"
        dataset_name = "SynthCNN" if origin == "cnndm" else "SynthXSum"

        source = _source_sentences(rng)
        picks = sorted(rng.sample_indices(len(source), 2))
        summary = [source[i] for i in picks]
        perturbation = ""
        if label == 0:
            perturbation = spec.perturbations[k % len(spec.perturbations)]
            slot = rng.below(len(summary))
            if perturbation == "entity_swap":
                summary[slot] = entity_swap(summary[slot], " ".join(source), rng)
            elif perturbation == "predicate_negation":
                summary[slot] = predicate_negation(summary[slot])
            else:
                summary.append(out_of_article_sentence(rng))

        doc_id = f"syn-{n:04d}"
        record = BenchRecord(
            dataset_name=dataset_name,
            origin=origin,
            doc_id=doc_id,
            doc=" ".join(source),
            summary=" ".join(summary),
            model_name=f"synthetic-{perturbation}" if perturbation else "synthetic-copy",
            label=label,
            cut=cut,
        )
        records.append(record)
        facts.append(
            DocFacts(
                record.key,
                FactSet.from_texts(record.key, Origin.SOURCE, source, Provenance.MANUAL),
                FactSet.from_texts(record.key, Origin.SUMMARY, summary, Provenance.MANUAL),
            )
        )
    return records, facts
