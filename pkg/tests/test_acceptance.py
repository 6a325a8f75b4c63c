"""Acceptance gate: one test (or parametrized family) per criterion.

Set TABLEDST_MULTIWOZ_21 / _22 / _24 to an unpacked MultiWoz release to run
against real data. Without them the corpus-level criteria run on a
synthetic corpus written in the same on-disk layout, and the statistics
criterion (which is only meaningful on the real release) is skipped.
"""

from __future__ import annotations

import os
import random
import statistics
import time
from pathlib import Path

import pytest

from tabledst.bench import itc_check, profile_corpus
from tabledst.dataset import (
    compare_statistics,
    compute_statistics,
    emit_training_targets,
    load_corpus,
    normalize_labels,
    replay_failures,
)
from tabledst.dataset.normalize import DEFAULT_RULES
from tabledst.diffing import diff_states
from tabledst.evaluation import evaluate_records
from tabledst.interpreter import apply
from tabledst.ops import Delete, Insert, OperationSet, parse_ops, serialize_ops
from tabledst.schema import SLOTS
from tabledst.state import DialogueState, SlotKey
from tabledst.synthetic import generate_corpus, worked_example_dialogue, write_layout
from tabledst.templating import ContextConfig
from tabledst.tracker import NoiseModel, NoisyOracle, OracleGenerator, StateSource, track_corpus

VERSIONS = ("2.1", "2.2", "2.4")
ENV = {v: f"TABLEDST_MULTIWOZ_{v.replace('.', '')}" for v in VERSIONS}
SYNTHETIC_DIALOGUES = 9917
CFG = ContextConfig.preset("prev-state")


def real_root(version: str) -> Path | None:
    path = os.environ.get(ENV[version])
    return Path(path) if path else None


@pytest.fixture(scope="session")
def synthetic_dialogues():
    return generate_corpus(SYNTHETIC_DIALOGUES, seed=0)


@pytest.fixture(scope="session")
def corpus_root(tmp_path_factory, synthetic_dialogues):
    roots = {}

    def get(version: str) -> tuple[Path, str]:
        real = real_root(version)
        if real is not None:
            return real, "real"
        if version not in roots:
            roots[version] = write_layout(tmp_path_factory.mktemp(f"mwz{version}"), synthetic_dialogues, version)
        return roots[version], "synthetic"

    return get


@pytest.fixture(scope="session")
def corpora(corpus_root):
    cache = {}

    def get(version: str, label_fix: bool = True):
        key = (version, label_fix)
        if key not in cache:
            root, origin = corpus_root(version)
            records = load_corpus(root, version)
            if label_fix:
                records = [normalize_labels(r) for r in records]
            cache[key] = (records, origin)
        return cache[key]

    return get


# ---------------------------------------------------------------------------
# 1. Corpus reconstruction
# ---------------------------------------------------------------------------


@pytest.mark.slow
@pytest.mark.criterion(1, "corpus reconstruction and oracle JGA")
@pytest.mark.parametrize("version", VERSIONS)
def test_corpus_reconstruction(version, corpora, criterion):
    start = time.perf_counter()
    records, origin = corpora(version)
    turns = sum(len(r) for r in records)
    failures = replay_failures(records)
    results = track_corpus(records, OracleGenerator.from_records(records), CFG, workers=1)
    jga = evaluate_records(results, records).jga
    elapsed = time.perf_counter() - start
    criterion.note(f"{origin} {version}: {len(records)} dialogues, {turns} turns, replay failures {len(failures)}, oracle JGA {jga:.3f}, {elapsed:.1f}s")
    assert failures == []
    assert jga == 1.0
    if version == "2.2":
        # load + normalize + replay + oracle tracking + scoring
        assert elapsed < 120


# ---------------------------------------------------------------------------
# 2. Dataset statistics (real data only)
# ---------------------------------------------------------------------------


@pytest.mark.slow
@pytest.mark.criterion(2, "dataset statistics match the reference tables")
@pytest.mark.parametrize("version", VERSIONS)
def test_dataset_statistics(version, corpora, criterion):
    if real_root(version) is None:
        criterion.note(f"MultiWoz {version} not available; set {ENV[version]} to run")
        pytest.skip(f"MultiWoz {version} not available (set {ENV[version]})")
    records, _ = corpora(version)
    stats = compute_statistics(records)
    mismatches = compare_statistics(stats, version)
    criterion.note(f"{version}: totals {stats.totals()}, {len(mismatches)} mismatches")
    assert mismatches == [], "\n".join(mismatches[:40])


# ---------------------------------------------------------------------------
# 3. Worked example byte fidelity
# ---------------------------------------------------------------------------

WORKED_EXAMPLE = [
    (
        "generate update operations: dialogue: system: none user: I'm looking for a place to stay. It needs to be a "
        "guesthouse and include free wifi. <sep> previous dialogue states: none <sep> operations:",
        "INSERT hotel-internet = yes ; INSERT hotel-type = guesthouse",
    ),
    (
        "generate update operations: dialogue: system: There are 23 hotels that meet your needs. Would you like to "
        "narrow your search by area and/or price range? user: I would like for it to be cheap and include free parking. "
        "<sep> previous dialogue states: hotel-type = guesthouse; hotel-internet = yes <sep> operations:",
        "INSERT hotel-parking = yes ; INSERT hotel-pricerange = cheap",
    ),
]


@pytest.mark.criterion(3, "worked example reproduced byte for byte")
def test_worked_example_byte_fidelity(tmp_path, criterion):
    # the 2.2 layout keeps per-turn annotation order; 2.1/2.4 impose a fixed
    # metadata order, see test_worked_example_row_order_in_fixed_schema_layouts
    root = write_layout(tmp_path, [worked_example_dialogue()], "2.2")
    (record,) = [normalize_labels(r) for r in load_corpus(root, "2.2")]
    pairs = emit_training_targets(record, CFG)[:2]
    matches = sum(p == e for p, e in zip(pairs, WORKED_EXAMPLE))
    criterion.note(f"2.2 layout: {matches}/2 rows identical")
    assert pairs == WORKED_EXAMPLE


@pytest.mark.parametrize("version", ["2.1", "2.4"])
def test_worked_example_row_order_in_fixed_schema_layouts(version, tmp_path):
    root = write_layout(tmp_path, [worked_example_dialogue()], version)
    (record,) = [normalize_labels(r) for r in load_corpus(root, version)]
    pairs = emit_training_targets(record, CFG)[:2]
    assert pairs[0] == WORKED_EXAMPLE[0]
    assert pairs[1][1] == WORKED_EXAMPLE[1][1]
    # same rows, metadata order instead of annotation order
    assert pairs[1][0] == WORKED_EXAMPLE[1][0].replace("hotel-type = guesthouse; hotel-internet = yes", "hotel-internet = yes; hotel-type = guesthouse")


# ---------------------------------------------------------------------------
# 4. Round-trip laws
# ---------------------------------------------------------------------------

_ALPHABET = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 :'&=-./éü"


def _random_value(rng: random.Random) -> str:
    while True:
        value = "".join(rng.choice(_ALPHABET) for _ in range(rng.randint(1, 18))).strip()
        if value and value.lower() != "none":
            return value


def _random_key(rng: random.Random) -> SlotKey:
    if rng.random() < 0.8:
        return rng.choice(SLOTS)
    name = lambda: "".join(rng.choice("abcdefghijklmnopqrstuvwxyz_0123456789") for _ in range(rng.randint(1, 8)))  # noqa: E731
    return SlotKey(name(), name())


def _random_ops(rng: random.Random) -> OperationSet:
    keys = list(dict.fromkeys(_random_key(rng) for _ in range(rng.randint(0, 12))))
    return OperationSet(tuple(Insert(k, _random_value(rng)) if rng.random() < 0.7 else Delete(k) for k in keys))


def _random_state(rng: random.Random) -> DialogueState:
    keys = list(dict.fromkeys(_random_key(rng) for _ in range(rng.randint(0, 15))))
    return DialogueState({k: _random_value(rng) for k in keys})


@pytest.mark.criterion(4, "round-trip laws over 10,000 random cases each")
def test_round_trip_laws(criterion):
    rng = random.Random(20240501)
    cases = 10_000
    serialize_failures = 0
    for i in range(cases):
        ops = _random_ops(rng)
        as_given = parse_ops(serialize_ops(ops))
        shuffled = parse_ops(serialize_ops(ops, seed=i))
        if as_given.ops != ops or as_given.discarded or shuffled.ops.as_set() != ops.as_set():
            serialize_failures += 1
    diff_failures = 0
    for _ in range(cases):
        prev, nxt = _random_state(rng), _random_state(rng)
        ops = diff_states(prev, nxt)
        direct, warnings = apply(prev, ops)
        via_text, _ = apply(prev, parse_ops(serialize_ops(ops)).ops)
        if not direct.same_as(nxt) or warnings or not via_text.same_as(nxt):
            diff_failures += 1
    criterion.note(f"serialize/parse failures {serialize_failures}/{cases}, diff/apply failures {diff_failures}/{cases}")
    assert serialize_failures == 0
    assert diff_failures == 0


# ---------------------------------------------------------------------------
# 5. Error-propagation direction
# ---------------------------------------------------------------------------

SEEDS = range(20)
LEVELS = (0.0, 0.025, 0.05, 0.1)


@pytest.mark.slow
@pytest.mark.criterion(5, "gold-fed JGA above predicted JGA, monotone in noise")
def test_error_propagation_direction(corpora, criterion):
    records, origin = corpora("2.2")
    test_split = [r for r in records if r.split == "test"]
    oracle = OracleGenerator.from_records(test_split)

    def jga(level: float, seed: int, source: StateSource) -> float:
        gen = NoisyOracle(oracle, NoiseModel(p_drop=level, p_corrupt_value=level, seed=seed))
        return evaluate_records(track_corpus(test_split, gen, CFG, source, workers=1), test_split).jga

    runs = {(level, source): [jga(level, s, source) for s in SEEDS] for level in LEVELS[1:] for source in StateSource}
    runs.update({(0.0, source): [1.0] * len(SEEDS) for source in StateSource})
    assert jga(0.0, 0, StateSource.PREDICTED) == 1.0

    predicted, gold = runs[(0.05, StateSource.PREDICTED)], runs[(0.05, StateSource.GOLD)]
    wins = sum(g > p for g, p in zip(gold, predicted))
    means = {source: [statistics.fmean(runs[(level, source)]) for level in LEVELS] for source in StateSource}
    criterion.note(
        f"{origin} 2.2 test split ({len(test_split)} dialogues): gold-fed > predicted in {wins}/{len(SEEDS)} seeds, "
        f"mean JGA predicted {statistics.fmean(predicted):.4f} vs gold-fed {statistics.fmean(gold):.4f}"
    )
    for source, values in means.items():
        criterion.note(f"mean JGA ({source.value}) at levels {LEVELS}: " + ", ".join(f"{v:.4f}" for v in values))
    assert wins >= 0.95 * len(SEEDS)
    for values in means.values():
        assert all(a >= b for a, b in zip(values, values[1:]))


# ---------------------------------------------------------------------------
# 6. Efficiency proxy
# ---------------------------------------------------------------------------


@pytest.mark.slow
@pytest.mark.criterion(6, "median output length ops < light-cumulative < full-cumulative")
def test_output_length_ordering(corpora, criterion):
    records, origin = corpora("2.2")
    profiles = {rep: profile_corpus(records, CFG, rep) for rep in ("ops", "light-cumulative", "full-cumulative")}
    medians = {rep: statistics.median(p.output_tokens) for rep, p in profiles.items()}
    report = itc_check(records)
    criterion.note(f"{origin} 2.2 median output tokens " + ", ".join(f"{k}={v}" for k, v in medians.items()))
    assert medians["ops"] < medians["light-cumulative"] < medians["full-cumulative"]
    assert report.full_cumulative_violations == 0


# ---------------------------------------------------------------------------
# 7. Operation count equals changed-slot count
# ---------------------------------------------------------------------------


@pytest.mark.slow
@pytest.mark.criterion(7, "emitted operations equal changed slots at every turn")
@pytest.mark.parametrize("version", VERSIONS)
def test_itc_property(version, corpora, criterion):
    records, origin = corpora(version)
    report = itc_check(records)
    criterion.note(
        f"{origin} {version}: {report.turns} turns, {len(report.mismatches)} mismatches, "
        f"ops per turn min {report.min_ops} max {report.max_ops} mode {report.mode_ops}"
    )
    assert report.mismatches == []
    assert report.min_ops == 0
    assert report.max_ops <= 30


# ---------------------------------------------------------------------------
# 8. Label normalization
# ---------------------------------------------------------------------------


def _annotation_dump(records) -> dict[tuple[str, int, str], tuple[str, ...]]:
    return {(r.id, t, str(k)): v for r in records for t, s in enumerate(r.states) for k, v in s.items()}


@pytest.mark.slow
@pytest.mark.criterion(8, "label normalization idempotent, oracle JGA unchanged, only affected slots differ")
@pytest.mark.parametrize("version", VERSIONS)
def test_label_normalization(version, corpora, criterion):
    raw, origin = corpora(version, label_fix=False)
    fixed, _ = corpora(version, label_fix=True)
    assert [normalize_labels(r) for r in fixed] == fixed

    def oracle_jga(records):
        return evaluate_records(track_corpus(records, OracleGenerator.from_records(records), CFG, workers=1), records).jga

    delta = oracle_jga(fixed) - oracle_jga(raw)
    before, after = _annotation_dump(raw), _annotation_dump(fixed)
    assert before.keys() == after.keys()
    changed = {key[2] for key in before if before[key] != after[key]}
    resized = {key[2] for key in before if len(before[key]) != len(after[key])}
    affected = {str(k) for k in DEFAULT_RULES.affected_slots}
    criterion.note(f"{origin} {version}: oracle JGA delta {delta}, changed slots {sorted(changed)}, list sizes changed on {len(resized)} slots")
    assert delta == 0
    assert changed <= affected
    assert resized
