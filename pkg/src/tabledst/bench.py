"""Sequence-length accounting for operation targets vs. cumulative states.

Lengths are counted in whitespace tokens and characters, a model-free proxy
for decoder work. ``engine_throughput`` times the parse/apply/diff path of
this package; it says nothing about model inference latency.
"""

from __future__ import annotations

import statistics
import time
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

from tabledst.dataset.records import DialogueRecord
from tabledst.dataset.targets import gold_targets
from tabledst.diffing import diff_states
from tabledst.interpreter import apply
from tabledst.ops import parse_ops, serialize_ops
from tabledst.schema import SLOTS
from tabledst.state import NONE_VALUE, DialogueState, StateKind, canonical_value
from tabledst.templating import ROW_SEPARATOR, ContextConfig, build_context, linearize_state

Representation = Literal["ops", "light-cumulative", "full-cumulative"]
REPRESENTATIONS: tuple[str, ...] = ("ops", "light-cumulative", "full-cumulative")


def full_cumulative(state: DialogueState) -> str:
    """Every schema slot, inactive ones filled with the placeholder."""
    return ROW_SEPARATOR.join(f"{slot} = {state.get(slot, NONE_VALUE)}" for slot in SLOTS)


def render_output(representation: str, prev: DialogueState, state: DialogueState) -> str:
    if representation == "ops":
        return serialize_ops(diff_states(prev, state))
    if representation == "light-cumulative":
        return linearize_state(state)
    if representation == "full-cumulative":
        return full_cumulative(state)
    raise ValueError(f"unknown representation {representation!r}")


def token_length(text: str) -> int:
    return len(text.split())


@dataclass
class LengthProfile:
    representation: str
    context: ContextConfig
    input_tokens: list[int] = field(default_factory=list)
    output_tokens: list[int] = field(default_factory=list)
    input_chars: list[int] = field(default_factory=list)
    output_chars: list[int] = field(default_factory=list)

    def add(self, context: str, output: str) -> None:
        self.input_tokens.append(token_length(context))
        self.output_tokens.append(token_length(output))
        self.input_chars.append(len(context))
        self.output_chars.append(len(output))

    def summary(self) -> dict:
        out = {"representation": self.representation, "turns": len(self.output_tokens)}
        for name in ("input_tokens", "output_tokens", "input_chars", "output_chars"):
            values = getattr(self, name)
            if not values:
                continue
            quartiles = statistics.quantiles(values, n=4) if len(values) > 1 else [values[0]] * 3
            out[name] = {
                "median": statistics.median(values),
                "mean": statistics.fmean(values),
                "p25": quartiles[0],
                "p75": quartiles[2],
                "min": min(values),
                "max": max(values),
            }
        return out

    def distribution(self) -> list[dict]:
        return [
            {"input_tokens": a, "output_tokens": b, "input_chars": c, "output_chars": d}
            for a, b, c, d in zip(self.input_tokens, self.output_tokens, self.input_chars, self.output_chars)
        ]


def profile_corpus(records: Sequence[DialogueRecord], cfg: ContextConfig, representation: str) -> LengthProfile:
    """Per-turn input/output lengths for the gold trajectory of every dialogue.

    Inputs use the gold previous state; the prompt prefix follows the
    representation (operations vs. full state).
    """
    if representation not in REPRESENTATIONS:
        raise ValueError(f"unknown representation {representation!r}")
    prefix = "ops" if representation == "ops" else "full"
    if cfg.prefix != prefix:
        cfg = replace(cfg, prefix=prefix)
    profile = LengthProfile(representation, cfg)
    for record in records:
        states, _ = gold_targets(record)
        prev = DialogueState((), StateKind.GOLD)
        for t, turn in enumerate(record.turns):
            context = build_context(turn, prev, cfg.window(record.turns, t), cfg)
            profile.add(context, render_output(representation, prev, states[t]))
            prev = states[t]
    return profile


@dataclass
class ItcReport:
    turns: int = 0
    mismatches: list[tuple[str, int, int, int]] = field(default_factory=list)
    ops_histogram: Counter = field(default_factory=Counter)
    full_cumulative_violations: int = 0

    @property
    def min_ops(self) -> int:
        return min(self.ops_histogram) if self.ops_histogram else 0

    @property
    def max_ops(self) -> int:
        return max(self.ops_histogram) if self.ops_histogram else 0

    @property
    def mode_ops(self) -> int:
        return self.ops_histogram.most_common(1)[0][0] if self.ops_histogram else 0

    @property
    def ok(self) -> bool:
        return not self.mismatches and not self.full_cumulative_violations and self.max_ops <= len(SLOTS)

    def to_json(self) -> dict:
        return {
            "turns": self.turns,
            "ok": self.ok,
            "min_ops": self.min_ops,
            "max_ops": self.max_ops,
            "mode_ops": self.mode_ops,
            "ops_histogram": dict(sorted(self.ops_histogram.items())),
            "mismatches": [list(m) for m in self.mismatches[:50]],
            "full_cumulative_violations": self.full_cumulative_violations,
        }


def changed_slot_count(prev: DialogueState, state: DialogueState) -> int:
    """Slots whose (slot, value) row differs, counted from the two tables directly."""
    before = {k: canonical_value(v) for k, v in prev.items()}
    after = {k: canonical_value(v) for k, v in state.items()}
    return sum(1 for k in before.keys() | after.keys() if before.get(k) != after.get(k))


def itc_check(records: Sequence[DialogueRecord]) -> ItcReport:
    """Check that each turn emits exactly as many operations as slots changed."""
    report = ItcReport()
    for record in records:
        states, targets = gold_targets(record)
        prev = DialogueState((), StateKind.GOLD)
        for t, (state, ops) in enumerate(zip(states, targets)):
            emitted = len(parse_ops(serialize_ops(ops)).ops)
            changed = changed_slot_count(prev, state)
            report.turns += 1
            report.ops_histogram[emitted] += 1
            if emitted != changed:
                report.mismatches.append((record.id, t, emitted, changed))
            rows = full_cumulative(state).split(ROW_SEPARATOR)
            if len(rows) != len(SLOTS):
                report.full_cumulative_violations += 1
            prev = state
    return report


def engine_throughput(records: Sequence[DialogueRecord], repeat: int = 1) -> dict:
    """Turns per second for diff + serialize + parse + apply over the corpus."""
    trajectories = [gold_targets(r)[0] for r in records]
    turns = sum(len(t) for t in trajectories)
    start = time.perf_counter()
    for _ in range(repeat):
        for states in trajectories:
            prev = current = DialogueState((), StateKind.PREDICTED)
            for state in states:
                text = serialize_ops(diff_states(prev, state))
                current, _ = apply(current, parse_ops(text).ops)
                prev = state
    elapsed = time.perf_counter() - start
    return {"turns": turns * repeat, "seconds": elapsed, "turns_per_second": turns * repeat / elapsed if elapsed else float("inf")}
