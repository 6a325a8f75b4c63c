"""Teacher-forced (input, target) pairs for training a generator."""

from __future__ import annotations

import random
from dataclasses import replace
from typing import Iterable

from tabledst.dataset.records import DialogueRecord
from tabledst.diffing import gold_trajectory
from tabledst.interpreter import apply
from tabledst.ops import OperationSet, parse_ops, serialize_ops
from tabledst.state import DialogueState, StateKind, state_equals
from tabledst.templating import ContextConfig, build_context


def turn_seed(seed: int, dialogue_id: str, turn: int, purpose: str = "") -> int:
    """Stable per-turn seed; independent of hash randomization."""
    return random.Random(f"{seed}:{dialogue_id}:{turn}:{purpose}").getrandbits(32)


def gold_targets(record: DialogueRecord, variant_switch_is_change: bool = False) -> tuple[list[DialogueState], list[OperationSet]]:
    return gold_trajectory(record.states, record.turn_texts(), variant_switch_is_change)


def emit_training_targets(
    record: DialogueRecord,
    cfg: ContextConfig,
    seed: int | None = None,
    escape: bool = False,
) -> list[tuple[str, str]]:
    """One (context, target) pair per turn, using the gold previous state.

    With ``seed`` set, target fragments are shuffled per turn; so are state
    rows when ``cfg.shuffle_state_rows`` is set (used as the base seed).
    ``seed=None`` keeps the diff order.
    """
    states, targets = gold_targets(record)
    pairs = []
    prev = DialogueState((), StateKind.GOLD)
    for t, turn in enumerate(record.turns):
        turn_cfg = cfg
        if cfg.shuffle_state_rows is not None:
            turn_cfg = replace(cfg, shuffle_state_rows=turn_seed(cfg.shuffle_state_rows, record.id, t, "rows"))
        context = build_context(turn, prev, cfg.window(record.turns, t), turn_cfg, escape)
        order = None if seed is None else turn_seed(seed, record.id, t, "ops")
        pairs.append((context, serialize_ops(targets[t], order, escape)))
        prev = states[t]
    return pairs


def replay_failures(records: Iterable[DialogueRecord], seed: int | None = None) -> list[tuple[str, int]]:
    """Turns where replaying the serialized gold targets misses the gold state.

    Targets go through text and back, and are applied to the replayed
    state rather than the gold one, so any mistake would carry forward.
    """
    failures = []
    for record in records:
        _, targets = gold_targets(record)
        state = DialogueState((), StateKind.PREDICTED)
        for t, ops in enumerate(targets):
            order = None if seed is None else turn_seed(seed, record.id, t, "ops")
            outcome = parse_ops(serialize_ops(ops, order))
            state, _ = apply(state, outcome.ops)
            if outcome.discarded or not state_equals(state, record.states[t]):
                failures.append((record.id, t))
    return failures
