"""Derive gold operation targets by diffing consecutive gold states."""

from __future__ import annotations

from typing import Sequence

from tabledst.ops import Delete, Insert, OperationSet
from tabledst.state import DialogueState, GoldStateAnnotation, StateKind, canonical_value


def select_training_value(candidates: Sequence[str], turn_text: str) -> str:
    """Pick the single value used for teacher forcing.

    The first candidate that appears verbatim (uncased) in ``turn_text``
    wins; otherwise the longest one, ties broken by annotation order.
    """
    if not candidates:
        raise ValueError("select_training_value needs at least one candidate")
    haystack = canonical_value(turn_text)
    for value in candidates:
        if canonical_value(value) in haystack:
            return canonical_value(value)
    longest = max(candidates, key=len)  # max keeps the first of equal lengths
    return canonical_value(longest)


def diff_states(prev: DialogueState, next_: DialogueState) -> OperationSet:
    """Minimal operation set turning ``prev`` into ``next_``.

    Inserts (new or canonically changed slots) come first, then deletes,
    each group sorted by slot name.
    """
    inserts = [
        Insert(key, value)
        for key, value in next_.items()
        if key not in prev or canonical_value(prev[key]) != canonical_value(value)
    ]
    deletes = [Delete(key) for key in prev if key not in next_]
    inserts.sort(key=lambda op: op.slot.canonical)
    deletes.sort(key=lambda op: op.slot.canonical)
    return OperationSet(tuple(inserts) + tuple(deletes))


def resolve_gold(
    prev: DialogueState,
    gold: GoldStateAnnotation,
    turn_text: str,
    variant_switch_is_change: bool = False,
) -> DialogueState:
    """Collapse a gold annotation to one value per slot, in annotation order.

    A slot whose previous value is still acceptable keeps it, so swapping
    between listed variants of the same entity does not count as a change
    unless ``variant_switch_is_change`` is set.
    """
    table = {}
    for key, candidates in gold.items():
        if not variant_switch_is_change and key in prev and gold.accepts(key, prev[key]):
            table[key] = prev[key]
        else:
            table[key] = select_training_value(candidates, turn_text)
    return DialogueState(table, StateKind.GOLD)


def gold_trajectory(
    golds: Sequence[GoldStateAnnotation],
    turn_texts: Sequence[str],
    variant_switch_is_change: bool = False,
) -> tuple[list[DialogueState], list[OperationSet]]:
    """Single-valued gold states and the operation targets between them."""
    prev = DialogueState((), StateKind.GOLD)
    states, targets = [], []
    for gold, text in zip(golds, turn_texts, strict=True):
        state = resolve_gold(prev, gold, text, variant_switch_is_change)
        targets.append(diff_states(prev, state))
        states.append(state)
        prev = state
    return states, targets
