"""Apply operation sets to the previous state table."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from tabledst.ops import Insert, OperationSet, ParseOutcome, parse_ops
from tabledst.state import DialogueState, SlotKey, StateKind


@dataclass(frozen=True)
class ApplyWarning:
    kind: str
    slot: SlotKey

    def __str__(self) -> str:
        return f"{self.kind} {self.slot}"


DELETE_MISSING = "delete-missing"


def apply(prev: DialogueState, ops: OperationSet) -> tuple[DialogueState, list[ApplyWarning]]:
    """Return the state after ``ops`` and any anomalies met on the way.

    INSERT upserts, DELETE removes; deleting an absent slot is a no-op that is
    reported rather than raised. ``prev`` is left untouched.
    """
    table = dict(prev.items())
    warnings: list[ApplyWarning] = []
    for op in ops:
        if isinstance(op, Insert):
            table[op.slot] = op.value
        elif op.slot in table:
            del table[op.slot]
        else:
            warnings.append(ApplyWarning(DELETE_MISSING, op.slot))
    return DialogueState._trusted(table, prev.kind), warnings


def interpret(text: str, prev: DialogueState, none_inserts_delete: bool = False) -> tuple[DialogueState, ParseOutcome, list[ApplyWarning]]:
    """Parse a generated target and apply it in one step."""
    outcome = parse_ops(text, none_inserts_delete=none_inserts_delete)
    state, warnings = apply(prev, outcome.ops)
    return state, outcome, warnings


def run_state_sequence(initial: DialogueState, op_sets: Iterable[OperationSet]) -> list[DialogueState]:
    states = []
    state = initial
    for ops in op_sets:
        state, _ = apply(state, ops)
        states.append(state)
    return states


def empty_state(kind: StateKind = StateKind.PREDICTED) -> DialogueState:
    return DialogueState((), kind)
