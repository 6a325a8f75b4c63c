"""Slot-level table operations and their textual target format.

Targets look like ``INSERT hotel-area = west ; DELETE taxi-leaveat``; the
literal ``none`` stands for "no change".
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

from tabledst.state import NONE_VALUE, SlotKey, check_value, is_none_value

SEPARATOR = " ; "

# ";" preceded by a backslash is an escaped character inside a value
_SPLIT = re.compile(r"(?<!\\);")


@dataclass(frozen=True)
class Insert:
    slot: SlotKey
    value: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "slot", SlotKey.parse(self.slot))
        check_value(self.value)
        if is_none_value(self.value):
            raise ValueError(f"INSERT {self.slot} cannot carry the placeholder value")

    def render(self, escape: bool = False) -> str:
        value = escape_value(self.value) if escape else self.value
        return f"INSERT {self.slot} = {value}"


@dataclass(frozen=True)
class Delete:
    slot: SlotKey

    def __post_init__(self) -> None:
        object.__setattr__(self, "slot", SlotKey.parse(self.slot))

    def render(self, escape: bool = False) -> str:
        return f"DELETE {self.slot}"


Operation = Union[Insert, Delete]


@dataclass(frozen=True)
class OperationSet:
    """Ordered operations for one turn, at most one per slot."""

    ops: tuple[Operation, ...] = ()

    def __post_init__(self) -> None:
        ops = tuple(self.ops)
        object.__setattr__(self, "ops", ops)
        seen: set[SlotKey] = set()
        for op in ops:
            if op.slot in seen:
                raise ValueError(f"slot {op.slot} targeted more than once")
            seen.add(op.slot)

    def __iter__(self) -> Iterator[Operation]:
        return iter(self.ops)

    def __len__(self) -> int:
        return len(self.ops)

    def __bool__(self) -> bool:
        return bool(self.ops)

    def as_set(self) -> frozenset[Operation]:
        return frozenset(self.ops)

    @property
    def inserts(self) -> tuple[Insert, ...]:
        return tuple(op for op in self.ops if isinstance(op, Insert))

    @property
    def deletes(self) -> tuple[Delete, ...]:
        return tuple(op for op in self.ops if isinstance(op, Delete))


EMPTY = OperationSet()


@dataclass(frozen=True)
class ParseOutcome:
    ops: OperationSet
    discarded: tuple[tuple[str, str], ...] = field(default=())


def escape_value(value: str) -> str:
    return value.replace(";", "\\;")


def unescape_value(value: str) -> str:
    return value.replace("\\;", ";")


def serialize_ops(ops: OperationSet, seed: int | None = None, escape: bool = False) -> str:
    """Render a target string; ``seed`` selects a deterministic fragment permutation."""
    if not ops:
        return NONE_VALUE
    fragments = [op.render(escape) for op in ops]
    if seed is not None:
        random.Random(seed).shuffle(fragments)
    return SEPARATOR.join(fragments)


_COMMAND = re.compile(r"^(\S+)(?:\s+(.*))?$", re.DOTALL)


def _parse_fragment(fragment: str, none_inserts_delete: bool) -> Operation | str:
    """Return an operation, or the reason the fragment was rejected."""
    text = fragment.strip()
    if not text:
        return "empty fragment"
    if is_none_value(text):
        return "no-op literal mixed with operations"
    match = _COMMAND.match(text)
    command, rest = match.group(1).upper(), (match.group(2) or "").strip()
    if command not in ("INSERT", "DELETE"):
        return f"unknown command {match.group(1)!r}"
    if command == "INSERT" and "=" not in rest:
        return "missing '='"
    slot_text, _, value = rest.partition("=")
    slot_text = slot_text.strip()
    if not slot_text:
        return "missing slot"
    try:
        slot = SlotKey.parse(slot_text)
    except ValueError:
        return f"invalid slot {slot_text!r}"
    if command == "DELETE":
        return Delete(slot)
    value = unescape_value(value.strip())
    if not value:
        return "empty value"
    if is_none_value(value):
        if none_inserts_delete:
            return Delete(slot)
        return "INSERT with placeholder value"
    return Insert(slot, value)


def parse_ops(text: str, none_inserts_delete: bool = False) -> ParseOutcome:
    """Tolerant parser for generated targets; never raises.

    Fragments that cannot be interpreted are reported in ``discarded`` with a
    reason. When a slot is targeted twice the later fragment wins.
    ``none_inserts_delete`` reads ``INSERT slot = none`` as a deletion, which
    is how the cumulative representation expresses removals.
    """
    if not isinstance(text, str):
        text = "" if text is None else str(text)
    if is_none_value(text):
        return ParseOutcome(EMPTY)
    parsed: list[tuple[Operation, str]] = []
    discarded: list[tuple[str, str]] = []
    for fragment in _SPLIT.split(text):
        raw = fragment.strip()
        result = _parse_fragment(fragment, none_inserts_delete)
        if isinstance(result, str):
            discarded.append((raw, result))
            continue
        for i, (prior, prior_raw) in enumerate(parsed):
            if prior.slot == result.slot:
                discarded.append((prior_raw, "duplicate slot, superseded by later fragment"))
                del parsed[i]
                break
        parsed.append((result, raw))
    return ParseOutcome(OperationSet(tuple(op for op, _ in parsed)), tuple(discarded))


def fragments(text: str) -> list[str]:
    return [f.strip() for f in _SPLIT.split(text)]


def ops_from(items: Iterable[Operation]) -> OperationSet:
    return OperationSet(tuple(items))
