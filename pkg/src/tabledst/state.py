"""State-table data model and uncased comparison semantics."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

NONE_VALUE = "none"

_WS = re.compile(r"\s+")


def canonical_value(text: str) -> str:
    """Case-fold, trim and collapse internal whitespace."""
    return _WS.sub(" ", text.strip()).casefold()


def is_none_value(text: str) -> bool:
    return canonical_value(text) == NONE_VALUE


@dataclass(frozen=True, order=True)
class SlotKey:
    domain: str
    slot: str

    def __post_init__(self) -> None:
        for part in (self.domain, self.slot):
            if not part or "-" in part or part != part.lower() or _WS.search(part) or "=" in part:
                raise ValueError(f"invalid slot key part {part!r}")

    @property
    def canonical(self) -> str:
        return f"{self.domain}-{self.slot}"

    @classmethod
    def parse(cls, text: str | SlotKey) -> SlotKey:
        if isinstance(text, SlotKey):
            return text
        parts = text.strip().lower().split("-")
        if len(parts) != 2:
            raise ValueError(f"slot key must be 'domain-slot', got {text!r}")
        return cls(parts[0], parts[1])

    def __str__(self) -> str:
        return self.canonical


def check_value(value: str) -> str:
    if not isinstance(value, str) or not value.strip():
        raise ValueError(f"slot value must be a non-empty string, got {value!r}")
    return value


class StateKind(enum.Enum):
    PREDICTED = "predicted"
    GOLD = "gold"


class DialogueState(Mapping[SlotKey, str]):
    """Immutable two-column table of active slots.

    Values are kept verbatim; comparisons that matter for evaluation go
    through :func:`canonical_value`. Row order is insertion order.
    """

    __slots__ = ("_entries", "kind")

    def __init__(
        self,
        entries: Mapping[SlotKey | str, str] | Iterable[tuple[SlotKey | str, str]] = (),
        kind: StateKind = StateKind.PREDICTED,
    ) -> None:
        items = entries.items() if isinstance(entries, Mapping) else entries
        table: dict[SlotKey, str] = {}
        for key, value in items:
            key = SlotKey.parse(key)
            check_value(value)
            if is_none_value(value):
                raise ValueError(f"state cannot hold the placeholder value for {key}")
            if key in table:
                raise ValueError(f"duplicate slot {key}")
            table[key] = value
        self._entries = table
        self.kind = kind

    @classmethod
    def _trusted(cls, table: dict[SlotKey, str], kind: StateKind) -> DialogueState:
        state = cls.__new__(cls)
        state._entries = table
        state.kind = kind
        return state

    def __getitem__(self, key: SlotKey | str) -> str:
        return self._entries[SlotKey.parse(key)]

    def __contains__(self, key: object) -> bool:
        if isinstance(key, str):
            try:
                key = SlotKey.parse(key)
            except ValueError:
                return False
        return key in self._entries

    def __iter__(self) -> Iterator[SlotKey]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, DialogueState):
            return self._entries == other._entries
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._entries.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {v!r}" for k, v in self._entries.items())
        return f"DialogueState({{{body}}}, kind={self.kind.value})"

    @property
    def slots(self) -> frozenset[SlotKey]:
        return frozenset(self._entries)

    def to_dict(self) -> dict[str, str]:
        return {str(k): v for k, v in self._entries.items()}

    def canonical_items(self) -> frozenset[tuple[SlotKey, str]]:
        return frozenset((k, canonical_value(v)) for k, v in self._entries.items())

    def same_as(self, other: DialogueState) -> bool:
        """Equality up to :func:`canonical_value` on the values."""
        return self.canonical_items() == other.canonical_items()

    def with_entry(self, key: SlotKey | str, value: str) -> DialogueState:
        key = SlotKey.parse(key)
        check_value(value)
        if is_none_value(value):
            raise ValueError(f"state cannot hold the placeholder value for {key}")
        table = dict(self._entries)
        table[key] = value
        return DialogueState._trusted(table, self.kind)

    def without(self, key: SlotKey | str) -> DialogueState:
        key = SlotKey.parse(key)
        table = {k: v for k, v in self._entries.items() if k != key}
        return DialogueState._trusted(table, self.kind)

    def as_kind(self, kind: StateKind) -> DialogueState:
        return DialogueState._trusted(dict(self._entries), kind)


class GoldStateAnnotation(Mapping[SlotKey, tuple[str, ...]]):
    """Gold annotation: each active slot maps to an ordered list of acceptable values."""

    __slots__ = ("_entries",)

    def __init__(
        self,
        entries: Mapping[SlotKey | str, Iterable[str]] | Iterable[tuple[SlotKey | str, Iterable[str]]] = (),
    ) -> None:
        items = entries.items() if isinstance(entries, Mapping) else entries
        table: dict[SlotKey, tuple[str, ...]] = {}
        for key, values in items:
            key = SlotKey.parse(key)
            if isinstance(values, str):
                values = (values,)
            values = tuple(check_value(v) for v in values)
            if not values:
                raise ValueError(f"empty acceptable-value list for {key}")
            if key in table:
                raise ValueError(f"duplicate slot {key}")
            table[key] = values
        self._entries = table

    def __getitem__(self, key: SlotKey | str) -> tuple[str, ...]:
        return self._entries[SlotKey.parse(key)]

    def __contains__(self, key: object) -> bool:
        if isinstance(key, str):
            try:
                key = SlotKey.parse(key)
            except ValueError:
                return False
        return key in self._entries

    def __iter__(self) -> Iterator[SlotKey]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, GoldStateAnnotation):
            return self._entries == other._entries
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._entries.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {list(v)!r}" for k, v in self._entries.items())
        return f"GoldStateAnnotation({{{body}}})"

    @property
    def slots(self) -> frozenset[SlotKey]:
        return frozenset(self._entries)

    def accepts(self, key: SlotKey | str, value: str) -> bool:
        key = SlotKey.parse(key)
        if key not in self._entries:
            return False
        target = canonical_value(value)
        return any(canonical_value(v) == target for v in self._entries[key])

    def to_dict(self) -> dict[str, list[str]]:
        return {str(k): list(v) for k, v in self._entries.items()}

    @classmethod
    def from_state(cls, state: DialogueState) -> GoldStateAnnotation:
        return cls((k, (v,)) for k, v in state.items())


def state_equals(pred: DialogueState, gold: GoldStateAnnotation) -> bool:
    """Joint match: identical slot sets and every predicted value acceptable."""
    if pred.slots != gold.slots:
        return False
    return all(gold.accepts(k, v) for k, v in pred.items())
