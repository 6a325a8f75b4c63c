"""Textual dialogue context for the sequence generator."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Literal, Sequence

from tabledst.ops import escape_value
from tabledst.state import NONE_VALUE, DialogueState, SlotKey

SEP = "<sep>"
ROW_SEPARATOR = "; "

PREFIXES = {
    "ops": ("generate update operations:", "operations:"),
    "full": ("generate full state:", "states:"),
}


class ContextWindowError(ValueError):
    pass


@dataclass(frozen=True)
class Turn:
    index: int
    system_utterance: str
    user_utterance: str

    def __post_init__(self) -> None:
        if not self.user_utterance or not self.user_utterance.strip():
            raise ValueError(f"turn {self.index} has an empty user utterance")
        if self.index < 0:
            raise ValueError("turn index must be non-negative")

    @property
    def system_text(self) -> str:
        text = self.system_utterance.strip() if self.system_utterance else ""
        return text or NONE_VALUE

    def render(self) -> str:
        return f"system: {self.system_text} user: {self.user_utterance.strip()}"


@dataclass(frozen=True)
class ContextConfig:
    """What goes into the generator input besides the current turn.

    ``history`` is ``"none"``, ``"full"`` (all previous turns) or ``"last"``
    (the ``last_k`` turns before the current one).
    """

    history: Literal["none", "full", "last"] = "none"
    last_k: int = 4
    include_prev_state: bool = True
    prefix: Literal["ops", "full"] = "ops"
    shuffle_state_rows: int | None = None

    def __post_init__(self) -> None:
        if self.history not in ("none", "full", "last"):
            raise ValueError(f"unknown history mode {self.history!r}")
        if self.history == "last" and self.last_k < 1:
            raise ValueError("last_k must be positive")
        if self.prefix not in PREFIXES:
            raise ValueError(f"unknown prefix {self.prefix!r}")
        if self.history == "none" and not self.include_prev_state:
            raise ValueError("context needs the previous state, the history, or both")

    @classmethod
    def preset(cls, name: str, **overrides) -> ContextConfig:
        presets = {
            "prev-state": dict(history="none", include_prev_state=True),
            "last4+prev-state": dict(history="last", last_k=4, include_prev_state=True),
            "full-history": dict(history="full", include_prev_state=False),
            "full-history+prev-state": dict(history="full", include_prev_state=True),
        }
        if name not in presets:
            raise ValueError(f"unknown context preset {name!r}; choose from {sorted(presets)}")
        return cls(**{**presets[name], **overrides})

    def window(self, turns: Sequence[Turn], index: int) -> list[Turn]:
        """History turns visible at ``index``."""
        if self.history == "none":
            return []
        start = 0 if self.history == "full" else max(0, index - self.last_k)
        return list(turns[start:index])


def linearize_state(state: DialogueState, shuffle: int | None = None, escape: bool = False) -> str:
    if not state:
        return NONE_VALUE
    rows = [f"{key} = {escape_value(value) if escape else value}" for key, value in state.items()]
    if shuffle is not None:
        random.Random(shuffle).shuffle(rows)
    return ROW_SEPARATOR.join(rows)


def parse_linearized(text: str) -> dict[SlotKey, str]:
    """Inverse of :func:`linearize_state` for states without separator characters."""
    if text.strip() == NONE_VALUE:
        return {}
    rows = {}
    for row in text.split(ROW_SEPARATOR):
        key, _, value = row.partition(" = ")
        rows[SlotKey.parse(key)] = value
    return rows


def _check_window(turn: Turn, history: Sequence[Turn], cfg: ContextConfig) -> None:
    if cfg.history == "none":
        expected = []
    elif cfg.history == "full":
        expected = list(range(turn.index))
    else:
        expected = list(range(max(0, turn.index - cfg.last_k), turn.index))
    got = [t.index for t in history]
    if got != expected:
        raise ContextWindowError(
            f"history for turn {turn.index} has indices {got}, expected {expected} for {cfg.history!r}"
        )


def build_context(
    turn: Turn,
    prev_state: DialogueState,
    history: Sequence[Turn],
    cfg: ContextConfig,
    escape: bool = False,
) -> str:
    _check_window(turn, history, cfg)
    opening, closing = PREFIXES[cfg.prefix]
    parts = [f"{opening} dialogue: {turn.render()}"]
    if cfg.include_prev_state:
        rows = linearize_state(prev_state, cfg.shuffle_state_rows, escape)
        parts.append(f"previous dialogue states: {rows}")
    if history:
        parts.append("history: " + " ".join(t.render() for t in history))
    parts.append(closing)
    return f" {SEP} ".join(parts)
