from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from tabledst.schema import EXCLUDED_DOMAINS, INVALID_DIALOGUES
from tabledst.state import GoldStateAnnotation
from tabledst.templating import Turn


class DatasetError(ValueError):
    """Malformed corpus content; the message names the dialogue and field path."""

    def __init__(self, dialogue_id: str, path: str, message: str) -> None:
        super().__init__(f"{dialogue_id}: {path}: {message}")
        self.dialogue_id = dialogue_id
        self.path = path
        self.message = message


@dataclass(frozen=True)
class DialogueRecord:
    id: str
    turns: tuple[Turn, ...]
    states: tuple[GoldStateAnnotation, ...]
    split: str = "train"
    domains: frozenset[str] = field(default=frozenset())

    def __post_init__(self) -> None:
        if len(self.turns) != len(self.states):
            raise DatasetError(self.id, "turns", "every turn needs exactly one gold annotation")
        if self.id in INVALID_DIALOGUES:
            raise DatasetError(self.id, "id", "dialogue is on the invalid list")
        for i, state in enumerate(self.states):
            bad = {k.domain for k in state} & EXCLUDED_DOMAINS
            if bad:
                raise DatasetError(self.id, f"turns[{i}].state", f"excluded domains {sorted(bad)}")
        if not self.domains:
            object.__setattr__(
                self, "domains", frozenset(k.domain for s in self.states for k in s)
            )

    def __len__(self) -> int:
        return len(self.turns)

    def turn_texts(self) -> list[str]:
        return [f"{t.system_utterance} {t.user_utterance}" for t in self.turns]

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "split": self.split,
            "domains": sorted(self.domains),
            "turns": [
                {
                    "index": t.index,
                    "system": t.system_utterance,
                    "user": t.user_utterance,
                    "state": s.to_dict(),
                }
                for t, s in zip(self.turns, self.states)
            ],
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> DialogueRecord:
        did = obj.get("id", "<unknown>")
        try:
            raw_turns = obj["turns"]
        except KeyError:
            raise DatasetError(did, "turns", "missing field") from None
        turns, states = [], []
        for i, raw in enumerate(raw_turns):
            try:
                turns.append(Turn(int(raw.get("index", i)), raw.get("system", ""), raw["user"]))
                states.append(GoldStateAnnotation(raw.get("state", {})))
            except KeyError as exc:
                raise DatasetError(did, f"turns[{i}].{exc.args[0]}", "missing field") from None
            except ValueError as exc:
                raise DatasetError(did, f"turns[{i}]", str(exc)) from None
        return cls(
            id=did,
            turns=tuple(turns),
            states=tuple(states),
            split=obj.get("split", "train"),
            domains=frozenset(obj.get("domains", ())),
        )
