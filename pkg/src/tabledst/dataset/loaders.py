"""Adapters for the published MultiWoz layouts.

2.1 and 2.4 ship a single ``data.json`` keyed by dialogue id, with the
belief state stored in the metadata of each system turn. 2.2 ships
``{train,dev,test}/dialogues_*.json`` with per-service frames on user turns.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Iterable

from tabledst.dataset.records import DatasetError, DialogueRecord
from tabledst.schema import DOMAIN_SLOTS, EXCLUDED_DOMAINS, INVALID_DIALOGUES
from tabledst.state import GoldStateAnnotation, SlotKey, canonical_value
from tabledst.templating import Turn

log = logging.getLogger(__name__)

VERSIONS = ("2.1", "2.2", "2.4")
INACTIVE = frozenset({"", "none", "not mentioned"})

# alternatives packed into one string in the 2.1/2.4 layout
_ALT = "|"

_SPLIT_DIRS = {"train": "train", "dev": "dev", "test": "test"}
_LIST_FILES = {
    "dev": ("valListFile.txt", "valListFile.json", "valListFile"),
    "test": ("testListFile.txt", "testListFile.json", "testListFile"),
}


def slot_key(domain: str, slot: str) -> SlotKey | None:
    """Map a raw (domain, slot) pair onto the schema, or None if it is not in it."""
    domain = domain.strip().lower()
    slot = slot.strip().lower().replace(" ", "").replace("_", "")
    known = DOMAIN_SLOTS.get(domain)
    if known is None:
        return None
    if slot not in known and slot.startswith("book") and slot[4:] in known:
        slot = slot[4:]
    if slot not in known:
        return None
    return SlotKey(domain, slot)


def _values(raw: Any, did: str, path: str, split_alternatives: bool) -> list[str]:
    if isinstance(raw, str):
        items = raw.split(_ALT) if split_alternatives else [raw]
    elif isinstance(raw, list) and all(isinstance(v, str) for v in raw):
        items = raw
    else:
        raise DatasetError(did, path, f"expected a string or list of strings, got {type(raw).__name__}")
    out: list[str] = []
    seen = set()
    for value in items:
        value = value.strip()
        canon = canonical_value(value)
        if canon in INACTIVE or canon in seen:
            continue
        seen.add(canon)
        out.append(value)
    return out


def _load_json(path: Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise FileNotFoundError(f"missing corpus file {path}") from None
    except json.JSONDecodeError as exc:
        raise DatasetError(path.name, f"line {exc.lineno}", f"invalid JSON ({exc.msg})") from None


def _read_id_list(root: Path, names: Iterable[str]) -> set[str]:
    for name in names:
        path = root / name
        if path.exists():
            return {line.strip() for line in path.read_text().splitlines() if line.strip()}
    return set()


def _finish(
    did: str,
    split: str,
    turns: list[Turn],
    states: list[dict[SlotKey, list[str]]],
    declared: set[str],
) -> DialogueRecord | None:
    state_domains = {k.domain for s in states for k in s}
    declared_in_scope = {d for d in declared if d in DOMAIN_SLOTS}
    if not state_domains and not declared_in_scope:
        return None
    return DialogueRecord(
        id=did,
        turns=tuple(turns),
        states=tuple(GoldStateAnnotation(s) for s in states),
        split=split,
        domains=frozenset(state_domains | declared_in_scope),
    )


def _parse_v21_dialogue(did: str, dialogue: dict[str, Any], split: str) -> DialogueRecord | None:
    try:
        log_entries = dialogue["log"]
    except (KeyError, TypeError):
        raise DatasetError(did, "log", "missing field") from None
    if len(log_entries) % 2:
        log.warning("%s: trailing user turn without annotation dropped", did)
        log_entries = log_entries[:-1]
    turns, states = [], []
    for t in range(len(log_entries) // 2):
        user, system_after = log_entries[2 * t], log_entries[2 * t + 1]
        system_before = log_entries[2 * t - 1]["text"] if t else ""
        if "text" not in user:
            raise DatasetError(did, f"log[{2 * t}].text", "missing field")
        metadata = system_after.get("metadata")
        if not isinstance(metadata, dict):
            raise DatasetError(did, f"log[{2 * t + 1}].metadata", "missing belief state")
        state: dict[SlotKey, list[str]] = {}
        for domain, content in metadata.items():
            if domain.lower() in EXCLUDED_DOMAINS:
                continue
            for part in ("semi", "book"):
                for slot, raw in (content.get(part) or {}).items():
                    if slot == "booked":
                        continue
                    key = slot_key(domain, slot)
                    if key is None:
                        continue
                    path = f"log[{2 * t + 1}].metadata.{domain}.{part}.{slot}"
                    values = _values(raw, did, path, split_alternatives=True)
                    if values and key not in state:
                        state[key] = values
        turns.append(Turn(t, system_before, user["text"]))
        states.append(state)
    goal = dialogue.get("goal") or {}
    declared = {d for d, g in goal.items() if isinstance(g, dict) and g}
    return _finish(did, split, turns, states, declared)


def load_v21(root: Path) -> list[DialogueRecord]:
    data = _load_json(root / "data.json")
    if not isinstance(data, dict):
        raise DatasetError("data.json", "$", "expected an object keyed by dialogue id")
    dev = _read_id_list(root, _LIST_FILES["dev"])
    test = _read_id_list(root, _LIST_FILES["test"])
    records = []
    for did, dialogue in data.items():
        if did in INVALID_DIALOGUES:
            continue
        split = "dev" if did in dev else "test" if did in test else "train"
        record = _parse_v21_dialogue(did, dialogue, split)
        if record is not None:
            records.append(record)
    return records


def _parse_v22_dialogue(dialogue: dict[str, Any], split: str, where: str) -> DialogueRecord | None:
    did = dialogue.get("dialogue_id")
    if not did:
        raise DatasetError(where, "dialogue_id", "missing field")
    try:
        raw_turns = dialogue["turns"]
    except KeyError:
        raise DatasetError(did, "turns", "missing field") from None
    turns, states = [], []
    system_before = ""
    for i, raw in enumerate(raw_turns):
        speaker = str(raw.get("speaker", "")).upper()
        if speaker == "SYSTEM":
            system_before = raw.get("utterance", "")
            continue
        if speaker != "USER":
            raise DatasetError(did, f"turns[{i}].speaker", f"unknown speaker {speaker!r}")
        state: dict[SlotKey, list[str]] = {}
        for j, frame in enumerate(raw.get("frames", [])):
            service = str(frame.get("service", "")).lower()
            if service in EXCLUDED_DOMAINS:
                continue
            slot_values = (frame.get("state") or {}).get("slot_values") or {}
            for name, raw_values in slot_values.items():
                domain, _, slot = name.partition("-")
                key = slot_key(domain, slot)
                if key is None or key.domain in EXCLUDED_DOMAINS:
                    continue
                path = f"turns[{i}].frames[{j}].state.slot_values.{name}"
                values = _values(raw_values, did, path, split_alternatives=False)
                if values and key not in state:
                    state[key] = values
        if "utterance" not in raw:
            raise DatasetError(did, f"turns[{i}].utterance", "missing field")
        turns.append(Turn(len(turns), system_before, raw["utterance"]))
        states.append(state)
    declared = {str(s).lower() for s in dialogue.get("services", [])}
    return _finish(did, split, turns, states, declared)


def load_v22(root: Path) -> list[DialogueRecord]:
    records = []
    found = False
    for split, dirname in _SPLIT_DIRS.items():
        for path in sorted((root / dirname).glob("dialogues_*.json")):
            found = True
            data = _load_json(path)
            if not isinstance(data, list):
                raise DatasetError(path.name, "$", "expected a list of dialogues")
            for n, dialogue in enumerate(data):
                if dialogue.get("dialogue_id") in INVALID_DIALOGUES:
                    continue
                record = _parse_v22_dialogue(dialogue, split, f"{path.name}[{n}]")
                if record is not None:
                    records.append(record)
    if not found:
        raise FileNotFoundError(f"no {{train,dev,test}}/dialogues_*.json files under {root}")
    return records


def load_corpus(path: str | Path, version: str) -> list[DialogueRecord]:
    """Read one published MultiWoz release into records, before label normalization.

    Out-of-scope domains are stripped slot by slot, dialogues left without
    any in-scope domain are dropped, and the known-invalid dialogue is
    skipped.
    """
    root = Path(path)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus directory {root} does not exist")
    if version == "2.2":
        records = load_v22(root)
    elif version in ("2.1", "2.4"):
        records = load_v21(root)
    else:
        raise ValueError(f"unsupported MultiWoz version {version!r}; choose from {VERSIONS}")
    log.info("loaded %d dialogues from %s (MultiWoz %s)", len(records), root, version)
    return records


def separator_violations(records: Iterable[DialogueRecord]) -> list[tuple[str, int, str, str]]:
    """Values that would break ';'-delimited targets: (dialogue, turn, slot, value)."""
    found = []
    for record in records:
        for t, state in enumerate(record.states):
            for key, values in state.items():
                for value in values:
                    if ";" in value:
                        found.append((record.id, t, str(key), value))
    return found
