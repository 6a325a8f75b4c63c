"""Synthetic dialogues written in the published MultiWoz on-disk layouts.

Used where the real corpus is unavailable. The generator reproduces the
annotation quirks the pipeline has to cope with: mixed casing, spacing and
spelling variants, names with and without a leading "the", star ratings
written as "4 star", multi-value annotations, variant switches between
turns, slot removals, and out-of-scope police/hospital/bus content.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from tabledst.schema import DOMAIN_SLOTS

VALUES: dict[str, list[str]] = {
    "area": ["centre", "north", "south", "east", "west"],
    "pricerange": ["cheap", "moderate", "expensive"],
    "internet": ["yes", "no"],
    "parking": ["yes", "no"],
    "stars": ["0", "1", "2", "3", "4", "5"],
    "day": ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"],
    "people": [str(n) for n in range(1, 9)],
    "stay": [str(n) for n in range(1, 6)],
    "food": ["italian", "chinese", "indian", "british", "european", "thai", "mexican", "modern european", "gastropub"],
    "time": ["11:30", "12:00", "13:15", "17:45", "18:30", "19:00", "19:30", "20:15"],
    "leaveat": ["05:15", "08:00", "09:30", "10:45", "13:00", "15:15", "17:30", "21:00"],
    "arriveby": ["07:30", "09:00", "11:15", "12:45", "16:00", "18:15", "20:30", "23:00"],
}
HOTEL_TYPES = ["hotel", "guesthouse"]
HOTEL_NAMES = ["acorn guest house", "the cambridge belfry", "the lensfield hotel", "allenbell", "marriott", "hamilton lodge", "a and b guest house", "the gonville hotel"]
RESTAURANT_NAMES = ["the lucky star", "pizza hut city centre", "the golden curry", "nandos", "midsummer house restaurant", "the copper kettle", "curry garden"]
ATTRACTION_TYPES = ["museum", "college", "swimmingpool", "nightclub", "concerthall", "theatre", "park", "architecture"]
ATTRACTION_NAMES = ["the fitzwilliam museum", "kings college", "parkside pools", "club salsa", "the man on the moon", "the cambridge arts theatre", "cherry hinton water play"]
PLACES = ["cambridge", "london kings cross", "stevenage", "ely", "norwich", "peterborough", "bishops stortford", "leicester", "birmingham new street"]

OPENERS = ["hello,", "hi,", "i need some help.", "good afternoon.", ""]
FILLERS = ["thank you.", "that sounds great.", "no, that is all for now.", "can you repeat that?", "okay, perfect."]
SYSTEM_LINES = [
    "i can help with that. anything else?",
    "there are several options available. do you have a preference?",
    "booking was successful. reference number is {ref}.",
    "what else can i do for you?",
    "sure, let me check that for you.",
]

# raw slot naming used by each layout
_V21_BOOK = {"hotel": ("day", "people", "stay"), "restaurant": ("day", "people", "time"), "train": ("people",)}
_V21_NAME = {"arriveby": "arriveBy", "leaveat": "leaveAt"}
_EXTRA = {
    "police": {"semi": {}, "book": {"booked": []}},
    "hospital": {"semi": {"department": ""}, "book": {"booked": []}},
    "bus": {"semi": {"departure": "", "destination": "", "leaveAt": "", "day": ""}, "book": {"booked": []}},
}
_EXCLUDED_SLOTS = {
    "hospital": [("department", ["acute medicine", "paediatrics", "neurology"])],
    "bus": [("departure", PLACES), ("destination", PLACES)],
    "police": [],
}


@dataclass
class RawTurn:
    system: str
    user: str
    state: dict[str, list[str]] = field(default_factory=dict)  # "domain-slot" -> acceptable values


@dataclass
class RawDialogue:
    id: str
    services: list[str]
    turns: list[RawTurn]
    split: str = "train"


def _value_choices(domain: str, slot: str) -> list[str]:
    if slot == "type":
        return HOTEL_TYPES if domain == "hotel" else ATTRACTION_TYPES
    if slot == "name":
        return {"hotel": HOTEL_NAMES, "restaurant": RESTAURANT_NAMES, "attraction": ATTRACTION_NAMES}[domain]
    if slot in ("departure", "destination"):
        return PLACES if domain == "train" else PLACES + HOTEL_NAMES + RESTAURANT_NAMES
    return VALUES[slot]


def _surface(rng: random.Random, domain: str, slot: str, value: str) -> list[str]:
    """Annotation as it might appear in the raw data, noise included."""
    if value == "dontcare":
        return ["dontcare"]
    if slot == "stars" and rng.random() < 0.15:
        return [f"{value} star"]
    if value == "guesthouse" and rng.random() < 0.3:
        return ["guest house"]
    if slot == "name" and rng.random() < 0.2:
        return [value, f"{value} {'hotel' if domain == 'hotel' else 'restaurant' if domain == 'restaurant' else 'attraction'}"]
    if slot == "name" and not value.startswith("the ") and rng.random() < 0.1:
        return [f"the {value}"]
    if rng.random() < 0.08:
        return [value.title()]
    return [value]


def _mention(rng: random.Random, slot: str, value: str) -> str:
    if value == "dontcare":
        return f"i don't care about the {slot}"
    templates = ["i want {v}", "it should be {v}", "{v} please", "something with {s} {v}", "make it {v}"]
    return rng.choice(templates).format(v=value, s=slot)


def generate_dialogue(rng: random.Random, did: str, extra_domain: str | None = None) -> RawDialogue:
    n_domains = rng.choices([1, 2, 3], weights=[35, 50, 15])[0]
    domains = rng.sample(list(DOMAIN_SLOTS), n_domains)
    services = list(domains)
    state: dict[str, list[str]] = {}
    turns: list[RawTurn] = []
    system = ""

    def add_turn(user: str) -> None:
        nonlocal system
        turns.append(RawTurn(system, user, {k: list(v) for k, v in state.items()}))
        system = rng.choice(SYSTEM_LINES).format(ref=f"{rng.randrange(16**8):08x}")

    if extra_domain:
        services.append(extra_domain)
        insert_at = rng.randrange(len(domains) + 1)
        domains = domains[:insert_at] + [extra_domain] + domains[insert_at:]

    for domain in domains:
        if domain in _EXCLUDED_SLOTS:
            for slot, choices in _EXCLUDED_SLOTS[domain]:
                state[f"{domain}-{slot}"] = [rng.choice(choices)]
            add_turn(f"i also need the {domain}, please.")
            continue
        slots = list(DOMAIN_SLOTS[domain])
        rng.shuffle(slots)
        pending = slots[: rng.randint(2, min(6, len(slots)))]
        while pending:
            n = rng.randint(1, 3)
            batch, pending = pending[:n], pending[n:]
            parts = [rng.choice(OPENERS)] if not turns else []
            for slot in batch:
                value = "dontcare" if rng.random() < 0.05 else rng.choice(_value_choices(domain, slot))
                state[f"{domain}-{slot}"] = _surface(rng, domain, slot, value)
                parts.append(_mention(rng, slot, value))
            add_turn(" ".join(p for p in parts if p) + ".")
            if rng.random() < 0.3:
                add_turn(rng.choice(FILLERS))
        key = f"{domain}-{rng.choice(DOMAIN_SLOTS[domain])}"
        roll = rng.random()
        if key in state and roll < 0.15:
            value = rng.choice(_value_choices(*key.split("-")))
            state[key] = [value]
            add_turn(f"actually, change that to {value}.")
        elif key in state and roll < 0.22:
            del state[key]
            add_turn(f"forget about the {key.split('-')[1]}.")
        elif key in state and state[key][0] in ("guesthouse", "guest house") and roll < 0.5:
            state[key] = ["guest house" if state[key][0] == "guesthouse" else "guesthouse"]
            add_turn(rng.choice(FILLERS))
    add_turn(rng.choice(FILLERS))
    return RawDialogue(did, services, turns)


def generate_corpus(n_dialogues: int, seed: int = 0, excluded_only: int = 3, with_invalid: bool = True) -> list[RawDialogue]:
    """``n_dialogues`` in-scope dialogues plus a few that must be filtered out."""
    rng = random.Random(seed)
    dialogues = []
    for i in range(n_dialogues):
        extra = rng.choice(sorted(_EXCLUDED_SLOTS)) if rng.random() < 0.04 else None
        prefix = "MUL" if rng.random() < 0.6 else "SNG" if extra is None else "PMUL"
        did = f"{prefix}{i:04d}.json"
        dialogue = generate_dialogue(rng, did, extra)
        dialogue.split = rng.choices(["train", "dev", "test"], weights=[80, 10, 10])[0]
        dialogues.append(dialogue)
    for j in range(excluded_only):
        domain = sorted(_EXCLUDED_SLOTS)[j % 3]
        turns = [RawTurn("", f"i need the {domain}.", {}), RawTurn("which one?", "the nearest one.", {})]
        for slot, choices in _EXCLUDED_SLOTS[domain]:
            for turn in turns:
                turn.state[f"{domain}-{slot}"] = [choices[0]]
        dialogues.append(RawDialogue(f"SNG9{j:03d}.json", [domain], turns))
    if with_invalid:
        bad = generate_dialogue(rng, "SNG01862.json")
        dialogues.append(bad)
    return dialogues


def worked_example_dialogue() -> RawDialogue:
    """The first two turns of the worked example dialogue used in the docs and tests."""
    return RawDialogue(
        "MUL0003.json",
        ["hotel"],
        [
            RawTurn(
                "",
                "I'm looking for a place to stay. It needs to be a guesthouse and include free wifi.",
                {"hotel-type": ["guesthouse"], "hotel-internet": ["yes"]},
            ),
            RawTurn(
                "There are 23 hotels that meet your needs. Would you like to narrow your search by area and/or price range?",
                "I would like for it to be cheap and include free parking.",
                {"hotel-type": ["guesthouse"], "hotel-internet": ["yes"], "hotel-parking": ["yes"], "hotel-pricerange": ["cheap"]},
            ),
        ],
    )


# ---------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------


def _v21_metadata(state: dict[str, list[str]]) -> dict:
    meta = {}
    for domain, slots in DOMAIN_SLOTS.items():
        book_slots = _V21_BOOK.get(domain, ())
        semi = {_V21_NAME.get(s, s): "" for s in slots if s not in book_slots}
        book = {"booked": [], **{s: "" for s in book_slots}}
        meta[domain] = {"book": book, "semi": semi}
    for domain, content in _EXTRA.items():
        meta[domain] = json.loads(json.dumps(content))
    for key, values in state.items():
        domain, slot = key.split("-")
        part = "book" if slot in _V21_BOOK.get(domain, ()) else "semi"
        meta[domain][part][_V21_NAME.get(slot, slot)] = "|".join(values)
    return meta


def write_v21(root: str | Path, dialogues: list[RawDialogue]) -> Path:
    """``data.json`` plus validation/test id lists (the 2.1 and 2.4 layout)."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    data = {}
    for d in dialogues:
        log = []
        for i, turn in enumerate(d.turns):
            log.append({"text": turn.user, "metadata": {}, "dialog_act": {}, "span_info": []})
            system_after = d.turns[i + 1].system if i + 1 < len(d.turns) else "goodbye."
            log.append({"text": system_after, "metadata": _v21_metadata(turn.state), "dialog_act": {}, "span_info": []})
        goal = {s: ({"info": {}} if s in d.services else {}) for s in list(DOMAIN_SLOTS) + list(_EXTRA)}
        data[d.id] = {"goal": goal, "log": log}
    (root / "data.json").write_text(json.dumps(data))
    (root / "valListFile.txt").write_text("\n".join(d.id for d in dialogues if d.split == "dev") + "\n")
    (root / "testListFile.txt").write_text("\n".join(d.id for d in dialogues if d.split == "test") + "\n")
    return root


def _v22_name(key: str) -> str:
    domain, slot = key.split("-")
    if slot in _V21_BOOK.get(domain, ()):
        slot = "book" + slot
    return f"{domain}-{slot}"


def write_v22(root: str | Path, dialogues: list[RawDialogue], per_file: int = 256) -> Path:
    """``{train,dev,test}/dialogues_NNN.json`` (the 2.2 layout)."""
    root = Path(root)
    for split in ("train", "dev", "test"):
        rows = []
        for d in dialogues:
            if d.split != split:
                continue
            turns = []
            for i, turn in enumerate(d.turns):
                if i:
                    turns.append({"speaker": "SYSTEM", "turn_id": str(2 * i - 1), "utterance": turn.system, "frames": []})
                frames = []
                for service in d.services:
                    values = {_v22_name(k): v for k, v in turn.state.items() if k.split("-")[0] == service}
                    frames.append({
                        "service": service,
                        "state": {"active_intent": "NONE", "requested_slots": [], "slot_values": values},
                        "slots": [],
                        "actions": [],
                    })
                turns.append({"speaker": "USER", "turn_id": str(2 * i), "utterance": turn.user, "frames": frames})
            turns.append({"speaker": "SYSTEM", "turn_id": str(2 * len(d.turns) - 1), "utterance": "goodbye.", "frames": []})
            rows.append({"dialogue_id": d.id, "services": d.services, "turns": turns})
        folder = root / split
        folder.mkdir(parents=True, exist_ok=True)
        for n in range(0, max(len(rows), 1), per_file):
            (folder / f"dialogues_{n // per_file + 1:03d}.json").write_text(json.dumps(rows[n:n + per_file]))
    return root


def write_layout(root: str | Path, dialogues: list[RawDialogue], version: str) -> Path:
    if version == "2.2":
        return write_v22(root, dialogues)
    if version in ("2.1", "2.4"):
        return write_v21(root, dialogues)
    raise ValueError(f"unsupported version {version!r}")
