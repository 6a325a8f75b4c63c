"""The 30-slot MultiWoz schema after domain filtering."""

from __future__ import annotations

from tabledst.state import SlotKey

DOMAIN_SLOTS: dict[str, tuple[str, ...]] = {
    "attraction": ("area", "name", "type"),
    "hotel": ("area", "day", "internet", "name", "parking", "people", "pricerange", "stars", "stay", "type"),
    "restaurant": ("area", "day", "food", "name", "people", "pricerange", "time"),
    "taxi": ("arriveby", "departure", "destination", "leaveat"),
    "train": ("arriveby", "day", "departure", "destination", "leaveat", "people"),
}

DOMAINS: tuple[str, ...] = tuple(DOMAIN_SLOTS)
EXCLUDED_DOMAINS = frozenset({"bus", "police", "hospital"})
INVALID_DIALOGUES = frozenset({"SNG01862.json"})

SLOTS: tuple[SlotKey, ...] = tuple(SlotKey(d, s) for d, slots in DOMAIN_SLOTS.items() for s in slots)
SLOT_SET = frozenset(SLOTS)

assert len(SLOTS) == 30


def in_schema(key: SlotKey) -> bool:
    return key in SLOT_SET
