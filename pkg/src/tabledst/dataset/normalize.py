"""Label normalization for noisy MultiWoz annotations.

The rules only widen the acceptable-value lists, except for the hotel star
rating where a trailing "star" is dropped in place.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from tabledst.dataset.records import DialogueRecord
from tabledst.state import GoldStateAnnotation, SlotKey, canonical_value


def _keys(*names: str) -> frozenset[SlotKey]:
    return frozenset(SlotKey.parse(n) for n in names)


@dataclass(frozen=True)
class NormalizationRuleSet:
    spacing_variants: tuple[tuple[str, str], ...] = (
        ("guest house", "guesthouse"),
        ("swimming pool", "swimmingpool"),
        ("night club", "nightclub"),
        ("concert hall", "concerthall"),
    )
    spacing_slots: frozenset[SlotKey] = field(
        default=_keys("hotel-type", "attraction-type", "hotel-name", "attraction-name")
    )
    spelling_variants: tuple[tuple[str, str], ...] = (("centre", "center"), ("theatre", "theater"))
    spelling_slots: frozenset[SlotKey] = field(
        default=_keys("hotel-area", "restaurant-area", "attraction-area", "attraction-type")
    )
    strip_leading_the: frozenset[SlotKey] = field(
        default=_keys("hotel-name", "restaurant-name", "attraction-name")
    )
    strip_star_suffix: frozenset[SlotKey] = field(default=_keys("hotel-stars"))

    @property
    def affected_slots(self) -> frozenset[SlotKey]:
        return self.spacing_slots | self.spelling_slots | self.strip_leading_the | self.strip_star_suffix


DEFAULT_RULES = NormalizationRuleSet()

_STAR = re.compile(r"^(.*?)\s*-?\s*stars?$")


def _swap(value: str, pairs: tuple[tuple[str, str], ...]) -> list[str]:
    out = []
    for a, b in pairs:
        for src, dst in ((a, b), (b, a)):
            pattern = re.compile(rf"\b{re.escape(src)}\b")
            if pattern.search(value):
                out.append(pattern.sub(dst, value))
    return out


def _variants(key: SlotKey, value: str, rules: NormalizationRuleSet) -> list[str]:
    value = canonical_value(value)
    out = []
    if key in rules.spacing_slots:
        out += _swap(value, rules.spacing_variants)
    if key in rules.spelling_slots:
        out += _swap(value, rules.spelling_variants)
    if key in rules.strip_leading_the and value.startswith("the ") and len(value) > 4:
        out.append(value[4:].strip())
    return out


def strip_star(value: str) -> str:
    # repeated so "4 star stars" and similar collapse in one pass
    while (match := _STAR.match(value.strip())) and match.group(1):
        value = match.group(1)
    return value


def normalize_values(key: SlotKey, values: tuple[str, ...], rules: NormalizationRuleSet) -> tuple[str, ...]:
    if key in rules.strip_star_suffix:
        values = tuple(strip_star(v) for v in values)
    out: list[str] = []
    seen: set[str] = set()
    queue = list(values)
    while queue:
        value = queue.pop(0)
        canon = canonical_value(value)
        if canon in seen:
            continue
        seen.add(canon)
        out.append(value)
        queue.extend(_variants(key, value, rules))
    return tuple(out)


def normalize_state(state: GoldStateAnnotation, rules: NormalizationRuleSet = DEFAULT_RULES) -> GoldStateAnnotation:
    return GoldStateAnnotation((k, normalize_values(k, v, rules)) for k, v in state.items())


def normalize_labels(record: DialogueRecord, rules: NormalizationRuleSet = DEFAULT_RULES) -> DialogueRecord:
    return replace(record, states=tuple(normalize_state(s, rules) for s in record.states))
