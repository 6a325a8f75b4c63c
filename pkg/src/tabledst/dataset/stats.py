"""Corpus statistics and the published reference counts they are checked against."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from tabledst.dataset.records import DialogueRecord

REFERENCE_TOTALS = {"domains": 5, "slots": 30, "dialogues": 9917, "turns": 79793}

_VERSIONS = ("2.1", "2.2", "2.3", "2.4")

_DOMAIN_DIALOGUES = {
    "attraction": (3494, 3484, 3503, 3486),
    "hotel": (4190, 4182, 4228, 4188),
    "restaurant": (4748, 4728, 4765, 4732),
    "taxi": (1879, 1872, 1884, 1875),
    "train": (3940, 3931, 3945, 3936),
}
_DOMAIN_TURNS = {
    "attraction": (24016, 23940, 24144, 23986),
    "hotel": (31416, 31378, 31735, 31399),
    "restaurant": (33201, 33104, 33369, 33121),
    "taxi": (7760, 7708, 7833, 7739),
    "train": (27738, 27699, 27830, 27721),
}
# slot: (dialogues 2.1, 2.2, 2.3, 2.4, turns 2.1, 2.2, 2.3, 2.4)
_SLOT_COUNTS = {
    "attraction-area": (2397, 2396, 2431, 2396, 16232, 16401, 16521, 16277),
    "attraction-name": (2270, 2260, 3348, 2358, 12557, 12710, 18348, 13041),
    "attraction-type": (2502, 2500, 2542, 2503, 16900, 17003, 17203, 16940),
    "hotel-area": (2416, 2417, 2478, 2452, 17213, 17562, 17457, 17490),
    "hotel-day": (2599, 2599, 2620, 2597, 13927, 13963, 14141, 13928),
    "hotel-internet": (1772, 1772, 1953, 1786, 12706, 12920, 13395, 12814),
    "hotel-name": (3039, 3542, 3787, 3154, 16770, 19789, 21920, 17431),
    "hotel-parking": (1819, 1819, 2001, 1848, 12903, 13107, 13617, 13095),
    "hotel-people": (2605, 2605, 2631, 2606, 13889, 13952, 14123, 13935),
    "hotel-pricerange": (2244, 2246, 2324, 2251, 16070, 16337, 16327, 16146),
    "hotel-stars": (1984, 1984, 2035, 1969, 14220, 14475, 14435, 14177),
    "hotel-stay": (2605, 2605, 2624, 2605, 13960, 14024, 14168, 13993),
    "hotel-type": (2262, 2263, 2728, 2242, 16339, 16733, 17891, 16344),
    "restaurant-area": (3414, 3412, 3461, 3400, 22915, 23237, 23119, 22894),
    "restaurant-day": (2626, 2626, 2643, 2626, 14463, 14485, 14643, 14492),
    "restaurant-food": (3605, 3599, 3647, 3605, 24545, 24841, 24822, 24594),
    "restaurant-name": (3230, 3850, 4298, 3358, 16946, 20249, 22978, 17690),
    "restaurant-people": (2635, 2635, 2655, 2638, 14543, 14590, 14747, 14591),
    "restaurant-pricerange": (3331, 3330, 3381, 3314, 22498, 22759, 22793, 22472),
    "restaurant-time": (2620, 2616, 2649, 2621, 14346, 14410, 14548, 14374),
    "taxi-arriveby": (846, 840, 861, 845, 3122, 3158, 3190, 3134),
    "taxi-departure": (1836, 1826, 1840, 1832, 7089, 7087, 7124, 7077),
    "taxi-destination": (1837, 1831, 1841, 1829, 7091, 7117, 7149, 7073),
    "taxi-leaveat": (1071, 1051, 1094, 1063, 3963, 3929, 4077, 3934),
    "train-arriveby": (2111, 2106, 2136, 2106, 13097, 13149, 13220, 13086),
    "train-day": (3793, 3792, 3828, 3793, 24656, 24680, 24854, 24678),
    "train-departure": (3783, 3774, 3832, 3768, 24782, 24792, 25185, 24704),
    "train-destination": (3806, 3799, 3831, 3796, 25254, 25247, 25458, 25201),
    "train-leaveat": (2035, 2023, 2085, 2038, 12622, 12838, 12802, 12753),
    "train-people": (2266, 2266, 2284, 2225, 10858, 10932, 11043, 10700),
}


@dataclass
class CorpusStatistics:
    dialogues: int = 0
    turns: int = 0
    domain_dialogues: Counter = field(default_factory=Counter)
    domain_turns: Counter = field(default_factory=Counter)
    slot_dialogues: Counter = field(default_factory=Counter)
    slot_turns: Counter = field(default_factory=Counter)

    @property
    def domains(self) -> int:
        return len(self.domain_dialogues)

    @property
    def slots(self) -> int:
        return len(self.slot_dialogues)

    def totals(self) -> dict[str, int]:
        return {"domains": self.domains, "slots": self.slots, "dialogues": self.dialogues, "turns": self.turns}

    def to_json(self) -> dict:
        return {
            **self.totals(),
            "domain_dialogues": dict(sorted(self.domain_dialogues.items())),
            "domain_turns": dict(sorted(self.domain_turns.items())),
            "slot_dialogues": dict(sorted(self.slot_dialogues.items())),
            "slot_turns": dict(sorted(self.slot_turns.items())),
        }


def compute_statistics(records: Iterable[DialogueRecord]) -> CorpusStatistics:
    """Counts over gold annotations; a domain or slot "occurs" in a turn when it is active there."""
    stats = CorpusStatistics()
    for record in records:
        stats.dialogues += 1
        stats.turns += len(record)
        seen_domains, seen_slots = set(), set()
        for state in record.states:
            turn_domains = {k.domain for k in state}
            for key in state:
                stats.slot_turns[str(key)] += 1
                seen_slots.add(str(key))
            for domain in turn_domains:
                stats.domain_turns[domain] += 1
            seen_domains |= turn_domains
        stats.domain_dialogues.update(seen_domains)
        stats.slot_dialogues.update(seen_slots)
    return stats


def reference_statistics(version: str) -> CorpusStatistics:
    if version not in _VERSIONS:
        raise ValueError(f"no reference statistics for version {version!r}")
    col = _VERSIONS.index(version)
    ref = CorpusStatistics(dialogues=REFERENCE_TOTALS["dialogues"], turns=REFERENCE_TOTALS["turns"])
    for domain in _DOMAIN_DIALOGUES:
        ref.domain_dialogues[domain] = _DOMAIN_DIALOGUES[domain][col]
        ref.domain_turns[domain] = _DOMAIN_TURNS[domain][col]
    for slot, counts in _SLOT_COUNTS.items():
        ref.slot_dialogues[slot] = counts[col]
        ref.slot_turns[slot] = counts[4 + col]
    return ref


def compare_statistics(observed: CorpusStatistics, version: str) -> list[str]:
    """Exact comparison against the reference counts; returns one line per mismatch."""
    ref = reference_statistics(version)
    problems = []
    for name, want in REFERENCE_TOTALS.items():
        got = observed.totals()[name]
        if got != want:
            problems.append(f"total {name}: observed {got}, reference {want}")
    for table in ("domain_dialogues", "domain_turns", "slot_dialogues", "slot_turns"):
        want_counts, got_counts = getattr(ref, table), getattr(observed, table)
        for key in sorted(set(want_counts) | set(got_counts)):
            if want_counts.get(key, 0) != got_counts.get(key, 0):
                problems.append(f"{table}[{key}]: observed {got_counts.get(key, 0)}, reference {want_counts.get(key, 0)}")
    return problems
