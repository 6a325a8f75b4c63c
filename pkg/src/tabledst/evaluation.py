"""Joint goal accuracy and per-slot diagnostics."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from tabledst.dataset.records import DialogueRecord
from tabledst.schema import SLOT_SET
from tabledst.state import DialogueState, GoldStateAnnotation, SlotKey, state_equals
from tabledst.templating import ContextConfig
from tabledst.tracker import Generator, StateSource, track_corpus

ERROR_CLASSES = ("missing", "spurious", "wrong_value", "invalid")


@dataclass(frozen=True)
class TurnEval:
    joint_correct: bool
    missing_slots: frozenset[SlotKey] = frozenset()
    spurious_slots: frozenset[SlotKey] = frozenset()
    wrong_value_slots: frozenset[SlotKey] = frozenset()
    invalid_slots: frozenset[SlotKey] = frozenset()

    def to_json(self) -> dict:
        return {
            "joint_correct": self.joint_correct,
            **{f"{c}_slots": sorted(map(str, getattr(self, f"{c}_slots"))) for c in ERROR_CLASSES},
        }


def evaluate_turn(pred: DialogueState, gold: GoldStateAnnotation, schema: frozenset[SlotKey] | None = None) -> TurnEval:
    missing = gold.slots - pred.slots
    spurious = pred.slots - gold.slots
    wrong = frozenset(k for k in pred.slots & gold.slots if not gold.accepts(k, pred[k]))
    invalid = frozenset(k for k in pred.slots if k not in (schema or SLOT_SET))
    correct = state_equals(pred, gold)
    return TurnEval(correct, missing, spurious, wrong, invalid)


@dataclass
class SlotScore:
    true_positive: int = 0
    predicted: int = 0
    gold: int = 0

    @property
    def precision(self) -> float:
        return self.true_positive / self.predicted if self.predicted else 1.0

    @property
    def recall(self) -> float:
        return self.true_positive / self.gold if self.gold else 1.0


@dataclass
class TrackingReport:
    turns: int = 0
    joint_correct: int = 0
    slots: dict[str, SlotScore] = field(default_factory=dict)
    errors: Counter = field(default_factory=Counter)
    turn_evals: list[tuple[str, int, TurnEval]] = field(default_factory=list)

    @property
    def jga(self) -> float:
        return self.joint_correct / self.turns if self.turns else 0.0

    def summary(self) -> dict:
        return {
            "turns": self.turns,
            "joint_correct": self.joint_correct,
            "jga": self.jga,
            "errors": {c: self.errors.get(c, 0) for c in ERROR_CLASSES},
        }

    def slot_rows(self) -> list[dict]:
        return [
            {"slot": s, "precision": sc.precision, "recall": sc.recall, "tp": sc.true_positive, "predicted": sc.predicted, "gold": sc.gold}
            for s, sc in sorted(self.slots.items())
        ]

    def error_dump(self) -> list[dict]:
        return [{"dialogue": d, "turn": t, **ev.to_json()} for d, t, ev in self.turn_evals if not ev.joint_correct]

    def render(self) -> str:
        lines = [
            f"turns          {self.turns}",
            f"joint correct  {self.joint_correct}",
            f"JGA            {self.jga:.4f}",
            "",
            "slot-level errors: " + ", ".join(f"{c}={self.errors.get(c, 0)}" for c in ERROR_CLASSES),
            "",
            f"{'slot':<24}{'precision':>10}{'recall':>10}{'gold':>8}",
        ]
        for row in self.slot_rows():
            lines.append(f"{row['slot']:<24}{row['precision']:>10.4f}{row['recall']:>10.4f}{row['gold']:>8}")
        return "\n".join(lines)


def evaluate_run(
    predictions: Sequence[Sequence[DialogueState]],
    golds: Sequence[Sequence[GoldStateAnnotation]],
    schema: frozenset[SlotKey] | None = None,
    schema_filter: bool = False,
    ids: Sequence[str] | None = None,
) -> TrackingReport:
    """Score aligned per-dialogue prediction and gold sequences.

    ``schema_filter`` removes predicted slots outside ``schema`` before
    scoring; they are still reported as invalid.
    """
    if len(predictions) != len(golds):
        raise ValueError(f"{len(predictions)} predicted dialogues vs {len(golds)} gold dialogues")
    report = TrackingReport()
    allowed = schema or SLOT_SET
    for n, (pred_seq, gold_seq) in enumerate(zip(predictions, golds)):
        did = ids[n] if ids is not None else str(n)
        if len(pred_seq) != len(gold_seq):
            raise ValueError(f"dialogue {did}: {len(pred_seq)} predicted turns vs {len(gold_seq)} gold turns")
        for t, (pred, gold) in enumerate(zip(pred_seq, gold_seq)):
            invalid = frozenset(k for k in pred if k not in allowed)
            if schema_filter and invalid:
                pred = DialogueState(((k, v) for k, v in pred.items() if k in allowed), pred.kind)
            ev = evaluate_turn(pred, gold, allowed)
            if schema_filter:
                ev = TurnEval(ev.joint_correct, ev.missing_slots, ev.spurious_slots, ev.wrong_value_slots, invalid)
            report.turns += 1
            report.joint_correct += ev.joint_correct
            report.turn_evals.append((did, t, ev))
            for cls in ERROR_CLASSES:
                report.errors[cls] += len(getattr(ev, f"{cls}_slots"))
            for key in pred.slots | gold.slots:
                score = report.slots.setdefault(str(key), SlotScore())
                if key in pred:
                    score.predicted += 1
                if key in gold:
                    score.gold += 1
                if key in pred and gold.accepts(key, pred[key]):
                    score.true_positive += 1
    return report


def evaluate_records(results: Iterable, records: Sequence[DialogueRecord], schema_filter: bool = False) -> TrackingReport:
    """Evaluate tracker results (anything with ``.id`` and ``.states``) against records."""
    by_id = {r.id: r for r in records}
    preds, golds, ids = [], [], []
    for result in results:
        if result.id not in by_id:
            raise ValueError(f"run contains unknown dialogue {result.id}")
        preds.append(result.states)
        golds.append(by_id[result.id].states)
        ids.append(result.id)
    return evaluate_run(preds, golds, schema_filter=schema_filter, ids=ids)


@dataclass(frozen=True)
class SourceComparison:
    jga_predicted: float
    jga_gold_fed: float

    @property
    def gap(self) -> float:
        return self.jga_gold_fed - self.jga_predicted


def compare_state_sources(records: Sequence[DialogueRecord], generator: Generator, cfg: ContextConfig, workers: int | None = 1) -> SourceComparison:
    """JGA when feeding back predicted states vs. the gold previous state."""
    predicted = track_corpus(records, generator, cfg, StateSource.PREDICTED, workers=workers)
    gold_fed = track_corpus(records, generator, cfg, StateSource.GOLD, workers=workers)
    return SourceComparison(
        evaluate_records(predicted, records).jga,
        evaluate_records(gold_fed, records).jga,
    )
