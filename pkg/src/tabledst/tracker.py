"""Recursive state tracking with a pluggable sequence generator.

A generator maps a context string to a target string. The engine ships an
oracle that plays back gold targets, a noisy oracle for error-propagation
studies, and an external generator speaking newline-delimited JSON
(``{"context": ...}`` -> ``{"output": ...}``) over a child process's stdio or
HTTP POST.
"""

from __future__ import annotations

import enum
import json
import logging
import os
import queue
import random
import shlex
import subprocess
import threading
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Protocol, Sequence

from tabledst.dataset.records import DialogueRecord
from tabledst.dataset.targets import gold_targets, turn_seed
from tabledst.interpreter import apply
from tabledst.ops import Insert, Operation, OperationSet, ParseOutcome, parse_ops, serialize_ops
from tabledst.schema import SLOTS, in_schema
from tabledst.state import NONE_VALUE, DialogueState, SlotKey, StateKind, canonical_value
from tabledst.templating import ContextConfig, build_context

log = logging.getLogger(__name__)


class GeneratorError(RuntimeError):
    """Transport-level failure; the tracker retries and then falls back to "none"."""


class Generator(Protocol):
    deterministic: bool
    max_concurrency: int | None

    def generate(self, context: str, *, dialogue_id: str | None = None, turn: int | None = None) -> str: ...


class StateSource(enum.Enum):
    PREDICTED = "predicted"
    GOLD = "gold"


# ---------------------------------------------------------------------------
# Built-in generators
# ---------------------------------------------------------------------------


class ConstantGenerator:
    deterministic = True
    max_concurrency = None

    def __init__(self, output: str = NONE_VALUE) -> None:
        self.output = output

    def generate(self, context: str, *, dialogue_id: str | None = None, turn: int | None = None) -> str:
        return self.output


class OracleGenerator:
    """Plays back gold targets.

    Lookup is by (dialogue id, turn) when the tracker supplies them, and by
    the exact teacher-forced context string otherwise.
    """

    deterministic = True
    max_concurrency = None

    def __init__(self, targets: dict[tuple[str, int], OperationSet], contexts: dict[str, tuple[str, int]] | None = None, seed: int | None = None) -> None:
        self.targets = targets
        self.contexts = contexts or {}
        self.seed = seed

    @classmethod
    def from_records(cls, records: Iterable[DialogueRecord], cfg: ContextConfig | None = None, seed: int | None = None) -> OracleGenerator:
        targets: dict[tuple[str, int], OperationSet] = {}
        contexts: dict[str, tuple[str, int]] = {}
        for record in records:
            states, ops = gold_targets(record)
            for t, target in enumerate(ops):
                targets[(record.id, t)] = target
                if cfg is not None:
                    prev = states[t - 1] if t else DialogueState((), StateKind.GOLD)
                    ctx = build_context(record.turns[t], prev, cfg.window(record.turns, t), cfg)
                    contexts[ctx] = (record.id, t)
        return cls(targets, contexts, seed)

    def lookup(self, context: str, dialogue_id: str | None, turn: int | None) -> tuple[tuple[str, int], OperationSet]:
        key = (dialogue_id, turn) if dialogue_id is not None and turn is not None else self.contexts.get(context)
        if key is None or key not in self.targets:
            raise KeyError(f"oracle has no target for {key or 'this context'}")
        return key, self.targets[key]

    def generate(self, context: str, *, dialogue_id: str | None = None, turn: int | None = None) -> str:
        key, ops = self.lookup(context, dialogue_id, turn)
        order = None if self.seed is None else turn_seed(self.seed, key[0], key[1], "ops")
        return serialize_ops(ops, order)


@dataclass(frozen=True)
class NoiseModel:
    """Per-operation perturbation probabilities.

    Random draws are keyed on (seed, dialogue, turn, slot), so two models with
    the same seed are coupled: every perturbation made at a lower level is
    also made at any componentwise higher level.
    """

    p_drop: float = 0.0
    p_corrupt_value: float = 0.0
    p_spurious: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("p_drop", "p_corrupt_value", "p_spurious"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")

    @classmethod
    def parse(cls, spec: str) -> NoiseModel:
        """Parse ``"p_drop=0.05,p_corrupt_value=0.05,seed=3"`` style specs."""
        aliases = {"drop": "p_drop", "corrupt": "p_corrupt_value", "p_corrupt": "p_corrupt_value", "spurious": "p_spurious"}
        fields = {}
        for item in filter(None, (s.strip() for s in spec.split(","))):
            name, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"noise spec item {item!r} is not name=value")
            name = aliases.get(name.strip(), name.strip())
            if name not in ("p_drop", "p_corrupt_value", "p_spurious", "seed"):
                raise ValueError(f"unknown noise parameter {name!r}")
            fields[name] = int(value) if name == "seed" else float(value)
        return cls(**fields)


class NoisyOracle:
    deterministic = True
    max_concurrency = None

    def __init__(self, oracle: OracleGenerator, noise: NoiseModel, value_pool: dict[SlotKey, list[str]] | None = None) -> None:
        self.oracle = oracle
        self.noise = noise
        if value_pool is None:
            value_pool = {}
            for ops in oracle.targets.values():
                for op in ops.inserts:
                    value_pool.setdefault(op.slot, []).append(canonical_value(op.value))
        self.value_pool = {k: sorted(set(v)) for k, v in value_pool.items()}
        self.all_values = sorted({v for vs in self.value_pool.values() for v in vs}) or ["unknown"]

    def _draws(self, key: tuple[str, int], slot: SlotKey) -> random.Random:
        return random.Random(f"{self.noise.seed}:{key[0]}:{key[1]}:{slot}")

    def _wrong_value(self, rng: random.Random, slot: SlotKey, value: str) -> str:
        pool = [v for v in self.value_pool.get(slot, ()) if v != canonical_value(value)]
        if not pool:
            pool = [v for v in self.all_values if v != canonical_value(value)] or [f"{value} x"]
        return rng.choice(pool)

    def perturb(self, key: tuple[str, int], ops: OperationSet) -> OperationSet:
        noise = self.noise
        out: list[Operation] = []
        for op in ops:
            rng = self._draws(key, op.slot)
            u_drop, u_corrupt = rng.random(), rng.random()
            if u_drop < noise.p_drop:
                continue
            if isinstance(op, Insert) and u_corrupt < noise.p_corrupt_value:
                op = Insert(op.slot, self._wrong_value(rng, op.slot, op.value))
            out.append(op)
        rng = random.Random(f"{noise.seed}:{key[0]}:{key[1]}:spurious")
        u_spurious = rng.random()
        free = [s for s in SLOTS if s not in {op.slot for op in ops}]
        slot = rng.choice(free) if free else None
        if slot is not None and u_spurious < noise.p_spurious:
            out.append(Insert(slot, self._wrong_value(rng, slot, NONE_VALUE)))
        return OperationSet(tuple(out))

    def generate(self, context: str, *, dialogue_id: str | None = None, turn: int | None = None) -> str:
        key, ops = self.oracle.lookup(context, dialogue_id, turn)
        order = None if self.oracle.seed is None else turn_seed(self.oracle.seed, key[0], key[1], "ops")
        return serialize_ops(self.perturb(key, ops), order)


# ---------------------------------------------------------------------------
# External generators
# ---------------------------------------------------------------------------


def _decode_response(line: str) -> str:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise GeneratorError(f"malformed response: {exc.msg}") from None
    if not isinstance(obj, dict) or not isinstance(obj.get("output"), str):
        raise GeneratorError("malformed response: expected an object with a string 'output'")
    return obj["output"]


class SubprocessGenerator:
    """Child process reading one JSON request per line on stdin."""

    deterministic = False
    max_concurrency = 1

    def __init__(self, command: str | Sequence[str], timeout: float = 30.0) -> None:
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout
        self._lock = threading.Lock()
        self._proc: subprocess.Popen | None = None
        self._lines: queue.Queue = queue.Queue()

    def _start(self) -> subprocess.Popen:
        if self._proc is not None and self._proc.poll() is None:
            return self._proc
        try:
            proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise GeneratorError(f"cannot start generator {self.command!r}: {exc}") from None
        lines: queue.Queue = queue.Queue()

        def pump() -> None:
            for line in proc.stdout:
                lines.put(line)
            lines.put(None)

        threading.Thread(target=pump, daemon=True).start()
        self._proc, self._lines = proc, lines
        return proc

    def close(self) -> None:
        if self._proc is not None:
            self._proc.kill()
            self._proc.wait()
            self._proc = None

    def __enter__(self) -> SubprocessGenerator:
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def generate(self, context: str, *, dialogue_id: str | None = None, turn: int | None = None) -> str:
        with self._lock:
            proc = self._start()
            try:
                proc.stdin.write(json.dumps({"context": context}) + "\n")
                proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                self.close()
                raise GeneratorError(f"generator process is gone: {exc}") from None
            try:
                line = self._lines.get(timeout=self.timeout)
            except queue.Empty:
                # a late answer would desynchronise the stream, so restart
                self.close()
                raise GeneratorError(f"timed out after {self.timeout}s") from None
            if line is None:
                self.close()
                raise GeneratorError("generator process closed its output")
            return _decode_response(line)


class HttpGenerator:
    deterministic = False
    max_concurrency = None

    def __init__(self, url: str, timeout: float = 30.0) -> None:
        self.url = url
        self.timeout = timeout

    def generate(self, context: str, *, dialogue_id: str | None = None, turn: int | None = None) -> str:
        body = json.dumps({"context": context}).encode("utf-8")
        request = urllib.request.Request(self.url, data=body, headers={"Content-Type": "application/json"}, method="POST")
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                payload = response.read().decode("utf-8")
        except (urllib.error.URLError, TimeoutError, ConnectionError, OSError) as exc:
            raise GeneratorError(f"request to {self.url} failed: {exc}") from None
        return _decode_response(payload.strip().splitlines()[0] if payload.strip() else "")


def external_generator(descriptor: str, timeout: float = 30.0) -> SubprocessGenerator | HttpGenerator:
    """``exec:CMD`` or ``http:URL`` (``http://`` and ``https://`` URLs are taken as is)."""
    if descriptor.startswith("exec:"):
        return SubprocessGenerator(descriptor[5:], timeout)
    if descriptor.startswith(("http://", "https://")):
        return HttpGenerator(descriptor, timeout)
    if descriptor.startswith("http:"):
        return HttpGenerator(descriptor[5:], timeout)
    raise ValueError(f"unknown generator descriptor {descriptor!r}")


# ---------------------------------------------------------------------------
# Tracking loop
# ---------------------------------------------------------------------------


@dataclass
class TurnResult:
    index: int
    context: str
    output: str
    state: DialogueState
    parse: ParseOutcome
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "output": self.output,
            "state": self.state.to_dict(),
            "discarded": [list(d) for d in self.parse.discarded],
            "warnings": self.warnings,
        }


@dataclass
class DialogueResult:
    id: str
    turns: list[TurnResult]

    @property
    def states(self) -> list[DialogueState]:
        return [t.state for t in self.turns]

    def to_json(self) -> dict:
        return {"id": self.id, "turns": [t.to_json() for t in self.turns]}


@dataclass(frozen=True)
class TrackingOptions:
    retries: int = 2
    schema_filter: bool = False
    none_inserts_delete: bool = False


def _call(gen: Generator, context: str, record_id: str, t: int, retries: int) -> tuple[str, list[str]]:
    notes = []
    for attempt in range(retries + 1):
        try:
            return gen.generate(context, dialogue_id=record_id, turn=t), notes
        except GeneratorError as exc:
            notes.append(f"generator-error attempt {attempt + 1}: {exc}")
    notes.append("fallback to none")
    return NONE_VALUE, notes


def track_dialogue(
    record: DialogueRecord,
    gen: Generator,
    cfg: ContextConfig,
    src: StateSource = StateSource.PREDICTED,
    options: TrackingOptions = TrackingOptions(),
) -> DialogueResult:
    """Run the generate-parse-apply loop over one dialogue.

    In ``GOLD`` mode the context and the state the operations are applied
    to are the single-valued gold state of the previous turn, so each turn
    is judged without inherited errors.
    """
    gold_states = gold_targets(record)[0] if src is StateSource.GOLD else None
    state = DialogueState((), StateKind.PREDICTED)
    results = []
    for t, turn in enumerate(record.turns):
        if gold_states is not None:
            prev = gold_states[t - 1].as_kind(StateKind.PREDICTED) if t else DialogueState((), StateKind.PREDICTED)
        else:
            prev = state
        context = build_context(turn, prev, cfg.window(record.turns, t), cfg)
        output, notes = _call(gen, context, record.id, t, options.retries)
        outcome = parse_ops(output, none_inserts_delete=options.none_inserts_delete)
        if options.schema_filter:
            kept = tuple(op for op in outcome.ops if in_schema(op.slot))
            dropped = tuple((op.render(), "slot outside schema") for op in outcome.ops if not in_schema(op.slot))
            outcome = ParseOutcome(OperationSet(kept), outcome.discarded + dropped)
        state, warnings = apply(prev, outcome.ops)
        results.append(TurnResult(t, context, output, state, outcome, notes + [str(w) for w in warnings]))
    return DialogueResult(record.id, results)


def default_workers() -> int:
    return os.cpu_count() or 1


def track_corpus(
    records: Sequence[DialogueRecord],
    gen: Generator,
    cfg: ContextConfig,
    src: StateSource = StateSource.PREDICTED,
    options: TrackingOptions = TrackingOptions(),
    workers: int | None = None,
) -> list[DialogueResult]:
    """Track dialogues concurrently; turns inside a dialogue stay sequential."""
    workers = workers or default_workers()
    limit = getattr(gen, "max_concurrency", None)
    if limit is not None:
        workers = min(workers, limit)
    if workers <= 1:
        return [track_dialogue(r, gen, cfg, src, options) for r in records]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: track_dialogue(r, gen, cfg, src, options), records))


def make_generator(descriptor: str, records: Sequence[DialogueRecord], cfg: ContextConfig, seed: int | None = None, timeout: float = 30.0) -> Generator:
    """Build a generator from a CLI descriptor: ``oracle``, ``noisy:SPEC``, ``exec:CMD``, ``http:URL``."""
    if descriptor == "oracle":
        return OracleGenerator.from_records(records, cfg, seed)
    if descriptor.startswith("noisy:"):
        noise = NoiseModel.parse(descriptor[6:])
        if "seed" not in descriptor and seed is not None:
            noise = replace(noise, seed=seed)
        return NoisyOracle(OracleGenerator.from_records(records, cfg, seed), noise)
    return external_generator(descriptor, timeout)

