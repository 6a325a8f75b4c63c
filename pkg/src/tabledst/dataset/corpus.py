"""The internal corpus file: one normalized dialogue per line."""

from __future__ import annotations

import os
from typing import Any, Iterable

from tabledst.dataset.records import DialogueRecord
from tabledst.io import make_meta, read_jsonl, write_jsonl


def write_corpus(path: str | os.PathLike, records: Iterable[DialogueRecord], **meta: Any) -> int:
    return write_jsonl(path, make_meta("corpus", **meta), (r.to_json() for r in records))


def read_corpus(path: str | os.PathLike) -> tuple[dict[str, Any], list[DialogueRecord]]:
    meta, rows = read_jsonl(path)
    if meta and meta.get("kind") != "corpus":
        raise ValueError(f"{path} is a {meta.get('kind')!r} file, not a corpus")
    return meta, [DialogueRecord.from_json(row) for row in rows]
