"""Line-delimited JSON files with a metadata header, written atomically."""

from __future__ import annotations

import csv
import json
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterable, Iterator, TextIO

from tabledst import __version__

META_KEY = "__meta__"


def make_meta(kind: str, **fields: Any) -> dict[str, Any]:
    return {"kind": kind, "engine_version": __version__, **fields}


@contextmanager
def atomic_open(path: str | os.PathLike, newline: str | None = None) -> Iterator[TextIO]:
    """Write to a sibling temp file and rename it into place on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline=newline) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def write_jsonl(path: str | os.PathLike, meta: dict[str, Any], rows: Iterable[dict[str, Any]]) -> int:
    count = 0
    with atomic_open(path) as fh:
        fh.write(json.dumps({META_KEY: meta}, ensure_ascii=False) + "\n")
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
            count += 1
    return count


def read_jsonl(path: str | os.PathLike) -> tuple[dict[str, Any], list[dict[str, Any]]]:
    meta: dict[str, Any] = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            if lineno == 1 and META_KEY in obj:
                meta = obj[META_KEY]
            else:
                rows.append(obj)
    return meta, rows


def write_tsv(path: str | os.PathLike, meta: dict[str, Any], header: list[str], rows: Iterable[list[Any]]) -> int:
    count = 0
    with atomic_open(path, newline="") as fh:
        fh.write("# " + json.dumps(meta, ensure_ascii=False) + "\n")
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
            count += 1
    return count


def read_tsv(path: str | os.PathLike) -> tuple[dict[str, Any], list[dict[str, str]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline()
        meta = json.loads(first[2:]) if first.startswith("# ") else {}
        if not meta:
            fh.seek(0)
        return meta, list(csv.DictReader(fh, delimiter="\t"))
