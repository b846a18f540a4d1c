"""Line-delimited record files with an embedded provenance header.

Every artifact the pipeline writes starts with a ``{"_meta": {...}}`` line
carrying the tool version and the producing configuration; readers skip it.
No timestamps go into the header, so reruns with identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Iterator
from pathlib import Path
from typing import IO

from . import __version__


def meta_header(command: str, config: dict) -> dict:
    return {"_meta": {"tool": "evidex", "version": __version__, "command": command, "config": config}}


def write_jsonl(
    path: str | Path, records: Iterable[dict], command: str, config: dict | None = None
) -> int:
    """Write records with a leading meta line; returns the data-record count."""
    count = 0
    with Path(path).open("w", encoding="utf-8") as handle:
        handle.write(json.dumps(meta_header(command, config or {}), ensure_ascii=False) + "\n")
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
            count += 1
    return count


def read_jsonl(source: str | Path | IO[str]) -> Iterator[dict]:
    """Yield data records, skipping blank lines and the meta header."""
    if isinstance(source, (str, Path)):
        with Path(source).open(encoding="utf-8") as handle:
            yield from _iter_records(handle)
    else:
        yield from _iter_records(source)


def _iter_records(handle: IO[str]) -> Iterator[dict]:
    for lineno, line in enumerate(handle, start=1):
        if not line.strip():
            continue
        record = json.loads(line)
        if isinstance(record, dict) and "_meta" in record:
            continue
        if not isinstance(record, dict):
            raise ValueError(f"line {lineno}: record is not an object")
        yield record
