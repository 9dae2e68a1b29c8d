"""Append-only results store: JSONL records plus per-record side files.

Layout under the store directory::

    records.jsonl            one ExperimentRecord per line
    artifacts/<id>/...       CSV tables, PGM rasters and plot scripts

Numbers in side files are written as shortest round-trip decimal strings,
so the files do not depend on the platform's binary float format.
"""
from __future__ import annotations

import csv
import fcntl
import io
import json
from collections import OrderedDict
from contextlib import contextmanager
from pathlib import Path

from .errors import StoreCorrupt
from .records import ExperimentRecord, Status, jsonable

RECORDS = "records.jsonl"
ARTIFACTS = "artifacts"
LOCK = ".lock"


def decimal(x) -> str:
    """Decimal string for a table cell."""
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    v = jsonable(x)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(t, (int, float)) for t in v):
        return f"{v[0]!r}{'+' if v[1] >= 0 else '-'}{abs(v[1])!r}j"
    return json.dumps(v)


class ResultStore:
    """Directory-backed store with an advisory lock for the single writer."""

    def __init__(self, path):
        self.path = Path(path)

    @property
    def records_path(self) -> Path:
        return self.path / RECORDS

    def exists(self) -> bool:
        return self.path.is_dir()

    def create(self) -> "ResultStore":
        (self.path / ARTIFACTS).mkdir(parents=True, exist_ok=True)
        self.records_path.touch(exist_ok=True)
        return self

    @contextmanager
    def locked(self):
        self.create()
        with open(self.path / LOCK, "w") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX)
            try:
                yield
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)

    def records(self) -> list[ExperimentRecord]:
        """Every stored record in append order.

        Raises
        ------
        StoreCorrupt
            If a line is not valid JSON or its id does not match its content.
        """
        if not self.records_path.exists():
            return []
        out = []
        with open(self.records_path) as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    out.append(ExperimentRecord.from_dict(json.loads(line)))
                except (ValueError, KeyError, TypeError) as exc:
                    raise StoreCorrupt(f"{self.records_path}:{lineno}: {exc}") from exc
        return out

    def get(self, record_id: str) -> ExperimentRecord | None:
        for rec in self.records():
            if rec.id == record_id:
                return rec
        return None

    def append(self, rec: ExperimentRecord) -> ExperimentRecord:
        """Add ``rec`` unless a record with the same id is already stored; return the stored one."""
        with self.locked():
            existing = self.get(rec.id)
            if existing is not None:
                return existing
            with open(self.records_path, "a") as fh:
                fh.write(rec.to_json() + "\n")
        return rec

    def artifact_dir(self, record_id: str) -> Path:
        d = self.path / ARTIFACTS / record_id
        d.mkdir(parents=True, exist_ok=True)
        return d

    def write_csv(self, record_id: str, name: str, header, rows) -> Path:
        path = self.artifact_dir(record_id) / name
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([decimal(c) for c in row])
        return path

    def write_bytes(self, record_id: str, name: str, data: bytes) -> Path:
        path = self.artifact_dir(record_id) / name
        path.write_bytes(data)
        return path

    def write_plot_script(self, record_id: str, name: str, title: str, layers: list) -> Path:
        """Renderer-agnostic plot description: data files plus generic drawing commands.

        Each layer is a dict with ``kind`` (``line`` or ``scatter``), ``csv``,
        ``x``, ``y`` and optional ``label`` and ``style``.
        """
        path = self.artifact_dir(record_id) / name
        path.write_text(json.dumps({"title": title, "layers": layers}, indent=2) + "\n")
        return path


def summarize(records, module: str | None = None) -> list[dict]:
    """Per-conjecture counts over ``records`` (optionally one module only)."""
    rows: "OrderedDict[str, dict]" = OrderedDict()
    for rec in records:
        if module is not None and rec.module != module:
            continue
        for v in rec.verdicts:
            row = rows.setdefault(v.conjecture_tag, {"conjecture_tag": v.conjecture_tag, "module": rec.module,
                                                     "runs": 0, "supported": 0, "counterexamples": 0,
                                                     "not_applicable": 0, "heuristic": 0})
            row["runs"] += 1
            key = {Status.SUPPORTED: "supported", Status.COUNTEREXAMPLE: "counterexamples",
                   Status.NOT_APPLICABLE: "not_applicable", Status.HEURISTIC: "heuristic"}[v.status]
            row[key] += 1
    return sorted(rows.values(), key=lambda r: r["conjecture_tag"])


COLUMNS = ("conjecture_tag", "module", "runs", "supported", "counterexamples", "not_applicable", "heuristic")


def report(store_path, module: str | None = None) -> tuple[list[dict], str, str]:
    """Summary rows, CSV text and a fixed-width text table for a store.

    Raises
    ------
    StoreCorrupt
        If the store directory does not exist or a record cannot be read.
    """
    store = ResultStore(store_path)
    if not store.exists():
        raise StoreCorrupt(f"no store at {store_path}")
    rows = summarize(store.records(), module)
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([r[c] for c in COLUMNS])
    widths = [max([len(c)] + [len(str(r[c])) for r in rows]) for c in COLUMNS]
    lines = ["  ".join(c.ljust(wd) for c, wd in zip(COLUMNS, widths))]
    lines += ["  ".join(str(r[c]).ljust(wd) for c, wd in zip(COLUMNS, widths)) for r in rows]
    return rows, buf.getvalue(), "\n".join(lines) + "\n"
