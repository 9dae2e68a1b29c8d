"""Experiment records: config, results and conjecture verdicts."""
from __future__ import annotations

import datetime as _dt
import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any

import numpy as np
from gmpy2 import mpc, mpfr

from . import __version__
from .polycore.bignum import to_decimal

CODE_VERSION = __version__


class Status(str, Enum):
    SUPPORTED = "Supported"
    COUNTEREXAMPLE = "CounterexampleFound"
    NOT_APPLICABLE = "NotApplicable"
    HEURISTIC = "Heuristic"


def jsonable(obj: Any) -> Any:
    """Convert results to JSON-safe values; extended-precision numbers become decimal strings."""
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, mpfr):
        return to_decimal(obj)
    if isinstance(obj, mpc):
        return [to_decimal(obj.real), to_decimal(obj.imag)]
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else repr(x)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj: Any) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, separators=(",", ":"))


def record_id(module: str, config: dict, code_version: str = CODE_VERSION) -> str:
    blob = canonical_json({"module": module, "config": config, "code_version": code_version})
    return hashlib.sha256(blob.encode()).hexdigest()[:20]


def now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


@dataclass
class ConjectureVerdict:
    conjecture_tag: str
    status: Status
    tolerances: dict
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"conjecture_tag": self.conjecture_tag, "status": self.status.value,
                "tolerances": jsonable(self.tolerances), "detail": jsonable(self.detail)}

    @classmethod
    def from_dict(cls, d: dict) -> "ConjectureVerdict":
        return cls(d["conjecture_tag"], Status(d["status"]), d.get("tolerances", {}), d.get("detail", {}))


@dataclass
class ExperimentRecord:
    """One experiment run; ``id`` hashes (module, config, code_version) so reruns dedupe."""

    module: str
    config: dict
    results: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)
    started: str = field(default_factory=now)
    finished: str | None = None
    code_version: str = CODE_VERSION

    @property
    def id(self) -> str:
        return record_id(self.module, self.config, self.code_version)

    def add_verdict(self, tag: str, status: Status, tolerances: dict, **detail) -> ConjectureVerdict:
        v = ConjectureVerdict(tag, Status(status), dict(tolerances), detail)
        self.verdicts.append(v)
        return v

    def finish(self) -> "ExperimentRecord":
        self.finished = now()
        return self

    @property
    def has_counterexample(self) -> bool:
        return any(v.status is Status.COUNTEREXAMPLE for v in self.verdicts)

    def statuses(self) -> list[Status]:
        return [v.status for v in self.verdicts]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "module": self.module,
            "config": jsonable(self.config),
            "started": self.started,
            "finished": self.finished,
            "code_version": self.code_version,
            "results": jsonable(self.results),
            "verdicts": [v.to_dict() for v in self.verdicts],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentRecord":
        rec = cls(d["module"], d["config"], d.get("results", {}),
                  [ConjectureVerdict.from_dict(v) for v in d.get("verdicts", [])],
                  d.get("started", ""), d.get("finished"), d.get("code_version", CODE_VERSION))
        if "id" in d and d["id"] != rec.id:
            raise ValueError("record id does not match its content")
        return rec
