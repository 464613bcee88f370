"""Append-only persistence: sense records, derived records, settlement ledger.

One newline-delimited JSON object per record, one file per store.  Ledger
appends fsync; sense appends flush.  Indexes are in-memory and rebuilt by a
full scan on startup, which is fine at the target scale.
"""

from __future__ import annotations

import base64
import enum
import errno
import json
import os
import time
import uuid
from dataclasses import dataclass, field
from typing import Optional

from .sealed import SealedEnvelope


class Privacy(enum.Enum):
    PUBLIC = "public"
    PRIVATE = "private"
    SEALED = "sealed"


class DuplicateId(Exception):
    pass


class StorageFull(Exception):
    pass


class SchemaViolation(Exception):
    pass


class BadPredicate(Exception):
    pass


def new_record_id() -> str:
    return uuid.uuid4().hex  # 128 bits


def now_ms() -> int:
    return int(time.time() * 1000)


@dataclass(frozen=True)
class SenseRecord:
    record_id: str
    source_id: str
    source_vdp: object  # inline document (dict) or URL string
    timestamp: int  # UTC milliseconds
    record_type: str
    privacy: Privacy
    fields: dict = field(default_factory=dict)
    sealed_payload: Optional[SealedEnvelope] = None

    def validate(self):
        if not self.record_id:
            raise SchemaViolation("record_id required")
        if self.timestamp <= 0:
            raise SchemaViolation("timestamp must be > 0")
        if not self.source_id:
            raise SchemaViolation("source_id required")
        if self.privacy is Privacy.SEALED:
            if self.sealed_payload is None:
                raise SchemaViolation("sealed record requires sealed_payload")
            if self.fields:
                raise SchemaViolation("sealed record must carry no plaintext fields")
        elif self.sealed_payload is not None:
            raise SchemaViolation("sealed_payload only valid at privacy=sealed")
        for name, value in self.fields.items():
            if not isinstance(value, (int, float, str)) or isinstance(value, bool):
                raise SchemaViolation("field %r must be number or text" % name)

    def to_json(self) -> dict:
        obj = {
            "record_id": self.record_id,
            "source_id": self.source_id,
            "source_vdp": self.source_vdp,
            "timestamp": self.timestamp,
            "record_type": self.record_type,
            "privacy": self.privacy.value,
            "fields": self.fields,
        }
        if self.sealed_payload is not None:
            obj["sealed_payload"] = base64.b64encode(
                self.sealed_payload.to_bytes()).decode("ascii")
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "SenseRecord":
        sealed = obj.get("sealed_payload")
        return cls(
            record_id=obj["record_id"],
            source_id=obj["source_id"],
            source_vdp=obj["source_vdp"],
            timestamp=obj["timestamp"],
            record_type=obj["record_type"],
            privacy=Privacy(obj["privacy"]),
            fields=obj.get("fields", {}),
            sealed_payload=(SealedEnvelope.from_bytes(base64.b64decode(sealed))
                            if sealed else None),
        )


@dataclass(frozen=True)
class DerivedRecord:
    record_id: str
    origin_record_id: str
    feature_name: str
    feature_value: object  # number or text
    timestamp: int

    def validate(self):
        if not self.record_id or not self.origin_record_id:
            raise SchemaViolation("record ids required")
        if self.timestamp <= 0:
            raise SchemaViolation("timestamp must be > 0")

    def to_json(self) -> dict:
        return {
            "record_id": self.record_id,
            "origin_record_id": self.origin_record_id,
            "feature_name": self.feature_name,
            "feature_value": self.feature_value,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DerivedRecord":
        return cls(**obj)


class LedgerKind(enum.Enum):
    FEE_RECEIVED = "fee_received"
    PAYMENT_INSTRUCTION = "payment_instruction"


@dataclass(frozen=True)
class LedgerEntry:
    tx_id: str
    timestamp: int
    kind: LedgerKind
    amount: int
    query_ref: str
    counterparty_address: Optional[dict] = None  # {"scheme":..., "address":...}

    def validate(self):
        if self.amount < 0:
            raise SchemaViolation("ledger amounts must be >= 0")

    def to_json(self) -> dict:
        return {
            "tx_id": self.tx_id,
            "timestamp": self.timestamp,
            "kind": self.kind.value,
            "amount": self.amount,
            "query_ref": self.query_ref,
            "counterparty_address": self.counterparty_address,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LedgerEntry":
        obj = dict(obj)
        obj["kind"] = LedgerKind(obj["kind"])
        return cls(**obj)


class _NdjsonFile:
    """Shared append-only ndjson backing with startup replay."""

    def __init__(self, path, fsync=False):
        self.path = path
        self.fsync = fsync
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        self._fh = open(path, "a+", encoding="utf-8")

    def replay(self):
        self._fh.seek(0)
        for line in self._fh:
            line = line.strip()
            if line:
                yield json.loads(line)
        self._fh.seek(0, os.SEEK_END)

    def append(self, obj):
        try:
            self._fh.write(json.dumps(obj, separators=(",", ":"),
                                      ensure_ascii=False) + "\n")
            self._fh.flush()
            if self.fsync:
                os.fsync(self._fh.fileno())
        except OSError as exc:
            if exc.errno == errno.ENOSPC:
                raise StorageFull(str(exc))
            raise

    def close(self):
        self._fh.close()


class RecordStore:
    """Append-only store for SenseRecords with id/timestamp indexes."""

    def __init__(self, path, fsync=False):
        self._file = _NdjsonFile(path, fsync=fsync)
        self._records = []
        self._by_id = {}
        for obj in self._file.replay():
            rec = SenseRecord.from_json(obj)
            self._by_id[rec.record_id] = rec
            self._records.append(rec)

    def __len__(self):
        return len(self._records)

    def append(self, record: SenseRecord) -> str:
        record.validate()
        if record.record_id in self._by_id:
            raise DuplicateId(record.record_id)
        self._file.append(record.to_json())
        self._by_id[record.record_id] = record
        self._records.append(record)
        return record.record_id

    def get(self, record_id: str) -> Optional[SenseRecord]:
        return self._by_id.get(record_id)

    def scan(self):
        """All records in insertion order."""
        return list(self._records)

    def query(self, record_types=None, time_range=None, predicates=None):
        """Records satisfying every conjunct, in timestamp order."""
        out = []
        for rec in self._records:
            if record_types is not None and rec.record_type not in record_types:
                continue
            if time_range is not None:
                start, end = time_range
                if not (start <= rec.timestamp <= end):
                    continue
            if predicates and not all(
                    _match(rec.fields, p) for p in predicates):
                continue
            out.append(rec)
        out.sort(key=lambda r: r.timestamp)
        return out

    def close(self):
        self._file.close()


COMPARATORS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "=": lambda a, b: a == b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
    "!=": lambda a, b: a != b,
}
_ORDERING = {"<", "<=", ">=", ">"}


def _match(fields, predicate):
    name, op, constant = predicate
    if op not in COMPARATORS:
        raise BadPredicate("unknown comparator %r" % op)
    if name not in fields:
        return False
    value = fields[name]
    if op in _ORDERING:
        numeric = lambda v: isinstance(v, (int, float)) and not isinstance(v, bool)
        if not numeric(value) or not numeric(constant):
            raise BadPredicate(
                "ordering comparator %r needs numeric operands for field %r"
                % (op, name))
    return COMPARATORS[op](value, constant)


class DerivedStore:
    def __init__(self, path, fsync=False):
        self._file = _NdjsonFile(path, fsync=fsync)
        self._records = [DerivedRecord.from_json(o) for o in self._file.replay()]
        self._by_id = {r.record_id: r for r in self._records}

    def __len__(self):
        return len(self._records)

    def append(self, record: DerivedRecord) -> str:
        record.validate()
        if record.record_id in self._by_id:
            raise DuplicateId(record.record_id)
        self._file.append(record.to_json())
        self._by_id[record.record_id] = record
        self._records.append(record)
        return record.record_id

    def scan(self):
        return list(self._records)

    def close(self):
        self._file.close()


class Ledger:
    """Settlement ledger; every append is fsynced."""

    def __init__(self, path):
        self._file = _NdjsonFile(path, fsync=True)
        self._entries = [LedgerEntry.from_json(o) for o in self._file.replay()]

    def append(self, entry: LedgerEntry):
        entry.validate()
        self._file.append(entry.to_json())
        self._entries.append(entry)

    def read(self, query_ref: str):
        """All entries for one settlement, in append order."""
        return [e for e in self._entries if e.query_ref == query_ref]

    def scan(self):
        return list(self._entries)

    def close(self):
        self._file.close()
