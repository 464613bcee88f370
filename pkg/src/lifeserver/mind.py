"""Aggregate query engine, attribution, and fee settlement.

Enterprises submit declarative queries; the engine answers with aggregates
only (never record-level data), refuses to answer below a minimum matched
count, and emits an attribution document weighting each data source by the
number of records it contributed.  Settlement turns the paid fee plus that
attribution document into ledger entries, atomically.
"""

from __future__ import annotations

import hashlib
import json
import uuid
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import vdp as vdp_mod
from .datastore import (
    BadPredicate,
    DerivedRecord,
    Ledger,
    LedgerEntry,
    LedgerKind,
    Privacy,
    _match,
    now_ms,
)
from .sealed import open_envelope
from .vdp import (
    ExternalRef,
    ResolutionLimits,
    VdpDocument,
    build_attribution_vdp,
    distribute,
    parse_vdp,
    resolve,
    serialize_vdp,
)

AGGREGATES = ("count", "sum", "mean", "min", "max")
COMPARATORS = ("<", "<=", "=", ">=", ">", "!=")


class InsufficientData(Exception):
    pass


class FeeTooLow(Exception):
    pass


class ResolutionFailed(Exception):
    pass


@dataclass(frozen=True)
class MindQuery:
    record_types: frozenset
    time_range: tuple  # (start_ms, end_ms) inclusive
    aggregate: str  # one of AGGREGATES
    aggregate_field: Optional[str] = None  # required unless count
    predicates: tuple = ()
    group_by: Optional[str] = None
    offered_fee: int = 0
    enterprise_payout_address: Optional[dict] = None

    def validate(self):
        start, end = self.time_range
        if start > end:
            raise ValueError("time_range start must be <= end")
        if self.aggregate not in AGGREGATES:
            raise ValueError("unknown aggregate %r" % self.aggregate)
        if self.aggregate != "count" and not self.aggregate_field:
            raise ValueError("aggregate %r requires a field" % self.aggregate)
        if self.offered_fee < 0:
            raise ValueError("offered_fee must be >= 0")
        for pred in self.predicates:
            if len(pred) != 3 or pred[1] not in COMPARATORS:
                raise BadPredicate("malformed predicate %r" % (pred,))

    @classmethod
    def from_json(cls, obj: dict) -> "MindQuery":
        return cls(
            record_types=frozenset(obj["record_types"]),
            time_range=(obj["time_range"][0], obj["time_range"][1]),
            aggregate=obj["aggregate"],
            aggregate_field=obj.get("aggregate_field"),
            predicates=tuple(tuple(p) for p in obj.get("predicates", ())),
            group_by=obj.get("group_by"),
            offered_fee=obj.get("offered_fee", 0),
            enterprise_payout_address=obj.get("enterprise_payout_address"),
        )


@dataclass(frozen=True)
class Insight:
    result: object  # scalar, or group -> scalar map
    matched_count: int
    attribution: VdpDocument
    fee_charged: int
    query_ref: str

    def to_json(self) -> dict:
        return {
            "result": self.result,
            "matched_count": self.matched_count,
            "attribution": json.loads(serialize_vdp(self.attribution)),
            "fee_charged": self.fee_charged,
            "query_ref": self.query_ref,
        }


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


class MindEngine:
    """Query execution over the public sense store plus whitelisted derived
    records exported by the private node (when reachable)."""

    def __init__(self, store, derived_store=None, k_min=5, min_fee=0,
                 ls_retention=0, resolution_limits=ResolutionLimits()):
        self.store = store
        self.derived_store = derived_store
        self.k_min = k_min
        self.min_fee = min_fee
        self.ls_retention = Fraction(str(ls_retention))
        if not 0 <= self.ls_retention <= 1:
            raise ValueError("ls_retention must be within [0, 1]")
        self.resolution_limits = resolution_limits
        self._insights = {}  # query_ref -> Insight, for later settlement

    def execute_query(self, query: MindQuery) -> Insight:
        query.validate()
        if query.offered_fee < self.min_fee:
            raise FeeTooLow("offered fee %d below minimum %d"
                            % (query.offered_fee, self.min_fee))
        matched = self._matching_records(query)
        if len(matched) < self.k_min:
            raise InsufficientData(
                "%d matching records, need %d" % (len(matched), self.k_min))
        if query.group_by is None:
            result = _aggregate(query, matched)
        else:
            groups = {}
            for rec in matched:
                key = rec["fields"].get(query.group_by)
                if key is None:
                    continue
                groups.setdefault(str(key), []).append(rec)
            # groups below the threshold are suppressed entirely
            result = {key: _aggregate(query, recs)
                      for key, recs in sorted(groups.items())
                      if len(recs) >= self.k_min}
        attribution = self._attribution(matched)
        insight = Insight(result=result, matched_count=len(matched),
                          attribution=attribution,
                          fee_charged=query.offered_fee,
                          query_ref=uuid.uuid4().hex)
        self._insights[insight.query_ref] = insight
        return insight

    def get_insight(self, query_ref: str) -> Optional[Insight]:
        return self._insights.get(query_ref)

    def _matching_records(self, query: MindQuery):
        """Normalized matching records as dicts with source_id/fields.

        Sealed raw payloads are invisible here: sealed records carry no
        queryable fields by schema, and the store never exposes payloads.
        """
        rows = []
        records = self.store.query(record_types=query.record_types,
                                   time_range=query.time_range,
                                   predicates=list(query.predicates))
        for rec in records:
            if rec.privacy is Privacy.SEALED:
                continue
            rows.append({"source_id": rec.source_id,
                         "source_vdp": rec.source_vdp,
                         "fields": rec.fields})
        if self.derived_store is not None:
            start, end = query.time_range
            for d in self.derived_store.scan():
                if d.feature_name not in query.record_types:
                    continue
                if not (start <= d.timestamp <= end):
                    continue
                fields = {"value": d.feature_value}
                if not all(_match(fields, p) for p in query.predicates):
                    continue
                rows.append({"source_id": "private-node",
                             "source_vdp": None, "fields": fields})
        if query.aggregate != "count":
            rows = [r for r in rows
                    if _is_number(r["fields"].get(query.aggregate_field))]
        return rows

    def _attribution(self, matched) -> VdpDocument:
        counts = {}
        payees = {}
        for row in matched:
            sid = row["source_id"]
            counts[sid] = counts.get(sid, 0) + 1
            if sid not in payees:
                payees[sid] = _payee_node(sid, row["source_vdp"])
        return build_attribution_vdp(
            {sid: (counts[sid], payees[sid]) for sid in counts})

    def settle(self, insight: Insight, fee: int, ledger: Ledger,
               fetcher=None) -> list:
        """Record the paid fee and the apportioned payment instructions.

        All-or-nothing: resolution and apportionment run to completion
        before the first ledger write.
        """
        if fee != insight.fee_charged:
            raise ValueError("fee %d does not match quoted %d"
                             % (fee, insight.fee_charged))
        try:
            resolved = resolve(insight.attribution,
                               fetcher or _refuse_fetch,
                               self.resolution_limits)
        except vdp_mod.VdpError as exc:
            raise ResolutionFailed(str(exc))
        to_distribute = int(fee * (1 - self.ls_retention))
        retention = fee - to_distribute
        instructions = distribute(resolved, to_distribute)
        ts = now_ms()
        entries = [LedgerEntry(tx_id=uuid.uuid4().hex, timestamp=ts,
                               kind=LedgerKind.FEE_RECEIVED, amount=fee,
                               query_ref=insight.query_ref)]
        for instr in instructions:
            entries.append(LedgerEntry(
                tx_id=uuid.uuid4().hex, timestamp=ts,
                kind=LedgerKind.PAYMENT_INSTRUCTION, amount=instr.amount,
                query_ref=insight.query_ref,
                counterparty_address={"scheme": instr.address.scheme,
                                      "address": instr.address.address}))
        if retention:
            entries.append(LedgerEntry(
                tx_id=uuid.uuid4().hex, timestamp=ts,
                kind=LedgerKind.PAYMENT_INSTRUCTION, amount=retention,
                query_ref=insight.query_ref, counterparty_address=None))
        paid = sum(e.amount for e in entries[1:])
        assert paid == fee, "settlement conservation violated"
        for entry in entries:
            ledger.append(entry)
        return entries


def _refuse_fetch(url):
    raise IOError("no fetcher configured for %s" % url)


def _payee_node(source_id, source_vdp):
    if isinstance(source_vdp, str):
        return ExternalRef(url=source_vdp)
    if isinstance(source_vdp, dict):
        return parse_vdp(json.dumps(source_vdp)).root
    # sources without payment metadata still appear in the attribution,
    # with an unroutable placeholder address
    return vdp_mod.Payee(crypto=vdp_mod.CryptoAddress(
        scheme="other", address="unattributed:%s" % source_id))


def _aggregate(query, rows):
    if query.aggregate == "count":
        return len(rows)
    values = [r["fields"][query.aggregate_field] for r in rows]
    if query.aggregate == "sum":
        return sum(values)
    if query.aggregate == "min":
        return min(values)
    if query.aggregate == "max":
        return max(values)
    # mean: exact sum over exact count, rendered to float at the edge
    total = Fraction(0)
    for v in values:
        total += Fraction(v) if isinstance(v, int) else Fraction(str(v))
    return float(total / len(values))


WHITELISTED_FEATURES = ("byte_length", "content_digest")


def extract_features(private_key: bytes, envelope, origin_record_id: str):
    """Open a sealed payload on the private node and emit whitelisted stub
    features; the plaintext is dropped on return."""
    plaintext = open_envelope(private_key, envelope)
    ts = now_ms()
    return [
        DerivedRecord(record_id=uuid.uuid4().hex,
                      origin_record_id=origin_record_id,
                      feature_name="byte_length",
                      feature_value=len(plaintext), timestamp=ts),
        DerivedRecord(record_id=uuid.uuid4().hex,
                      origin_record_id=origin_record_id,
                      feature_name="content_digest",
                      feature_value=hashlib.sha256(plaintext).hexdigest(),
                      timestamp=ts),
    ]
