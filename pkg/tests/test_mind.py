import json

import pytest

from lifeserver.datastore import (
    DerivedStore,
    Ledger,
    LedgerKind,
    Privacy,
    RecordStore,
    SenseRecord,
    new_record_id,
)
from lifeserver.mind import (
    FeeTooLow,
    InsufficientData,
    MindEngine,
    MindQuery,
    ResolutionFailed,
    extract_features,
)
from lifeserver.sealed import generate_keypair, seal
from lifeserver.vdp import distribute
from conftest import FIG_TREE_JSON


def record(source, bpm, ts, record_type="heart_rate", vdp=None):
    return SenseRecord(record_id=new_record_id(), source_id=source,
                       source_vdp=vdp if vdp is not None
                       else {"version": 1, "crypto": {"bitcoin": "1" + source}},
                       timestamp=ts, record_type=record_type,
                       privacy=Privacy.PUBLIC, fields={"bpm": bpm})


def hr_query(fee=0, aggregate="mean", **kw):
    return MindQuery(record_types=frozenset({"heart_rate"}),
                     time_range=(0, 10**12), aggregate=aggregate,
                     aggregate_field=None if aggregate == "count" else "bpm",
                     offered_fee=fee, **kw)


@pytest.fixture
def engine(tmp_path):
    store = RecordStore(str(tmp_path / "sense.pub.ndjson"))
    eng = MindEngine(store, k_min=5)
    yield eng
    store.close()


def test_mean_example(engine):
    for i, bpm in enumerate([60, 70, 80, 90, 100, 110]):
        engine.store.append(record("watch", bpm, ts=i + 1))
    insight = engine.execute_query(hr_query())
    assert insight.result == 85.0
    assert insight.matched_count == 6


def test_empty_store_insufficient(engine):
    with pytest.raises(InsufficientData):
        engine.execute_query(hr_query())


def test_threshold_boundary(engine):
    for i in range(4):
        engine.store.append(record("watch", 70, ts=i + 1))
    with pytest.raises(InsufficientData):
        engine.execute_query(hr_query())
    engine.store.append(record("watch", 70, ts=9))
    assert engine.execute_query(hr_query()).matched_count == 5


def test_fee_too_low(tmp_path):
    store = RecordStore(str(tmp_path / "s.ndjson"))
    eng = MindEngine(store, k_min=1, min_fee=100)
    store.append(record("w", 70, 1))
    with pytest.raises(FeeTooLow):
        eng.execute_query(hr_query(fee=99))
    eng.execute_query(hr_query(fee=100))
    store.close()


def test_attribution_weights_by_record_count(tmp_path):
    store = RecordStore(str(tmp_path / "s.ndjson"))
    eng = MindEngine(store, k_min=4)
    for i in range(3):
        store.append(record("A", 60 + i, ts=i + 1))
    store.append(record("B", 90, ts=10))
    insight = eng.execute_query(hr_query())
    by_id = {c.id: c.shares for c in insight.attribution.root.children}
    assert by_id == {"A": 3, "B": 1}
    amounts = {i.path[0]: i.amount
               for i in distribute(insight.attribution, 1000)}
    assert amounts == {"A": 750, "B": 250}
    store.close()


def test_sealed_records_invisible(tmp_path):
    store = RecordStore(str(tmp_path / "s.ndjson"))
    keys = generate_keypair()
    for i in range(5):
        store.append(record("w", 70, ts=i + 1))
    store.append(SenseRecord(
        record_id=new_record_id(), source_id="mic", source_vdp=None,
        timestamp=3, record_type="heart_rate", privacy=Privacy.SEALED,
        fields={}, sealed_payload=seal(keys.public_key, b"raw audio")))
    eng = MindEngine(store, k_min=5)
    insight = eng.execute_query(hr_query(aggregate="count"))
    assert insight.matched_count == 5
    store.close()


def test_group_by_suppression(tmp_path):
    store = RecordStore(str(tmp_path / "s.ndjson"))
    eng = MindEngine(store, k_min=3)
    for i in range(4):
        store.append(SenseRecord(
            record_id=new_record_id(), source_id="w", source_vdp=None,
            timestamp=i + 1, record_type="heart_rate", privacy=Privacy.PUBLIC,
            fields={"bpm": 60 + i, "activity": "rest"}))
    store.append(SenseRecord(
        record_id=new_record_id(), source_id="w", source_vdp=None,
        timestamp=9, record_type="heart_rate", privacy=Privacy.PUBLIC,
        fields={"bpm": 150, "activity": "run"}))
    insight = eng.execute_query(hr_query(aggregate="count", group_by="activity"))
    assert insight.result == {"rest": 4}  # "run" group is below k_min
    assert insight.matched_count == 5
    store.close()


def test_no_raw_data_in_insight(tmp_path):
    store = RecordStore(str(tmp_path / "s.ndjson"))
    eng = MindEngine(store, k_min=2)
    sentinel = "EXTREMELY-UNIQUE-FIELD-VALUE"
    for i in range(3):
        store.append(SenseRecord(
            record_id=new_record_id(), source_id="w", source_vdp=None,
            timestamp=i + 1, record_type="note", privacy=Privacy.PRIVATE,
            fields={"text": sentinel, "score": i}))
    insight = eng.execute_query(MindQuery(
        record_types=frozenset({"note"}), time_range=(0, 100),
        aggregate="sum", aggregate_field="score"))
    assert sentinel not in json.dumps(insight.to_json())
    store.close()


def test_derived_records_queryable(tmp_path):
    from lifeserver.datastore import DerivedRecord
    store = RecordStore(str(tmp_path / "s.ndjson"))
    derived = DerivedStore(str(tmp_path / "d.ndjson"))
    for i in range(3):
        derived.append(DerivedRecord(record_id=new_record_id(),
                                     origin_record_id="o", feature_name="byte_length",
                                     feature_value=100 * (i + 1), timestamp=i + 1))
    eng = MindEngine(store, derived_store=derived, k_min=3)
    insight = eng.execute_query(MindQuery(
        record_types=frozenset({"byte_length"}), time_range=(0, 100),
        aggregate="max", aggregate_field="value"))
    assert insight.result == 300
    store.close()
    derived.close()


def test_settle_happy_path(tmp_path):
    store = RecordStore(str(tmp_path / "s.ndjson"))
    ledger = Ledger(str(tmp_path / "l.ndjson"))
    eng = MindEngine(store, k_min=4)
    for i in range(3):
        store.append(record("A", 60, ts=i + 1))
    store.append(record("B", 90, ts=10))
    insight = eng.execute_query(hr_query(fee=1000))
    entries = eng.settle(insight, 1000, ledger)
    assert entries[0].kind is LedgerKind.FEE_RECEIVED
    assert entries[0].amount == 1000
    paid = {e.counterparty_address["address"]: e.amount for e in entries[1:]}
    assert paid == {"1A": 750, "1B": 250}
    assert ledger.read(insight.query_ref) == entries
    store.close()
    ledger.close()


def test_settle_zero_fee(tmp_path):
    store = RecordStore(str(tmp_path / "s.ndjson"))
    ledger = Ledger(str(tmp_path / "l.ndjson"))
    eng = MindEngine(store, k_min=2)
    for i in range(2):
        store.append(record("A", 60, ts=i + 1))
    insight = eng.execute_query(hr_query(fee=0))
    entries = eng.settle(insight, 0, ledger)
    assert [e.amount for e in entries] == [0, 0]  # count preserved
    store.close()
    ledger.close()


def test_settle_retention(tmp_path):
    store = RecordStore(str(tmp_path / "s.ndjson"))
    ledger = Ledger(str(tmp_path / "l.ndjson"))
    eng = MindEngine(store, k_min=1, ls_retention=0.1)
    store.append(record("A", 60, 1))
    insight = eng.execute_query(hr_query(fee=1000))
    entries = eng.settle(insight, 1000, ledger)
    assert sum(e.amount for e in entries[1:]) == 1000
    retention = [e for e in entries[1:] if e.counterparty_address is None]
    assert [e.amount for e in retention] == [100]
    store.close()
    ledger.close()


def test_settle_unreachable_vdp_aborts_atomically(tmp_path):
    store = RecordStore(str(tmp_path / "s.ndjson"))
    ledger = Ledger(str(tmp_path / "l.ndjson"))
    eng = MindEngine(store, k_min=1)
    store.append(record("A", 60, 1, vdp="https://down.example.org/a.vdp"))
    insight = eng.execute_query(hr_query(fee=500))

    def fetch_404(url):
        raise IOError("404 for %s" % url)

    with pytest.raises(ResolutionFailed):
        eng.settle(insight, 500, ledger, fetcher=fetch_404)
    assert ledger.scan() == []  # no partial writes
    store.close()
    ledger.close()


def test_settle_fee_mismatch(tmp_path):
    store = RecordStore(str(tmp_path / "s.ndjson"))
    ledger = Ledger(str(tmp_path / "l.ndjson"))
    eng = MindEngine(store, k_min=1)
    store.append(record("A", 60, 1))
    insight = eng.execute_query(hr_query(fee=100))
    with pytest.raises(ValueError):
        eng.settle(insight, 99, ledger)
    store.close()
    ledger.close()


def test_settle_resolves_external_source_vdp(tmp_path):
    store = RecordStore(str(tmp_path / "s.ndjson"))
    ledger = Ledger(str(tmp_path / "l.ndjson"))
    eng = MindEngine(store, k_min=1)
    store.append(record("A", 60, 1, vdp="mem://team.vdp"))

    def fetch(url):
        assert url == "mem://team.vdp"
        return json.dumps(FIG_TREE_JSON).encode()

    insight = eng.execute_query(hr_query(fee=10000))
    entries = eng.settle(insight, 10000, ledger, fetcher=fetch)
    amounts = sorted(e.amount for e in entries[1:])
    assert amounts == [300, 4850, 4850]
    store.close()
    ledger.close()


# -- feature extraction ----------------------------------------------------

def test_extract_features_byte_length():
    keys = generate_keypair()
    env = seal(keys.public_key, bytes(4096))
    features = {f.feature_name: f.feature_value
                for f in extract_features(keys.private_key, env, "origin-1")}
    assert features["byte_length"] == 4096


def test_extract_features_digest_deterministic():
    keys = generate_keypair()
    a = seal(keys.public_key, b"identical plaintext")
    b = seal(keys.public_key, b"identical plaintext")
    assert a != b
    da = {f.feature_name: f.feature_value
          for f in extract_features(keys.private_key, a, "o1")}
    db = {f.feature_name: f.feature_value
          for f in extract_features(keys.private_key, b, "o2")}
    assert da["content_digest"] == db["content_digest"]
    assert b"identical plaintext".hex() not in da["content_digest"]


def test_extract_features_tampered_envelope():
    from lifeserver.sealed import AuthError, SealedEnvelope
    keys = generate_keypair()
    env = seal(keys.public_key, b"data")
    bad = SealedEnvelope(env.key_id, env.wrapped_key, env.nonce,
                         env.ciphertext, bytes(len(env.auth_tag)))
    with pytest.raises(AuthError):
        extract_features(keys.private_key, bad, "o1")
