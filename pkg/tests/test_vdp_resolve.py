import json

import pytest

from lifeserver.vdp import (
    CycleError,
    DepthExceeded,
    DocumentBudgetExceeded,
    ExternalRef,
    FetchError,
    Payee,
    ResolutionLimits,
    Split,
    VdpSyntaxError,
    is_resolved,
    parse_vdp,
    resolve,
)


def doc(text):
    return parse_vdp(text)


def fetcher_for(mapping):
    calls = []

    def fetch(url):
        calls.append(url)
        if url not in mapping:
            raise KeyError(url)
        return mapping[url].encode()

    fetch.calls = calls
    return fetch


PAYEE_B = '{"version":1,"crypto":{"bitcoin":"bb"}}'


def test_two_document_chain():
    a = doc('{"version":1,"split":[{"id":"x","shares":1,'
            '"url":"mem://b"}]}')
    resolved = resolve(a, fetcher_for({"mem://b": PAYEE_B}))
    child = resolved.root.children[0]
    assert isinstance(child.node, Payee)
    assert child.node.crypto.address == "bb"
    assert is_resolved(resolved.root)


def test_no_refs_identity(fig_tree):
    resolved = resolve(fig_tree, fetcher_for({}))
    assert resolved == fig_tree


def test_self_reference_cycle():
    a = doc('{"version":1,"url":"mem://a"}')
    with pytest.raises(CycleError):
        resolve(a, fetcher_for({"mem://a": '{"version":1,"url":"mem://a"}'}))


def test_two_cycle():
    mapping = {
        "mem://a": '{"version":1,"url":"mem://b"}',
        "mem://b": '{"version":1,"url":"mem://a"}',
    }
    with pytest.raises(CycleError):
        resolve(doc(mapping["mem://a"]), fetcher_for(mapping))


def test_diamond_fetched_once():
    shared = '{"version":1,"crypto":{"bitcoin":"shared"}}'
    mapping = {
        "mem://left": '{"version":1,"url":"mem://shared"}',
        "mem://right": '{"version":1,"url":"mem://shared"}',
        "mem://shared": shared,
    }
    top = doc('{"version":1,"split":['
              '{"id":"l","shares":1,"url":"mem://left"},'
              '{"id":"r","shares":1,"url":"mem://right"}]}')
    fetch = fetcher_for(mapping)
    resolved = resolve(top, fetch)
    assert fetch.calls.count("mem://shared") == 1
    addresses = [c.node.crypto.address for c in resolved.root.children]
    assert addresses == ["shared", "shared"]


def test_diamond_counts_once_against_budget():
    mapping = {
        "mem://left": '{"version":1,"url":"mem://shared"}',
        "mem://right": '{"version":1,"url":"mem://shared"}',
        "mem://shared": '{"version":1,"crypto":{"bitcoin":"s"}}',
    }
    top = doc('{"version":1,"split":['
              '{"id":"l","shares":1,"url":"mem://left"},'
              '{"id":"r","shares":1,"url":"mem://right"}]}')
    resolve(top, fetcher_for(mapping),
            ResolutionLimits(max_depth=16, max_documents=3))


def test_depth_limit():
    mapping = {"mem://%d" % i: '{"version":1,"url":"mem://%d"}' % (i + 1)
               for i in range(10)}
    mapping["mem://10"] = PAYEE_B
    top = doc('{"version":1,"url":"mem://0"}')
    resolve(top, fetcher_for(mapping), ResolutionLimits(max_depth=12))
    with pytest.raises(DepthExceeded):
        resolve(top, fetcher_for(mapping), ResolutionLimits(max_depth=5))


def test_document_budget():
    mapping = {"mem://%d" % i: '{"version":1,"url":"mem://%d"}' % (i + 1)
               for i in range(10)}
    mapping["mem://10"] = PAYEE_B
    top = doc('{"version":1,"url":"mem://0"}')
    with pytest.raises(DocumentBudgetExceeded):
        resolve(top, fetcher_for(mapping), ResolutionLimits(max_documents=4))


def test_fetch_error_carries_url():
    top = doc('{"version":1,"url":"mem://missing"}')
    with pytest.raises(FetchError) as err:
        resolve(top, fetcher_for({}))
    assert "mem://missing" in str(err.value)


def test_nested_parse_error_names_url():
    top = doc('{"version":1,"url":"mem://bad"}')
    with pytest.raises(VdpSyntaxError) as err:
        resolve(top, fetcher_for({"mem://bad": "not json"}))
    assert "mem://bad" in str(err.value)
