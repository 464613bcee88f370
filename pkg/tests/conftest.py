import json
import random
from fractions import Fraction

import pytest

from lifeserver.vdp import (
    CryptoAddress,
    Payee,
    Split,
    VdpChild,
    VdpDocument,
    parse_vdp,
)

# The canonical example tree: a contributors branch holding 97 shares with
# two equal members, and a 3-share operations branch beside it.
FIG_TREE_JSON = {
    "version": 1,
    "description": "project revenue split",
    "split": [
        {
            "id": "contributors",
            "shares": 97,
            "split": [
                {"id": "ktorn", "shares": 1,
                 "crypto": {"bitcoin": "1Ktorn000000000000000000000000000000"}},
                {"id": "marcoleong", "shares": 1,
                 "crypto": {"bitcoin": "1Marco000000000000000000000000000000"}},
            ],
        },
        {
            "id": "operations",
            "shares": 3,
            "crypto": {"bitcoin": "1Opsxx000000000000000000000000000000"},
        },
    ],
}


@pytest.fixture
def fig_tree():
    return parse_vdp(json.dumps(FIG_TREE_JSON))


def payee(addr, scheme="bitcoin"):
    return Payee(crypto=CryptoAddress(scheme=scheme, address=addr))


def exact_leaf_shares(node, acc=Fraction(1), path=()):
    """Oracle: each leaf's exact fraction of the total (product of branch
    fractions), independent of the largest-remainder implementation."""
    if isinstance(node, Payee):
        return [(path, acc, node.crypto)]
    assert isinstance(node, Split)
    total_shares = sum(c.shares for c in node.children)
    out = []
    for child in node.children:
        out.extend(exact_leaf_shares(
            child.node, acc * Fraction(child.shares, total_shares),
            path + (child.id,)))
    return out


def random_tree(rng: random.Random, max_depth=5, max_fanout=6,
                max_shares=1000) -> VdpDocument:
    counter = [0]

    def build(depth):
        if depth >= max_depth or rng.random() < 0.35:
            counter[0] += 1
            return payee("addr%d" % counter[0])
        fanout = rng.randint(1, max_fanout)
        children = tuple(
            VdpChild(id="c%d" % i, shares=rng.randint(1, max_shares),
                     node=build(depth + 1))
            for i in range(fanout))
        return Split(children=children)

    root = build(0)
    if isinstance(root, Payee) and rng.random() < 0.5:
        root = Split(children=(VdpChild(id="only", shares=1, node=root),))
    return VdpDocument(version=1, root=root)


def leaf_depths(node, depth=0):
    """Number of Split levels above each leaf, in leaf declaration order."""
    if isinstance(node, Payee):
        return [depth]
    out = []
    for child in node.children:
        out.extend(leaf_depths(child.node, depth + 1))
    return out
