"""Exact apportionment of an integer value through a resolved tree.

At every split the value is divided by largest-remainder: each child gets
the floor of total * shares / total_shares, then the leftover units go one
at a time to the children with the largest fractional remainders (ties
broken by declaration order).  This conserves the total exactly at every
level, so the sum of all emitted payments always equals the input.
"""

from __future__ import annotations

from .errors import EmptyContributions, Overflow, UnresolvedNode
from .model import (
    ExternalRef,
    PaymentInstruction,
    Payee,
    Split,
    VdpChild,
    VdpDocument,
)

MAX_TOTAL = 2**63 - 1  # supported magnitude; arithmetic itself is exact


def split_amount(total: int, shares: list) -> list:
    """Largest-remainder division of `total` into len(shares) integer parts."""
    total_shares = sum(shares)
    floors = []
    remainders = []
    for s in shares:
        product = total * s
        floors.append(product // total_shares)
        remainders.append(product % total_shares)
    leftover = total - sum(floors)
    # one extra unit each to the largest remainders, declaration order on ties
    order = sorted(range(len(shares)), key=lambda i: (-remainders[i], i))
    for i in order[:leftover]:
        floors[i] += 1
    return floors


def distribute(tree: VdpDocument, total: int) -> list:
    """Apportion `total` atomic units; returns PaymentInstructions in leaf
    declaration order."""
    if total < 0:
        raise ValueError("total must be >= 0")
    if total > MAX_TOTAL:
        raise Overflow("total %d exceeds supported magnitude %d" % (total, MAX_TOTAL))

    out = []

    def walk(node, amount, path):
        if isinstance(node, Payee):
            out.append(PaymentInstruction(address=node.crypto, amount=amount, path=path))
        elif isinstance(node, Split):
            parts = split_amount(amount, [c.shares for c in node.children])
            for child, part in zip(node.children, parts):
                walk(child.node, part, path + (child.id,))
        elif isinstance(node, ExternalRef):
            raise UnresolvedNode("unresolved external reference: %s" % node.url)
        else:
            raise TypeError("not a VDP node: %r" % (node,))

    walk(tree.root, total, ())
    assert sum(p.amount for p in out) == total
    return out


def build_attribution_vdp(contributions: dict) -> VdpDocument:
    """Build the per-source attribution document for one settled insight.

    contributions maps source_id -> (weight, payee_node); the payee node may
    itself be an ExternalRef to the source's published document.
    """
    if not contributions:
        raise EmptyContributions("at least one contributing source required")
    children = []
    for source_id, (weight, payee_node) in contributions.items():
        if weight < 1:
            raise ValueError("weight for %r must be >= 1" % source_id)
        children.append(VdpChild(id=source_id, shares=weight, node=payee_node))
    return VdpDocument(version=1, root=Split(children=tuple(children)),
                       description="data-source attribution")
