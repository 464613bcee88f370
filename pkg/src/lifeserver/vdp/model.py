"""Value-distribution tree data model.

A document is a version header plus a tree of nodes.  A node is exactly one
of: a Split (ordered children, each with a branch-local id and an integer
share weight), a Payee (one cryptocurrency address), or an ExternalRef
(the node's definition lives in another document identified by URL).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union


@dataclass(frozen=True)
class CryptoAddress:
    scheme: str  # lowercase scheme name, e.g. "bitcoin"
    address: str

    def __post_init__(self):
        if not self.address:
            raise ValueError("address must be non-empty")
        if not self.scheme or self.scheme != self.scheme.lower():
            raise ValueError("scheme must be non-empty lowercase")


@dataclass(frozen=True)
class Payee:
    crypto: CryptoAddress


@dataclass(frozen=True)
class ExternalRef:
    url: str


@dataclass(frozen=True)
class VdpChild:
    id: str
    shares: int
    node: "VdpNode"


@dataclass(frozen=True)
class Split:
    children: tuple  # tuple[VdpChild, ...], declaration order is significant


VdpNode = Union[Split, Payee, ExternalRef]


@dataclass(frozen=True)
class VdpDocument:
    version: int
    root: VdpNode
    description: Optional[str] = None


@dataclass(frozen=True)
class PaymentInstruction:
    address: CryptoAddress
    amount: int  # atomic units, >= 0
    path: tuple  # branch ids from root to leaf


@dataclass(frozen=True)
class ResolutionLimits:
    max_depth: int = 16
    max_documents: int = 64

    def __post_init__(self):
        if self.max_depth < 1 or self.max_documents < 1:
            raise ValueError("resolution limits must be >= 1")


def is_resolved(node: VdpNode) -> bool:
    """True when no ExternalRef remains anywhere under node."""
    if isinstance(node, ExternalRef):
        return False
    if isinstance(node, Split):
        return all(is_resolved(c.node) for c in node.children)
    return True
