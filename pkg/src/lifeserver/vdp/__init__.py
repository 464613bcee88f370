"""Value-distribution trees: parse, resolve hyperlinks, apportion value."""

from .distribute import build_attribution_vdp, distribute, split_amount
from .errors import (
    CycleError,
    DepthExceeded,
    DocumentBudgetExceeded,
    DuplicateSiblingId,
    EmptyContributions,
    EmptySplit,
    FetchError,
    InvalidShares,
    Overflow,
    UnknownKeyword,
    UnresolvedNode,
    UnsupportedVersion,
    VdpError,
    VdpSyntaxError,
)
from .model import (
    CryptoAddress,
    ExternalRef,
    PaymentInstruction,
    Payee,
    ResolutionLimits,
    Split,
    VdpChild,
    VdpDocument,
    is_resolved,
)
from .parser import parse_vdp, serialize_vdp
from .resolve import resolve

__all__ = [
    "CryptoAddress", "CycleError", "DepthExceeded", "DocumentBudgetExceeded",
    "DuplicateSiblingId", "EmptyContributions", "EmptySplit", "ExternalRef",
    "FetchError", "InvalidShares", "Overflow", "PaymentInstruction", "Payee",
    "ResolutionLimits", "Split", "UnknownKeyword", "UnresolvedNode",
    "UnsupportedVersion", "VdpChild", "VdpDocument", "VdpError",
    "VdpSyntaxError", "build_attribution_vdp", "distribute", "is_resolved",
    "parse_vdp", "resolve", "serialize_vdp", "split_amount",
]
