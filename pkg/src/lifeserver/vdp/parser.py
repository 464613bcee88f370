"""Parsing and canonical serialization of value-distribution documents.

Wire format is UTF-8 JSON.  A document object carries "version", an
optional "description", and exactly one node keyword.  Node keywords:

    {"split": [child, ...]}            inner branch
    {"crypto": {"<scheme>": "<addr>"}} payee leaf
    {"url": "<absolute-url>"}          hyperlink to an external document

A child object is {"id": ..., "shares": ..., <node keyword>}.  Any other
key is rejected so that typos never silently change a payout.
"""

from __future__ import annotations

import json

from .errors import (
    DuplicateSiblingId,
    EmptySplit,
    InvalidShares,
    UnknownKeyword,
    UnsupportedVersion,
    VdpSyntaxError,
)
from .model import CryptoAddress, ExternalRef, Payee, Split, VdpChild, VdpDocument

NODE_KEYS = ("split", "crypto", "url")


def parse_vdp(data) -> VdpDocument:
    """Parse a UTF-8 document into a validated VdpDocument."""
    if isinstance(data, (bytes, bytearray)):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise VdpSyntaxError("document is not valid UTF-8: %s" % exc)
    else:
        text = data
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise VdpSyntaxError(exc.msg, location="line %d column %d" % (exc.lineno, exc.colno))
    if not isinstance(obj, dict):
        raise VdpSyntaxError("top level must be an object")

    for key in obj:
        if key not in ("version", "description") and key not in NODE_KEYS:
            raise UnknownKeyword("unknown keyword %r at document root" % key)
    if "version" not in obj:
        raise VdpSyntaxError("missing 'version'", location="$")
    version = obj["version"]
    if not isinstance(version, int) or isinstance(version, bool) or version != 1:
        raise UnsupportedVersion("unsupported version %r (only 1)" % (version,))
    description = obj.get("description")
    if description is not None and not isinstance(description, str):
        raise VdpSyntaxError("'description' must be a string", location="$.description")

    root = _parse_node(obj, "$")
    return VdpDocument(version=version, root=root, description=description)


def _parse_node(obj, where):
    present = [k for k in NODE_KEYS if k in obj]
    if len(present) != 1:
        raise VdpSyntaxError(
            "expected exactly one of %s, found %s" % ("/".join(NODE_KEYS), present or "none"),
            location=where,
        )
    kind = present[0]
    value = obj[kind]
    if kind == "split":
        if not isinstance(value, list):
            raise VdpSyntaxError("'split' must be an array", location=where)
        if not value:
            raise EmptySplit("empty split at %s" % where)
        children = []
        seen_ids = set()
        for i, child_obj in enumerate(value):
            child = _parse_child(child_obj, "%s.split[%d]" % (where, i))
            if child.id in seen_ids:
                raise DuplicateSiblingId("duplicate sibling id %r at %s" % (child.id, where))
            seen_ids.add(child.id)
            children.append(child)
        return Split(children=tuple(children))
    if kind == "crypto":
        if not isinstance(value, dict) or len(value) != 1:
            raise VdpSyntaxError(
                "'crypto' must be an object with exactly one scheme entry", location=where
            )
        (scheme, address), = value.items()
        if not isinstance(scheme, str) or scheme != scheme.lower() or not scheme:
            raise VdpSyntaxError("crypto scheme must be lowercase text", location=where)
        if not isinstance(address, str) or not address:
            raise VdpSyntaxError("crypto address must be non-empty text", location=where)
        return Payee(crypto=CryptoAddress(scheme=scheme, address=address))
    # kind == "url"
    if not isinstance(value, str) or "://" not in value:
        raise VdpSyntaxError("'url' must be an absolute URL string", location=where)
    return ExternalRef(url=value)


def _parse_child(obj, where):
    if not isinstance(obj, dict):
        raise VdpSyntaxError("split child must be an object", location=where)
    for key in obj:
        if key not in ("id", "shares") and key not in NODE_KEYS:
            raise UnknownKeyword("unknown keyword %r at %s" % (key, where))
    if "id" not in obj or not isinstance(obj["id"], str) or not obj["id"]:
        raise VdpSyntaxError("child requires a non-empty 'id'", location=where)
    shares = obj.get("shares")
    if not isinstance(shares, int) or isinstance(shares, bool):
        raise VdpSyntaxError("child requires integer 'shares'", location=where)
    if shares < 1:
        raise InvalidShares("shares must be >= 1 at %s (got %d)" % (where, shares))
    return VdpChild(id=obj["id"], shares=shares, node=_parse_node(obj, where))


def serialize_vdp(doc: VdpDocument) -> bytes:
    """Canonical serialization: stable key order, sibling order preserved.

    parse_vdp(serialize_vdp(d)) is structurally equal to d, and structurally
    equal documents serialize to identical bytes.
    """
    obj = {"version": doc.version}
    if doc.description is not None:
        obj["description"] = doc.description
    obj.update(_node_to_obj(doc.root))
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def _node_to_obj(node):
    if isinstance(node, Split):
        return {"split": [_child_to_obj(c) for c in node.children]}
    if isinstance(node, Payee):
        return {"crypto": {node.crypto.scheme: node.crypto.address}}
    if isinstance(node, ExternalRef):
        return {"url": node.url}
    raise TypeError("not a VDP node: %r" % (node,))


def _child_to_obj(child):
    obj = {"id": child.id, "shares": child.shares}
    obj.update(_node_to_obj(child.node))
    return obj
