"""Hyperlink resolution: inline every ExternalRef by fetching and parsing
the document it points at.

Cycles are judged per resolution path, so diamond graphs (two branches
linking the same document) are legal and the shared document is fetched
once.  Depth and total-document budgets guard against runaway graphs.
"""

from __future__ import annotations

from typing import Callable

from .errors import (
    CycleError,
    DepthExceeded,
    DocumentBudgetExceeded,
    FetchError,
    VdpError,
)
from .model import ExternalRef, ResolutionLimits, Split, VdpChild, VdpDocument

Fetcher = Callable[[str], bytes]


def resolve(doc: VdpDocument, fetcher: Fetcher,
            limits: ResolutionLimits = ResolutionLimits()) -> VdpDocument:
    """Return a copy of doc in which every ExternalRef has been replaced by
    the root node of the fetched (and recursively resolved) document."""
    from .parser import parse_vdp

    cache = {}  # url -> parsed document (unresolved); one fetch per URL

    def fetch_parsed(url):
        if url in cache:
            return cache[url]
        if len(cache) >= limits.max_documents:
            raise DocumentBudgetExceeded(
                "more than %d documents required" % limits.max_documents)
        try:
            raw = fetcher(url)
        except VdpError:
            raise
        except Exception as exc:
            raise FetchError(url, str(exc))
        try:
            parsed = parse_vdp(raw)
        except VdpError as exc:
            raise type(exc)("%s (while resolving %s)" % (exc, url))
        cache[url] = parsed
        return parsed

    def walk(node, path, depth):
        # path: tuple of URLs currently being expanded (cycle check scope)
        if isinstance(node, ExternalRef):
            if node.url in path:
                raise CycleError(node.url)
            if depth + 1 > limits.max_depth:
                raise DepthExceeded("document depth exceeds %d" % limits.max_depth)
            sub = fetch_parsed(node.url)
            return walk(sub.root, path + (node.url,), depth + 1)
        if isinstance(node, Split):
            return Split(children=tuple(
                VdpChild(id=c.id, shares=c.shares, node=walk(c.node, path, depth))
                for c in node.children))
        return node

    return VdpDocument(version=doc.version,
                       root=walk(doc.root, (), 1),
                       description=doc.description)
