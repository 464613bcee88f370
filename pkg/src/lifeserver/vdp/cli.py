"""Command line front end: `vdp parse|resolve|compute`."""

from __future__ import annotations

import argparse
import sys
import urllib.parse
import urllib.request

from .errors import VdpError
from .model import ResolutionLimits
from .parser import parse_vdp, serialize_vdp
from .distribute import distribute
from .resolve import resolve


def default_fetcher(url: str) -> bytes:
    parts = urllib.parse.urlsplit(url)
    if parts.scheme == "file":
        with open(urllib.request.url2pathname(parts.path), "rb") as fh:
            return fh.read()
    if parts.scheme in ("http", "https"):
        with urllib.request.urlopen(url, timeout=30) as resp:
            return resp.read()
    raise ValueError("unsupported URL scheme: %s" % parts.scheme)


def _load(path):
    with open(path, "rb") as fh:
        return parse_vdp(fh.read())


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="vdp",
                                     description="value-distribution documents")
    sub = parser.add_subparsers(dest="command", required=True)

    p_parse = sub.add_parser("parse", help="validate a document")
    p_parse.add_argument("file")

    p_resolve = sub.add_parser("resolve", help="inline hyperlinked documents")
    p_resolve.add_argument("file")
    p_resolve.add_argument("--max-depth", type=int, default=16)
    p_resolve.add_argument("--max-docs", type=int, default=64)

    p_compute = sub.add_parser("compute", help="apportion a value")
    p_compute.add_argument("file")
    p_compute.add_argument("--value", type=int, required=True)
    p_compute.add_argument("--max-depth", type=int, default=16)
    p_compute.add_argument("--max-docs", type=int, default=64)

    args = parser.parse_args(argv)
    try:
        doc = _load(args.file)
        if args.command == "parse":
            sys.stdout.write(serialize_vdp(doc).decode("utf-8") + "\n")
            return 0
        limits = ResolutionLimits(max_depth=args.max_depth, max_documents=args.max_docs)
        doc = resolve(doc, default_fetcher, limits)
        if args.command == "resolve":
            sys.stdout.write(serialize_vdp(doc).decode("utf-8") + "\n")
            return 0
        for instr in distribute(doc, args.value):
            sys.stdout.write("%s\t%d\t%s\n" % (
                instr.address.address, instr.amount, "/".join(instr.path)))
        return 0
    except (VdpError, OSError, ValueError) as exc:
        sys.stderr.write("vdp: error: %s\n" % exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
