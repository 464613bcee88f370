"""Backend selection for the Reed-Solomon codec.

The compiled kernel (_rs_kernel, GF(256) only) is used when it built;
otherwise the pure-Python codec takes over with identical outputs.  Set
LIFESERVER_RS_BACKEND=python to force the fallback (used by the benchmark
and by differential tests).
"""

from __future__ import annotations

import os

from .rs_python import ReedSolomon, RSDecodeFailure

try:
    from . import _rs_kernel
except ImportError:  # extension not built on this interpreter
    _rs_kernel = None

BACKEND = "python"
if _rs_kernel is not None and os.environ.get("LIFESERVER_RS_BACKEND") != "python":
    BACKEND = "compiled"


class _CompiledCodec:
    """GF(256) codec backed by the compiled kernel."""

    def __init__(self, nsym):
        self.nsym = nsym

    def encode(self, data):
        return _rs_kernel.rs_encode(data, self.nsym)

    def decode(self, codeword):
        return _rs_kernel.rs_decode(codeword, self.nsym)


_codec_cache = {}


def get_codec(nsym, c_exp=8, prim=0x11D):
    """Codec with nsym parity symbols; GF(2^c_exp) with the given primitive
    polynomial.  Only the GF(256)/0x11D configuration has a compiled path."""
    key = (nsym, c_exp, prim, BACKEND)
    codec = _codec_cache.get(key)
    if codec is None:
        if BACKEND == "compiled" and c_exp == 8 and prim == 0x11D:
            codec = _CompiledCodec(nsym)
        else:
            codec = ReedSolomon(nsym, c_exp=c_exp, prim=prim)
        _codec_cache[key] = codec
    return codec


__all__ = ["BACKEND", "RSDecodeFailure", "get_codec"]
