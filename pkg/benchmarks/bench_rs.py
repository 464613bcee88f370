#!/usr/bin/env python3
"""Benchmark the Reed-Solomon codec: compiled kernel vs pure Python.

Encodes and decodes RS(255, 223) codewords, with and without injected
symbol errors, and reports throughput for whichever backends are
available.  Run from the repo root:

    python benchmarks/bench_rs.py [--blocks 2000] [--errors 8]
"""

import argparse
import random
import time

from lifeserver.callosum.rs_backend import BACKEND, _CompiledCodec, _rs_kernel
from lifeserver.callosum.rs_python import ReedSolomon

NSYM = 32
DATA_LEN = 223


def backends():
    out = [("python", ReedSolomon(NSYM))]
    if _rs_kernel is not None:
        out.append(("compiled", _CompiledCodec(NSYM)))
    return out


def bench(codec, blocks, errors, rng):
    payloads = [rng.randbytes(DATA_LEN) for _ in range(min(blocks, 256))]

    start = time.perf_counter()
    encoded = [codec.encode(payloads[i % len(payloads)]) for i in range(blocks)]
    encode_s = time.perf_counter() - start

    noisy = []
    for cw in encoded:
        buf = bytearray(cw)
        for pos in rng.sample(range(len(buf)), errors):
            buf[pos] ^= rng.randrange(1, 256)
        noisy.append(bytes(buf))

    start = time.perf_counter()
    for i, cw in enumerate(noisy):
        decoded = codec.decode(cw)
        assert decoded == payloads[i % len(payloads)]
    decode_s = time.perf_counter() - start
    return encode_s, decode_s


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--blocks", type=int, default=2000,
                        help="codewords per phase (default 2000)")
    parser.add_argument("--errors", type=int, default=8,
                        help="injected symbol errors per codeword (default 8)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    if not 0 <= args.errors <= NSYM // 2:
        parser.error("--errors must be within [0, %d]" % (NSYM // 2))

    volume_mb = args.blocks * DATA_LEN / 1e6
    print("RS(255,223), %d blocks (%.1f MB data), %d errors/block, active "
          "backend: %s" % (args.blocks, volume_mb, args.errors, BACKEND))
    results = {}
    for name, codec in backends():
        encode_s, decode_s = bench(codec, args.blocks, args.errors,
                                   random.Random(args.seed))
        results[name] = (encode_s, decode_s)
        print("  %-8s  encode %8.3f s (%6.2f MB/s)   decode %8.3f s "
              "(%6.2f MB/s)" % (name, encode_s, volume_mb / encode_s,
                                decode_s, volume_mb / decode_s))
    if len(results) == 2:
        py, comp = results["python"], results["compiled"]
        print("  speedup   encode %5.1fx                    decode %5.1fx"
              % (py[0] / comp[0], py[1] / comp[1]))


if __name__ == "__main__":
    main()
