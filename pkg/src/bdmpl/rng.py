"""Reproducible random streams.

All randomness in the package flows from a single root seed through named
Philox substreams. Philox is a counter-based generator with a published
algorithm, so a (seed, stream, index) triple reproduces the same values on
any platform. The 128-bit Philox key is laid out as

    key = [root_seed, (stream_tag << 48) | index]

which keeps streams independent without coordinating counter offsets.
Fixed-length consumption (e.g. one jump uniform per sampler iteration) is
drawn as a block from a single stream; variable-length consumption (e.g.
tie-breaking in multiple-edge updates) gets a per-index substream.
"""

import numpy as np
from numpy.random import Generator, Philox

# Stream tags. Stable identifiers: changing one changes every downstream draw.
STREAM_GRAPH = 1          # synthetic graph topology
STREAM_WEIGHTS = 2        # interaction weights of the generating model
STREAM_GIBBS = 3          # Gibbs sweeps for data generation
STREAM_JUMPS = 4          # jump-edge selection uniforms, one per iteration
STREAM_TIES = 5           # per-iteration tie-break substreams (multi mode)
STREAM_START = 6          # prior-sampled starting graphs
STREAM_BENCH = 7          # per-replicate benchmark seeds
STREAM_SPARSE = 8         # synthetic hyper-sparse tables

_INDEX_BITS = 48
_INDEX_MASK = (1 << _INDEX_BITS) - 1


def substream(seed, stream_tag, index=0):
    """Generator for the given (seed, stream, index) triple."""
    if not 0 <= stream_tag < (1 << 16):
        raise ValueError(f"stream tag out of range: {stream_tag}")
    if not 0 <= index <= _INDEX_MASK:
        raise ValueError(f"substream index out of range: {index}")
    key = np.array(
        [np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
         np.uint64((stream_tag << _INDEX_BITS) | index)],
        dtype=np.uint64,
    )
    return Generator(Philox(key=key))


def spawn_seed(seed, stream_tag, index):
    """Derive a child root seed, e.g. one per benchmark replicate."""
    return int(substream(seed, stream_tag, index).integers(0, 2**63 - 1))
