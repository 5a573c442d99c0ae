"""Benchmark the three kernels against each other on a small vector set.

Builds an in-memory vector set, runs every (strategy, vector) pair on
the instruction-level emulator, and prints the mix table plus the
speedups the dedicated round unit buys.
"""

import hashlib
import random

from shatrv.bench import emit_report, run_benchmark
from shatrv.cavp import CavpVector, CavpVectorSet

rng = random.Random(2024)
variant = "sha3-256"

vectors = []
for nbytes in (0, 17, 136, 400):
    msg = rng.randbytes(nbytes)
    vectors.append(CavpVector(length_bits=8 * nbytes, message=msg,
                              digest=hashlib.sha3_256(msg).digest()))
vset = CavpVectorSet(variant=variant, source="demo", vectors=tuple(vectors))

report = run_benchmark([vset])
print(emit_report(report, "table"))

# The same report serializes to JSON (the benchmark CLI's default) and
# to CSV; both are deterministic byte-for-byte across runs.
doc = emit_report(report, "json")
again = emit_report(run_benchmark([vset]), "json")
assert doc == again
print("JSON report is deterministic:", len(doc), "bytes")
