"""Digest messages with the pure-Python SHA-3 core.

Walks through the sponge: pick a variant, absorb a message, squeeze a
digest, and cross-check the result against hashlib.
"""

import hashlib

from shatrv import keccak

message = b"the quick brown fox jumps over the lazy dog"

print("message:", message.decode())
print()
for variant in sorted(keccak.VARIANTS):
    digest = keccak.sha3_digest(message, variant)
    ref = hashlib.new(variant.replace("-", "_"), message).digest()
    mark = "ok" if digest == ref else "MISMATCH"
    print(f"{variant:9s} {digest.hex()}  [{mark} vs hashlib]")

# The sponge parameters behind each variant: rate + capacity = 200 bytes,
# and the digest is half the capacity.
print()
for variant, p in sorted(keccak.VARIANTS.items()):
    print(f"{variant:9s} rate={p.rate_bytes:3d}B capacity={p.capacity_bytes:3d}B"
          f" digest={p.digest_bytes}B")

# One permutation at a time: keccak_f is 24 chained rounds.
state = list(range(25))
rounds = state
for r in range(24):
    rounds = keccak.keccak_round(rounds, r)
assert rounds == keccak.keccak_f(state)
print()
print("keccak_f == 24 chained keccak_round calls:", rounds[:3], "...")
