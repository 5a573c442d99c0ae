"""Keccak-f[1600] permutation and the four fixed-output SHA-3 digests.

State convention used everywhere in this package: 25 lanes of 64 bits,
lane (x, y) stored at index 5*y + x. Byte serialization is little-endian
per lane, lane i occupying bytes 8*i .. 8*i+7.
"""

from dataclasses import dataclass

__all__ = [
    "ROUND_CONSTANTS", "RHO_OFFSETS", "SpongeParams", "VARIANTS",
    "state_from_bytes", "state_to_bytes",
    "theta", "rho", "pi", "chi", "iota",
    "keccak_round", "keccak_f", "pad_message", "sha3_digest",
]

_M64 = (1 << 64) - 1


def _rotl(v, n):
    return ((v << n) & _M64) | (v >> (64 - n)) if n else v


def _round_constants(count=24):
    """Derive the iota constants from the degree-8 LFSR x^8+x^6+x^5+x^4+1.

    Bit (2^j - 1) of constant ir is LFSR output bit j + 7*ir.
    """
    out = []
    lfsr = 1
    for _ in range(count):
        rc = 0
        for j in range(7):
            if lfsr & 1:
                rc |= 1 << ((1 << j) - 1)
            lfsr <<= 1
            if lfsr & 0x100:
                lfsr ^= 0x171
        out.append(rc)
    return tuple(out)


def _rho_offsets():
    """Walk (x, y) -> (y, 2x+3y) from (1, 0); offset t is (t+1)(t+2)/2 mod 64."""
    off = [0] * 25
    x, y = 1, 0
    for t in range(24):
        off[5 * y + x] = (t + 1) * (t + 2) // 2 % 64
        x, y = y, (2 * x + 3 * y) % 5
    return tuple(off)


ROUND_CONSTANTS = _round_constants()
RHO_OFFSETS = _rho_offsets()

# pi moves lane ((x+3y)%5, x) to (x, y); precomputed as dst index -> src index.
_PI_SOURCE = tuple(((x + 3 * y) % 5) + 5 * x for y in range(5) for x in range(5))


def state_from_bytes(raw):
    if len(raw) != 200:
        raise ValueError(f"state must be 200 bytes, got {len(raw)}")
    return [int.from_bytes(raw[8 * i:8 * i + 8], "little") for i in range(25)]


def state_to_bytes(lanes):
    if len(lanes) != 25:
        raise ValueError(f"state must have 25 lanes, got {len(lanes)}")
    return b"".join(v.to_bytes(8, "little") for v in lanes)


def theta(lanes):
    c = [lanes[x] ^ lanes[x + 5] ^ lanes[x + 10] ^ lanes[x + 15] ^ lanes[x + 20]
         for x in range(5)]
    d = [c[(x + 4) % 5] ^ _rotl(c[(x + 1) % 5], 1) for x in range(5)]
    return [lanes[i] ^ d[i % 5] for i in range(25)]


def rho(lanes):
    return [_rotl(lanes[i], RHO_OFFSETS[i]) for i in range(25)]


def pi(lanes):
    return [lanes[s] for s in _PI_SOURCE]


def chi(lanes):
    out = []
    for base in range(0, 25, 5):
        row = lanes[base:base + 5]
        out += [row[x] ^ ((row[(x + 1) % 5] ^ _M64) & row[(x + 2) % 5])
                for x in range(5)]
    return out


def iota(lanes, round_index):
    out = list(lanes)
    out[0] ^= ROUND_CONSTANTS[round_index]
    return out


def keccak_round(lanes, round_index):
    """One full round: iota(chi(pi(rho(theta(state)))), round_index)."""
    if not 0 <= round_index < 24:
        raise ValueError(f"round index must be 0..23, got {round_index}")
    return iota(chi(pi(rho(theta(lanes)))), round_index)


def keccak_f(lanes):
    """The 24-round Keccak-f[1600] permutation."""
    for r in range(24):
        lanes = iota(chi(pi(rho(theta(lanes)))), r)
    return lanes


@dataclass(frozen=True)
class SpongeParams:
    rate_bytes: int
    capacity_bytes: int
    digest_bytes: int

    def __post_init__(self):
        if self.rate_bytes + self.capacity_bytes != 200:
            raise ValueError("rate + capacity must equal 200 bytes")
        if self.capacity_bytes != 2 * self.digest_bytes:
            raise ValueError("capacity must be twice the digest length")
        if self.rate_bytes % 8:
            raise ValueError("rate must be a whole number of lanes")


VARIANTS = {
    "sha3-224": SpongeParams(144, 56, 28),
    "sha3-256": SpongeParams(136, 64, 32),
    "sha3-384": SpongeParams(104, 96, 48),
    "sha3-512": SpongeParams(72, 128, 64),
}


def pad_message(message, rate_bytes):
    """pad10*1 with the SHA-3 domain bits, byte-granular: first pad byte
    0x06, last pad byte ORed with 0x80 (a lone pad byte is 0x86)."""
    pad_len = rate_bytes - len(message) % rate_bytes
    pad = bytearray(pad_len)
    pad[0] = 0x06
    pad[-1] |= 0x80
    return bytes(message) + bytes(pad)


def sha3_digest(message, variant):
    """Hash message with one of the VARIANTS keys or a SpongeParams."""
    params = VARIANTS[variant] if isinstance(variant, str) else variant
    rate = params.rate_bytes
    padded = pad_message(message, rate)
    lanes = [0] * 25
    for off in range(0, len(padded), rate):
        for i in range(0, rate, 8):
            lanes[i // 8] ^= int.from_bytes(padded[off + i:off + i + 8], "little")
        lanes = keccak_f(lanes)
    return state_to_bytes(lanes)[:params.digest_bytes]
