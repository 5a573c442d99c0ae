"""Regenerate the bundled known-answer vector files.

Messages are drawn from a per-file seeded generator so reruns are
byte-identical; digests come from Python's hashlib (OpenSSL), which keeps
the bundled expectations independent of the library under test.  Output
follows the CAVP .rsp record layout.

Usage: python3 tools/make_vectors.py [dest_dir]
"""

import hashlib
import pathlib
import random
import sys

SHORT_BITS = [0, 8, 72, 256, 520, 1000]
LONG_BITS = [2048, 4096, 8192, 12288, 16384]
VARIANTS = ["sha3-224", "sha3-256", "sha3-384", "sha3-512"]
CLASSES = [("ShortMsg", SHORT_BITS), ("LongMsg", LONG_BITS)]


def make_file(variant, class_name, bit_lengths):
    algo = variant.replace("-", "_")
    digest_bits = int(variant.split("-")[1])
    rng = random.Random(f"{variant}/{class_name}")
    lines = [
        f"#  {variant.upper()} known-answer vectors, {class_name} subset",
        "#  Messages are deterministic pseudo-random bytes; digests computed",
        "#  with Python hashlib.  Record layout follows the CAVP .rsp format.",
        "",
        f"[L = {digest_bits}]",
        "",
    ]
    for bits in bit_lengths:
        message = rng.randbytes(bits // 8)
        digest = hashlib.new(algo, message).hexdigest()
        lines += [
            f"Len = {bits}",
            f"Msg = {message.hex() if message else '00'}",
            f"MD = {digest}",
            "",
        ]
    return "\n".join(lines)


def main():
    dest = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "src/shatrv/vectors")
    dest.mkdir(parents=True, exist_ok=True)
    for variant in VARIANTS:
        for class_name, bit_lengths in CLASSES:
            name = f"{variant.replace('sha3-', 'SHA3_')}{class_name}.rsp"
            path = dest / name
            path.write_text(make_file(variant, class_name, bit_lengths))
            print(f"wrote {path}")


if __name__ == "__main__":
    main()
