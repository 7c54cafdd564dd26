from hashlib import blake2b


def derive_seed(base_seed: int, pattern_id: int, throughput_bps: float, replicate: int) -> int:
    """Stable 64-bit seed for one (pattern, throughput, replicate) cell."""
    key = f"{base_seed}:{pattern_id}:{float(throughput_bps)!r}:{replicate}"
    return int.from_bytes(blake2b(key.encode("utf-8"), digest_size=8).digest(), "big")
