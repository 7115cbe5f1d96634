"""Canonical serialization and keyed hashing.

Every hash in the system (capsule ids, log chains, state hashes, stub logits,
scheduler draws) goes through these helpers so that identical state always
produces identical bytes, independent of dict insertion order or platform.
"""
from __future__ import annotations

import hashlib
import json
from typing import Any

ZERO_DIGEST = "0" * 64


def canonical_json(value: Any) -> str:
    """Serialize to the one canonical JSON form: sorted keys, no whitespace."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_hex(data: str) -> str:
    return hashlib.sha256(data.encode("utf-8")).hexdigest()


def state_hash(value: Any) -> str:
    return sha256_hex(canonical_json(value))


def chain_hash(prev_chain: str, record_body: dict[str, Any]) -> str:
    """Hash-chain link: digest of the previous link plus this record's body."""
    return sha256_hex(prev_chain + canonical_json(record_body))


def keyed_unit(*parts: Any) -> float:
    """Deterministic uniform draw in [0, 1) keyed by the given parts.

    The key is the canonical join of the parts; the draw is the first 8 bytes
    of its SHA-256 digest scaled to [0, 1). Pure and platform-independent.
    """
    key = "|".join(str(p) for p in parts)
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


def keyed_logit(*parts: Any) -> float:
    """Deterministic pseudo-random logit in [-1, 1] keyed by the given parts."""
    return 2.0 * keyed_unit(*parts) - 1.0
