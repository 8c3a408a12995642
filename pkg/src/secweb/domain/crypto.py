"""Reference cipher, hash-based signature tags and key derivation.

None of this is production cryptography. The cipher is repeating-key XOR and
the signature is a keyed SHA-256 tag; both are deterministic so that runs
can be compared byte for byte.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass

SIG_LEN = 32
PAGE_KEY_LEN = 16


def xor_cipher(data: bytes, key: bytes) -> bytes:
    """``out[i] = data[i] ^ key[i % len(key)]``. Its own inverse."""
    if not key:
        raise ValueError("cipher key must not be empty")
    n = len(data)
    if n == 0:
        return b""
    reps, rest = divmod(n, len(key))
    stream = key * reps + key[:rest]
    out = int.from_bytes(data, "big") ^ int.from_bytes(stream, "big")
    return out.to_bytes(n, "big")


def sign(key: bytes, data: bytes) -> bytes:
    """SHA-256 over ``key || 0x00 || data``."""
    if not key:
        raise ValueError("signing key must not be empty")
    return hashlib.sha256(key + b"\x00" + data).digest()


def verify_sig(key: bytes, data: bytes, tag: bytes) -> bool:
    if not key or not isinstance(tag, (bytes, bytearray)) or len(tag) != SIG_LEN:
        return False
    return hmac.compare_digest(sign(key, data), bytes(tag))


def password_hash(user_id: str, password: str) -> bytes:
    return hashlib.sha256(f"{user_id}:{password}".encode("utf-8")).digest()


@dataclass(frozen=True)
class PageKey:
    page_id: str
    key: bytes

    @property
    def key_id(self) -> str:
        return f"page:{self.page_id}"


class KeyStore:
    """Local deterministic key derivation from one master secret."""

    def __init__(self, master_secret: bytes):
        if not master_secret:
            raise ValueError("master secret must not be empty")
        self._master = bytes(master_secret)

    def page_key(self, page_id: str) -> PageKey:
        digest = hashlib.sha256(b"pagekey:" + page_id.encode("utf-8") + b":" + self._master).digest()
        return PageKey(page_id, digest[:PAGE_KEY_LEN])

    @property
    def server_key(self) -> bytes:
        return hashlib.sha256(b"serverkey:" + self._master).digest()
