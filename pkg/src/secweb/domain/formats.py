"""Bit-exact file formats for page envelopes and access lists.

Envelope::

    SECWEB1
    page_id: p1
    author: alice
    key_id: page:p1
    created: 3

    <base64 ciphertext>
    sig: <64 lowercase hex>

Access list::

    SECACL1
    page_id: p1
    alice
    bob
    sig: <64 lowercase hex over every byte above this line>

Every line, the last included, ends with ``\\n``. Decoders are strict enough
that ``encode(decode(b)) == b`` for anything they accept.
"""

from __future__ import annotations

import base64
import binascii
import re
from collections.abc import Iterable
from dataclasses import dataclass

from secweb.domain.crypto import SIG_LEN, sign, verify_sig
from secweb.domain.errors import FormatError, MalformedIdError

ENVELOPE_MAGIC = "SECWEB1"
ACL_MAGIC = "SECACL1"

ID_RE = re.compile(r"[a-z][a-z0-9_]*\Z")
_HEX_SIG_RE = re.compile(r"sig: ([0-9a-f]{64})\Z")
_INT_RE = re.compile(r"(0|[1-9][0-9]*)\Z")
_TEXT_RE = re.compile(r"[^\x00-\x1f\x7f]*\Z")


def check_id(value: str, what: str = "id") -> str:
    if not isinstance(value, str) or not ID_RE.match(value):
        raise MalformedIdError(f"malformed {what}: {value!r}")
    return value


@dataclass(frozen=True)
class SecurePageEnvelope:
    page_id: str
    author: str
    key_id: str
    created: int
    ciphertext: bytes
    sig: bytes

    @classmethod
    def seal(cls, page_id: str, author: str, key_id: str, created: int, ciphertext: bytes, key: bytes):
        return cls(page_id, author, key_id, created, ciphertext, sign(key, ciphertext))

    def verify(self, key: bytes) -> bool:
        return verify_sig(key, self.ciphertext, self.sig)


def encode_envelope(env: SecurePageEnvelope) -> bytes:
    check_id(env.page_id, "page id")
    check_id(env.author, "author")
    if not _TEXT_RE.match(env.key_id) or not env.key_id:
        raise FormatError(f"bad key_id {env.key_id!r}")
    if env.created < 0:
        raise FormatError("created must be non-negative")
    if len(env.sig) != SIG_LEN:
        raise FormatError("signature must be 32 bytes")
    lines = [
        ENVELOPE_MAGIC,
        f"page_id: {env.page_id}",
        f"author: {env.author}",
        f"key_id: {env.key_id}",
        f"created: {env.created}",
        "",
        base64.b64encode(env.ciphertext).decode("ascii"),
        f"sig: {env.sig.hex()}",
    ]
    return ("\n".join(lines) + "\n").encode("utf-8")


def _header(line: str, name: str) -> str:
    prefix = f"{name}: "
    if not line.startswith(prefix):
        raise FormatError(f"missing header {name!r}")
    return line[len(prefix):]


def _sig_line(line: str) -> bytes:
    m = _HEX_SIG_RE.match(line)
    if not m:
        raise FormatError("malformed sig line")
    return bytes.fromhex(m.group(1))


def _split_lines(data: bytes) -> list[str]:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"not UTF-8: {exc}") from None
    if not text.endswith("\n"):
        raise FormatError("missing final newline")
    return text[:-1].split("\n")


def decode_envelope(data: bytes) -> SecurePageEnvelope:
    lines = _split_lines(data)
    if not lines or lines[0] != ENVELOPE_MAGIC:
        raise FormatError(f"bad magic {lines[0] if lines else ''!r}")
    if len(lines) != 8:
        raise FormatError(f"expected 8 lines, found {len(lines)}")
    page_id = _header(lines[1], "page_id")
    author = _header(lines[2], "author")
    key_id = _header(lines[3], "key_id")
    created = _header(lines[4], "created")
    for value, what in ((page_id, "page id"), (author, "author")):
        if not ID_RE.match(value):
            raise FormatError(f"malformed {what}: {value!r}")
    if not key_id or not _TEXT_RE.match(key_id):
        raise FormatError(f"bad key_id {key_id!r}")
    if not _INT_RE.match(created):
        raise FormatError(f"bad created value {created!r}")
    if lines[5] != "":
        raise FormatError("missing blank line after headers")
    body = lines[6]
    try:
        ciphertext = base64.b64decode(body, validate=True)
    except binascii.Error as exc:
        raise FormatError(f"malformed base64 body: {exc}") from None
    if base64.b64encode(ciphertext).decode("ascii") != body:
        raise FormatError("non-canonical base64 body")
    sig = _sig_line(lines[7])
    return SecurePageEnvelope(page_id, author, key_id, int(created), ciphertext, sig)


@dataclass(frozen=True)
class AccessList:
    page_id: str
    readers: tuple[str, ...]
    sig: bytes

    def body(self) -> bytes:
        return acl_body(self.page_id, self.readers)

    def verify(self, server_key: bytes) -> bool:
        return verify_sig(server_key, self.body(), self.sig)


def acl_body(page_id: str, readers: Iterable[str]) -> bytes:
    lines = [ACL_MAGIC, f"page_id: {page_id}", *readers]
    return ("\n".join(lines) + "\n").encode("utf-8")


def make_access_list(page_id: str, readers: Iterable[str], server_key: bytes) -> AccessList:
    """Deduplicate and sort *readers*, then sign the canonical body."""
    check_id(page_id, "page id")
    ordered = tuple(sorted({check_id(r, "reader id") for r in readers}))
    return AccessList(page_id, ordered, sign(server_key, acl_body(page_id, ordered)))


def encode_acl(acl: AccessList) -> bytes:
    return acl.body() + f"sig: {acl.sig.hex()}\n".encode("ascii")


def decode_acl(data: bytes) -> AccessList:
    lines = _split_lines(data)
    if not lines or lines[0] != ACL_MAGIC:
        raise FormatError(f"bad magic {lines[0] if lines else ''!r}")
    if len(lines) < 3:
        raise FormatError("truncated access list")
    page_id = _header(lines[1], "page_id")
    if not ID_RE.match(page_id):
        raise FormatError(f"malformed page id {page_id!r}")
    readers = tuple(lines[2:-1])
    for r in readers:
        if not ID_RE.match(r):
            raise FormatError(f"malformed reader id {r!r}")
    if list(readers) != sorted(set(readers)):
        raise FormatError("readers not sorted and unique")
    return AccessList(page_id, readers, _sig_line(lines[-1]))
