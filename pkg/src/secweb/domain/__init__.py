"""Miniature security subsystem: users, cipher, signatures, envelopes, ACLs, audit."""

from secweb.domain.crypto import KeyStore, PageKey, password_hash, sign, verify_sig, xor_cipher
from secweb.domain.errors import (
    AccessDeniedError,
    DuplicateUserError,
    FormatError,
    IntegrityError,
    MalformedIdError,
    NoSuchPageError,
    SecWebError,
    SequenceGapError,
    UnknownUserError,
)
from secweb.domain.formats import (
    AccessList,
    SecurePageEnvelope,
    decode_acl,
    decode_envelope,
    encode_acl,
    encode_envelope,
)
from secweb.domain.repository import (
    AuditLog,
    AuditRecord,
    Repository,
    UserRecord,
    authenticate,
    check_access,
    cipher_and_publish,
    fetch_and_decipher,
    generate_access_list,
    log_event,
    register_user,
)

__all__ = [
    "AccessDeniedError",
    "AccessList",
    "AuditLog",
    "AuditRecord",
    "DuplicateUserError",
    "FormatError",
    "IntegrityError",
    "KeyStore",
    "MalformedIdError",
    "NoSuchPageError",
    "PageKey",
    "Repository",
    "SecWebError",
    "SecurePageEnvelope",
    "SequenceGapError",
    "UnknownUserError",
    "UserRecord",
    "authenticate",
    "check_access",
    "cipher_and_publish",
    "decode_acl",
    "decode_envelope",
    "encode_acl",
    "encode_envelope",
    "fetch_and_decipher",
    "generate_access_list",
    "log_event",
    "password_hash",
    "register_user",
    "sign",
    "verify_sig",
    "xor_cipher",
]
