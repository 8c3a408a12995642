"""File-backed page repository, user store and audit log.

Layout under the store root::

    users.tsv          user_id <TAB> sha256(user_id:password) hex
    plain/<page>.html  staged plaintext pages
    pub/<page>.env     published envelopes
    acl/<page>.acl     signed access lists
    log/audit.log      append-only audit records

Writes of users, envelopes and access lists go through a temp file and
``os.replace``, so readers see either the old or the new file, never a
partial one.
"""

from __future__ import annotations

import hmac
import os
import tempfile
import time as _time
from dataclasses import dataclass
from pathlib import Path

from secweb.domain.crypto import KeyStore, PageKey, password_hash, xor_cipher
from secweb.domain.errors import (
    AccessDeniedError,
    DuplicateUserError,
    FormatError,
    IntegrityError,
    NoSuchPageError,
    SequenceGapError,
    UnknownUserError,
)
from secweb.domain.formats import (
    AccessList,
    ID_RE,
    SecurePageEnvelope,
    check_id,
    decode_acl,
    decode_envelope,
    encode_acl,
    encode_envelope,
    make_access_list,
)

DEFAULT_MASTER_SECRET = b"secweb-default-master-secret"

ACTIONS = frozenset(
    {"create", "set_rights", "cipher", "publish", "gen_acl", "auth", "access_req", "page_req", "decipher", "exit"}
)
OUTCOMES = frozenset({"ok", "denied", "error"})


def atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


# --- users -----------------------------------------------------------------

@dataclass(frozen=True)
class UserRecord:
    user_id: str
    password_hash: bytes


class UserStore:
    def __init__(self, path: Path):
        self.path = path

    def records(self) -> dict[str, UserRecord]:
        if not self.path.exists():
            return {}
        out = {}
        for line in self.path.read_text(encoding="utf-8").splitlines():
            if not line:
                continue
            uid, _, hexhash = line.partition("\t")
            out[uid] = UserRecord(uid, bytes.fromhex(hexhash))
        return out

    def get(self, user_id: str) -> UserRecord | None:
        return self.records().get(user_id)

    def add(self, record: UserRecord) -> None:
        records = self.records()
        if record.user_id in records:
            raise DuplicateUserError(f"user {record.user_id} already exists")
        records[record.user_id] = record
        text = "".join(f"{r.user_id}\t{r.password_hash.hex()}\n" for r in records.values())
        atomic_write(self.path, text.encode("utf-8"))


# --- audit -----------------------------------------------------------------

@dataclass(frozen=True)
class AuditRecord:
    seq: int
    logical_time: int
    actor: str
    action: str
    object: str
    outcome: str

    def line(self) -> str:
        return "\t".join(
            [str(self.seq), str(self.logical_time), self.actor, self.action, self.object, self.outcome]
        )

    @classmethod
    def parse(cls, line: str) -> AuditRecord:
        parts = line.split("\t")
        if len(parts) != 6:
            raise FormatError(f"bad audit line {line!r}")
        seq, t, actor, action, obj, outcome = parts
        return cls(int(seq), int(t), actor, action, obj, outcome)


class AuditLog:
    def __init__(self, path: Path):
        self.path = path
        self._last: int | None = None

    def records(self) -> list[AuditRecord]:
        if not self.path.exists():
            return []
        return [AuditRecord.parse(x) for x in self.path.read_text(encoding="utf-8").splitlines() if x]

    @property
    def last_seq(self) -> int:
        if self._last is None:
            recs = self.records()
            self._last = recs[-1].seq if recs else 0
        return self._last

    def append(self, record: AuditRecord) -> None:
        log_event(self, record)

    def record(self, time: int, actor: str, action: str, obj: str, outcome: str = "ok") -> AuditRecord:
        rec = AuditRecord(self.last_seq + 1, time, actor, action, obj, outcome)
        log_event(self, rec)
        return rec


def log_event(log: AuditLog, record: AuditRecord) -> None:
    """Append *record*; its seq must follow the last one exactly."""
    if record.seq != log.last_seq + 1:
        raise SequenceGapError(f"expected seq {log.last_seq + 1}, got {record.seq}")
    if record.action not in ACTIONS:
        raise ValueError(f"unknown audit action {record.action!r}")
    if record.outcome not in OUTCOMES:
        raise ValueError(f"unknown audit outcome {record.outcome!r}")
    for field_value in (record.actor, record.object):
        if "\t" in field_value or "\n" in field_value:
            raise ValueError("audit fields cannot contain tabs or newlines")
    log.path.parent.mkdir(parents=True, exist_ok=True)
    with open(log.path, "a", encoding="utf-8") as fh:
        fh.write(record.line() + "\n")
        fh.flush()
        os.fsync(fh.fileno())
    log._last = record.seq


# --- repository ------------------------------------------------------------

class Repository:
    """Domain state handed to transition procedures: files, keys, users, log."""

    def __init__(self, root: str | os.PathLike, master_secret: bytes = DEFAULT_MASTER_SECRET,
                 wall_clock: bool = False):
        self.root = Path(root)
        self.keys = KeyStore(master_secret)
        self.wall_clock = wall_clock
        self.users = UserStore(self.root / "users.tsv")
        self.log = AuditLog(self.root / "log" / "audit.log")

    def init(self) -> Repository:
        for sub in ("plain", "pub", "acl", "log"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        return self

    def timestamp(self, logical: int) -> int:
        return int(_time.time()) if self.wall_clock else logical

    def plain_path(self, page_id: str) -> Path:
        return self.root / "plain" / f"{check_id(page_id, 'page id')}.html"

    def envelope_path(self, page_id: str) -> Path:
        return self.root / "pub" / f"{check_id(page_id, 'page id')}.env"

    def acl_path(self, page_id: str) -> Path:
        return self.root / "acl" / f"{check_id(page_id, 'page id')}.acl"

    def audit(self, time: int, actor: str, action: str, obj: str, outcome: str = "ok") -> AuditRecord:
        return self.log.record(self.timestamp(time), actor, action, obj, outcome)

    def load_envelope(self, page_id: str) -> SecurePageEnvelope:
        path = self.envelope_path(page_id)
        if not path.exists():
            raise NoSuchPageError(f"no published page {page_id}")
        return decode_envelope(path.read_bytes())

    def load_acl(self, page_id: str) -> AccessList | None:
        """The stored ACL, or None if it is missing or unreadable."""
        path = self.acl_path(page_id)
        if not path.exists():
            return None
        try:
            return decode_acl(path.read_bytes())
        except FormatError:
            return None


def register_user(repo: Repository, user_id: str, password: str) -> UserRecord:
    check_id(user_id, "user id")
    record = UserRecord(user_id, password_hash(user_id, password))
    repo.users.add(record)
    return record


def authenticate(repo: Repository, user_id: str, password: str, *, time: int = 0) -> bool:
    """Check credentials; unknown users and wrong passwords look the same."""
    record = repo.users.get(user_id)
    ok = record is not None and hmac.compare_digest(record.password_hash, password_hash(user_id, password))
    actor = user_id if ID_RE.match(user_id) else "system"
    repo.audit(time, actor, "auth", actor, "ok" if ok else "denied")
    return ok


def require_user(repo: Repository, user_id: str) -> UserRecord:
    record = repo.users.get(user_id)
    if record is None:
        raise UnknownUserError(f"unknown user {user_id}")
    return record


def stage_page(repo: Repository, page_id: str, author: str, content: bytes, *, time: int = 0) -> Path:
    require_user(repo, author)
    path = repo.plain_path(page_id)
    atomic_write(path, content)
    repo.audit(time, author, "create", page_id)
    return path


def cipher_page(repo: Repository, page_id: str, author: str, key: PageKey, *, time: int = 0) -> SecurePageEnvelope:
    """Encrypt and sign a staged page without publishing it."""
    require_user(repo, author)
    path = repo.plain_path(page_id)
    if not path.exists():
        raise NoSuchPageError(f"page {page_id} is not staged")
    ciphertext = xor_cipher(path.read_bytes(), key.key)
    env = SecurePageEnvelope.seal(page_id, author, key.key_id, repo.timestamp(time), ciphertext, key.key)
    repo.audit(time, author, "cipher", page_id)
    return env


def publish_envelope(repo: Repository, env: SecurePageEnvelope, *, time: int = 0) -> Path:
    path = repo.envelope_path(env.page_id)
    atomic_write(path, encode_envelope(env))
    repo.audit(time, env.author, "publish", env.page_id)
    return path


def cipher_and_publish(repo: Repository, page_id: str, author: str, key: PageKey, *,
                       time: int = 0) -> SecurePageEnvelope:
    env = cipher_page(repo, page_id, author, key, time=time)
    publish_envelope(repo, env, time=time)
    return env


def generate_access_list(repo: Repository, page_id: str, readers, server_key: bytes, *,
                         actor: str = "system", time: int = 0) -> AccessList:
    acl = make_access_list(page_id, readers, server_key)
    atomic_write(repo.acl_path(page_id), encode_acl(acl))
    repo.audit(time, actor, "gen_acl", page_id)
    return acl


def check_access(acl: AccessList | None, user_id: str, server_key: bytes) -> bool:
    """True iff the ACL signature verifies and *user_id* is a listed reader."""
    if acl is None:
        return False
    return acl.verify(server_key) and user_id in acl.readers


def _matches(env: SecurePageEnvelope, page_id: str, key: PageKey) -> bool:
    return env.page_id == page_id and env.key_id == key.key_id


def page_access_ok(repo: Repository, user_id: str, page_id: str) -> bool:
    """Read-only check that a fetch would succeed: envelope intact and user listed."""
    try:
        env = repo.load_envelope(page_id)
    except (NoSuchPageError, FormatError):
        return False
    key = repo.keys.page_key(page_id)
    return (_matches(env, page_id, key) and env.verify(key.key)
            and check_access(repo.load_acl(page_id), user_id, repo.keys.server_key))


def fetch_and_decipher(repo: Repository, user_id: str, page_id: str, key: PageKey, server_key: bytes, *,
                       time: int = 0) -> bytes:
    try:
        env = repo.load_envelope(page_id)
    except NoSuchPageError:
        repo.audit(time, user_id, "decipher", page_id, "error")
        raise
    except FormatError as exc:
        repo.audit(time, user_id, "decipher", page_id, "error")
        raise IntegrityError(f"envelope for {page_id} is unreadable: {exc}") from exc
    if not check_access(repo.load_acl(page_id), user_id, server_key):
        repo.audit(time, user_id, "decipher", page_id, "denied")
        raise AccessDeniedError(f"{user_id} may not read {page_id}")
    if not _matches(env, page_id, key):
        repo.audit(time, user_id, "decipher", page_id, "error")
        raise IntegrityError(f"envelope headers do not match {page_id}")
    if not env.verify(key.key):
        repo.audit(time, user_id, "decipher", page_id, "error")
        raise IntegrityError(f"signature mismatch on {page_id}")
    plaintext = xor_cipher(env.ciphertext, key.key)
    repo.audit(time, user_id, "decipher", page_id)
    return plaintext
