from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from secweb.domain.crypto import sign
from secweb.domain.errors import FormatError, MalformedIdError
from secweb.domain.formats import (
    AccessList,
    SecurePageEnvelope,
    decode_acl,
    decode_envelope,
    encode_acl,
    encode_envelope,
    make_access_list,
)

KEY = b"0123456789abcdef"


def _env(ct=b"\x01\x02", created=3):
    return SecurePageEnvelope.seal("p1", "alice", "page:p1", created, ct, KEY)


def test_empty_ciphertext_layout():
    data = encode_envelope(_env(b"", 0))
    lines = data.decode().split("\n")
    assert lines[:6] == ["SECWEB1", "page_id: p1", "author: alice", "key_id: page:p1", "created: 0", ""]
    assert lines[6] == ""
    assert lines[7] == "sig: " + sign(KEY, b"").hex()
    assert decode_envelope(data) == _env(b"", 0)
    assert encode_envelope(decode_envelope(data)) == data


def test_bad_magic():
    data = encode_envelope(_env()).replace(b"SECWEB1", b"SECWEB2", 1)
    with pytest.raises(FormatError, match="bad magic"):
        decode_envelope(data)


@pytest.mark.parametrize(
    "mutate, fragment",
    [
        (lambda b: b.replace(b"author: ", b"writer: "), "missing header"),
        (lambda b: b.replace(b"\n\n", b"\nx\n"), "blank line"),
        (lambda b: b.replace(b"created: 3", b"created: 03"), "created"),
        (lambda b: b.replace(b"AQI=", b"AQI*"), "base64"),
        (lambda b: b.replace(b"AQI=", b"AQJ="), "non-canonical"),
        (lambda b: b.replace(b"sig: ", b"sig:  "), "sig line"),
        (lambda b: b[:-1], "final newline"),
        (lambda b: b + b"extra\n", "expected 8 lines"),
        (lambda b: b"\xff" + b, "UTF-8"),
    ],
)
def test_malformed_envelopes(mutate, fragment):
    with pytest.raises(FormatError, match=fragment):
        decode_envelope(mutate(encode_envelope(_env())))


_id = st.from_regex(r"[a-z][a-z0-9_]{0,8}", fullmatch=True)


@st.composite
def envelopes(draw):
    return SecurePageEnvelope(
        draw(_id), draw(_id),
        draw(st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=0x24F, blacklist_characters="\x7f"),
                     min_size=1, max_size=12)),
        draw(st.integers(0, 2**40)), draw(st.binary(max_size=80)), draw(st.binary(min_size=32, max_size=32)),
    )


@settings(max_examples=100)
@given(envelopes())
def test_envelope_roundtrip(env):
    data = encode_envelope(env)
    assert decode_envelope(data) == env
    assert encode_envelope(decode_envelope(data)) == data


def test_acl_sorted_deduped_and_signed():
    acl = make_access_list("p1", ["bob", "alice", "bob"], b"server")
    assert acl.readers == ("alice", "bob")
    data = encode_acl(acl)
    assert data.decode().split("\n")[:4] == ["SECACL1", "page_id: p1", "alice", "bob"]
    body, sig_line = data[: data.rindex(b"sig: ")], data[data.rindex(b"sig: "):]
    assert sig_line == b"sig: " + sign(b"server", body).hex().encode() + b"\n"
    back = decode_acl(data)
    assert back == acl and back.verify(b"server")
    assert encode_acl(back) == data


def test_empty_acl():
    acl = make_access_list("p1", [], b"server")
    assert acl.readers == ()
    assert decode_acl(encode_acl(acl)) == acl


def test_acl_rejects_bad_reader():
    with pytest.raises(MalformedIdError):
        make_access_list("p1", ["Bob"], b"server")


def test_acl_decoding_is_strict():
    good = encode_acl(make_access_list("p1", ["alice", "bob"], b"server"))
    with pytest.raises(FormatError):
        decode_acl(good.replace(b"alice\nbob", b"bob\nalice"))
    with pytest.raises(FormatError):
        decode_acl(good.replace(b"SECACL1", b"SECACL9"))
    with pytest.raises(FormatError):
        decode_acl(b"SECACL1\n")


def test_acl_verify_fails_after_edit():
    acl = make_access_list("p1", ["alice"], b"server")
    forged = AccessList("p1", ("alice", "mallory"), acl.sig)
    assert not forged.verify(b"server")
