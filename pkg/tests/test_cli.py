from __future__ import annotations

import dataclasses

import pytest

from secweb.cli import main
from secweb.domain.formats import decode_envelope, encode_envelope
from secweb.models import model_source


@pytest.fixture
def files(tmp_path):
    enc = tmp_path / "enc.enet"
    ena = tmp_path / "ena.enet"
    enc.write_text(model_source("enc"))
    ena.write_text(model_source("ena"))
    content = tmp_path / "hello.txt"
    content.write_bytes(b"hello")
    return enc, ena, content


@pytest.fixture
def cli(tmp_path, capsys):
    store = str(tmp_path / "store")

    def call(*argv):
        code = main(["--store", store, *argv])
        out = capsys.readouterr()
        return code, out.out, out.err

    return call


def test_net_validate(cli, files):
    assert cli("net", "validate", str(files[0])) == (0, "11 places, 6 transitions, OK\n", "")


def test_net_validate_reports_violations(cli, tmp_path):
    bad = tmp_path / "bad.enet"
    bad.write_text("net X\nplace b1\nplace b2\nplace b3\ntrans t1 in b1 out b2 proc p\ntrans t2 in b1 out b3 proc p\n")
    code, out, _ = cli("net", "validate", str(bad))
    assert code == 2 and "b1 has 2 consumers" in out


def test_net_parse_error_exit_2(cli, tmp_path):
    bad = tmp_path / "bad.enet"
    bad.write_text("net X\ntrans t1 in b9 out - proc p\n")
    code, _, err = cli("net", "validate", str(bad))
    assert code == 2 and "unknown place b9" in err and "line 2" in err


def test_net_analyze_ena(cli, files, tmp_path):
    dot = tmp_path / "ena.dot"
    code, out, _ = cli("net", "analyze", str(files[1]), "--dot", str(dot))
    assert code == 0
    assert out == "nodes=11 edges=11 safe=yes deadlocks=0 (terminals: {}, {b9})\n"
    assert 'label="t4/grant"' in dot.read_text()


def test_net_analyze_unexpected_terminal(cli, files):
    code, out, _ = cli("net", "analyze", str(files[1]), "--expect", "")
    assert "deadlocks=1" in out and "deadlock: {b9}" in out


def test_net_simulate(cli, files, tmp_path):
    assert cli("net", "simulate", str(files[0]), "--max-steps", "0") == (0, "steps=0 final={bp1}\n", "")
    trace = tmp_path / "t.tsv"
    code, out, _ = cli("net", "simulate", str(files[1]), "--kernel", "access_granted=false",
                       "--kernel", "user=bob", "--trace", str(trace))
    assert code == 0
    lines = trace.read_text().splitlines()
    assert [ln.split("\t")[1] for ln in lines] == ["t1", "t2", "t3", "t4", "t5"]
    assert lines[3].split("\t")[4] == "0:b5"
    assert 'user="bob"' in lines[0]


def test_net_simulate_predicate_failure_exit_3(cli, files):
    code, _, err = cli("net", "simulate", str(files[1]))
    assert code == 3 and "t4" in err


def test_user_commands(cli):
    assert cli("user", "add", "alice", "pw1")[0] == 0
    assert cli("user", "add", "alice", "pw1")[0] == 2
    assert cli("user", "add", "Bad", "pw1")[0] == 2
    assert cli("user", "list") == (0, "alice\n", "")


def _publish(cli, files):
    cli("user", "add", "alice", "pw1")
    cli("user", "add", "bob", "pw2")
    return cli("enc", "--user", "alice", "--page", "p1", "--content", str(files[2]), "--grant", "alice,bob")


def test_enc_and_log(cli, files):
    assert _publish(cli, files) == (0, "t1 t2 t3 t4 t5 t6\n", "")
    code, out, _ = cli("log", "show")
    records = [ln.split("\t") for ln in out.splitlines()]
    assert code == 0 and len(records) == 5
    assert [r[0] for r in records] == ["1", "2", "3", "4", "5"]
    assert [r[3] for r in records] == ["create", "set_rights", "cipher", "publish", "gen_acl"]


def test_enc_unknown_author_exit_3(cli, files):
    code, _, err = cli("enc", "--user", "zed", "--page", "p1", "--content", str(files[2]), "--grant", "zed")
    assert code == 3 and "t1" in err


def test_ena_outcomes(cli, files, tmp_path):
    _publish(cli, files)
    code, out, _ = cli("ena", "--user", "eve", "--password", "x", "--page", "p1")
    assert code == 1 and out.startswith("denied at security mode (t5)")

    env = tmp_path / "store" / "pub" / "p1.env"
    sealed = decode_envelope(env.read_bytes())
    flipped = bytes([sealed.ciphertext[0] ^ 1]) + sealed.ciphertext[1:]
    env.write_bytes(encode_envelope(dataclasses.replace(sealed, ciphertext=flipped)))
    code, out, _ = cli("ena", "--user", "bob", "--password", "pw2", "--page", "p1")
    assert code == 1 and out.startswith("denied at page (t8)")


def test_ena_displays_plaintext(tmp_path, files, capfdbinary):
    store = str(tmp_path / "s")
    main(["--store", store, "user", "add", "alice", "pw1"])
    main(["--store", store, "enc", "--user", "alice", "--page", "p1", "--content", str(files[2]),
          "--grant", "alice"])
    capfdbinary.readouterr()
    assert main(["--store", store, "ena", "--user", "alice", "--password", "pw1", "--page", "p1"]) == 0
    out = capfdbinary.readouterr()
    assert out.out == b"hello"
    assert out.err == b"t1 t2 t3 t4 t6 t7 t9\n"


def test_negative_max_steps(cli, files):
    assert cli("net", "simulate", str(files[0]), "--max-steps", "-1")[0] == 2
