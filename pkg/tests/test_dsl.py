from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import GOLDEN
from secweb.enet import Kernel, Net, NetSyntaxError, NetValidationError, Place, PlaceKind, Transition
from secweb.enet.dsl import parse_net, print_net
from secweb.enet.kernel import format_literal, parse_literal
from secweb.models import ena_net, enc_net, model_source


def test_enc_file_parses_to_eleven_places_six_transitions():
    net = parse_net(model_source("enc"))
    assert len(net.places) == 11
    assert [t.id for t in net.transitions] == ["t1", "t2", "t3", "t4", "t5", "t6"]


def test_minimal_net():
    net = parse_net("net X\nplace p peripheral\n")
    assert net.name == "X"
    assert net.places == (Place("p", PlaceKind.PERIPHERAL),)
    assert net.transitions == ()


def test_unknown_place_reports_line():
    text = "net X\nplace a\n\ntrans t1 in a out b9 proc p\n"
    with pytest.raises(NetSyntaxError) as err:
        parse_net(text)
    assert err.value.line == 4
    assert "unknown place b9" in str(err.value)


def test_syntax_error_line_and_column():
    with pytest.raises(NetSyntaxError) as err:
        parse_net("net X\nplace a\ntrans t1 in a out a proc\n")
    assert (err.value.line, err.value.column) == (3, 25)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("net X\nplace a\nplace a\n", "duplicate id a"),
        ("net X\nplace a strange\n", "unknown place kind"),
        ("place a\n", "missing net header"),
        ("net X\nnet Y\n", "duplicate net header"),
        ("net X\nplace a\ninit a {x=1, x=2}\n", "duplicate attribute x"),
        ("net X\nplace a\ninit a {Bad=1}\n", "bad attribute name"),
        ("net X\nplace a\ninit a {x=0xabc}\n", "odd number of hex digits"),
        ("net X\nplace a @\n", "unexpected character"),
        ("net X\nfoo a\n", "unknown declaration"),
    ],
)
def test_syntax_errors(text, fragment):
    with pytest.raises(NetSyntaxError, match=fragment):
        parse_net(text)


def test_structural_violation_raises_unless_unchecked():
    text = "net X\nplace a\nplace b\nplace c\ntrans t1 in a out b proc p\ntrans t2 in a out c proc p\n"
    with pytest.raises(NetValidationError, match="a has 2 consumers"):
        parse_net(text)
    assert len(parse_net(text, check=False).transitions) == 2


def test_comments_blank_lines_and_forward_references():
    text = """
    # leading comment
    net X   # trailing
    trans t1 in a out b|c, d res r proc go pred pick

    place a peripheral
    place b
    place c
    place d
    place r resolution
    init a {s="q\\"uote", n=-5, f=false, raw=0x00ff, empty=0x}
    """
    net = parse_net(text)
    t = net.transition("t1")
    assert t.outputs == (("b", "c"), ("d",))
    assert t.resolution == "r" and t.predicate == "pick"
    assert net.initial_marking["a"] == Kernel(s='q"uote', n=-5, f=False, raw=b"\x00\xff", empty=b"")


def test_print_zero_transitions_is_header_and_places():
    net = Net("X", (Place("p", PlaceKind.PERIPHERAL), Place("q")))
    assert print_net(net) == "net X\nplace p peripheral\nplace q\n"


def test_enc_print_matches_golden():
    assert print_net(enc_net()) == (GOLDEN / "enc_canonical.enet").read_text()


def test_print_is_canonical_fixpoint():
    for name in ("enc", "ena"):
        text = print_net(parse_net(model_source(name)))
        assert print_net(parse_net(text)) == text


@pytest.mark.parametrize("build, name", [(enc_net, "enc"), (ena_net, "ena")])
def test_roundtrip_and_builder_equality(build, name):
    parsed = parse_net(model_source(name))
    assert parsed == build()
    assert parse_net(print_net(parsed)) == parsed


# --- property: roundtrip over generated nets ----------------------------------

_ids = st.from_regex(r"[a-z][a-z0-9_]{0,5}", fullmatch=True).filter(
    lambda s: s not in {"in", "out", "res", "proc", "pred", "true", "false"}
)
_values = st.one_of(
    st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=0x2FF, blacklist_characters="\x7f"), max_size=8),
    st.integers(min_value=-(2**63), max_value=2**63 - 1),
    st.booleans(),
    st.binary(max_size=6),
)


@st.composite
def nets(draw):
    names = draw(st.lists(_ids, min_size=1, max_size=10, unique=True))
    kinds = [draw(st.sampled_from(list(PlaceKind))) for _ in names]
    places = tuple(Place(n, k) for n, k in zip(names, kinds))
    holders = [p.id for p in places if p.kind is not PlaceKind.RESOLUTION]
    resolvers = [p.id for p in places if p.kind is PlaceKind.RESOLUTION]
    transitions = []
    if holders:
        for i in range(draw(st.integers(0, 4))):
            ins = draw(st.lists(st.sampled_from(holders), min_size=1, max_size=2, unique=True))
            groups = draw(st.lists(st.lists(st.sampled_from(holders), min_size=1, max_size=2, unique=True), max_size=2))
            branches = any(len(g) > 1 for g in groups)
            res = draw(st.none() | st.sampled_from(resolvers)) if resolvers else None
            transitions.append(
                Transition(f"T{i}", tuple(ins), tuple(tuple(g) for g in groups), "proc_x", res,
                           "pick" if branches else None)
            )
    marking = {}
    for pid in draw(st.lists(st.sampled_from(holders), unique=True, max_size=2)) if holders else []:
        keys = draw(st.lists(st.from_regex(r"[a-z][a-z0-9_]{0,4}", fullmatch=True), unique=True, max_size=3))
        marking[pid] = Kernel({k: draw(_values) for k in keys})
    return Net(draw(_ids), places, tuple(transitions), marking)


@settings(max_examples=200, deadline=None)
@given(nets())
def test_parse_print_roundtrip_property(net):
    assert parse_net(print_net(net), check=False) == net


@given(_values)
def test_literal_roundtrip(value):
    back = parse_literal(format_literal(value))
    assert back == value and type(back) is type(value)
