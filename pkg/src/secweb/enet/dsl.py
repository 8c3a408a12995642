"""Line-oriented net description language.

::

    net ENC
    place bp1 peripheral
    place br1 resolution
    place b1
    trans t1 in bp1 out b1 proc create_plain_page
    trans t4 in b3 out b4|b5 res br3 proc reply_mode pred access_granted
    trans t5 in b5 out - proc exit
    init bp1 {user="alice", n=3, ok=true, raw=0x00ff}

``#`` starts a comment, blank lines are ignored. Places may be referenced
before they are declared.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from secweb.enet.kernel import ATTR_NAME_RE, Kernel, format_attrs, literal_value
from secweb.enet.net import Net, NetValidationError, Place, PlaceKind, Transition, validate

_TOKEN_RE = re.compile(
    r'(?P<str>"(?:[^"\\]|\\.)*")'
    r"|(?P<hex>0x[0-9a-fA-F]*)"
    r"|(?P<int>-?[0-9]+)"
    r"|(?P<word>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>[,|{}=\-])"
    r"|(?P<space>[ \t]+)"
    r"|(?P<comment>#.*)"
)


class NetSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        self.line = line
        self.column = column
        self.reason = message
        super().__init__(f"line {line}, column {column}: {message}")


@dataclass
class _Tok:
    kind: str
    text: str
    col: int


def _tokenize(line: str, lineno: int) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while pos < len(line):
        m = _TOKEN_RE.match(line, pos)
        if not m:
            raise NetSyntaxError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
        kind = m.lastgroup
        if kind == "comment":
            break
        if kind != "space":
            toks.append(_Tok(kind, m.group(), pos + 1))
        pos = m.end()
    return toks


class _Line:
    """Cursor over the tokens of one source line."""

    def __init__(self, toks: list[_Tok], lineno: int, length: int):
        self.toks = toks
        self.i = 0
        self.lineno = lineno
        self.eol_col = length + 1

    def _fail(self, expected: str) -> NetSyntaxError:
        if self.i < len(self.toks):
            tok = self.toks[self.i]
            return NetSyntaxError(f"expected {expected}, got {tok.text!r}", self.lineno, tok.col)
        return NetSyntaxError(f"expected {expected}, got end of line", self.lineno, self.eol_col)

    def peek(self, text: str | None = None) -> bool:
        if self.i >= len(self.toks):
            return False
        return text is None or self.toks[self.i].text == text

    def word(self, what: str = "identifier") -> tuple[str, int]:
        if self.i < len(self.toks) and self.toks[self.i].kind == "word":
            tok = self.toks[self.i]
            self.i += 1
            return tok.text, tok.col
        raise self._fail(what)

    def expect(self, text: str) -> None:
        if self.peek(text):
            self.i += 1
            return
        raise self._fail(repr(text))

    def accept(self, text: str) -> bool:
        if self.peek(text):
            self.i += 1
            return True
        return False

    def literal(self):
        if self.i < len(self.toks):
            tok = self.toks[self.i]
            if tok.kind in ("str", "hex", "int") or tok.text in ("true", "false"):
                self.i += 1
                try:
                    return literal_value(tok.text)
                except ValueError as exc:
                    raise NetSyntaxError(str(exc), self.lineno, tok.col) from None
        raise self._fail("literal")

    def end(self) -> None:
        if self.i < len(self.toks):
            raise self._fail("end of line")


def _id_list(cur: _Line, sep: str) -> list[tuple[str, int]]:
    items = [cur.word()]
    while cur.accept(sep):
        items.append(cur.word())
    return items


def parse_net(text: str, *, check: bool = True) -> Net:
    """Parse DSL text into a :class:`Net`.

    Syntax errors, duplicate ids and unknown place references raise
    :class:`NetSyntaxError` carrying the offending line. With ``check`` set,
    structural-rule violations raise :class:`NetValidationError`.
    """
    name: str | None = None
    places: list[Place] = []
    transitions: list[Transition] = []
    init: dict[str, Kernel] = {}
    ids: dict[str, int] = {}
    refs: list[tuple[str, int, int]] = []

    def declare(ident: str, lineno: int, col: int) -> None:
        if ident in ids:
            raise NetSyntaxError(f"duplicate id {ident} (first declared on line {ids[ident]})", lineno, col)
        ids[ident] = lineno

    # only \n ends a line; str.splitlines would also split inside quoted text
    for lineno, raw in enumerate(text.split("\n"), start=1):
        raw = raw.removesuffix("\r")
        toks = _tokenize(raw, lineno)
        if not toks:
            continue
        cur = _Line(toks, lineno, len(raw))
        keyword, kcol = cur.word("declaration keyword")

        if keyword == "net":
            if name is not None:
                raise NetSyntaxError("duplicate net header", lineno, kcol)
            name, _ = cur.word("net name")
        elif keyword == "place":
            pid, col = cur.word("place id")
            declare(pid, lineno, col)
            kind = PlaceKind.STANDARD
            if cur.peek():
                kword, kc = cur.word("place kind")
                if kword not in ("peripheral", "resolution"):
                    raise NetSyntaxError(f"unknown place kind {kword!r}", lineno, kc)
                kind = PlaceKind(kword)
            places.append(Place(pid, kind))
        elif keyword == "trans":
            tid, col = cur.word("transition id")
            declare(tid, lineno, col)
            cur.expect("in")
            inputs = _id_list(cur, ",")
            cur.expect("out")
            groups: list[list[tuple[str, int]]] = []
            if not cur.accept("-"):
                groups.append(_id_list(cur, "|"))
                while cur.accept(","):
                    groups.append(_id_list(cur, "|"))
            res = None
            if cur.accept("res"):
                res = cur.word("resolution place")
            cur.expect("proc")
            proc, _ = cur.word("procedure name")
            pred = None
            if cur.accept("pred"):
                pred, _ = cur.word("predicate name")
            for pid, c in inputs + [x for g in groups for x in g] + ([res] if res else []):
                refs.append((pid, lineno, c))
            transitions.append(
                Transition(
                    tid,
                    tuple(p for p, _ in inputs),
                    tuple(tuple(p for p, _ in g) for g in groups),
                    proc,
                    res[0] if res else None,
                    pred,
                )
            )
        elif keyword == "init":
            pid, col = cur.word("place id")
            if pid in init:
                raise NetSyntaxError(f"place {pid} initialized twice", lineno, col)
            refs.append((pid, lineno, col))
            cur.expect("{")
            attrs: dict[str, object] = {}
            if not cur.peek("}"):
                while True:
                    key, kc = cur.word("attribute name")
                    if not ATTR_NAME_RE.match(key):
                        raise NetSyntaxError(f"bad attribute name {key!r}", lineno, kc)
                    if key in attrs:
                        raise NetSyntaxError(f"duplicate attribute {key}", lineno, kc)
                    cur.expect("=")
                    attrs[key] = cur.literal()
                    if not cur.accept(","):
                        break
            cur.expect("}")
            init[pid] = Kernel(attrs)
        else:
            raise NetSyntaxError(f"unknown declaration {keyword!r}", lineno, kcol)
        cur.end()

    if name is None:
        raise NetSyntaxError("missing net header", 1)
    place_ids = {p.id for p in places}
    for pid, lineno, col in refs:
        if pid not in place_ids:
            raise NetSyntaxError(f"unknown place {pid}", lineno, col)

    net = Net(name, tuple(places), tuple(transitions), init)
    if check:
        violations = validate(net)
        if violations:
            raise NetValidationError(violations)
    return net


def print_net(net: Net) -> str:
    """Canonical DSL text for *net*."""
    lines = [f"net {net.name}"]
    for p in net.places:
        lines.append(f"place {p.id}" if p.kind is PlaceKind.STANDARD else f"place {p.id} {p.kind.value}")
    for t in net.transitions:
        outs = ",".join("|".join(g) for g in t.outputs) if t.outputs else "-"
        parts = [f"trans {t.id} in {','.join(t.inputs)} out {outs}"]
        if t.resolution:
            parts.append(f"res {t.resolution}")
        parts.append(f"proc {t.procedure}")
        if t.predicate:
            parts.append(f"pred {t.predicate}")
        lines.append(" ".join(parts))
    for pid, kernel in net.initial_marking.items():
        lines.append(f"init {pid} {format_attrs(kernel)}")
    return "\n".join(lines) + "\n"
