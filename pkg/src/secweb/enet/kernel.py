"""Kernels: the attributed tokens that flow through an E-net.

A kernel is an immutable mapping from attribute names to scalar values.
The same literal syntax is used by the net DSL (``init`` lines), by the
CLI ``--kernel k=v`` flags and by serialized traces, so the formatting and
parsing helpers for literals live here too.
"""

from __future__ import annotations

import re
from collections.abc import Iterator, Mapping
from typing import Union

AttrValue = Union[str, int, bool, bytes]

ATTR_NAME_RE = re.compile(r"[a-z][a-z0-9_]*\Z")
_CONTROL_RE = re.compile(r"[\x00-\x1f\x7f]")

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


def check_value(value: object) -> AttrValue:
    """Return *value* unchanged if it is a legal attribute value, else raise."""
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        if not INT64_MIN <= value <= INT64_MAX:
            raise ValueError(f"integer attribute out of 64-bit range: {value}")
        return value
    if isinstance(value, str):
        if _CONTROL_RE.search(value):
            raise ValueError(f"text attribute contains control characters: {value!r}")
        return value
    if isinstance(value, (bytes, bytearray, memoryview)):
        return bytes(value)
    raise TypeError(f"unsupported attribute value type: {type(value).__name__}")


class Kernel(Mapping[str, AttrValue]):
    """An immutable attribute map. Equality is attribute-wise."""

    __slots__ = ("_attrs", "_hash")

    def __init__(self, attributes: Mapping[str, object] | None = None, /, **kwargs: object):
        attrs: dict[str, AttrValue] = {}
        for source in (attributes or {}, kwargs):
            for name, value in source.items():
                if not isinstance(name, str) or not ATTR_NAME_RE.match(name):
                    raise ValueError(f"bad attribute name: {name!r}")
                attrs[name] = check_value(value)
        self._attrs = attrs
        self._hash: int | None = None

    def __getitem__(self, name: str) -> AttrValue:
        return self._attrs[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._attrs)

    def __len__(self) -> int:
        return len(self._attrs)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Kernel):
            return _typed(self._attrs) == _typed(other._attrs)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(_typed(self._attrs).items()))
        return self._hash

    def __repr__(self) -> str:
        return f"Kernel({format_attrs(self)})"

    def extend(self, **updates: object) -> Kernel:
        """Return a new kernel with *updates* added on top of this one."""
        return Kernel(self._attrs, **updates)

    @classmethod
    def merge(cls, kernels: Iterator[Kernel] | list[Kernel]) -> Kernel:
        """Union of several kernels; later kernels win on name clashes."""
        attrs: dict[str, AttrValue] = {}
        for k in kernels:
            attrs.update(k._attrs)
        return cls(attrs)


def _typed(attrs: Mapping[str, AttrValue]) -> dict[str, tuple[type, AttrValue]]:
    # True == 1 in Python; kernels must still tell them apart
    return {k: (type(v), v) for k, v in attrs.items()}


# --- literal syntax --------------------------------------------------------

def format_literal(value: AttrValue) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, bytes):
        return "0x" + value.hex()
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_attrs(kernel: Mapping[str, AttrValue]) -> str:
    """``{a=1, b="x"}`` in the kernel's own attribute order."""
    body = ", ".join(f"{k}={format_literal(v)}" for k, v in kernel.items())
    return "{" + body + "}"


LITERAL_RE = re.compile(
    r'"(?:[^"\\]|\\.)*"'
    r"|0x[0-9a-fA-F]*"
    r"|-?[0-9]+"
    r"|true\b|false\b"
)


def parse_literal(text: str) -> AttrValue:
    """Parse one complete literal; raises ValueError on anything else."""
    m = LITERAL_RE.match(text)
    if not m or m.end() != len(text):
        raise ValueError(f"not a literal: {text!r}")
    return literal_value(text)


def literal_value(token: str) -> AttrValue:
    if token == "true":
        return True
    if token == "false":
        return False
    if token.startswith('"'):
        return check_value(re.sub(r"\\(.)", r"\1", token[1:-1]))
    if token.startswith("0x"):
        digits = token[2:]
        if len(digits) % 2:
            raise ValueError(f"odd number of hex digits in {token!r}")
        return bytes.fromhex(digits)
    return check_value(int(token))
