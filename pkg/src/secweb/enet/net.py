"""E-net structure: places, generalized transitions, nets, and validation."""

from __future__ import annotations

import enum
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from types import MappingProxyType

from secweb.enet.kernel import Kernel


class PlaceKind(enum.Enum):
    PERIPHERAL = "peripheral"
    RESOLUTION = "resolution"
    STANDARD = "standard"


@dataclass(frozen=True)
class Place:
    id: str
    kind: PlaceKind = PlaceKind.STANDARD

    @property
    def holds_kernels(self) -> bool:
        return self.kind is not PlaceKind.RESOLUTION


@dataclass(frozen=True)
class Transition:
    """A generalized E-net transition.

    ``outputs`` is a tuple of output groups. Every group receives exactly one
    kernel per firing; a group with several alternatives is a switch and the
    transition's predicate picks the alternative. No groups at all makes the
    transition absorbing.
    """

    id: str
    inputs: tuple[str, ...]
    outputs: tuple[tuple[str, ...], ...]
    procedure: str
    resolution: str | None = None
    predicate: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(tuple(g) for g in self.outputs))

    @property
    def branches(self) -> bool:
        return any(len(g) > 1 for g in self.outputs)

    @property
    def absorbing(self) -> bool:
        return not self.outputs

    def output_places(self) -> list[str]:
        return [p for g in self.outputs for p in g]


@dataclass(frozen=True)
class Net:
    """The septuple ``<B, Bp, Br, T, F, H, Mo>``.

    ``places`` is B in declaration order; Bp and Br are views over it. The
    arc relations F and H are derived from transition inputs and outputs.
    Construction does not validate; use :func:`validate`.
    """

    name: str
    places: tuple[Place, ...]
    transitions: tuple[Transition, ...] = ()
    initial_marking: Mapping[str, Kernel] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "places", tuple(self.places))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        object.__setattr__(self, "initial_marking", MappingProxyType(dict(self.initial_marking)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Net):
            return NotImplemented
        return (
            self.name == other.name
            and self.places == other.places
            and self.transitions == other.transitions
            and list(self.initial_marking.items()) == list(other.initial_marking.items())
        )

    def __hash__(self) -> int:
        return hash((self.name, self.places, self.transitions))

    def place(self, pid: str) -> Place:
        for p in self.places:
            if p.id == pid:
                return p
        raise KeyError(pid)

    def transition(self, tid: str) -> Transition:
        for t in self.transitions:
            if t.id == tid:
                return t
        raise KeyError(tid)

    def place_ids(self, kind: PlaceKind | None = None) -> list[str]:
        return [p.id for p in self.places if kind is None or p.kind is kind]

    @property
    def peripheral(self) -> list[str]:
        return self.place_ids(PlaceKind.PERIPHERAL)

    @property
    def resolution(self) -> list[str]:
        return self.place_ids(PlaceKind.RESOLUTION)

    @property
    def standard(self) -> list[str]:
        return self.place_ids(PlaceKind.STANDARD)

    @property
    def kernel_places(self) -> list[str]:
        return [p.id for p in self.places if p.holds_kernels]

    def arcs_in(self) -> list[tuple[str, str]]:
        """F: (place, transition) pairs."""
        return [(p, t.id) for t in self.transitions for p in t.inputs]

    def arcs_out(self) -> list[tuple[str, str]]:
        """H: (transition, place) pairs, every switch alternative included."""
        return [(t.id, p) for t in self.transitions for p in t.output_places()]


@dataclass(frozen=True)
class Violation:
    element: str
    rule: str
    message: str

    def __str__(self) -> str:
        return self.message


class NetValidationError(ValueError):
    def __init__(self, violations: Iterable[Violation]):
        self.violations = list(violations)
        super().__init__("; ".join(v.message for v in self.violations))


def validate(net: Net) -> list[Violation]:
    """Check every structural rule; an empty list means the net is valid."""
    out: list[Violation] = []

    def bad(element: str, rule: str, message: str) -> None:
        out.append(Violation(element, rule, message))

    kinds: dict[str, PlaceKind] = {}
    for p in net.places:
        if p.id in kinds:
            bad(p.id, "duplicate-id", f"duplicate place {p.id}")
        kinds[p.id] = p.kind

    seen_t: set[str] = set()
    consumers: Counter[str] = Counter()
    producers: Counter[str] = Counter()
    res_users: Counter[str] = Counter()

    for t in net.transitions:
        if t.id in seen_t or t.id in kinds:
            bad(t.id, "duplicate-id", f"duplicate id {t.id}")
        seen_t.add(t.id)

        if not t.inputs:
            bad(t.id, "no-inputs", f"{t.id} has no input places")
        for pid, n in Counter(t.inputs).items():
            if n > 1:
                bad(t.id, "repeated-place", f"{pid} repeated in inputs of {t.id}")
        for gi, group in enumerate(t.outputs):
            if not group:
                bad(t.id, "empty-group", f"{t.id} output group {gi} is empty")
            for pid, n in Counter(group).items():
                if n > 1:
                    bad(t.id, "repeated-place", f"{pid} repeated in output group {gi} of {t.id}")
        for pid, n in Counter(p for g in t.outputs for p in set(g)).items():
            if n > 1:
                bad(t.id, "repeated-place", f"{pid} appears in several output groups of {t.id}")

        for pid in list(t.inputs) + t.output_places():
            kind = kinds.get(pid)
            if kind is None:
                bad(t.id, "unknown-place", f"unknown place {pid} in {t.id}")
            elif kind is PlaceKind.RESOLUTION:
                bad(t.id, "resolution-arc", f"{t.id} uses resolution place {pid} as input/output")
        consumers.update(set(t.inputs))
        producers.update(set(t.output_places()))

        if t.resolution is not None:
            kind = kinds.get(t.resolution)
            if kind is None:
                bad(t.id, "unknown-place", f"unknown place {t.resolution} in {t.id}")
            elif kind is not PlaceKind.RESOLUTION:
                bad(t.id, "resolution-kind", f"{t.id} resolution {t.resolution} is not a resolution place")
            res_users[t.resolution] += 1
        if t.branches and t.predicate is None:
            bad(t.id, "predicate-missing", f"{t.id} branches without predicate")
        if t.predicate is not None and not t.branches:
            bad(t.id, "predicate-unused", f"{t.id} has predicate {t.predicate} but no switch")

    for pid, n in consumers.items():
        if n > 1:
            bad(pid, "consumers", f"{pid} has {n} consumers")
    for pid, n in producers.items():
        if n > 1:
            bad(pid, "producers", f"{pid} has {n} producers")
    for pid, n in res_users.items():
        if n > 1:
            bad(pid, "resolution-shared", f"{pid} resolves {n} transitions")

    for pid, kernel in net.initial_marking.items():
        kind = kinds.get(pid)
        if kind is None:
            bad(pid, "unknown-place", f"unknown place {pid} in initial marking")
        elif kind is PlaceKind.RESOLUTION:
            bad(pid, "marked-resolution", f"resolution place {pid} cannot hold a kernel")
        if not isinstance(kernel, Kernel):
            bad(pid, "kernel-type", f"initial marking of {pid} is not a kernel")
    return out
