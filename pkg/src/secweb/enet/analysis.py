"""State-space analysis over occupancy markings.

Kernel attributes are abstracted away and every switch alternative whose
target is free is explored, so the graph over-approximates whatever the
concrete predicates would decide.
"""

from __future__ import annotations

import itertools
from collections import deque
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass

from secweb.enet.net import Net, Transition

AbstractMarking = frozenset  # frozenset[str] of occupied place ids

DEFAULT_STATE_LIMIT = 100_000

# (output-group index, chosen place) for every switch group; empty if none
BranchChoice = tuple[tuple[int, str], ...]


class StateLimitExceeded(RuntimeError):
    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"state-space exploration exceeded the limit of {limit} states")


@dataclass(frozen=True, order=True)
class Edge:
    source: frozenset[str]
    transition: str
    branch: BranchChoice
    target: frozenset[str]


@dataclass(frozen=True)
class ReachGraph:
    nodes: frozenset[frozenset[str]]
    edges: frozenset[Edge]
    initial: frozenset[str]

    @property
    def terminals(self) -> frozenset[frozenset[str]]:
        sources = {e.source for e in self.edges}
        return frozenset(n for n in self.nodes if n not in sources)

    def successors(self, node: frozenset[str]) -> list[Edge]:
        return sorted((e for e in self.edges if e.source == node), key=_edge_key)


@dataclass(frozen=True)
class SafetyViolation:
    marking: frozenset[str]
    transition: str
    place: str

    def __str__(self) -> str:
        return f"{self.transition} would put a second kernel into {self.place} at {label(self.marking)}"


@dataclass(frozen=True)
class SafetyReport:
    violations: tuple[SafetyViolation, ...]
    states: int

    @property
    def safe(self) -> bool:
        return not self.violations


def label(marking: Iterable[str]) -> str:
    return "{" + ", ".join(sorted(marking)) + "}"


def _edge_key(e: Edge) -> tuple:
    return (label(e.source), e.transition, e.branch, label(e.target))


def _expansions(
    t: Transition, marking: frozenset[str]
) -> Iterator[tuple[BranchChoice, frozenset[str]]]:
    if not marking.issuperset(t.inputs):
        return
    remaining = marking.difference(t.inputs)
    options = [[p for p in group if p not in remaining] for group in t.outputs]
    for picks in itertools.product(*options):
        branch = tuple((gi, p) for gi, p in enumerate(picks) if len(t.outputs[gi]) > 1)
        yield branch, remaining.union(picks)


def _explore(net: Net, limit: int, on_node=None) -> ReachGraph:
    initial = frozenset(net.initial_marking)
    nodes = {initial}
    edges: set[Edge] = set()
    queue = deque([initial])
    while queue:
        m = queue.popleft()
        if on_node is not None:
            on_node(m)
        for t in net.transitions:
            for branch, succ in _expansions(t, m):
                edges.add(Edge(m, t.id, branch, succ))
                if succ not in nodes:
                    if len(nodes) >= limit:
                        raise StateLimitExceeded(limit)
                    nodes.add(succ)
                    queue.append(succ)
    return ReachGraph(frozenset(nodes), frozenset(edges), initial)


def reachability(net: Net, limit: int = DEFAULT_STATE_LIMIT) -> ReachGraph:
    """Breadth-first reachability graph from the occupancy of Mo."""
    return _explore(net, limit)


def check_safety(net: Net, limit: int = DEFAULT_STATE_LIMIT) -> SafetyReport:
    """Find reachable markings where an input-ready transition would overfill a place.

    The firing rule itself refuses such firings, so a violation here means a
    transition that can only proceed by breaking the one-kernel-per-place rule.
    """
    found: list[SafetyViolation] = []

    def inspect(m: frozenset[str]) -> None:
        for t in net.transitions:
            if not m.issuperset(t.inputs):
                continue
            remaining = m.difference(t.inputs)
            for p in t.output_places():
                if p in remaining:
                    found.append(SafetyViolation(m, t.id, p))

    graph = _explore(net, limit, inspect)
    found.sort(key=lambda v: (label(v.marking), v.transition, v.place))
    return SafetyReport(tuple(found), len(graph.nodes))


def find_deadlocks(graph: ReachGraph, expected_terminals: Iterable[Iterable[str]]) -> list[frozenset[str]]:
    """Terminal markings that are not among the expected ones."""
    expected = {frozenset(m) for m in expected_terminals}
    return sorted((m for m in graph.terminals if m not in expected), key=label)


def branch_label(
    transition: str, branch: BranchChoice, names: Mapping[tuple[str, str], str] | None = None
) -> str:
    if not branch:
        return transition
    names = names or {}
    return transition + "/" + ",".join(names.get((transition, p), p) for _, p in branch)


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(
    graph: ReachGraph,
    branch_labels: Mapping[tuple[str, str], str] | None = None,
    name: str = "reachability",
) -> str:
    """Graphviz text. *branch_labels* maps (transition, chosen place) to a
    display name such as ``grant``; unnamed branches show the place id."""
    lines = [f"digraph {_quote(name)} {{"]
    for node in sorted(graph.nodes, key=label):
        attrs = " shape=doublecircle" if node in graph.terminals else ""
        if node == graph.initial:
            attrs += " style=bold"
        lines.append(f"  {_quote(label(node))} [label={_quote(label(node))}{attrs}];")
    for e in sorted(graph.edges, key=_edge_key):
        lines.append(
            f"  {_quote(label(e.source))} -> {_quote(label(e.target))}"
            f" [label={_quote(branch_label(e.transition, e.branch, branch_labels))}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
