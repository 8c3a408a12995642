"""Deterministic E-net firing semantics.

Firing rule: a transition is enabled when every input place holds a kernel
and, for each output group, the target place (the single alternative, or the
one the predicate picks for a switch) is empty once the inputs have been
consumed. Among enabled transitions the scheduler always takes the first in
declaration order. Every firing advances the logical clock by one.
"""

from __future__ import annotations

from collections.abc import Callable, Iterator, Mapping
from dataclasses import dataclass, field, replace
from typing import Any

from secweb.enet.kernel import Kernel, format_attrs
from secweb.enet.net import Net, PlaceKind, Transition


class SimulationError(RuntimeError):
    """Base class for firing failures."""


class NotEnabledError(SimulationError):
    def __init__(self, tid: str):
        self.transition = tid
        super().__init__(f"transition {tid} is not enabled")


class PredicateError(SimulationError):
    def __init__(self, tid: str, cause: BaseException | str):
        self.transition = tid
        self.cause = cause
        super().__init__(f"predicate of {tid} failed: {cause}")


class ProcedureError(SimulationError):
    def __init__(self, tid: str, cause: BaseException | str):
        self.transition = tid
        self.cause = cause
        super().__init__(f"procedure of {tid} failed: {cause}")


class RunError(SimulationError):
    """A run aborted part-way; carries the partial trace and last good state."""

    def __init__(self, cause: SimulationError, trace: Trace, state: SimState):
        self.cause = cause
        self.trace = trace
        self.state = state
        super().__init__(str(cause))


class Marking(Mapping[str, Kernel]):
    """Occupied places only; at most one kernel per place by construction."""

    __slots__ = ("_slots",)

    def __init__(self, occupancy: Mapping[str, Kernel | None] | None = None):
        self._slots = {p: k for p, k in (occupancy or {}).items() if k is not None}

    def __getitem__(self, pid: str) -> Kernel:
        return self._slots[pid]

    def __iter__(self) -> Iterator[str]:
        return iter(self._slots)

    def __len__(self) -> int:
        return len(self._slots)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Marking):
            return self._slots == other._slots
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._slots.items()))

    def __repr__(self) -> str:
        return "Marking(" + ", ".join(f"{p}={k!r}" for p, k in self._slots.items()) + ")"

    @property
    def occupied(self) -> frozenset[str]:
        return frozenset(self._slots)

    def moved(self, consumed: list[str], produced: Mapping[str, Kernel]) -> Marking:
        slots = dict(self._slots)
        for p in consumed:
            del slots[p]
        for p, k in produced.items():
            if p in slots:
                raise AssertionError(f"1-safety broken: {p} already holds a kernel")
            slots[p] = k
        return Marking(slots)


@dataclass(frozen=True)
class Firing:
    """What a predicate or procedure sees about the firing in progress.

    ``targets`` is empty while the predicate runs; for the procedure it holds
    the chosen output place of every output group, in group order.
    """

    transition: Transition
    consumed: Mapping[str, Kernel]
    env: Any
    time: int
    targets: tuple[str, ...] = ()

    @property
    def kernel(self) -> Kernel:
        """All consumed kernels merged into one (the usual single-input case)."""
        return Kernel.merge(list(self.consumed.values()))


Procedure = Callable[[Firing], Any]
Predicate = Callable[[Firing], Any]


def passthrough(firing: Firing) -> Kernel | None:
    """Default procedure: forward the merged input kernel to every output."""
    return firing.kernel if firing.targets else None


def attribute_switch(name: str) -> Predicate:
    """Default predicate: read the kernel attribute named like the predicate.

    A boolean picks the first alternative when true and the second when false;
    an integer is an alternative index; text names the place directly.
    """

    def choose(firing: Firing):
        kernel = firing.kernel
        if name not in kernel:
            raise KeyError(f"kernel has no attribute {name!r}")
        value = kernel[name]
        if isinstance(value, bool):
            return 0 if value else 1
        return value

    choose.__name__ = f"attribute_switch_{name}"
    return choose


@dataclass(frozen=True)
class Bindings:
    """Procedure and predicate implementations keyed by the names a net uses."""

    procedures: Mapping[str, Procedure] = field(default_factory=dict)
    predicates: Mapping[str, Predicate] = field(default_factory=dict)
    default_procedure: Procedure | None = passthrough
    default_predicate: Callable[[str], Predicate] | None = attribute_switch

    def procedure(self, name: str) -> Procedure:
        if name in self.procedures:
            return self.procedures[name]
        if self.default_procedure is None:
            raise KeyError(f"unbound procedure {name}")
        return self.default_procedure

    def predicate(self, name: str) -> Predicate:
        if name in self.predicates:
            return self.predicates[name]
        if self.default_predicate is None:
            raise KeyError(f"unbound predicate {name}")
        return self.default_predicate(name)


@dataclass(frozen=True)
class SimState:
    net: Net
    marking: Marking
    step_count: int = 0
    logical_clock: int = 0
    env: Any = None
    bindings: Bindings = field(default_factory=Bindings)

    @classmethod
    def initial(
        cls,
        net: Net,
        env: Any = None,
        bindings: Bindings | None = None,
        marking: Mapping[str, Kernel] | None = None,
    ) -> SimState:
        """State at Mo (or at *marking* when given)."""
        m = Marking(net.initial_marking if marking is None else marking)
        for pid in m:
            if net.place(pid).kind is PlaceKind.RESOLUTION:
                raise ValueError(f"resolution place {pid} cannot hold a kernel")
        return cls(net, m, env=env, bindings=bindings or Bindings())


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    transition: str
    consumed: Mapping[str, Kernel]
    produced: Mapping[str, Kernel]
    branch_choice: Mapping[int, str] | None = None

    def serialize(self) -> str:
        """One tab-separated line: seq, transition, consumed, produced, branch."""
        branch = "-"
        if self.branch_choice:
            branch = ",".join(f"{g}:{p}" for g, p in sorted(self.branch_choice.items()))
        return "\t".join(
            [str(self.seq), self.transition, _places(self.consumed), _places(self.produced), branch]
        )


def _places(kernels: Mapping[str, Kernel]) -> str:
    if not kernels:
        return "-"
    return ";".join(f"{p}{format_attrs(k)}" for p, k in kernels.items())


@dataclass(frozen=True)
class Trace:
    events: tuple[TraceEvent, ...] = ()

    def __iter__(self) -> Iterator[TraceEvent]:
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    @property
    def transitions(self) -> list[str]:
        return [e.transition for e in self.events]

    def serialize(self) -> str:
        return "".join(e.serialize() + "\n" for e in self.events)


def _targets(state: SimState, t: Transition) -> tuple[tuple[str, ...], dict[int, str]] | None:
    """Chosen output places if *t* is enabled in *state*, else None."""
    marking = state.marking
    if not all(p in marking for p in t.inputs):
        return None
    choice: dict[int, str] = {}
    if t.branches:
        firing = Firing(t, {p: marking[p] for p in t.inputs}, state.env, state.logical_clock + 1)
        try:
            picked = state.bindings.predicate(t.predicate)(firing)
            choice = _normalize_choice(t, picked)
        except SimulationError:
            raise
        except Exception as exc:
            raise PredicateError(t.id, exc) from exc
    freed = set(t.inputs)
    targets = []
    for gi, group in enumerate(t.outputs):
        target = choice.get(gi, group[0])
        if target in marking and target not in freed:
            return None
        targets.append(target)
    return tuple(targets), choice


def _normalize_choice(t: Transition, picked: Any) -> dict[int, str]:
    switches = [gi for gi, g in enumerate(t.outputs) if len(g) > 1]
    if not isinstance(picked, Mapping):
        if len(switches) != 1:
            raise PredicateError(t.id, "predicate must return a mapping for several switches")
        picked = {switches[0]: picked}
    choice = {}
    for gi in switches:
        if gi not in picked:
            raise PredicateError(t.id, f"no choice for output group {gi}")
        alt = picked[gi]
        group = t.outputs[gi]
        if isinstance(alt, int) and not isinstance(alt, bool):
            if not 0 <= alt < len(group):
                raise PredicateError(t.id, f"alternative index {alt} out of range")
            alt = group[alt]
        if alt not in group:
            raise PredicateError(t.id, f"{alt!r} is not an alternative of group {gi}")
        choice[gi] = alt
    return choice


def enabled(state: SimState) -> list[str]:
    """Ids of enabled transitions in declaration order."""
    return [t.id for t in state.net.transitions if _targets(state, t) is not None]


def fire(state: SimState, tid: str) -> tuple[SimState, TraceEvent]:
    """Fire *tid* atomically. On any error *state* is left as it was."""
    try:
        t = state.net.transition(tid)
    except KeyError:
        raise NotEnabledError(tid) from None
    planned = _targets(state, t)
    if planned is None:
        raise NotEnabledError(tid)
    return _fire(state, t, *planned)


def _fire(
    state: SimState, t: Transition, targets: tuple[str, ...], choice: dict[int, str]
) -> tuple[SimState, TraceEvent]:
    consumed = {p: state.marking[p] for p in t.inputs}
    firing = Firing(t, consumed, state.env, state.logical_clock + 1, targets)
    try:
        result = state.bindings.procedure(t.procedure)(firing)
        produced = _normalize_output(t, targets, result)
    except SimulationError:
        raise
    except Exception as exc:
        raise ProcedureError(t.id, exc) from exc

    marking = state.marking.moved(list(t.inputs), produced)
    new_state = replace(
        state,
        marking=marking,
        step_count=state.step_count + 1,
        logical_clock=state.logical_clock + 1,
    )
    event = TraceEvent(state.step_count + 1, t.id, consumed, produced, choice or None)
    return new_state, event


def _normalize_output(t: Transition, targets: tuple[str, ...], result: Any) -> dict[str, Kernel]:
    if not targets:
        if result is not None and result != {}:
            raise ProcedureError(t.id, "absorbing transition produced kernels")
        return {}
    if isinstance(result, Kernel):
        return {p: result for p in targets}
    if isinstance(result, Mapping):
        if set(result) != set(targets):
            raise ProcedureError(t.id, f"produced places {sorted(result)} != targets {list(targets)}")
        out = {p: result[p] for p in targets}
    elif isinstance(result, (list, tuple)):
        if len(result) != len(targets):
            raise ProcedureError(t.id, f"expected {len(targets)} kernels, got {len(result)}")
        out = dict(zip(targets, result))
    else:
        raise ProcedureError(t.id, f"procedure returned {type(result).__name__}, expected kernels")
    for p, k in out.items():
        if not isinstance(k, Kernel):
            raise ProcedureError(t.id, f"value for {p} is not a kernel")
    return out


def step(state: SimState) -> tuple[SimState, TraceEvent] | None:
    """Fire the first enabled transition, or return None if none is."""
    for t in state.net.transitions:
        planned = _targets(state, t)
        if planned is not None:
            return _fire(state, t, *planned)
    return None


def run(state: SimState, max_steps: int) -> tuple[Trace, SimState]:
    """Step until quiescent or *max_steps* firings; raises RunError on failure."""
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    events: list[TraceEvent] = []
    while len(events) < max_steps:
        try:
            result = step(state)
        except SimulationError as exc:
            raise RunError(exc, Trace(tuple(events)), state) from exc
        if result is None:
            break
        state, event = result
        events.append(event)
    return Trace(tuple(events)), state
