"""Evaluation nets: structure, DSL, simulation and analysis."""

from secweb.enet.analysis import (
    DEFAULT_STATE_LIMIT,
    Edge,
    ReachGraph,
    SafetyReport,
    SafetyViolation,
    StateLimitExceeded,
    check_safety,
    export_dot,
    find_deadlocks,
    reachability,
)
from secweb.enet.dsl import NetSyntaxError, parse_net, print_net
from secweb.enet.kernel import AttrValue, Kernel
from secweb.enet.net import Net, NetValidationError, Place, PlaceKind, Transition, Violation, validate
from secweb.enet.sim import (
    Bindings,
    Firing,
    Marking,
    NotEnabledError,
    PredicateError,
    ProcedureError,
    RunError,
    SimState,
    SimulationError,
    Trace,
    TraceEvent,
    enabled,
    fire,
    run,
    step,
)

__all__ = [
    "DEFAULT_STATE_LIMIT",
    "AttrValue",
    "Bindings",
    "Edge",
    "Firing",
    "Kernel",
    "Marking",
    "Net",
    "NetSyntaxError",
    "NetValidationError",
    "NotEnabledError",
    "Place",
    "PlaceKind",
    "PredicateError",
    "ProcedureError",
    "ReachGraph",
    "RunError",
    "SafetyReport",
    "SafetyViolation",
    "SimState",
    "SimulationError",
    "StateLimitExceeded",
    "Trace",
    "TraceEvent",
    "Transition",
    "Violation",
    "check_safety",
    "enabled",
    "export_dot",
    "find_deadlocks",
    "fire",
    "parse_net",
    "print_net",
    "reachability",
    "run",
    "step",
    "validate",
]
