"""``secweb`` command line.

Exit codes: 0 success (or page displayed), 1 access denied, 2 validation or
parse error, 3 I/O or runtime error.
"""

from __future__ import annotations

import argparse
import contextlib
import fcntl
import os
import sys
from pathlib import Path

from secweb.domain import formats
from secweb.domain.errors import DuplicateUserError, MalformedIdError, SecWebError
from secweb.domain.repository import DEFAULT_MASTER_SECRET, Repository, register_user
from secweb.enet import analysis
from secweb.enet.dsl import NetSyntaxError, parse_net
from secweb.enet.kernel import Kernel, parse_literal
from secweb.enet.net import NetValidationError, PlaceKind, validate
from secweb.enet.sim import RunError, SimState, SimulationError, run
from secweb.models import (
    DEFAULT_MAX_STEPS,
    ENA_BRANCH_LABELS,
    EXPECTED_TERMINALS,
    run_ena_scenario,
    run_enc_scenario,
)

EXIT_OK = 0
EXIT_DENIED = 1
EXIT_INVALID = 2
EXIT_RUNTIME = 3

BRANCH_LABELS = {"ENA": ENA_BRANCH_LABELS}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        self.code = code
        super().__init__(message)


def _out(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


@contextlib.contextmanager
def _locked_repo(args: argparse.Namespace):
    root = Path(args.store)
    try:
        root.mkdir(parents=True, exist_ok=True)
        lock = open(root / ".lock", "a")
    except OSError as exc:
        raise CliError(f"cannot open store {root}: {exc}", EXIT_RUNTIME) from exc
    with lock:
        fcntl.flock(lock, fcntl.LOCK_EX)
        try:
            secret = os.environ.get("SECWEB_MASTER_SECRET")
            master = secret.encode("utf-8") if secret else DEFAULT_MASTER_SECRET
            yield Repository(root, master, wall_clock=args.wall_clock).init()
        finally:
            fcntl.flock(lock, fcntl.LOCK_UN)


def _load_net(path: str, check: bool = True):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_RUNTIME) from exc
    try:
        return parse_net(text, check=check)
    except NetSyntaxError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INVALID) from exc
    except NetValidationError as exc:
        raise CliError("\n".join(f"{path}: {v}" for v in exc.violations), EXIT_INVALID) from exc


def _kernel_flags(pairs: list[str]) -> Kernel:
    attrs: dict[str, object] = {}
    for pair in pairs:
        key, sep, raw = pair.partition("=")
        if not sep:
            raise CliError(f"--kernel expects key=value, got {pair!r}", EXIT_INVALID)
        try:
            attrs[key] = parse_literal(raw)
        except ValueError:
            attrs[key] = raw
    try:
        return Kernel(attrs)
    except (ValueError, TypeError) as exc:
        raise CliError(str(exc), EXIT_INVALID) from exc


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_RUNTIME) from exc


# --- net -------------------------------------------------------------------

def cmd_net_validate(args: argparse.Namespace) -> int:
    net = _load_net(args.file, check=False)
    violations = validate(net)
    if violations:
        for v in violations:
            _out(f"{v.element}: {v.message}")
        _out(f"{len(violations)} violation(s)")
        return EXIT_INVALID
    _out(f"{len(net.places)} places, {len(net.transitions)} transitions, OK")
    return EXIT_OK


def cmd_net_simulate(args: argparse.Namespace) -> int:
    net = _load_net(args.file)
    extra = _kernel_flags(args.kernel)
    marking = {p: k.extend(**extra) for p, k in net.initial_marking.items()}
    if not marking and len(extra):
        peripheral = [p.id for p in net.places if p.kind is PlaceKind.PERIPHERAL]
        if len(peripheral) != 1:
            raise CliError("--kernel needs an init line or exactly one peripheral place", EXIT_INVALID)
        marking = {peripheral[0]: extra}
    state = SimState.initial(net, marking=marking)
    try:
        trace, state = run(state, args.max_steps)
    except RunError as exc:
        _out(exc.trace.serialize())
        raise CliError(f"run aborted: {exc}", EXIT_RUNTIME) from exc
    text = trace.serialize()
    if args.trace:
        _write(args.trace, text)
    sys.stdout.write(text)
    _out(f"steps={len(trace)} final={analysis.label(state.marking)}")
    return EXIT_OK


def _expected_terminals(args: argparse.Namespace, net_name: str) -> list[frozenset[str]]:
    if args.expect:
        return [frozenset(p for p in e.split(",") if p) for e in args.expect]
    return EXPECTED_TERMINALS.get(net_name, [frozenset()])


def cmd_net_analyze(args: argparse.Namespace) -> int:
    net = _load_net(args.file)
    try:
        graph = analysis.reachability(net, args.state_limit)
        safety = analysis.check_safety(net, args.state_limit)
    except analysis.StateLimitExceeded as exc:
        raise CliError(str(exc), EXIT_RUNTIME) from exc
    deadlocks = analysis.find_deadlocks(graph, _expected_terminals(args, net.name))
    ordered = sorted(graph.terminals, key=lambda m: (len(m), analysis.label(m)))
    terminals = ", ".join(analysis.label(t) for t in ordered)
    _out(
        f"nodes={len(graph.nodes)} edges={len(graph.edges)} safe={'yes' if safety.safe else 'no'} "
        f"deadlocks={len(deadlocks)} (terminals: {terminals})"
    )
    for v in safety.violations:
        _out(f"unsafe: {v}")
    for d in deadlocks:
        _out(f"deadlock: {analysis.label(d)}")
    if args.dot:
        _write(args.dot, analysis.export_dot(graph, BRANCH_LABELS.get(net.name), net.name))
    return EXIT_OK


# --- store commands --------------------------------------------------------

def cmd_user(args: argparse.Namespace) -> int:
    with _locked_repo(args) as repo:
        if args.action == "add":
            try:
                register_user(repo, args.id, args.password)
            except (MalformedIdError, DuplicateUserError) as exc:
                raise CliError(str(exc), EXIT_INVALID) from exc
            _out(f"added {args.id}")
        else:
            for uid in sorted(repo.users.records()):
                _out(uid)
    return EXIT_OK


def _run_error(exc: RunError) -> CliError:
    cause = exc.cause
    where = getattr(cause, "transition", "?")
    inner = getattr(cause, "cause", cause)
    code = EXIT_INVALID if isinstance(inner, MalformedIdError) else EXIT_RUNTIME
    done = " ".join(exc.trace.transitions)
    return CliError(f"error at {where}: {inner} (completed: {done or 'none'})", code)


def cmd_enc(args: argparse.Namespace) -> int:
    try:
        content = Path(args.content).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read {args.content}: {exc}", EXIT_RUNTIME) from exc
    try:
        formats.check_id(args.user, "user id")
        formats.check_id(args.page, "page id")
    except MalformedIdError as exc:
        raise CliError(str(exc), EXIT_INVALID) from exc
    with _locked_repo(args) as repo:
        try:
            result = run_enc_scenario(repo, args.user, args.page, content, args.grant, args.max_steps)
        except RunError as exc:
            raise _run_error(exc) from exc
    if args.trace:
        _write(args.trace, result.trace.serialize())
    _out(" ".join(result.trace.transitions))
    return EXIT_OK


def cmd_ena(args: argparse.Namespace) -> int:
    try:
        formats.check_id(args.page, "page id")
    except MalformedIdError as exc:
        raise CliError(str(exc), EXIT_INVALID) from exc
    with _locked_repo(args) as repo:
        try:
            result = run_ena_scenario(repo, args.user, args.password, args.page, args.max_steps)
        except RunError as exc:
            raise _run_error(exc) from exc
        except ValueError as exc:
            raise CliError(str(exc), EXIT_INVALID) from exc
    if args.trace:
        _write(args.trace, result.trace.serialize())
    summary = " ".join(result.trace.transitions)
    if result.outcome == "displayed":
        sys.stderr.write(summary + "\n")
        sys.stdout.flush()
        sys.stdout.buffer.write(result.plaintext)
        sys.stdout.buffer.flush()
        return EXIT_OK
    if result.outcome == "denied_mode":
        _out(f"denied at security mode (t5): {summary}")
    else:
        _out(f"denied at page (t8): {summary}")
    return EXIT_DENIED


def cmd_log(args: argparse.Namespace) -> int:
    with _locked_repo(args) as repo:
        for rec in repo.log.records():
            _out(rec.line())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="secweb", description=__doc__.splitlines()[0])
    parser.add_argument("--store", default=os.environ.get("SECWEB_STORE", "secweb-store"),
                        help="repository root directory")
    parser.add_argument("--wall-clock", action="store_true",
                        help="timestamp records with wall-clock time instead of the firing counter")
    sub = parser.add_subparsers(dest="command", required=True)

    net = sub.add_parser("net", help="validate, simulate or analyze a net file")
    net_sub = net.add_subparsers(dest="net_command", required=True)
    p = net_sub.add_parser("validate")
    p.add_argument("file")
    p.set_defaults(func=cmd_net_validate)
    p = net_sub.add_parser("simulate")
    p.add_argument("file")
    p.add_argument("--kernel", action="append", default=[], metavar="K=V")
    p.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    p.add_argument("--trace", metavar="PATH")
    p.set_defaults(func=cmd_net_simulate)
    p = net_sub.add_parser("analyze")
    p.add_argument("file")
    p.add_argument("--dot", metavar="PATH", help="write the reachability graph ('-' for stdout)")
    p.add_argument("--expect", action="append", metavar="PLACES",
                   help="expected terminal marking as comma-separated places ('' = empty); repeatable")
    p.add_argument("--state-limit", type=int, default=analysis.DEFAULT_STATE_LIMIT)
    p.set_defaults(func=cmd_net_analyze)

    user = sub.add_parser("user", help="manage users")
    user_sub = user.add_subparsers(dest="action", required=True)
    p = user_sub.add_parser("add")
    p.add_argument("id")
    p.add_argument("password")
    p.set_defaults(func=cmd_user)
    p = user_sub.add_parser("list")
    p.set_defaults(func=cmd_user)

    p = sub.add_parser("enc", help="create, cipher and publish a page")
    p.add_argument("--user", required=True)
    p.add_argument("--page", required=True)
    p.add_argument("--content", required=True, metavar="FILE")
    p.add_argument("--grant", required=True, metavar="CSV")
    p.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    p.add_argument("--trace", metavar="PATH")
    p.set_defaults(func=cmd_enc)

    p = sub.add_parser("ena", help="access a published page")
    p.add_argument("--user", required=True)
    p.add_argument("--password", required=True)
    p.add_argument("--page", required=True)
    p.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    p.add_argument("--trace", metavar="PATH")
    p.set_defaults(func=cmd_ena)

    log = sub.add_parser("log", help="audit log")
    log_sub = log.add_subparsers(dest="log_command", required=True)
    p = log_sub.add_parser("show")
    p.set_defaults(func=cmd_log)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "max_steps", 0) < 0:
        sys.stderr.write("secweb: --max-steps must be >= 0\n")
        return EXIT_INVALID
    try:
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(f"secweb: {exc}\n")
        return exc.code
    except (SecWebError, SimulationError, OSError) as exc:
        sys.stderr.write(f"secweb: {exc}\n")
        return EXIT_RUNTIME
