"""The ENC (page creation) and ENA (page access) nets, bound to the domain.

Both nets are built programmatically here and also ship as DSL files in
``secweb/nets``; the two must stay structurally equal.

ENC: bp1 -t1-> b1 -t2-> b2 -t3-> b3 -t4-> b4 -t5-> b5 -t6-> (exit)
ENA: bp1 -t1-> b1 -t2-> b2 -t3-> b3 -t4-> b4 | b5
     b5 -t5-> (exit)
     b4 -t6-> b6 -t7-> b7 | b8
     b8 -t8-> (exit)
     b7 -t9-> b9  (page shown)
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Iterable

from secweb.domain import formats
from secweb.domain.formats import SecurePageEnvelope
from secweb.domain.repository import (
    Repository,
    authenticate,
    check_access,
    cipher_page,
    fetch_and_decipher,
    generate_access_list,
    page_access_ok,
    publish_envelope,
    stage_page,
)
from secweb.enet.kernel import Kernel
from secweb.enet.net import Net, Place, PlaceKind, Transition
from secweb.enet.sim import Bindings, Firing, SimState, Trace, passthrough, run

DEFAULT_MAX_STEPS = 1000

ENA_BRANCH_LABELS = {
    ("t4", "b4"): "grant",
    ("t4", "b5"): "deny",
    ("t7", "b7"): "grant",
    ("t7", "b8"): "deny",
}

EXPECTED_TERMINALS = {
    "ENC": [frozenset()],
    "ENA": [frozenset(), frozenset({"b9"})],
}


@dataclass(frozen=True)
class BoundNet:
    net: Net
    bindings: Bindings
    env: Repository

    def state(self, kernel: Kernel | None = None) -> SimState:
        """Initial state; *kernel* replaces the empty kernel Mo puts in bp1."""
        marking = None if kernel is None else {"bp1": kernel}
        return SimState.initial(self.net, self.env, self.bindings, marking)

    def unbound(self) -> list[str]:
        names = []
        for t in self.net.transitions:
            if t.procedure not in self.bindings.procedures:
                names.append(t.procedure)
            if t.predicate and t.predicate not in self.bindings.predicates:
                names.append(t.predicate)
        return names


def model_source(name: str) -> str:
    """Text of the committed DSL file for ``enc`` or ``ena``."""
    return resources.files("secweb.nets").joinpath(f"{name.lower()}.enet").read_text(encoding="utf-8")


def _places(resolution: int, standard: int) -> list[Place]:
    return (
        [Place("bp1", PlaceKind.PERIPHERAL)]
        + [Place(f"br{i}", PlaceKind.RESOLUTION) for i in range(1, resolution + 1)]
        + [Place(f"b{i}") for i in range(1, standard + 1)]
    )


def enc_net() -> Net:
    transitions = [
        Transition("t1", ("bp1",), (("b1",),), "create_plain_page"),
        Transition("t2", ("b1",), (("b2",),), "set_access_rights", "br1"),
        Transition("t3", ("b2",), (("b3",),), "cipher", "br2"),
        Transition("t4", ("b3",), (("b4",),), "publish", "br3"),
        Transition("t5", ("b4",), (("b5",),), "generate_access_list", "br4"),
        Transition("t6", ("b5",), (), "exit", "br5"),
    ]
    return Net("ENC", tuple(_places(5, 5)), tuple(transitions), {"bp1": Kernel()})


def ena_net() -> Net:
    transitions = [
        Transition("t1", ("bp1",), (("b1",),), "browser_request"),
        Transition("t2", ("b1",), (("b2",),), "security_mode_request", "br1"),
        Transition("t3", ("b2",), (("b3",),), "verify_rights", "br2"),
        Transition("t4", ("b3",), (("b4", "b5"),), "reply_mode", "br3", "access_granted"),
        Transition("t5", ("b5",), (), "exit"),
        Transition("t6", ("b4",), (("b6",),), "page_request", "br4"),
        Transition("t7", ("b6",), (("b7", "b8"),), "reply_page", "br5", "page_granted"),
        Transition("t8", ("b8",), (), "exit"),
        Transition("t9", ("b7",), (("b9",),), "decipher", "br6"),
    ]
    return Net("ENA", tuple(_places(6, 9)), tuple(transitions), {"bp1": Kernel()})


# --- ENC procedures ----------------------------------------------------------

def _readers_csv(readers: Iterable[str] | str) -> str:
    if isinstance(readers, str):
        readers = [r.strip() for r in readers.split(",")]
    ids = {formats.check_id(r, "reader id") for r in readers if r}
    return ",".join(sorted(ids))


def _create_plain_page(f: Firing) -> Kernel:
    k = f.kernel
    stage_page(f.env, k["page"], k["user"], k["draft"], time=f.time)
    return k.extend(content=k["draft"])


def _set_access_rights(f: Firing) -> Kernel:
    k = f.kernel
    readers = _readers_csv(k["grant"])
    f.env.audit(f.time, k["user"], "set_rights", k["page"])
    return k.extend(readers=readers)


def _cipher(f: Firing) -> Kernel:
    k = f.kernel
    key = f.env.keys.page_key(k["page"])
    env = cipher_page(f.env, k["page"], k["user"], key, time=f.time)
    return k.extend(key_id=env.key_id, created=env.created, ciphertext=env.ciphertext, sig=env.sig)


def _publish(f: Firing) -> Kernel:
    k = f.kernel
    env = SecurePageEnvelope(k["page"], k["user"], k["key_id"], k["created"], k["ciphertext"], k["sig"])
    publish_envelope(f.env, env, time=f.time)
    return k.extend(published=True)


def _generate_access_list(f: Firing) -> Kernel:
    k = f.kernel
    readers = k["readers"].split(",") if k["readers"] else []
    generate_access_list(f.env, k["page"], readers, f.env.keys.server_key, actor=k["user"], time=f.time)
    return k.extend(acl_done=True)


def _enc_exit(f: Firing) -> None:
    return None


ENC_PROCEDURES = {
    "create_plain_page": _create_plain_page,
    "set_access_rights": _set_access_rights,
    "cipher": _cipher,
    "publish": _publish,
    "generate_access_list": _generate_access_list,
    "exit": _enc_exit,
}


def build_enc(env: Repository) -> BoundNet:
    return BoundNet(enc_net(), Bindings(ENC_PROCEDURES, {}, None, None), env)


# --- ENA procedures ----------------------------------------------------------

def _browser_request(f: Firing) -> Kernel:
    return f.kernel.extend(browser=True)


def _security_mode_request(f: Firing) -> Kernel:
    k = f.kernel
    f.env.audit(f.time, k["user"], "access_req", k["page"])
    return k.extend(secure_mode=True)


def _verify_rights(f: Firing) -> Kernel:
    k = f.kernel
    repo: Repository = f.env
    granted = authenticate(repo, k["user"], k["password"], time=f.time) and check_access(
        repo.load_acl(k["page"]), k["user"], repo.keys.server_key
    )
    return k.extend(access_granted=granted)


def _access_granted(f: Firing) -> int:
    return 0 if f.kernel["access_granted"] is True else 1


def _ena_exit(f: Firing) -> None:
    k = f.kernel
    f.env.audit(f.time, k["user"], "exit", k["page"], "denied")
    return None


def _page_request(f: Firing) -> Kernel:
    k = f.kernel
    f.env.audit(f.time, k["user"], "page_req", k["page"])
    return k


def _page_granted(f: Firing) -> int:
    k = f.kernel
    return 0 if page_access_ok(f.env, k["user"], k["page"]) else 1


def _reply_page(f: Firing) -> Kernel:
    k = f.kernel
    granted = f.targets[0] == f.transition.outputs[0][0]
    if not granted:
        return k.extend(page_granted=False)
    env = f.env.load_envelope(k["page"])
    return k.extend(page_granted=True, ciphertext=env.ciphertext)


def _decipher(f: Firing) -> Kernel:
    k = f.kernel
    repo: Repository = f.env
    key = repo.keys.page_key(k["page"])
    plaintext = fetch_and_decipher(repo, k["user"], k["page"], key, repo.keys.server_key, time=f.time)
    return k.extend(plaintext=plaintext)


ENA_PROCEDURES = {
    "browser_request": _browser_request,
    "security_mode_request": _security_mode_request,
    "verify_rights": _verify_rights,
    "reply_mode": passthrough,
    "exit": _ena_exit,
    "page_request": _page_request,
    "reply_page": _reply_page,
    "decipher": _decipher,
}
ENA_PREDICATES = {
    "access_granted": _access_granted,
    "page_granted": _page_granted,
}


def build_ena(env: Repository) -> BoundNet:
    return BoundNet(ena_net(), Bindings(ENA_PROCEDURES, ENA_PREDICATES, None, None), env)


# --- scenarios ---------------------------------------------------------------

@dataclass(frozen=True)
class EncResult:
    trace: Trace
    state: SimState
    envelope_path: object
    acl_path: object


@dataclass(frozen=True)
class EnaResult:
    trace: Trace
    state: SimState
    outcome: str  # "displayed", "denied_mode" or "denied_page"
    plaintext: bytes | None = None


def run_enc_scenario(
    env: Repository,
    user: str,
    page_id: str,
    content: bytes,
    readers: Iterable[str] | str,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> EncResult:
    """Create, cipher, publish and grant one page. Raises RunError on failure."""
    grant = readers if isinstance(readers, str) else ",".join(readers)
    bound = build_enc(env)
    kernel = Kernel(user=user, page=page_id, draft=bytes(content), grant=grant)
    trace, state = run(bound.state(kernel), max_steps)
    return EncResult(trace, state, env.envelope_path(page_id), env.acl_path(page_id))


def run_ena_scenario(
    env: Repository, user: str, password: str, page_id: str, max_steps: int = DEFAULT_MAX_STEPS
) -> EnaResult:
    bound = build_ena(env)
    kernel = Kernel(user=user, password=password, page=page_id)
    trace, state = run(bound.state(kernel), max_steps)
    last = trace.transitions[-1] if len(trace) else None
    if "b9" in state.marking:
        return EnaResult(trace, state, "displayed", state.marking["b9"]["plaintext"])
    if last == "t5":
        return EnaResult(trace, state, "denied_mode")
    if last == "t8":
        return EnaResult(trace, state, "denied_page")
    raise RuntimeError(f"ENA run stopped in an unexpected state after {trace.transitions}")
