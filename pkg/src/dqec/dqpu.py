"""Three-QPU network harness with locality enforcement.

The joint wavefunction lives in a coordinator (the :class:`Network`) because
entangled physics cannot be partitioned. Node code never sees amplitudes: it
acts through :class:`Node` handles that only allow gates on the node's own
qubits, measurements, and classical messages. Every action is appended to a
:class:`Transcript`.
"""
from __future__ import annotations

import json
from collections import defaultdict, deque
from contextlib import contextmanager
from dataclasses import asdict, dataclass, fields
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from . import qcore
from .errors import (
    BadBudget,
    LinkBroken,
    LocalityViolation,
    OutOfQubits,
    SameNode,
    UnknownLabel,
    WrongRecipient,
)
from .qcore import GateSpec, MeasurementBasis, PureState


class NodeId(str, Enum):
    QPU1 = "QPU1"
    QPU2 = "QPU2"
    QPU3 = "QPU3"

    def __str__(self):
        return self.value


class Role(str, Enum):
    COMPUTING = "computing"
    COMMUNICATION = "communication"


_NODES = {**{n: n for n in NodeId}, **{n.value: n for n in NodeId}}


def _node(x) -> "NodeId":
    try:
        return _NODES[x]
    except (KeyError, TypeError):
        raise ValueError(f"unknown node {x!r}") from None


_NAME = {n: n.value for n in NodeId}
_BASIS_NAME = {b: b.value for b in MeasurementBasis}

_BELL = np.array([1, 0, 0, 1], dtype=complex) * qcore.SQRT1_2
_BELL.setflags(write=False)

DEFAULT_BUDGETS = {NodeId.QPU1: 3, NodeId.QPU2: 2, NodeId.QPU3: 2}


@dataclass(frozen=True)
class QubitAddress:
    node: NodeId
    name: str
    role: Role


@dataclass(frozen=True)
class ClassicalMessage:
    sender: NodeId
    recipient: NodeId
    payload: object
    regarding: str
    seq: int

    @property
    def triggers(self) -> bool:
        """True for the outcomes that call for a correction (``1`` or ``"-"``)."""
        return self.payload in (1, "-") and not isinstance(self.payload, bool)


@dataclass
class EntanglementLink:
    endpoint_a: QubitAddress
    endpoint_b: QubitAddress
    state_tag: str = "phi+"
    broken: bool = False

    def endpoint(self, node: NodeId) -> QubitAddress:
        if self.broken:
            raise LinkBroken(f"link {self.endpoint_a.name}-{self.endpoint_b.name} was consumed")
        node = _node(node)
        for ep in (self.endpoint_a, self.endpoint_b):
            if ep.node is node:
                return ep
        raise LocalityViolation(f"{node} is not an endpoint of this link")

    def touches(self, name: str) -> bool:
        return name in (self.endpoint_a.name, self.endpoint_b.name)


# Transcript events. Field order is the JSON field order; treat them as read-only.


@dataclass(slots=True)
class PhaseMarker:
    phase: str | None
    label: str


@dataclass(slots=True)
class QubitPrepared:
    phase: str | None
    node: str
    addr: str
    role: str


@dataclass(slots=True)
class EprAllocated:
    phase: str | None
    node_a: str
    addr_a: str
    node_b: str
    addr_b: str


@dataclass(slots=True)
class GateApplied:
    phase: str | None
    node: str
    gate: str
    addrs: tuple[str, ...]


@dataclass(slots=True)
class ConditionalGate:
    phase: str | None
    node: str
    gate: str
    addrs: tuple[str, ...]
    sender: str
    message_seq: int
    payload: object
    applied: bool


@dataclass(slots=True)
class Measured:
    phase: str | None
    node: str
    addr: str
    basis: str
    outcome: object


@dataclass(slots=True)
class QubitRemoved:
    phase: str | None
    node: str
    addr: str


@dataclass(slots=True)
class MessageSent:
    phase: str | None
    sender: str
    recipient: str
    payload: object
    regarding: str
    seq: int


@dataclass(slots=True)
class ChannelApplied:
    phase: str | None
    pattern: str
    addrs: tuple[str, ...]


EVENT_TYPES = (
    PhaseMarker,
    QubitPrepared,
    EprAllocated,
    GateApplied,
    ConditionalGate,
    Measured,
    QubitRemoved,
    MessageSent,
    ChannelApplied,
)


def event_to_dict(event) -> dict:
    d = {"event": type(event).__name__}
    for f in fields(event):
        v = getattr(event, f.name)
        d[f.name] = list(v) if isinstance(v, tuple) else v
    return d


class Transcript(list):
    """Ordered event log."""

    def to_jsonl(self) -> str:
        return "".join(json.dumps(event_to_dict(e)) + "\n" for e in self)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_jsonl())

    @staticmethod
    def parse_jsonl(text: str) -> list[dict]:
        return [json.loads(line) for line in text.splitlines() if line.strip()]

    def of_type(self, kind) -> list:
        return [e for e in self if isinstance(e, kind)]

    def phases(self) -> list[str]:
        seen = []
        for e in self:
            if e.phase is not None and e.phase not in seen:
                seen.append(e.phase)
        return seen


class Network:
    """Coordinator for three QPUs sharing one joint state.

    ``forced_outcomes`` pins measurement results in call order (used to
    enumerate branches); once exhausted, outcomes are drawn from the rng.
    ``branch_probability`` accumulates the Born weight of the outcomes so far.
    """

    def __init__(
        self,
        budgets: dict | Sequence[int] | None = None,
        seed: int | None = None,
        rng: np.random.Generator | None = None,
        forced_outcomes: Iterable | None = None,
    ):
        if budgets is None:
            budgets = DEFAULT_BUDGETS
        if not isinstance(budgets, dict):
            budgets = dict(zip(NodeId, budgets))
        self.budgets = {}
        for node in NodeId:
            b = budgets.get(node, budgets.get(node.value, 0))
            if not isinstance(b, (int, np.integer)) or b < 0:
                raise BadBudget(f"budget for {node} must be a non-negative integer, got {b!r}")
            self.budgets[node] = int(b)
        self.rng = rng if rng is not None else np.random.default_rng(seed)
        self._forced = deque(forced_outcomes or ())
        self._state = PureState((), np.ones(1, dtype=complex))
        self._addresses: dict[str, QubitAddress] = {}
        self._used = {n: 0 for n in NodeId}
        self._links: list[EntanglementLink] = []
        self._queues: dict[tuple[NodeId, NodeId], deque] = defaultdict(deque)
        self._inbox: dict[NodeId, list[ClassicalMessage]] = {n: [] for n in NodeId}
        self._seq = {n: 0 for n in NodeId}
        self._phase: str | None = None
        self.transcript = Transcript()
        self.outcomes: list = []
        self.branch_probability = 1.0
        self.nodes = {n: Node(self, n) for n in NodeId}

    def fork(self, forced_outcomes: Iterable | None = None, rng: np.random.Generator | None = None) -> "Network":
        """Independent copy of the network (state, links, inboxes and transcript)."""
        twin = object.__new__(Network)
        twin.budgets = dict(self.budgets)
        twin.rng = rng if rng is not None else np.random.default_rng(self.rng.bit_generator.random_raw())
        twin._forced = deque(forced_outcomes or ())
        twin._state = self._state
        twin._addresses = dict(self._addresses)
        twin._used = dict(self._used)
        twin._links = [EntanglementLink(l.endpoint_a, l.endpoint_b, l.state_tag, l.broken) for l in self._links]
        twin._queues = defaultdict(deque, {k: deque(v) for k, v in self._queues.items()})
        twin._inbox = {n: list(v) for n, v in self._inbox.items()}
        twin._seq = dict(self._seq)
        twin._phase = self._phase
        twin.transcript = Transcript(self.transcript)
        twin.outcomes = list(self.outcomes)
        twin.branch_probability = self.branch_probability
        twin.nodes = {n: Node(twin, n) for n in NodeId}
        return twin

    # -- coordinator-only views (not available to node logic) --

    @property
    def state(self) -> PureState:
        """The joint wavefunction, for verification code only."""
        return self._state

    def address(self, name: str) -> QubitAddress:
        try:
            return self._addresses[name]
        except KeyError:
            raise UnknownLabel(name) from None

    def live_qubits(self, node: NodeId | None = None) -> list[QubitAddress]:
        node = None if node is None else _node(node)
        return [a for a in self._addresses.values() if node is None or a.node is node]

    def free_qubits(self, node: NodeId) -> int:
        node = _node(node)
        return self.budgets[node] - self._used[node]

    @property
    def links(self) -> list[EntanglementLink]:
        return list(self._links)

    def node(self, node_id) -> "Node":
        return self.nodes[_node(node_id)]

    @property
    def phase(self) -> str | None:
        return self._phase

    @contextmanager
    def phase_scope(self, name: str):
        previous = self._phase
        self._phase = name
        self._log(PhaseMarker(name, "begin"))
        try:
            yield
        finally:
            self._log(PhaseMarker(name, "end"))
            self._phase = previous

    def _log(self, event) -> None:
        self.transcript.append(event)

    # -- primitive operations --

    def _reserve(self, node: NodeId, name: str, role: Role) -> QubitAddress:
        if name in self._addresses:
            raise UnknownLabel(f"qubit name {name!r} is already live")
        if self.free_qubits(node) <= 0:
            raise OutOfQubits(f"{node} has no free qubit (budget {self.budgets[node]})")
        addr = QubitAddress(node, name, role)
        self._addresses[name] = addr
        self._used[node] += 1
        return addr

    def prepare(self, node, name: str, alpha: complex = 1.0, beta: complex = 0.0, role: Role = Role.COMPUTING) -> QubitAddress:
        node = _node(node)
        qubit = qcore.prepare(alpha, beta, name)
        addr = self._reserve(node, name, Role(role))
        self._state = qcore.tensor(self._state, qubit)
        self._log(QubitPrepared(self._phase, _NAME[node], name, addr.role.value))
        return addr

    def allocate_epr(self, node_a, node_b, name_a: str | None = None, name_b: str | None = None) -> EntanglementLink:
        node_a, node_b = _node(node_a), _node(node_b)
        if node_a is node_b:
            raise SameNode(f"an EPR pair needs two distinct nodes, got {node_a} twice")
        for node in (node_a, node_b):
            if self.free_qubits(node) <= 0:
                raise OutOfQubits(f"{node} has no free communication qubit")
        name_a = name_a or self._fresh_name(node_a)
        name_b = name_b or self._fresh_name(node_b)
        ea = self._reserve(node_a, name_a, Role.COMMUNICATION)
        eb = self._reserve(node_b, name_b, Role.COMMUNICATION)
        self._state = qcore.tensor(self._state, qcore._trusted((name_a, name_b), _BELL))
        link = EntanglementLink(ea, eb)
        self._links.append(link)
        self._log(EprAllocated(self._phase, _NAME[node_a], name_a, _NAME[node_b], name_b))
        return link

    def _fresh_name(self, node: NodeId) -> str:
        i = 0
        while f"{node.value}.c{i}" in self._addresses:
            i += 1
        return f"{node.value}.c{i}"

    def _check_local(self, node: NodeId, names: Sequence[str]) -> None:
        for name in names:
            addr = self.address(name)
            if addr.node is not node:
                raise LocalityViolation(f"{node} cannot act on {name}, which lives on {addr.node}")

    def local_gate(self, node, gate: GateSpec, names: Sequence[str]) -> None:
        node = _node(node)
        names = (names,) if isinstance(names, str) else tuple(names)
        self._check_local(node, names)
        self._state = qcore.apply_gate(self._state, gate, names)
        self._log(GateApplied(self._phase, _NAME[node], gate.name, names))

    def _measure(self, node: NodeId, name: str, basis: MeasurementBasis):
        self._check_local(node, (name,))
        forced = self._forced.popleft() if self._forced else None
        outcome, self._state, p = qcore.measure_and_remove(
            self._state, name, basis, rng=self.rng, forced=forced, with_probability=True
        )
        self.branch_probability *= p
        del self._addresses[name]
        self._used[node] -= 1
        for link in self._links:
            if not link.broken and link.touches(name):
                link.broken = True
        self.outcomes.append(outcome)
        self._log(Measured(self._phase, _NAME[node], name, _BASIS_NAME[basis], outcome))
        self._log(QubitRemoved(self._phase, _NAME[node], name))
        return outcome

    def measure_and_send(self, node, name: str, basis=MeasurementBasis.Z, recipients: Iterable = ()):
        node = _node(node)
        if not isinstance(basis, MeasurementBasis):
            basis = MeasurementBasis(basis)
        outcome = self._measure(node, name, basis)
        for r in recipients:
            r = _node(r)
            if r is node:
                raise WrongRecipient(f"{node} cannot message itself")
            self._seq[node] += 1
            msg = ClassicalMessage(node, r, outcome, name, self._seq[node])
            self._queues[(node, r)].append(msg)
            self._log(MessageSent(self._phase, _NAME[node], _NAME[r], outcome, name, msg.seq))
        return outcome

    def deliver(self) -> int:
        """Scheduler step: move every queued message into its recipient's inbox."""
        moved = 0
        for (_, recipient), q in sorted(self._queues.items(), key=lambda kv: (_NAME[kv[0][0]], _NAME[kv[0][1]])):
            while q:
                self._inbox[recipient].append(q.popleft())
                moved += 1
        return moved

    def receive(self, node, sender) -> ClassicalMessage:
        node, sender = _node(node), _node(sender)
        for i, msg in enumerate(self._inbox[node]):
            if msg.sender is sender:
                return self._inbox[node].pop(i)
        raise LookupError(f"no delivered message from {sender} to {node}")

    def receive_and_apply(self, node, message: ClassicalMessage, gate: GateSpec, names: Sequence[str]) -> bool:
        node = _node(node)
        if message.recipient is not node:
            raise WrongRecipient(f"message for {message.recipient} handled by {node}")
        names = (names,) if isinstance(names, str) else tuple(names)
        self._check_local(node, names)
        applied = message.triggers
        if applied:
            self._state = qcore.apply_gate(self._state, gate, names)
        self._log(
            ConditionalGate(
                self._phase, _NAME[node], gate.name, names, _NAME[message.sender], message.seq, message.payload, applied
            )
        )
        return applied

    def apply_error_pattern(self, pattern, names: Sequence[str]) -> None:
        """Environment noise on the code qubits; not a node operation."""
        from .channels import ErrorPattern, apply_error_pattern

        pattern = ErrorPattern(pattern)
        self._state = apply_error_pattern(self._state, pattern, names)
        self._log(ChannelApplied(self._phase, str(pattern), tuple(names)))

    def apply_unitary_noise(self, u: np.ndarray, name: str, tag: str = "U") -> None:
        self._state = qcore.apply_unitary(self._state, u, (name,))
        self._log(ChannelApplied(self._phase, tag, (name,)))


class Node:
    """Handle through which a QPU's protocol logic acts on the network."""

    def __init__(self, net: Network, node_id: NodeId):
        self._net = net
        self.id = node_id

    def __repr__(self):
        return f"Node({self.id.value})"

    def prepare(self, name, alpha=1.0, beta=0.0):
        return self._net.prepare(self.id, name, alpha, beta)

    def gate(self, gate: GateSpec, *names: str) -> None:
        self._net.local_gate(self.id, gate, names)

    def measure_and_send(self, name: str, basis=MeasurementBasis.Z, recipients: Iterable = ()):
        return self._net.measure_and_send(self.id, name, basis, recipients)

    def receive(self, sender) -> ClassicalMessage:
        return self._net.receive(self.id, sender)

    def receive_and_apply(self, message: ClassicalMessage, gate: GateSpec, *names: str) -> bool:
        return self._net.receive_and_apply(self.id, message, gate, names)

    def qubits(self) -> list[str]:
        return [a.name for a in self._net.live_qubits(self.id)]


def create_network(qubit_budget_per_node=None, seed=None, rng=None, forced_outcomes=None) -> Network:
    return Network(qubit_budget_per_node, seed=seed, rng=rng, forced_outcomes=forced_outcomes)


def allocate_epr(net: Network, node_a, node_b, name_a=None, name_b=None) -> EntanglementLink:
    return net.allocate_epr(node_a, node_b, name_a, name_b)


def local_gate(net: Network, node, gate: GateSpec, addrs) -> None:
    net.local_gate(node, gate, addrs)


def measure_and_send(net: Network, node, addr, basis=MeasurementBasis.Z, recipients=()):
    return net.measure_and_send(node, addr, basis, recipients)


def receive_and_apply(net: Network, node, message: ClassicalMessage, conditional_gate: GateSpec, addrs) -> bool:
    return net.receive_and_apply(node, message, conditional_gate, addrs)


@dataclass
class PhaseStats:
    gates: int = 0
    gates_applied: int = 0
    conditional_gates: int = 0
    measurements: int = 0
    measured_qubits: int = 0
    epr_pairs: int = 0
    messages: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def transcript_stats(net_or_transcript) -> dict[str, PhaseStats]:
    """Resource counts per protocol phase.

    Counting convention: ``gates`` counts every scheduled unitary, including
    classically conditioned corrections whether or not they fired; a
    Hadamard-basis measurement is a measurement, not a gate; EPR preparation
    is not counted as gates. ``measurements`` counts measurement events and
    ``measured_qubits`` the distinct qubit names measured.
    """
    transcript = getattr(net_or_transcript, "transcript", net_or_transcript)
    stats: dict[str, PhaseStats] = {}
    measured: dict[str, set] = defaultdict(set)
    for e in transcript:
        if isinstance(e, PhaseMarker) or e.phase is None:
            continue
        s = stats.setdefault(e.phase, PhaseStats())
        if isinstance(e, GateApplied):
            s.gates += 1
            s.gates_applied += 1
        elif isinstance(e, ConditionalGate):
            s.gates += 1
            s.conditional_gates += 1
            s.gates_applied += int(e.applied)
        elif isinstance(e, Measured):
            s.measurements += 1
            measured[e.phase].add(e.addr)
        elif isinstance(e, EprAllocated):
            s.epr_pairs += 1
        elif isinstance(e, MessageSent):
            s.messages += 1
    for phase, names in measured.items():
        stats[phase].measured_qubits = len(names)
    return stats


def check_locality(transcript: Sequence) -> None:
    """Replay allocations and confirm every gate touched only its own node's qubits.

    Raises ``LocalityViolation``.
    """
    owner: dict[str, str] = {}
    for e in transcript:
        if isinstance(e, QubitPrepared):
            owner[e.addr] = e.node
        elif isinstance(e, EprAllocated):
            owner[e.addr_a] = e.node_a
            owner[e.addr_b] = e.node_b
        elif isinstance(e, (GateApplied, ConditionalGate)):
            for a in e.addrs:
                if owner.get(a) != e.node:
                    raise LocalityViolation(f"{e.gate} on {e.addrs} by {e.node}")


def check_causality(transcript: Sequence) -> None:
    """Every conditional gate must follow the measurement and message it depends on."""
    sent: dict[tuple[str, int], MessageSent] = {}
    measured_at: dict[tuple[str, str], int] = {}
    for i, e in enumerate(transcript):
        if isinstance(e, Measured):
            measured_at[(e.node, e.addr)] = i
        elif isinstance(e, MessageSent):
            if (e.sender, e.regarding) not in measured_at:
                raise AssertionError(f"message {e} precedes its measurement")
            sent[(e.sender, e.seq)] = e
        elif isinstance(e, ConditionalGate):
            msg = sent.get((e.sender, e.message_seq))
            if msg is None or msg.recipient != e.node or msg.payload != e.payload:
                raise AssertionError(f"conditional gate {e} has no prior matching message")
