"""Distributed three-qubit repetition code over three QPUs.

QPU1 holds the data qubit ``A`` and communication qubits ``A1``/``A2``; QPU2
holds ``B``/``B1`` and QPU3 holds ``C``/``C1``. All inter-node interaction goes
through EPR pairs and classical messages on a :class:`~dqec.dqpu.Network`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from . import qcore
from .channels import ErrorPattern, apply_error_pattern
from .dqpu import Network, NodeId
from .errors import NotEigenstate, NotNormalized, NotSeparable
from .qcore import CNOT, TOFFOLI, H, X, Z, MeasurementBasis, PureState

QPU1, QPU2, QPU3 = NodeId.QPU1, NodeId.QPU2, NodeId.QPU3
CODE_LABELS = ("A", "B", "C")
CODE_RATE = 1 / 3

ENCODE_MEASUREMENTS = 4
DECODE_MEASUREMENTS = 8


class CodeBasis(str, Enum):
    BITFLIP = "bitflip"
    PHASEFLIP = "phaseflip"

    @property
    def error_symbol(self) -> str:
        """The Pauli this code protects against."""
        return "X" if self is CodeBasis.BITFLIP else "Z"


@dataclass(frozen=True)
class LogicalQubitSpec:
    alpha: complex
    beta: complex

    def __post_init__(self):
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > qcore.ATOL:
            raise NotNormalized(f"|alpha|^2 + |beta|^2 = {norm}")
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))

    @classmethod
    def random(cls, rng: np.random.Generator) -> "LogicalQubitSpec":
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        return cls(v[0], v[1])

    def state(self, label: str = "A") -> PureState:
        return qcore.prepare(self.alpha, self.beta, label)

    def code_word(self, basis: CodeBasis = CodeBasis.BITFLIP, labels: Sequence[str] = CODE_LABELS) -> PureState:
        """``a|000> + b|111>`` or its Hadamard image ``a|+++> + b|--->``."""
        amps = np.zeros(8, dtype=complex)
        amps[0], amps[7] = self.alpha, self.beta
        word = PureState(tuple(labels), amps)
        if CodeBasis(basis) is CodeBasis.PHASEFLIP:
            for label in labels:
                word = qcore.apply_gate(word, H, (label,))
        return word

    def logical_x_overlap(self) -> float:
        """``|<psi|X|psi>|^2``: fidelity left after an uncorrected logical flip."""
        return abs(2 * (np.conj(self.alpha) * self.beta).real) ** 2

    def to_dict(self) -> dict:
        return {"alpha": [self.alpha.real, self.alpha.imag], "beta": [self.beta.real, self.beta.imag]}


@dataclass(frozen=True)
class Syndrome:
    """Two syndrome bits: ``s0`` compares qubits 1 and 2, ``s1`` qubits 1 and 3.

    ``bits`` renders them in ancilla order (``s0`` then ``s1``), which is
    how the pattern table lists them: a flip on qubit 2 reads ``"10"``.
    """

    s0: int
    s1: int

    @property
    def bits(self) -> str:
        return f"{self.s0}{self.s1}"

    def __str__(self):
        return f"|{self.bits}>"

    @classmethod
    def from_bits(cls, bits: str) -> "Syndrome":
        return cls(int(bits[0]), int(bits[1]))

    @classmethod
    def from_eigenvalues(cls, e1: int, e2: int) -> "Syndrome":
        return cls((1 - e1) // 2, (1 - e2) // 2)


@dataclass(frozen=True)
class StabilizerPair:
    s1: str
    s2: str

    @classmethod
    def for_basis(cls, basis: CodeBasis) -> "StabilizerPair":
        if CodeBasis(basis) is CodeBasis.BITFLIP:
            return cls("ZZI", "ZIZ")
        return cls("XXI", "XIX")

    def matrices(self) -> tuple[np.ndarray, np.ndarray]:
        return pauli_string_matrix(self.s1), pauli_string_matrix(self.s2)


def pauli_string_matrix(s: str) -> np.ndarray:
    m = np.ones((1, 1), dtype=complex)
    for ch in s:
        m = np.kron(m, qcore.PAULIS[ch])
    return m


@dataclass(frozen=True)
class Correction:
    pauli: str
    qubit: int  # 0-based code-qubit index

    def __str__(self):
        return f"{self.pauli}{self.qubit + 1}"


_SYNDROME_TO_QUBIT = {"00": None, "11": 0, "10": 1, "01": 2}


def correction_from_syndrome(s: Syndrome, basis: CodeBasis = CodeBasis.BITFLIP) -> Correction | None:
    """Minimum-weight lookup: assume at most one flipped qubit."""
    q = _SYNDROME_TO_QUBIT[s.bits]
    if q is None:
        return None
    return Correction(CodeBasis(basis).error_symbol, q)


def apply_correction(state: PureState, correction: Correction | None, code_labels=CODE_LABELS) -> PureState:
    if correction is None:
        return state
    return qcore.apply_gate(state, qcore.pauli_gate(correction.pauli), (code_labels[correction.qubit],))


def stabilizer_eigenvalues(state: PureState, pair: StabilizerPair, code_labels=CODE_LABELS) -> tuple[int, int]:
    others = [l for l in state.labels if l not in code_labels]
    psi = qcore.reorder(state, tuple(code_labels) + tuple(others)).amplitudes
    n_rest = len(others)
    values = []
    for s in pair.matrices():
        op = np.kron(s, np.eye(2**n_rest)) if n_rest else s
        e = float(np.vdot(psi, op @ psi).real)
        if abs(abs(e) - 1.0) > 1e-6:
            raise NotEigenstate(f"<S> = {e:.6g}; state is not a stabilizer eigenstate")
        values.append(1 if e > 0 else -1)
    return values[0], values[1]


def syndrome_extract(
    state: PureState,
    code_labels: Sequence[str] = CODE_LABELS,
    basis: CodeBasis = CodeBasis.BITFLIP,
    rng: np.random.Generator | None = None,
    forced: Sequence | None = None,
    ancillas: Sequence[str] = ("s0", "s1"),
) -> tuple[Syndrome, PureState]:
    """Parity-check circuit with two fresh ancillas; returns the syndrome and
    the code register after the ancillas are measured and discarded."""
    a, b, c = code_labels
    s0, s1 = ancillas
    basis = CodeBasis(basis)
    psi = qcore.tensor(state, qcore.basis_state(ancillas, "00"))
    if basis is CodeBasis.PHASEFLIP:
        for q in code_labels:
            psi = qcore.apply_gate(psi, H, (q,))
    for ctrl, tgt in ((a, s0), (b, s0), (a, s1), (c, s1)):
        psi = qcore.apply_gate(psi, CNOT, (ctrl, tgt))
    if basis is CodeBasis.PHASEFLIP:
        for q in code_labels:
            psi = qcore.apply_gate(psi, H, (q,))
    forced = list(forced) if forced is not None else [None, None]
    if rng is None and None in forced:
        rng = np.random.default_rng(0)
    bits = []
    for anc, f in zip(ancillas, forced):
        outcome, psi = qcore.measure(psi, anc, MeasurementBasis.Z, rng=rng, forced=f)
        psi = qcore.remove_qubit(psi, anc)
        bits.append(outcome)
    return Syndrome(*bits), psi


# -- distributed protocol --


def _nonlocal_fanout(net: Network) -> None:
    """Copy A's computational value onto B and C (``B ^= A``, ``C ^= A``)
    using the live pairs A1-B1 and A2-C1. Consumes all four halves."""
    q1, q2, q3 = net.node(QPU1), net.node(QPU2), net.node(QPU3)
    q1.gate(CNOT, "A", "A1")
    q1.gate(CNOT, "A", "A2")

    q1.measure_and_send("A1", MeasurementBasis.Z, [QPU2])
    q1.measure_and_send("A2", MeasurementBasis.Z, [QPU3])
    net.deliver()
    q2.receive_and_apply(q2.receive(QPU1), X, "B1")
    q3.receive_and_apply(q3.receive(QPU1), X, "C1")

    q2.gate(CNOT, "B1", "B")
    q3.gate(CNOT, "C1", "C")

    q2.gate(H, "B1")
    q3.gate(H, "C1")
    q2.measure_and_send("B1", MeasurementBasis.Z, [QPU1])
    q3.measure_and_send("C1", MeasurementBasis.Z, [QPU1])
    net.deliver()
    q1.receive_and_apply(q1.receive(QPU2), Z, "A")
    q1.receive_and_apply(q1.receive(QPU3), Z, "A")


def _link_pairs(net: Network) -> None:
    net.allocate_epr(QPU1, QPU2, "A1", "B1")
    net.allocate_epr(QPU1, QPU3, "A2", "C1")


def _hadamard_all(net: Network) -> None:
    net.node(QPU1).gate(H, "A")
    net.node(QPU2).gate(H, "B")
    net.node(QPU3).gate(H, "C")


def encode(net: Network, spec: LogicalQubitSpec, basis: CodeBasis = CodeBasis.BITFLIP) -> tuple[str, str, str]:
    """Spread the data qubit on QPU1 into a three-node code word."""
    basis = CodeBasis(basis)
    with net.phase_scope("encode"):
        net.node(QPU1).prepare("A", spec.alpha, spec.beta)
        net.node(QPU2).prepare("B")
        net.node(QPU3).prepare("C")
        _link_pairs(net)
        _nonlocal_fanout(net)
    if basis is CodeBasis.PHASEFLIP:
        with net.phase_scope("encode_hadamard"):
            _hadamard_all(net)
    return CODE_LABELS


@dataclass
class DecodeResult:
    state: PureState
    syndrome: Syndrome | None
    outcomes: list = field(default_factory=list)

    def recovered(self) -> PureState:
        """Data qubit A; raises ``NotSeparable`` if B/C are still entangled with it."""
        psi = self.state
        for label in ("B", "C"):
            psi = qcore.remove_qubit(psi, label)
        return psi

    def ancillas(self) -> PureState:
        """B, C register; raises ``NotSeparable`` if entangled with A."""
        return _drop_data(qcore.reorder(self.state, ("B", "C", "A")))


def _drop_data(psi: PureState) -> PureState:
    """B,C register when it is a product with A (checked via the reduced purity)."""
    t = psi.tensor().reshape(4, 2)
    u, s, vh = np.linalg.svd(t)
    if s[1] > 1e-7:
        raise NotSeparable("ancillas are entangled with the data qubit")
    return PureState(("B", "C"), u[:, 0])


def decode(
    net: Network,
    code_addresses: Sequence[str] = CODE_LABELS,
    basis: CodeBasis = CodeBasis.BITFLIP,
    reset_ancillas: bool = True,
) -> DecodeResult:
    """Correct up to one flip and return the data to qubit A.

    Steps: fan A out onto B and C over fresh pairs (leaving the two parities
    in B and C), fan B and C back into A1/A2 over a second round of pairs,
    Toffoli the parities onto A, then measure A1/A2 in the X basis and undo
    their phase kick on B/C. With ``reset_ancillas`` QPU2 and QPU3 read out
    their parity qubit and re-prepare it in ``|0>``; those readouts are the
    syndrome.
    """
    if tuple(code_addresses) != CODE_LABELS:
        raise ValueError(f"the protocol runs on qubits {CODE_LABELS}")
    basis = CodeBasis(basis)
    q1, q2, q3 = net.node(QPU1), net.node(QPU2), net.node(QPU3)
    start = len(net.outcomes)
    if basis is CodeBasis.PHASEFLIP:
        with net.phase_scope("decode_hadamard"):
            _hadamard_all(net)
    with net.phase_scope("decode"):
        _link_pairs(net)
        _nonlocal_fanout(net)

        # second round: B1/C1 pairs were consumed, fresh ones assumed available
        _link_pairs(net)
        q2.gate(CNOT, "B", "B1")
        q3.gate(CNOT, "C", "C1")
        q2.measure_and_send("B1", MeasurementBasis.Z, [QPU1])
        q3.measure_and_send("C1", MeasurementBasis.Z, [QPU1])
        net.deliver()
        q1.receive_and_apply(q1.receive(QPU2), X, "A1")
        q1.receive_and_apply(q1.receive(QPU3), X, "A2")

        q1.gate(TOFFOLI, "A1", "A2", "A")

        q1.measure_and_send("A1", MeasurementBasis.X, [QPU2])
        q1.measure_and_send("A2", MeasurementBasis.X, [QPU3])
        net.deliver()
        q2.receive_and_apply(q2.receive(QPU1), Z, "B")
        q3.receive_and_apply(q3.receive(QPU1), Z, "C")

    syndrome = None
    if reset_ancillas:
        with net.phase_scope("reset"):
            s0 = q2.measure_and_send("B", MeasurementBasis.Z)
            s1 = q3.measure_and_send("C", MeasurementBasis.Z)
            q2.prepare("B")
            q3.prepare("C")
        syndrome = Syndrome(s0, s1)
    state = qcore.reorder(net.state, CODE_LABELS)
    return DecodeResult(state, syndrome, list(net.outcomes[start:]))


@dataclass
class RoundtripResult:
    spec: LogicalQubitSpec
    pattern: ErrorPattern
    basis: CodeBasis
    syndrome: Syndrome | None
    fidelity: float
    branch_outcomes: list
    decoded: DecodeResult
    network: Network = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "pattern": str(self.pattern),
            "basis": self.basis.value,
            "syndrome": self.syndrome.bits if self.syndrome else None,
            "fidelity": self.fidelity,
            "branch_outcomes": list(self.branch_outcomes),
        }


def run_roundtrip(
    spec: LogicalQubitSpec,
    pattern="III",
    basis: CodeBasis = CodeBasis.BITFLIP,
    seed: int | None = None,
    rng: np.random.Generator | None = None,
    encode_outcomes: Sequence | None = None,
    decode_outcomes: Sequence | None = None,
    reset_ancillas: bool = True,
) -> RoundtripResult:
    """Encode, inject ``pattern`` on the code qubits, decode, and score A."""
    # None entries in the forced queue fall back to sampling
    forced = list(encode_outcomes) if encode_outcomes is not None else []
    if decode_outcomes is not None:
        forced += [None] * (ENCODE_MEASUREMENTS - len(forced)) + list(decode_outcomes)
    net = Network(seed=seed, rng=rng, forced_outcomes=forced)
    encode(net, spec, basis)
    with net.phase_scope("channel"):
        net.apply_error_pattern(pattern, CODE_LABELS)
    decoded = decode(net, CODE_LABELS, basis, reset_ancillas=reset_ancillas)
    if reset_ancillas:
        f = qcore.fidelity(decoded.recovered(), spec.state("A"))
    else:
        f = _data_fidelity(decoded.state, spec)
    return RoundtripResult(
        spec, ErrorPattern(pattern), CodeBasis(basis), decoded.syndrome, f, list(net.outcomes), decoded, net
    )


def _data_fidelity(state: PureState, spec: LogicalQubitSpec) -> float:
    """``<psi|rho_A|psi>`` where rho_A is A's reduced state in ``state``."""
    t = qcore.reorder(state, CODE_LABELS).tensor().reshape(2, 4)
    rho_a = t @ t.conj().T
    psi = np.array([spec.alpha, spec.beta])
    return float(np.vdot(psi, rho_a @ psi).real)


def branch_space(n: int):
    """All ``2**n`` forced-outcome sequences of length ``n``."""
    return itertools.product((0, 1), repeat=n)


def monolithic_reference(spec: LogicalQubitSpec, pattern, basis: CodeBasis = CodeBasis.BITFLIP) -> PureState:
    """Single-register textbook circuit: two CNOTs, noise, two CNOTs and a Toffoli.

    Returns the A, B, C register; A holds the recovered qubit and B, C the parities.
    """
    basis = CodeBasis(basis)
    psi = qcore.tensor(spec.state("A"), qcore.basis_state(("B", "C"), "00"))
    psi = qcore.apply_gate(psi, CNOT, ("A", "B"))
    psi = qcore.apply_gate(psi, CNOT, ("A", "C"))
    if basis is CodeBasis.PHASEFLIP:
        for q in CODE_LABELS:
            psi = qcore.apply_gate(psi, H, (q,))
    psi = apply_error_pattern(psi, ErrorPattern(pattern), CODE_LABELS)
    if basis is CodeBasis.PHASEFLIP:
        for q in CODE_LABELS:
            psi = qcore.apply_gate(psi, H, (q,))
    psi = qcore.apply_gate(psi, CNOT, ("A", "B"))
    psi = qcore.apply_gate(psi, CNOT, ("A", "C"))
    psi = qcore.apply_gate(psi, TOFFOLI, ("B", "C", "A"))
    return psi
