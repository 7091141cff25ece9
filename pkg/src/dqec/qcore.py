"""Dense state-vector and density-matrix simulation of small qubit registers.

Qubits are addressed by string labels rather than positions. The first label
of a register is the most significant bit of the amplitude index, so a state
written ``|abc>`` over labels ``("A", "B", "C")`` has its amplitude at index
``4*a + 2*b + c``.
"""
from __future__ import annotations

import json
from functools import lru_cache
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ArityMismatch,
    BadDistribution,
    DuplicateLabel,
    ImpossibleOutcome,
    InvalidState,
    LabelMismatch,
    NotNormalized,
    NotSeparable,
    UnknownLabel,
)

ATOL = 1e-10
PSD_SLACK = 1e-8

SQRT1_2 = 1.0 / np.sqrt(2.0)

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * SQRT1_2

PAULIS = {"I": PAULI_I, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


def _controlled(u: np.ndarray, n_controls: int) -> np.ndarray:
    dim = 2 ** (n_controls + 1)
    m = np.eye(dim, dtype=complex)
    m[-2:, -2:] = u
    return m


class GateKind(str, Enum):
    I = "I"
    X = "X"
    Y = "Y"
    Z = "Z"
    H = "H"
    CZ = "CZ"
    CNOT = "CNOT"
    TOFFOLI = "Toffoli"
    ROTATION = "Rotation"


_KIND_NAME = {k: k.value for k in GateKind}

_ARITY = {
    GateKind.I: 1,
    GateKind.X: 1,
    GateKind.Y: 1,
    GateKind.Z: 1,
    GateKind.H: 1,
    GateKind.ROTATION: 1,
    GateKind.CZ: 2,
    GateKind.CNOT: 2,
    GateKind.TOFFOLI: 3,
}

_FIXED = {
    GateKind.I: PAULI_I,
    GateKind.X: PAULI_X,
    GateKind.Y: PAULI_Y,
    GateKind.Z: PAULI_Z,
    GateKind.H: HADAMARD,
    GateKind.CZ: _controlled(PAULI_Z, 1),
    GateKind.CNOT: _controlled(PAULI_X, 1),
    GateKind.TOFFOLI: _controlled(PAULI_X, 2),
}
for _m in _FIXED.values():
    _m.setflags(write=False)


@dataclass(frozen=True)
class GateSpec:
    """A named gate. Controls come first in the target list of multi-qubit gates.

    ``Rotation`` is ``exp(-i * angle/2 * n.sigma)`` about the unit ``axis``.
    """

    kind: GateKind
    axis: tuple[float, float, float] | None = None
    angle: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        if self.kind is GateKind.ROTATION:
            if self.axis is None or self.angle is None:
                raise ValueError("rotation needs an axis and an angle")
            axis = np.asarray(self.axis, dtype=float)
            norm = np.linalg.norm(axis)
            if abs(norm - 1.0) > ATOL:
                raise ValueError(f"rotation axis must be a unit vector, got norm {norm}")
            object.__setattr__(self, "axis", tuple(float(a) for a in axis))

    @property
    def arity(self) -> int:
        return _ARITY[self.kind]

    @property
    def name(self) -> str:
        return _KIND_NAME[self.kind]

    def matrix(self) -> np.ndarray:
        if self.kind is GateKind.ROTATION:
            nx, ny, nz = self.axis
            n_sigma = nx * PAULI_X + ny * PAULI_Y + nz * PAULI_Z
            half = self.angle / 2.0
            # n.sigma squares to I, so the exponential has a closed form
            return np.cos(half) * PAULI_I - 1j * np.sin(half) * n_sigma
        return _FIXED[self.kind]


I = GateSpec(GateKind.I)
X = GateSpec(GateKind.X)
Y = GateSpec(GateKind.Y)
Z = GateSpec(GateKind.Z)
H = GateSpec(GateKind.H)
CZ = GateSpec(GateKind.CZ)
CNOT = GateSpec(GateKind.CNOT)
TOFFOLI = GateSpec(GateKind.TOFFOLI)


def rotation(axis: Sequence[float], angle: float) -> GateSpec:
    return GateSpec(GateKind.ROTATION, tuple(axis), float(angle))


def pauli_gate(symbol: str) -> GateSpec:
    return GateSpec(GateKind(symbol))


class MeasurementBasis(str, Enum):
    """Computational (Z) or Hadamard (X) single-qubit measurement.

    Outcomes are reported as ``0``/``1`` in the Z basis and ``"+"``/``"-"``
    in the X basis.
    """

    Z = "Z"
    X = "X"

    def label(self, bit: int):
        if self is MeasurementBasis.Z:
            return int(bit)
        return "+" if bit == 0 else "-"

    def bit(self, outcome) -> int:
        if outcome in (0, 1) and not isinstance(outcome, str):
            return int(outcome)
        if outcome == "+":
            return 0
        if outcome == "-":
            return 1
        raise ValueError(f"not a measurement outcome: {outcome!r}")


def _check_labels(labels: Sequence[str]) -> tuple[str, ...]:
    labels = tuple(labels)
    if len(set(labels)) != len(labels):
        raise DuplicateLabel(f"duplicate qubit labels in {labels}")
    return labels


@dataclass(frozen=True, eq=False)
class PureState:
    labels: tuple[str, ...]
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        labels = _check_labels(self.labels)
        amps = np.ascontiguousarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2 ** len(labels):
            raise InvalidState(f"{amps.size} amplitudes for {len(labels)} qubits")
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > ATOL:
            raise NotNormalized(f"squared norm is {norm}")
        amps.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(label) from None

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def to_json(self) -> str:
        return json.dumps(
            {
                "labels": list(self.labels),
                "re": self.amplitudes.real.tolist(),
                "im": self.amplitudes.imag.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "PureState":
        d = json.loads(text)
        return cls(tuple(d["labels"]), np.asarray(d["re"]) + 1j * np.asarray(d["im"]))

    def __repr__(self):
        terms = []
        n = self.n_qubits
        for i, a in enumerate(self.amplitudes):
            if abs(a) > 1e-9:
                terms.append(f"({a.real:+.4f}{a.imag:+.4f}j)|{i:0{n}b}>")
        return f"PureState[{','.join(self.labels)}]: " + " ".join(terms)


def _trusted(labels: tuple[str, ...], amps: np.ndarray) -> PureState:
    """Build a state from an already-validated register (unitary images)."""
    obj = object.__new__(PureState)
    amps.setflags(write=False)
    object.__setattr__(obj, "labels", labels)
    object.__setattr__(obj, "amplitudes", amps)
    return obj


def basis_state(labels: Sequence[str], bits: str | Sequence[int]) -> PureState:
    """Computational basis state, e.g. ``basis_state("ABC", "010")``."""
    labels = tuple(labels)
    bits = [int(b) for b in bits]
    if len(bits) != len(labels):
        raise InvalidState("one bit per label required")
    amps = np.zeros(2 ** len(labels), dtype=complex)
    amps[int("".join(map(str, bits)) or "0", 2)] = 1.0
    return PureState(labels, amps)


def prepare(alpha: complex, beta: complex, label: str) -> PureState:
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm - 1.0) > ATOL:
        raise NotNormalized(f"|alpha|^2 + |beta|^2 = {norm}")
    return _trusted(_check_labels((label,)), np.array([alpha, beta], dtype=complex))


def tensor(a: PureState, b: PureState) -> PureState:
    if set(a.labels) & set(b.labels):
        raise DuplicateLabel(f"labels overlap: {set(a.labels) & set(b.labels)}")
    return _trusted(a.labels + b.labels, np.outer(a.amplitudes, b.amplitudes).reshape(-1))


def tensor_all(states: Iterable[PureState]) -> PureState:
    states = list(states)
    out = states[0]
    for s in states[1:]:
        out = tensor(out, s)
    return out


def _axes(state_labels: tuple[str, ...], targets: Sequence[str]) -> list[int]:
    axes = []
    for t in targets:
        try:
            axes.append(state_labels.index(t))
        except ValueError:
            raise UnknownLabel(t) from None
    if len(set(axes)) != len(axes):
        raise ArityMismatch(f"targets must be distinct, got {list(targets)}")
    return axes


def apply_matrix(tensor_: np.ndarray, u: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract a k-qubit operator into the given axes of a (2,)*n tensor."""
    k = len(axes)
    ut = u.reshape((2,) * (2 * k))
    out = np.tensordot(ut, tensor_, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


@lru_cache(maxsize=None)
def _bit_table(n: int) -> np.ndarray:
    """``table[ax, i]`` is the value of qubit ``ax`` in basis index ``i``."""
    idx = np.arange(2**n)
    return np.array([(idx >> (n - 1 - ax)) & 1 for ax in range(n)], dtype=np.intp).reshape(n, 2**n)


@lru_cache(maxsize=None)
def _embedded(kind: GateKind, n: int, axes: tuple[int, ...]):
    """Whole-register action of a fixed gate, as a permutation, a diagonal or a dense matrix."""
    bits = _bit_table(n)
    idx = np.arange(2**n)
    shift = [1 << (n - 1 - ax) for ax in axes]
    if kind is GateKind.X:
        return "perm", idx ^ shift[0]
    if kind is GateKind.CNOT:
        return "perm", idx ^ (bits[axes[0]] * shift[1])
    if kind is GateKind.TOFFOLI:
        return "perm", idx ^ ((bits[axes[0]] & bits[axes[1]]) * shift[2])
    if kind is GateKind.Z:
        return "diag", (1 - 2 * bits[axes[0]]).astype(complex)
    if kind is GateKind.CZ:
        return "diag", (1 - 2 * (bits[axes[0]] & bits[axes[1]])).astype(complex)
    eye = np.eye(2**n, dtype=complex).reshape((2,) * n + (2**n,))
    dense = apply_matrix(eye, _FIXED[kind], axes).reshape(2**n, 2**n)
    return "dense", dense


@lru_cache(maxsize=None)
def _mask(n: int, ax: int, bit: int) -> np.ndarray:
    m = _bit_table(n)[ax] == bit
    m.setflags(write=False)
    return m


def _apply_fixed(amps: np.ndarray, kind: GateKind, n: int, axes: tuple[int, ...]) -> np.ndarray:
    how, op = _embedded(kind, n, axes)
    if how == "perm":
        return amps[op]
    if how == "diag":
        return amps * op
    return op @ amps


def apply_gate(state: PureState, gate: GateSpec, targets: Sequence[str]) -> PureState:
    if isinstance(targets, str):
        targets = (targets,)
    if len(targets) != gate.arity:
        raise ArityMismatch(f"{gate.name} takes {gate.arity} qubit(s), got {len(targets)}")
    axes = _axes(state.labels, targets)
    if gate.kind is GateKind.ROTATION:
        out = apply_matrix(state.tensor(), gate.matrix(), axes).reshape(-1)
    else:
        out = _apply_fixed(state.amplitudes, gate.kind, state.n_qubits, tuple(axes))
    return _trusted(state.labels, out)


def apply_unitary(state: PureState, u: np.ndarray, targets: Sequence[str]) -> PureState:
    axes = _axes(state.labels, targets)
    if u.shape != (2 ** len(axes),) * 2:
        raise ArityMismatch(f"operator of shape {u.shape} on {len(axes)} qubit(s)")
    return PureState(state.labels, apply_matrix(state.tensor(), u, axes).reshape(-1))


def outcome_probability(state: PureState, target: str, bit: int = 1) -> float:
    """Born probability of reading ``bit`` on ``target`` in the Z basis."""
    ax = state.index(target)
    a = state.amplitudes[_mask(state.n_qubits, ax, bit)]
    return float(np.vdot(a, a).real)


def _project(state: PureState, ax: int, bit: int, prob: float) -> PureState:
    keep = _mask(state.n_qubits, ax, bit)
    return _trusted(state.labels, np.where(keep, state.amplitudes, 0.0) / np.sqrt(prob))


def measure(
    state: PureState,
    target: str,
    basis: MeasurementBasis = MeasurementBasis.Z,
    rng: np.random.Generator | None = None,
    forced=None,
):
    """Projective measurement of one qubit.

    Returns ``(outcome, post_state)``; the measured qubit stays in the register
    in its collapsed state. ``forced`` selects the outcome instead of sampling
    and must have non-zero probability.
    """
    basis = MeasurementBasis(basis)
    state.index(target)
    if basis is MeasurementBasis.X:
        state = apply_gate(state, H, (target,))
    ax = state.index(target)
    p1 = outcome_probability(state, target, 1)
    if forced is not None:
        bit = basis.bit(forced)
        p = p1 if bit else 1.0 - p1
        if p < 1e-12:
            raise ImpossibleOutcome(f"outcome {forced!r} on {target} has probability {p:.3g}")
    else:
        if rng is None:
            raise ValueError("measure needs an rng unless the outcome is forced")
        bit = int(rng.random() < p1)
        p = p1 if bit else 1.0 - p1
    post = _project(state, ax, bit, p)
    if basis is MeasurementBasis.X:
        post = apply_gate(post, H, (target,))
    return basis.label(bit), post


def measure_and_remove(
    state: PureState,
    target: str,
    basis: MeasurementBasis = MeasurementBasis.Z,
    rng: np.random.Generator | None = None,
    forced=None,
    with_probability: bool = False,
):
    """Measure ``target`` and drop it from the register in one step.

    With ``with_probability`` the Born probability of the outcome is returned
    as a third element.
    """
    ax = state.index(target)
    amps = state.amplitudes
    n = state.n_qubits
    if basis is MeasurementBasis.X:
        amps = _apply_fixed(amps, GateKind.H, n, (ax,))
    one = amps[_mask(n, ax, 1)]
    p1 = float(np.vdot(one, one).real)
    if forced is not None:
        bit = basis.bit(forced)
        p = p1 if bit else 1.0 - p1
        if p < 1e-12:
            raise ImpossibleOutcome(f"outcome {forced!r} on {target} has probability {p:.3g}")
    else:
        if rng is None:
            raise ValueError("measure needs an rng unless the outcome is forced")
        bit = int(rng.random() < p1)
        p = p1 if bit else 1.0 - p1
    rest = one if bit else amps[_mask(n, ax, 0)]
    rest = rest / np.sqrt(p)
    post = _trusted(state.labels[:ax] + state.labels[ax + 1 :], rest)
    if with_probability:
        return basis.label(bit), post, p
    return basis.label(bit), post


def remove_qubit(state: PureState, target: str) -> PureState:
    """Drop a qubit that sits in a definite computational basis value."""
    ax = state.index(target)
    p1 = outcome_probability(state, target, 1)
    if min(p1, 1.0 - p1) > ATOL:
        raise NotSeparable(f"{target} is not in a basis state (P(1) = {p1:.6g})")
    bit = int(p1 > 0.5)
    rest = state.amplitudes[_mask(state.n_qubits, ax, bit)]
    rest = rest / np.sqrt(np.vdot(rest, rest).real)
    return _trusted(state.labels[:ax] + state.labels[ax + 1 :], rest)


def reorder(state: PureState, labels: Sequence[str]) -> PureState:
    labels = tuple(labels)
    if set(labels) != set(state.labels) or len(labels) != len(state.labels):
        raise LabelMismatch(f"{labels} vs {state.labels}")
    perm = [state.labels.index(l) for l in labels]
    return PureState(labels, np.transpose(state.tensor(), perm).reshape(-1))


def overlap(a: PureState, b: PureState) -> float:
    """Phase-insensitive overlap magnitude ``|<a|b>|``."""
    b = reorder(b, a.labels)
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)))


@dataclass(frozen=True, eq=False)
class MixedState:
    labels: tuple[str, ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        labels = _check_labels(self.labels)
        m = np.ascontiguousarray(self.matrix, dtype=complex)
        dim = 2 ** len(labels)
        if m.shape != (dim, dim):
            raise InvalidState(f"density matrix of shape {m.shape} for {len(labels)} qubits")
        tr = np.trace(m).real
        if abs(tr - 1.0) > ATOL:
            raise InvalidState(f"trace is {tr}")
        if np.max(np.abs(m - m.conj().T)) > ATOL:
            raise InvalidState("density matrix is not Hermitian")
        if np.linalg.eigvalsh(m).min() < -PSD_SLACK:
            raise InvalidState("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "matrix", m)

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(label) from None

    def tensor(self) -> np.ndarray:
        return self.matrix.reshape((2,) * (2 * self.n_qubits))

    def bloch_vector(self) -> np.ndarray:
        if self.n_qubits != 1:
            raise ValueError("Bloch vector is defined for single qubits")
        return np.array([np.trace(self.matrix @ p).real for p in (PAULI_X, PAULI_Y, PAULI_Z)])


def to_mixed(state: PureState) -> MixedState:
    a = state.amplitudes
    return MixedState(state.labels, np.outer(a, a.conj()))


def mix(entries: Sequence[tuple[float, PureState]]) -> MixedState:
    """Ensemble ``sum_i p_i |psi_i><psi_i|``."""
    if not entries:
        raise BadDistribution("empty ensemble")
    probs = np.array([p for p, _ in entries], dtype=float)
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > ATOL:
        raise BadDistribution(f"probabilities must be >= 0 and sum to 1, got {probs.sum()}")
    labels = entries[0][1].labels
    dim = 2 ** len(labels)
    rho = np.zeros((dim, dim), dtype=complex)
    for p, psi in entries:
        if psi.labels != labels:
            if set(psi.labels) != set(labels):
                raise BadDistribution(f"label sets differ: {psi.labels} vs {labels}")
            psi = reorder(psi, labels)
        rho += p * np.outer(psi.amplitudes, psi.amplitudes.conj())
    return MixedState(labels, rho)


def mix_mixed(entries: Sequence[tuple[float, MixedState]]) -> MixedState:
    probs = np.array([p for p, _ in entries], dtype=float)
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > ATOL:
        raise BadDistribution("probabilities must be >= 0 and sum to 1")
    labels = entries[0][1].labels
    if any(r.labels != labels for _, r in entries):
        raise BadDistribution("all components must share one label order")
    return MixedState(labels, sum(p * r.matrix for p, r in entries))


def fidelity(rho: MixedState | PureState, reference: PureState) -> float:
    """``<psi|rho|psi>`` for a pure reference state."""
    if set(rho.labels) != set(reference.labels) or len(rho.labels) != len(reference.labels):
        raise LabelMismatch(f"{rho.labels} vs {reference.labels}")
    if isinstance(rho, PureState):
        # |<psi|phi>|^2 without building the outer product
        return min(overlap(rho, reference) ** 2, 1.0)
    if set(rho.labels) != set(reference.labels) or len(rho.labels) != len(reference.labels):
        raise LabelMismatch(f"{rho.labels} vs {reference.labels}")
    psi = reorder(reference, rho.labels).amplitudes
    f = float(np.vdot(psi, rho.matrix @ psi).real)
    if f < -ATOL or f > 1 + ATOL:
        raise InvalidState(f"fidelity {f} outside [0, 1]")
    return min(max(f, 0.0), 1.0)


def apply_kraus(rho: MixedState, kraus: Sequence[np.ndarray], target: str) -> MixedState:
    """``sum_k K rho K^dagger`` with each ``K`` acting on one qubit."""
    ax = rho.index(target)
    n = rho.n_qubits
    t = rho.tensor()
    out = np.zeros_like(t)
    for k in kraus:
        left = apply_matrix(t, k, [ax])
        out += apply_matrix(left, k.conj(), [n + ax])
    return MixedState(rho.labels, out.reshape(2**n, 2**n))


def conjugate(rho: MixedState, u: np.ndarray, target: str) -> MixedState:
    return apply_kraus(rho, [u], target)


def random_state(labels: Sequence[str], rng: np.random.Generator) -> PureState:
    """Haar-random pure state."""
    labels = tuple(labels)
    v = rng.normal(size=2 ** len(labels)) + 1j * rng.normal(size=2 ** len(labels))
    return PureState(labels, v / np.linalg.norm(v))


def random_density(labels: Sequence[str], rng: np.random.Generator, rank: int | None = None) -> MixedState:
    """Random density matrix from a Ginibre ensemble."""
    labels = tuple(labels)
    dim = 2 ** len(labels)
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return MixedState(labels, m / np.trace(m).real)
