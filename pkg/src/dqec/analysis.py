"""Fidelity polynomial, channel-output mixture, Monte Carlo sweeps and threshold."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from . import qcore
from .channels import ALL_PATTERNS, ChannelConfig, ErrorPattern, IIDPauliModel, apply_error_pattern, sample_error_patterns
from .dqpu import Network
from .errors import BadProbability, InsufficientData
from .protocol import (
    CODE_LABELS,
    CodeBasis,
    LogicalQubitSpec,
    StabilizerPair,
    apply_correction,
    correction_from_syndrome,
    decode,
    encode,
    syndrome_extract,
    Syndrome,
)
from .qcore import MixedState, PureState

MODES = ("full_distributed", "syndrome_correct")
CSV_COLUMNS = ("p", "trials", "mean_fidelity", "std_error", "theoretical", "baseline_1_minus_p")
SPEC_ZERO = LogicalQubitSpec(1.0, 0.0)


def _check_p(p: float) -> float:
    p = float(p)
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise BadProbability(f"p={p} outside [0, 1]")
    return p


def theoretical_fidelity(p: float) -> float:
    p = _check_p(p)
    return 2 * p**3 - 3 * p**2 + 1


def unencoded_fidelity(p: float) -> float:
    return 1.0 - _check_p(p)


def correctable_probability(p: float) -> float:
    p = _check_p(p)
    return (1 - p) ** 3 + 3 * p * (1 - p) ** 2


def general_fidelity(spec: LogicalQubitSpec, p: float) -> float:
    """Code-word fidelity for an arbitrary spec.

    Uncorrectable patterns leave the logical flip on the code word, which still
    overlaps it by ``|2 Re(conj(alpha) beta)|^2``. For ``|0>`` this term vanishes
    and the result reduces to :func:`theoretical_fidelity`.
    """
    pc = correctable_probability(p)
    return pc + (1 - pc) * spec.logical_x_overlap()


def pattern_for_basis(pattern, basis: CodeBasis) -> ErrorPattern:
    """Translate an X-pattern into the error type the basis protects against."""
    sym = CodeBasis(basis).error_symbol
    return ErrorPattern("".join(sym if s != "I" else "I" for s in ErrorPattern(pattern)))


def noise_model(p: float, basis: CodeBasis) -> IIDPauliModel:
    if CodeBasis(basis) is CodeBasis.PHASEFLIP:
        return IIDPauliModel.phase_flip(p)
    return IIDPauliModel.bit_flip(p)


@dataclass(frozen=True)
class ChannelOutputDecomposition:
    p_correctable: float
    p_uncorrectable: float
    correctable: MixedState
    uncorrectable: MixedState | None
    weights: dict

    def __post_init__(self):
        if abs(self.p_correctable + self.p_uncorrectable - 1.0) > 1e-12:
            raise BadProbability("component weights do not sum to one")


def channel_output_density(
    spec: LogicalQubitSpec, p: float, basis: CodeBasis = CodeBasis.BITFLIP
) -> tuple[MixedState, ChannelOutputDecomposition]:
    """Exact output of iid flips on the code word, grouped by correctability."""
    p = _check_p(p)
    basis = CodeBasis(basis)
    model = noise_model(p, basis)
    word = spec.code_word(basis)
    dim = 2 ** len(CODE_LABELS)
    groups = {True: np.zeros((dim, dim), complex), False: np.zeros((dim, dim), complex)}
    mass = {True: 0.0, False: 0.0}
    weights = {}
    for x_pattern in ALL_PATTERNS:
        pattern = pattern_for_basis(x_pattern, basis)
        w = model.pattern_probability(pattern)
        weights[str(pattern)] = w
        v = apply_error_pattern(word, pattern, CODE_LABELS).amplitudes
        ok = pattern.weight <= 1
        groups[ok] += w * np.outer(v, v.conj())
        mass[ok] += w
    rho = MixedState(CODE_LABELS, groups[True] + groups[False])

    def _component(ok):
        if mass[ok] <= 0:
            return None
        return MixedState(CODE_LABELS, groups[ok] / mass[ok])

    correct = _component(True)
    # at p = 1 the correctable group is empty; keep the clean word as its placeholder
    if correct is None:
        correct = qcore.to_mixed(word)
    pc = correctable_probability(p)
    return rho, ChannelOutputDecomposition(pc, 1.0 - pc, correct, _component(False), weights)


def syndrome_projectors(basis: CodeBasis = CodeBasis.BITFLIP) -> dict[str, np.ndarray]:
    """Projectors onto the four joint eigenspaces of the stabilizer pair."""
    s1, s2 = StabilizerPair.for_basis(basis).matrices()
    eye = np.eye(8)
    out = {}
    for e1 in (1, -1):
        for e2 in (1, -1):
            out[Syndrome.from_eigenvalues(e1, e2).bits] = (eye + e1 * s1) @ (eye + e2 * s2) / 4
    return out


def recovery_kraus(basis: CodeBasis = CodeBasis.BITFLIP) -> list[np.ndarray]:
    """``C_s P_s`` for each syndrome ``s`` under minimum-weight lookup."""
    ops = []
    for bits, proj in syndrome_projectors(basis).items():
        corr = correction_from_syndrome(Syndrome.from_bits(bits), basis)
        if corr is None:
            ops.append(proj)
            continue
        mats = [qcore.PAULI_I] * 3
        mats[corr.qubit] = qcore.PAULIS[corr.pauli]
        ops.append(np.kron(np.kron(mats[0], mats[1]), mats[2]) @ proj)
    return ops


def recover(rho: MixedState, basis: CodeBasis = CodeBasis.BITFLIP) -> MixedState:
    if tuple(rho.labels) != CODE_LABELS:
        raise ValueError(f"expected labels {CODE_LABELS}, got {rho.labels}")
    m = sum(k @ rho.matrix @ k.conj().T for k in recovery_kraus(basis))
    return MixedState(CODE_LABELS, m)


def exact_pipeline_fidelity(
    p: float, basis: CodeBasis = CodeBasis.BITFLIP, spec: LogicalQubitSpec = SPEC_ZERO
) -> float:
    """Channel mixture, then syndrome recovery on each component, scored on the code word."""
    rho, dec = channel_output_density(spec, p, basis)
    word = spec.code_word(basis)
    f = dec.p_correctable * qcore.fidelity(recover(dec.correctable, basis), word)
    if dec.uncorrectable is not None:
        f += dec.p_uncorrectable * qcore.fidelity(recover(dec.uncorrectable, basis), word)
    return f


def theoretical_crossovers() -> tuple[float, ...]:
    """Roots of ``2p^3 - 3p^2 + p`` where the coded and bare curves meet."""
    roots = np.roots([2.0, -3.0, 1.0, 0.0])
    return tuple(sorted(float(r.real) for r in roots))


@dataclass(frozen=True)
class SweepRecord:
    p: float
    trials: int
    mean_fidelity: float
    std_error: float
    theoretical: float

    def __post_init__(self):
        if not (-1e-12 <= self.mean_fidelity <= 1 + 1e-12):
            raise ValueError("mean_fidelity outside [0, 1]")
        if self.std_error < 0:
            raise ValueError("negative std_error")

    @property
    def baseline(self) -> float:
        return 1.0 - self.p

    def row(self) -> dict:
        d = asdict(self)
        d["baseline_1_minus_p"] = self.baseline
        return d


def _unencode(state: PureState, basis: CodeBasis) -> PureState:
    """Monolithic inverse of the encoder; leaves the logical qubit on A."""
    if basis is CodeBasis.PHASEFLIP:
        for q in CODE_LABELS:
            state = qcore.apply_gate(state, qcore.H, (q,))
    state = qcore.apply_gate(state, qcore.CNOT, ("A", "B"))
    return qcore.apply_gate(state, qcore.CNOT, ("A", "C"))


def _reduced_fidelity(state: PureState, spec: LogicalQubitSpec) -> float:
    t = qcore.reorder(state, (CODE_LABELS[0],) + tuple(l for l in state.labels if l != CODE_LABELS[0]))
    m = t.amplitudes.reshape(2, -1)
    rho_a = m @ m.conj().T
    psi = np.array([spec.alpha, spec.beta])
    return float(np.vdot(psi, rho_a @ psi).real)


def _trials_syndrome(spec, patterns, basis, rng):
    word = spec.code_word(basis)
    out = np.empty(len(patterns))
    for i, pattern in enumerate(patterns):
        noisy = apply_error_pattern(word, pattern, CODE_LABELS)
        syn, code = syndrome_extract(noisy, CODE_LABELS, basis, rng=rng)
        fixed = apply_correction(code, correction_from_syndrome(syn, basis))
        out[i] = _reduced_fidelity(_unencode(fixed, basis), spec)
    return out


def _trials_distributed(spec, patterns, basis, rng):
    net = Network(rng=rng)
    encode(net, spec, basis)
    out = np.empty(len(patterns))
    for i, pattern in enumerate(patterns):
        branch = net.fork(rng=rng)
        with branch.phase_scope("channel"):
            branch.apply_error_pattern(pattern, CODE_LABELS)
        result = decode(branch, CODE_LABELS, basis)
        out[i] = qcore.fidelity(result.recovered(), spec.state("A"))
    return out


def monte_carlo_sweep(
    p_values: Iterable[float],
    trials: int,
    basis: CodeBasis = CodeBasis.BITFLIP,
    mode: str = "syndrome_correct",
    seed: int = 0,
    spec: LogicalQubitSpec = SPEC_ZERO,
    channel: ChannelConfig | None = None,
) -> list[SweepRecord]:
    """Sample iid flips at each ``p`` and score the recovered logical qubit.

    Each point draws from its own child of ``SeedSequence(seed)``, so points
    can be run in any order or in parallel with identical results. A Pauli
    ``channel`` replaces the default flip noise of ``basis``; its strength is
    taken from the grid value.
    """
    if int(trials) < 1:
        raise ValueError("trials must be >= 1")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    basis = CodeBasis(basis)
    p_values = [_check_p(p) for p in p_values]
    children = np.random.SeedSequence(seed).spawn(len(p_values))
    run = _trials_distributed if mode == "full_distributed" else _trials_syndrome
    records = []
    for p, child in zip(p_values, children):
        rng = np.random.default_rng(child)
        model = noise_model(p, basis) if channel is None else IIDPauliModel.uniform(channel.pauli_rates(p))
        patterns = sample_error_patterns(rng, model, int(trials))
        f = run(spec, patterns, basis, rng)
        se = float(f.std(ddof=1) / math.sqrt(len(f))) if len(f) > 1 else 0.0
        mean = float(min(max(f.mean(), 0.0), 1.0))
        records.append(SweepRecord(p, int(trials), mean, se, theoretical_fidelity(p)))
    return records


def threshold_check(records: Sequence[SweepRecord]) -> float:
    """Largest sampled ``p`` at which the code still matches or beats ``1 - p``."""
    ps = [r.p for r in records]
    if not records or not (min(ps) < 0.5 < max(ps)):
        raise InsufficientData("sweep must straddle p = 0.5")
    # walk up from small p and stop at the first loss; the curves touch again at p = 1
    best = None
    for r in sorted(records, key=lambda r: r.p):
        if r.mean_fidelity < r.baseline - 2 * r.std_error:
            break
        best = r.p
    if best is None:
        raise InsufficientData("code never matches the unencoded baseline")
    return best


def sweep_csv(records: Sequence[SweepRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        row = r.row()
        w.writerow([repr(float(row["p"])), row["trials"]] + [repr(float(row[k])) for k in CSV_COLUMNS[2:]])
    return buf.getvalue()


def write_sweep_csv(records: Sequence[SweepRecord], path) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        fh.write(sweep_csv(records))


def read_sweep_csv(path) -> list[SweepRecord]:
    with open(path, newline="", encoding="ascii") as fh:
        rows = list(csv.DictReader(fh))
    return [
        SweepRecord(float(r["p"]), int(r["trials"]), float(r["mean_fidelity"]), float(r["std_error"]), float(r["theoretical"]))
        for r in rows
    ]
