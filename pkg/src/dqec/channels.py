"""Single-qubit noise channels and stochastic Pauli error patterns.

Two routes are provided and are meant to agree on average: exact channels
acting on density matrices, and sampled Pauli patterns applied to pure
states for trajectory simulation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import qcore
from .errors import BadProbability, BadRates, ConfigError, NegativeRate, UnknownLabel
from .qcore import PAULI_I, PAULI_X, PAULI_Y, PAULI_Z, MixedState, PureState

PAULI_SYMBOLS = ("I", "X", "Y", "Z")


def _check_probability(value: float, name: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0 or math.isnan(value):
        raise BadProbability(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class PauliRates:
    p_x: float = 0.0
    p_y: float = 0.0
    p_z: float = 0.0

    def __post_init__(self):
        for name in ("p_x", "p_y", "p_z"):
            v = float(getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise BadRates(f"{name} = {v} is outside [0, 1]")
            object.__setattr__(self, name, v)
        if self.p_x + self.p_y + self.p_z > 1.0 + 1e-12:
            raise BadRates(f"rates sum to {self.p_x + self.p_y + self.p_z} > 1")

    @property
    def p_i(self) -> float:
        return max(0.0, 1.0 - self.p_x - self.p_y - self.p_z)

    def as_array(self) -> np.ndarray:
        """Probabilities in ``I, X, Y, Z`` order."""
        return np.array([self.p_i, self.p_x, self.p_y, self.p_z])

    @classmethod
    def bit_flip(cls, p: float) -> "PauliRates":
        return cls(p_x=p)

    @classmethod
    def phase_flip(cls, p: float) -> "PauliRates":
        return cls(p_z=p)

    @classmethod
    def depolarizing(cls, p: float) -> "PauliRates":
        return cls(p / 3, p / 3, p / 3)


@dataclass(frozen=True)
class DecoherenceTimes:
    t: float
    T1: float
    T2: float

    def __post_init__(self):
        if self.T1 <= 0 or self.T2 <= 0:
            raise ValueError("T1 and T2 must be positive")
        if self.t < 0:
            raise ValueError("elapsed time must be non-negative")


def rates_from_times(times: DecoherenceTimes) -> PauliRates:
    """Pauli-twirled relaxation/dephasing rates for an idle interval.

    Raises ``NegativeRate`` when the dephasing rate comes out negative
    (possible once T2 exceeds 2*T1); the value is carried on the exception.
    """
    relax = math.exp(-times.t / times.T1)
    dephase = math.exp(-times.t / times.T2)
    p_xy = 0.25 * (1.0 - relax)
    p_z = 0.25 * (1.0 + relax - 2.0 * dephase)
    if p_z < -1e-15:
        raise NegativeRate(f"p_z = {p_z:.6g} < 0 for {times}", p_z)
    return PauliRates(p_xy, p_xy, max(p_z, 0.0))


def damping_probability(times: DecoherenceTimes) -> float:
    """Photon-loss probability ``1 - exp(-t/T1)``."""
    return 1.0 - math.exp(-times.t / times.T1)


def scattering_probability(times: DecoherenceTimes) -> float:
    """``1 - exp(t/T1 - 2t/T2)``, returned unclamped.

    Lies in [0, 1] exactly when T2 <= 2*T1; outside that regime the raw value
    is returned so the caller can see it (``phase_damping`` will reject it).
    """
    return 1.0 - math.exp(times.t / times.T1 - 2.0 * times.t / times.T2)


@dataclass(frozen=True, eq=False)
class KrausPair:
    E0: np.ndarray
    E1: np.ndarray

    def __post_init__(self):
        if self.completeness_error() > 1e-10:
            raise ValueError("Kraus operators are not trace preserving")

    def completeness_error(self) -> float:
        s = self.E0.conj().T @ self.E0 + self.E1.conj().T @ self.E1
        return float(np.max(np.abs(s - np.eye(2))))

    def __iter__(self):
        return iter((self.E0, self.E1))


def amplitude_damping_kraus(omega: float) -> KrausPair:
    omega = _check_probability(omega, "omega")
    return KrausPair(
        np.array([[1, 0], [0, math.sqrt(1 - omega)]], dtype=complex),
        np.array([[0, math.sqrt(omega)], [0, 0]], dtype=complex),
    )


def phase_damping_kraus(gamma: float) -> KrausPair:
    gamma = _check_probability(gamma, "gamma")
    return KrausPair(
        np.array([[1, 0], [0, math.sqrt(1 - gamma)]], dtype=complex),
        np.array([[0, 0], [0, math.sqrt(gamma)]], dtype=complex),
    )


def pauli_kraus(rates: PauliRates) -> list[np.ndarray]:
    probs = rates.as_array()
    return [math.sqrt(p) * m for p, m in zip(probs, (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)) if p > 0]


def pauli_channel(rho: MixedState, target: str, rates: PauliRates) -> MixedState:
    if not isinstance(rates, PauliRates):
        rates = PauliRates(*rates)
    return qcore.apply_kraus(rho, pauli_kraus(rates), target)


def bit_flip_channel(rho: MixedState, target: str, p: float) -> MixedState:
    return pauli_channel(rho, target, PauliRates.bit_flip(p))


def phase_flip_channel(rho: MixedState, target: str, p: float) -> MixedState:
    return pauli_channel(rho, target, PauliRates.phase_flip(p))


def depolarizing_channel(rho: MixedState, target: str, p: float) -> MixedState:
    return pauli_channel(rho, target, PauliRates.depolarizing(p))


def amplitude_damping(rho: MixedState, target: str, omega: float) -> MixedState:
    return qcore.apply_kraus(rho, list(amplitude_damping_kraus(omega)), target)


def phase_damping(rho: MixedState, target: str, gamma: float) -> MixedState:
    return qcore.apply_kraus(rho, list(phase_damping_kraus(gamma)), target)


class ErrorPattern(tuple):
    """One Pauli symbol per code qubit, e.g. ``ErrorPattern("XII")``."""

    def __new__(cls, symbols):
        symbols = tuple(str(s).upper() for s in symbols)
        if len(symbols) != 3:
            raise ValueError(f"an error pattern has exactly 3 entries, got {len(symbols)}")
        if any(s not in PAULI_SYMBOLS for s in symbols):
            raise ValueError(f"unknown Pauli symbol in {symbols}")
        return super().__new__(cls, symbols)

    @property
    def weight(self) -> int:
        return sum(s != "I" for s in self)

    def __str__(self):
        return "".join(self)

    def __repr__(self):
        return f"ErrorPattern({str(self)!r})"

    def tensor_label(self) -> str:
        """Kronecker-product form, e.g. ``X⊗I⊗I``."""
        return "⊗".join(self)


ALL_PATTERNS = tuple(ErrorPattern(s) for s in ("III", "XII", "IXI", "IIX", "XXI", "IXX", "XIX", "XXX"))


@dataclass(frozen=True)
class IIDPauliModel:
    """Independent Pauli noise with possibly different rates per code qubit."""

    rates: tuple[PauliRates, PauliRates, PauliRates]

    @classmethod
    def bit_flip(cls, p: float) -> "IIDPauliModel":
        _check_probability(p, "p")
        r = PauliRates.bit_flip(p)
        return cls((r, r, r))

    @classmethod
    def phase_flip(cls, p: float) -> "IIDPauliModel":
        _check_probability(p, "p")
        r = PauliRates.phase_flip(p)
        return cls((r, r, r))

    @classmethod
    def uniform(cls, rates: PauliRates) -> "IIDPauliModel":
        return cls((rates, rates, rates))

    def pattern_probability(self, pattern: ErrorPattern) -> float:
        prob = 1.0
        for symbol, r in zip(pattern, self.rates):
            prob *= r.as_array()[PAULI_SYMBOLS.index(symbol)]
        return prob


def sample_error_pattern(rng: np.random.Generator, model: IIDPauliModel) -> ErrorPattern:
    symbols = []
    for r in model.rates:
        u = rng.random()
        cdf = np.cumsum(r.as_array())
        symbols.append(PAULI_SYMBOLS[min(int(np.searchsorted(cdf, u, side="right")), 3)])
    return ErrorPattern(symbols)


def sample_error_patterns(rng: np.random.Generator, model: IIDPauliModel, size: int) -> list[ErrorPattern]:
    """Vectorised draw of ``size`` patterns; same distribution as repeated single draws."""
    u = rng.random((size, 3))
    codes = np.empty((size, 3), dtype=int)
    for q, r in enumerate(model.rates):
        codes[:, q] = np.minimum(np.searchsorted(np.cumsum(r.as_array()), u[:, q], side="right"), 3)
    return [ErrorPattern(PAULI_SYMBOLS[c] for c in row) for row in codes]


def apply_error_pattern(state: PureState, pattern: ErrorPattern, code_labels: Sequence[str]) -> PureState:
    pattern = ErrorPattern(pattern)
    if len(code_labels) != 3:
        raise ValueError("three code labels required")
    for label in code_labels:
        if label not in state.labels:
            raise UnknownLabel(label)
    for symbol, label in zip(pattern, code_labels):
        if symbol != "I":
            state = qcore.apply_gate(state, qcore.pauli_gate(symbol), (label,))
    return state


class CumulativeError(NamedTuple):
    p0: float
    p1: float
    approx_p1: float


def cumulative_identity_error(n_gates: int, eps: float) -> CumulativeError:
    """Outcome probabilities after ``n_gates`` identity gates each over-rotated by ``eps``."""
    if n_gates < 0 or eps < 0:
        raise ValueError("gate count and eps must be non-negative")
    theta = n_gates * eps
    return CumulativeError(math.cos(theta) ** 2, math.sin(theta) ** 2, theta**2)


def cumulative_identity_state(n_gates: int, eps: float) -> PureState:
    """Apply ``n_gates`` copies of ``exp(i*eps*X)`` to ``|0>``."""
    u = math.cos(eps) * PAULI_I + 1j * math.sin(eps) * PAULI_X
    psi = np.array([1, 0], dtype=complex)
    for _ in range(n_gates):
        psi = u @ psi
    return PureState(("q",), psi / np.linalg.norm(psi))


CHANNEL_MODELS = ("bitflip", "phaseflip", "pauli", "depolarizing", "amplitude_damping", "phase_damping")

_MODEL_PARAMS = {
    "bitflip": ("p",),
    "phaseflip": ("p",),
    "depolarizing": ("p",),
    "pauli": ("px", "py", "pz"),
    "amplitude_damping": ("omega",),
    "phase_damping": ("gamma",),
}


@dataclass(frozen=True)
class ChannelConfig:
    """Parsed ``{"model": ..., params...}`` channel description."""

    model: str
    params: tuple[tuple[str, float], ...] = ()

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelConfig":
        if not isinstance(d, dict) or "model" not in d:
            raise ConfigError("channel config needs a 'model' key")
        model = d["model"]
        if model not in CHANNEL_MODELS:
            raise ConfigError(f"unknown channel model {model!r}; expected one of {CHANNEL_MODELS}")
        allowed = _MODEL_PARAMS[model]
        extra = set(d) - set(allowed) - {"model"}
        if extra:
            raise ConfigError(f"unexpected parameters for {model}: {sorted(extra)}")
        params = []
        for name in allowed:
            if name in d:
                try:
                    params.append((name, _check_probability(d[name], name)))
                except (BadProbability, TypeError, ValueError) as exc:
                    raise ConfigError(str(exc)) from exc
        cfg = cls(model, tuple(params))
        if model == "pauli":
            try:
                cfg.pauli_rates()
            except BadRates as exc:
                raise ConfigError(str(exc)) from exc
        return cfg

    def to_dict(self) -> dict:
        return {"model": self.model, **dict(self.params)}

    def param(self, name: str, default: float | None = None) -> float | None:
        return dict(self.params).get(name, default)

    @property
    def is_pauli(self) -> bool:
        return self.model in ("bitflip", "phaseflip", "pauli", "depolarizing")

    def pauli_rates(self, p: float | None = None) -> PauliRates:
        """Rates for Pauli-family models; ``p`` overrides the configured strength."""
        if self.model == "pauli":
            return PauliRates(self.param("px", 0.0), self.param("py", 0.0), self.param("pz", 0.0))
        if not self.is_pauli:
            raise ConfigError(f"{self.model} is not a Pauli channel")
        strength = self.param("p", 0.0) if p is None else p
        return {
            "bitflip": PauliRates.bit_flip,
            "phaseflip": PauliRates.phase_flip,
            "depolarizing": PauliRates.depolarizing,
        }[self.model](strength)

    def apply(self, rho: MixedState, target: str) -> MixedState:
        if self.is_pauli:
            return pauli_channel(rho, target, self.pauli_rates())
        if self.model == "amplitude_damping":
            return amplitude_damping(rho, target, self.param("omega", 0.0))
        return phase_damping(rho, target, self.param("gamma", 0.0))
