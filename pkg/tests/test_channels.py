import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dqec import channels, qcore
from dqec.channels import (
    ALL_PATTERNS,
    ChannelConfig,
    DecoherenceTimes,
    ErrorPattern,
    IIDPauliModel,
    PauliRates,
)
from dqec.errors import BadProbability, BadRates, ConfigError, NegativeRate, UnknownLabel
from dqec.qcore import MixedState, PureState

S2 = 1 / math.sqrt(2)
rates_st = st.tuples(*[st.floats(0, 1) for _ in range(3)]).filter(lambda r: sum(r) <= 1)


def dm(vec, label="q"):
    return qcore.to_mixed(PureState((label,), np.asarray(vec, complex)))


def ket(bits):
    v = np.zeros(2 ** len(bits), complex)
    v[int(bits, 2)] = 1
    return v


def all_channels(rho, target, rng):
    r = rng.dirichlet(np.ones(4))
    yield channels.pauli_channel(rho, target, PauliRates(*r[:3]))
    yield channels.depolarizing_channel(rho, target, rng.random())
    yield channels.bit_flip_channel(rho, target, rng.random())
    yield channels.phase_flip_channel(rho, target, rng.random())
    yield channels.amplitude_damping(rho, target, rng.random())
    yield channels.phase_damping(rho, target, rng.random())


# -- rates --


def test_rates_validated():
    with pytest.raises(BadRates):
        PauliRates(0.5, 0.4, 0.2)
    with pytest.raises(BadRates):
        PauliRates(-0.1, 0, 0)


def test_rates_from_times_examples():
    r = channels.rates_from_times(DecoherenceTimes(0, 1, 1))
    assert (r.p_x, r.p_y, r.p_z) == (0, 0, 0)
    r = channels.rates_from_times(DecoherenceTimes(1, 1, 1))
    q = 0.25 * (1 - math.exp(-1))
    assert r.p_x == pytest.approx(q) and r.p_y == pytest.approx(q) and r.p_z == pytest.approx(q)
    assert q == pytest.approx(0.1580, abs=1e-4)
    r = channels.rates_from_times(DecoherenceTimes(1e4, 1, 1.5))
    assert (r.p_x, r.p_y, r.p_z) == pytest.approx((0.25, 0.25, 0.25))


def test_negative_dephasing_rate_reported():
    with pytest.raises(NegativeRate) as info:
        channels.rates_from_times(DecoherenceTimes(1.0, 1.0, 10.0))
    assert info.value.value < 0


def test_scattering_probability_unclamped():
    ok = channels.scattering_probability(DecoherenceTimes(1.0, 2.0, 1.0))
    assert ok == pytest.approx(1 - math.exp(0.5 - 2.0))
    assert channels.scattering_probability(DecoherenceTimes(1.0, 1.0, 10.0)) < 0


def test_damping_composition_gives_t2_coherence():
    # amplitude damping then phase damping with the two helper probabilities
    # leaves the coherence decaying as exp(-t/T2)
    times = DecoherenceTimes(0.7, 1.3, 1.1)
    rho = dm([S2, S2])
    rho = channels.amplitude_damping(rho, "q", channels.damping_probability(times))
    rho = channels.phase_damping(rho, "q", channels.scattering_probability(times))
    assert abs(rho.matrix[0, 1]) == pytest.approx(0.5 * math.exp(-times.t / times.T2), abs=1e-12)
    assert rho.matrix[1, 1].real == pytest.approx(0.5 * math.exp(-times.t / times.T1), abs=1e-12)


# -- Pauli channels --


def test_identity_rates_leave_state():
    rho = qcore.random_density(("q",), np.random.default_rng(0))
    out = channels.pauli_channel(rho, "q", PauliRates(0, 0, 0))
    assert np.allclose(out.matrix, rho.matrix, atol=1e-12)


def test_bit_flip_on_zero():
    p = 0.3
    out = channels.pauli_channel(dm([1, 0]), "q", PauliRates(p, 0, 0))
    assert np.allclose(out.matrix, np.diag([1 - p, p]))


def test_phase_flip_shrinks_x_bloch():
    pz = 0.2
    out = channels.pauli_channel(dm([S2, S2]), "q", PauliRates(0, 0, pz))
    assert out.bloch_vector()[0] == pytest.approx(1 - 2 * pz)


def test_pauli_channel_matches_four_term_sum():
    rng = np.random.default_rng(1)
    rho = qcore.random_density(("a", "b"), rng)
    r = PauliRates(0.1, 0.05, 0.2)
    out = channels.pauli_channel(rho, "b", r)
    expected = np.zeros((4, 4), complex)
    for p, m in zip(r.as_array(), (qcore.PAULI_I, qcore.PAULI_X, qcore.PAULI_Y, qcore.PAULI_Z)):
        k = np.kron(np.eye(2), m)
        expected += p * k @ rho.matrix @ k.conj().T
    assert np.allclose(out.matrix, expected, atol=1e-12)


@settings(max_examples=30)
@given(p=st.floats(0, 1), seed=st.integers(0, 2**31))
def test_depolarizing_shrinks_bloch_vector(p, seed):
    rho = qcore.random_density(("q",), np.random.default_rng(seed))
    out = channels.depolarizing_channel(rho, "q", p)
    assert np.allclose(out.bloch_vector(), (1 - 4 * p / 3) * rho.bloch_vector(), atol=1e-10)


# -- damping --


@pytest.mark.parametrize("builder", [channels.amplitude_damping_kraus, channels.phase_damping_kraus])
@pytest.mark.parametrize("x", [0.0, 0.1, 0.5, 0.99, 1.0])
def test_kraus_completeness(builder, x):
    assert builder(x).completeness_error() < 1e-10


def test_damping_rejects_bad_probability():
    with pytest.raises(BadProbability):
        channels.amplitude_damping(dm([1, 0]), "q", 1.5)
    with pytest.raises(BadProbability):
        channels.phase_damping(dm([1, 0]), "q", -0.1)


def test_amplitude_damping_examples():
    rho = qcore.random_density(("q",), np.random.default_rng(2))
    assert np.allclose(channels.amplitude_damping(rho, "q", 0).matrix, rho.matrix)
    assert np.allclose(channels.amplitude_damping(dm([0, 1]), "q", 1).matrix, np.diag([1, 0]))
    out = channels.amplitude_damping(rho, "q", 0.3)
    assert out.matrix[1, 1].real == pytest.approx(0.7 * rho.matrix[1, 1].real)


@settings(max_examples=40)
@given(omega=st.floats(0, 1), seed=st.integers(0, 2**31))
def test_amplitude_damping_matches_environment_dilation(omega, seed):
    # oracle: evolve system+environment with the photon-loss isometry, trace out E
    rng = np.random.default_rng(seed)
    psi = qcore.random_state(("q",), rng).amplitudes
    a, b = psi
    joint = np.zeros(4, complex)  # index = 2*q + e
    joint[0b00] = a
    joint[0b10] = b * math.sqrt(1 - omega)
    joint[0b01] = b * math.sqrt(omega)
    m = joint.reshape(2, 2)
    expected = m @ m.conj().T
    out = channels.amplitude_damping(qcore.to_mixed(PureState(("q",), psi)), "q", omega)
    assert np.max(np.abs(out.matrix - expected)) < 1e-10


def test_phase_damping_examples():
    plus = dm([S2, S2])
    assert np.allclose(channels.phase_damping(plus, "q", 0).matrix, plus.matrix)
    assert np.allclose(channels.phase_damping(plus, "q", 1).matrix, np.eye(2) / 2)
    out = channels.phase_damping(plus, "q", 0.5)
    assert out.matrix[0, 1].real == pytest.approx(0.3536, abs=1e-4)
    assert np.allclose(np.diag(out.matrix), [0.5, 0.5])


def test_channels_preserve_density_properties():
    rng = np.random.default_rng(3)
    for _ in range(100):
        rho = qcore.random_density(("a", "b"), rng)
        target = rng.choice(["a", "b"])
        for out in all_channels(rho, target, rng):
            m = out.matrix
            assert abs(np.trace(m) - 1) < 1e-10
            assert np.max(np.abs(m - m.conj().T)) < 1e-10
            assert np.linalg.eigvalsh(m).min() > -1e-8


# -- patterns and sampling --


def test_pattern_order_and_weights():
    assert [str(p) for p in ALL_PATTERNS] == ["III", "XII", "IXI", "IIX", "XXI", "IXX", "XIX", "XXX"]
    assert [p.weight for p in ALL_PATTERNS] == [0, 1, 1, 1, 2, 2, 2, 3]
    with pytest.raises(ValueError):
        ErrorPattern("XX")
    with pytest.raises(ValueError):
        ErrorPattern("XQI")


def test_pattern_probabilities_sum_to_one():
    model = IIDPauliModel.bit_flip(0.23)
    assert sum(model.pattern_probability(p) for p in ALL_PATTERNS) == pytest.approx(1, abs=1e-12)


def test_sampling_extremes():
    rng = np.random.default_rng(4)
    assert all(str(channels.sample_error_pattern(rng, IIDPauliModel.bit_flip(0))) == "III" for _ in range(50))
    assert all(str(channels.sample_error_pattern(rng, IIDPauliModel.bit_flip(1))) == "XXX" for _ in range(50))
    with pytest.raises(BadProbability):
        IIDPauliModel.bit_flip(1.2)


def test_sampled_single_flip_frequency():
    rng = np.random.default_rng(5)
    draws = channels.sample_error_patterns(rng, IIDPauliModel.bit_flip(0.2), 100_000)
    freq = sum(str(d) == "XII" for d in draws) / len(draws)
    assert freq == pytest.approx(0.2 * 0.8**2, abs=0.005)


def test_single_and_batch_sampling_agree_in_distribution():
    model = IIDPauliModel.uniform(PauliRates(0.1, 0.2, 0.3))
    rng = np.random.default_rng(6)
    n = 20_000
    one = [str(channels.sample_error_pattern(rng, model)) for _ in range(n)]
    batch = [str(p) for p in channels.sample_error_patterns(rng, model, n)]
    for sym, p in zip("IXYZ", (0.4, 0.1, 0.2, 0.3)):
        for draws in (one, batch):
            f = sum(d[0] == sym for d in draws) / n
            assert abs(f - p) < 4 * math.sqrt(p * (1 - p) / n)


def test_apply_error_pattern_table_rows():
    a, b = 0.6, 0.8j
    word = PureState(("A", "B", "C"), a * ket("000") + b * ket("111"))
    assert np.allclose(channels.apply_error_pattern(word, "III", "ABC").amplitudes, word.amplitudes)
    assert np.allclose(channels.apply_error_pattern(word, "XII", "ABC").amplitudes, a * ket("100") + b * ket("011"))
    assert np.allclose(channels.apply_error_pattern(word, "XXX", "ABC").amplitudes, a * ket("111") + b * ket("000"))
    with pytest.raises(UnknownLabel):
        channels.apply_error_pattern(word, "XII", "ABD")


def test_trajectory_average_matches_exact_channel():
    rng = np.random.default_rng(7)
    rates = PauliRates(0.1, 0.05, 0.15)
    word = PureState(("A", "B", "C"), qcore.random_state(("A", "B", "C"), rng).amplitudes)
    exact = qcore.to_mixed(word)
    for q in "ABC":
        exact = channels.pauli_channel(exact, q, rates)
    draws = channels.sample_error_patterns(rng, IIDPauliModel.uniform(rates), 100_000)
    counts: dict[str, int] = {}
    for d in draws:
        counts[str(d)] = counts.get(str(d), 0) + 1
    # identical draws give identical outputs, so weight each distinct pattern once
    sampled = np.zeros((8, 8), complex)
    for pat, c in counts.items():
        v = channels.apply_error_pattern(word, pat, "ABC").amplitudes
        sampled += c / len(draws) * np.outer(v, v.conj())
    assert np.max(np.abs(sampled - exact.matrix)) < 0.005


# -- cumulative over-rotation --


def test_cumulative_identity_error_examples():
    assert tuple(channels.cumulative_identity_error(0, 0.3)) == (1, 0, 0)
    assert channels.cumulative_identity_error(2, math.pi / 4).p1 == pytest.approx(1)
    r = channels.cumulative_identity_error(100, 0.001)
    # sin^2(0.1), frozen from an independent evaluation
    assert r.p1 == pytest.approx(0.009966711079379185, abs=1e-12)
    assert r.approx_p1 == pytest.approx(0.01)


def test_cumulative_state_matches_closed_form():
    psi = channels.cumulative_identity_state(37, 0.02)
    r = channels.cumulative_identity_error(37, 0.02)
    assert np.abs(psi.amplitudes) ** 2 == pytest.approx([r.p0, r.p1])


# -- config --


@pytest.mark.parametrize(
    "d",
    [
        {"model": "bitflip", "p": 0.1},
        {"model": "phaseflip", "p": 0.2},
        {"model": "depolarizing", "p": 0.3},
        {"model": "pauli", "px": 0.1, "py": 0.0, "pz": 0.2},
        {"model": "amplitude_damping", "omega": 0.4},
        {"model": "phase_damping", "gamma": 0.5},
    ],
)
def test_channel_config_round_trip(d):
    cfg = ChannelConfig.from_dict(d)
    assert cfg.to_dict() == d
    rho = cfg.apply(dm([S2, S2]), "q")
    assert abs(np.trace(rho.matrix) - 1) < 1e-10


@pytest.mark.parametrize(
    "d",
    [{}, {"model": "erasure"}, {"model": "bitflip", "q": 1}, {"model": "bitflip", "p": 2}, {"model": "pauli", "px": 0.6, "pz": 0.6}],
)
def test_channel_config_rejects(d):
    with pytest.raises(ConfigError):
        ChannelConfig.from_dict(d)
