import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dqec import analysis, qcore
from dqec.analysis import SweepRecord
from dqec.channels import ALL_PATTERNS, ChannelConfig
from dqec.errors import BadProbability, InsufficientData
from dqec.protocol import CodeBasis, LogicalQubitSpec

BF, PF = CodeBasis.BITFLIP, CodeBasis.PHASEFLIP
probs = st.floats(0, 1)


def poly(p):
    # independent oracle: the factored form 1 - p^2 (3 - 2p)
    return 1 - p * p * (3 - 2 * p)


def test_theoretical_fidelity_examples():
    assert analysis.theoretical_fidelity(0) == 1
    assert analysis.theoretical_fidelity(0.5) == pytest.approx(0.5)
    assert analysis.theoretical_fidelity(1) == pytest.approx(0)
    with pytest.raises(BadProbability):
        analysis.theoretical_fidelity(1.1)
    with pytest.raises(BadProbability):
        analysis.theoretical_fidelity(float("nan"))


def test_unencoded_baseline():
    for p in np.linspace(0, 1, 11):
        assert analysis.unencoded_fidelity(p) == pytest.approx(1 - p)


@given(p=probs)
def test_decomposition_weights_sum_to_one(p):
    _, dec = analysis.channel_output_density(LogicalQubitSpec(0.6, 0.8), p)
    assert abs(dec.p_correctable + dec.p_uncorrectable - 1) < 1e-12


def test_channel_output_examples():
    spec = LogicalQubitSpec(0.6, 0.8j)
    rho, _ = analysis.channel_output_density(spec, 0)
    assert np.allclose(rho.matrix, qcore.to_mixed(spec.code_word()).matrix)
    _, dec = analysis.channel_output_density(spec, 0.1)
    assert dec.p_correctable == pytest.approx(0.972)


def test_pattern_weights_follow_binomial_rows():
    p = 0.13
    _, dec = analysis.channel_output_density(LogicalQubitSpec(1, 0), p)
    q = 1 - p
    expected = [q**3] + [p * q**2] * 3 + [p**2 * q] * 3 + [p**3]
    assert [dec.weights[str(pat)] for pat in ALL_PATTERNS] == pytest.approx(expected, abs=1e-15)


def test_channel_output_is_density():
    rho, _ = analysis.channel_output_density(LogicalQubitSpec(0.6, 0.8j), 0.27, PF)
    assert abs(np.trace(rho.matrix) - 1) < 1e-10
    assert np.linalg.eigvalsh(rho.matrix).min() > -1e-8


@pytest.mark.parametrize("basis", list(CodeBasis))
def test_exact_pipeline_matches_polynomial(basis):
    for p in np.linspace(0, 1, 20):
        assert abs(analysis.exact_pipeline_fidelity(p, basis) - poly(p)) < 1e-10


@given(seed=st.integers(0, 2**31), p=probs)
def test_exact_pipeline_general_spec(seed, p):
    spec = LogicalQubitSpec.random(np.random.default_rng(seed))
    assert abs(analysis.exact_pipeline_fidelity(p, BF, spec) - analysis.general_fidelity(spec, p)) < 1e-10


def test_recovery_is_trace_preserving():
    for basis in CodeBasis:
        s = sum(k.conj().T @ k for k in analysis.recovery_kraus(basis))
        assert np.allclose(s, np.eye(8))


def test_crossover_roots():
    assert analysis.theoretical_crossovers() == pytest.approx((0, 0.5, 1), abs=1e-12)
    for p in (0.1, 0.3, 0.49):
        assert analysis.theoretical_fidelity(p) > 1 - p
    for p in (0.51, 0.7, 0.9):
        assert analysis.theoretical_fidelity(p) < 1 - p


def test_sweep_p_zero_is_exact():
    for mode in analysis.MODES:
        (r,) = analysis.monte_carlo_sweep([0.0], 50, mode=mode, seed=1)
        assert r.mean_fidelity == 1 and r.std_error == 0


def test_sweep_statistics_at_p02():
    (r,) = analysis.monte_carlo_sweep([0.2], 20_000, seed=2)
    assert r.theoretical == pytest.approx(0.896)
    assert abs(r.mean_fidelity - 0.896) < 4 * r.std_error


def test_sweep_modes_agree():
    fast = analysis.monte_carlo_sweep([0.15, 0.35], 1500, mode="syndrome_correct", seed=3)
    full = analysis.monte_carlo_sweep([0.15, 0.35], 1500, mode="full_distributed", seed=3)
    for a, b in zip(fast, full):
        # same seed, same sampled patterns: identical 0/1 scores
        assert a.mean_fidelity == pytest.approx(b.mean_fidelity, abs=1e-12)


def test_sweep_phaseflip_duality():
    bf = analysis.monte_carlo_sweep([0.1, 0.3], 3000, BF, seed=4)
    pf = analysis.monte_carlo_sweep([0.1, 0.3], 3000, PF, seed=4)
    for a, b in zip(bf, pf):
        assert a.mean_fidelity == pytest.approx(b.mean_fidelity, abs=1e-12)


def test_sweep_is_order_independent():
    a = analysis.monte_carlo_sweep([0.1, 0.2, 0.3], 500, seed=5)
    b = analysis.monte_carlo_sweep([0.1, 0.2, 0.3], 500, seed=5)
    assert a == b


def test_correctable_mass_sampled():
    p, n = 0.25, 40_000
    rng = np.random.default_rng(6)
    from dqec.channels import IIDPauliModel, sample_error_patterns

    draws = sample_error_patterns(rng, IIDPauliModel.bit_flip(p), n)
    frac = sum(d.weight <= 1 for d in draws) / n
    pc = analysis.correctable_probability(p)
    assert abs(frac - pc) < 4 * math.sqrt(pc * (1 - pc) / n)


def test_depolarizing_channel_sweep_runs():
    (r,) = analysis.monte_carlo_sweep([0.1], 2000, seed=7, channel=ChannelConfig.from_dict({"model": "depolarizing"}))
    # Y flips are caught like X flips for a |0> spec; Z does nothing to |000>
    assert r.mean_fidelity > analysis.theoretical_fidelity(0.1)


def _records(ps, fids, se=0.001):
    return [SweepRecord(p, 100, f, se, analysis.theoretical_fidelity(p)) for p, f in zip(ps, fids)]


def test_threshold_on_theoretical_curve():
    ps = [round(0.05 * k, 2) for k in range(21)]
    recs = _records(ps, [analysis.theoretical_fidelity(p) for p in ps], se=0)
    assert analysis.threshold_check(recs) == pytest.approx(0.5)


def test_threshold_needs_both_sides():
    ps = [0.1, 0.2, 0.3, 0.45]
    with pytest.raises(InsufficientData):
        analysis.threshold_check(_records(ps, [analysis.theoretical_fidelity(p) for p in ps]))


def test_sweep_record_invariants():
    with pytest.raises(ValueError):
        SweepRecord(0.1, 10, 1.2, 0.0, 0.9)
    with pytest.raises(ValueError):
        SweepRecord(0.1, 10, 0.9, -0.1, 0.9)


def test_csv_round_trip(tmp_path):
    recs = analysis.monte_carlo_sweep([0.0, 0.3], 200, seed=8)
    path = tmp_path / "s.csv"
    analysis.write_sweep_csv(recs, path)
    text = path.read_text()
    assert text.splitlines()[0] == ",".join(analysis.CSV_COLUMNS)
    assert analysis.read_sweep_csv(path) == recs
