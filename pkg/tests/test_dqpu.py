import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dqec import dqpu, qcore
from dqec.dqpu import (
    ConditionalGate,
    GateApplied,
    Network,
    NodeId,
    Transcript,
    check_causality,
    check_locality,
    create_network,
    transcript_stats,
)
from dqec.errors import (
    BadBudget,
    LinkBroken,
    LocalityViolation,
    OutOfQubits,
    SameNode,
    UnknownLabel,
    WrongRecipient,
)
from dqec.protocol import CODE_LABELS, LogicalQubitSpec, encode, run_roundtrip
from dqec.qcore import CNOT, TOFFOLI, MeasurementBasis, X, Z

Q1, Q2, Q3 = NodeId.QPU1, NodeId.QPU2, NodeId.QPU3
S2 = 1 / np.sqrt(2)


def test_default_budgets_give_seven_qubits():
    net = create_network((3, 2, 2))
    assert sum(net.free_qubits(n) for n in NodeId) == 7
    assert net.transcript == [] and net.live_qubits() == []


def test_zero_budget_blocks_allocation():
    net = create_network((0, 0, 0))
    with pytest.raises(OutOfQubits):
        net.prepare(Q1, "A")
    with pytest.raises(OutOfQubits):
        net.allocate_epr(Q1, Q2)


def test_bad_budget():
    with pytest.raises(BadBudget):
        create_network((3, -1, 2))


def test_budget_recycled_after_measurement():
    net = create_network((1, 1, 0), seed=0)
    net.allocate_epr(Q1, Q2, "A1", "B1")
    net.measure_and_send(Q1, "A1")
    net.measure_and_send(Q2, "B1")
    net.allocate_epr(Q1, Q2, "A1", "B1")
    assert net.free_qubits(Q1) == 0


def test_epr_same_node():
    with pytest.raises(SameNode):
        create_network().allocate_epr(Q1, Q1)


def test_two_links_form_product_of_bell_pairs():
    net = create_network()
    net.allocate_epr(Q1, Q2, "A1", "B1")
    net.allocate_epr(Q1, Q3, "A2", "C1")
    bell = np.array([1, 0, 0, 1]) * S2
    expected = qcore.PureState(("A1", "B1", "A2", "C1"), np.kron(bell, bell))
    assert qcore.overlap(qcore.reorder(net.state, expected.labels), expected) == pytest.approx(1)


def test_epr_halves_always_agree():
    rng = np.random.default_rng(0)
    base = create_network(rng=rng)
    base.allocate_epr(Q1, Q2, "A1", "B1")
    ones = 0
    for _ in range(10_000):
        net = base.fork(rng=rng)
        a = net.measure_and_send(Q1, "A1")
        b = net.measure_and_send(Q2, "B1")
        assert a == b
        ones += a
    assert 4500 < ones < 5500


def test_locality_enforced():
    net = create_network()
    net.prepare(Q1, "A")
    net.allocate_epr(Q1, Q2, "A1", "B1")
    net.allocate_epr(Q1, Q3, "A2", "C1")
    net.local_gate(Q1, CNOT, ["A", "A1"])
    with pytest.raises(LocalityViolation):
        net.local_gate(Q1, CNOT, ["A", "B1"])
    net.local_gate(Q1, TOFFOLI, ["A1", "A2", "A"])
    check_locality(net.transcript)


def test_check_locality_catches_forged_event():
    net = create_network()
    net.allocate_epr(Q1, Q2, "A1", "B1")
    forged = Transcript(net.transcript)
    forged.append(GateApplied("encode", "QPU1", "CNOT", ("A1", "B1")))
    with pytest.raises(LocalityViolation):
        check_locality(forged)


def test_measure_and_send_delivers_payload():
    net = create_network(seed=1)
    net.allocate_epr(Q1, Q2, "A1", "B1")
    out = net.measure_and_send(Q1, "A1", recipients=[Q2])
    net.deliver()
    msg = net.receive(Q2, Q1)
    assert msg.payload == out and out in (0, 1)
    assert msg.sender is Q1 and msg.recipient is Q2


def test_x_basis_payload_is_tag():
    net = create_network(seed=2)
    net.allocate_epr(Q1, Q2, "A1", "B1")
    out = net.measure_and_send(Q2, "B1", MeasurementBasis.X, recipients=[Q1])
    assert out in ("+", "-")


def test_measuring_removed_qubit():
    net = create_network(seed=3)
    net.prepare(Q1, "A")
    net.measure_and_send(Q1, "A")
    with pytest.raises(UnknownLabel):
        net.measure_and_send(Q1, "A")


def test_link_consumed_by_measurement():
    net = create_network(seed=4)
    link = net.allocate_epr(Q1, Q2, "A1", "B1")
    assert link.endpoint(Q2).name == "B1"
    net.measure_and_send(Q1, "A1")
    assert link.broken
    with pytest.raises(LinkBroken):
        link.endpoint(Q2)


def _send(net, payload_state, basis=MeasurementBasis.Z):
    net.prepare(Q1, "m", *payload_state)
    net.measure_and_send(Q1, "m", basis, recipients=[Q2])
    net.deliver()
    return net.receive(Q2, Q1)


def test_conditional_gate_fires_on_one():
    net = create_network()
    net.prepare(Q2, "B")
    msg = _send(net, (0, 1))
    assert net.receive_and_apply(Q2, msg, X, ["B"])
    assert np.allclose(net.state.amplitudes, [0, 1])


def test_conditional_gate_skipped_on_zero_is_logged():
    net = create_network()
    net.prepare(Q2, "B")
    msg = _send(net, (1, 0))
    assert not net.receive_and_apply(Q2, msg, X, ["B"])
    ev = net.transcript.of_type(ConditionalGate)[-1]
    assert ev.applied is False
    assert np.allclose(net.state.amplitudes, [1, 0])


def test_conditional_z_on_minus():
    net = create_network()
    net.prepare(Q2, "B", S2, S2)
    msg = _send(net, (S2, -S2), MeasurementBasis.X)
    assert msg.payload == "-"
    assert net.receive_and_apply(Q2, msg, Z, ["B"])
    assert np.allclose(net.state.amplitudes, [S2, -S2])


def test_wrong_recipient():
    net = create_network()
    net.prepare(Q3, "C")
    msg = _send(net, (0, 1))
    with pytest.raises(WrongRecipient):
        net.receive_and_apply(Q3, msg, X, ["C"])


def test_sequence_numbers_increase_per_sender():
    net = create_network(seed=5)
    net.allocate_epr(Q1, Q2, "A1", "B1")
    net.allocate_epr(Q1, Q3, "A2", "C1")
    net.measure_and_send(Q1, "A1", recipients=[Q2, Q3])
    net.measure_and_send(Q1, "A2", recipients=[Q3])
    net.deliver()
    seqs = [m.seq for m in net._inbox[Q3]]
    assert seqs == sorted(seqs) and len(set(seqs)) == len(seqs)


def test_encode_transcript_counts():
    net = Network(seed=6)
    encode(net, LogicalQubitSpec(0.6, 0.8))
    s = transcript_stats(net)["encode"]
    assert (s.epr_pairs, s.measurements, s.gates) == (2, 4, 10)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_protocol_transcripts_local_and_causal(seed):
    rng = np.random.default_rng(seed)
    r = run_roundtrip(LogicalQubitSpec.random(rng), "IXI", rng=rng)
    check_locality(r.network.transcript)
    check_causality(r.network.transcript)


def test_same_seed_same_transcript_bytes():
    spec = LogicalQubitSpec(0.6, 0.8j)
    a = run_roundtrip(spec, "XII", seed=11).network.transcript.to_jsonl()
    b = run_roundtrip(spec, "XII", seed=11).network.transcript.to_jsonl()
    assert a == b
    lines = a.splitlines()
    assert all(json.loads(line)["event"] for line in lines)


def test_jsonl_field_order_stable():
    text = run_roundtrip(LogicalQubitSpec(1, 0), "III", seed=0).network.transcript.to_jsonl()
    first = json.loads(text.splitlines()[1])
    assert list(first)[0] == "event"


def test_fork_is_independent():
    net = create_network(seed=7)
    net.prepare(Q1, "A", S2, S2)
    twin = net.fork()
    twin.local_gate(Q1, X, ["A"])
    twin.measure_and_send(Q1, "A")
    assert "A" in net.state.labels and "A" not in twin.state.labels
    assert len(net.transcript) < len(twin.transcript)


def test_node_handles_wrap_network():
    net = create_network(seed=8)
    qpu1 = net.node("QPU1")
    qpu1.prepare("A")
    qpu1.gate(X, "A")
    assert qpu1.qubits() == ["A"]
    assert np.allclose(net.state.amplitudes, [0, 1])
