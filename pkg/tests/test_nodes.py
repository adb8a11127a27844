from collections import Counter

import pytest

from relayqkd.analytics import origin_fraction
from relayqkd.core import Basis, PhotonState, RngStream
from relayqkd.nodes import (
    Origin,
    ReceiverModel,
    RecordBook,
    Relay,
    RelayMode,
    Role,
    Topology,
    alice_emit,
    bob_measure,
    link_viable,
    relay_process,
    simulate,
)


def test_topology():
    topo = Topology(4)
    assert topo.hops == 3
    assert list(topo.relays) == [1, 2]
    assert [topo.label(k) for k in range(4)] == ["alice", "relay1", "relay2", "bob"]
    with pytest.raises(ValueError):
        Topology(1)


@pytest.mark.parametrize("text, expected", [
    ("naive", RelayMode.naive()),
    ("Padding", RelayMode.padding()),
    ("delay:16", RelayMode.delay(16)),
    ("delay", RelayMode.delay(1)),
])
def test_mode_parse(text, expected):
    assert RelayMode.parse(text) == expected
    assert RelayMode.parse(str(expected)) == expected


def test_mode_rejects_bad_input():
    with pytest.raises(ValueError):
        RelayMode.delay(0)
    with pytest.raises(ValueError):
        RelayMode.parse("padding:3")
    with pytest.raises(ValueError):
        RelayMode.parse("teleport")


def test_alice_emit_record():
    photon, rec = alice_emit(42, RngStream(1, "alice"))
    assert rec.timeslot == 42 and rec.node == 0 and rec.origin is Origin.SOURCE
    assert (rec.basis, rec.bit) == (photon.basis, photon.bit)


def test_alice_basis_balanced_and_reproducible():
    rng = RngStream(2, "alice")
    bases = [alice_emit(t, rng)[0].basis for t in range(10_000)]
    assert abs(bases.count(Basis.X) / 10_000 - 0.5) <= 0.02
    again = RngStream(2, "alice")
    assert bases == [alice_emit(t, again)[0].basis for t in range(10_000)]


def test_bob_absent():
    rec = bob_measure(None, 3, RngStream(0))
    assert rec.detected is False and rec.basis is None and rec.bit is None


def test_bob_matched_basis_reads_bit():
    rng = RngStream(3, "bob")
    for _ in range(50):
        rec = bob_measure(PhotonState(Basis.Y, 0), 0, rng)
        assert rec.detected
        if rec.basis is Basis.Y:
            assert rec.bit == 0


def test_bob_matched_rate():
    rng, src = RngStream(4, "bob"), RngStream(4, "src")
    matched = 0
    for t in range(10_000):
        p = PhotonState(src.basis(), src.bit())
        matched += bob_measure(p, t, rng).basis == p.basis
    assert abs(matched / 10_000 - 0.5) <= 0.02


def test_padding_fills_empty_slot():
    out, recs = relay_process(None, RelayMode.padding(), 0, RngStream(5, "relay1"))
    assert out is not None
    emit = [r for r in recs if r.role is Role.EMIT]
    assert len(emit) == 1 and emit[0].origin is Origin.PADDED
    assert (emit[0].basis, emit[0].bit) == (out.basis, out.bit)


def test_naive_empty_slot_sends_nothing():
    out, recs = relay_process(None, RelayMode.naive(), 0, RngStream(5, "relay1"))
    assert out is None
    assert [r.role for r in recs] == [Role.DETECT] and not recs[0].detected


@pytest.mark.parametrize("mode", [RelayMode.naive(), RelayMode.padding(), RelayMode.delay(1)])
def test_matched_basis_pass_through(mode):
    relay = Relay(1, mode, RngStream(6, "relay1"))
    seen = 0
    for t in range(200):
        out, recs = relay.process(PhotonState(Basis.X, 1), t)
        if recs[0].basis is Basis.X:
            seen += 1
            assert out == PhotonState(Basis.X, 1)
            assert recs[1].origin is Origin.RECEIVED
    assert seen > 0


def test_delay_needs_instance():
    with pytest.raises(ValueError):
        relay_process(None, RelayMode.delay(4), 0, RngStream(0))


def test_link_viable():
    assert link_viable(0.25, ReceiverModel(0.3)) is False
    assert link_viable(0.5, ReceiverModel(0.3)) is True
    assert link_viable(0.3, ReceiverModel(0.3)) is True
    with pytest.raises(ValueError):
        link_viable(1.2, ReceiverModel(0.3))
    with pytest.raises(ValueError):
        ReceiverModel(-0.1)


@pytest.fixture(scope="module")
def half_loss_runs():
    return {
        kind: simulate(3, 100_000, 0.5, mode, seed=21)
        for kind, mode in (("naive", RelayMode.naive()), ("padding", RelayMode.padding()))
    }


def _bob_rate(run):
    return sum(r.detected for r in run.records if r.node == run.n_nodes - 1) / run.slots


def test_naive_vs_padding_bob_rate(half_loss_runs):
    assert abs(_bob_rate(half_loss_runs["naive"]) - 0.25) <= 0.01
    assert abs(_bob_rate(half_loss_runs["padding"]) - 0.5) <= 0.01


def test_padding_relays_emit_every_slot(half_loss_runs):
    run = half_loss_runs["padding"]
    emits = Counter(r.timeslot for r in run.records if r.role is Role.EMIT and r.node == 1)
    assert len(emits) == run.slots and set(emits.values()) == {1}


def test_padded_origin_only_at_padding_relays(half_loss_runs):
    for kind, run in half_loss_runs.items():
        padded = [r for r in run.records if r.origin is Origin.PADDED]
        assert all(0 < r.node < run.n_nodes - 1 for r in padded)
        assert (len(padded) > 0) == (kind == "padding")


def test_naive_emissions_equal_detections(half_loss_runs):
    run = half_loss_runs["naive"]
    det = sum(r.detected for r in run.records if r.node == 1 and r.role is Role.DETECT)
    emit = sum(1 for r in run.records if r.node == 1 and r.role is Role.EMIT)
    assert det == emit


def test_padding_origin_fraction_tracks_transmittance_power(half_loss_runs):
    run = half_loss_runs["padding"]
    book = RecordBook(run.records, run.n_nodes)
    traced = sum(book.trace_path(t) is not None for t in range(run.slots))
    assert abs(traced / run.slots - origin_fraction(0.5, 2)) <= 0.01


@pytest.mark.parametrize("batch", [1, 4, 13])
def test_delay_buffer_invariants(batch):
    run = simulate(4, 3000, 0.6, RelayMode.delay(batch), seed=batch)
    assert run.total_slots >= run.slots
    for k in (1, 2):
        detected = {r.timeslot: (r.basis, r.bit) for r in run.records
                    if r.node == k and r.role is Role.DETECT and r.detected}
        emitted = [r for r in run.records if r.node == k and r.role is Role.EMIT]
        assert Counter((r.basis, r.bit) for r in emitted) == Counter(detected.values())
        originals = [r.resend_of for r in emitted]
        assert sorted(originals) == sorted(detected)  # bijection onto detected slots
        assert originals == sorted(originals)  # FIFO
        assert all(r.resend_of <= r.timeslot for r in emitted)
        assert all(detected[r.resend_of] == (r.basis, r.bit) for r in emitted)


def test_delay_bursts_are_contiguous_and_batched():
    batch = 6
    run = simulate(3, 2000, 0.5, RelayMode.delay(batch), seed=3)
    slots = [r.timeslot for r in run.records if r.node == 1 and r.role is Role.EMIT]
    bursts, cur = [], [slots[0]]
    for t in slots[1:]:
        if t == cur[-1] + 1:
            cur.append(t)
        else:
            bursts.append(cur)
            cur = [t]
    bursts.append(cur)
    # only the final flush may be shorter than a batch
    assert all(len(b) >= batch for b in bursts[:-1])


def test_delay_one_matches_naive_emissions():
    naive = simulate(4, 500, 0.7, RelayMode.naive(), seed=8)
    delay = simulate(4, 500, 0.7, RelayMode.delay(1), seed=8)
    strip = lambda run: [(r.timeslot, r.node, r.role, r.basis, r.bit, r.detected) for r in run.records]
    assert strip(naive) == strip(delay)


def test_simulate_validates_inputs():
    with pytest.raises(ValueError):
        simulate(3, 10, [0.5])
    with pytest.raises(ValueError):
        simulate(3, -1)


def test_adding_a_relay_keeps_alice_draws():
    short = simulate(3, 300, 1.0, seed=4)
    long = simulate(5, 300, 1.0, seed=4)
    alice = lambda run: [(r.basis, r.bit) for r in run.records if r.node == 0]
    relay1 = lambda run: [(r.basis, r.bit) for r in run.records if r.node == 1]
    assert alice(short) == alice(long)
    assert relay1(short) == relay1(long)
