import itertools
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from relayqkd.core import Basis, PhotonState, RngStream, derive_seed, encode, measure, random_photon

ALL_STATES = [PhotonState(b, v) for b in Basis for v in (0, 1)]


def test_basis_has_two_values_and_complements():
    assert len(Basis) == 2
    assert Basis.X.complement() is Basis.Y
    assert Basis.Y.complement() is Basis.X


def test_bit_xor_closure():
    for a, b in itertools.product((0, 1), repeat=2):
        assert a ^ b in (0, 1)
        assert a ^ a == 0


def test_photon_rejects_non_bits():
    with pytest.raises(ValueError):
        PhotonState(Basis.X, 2)


def test_encode_is_constructor():
    assert encode(1, Basis.X) == PhotonState(Basis.X, 1)
    assert encode(0, Basis.Y) == PhotonState(Basis.Y, 0)


@pytest.mark.parametrize("state", ALL_STATES)
def test_same_basis_measurement_is_identity(state):
    rng = RngStream(1, "m")
    before = rng.getstate()
    assert measure(encode(state.bit, state.basis), state.basis, rng) == state.bit
    assert rng.getstate() == before  # a matched basis draws nothing


@pytest.mark.parametrize("state, basis", [(PhotonState(Basis.Y, 1), Basis.X), (PhotonState(Basis.X, 0), Basis.Y)])
def test_cross_basis_measurement_is_fair(state, basis):
    rng = RngStream(2, "cross")
    ones = sum(measure(state, basis, rng) for _ in range(10_000))
    assert abs(ones / 10_000 - 0.5) <= 0.02


def test_random_photon_uniform_over_four_states():
    rng = RngStream(3, "pad")
    counts = Counter(random_photon(rng) for _ in range(10_000))
    assert set(counts) == set(ALL_STATES)
    for c in counts.values():
        assert abs(c / 10_000 - 0.25) <= 0.02


def test_random_photon_basis_and_bit_independent():
    rng = RngStream(4, "pad")
    draws = [random_photon(rng) for _ in range(10_000)]
    p_y = sum(d.basis is Basis.Y for d in draws) / len(draws)
    p_1 = sum(d.bit for d in draws) / len(draws)
    for b, v in itertools.product(Basis, (0, 1)):
        joint = sum(d.basis is b and d.bit == v for d in draws) / len(draws)
        marg = (p_y if b is Basis.Y else 1 - p_y) * (p_1 if v else 1 - p_1)
        assert abs(joint - marg) <= 0.02


def test_random_photon_deterministic_given_state():
    a, b = RngStream(5, "x"), RngStream(5, "x")
    assert [random_photon(a) for _ in range(50)] == [random_photon(b) for _ in range(50)]


def test_streams_differ_by_label():
    a, b = RngStream(5, "alice"), RngStream(5, "bob")
    assert [a.bit() for _ in range(64)] != [b.bit() for _ in range(64)]


def test_child_label_composition():
    assert RngStream(9).child("relay1").label == "relay1"
    assert RngStream(9, "root").child("pad").label == "root/pad"


@given(st.integers(min_value=0, max_value=2**64 - 1), st.text(max_size=20))
def test_same_seed_and_label_reproduce(seed, label):
    a, b = RngStream(seed, label), RngStream(seed, label)
    assert [a.random() for _ in range(5)] == [b.random() for _ in range(5)]


def test_derive_seed_is_64_bit_and_stable():
    s = derive_seed(7, "n=3")
    assert 0 <= s < 2**64
    assert s == derive_seed(7, "n=3")
    assert s != derive_seed(7, "n=4")
