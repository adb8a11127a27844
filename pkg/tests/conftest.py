import pytest

from relayqkd.core import Basis
from relayqkd.nodes import Origin, Role, SlotRecord


def lossless_slot(t, bases, bits):
    """Private records of one lossless naive-relay timeslot.

    ``bases[k]``/``bits[k]`` are what node k measured (Alice: encoded).
    Relays resend exactly what they measured.
    """
    n = len(bases)
    recs = [SlotRecord(t, 0, Role.EMIT, bases[0], bits[0], Origin.SOURCE)]
    for k in range(1, n):
        recs.append(SlotRecord(t, k, Role.DETECT, bases[k], bits[k], detected=True))
        if k < n - 1:
            recs.append(SlotRecord(t, k, Role.EMIT, bases[k], bits[k], Origin.RECEIVED))
    return recs


def pattern(text):
    return [Basis[c] for c in text]


@pytest.fixture
def table_slots():
    """Slot 0: X-X-Y-Y with bits 1,1,0,0; slot 1: X-Y-Y-X with bits 1,0,0,1."""
    return lossless_slot(0, pattern("XXYY"), [1, 1, 0, 0]) + lossless_slot(1, pattern("XYYX"), [1, 0, 0, 1])
