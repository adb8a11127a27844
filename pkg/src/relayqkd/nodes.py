"""Node behaviour per timeslot and the slot-by-slot chain simulator.

Alice (node 0) emits, relays 1..n-2 intercept and resend, Bob (node n-1)
detects. Every node writes private :class:`SlotRecord` entries; the
post-processing stage only ever sees their basis announcements.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .channel import ChannelParams, EavesdropperConfig, transmit
from .core import Basis, PhotonState, RngStream, encode, measure, random_photon


class Origin(str, Enum):
    SOURCE = "source"
    RECEIVED = "received"
    PADDED = "padded"


class Role(str, Enum):
    EMIT = "emit"
    DETECT = "detect"


class ModeKind(str, Enum):
    NAIVE = "naive"
    PADDING = "padding"
    DELAY = "delay"


@dataclass(frozen=True)
class RelayMode:
    kind: ModeKind = ModeKind.NAIVE
    batch_size: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", ModeKind(self.kind))
        if self.batch_size < 1:
            raise ValueError("delay batch_size must be >= 1")

    @classmethod
    def naive(cls) -> "RelayMode":
        return cls(ModeKind.NAIVE)

    @classmethod
    def padding(cls) -> "RelayMode":
        return cls(ModeKind.PADDING)

    @classmethod
    def delay(cls, batch_size: int) -> "RelayMode":
        return cls(ModeKind.DELAY, batch_size)

    @classmethod
    def parse(cls, text: str) -> "RelayMode":
        """Parse ``naive``, ``padding`` or ``delay:<batch>``."""
        name, _, arg = text.strip().lower().partition(":")
        kind = ModeKind(name)
        if kind is ModeKind.DELAY:
            return cls(kind, int(arg) if arg else 1)
        if arg:
            raise ValueError(f"mode {name!r} takes no argument")
        return cls(kind)

    def __str__(self) -> str:
        if self.kind is ModeKind.DELAY:
            return f"delay:{self.batch_size}"
        return self.kind.value


@dataclass(frozen=True)
class Topology:
    n_nodes: int

    def __post_init__(self):
        if self.n_nodes < 2:
            raise ValueError("a chain needs at least 2 nodes")

    @property
    def hops(self) -> int:
        return self.n_nodes - 1

    @property
    def relays(self) -> range:
        return range(1, self.n_nodes - 1)

    def label(self, node: int) -> str:
        if node == 0:
            return "alice"
        if node == self.n_nodes - 1:
            return "bob"
        return f"relay{node}"


@dataclass(slots=True)
class SlotRecord:
    """A node's private view of one timeslot, from one side (emit or detect).

    Relays write a DETECT record every slot and an EMIT record in every slot
    in which they send something. ``basis``/``bit`` are ``None`` for a
    detector that saw nothing.
    """

    timeslot: int
    node: int
    role: Role
    basis: Optional[Basis]
    bit: Optional[int]
    origin: Optional[Origin] = None
    detected: bool = False
    resend_of: Optional[int] = None


@dataclass(frozen=True)
class ReceiverModel:
    """Minimum per-window detection rate for a hop to be usable (stands in for SNR)."""

    min_rate_threshold: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.min_rate_threshold <= 1.0:
            raise ValueError("min_rate_threshold must lie in [0, 1]")


def link_viable(detection_rate: float, model: ReceiverModel) -> bool:
    if not 0.0 <= detection_rate <= 1.0:
        raise ValueError(f"detection rate {detection_rate} outside [0, 1]")
    return detection_rate >= model.min_rate_threshold


def alice_emit(timeslot: int, rng: RngStream) -> tuple[PhotonState, SlotRecord]:
    photon = random_photon(rng)
    return photon, SlotRecord(timeslot, 0, Role.EMIT, photon.basis, photon.bit, Origin.SOURCE)


def bob_measure(
    incoming: Optional[PhotonState], timeslot: int, rng: RngStream, node: int = 1
) -> SlotRecord:
    if incoming is None:
        return SlotRecord(timeslot, node, Role.DETECT, None, None, detected=False)
    basis = rng.basis()
    return SlotRecord(timeslot, node, Role.DETECT, basis, measure(incoming, basis, rng), detected=True)


class Relay:
    """Intercept/resend relay.

    Every detected photon is measured in a fresh random basis. What happens
    next depends on the mode:

    * naive   - resend the measured state in the same slot; idle otherwise
    * padding - as naive, but an empty slot is filled with a random photon
    * delay   - queue measurements; once ``batch_size`` are queued, resend
                them one per slot until the queue is empty
    """

    def __init__(self, node: int, mode: RelayMode, rng: RngStream):
        self.node = node
        self.mode = mode
        self.rng = rng
        self._pad_rng = rng.child("pad")
        self.buffer: deque[tuple[int, Basis, int]] = deque()
        self.bursting = False
        self.flushing = False

    def process(
        self, incoming: Optional[PhotonState], timeslot: int
    ) -> tuple[Optional[PhotonState], list[SlotRecord]]:
        detect = bob_measure(incoming, timeslot, self.rng, self.node)
        records = [detect]
        kind = self.mode.kind
        out: Optional[PhotonState] = None

        if kind is ModeKind.DELAY:
            if detect.detected:
                self.buffer.append((timeslot, detect.basis, detect.bit))
            if not self.bursting and self.buffer and (
                self.flushing or len(self.buffer) >= self.mode.batch_size
            ):
                self.bursting = True
            if self.bursting:
                original, basis, bit = self.buffer.popleft()
                out = encode(bit, basis)
                records.append(
                    SlotRecord(timeslot, self.node, Role.EMIT, basis, bit, Origin.RECEIVED, resend_of=original)
                )
                if not self.buffer:
                    self.bursting = False
        elif detect.detected:
            out = encode(detect.bit, detect.basis)
            records.append(SlotRecord(timeslot, self.node, Role.EMIT, detect.basis, detect.bit, Origin.RECEIVED))
        elif kind is ModeKind.PADDING:
            out = random_photon(self._pad_rng)
            records.append(SlotRecord(timeslot, self.node, Role.EMIT, out.basis, out.bit, Origin.PADDED))
        return out, records

    @property
    def idle(self) -> bool:
        return not self.buffer


def relay_process(
    incoming: Optional[PhotonState], mode: RelayMode, timeslot: int, rng: RngStream, node: int = 1
) -> tuple[Optional[PhotonState], list[SlotRecord]]:
    """One-shot relay step for the stateless modes (naive, padding)."""
    if mode.kind is ModeKind.DELAY:
        raise ValueError("delay mode keeps a queue; use a Relay instance")
    return Relay(node, mode, rng).process(incoming, timeslot)


def _hop_params(transmittance: float | Sequence[float], hops: int) -> list[ChannelParams]:
    if isinstance(transmittance, (int, float)):
        return [ChannelParams(float(transmittance))] * hops
    values = list(transmittance)
    if len(values) != hops:
        raise ValueError(f"transmittance list has {len(values)} entries, expected {hops} (one per hop)")
    return [ChannelParams(float(v)) for v in values]


@dataclass
class SimulationRun:
    n_nodes: int
    slots: int
    mode: RelayMode
    transmittance: tuple[float, ...]
    eve: Optional[EavesdropperConfig]
    seed: int
    records: list[SlotRecord] = field(repr=False)
    total_slots: int = 0

    @property
    def topology(self) -> Topology:
        return Topology(self.n_nodes)


def simulate(
    n_nodes: int,
    slots: int,
    transmittance: float | Sequence[float] = 1.0,
    mode: RelayMode = RelayMode(),
    eve: Optional[EavesdropperConfig] = None,
    seed: int = 0,
) -> SimulationRun:
    """Run ``slots`` source timeslots through the chain.

    Alice emits only in slots ``0..slots-1``. With delay relays the run keeps
    ticking (Alice silent) until every relay queue has drained, so
    ``total_slots`` may exceed ``slots``.
    """
    topo = Topology(n_nodes)
    if slots < 0:
        raise ValueError("slots must be non-negative")
    hops = _hop_params(transmittance, topo.hops)
    if eve is not None:
        eve.validate_for(n_nodes)

    root = RngStream(seed)
    alice_rng = root.child("alice")
    bob_rng = root.child("bob")
    relays = [Relay(k, mode, root.child(topo.label(k))) for k in topo.relays]
    loss_rngs = [root.child(f"hop->{topo.label(i + 1)}/loss") for i in range(topo.hops)]
    eve_rng = root.child("eve")

    records: list[SlotRecord] = []
    t = 0
    while t < slots or any(not r.idle for r in relays):
        if t >= slots:
            for r in relays:
                r.flushing = True
            photon = None
        else:
            photon, rec = alice_emit(t, alice_rng)
            records.append(rec)
        for i in range(topo.hops):
            link_eve = eve if eve is not None and eve.link_index == i else None
            photon = transmit(photon, hops[i], link_eve, loss_rngs[i], eve_rng)
            if i < topo.hops - 1:
                photon, recs = relays[i].process(photon, t)
                records.extend(recs)
        records.append(bob_measure(photon, t, bob_rng, n_nodes - 1))
        t += 1

    return SimulationRun(
        n_nodes=n_nodes,
        slots=slots,
        mode=mode,
        transmittance=tuple(h.transmittance for h in hops),
        eve=eve,
        seed=seed,
        records=records,
        total_slots=t,
    )


class RecordBook:
    """Index of private records by (node, timeslot) for emit and detect sides."""

    def __init__(self, records: Sequence[SlotRecord], n_nodes: Optional[int] = None):
        self.emits: dict[tuple[int, int], SlotRecord] = {}
        self.detects: dict[tuple[int, int], SlotRecord] = {}
        emits, detects = self.emits, self.detects
        for r in records:
            if r.role is Role.EMIT:
                emits[(r.node, r.timeslot)] = r
            else:
                detects[(r.node, r.timeslot)] = r
        if n_nodes is None:
            n_nodes = 1 + max((r.node for r in records), default=0)
        self.n_nodes = n_nodes

    def emission(self, node: int, t: int) -> Optional[SlotRecord]:
        return self.emits.get((node, t))

    def detection(self, node: int, t: int) -> Optional[SlotRecord]:
        r = self.detects.get((node, t))
        return r if r is not None and r.detected else None

    def trace_path(self, t: int) -> Optional[list[int]]:
        """Follow Bob's detection in slot ``t`` back to Alice.

        Returns the timeslot used on each link (index = link), or ``None``
        when Bob saw nothing or the photon was padded somewhere upstream.
        """
        last = self.n_nodes - 1
        if self.detection(last, t) is None:
            return None
        path = [t]
        cur = t
        for node in range(last - 1, 0, -1):
            emit = self.emission(node, cur)
            if emit is None or emit.origin is not Origin.RECEIVED:
                return None
            cur = emit.resend_of if emit.resend_of is not None else cur
            if self.detection(node, cur) is None:
                return None
            path.append(cur)
        if self.emission(0, cur) is None:
            return None
        path.reverse()
        return path
