"""Classical post-processing: announcements, link tokens, bridged key chains.

A *link token* is a timeslot in which two adjacent nodes hold the same bit
because the sender's encoding basis matched the receiver's measurement
basis. A *key chain* takes one token per link, possibly from different
timeslots. Each relay publishes the XOR of its two token bits, and Bob
undoes the XORs to recover Alice's bit. No announcement carries a bit.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, TextIO

from .core import Basis, RngStream
from .nodes import Origin, RecordBook, Role, SlotRecord


class InputError(ValueError):
    """Records and announcements do not describe the same run."""


class IntegrityError(RuntimeError):
    """A node was asked for a token bit it does not hold."""


class UndefinedRateError(ValueError):
    """An error rate was requested over zero bits."""


@dataclass(frozen=True, slots=True)
class Announcement:
    """Public basis announcement. Carries no bit value by construction."""

    node: int
    timeslot: int
    role: Role
    basis: Basis
    padded: bool = False


@dataclass(frozen=True, slots=True)
class LinkToken:
    link: int
    timeslot: int


@dataclass(frozen=True)
class KeyChain:
    tokens: tuple[LinkToken, ...]
    flips: tuple[int, ...] = ()

    @property
    def timeslots(self) -> tuple[int, ...]:
        return tuple(tok.timeslot for tok in self.tokens)


@dataclass
class SiftedKey:
    alice: list[int] = field(default_factory=list)
    bob: list[int] = field(default_factory=list)
    chains: list[KeyChain] = field(default_factory=list)

    def __post_init__(self):
        if len(self.alice) != len(self.bob):
            raise ValueError("Alice and Bob keys must have equal length")

    def __len__(self) -> int:
        return len(self.alice)


def announce(records: Iterable[SlotRecord]) -> list[Announcement]:
    """Publish the basis of every emission and every successful detection."""
    out = []
    for r in records:
        if r.role is Role.EMIT:
            out.append(Announcement(r.node, r.timeslot, Role.EMIT, r.basis, r.origin is Origin.PADDED))
        elif r.detected:
            out.append(Announcement(r.node, r.timeslot, Role.DETECT, r.basis))
    return out


def _slot_range(items) -> tuple[int, int] | None:
    slots = [x.timeslot for x in items]
    return (min(slots), max(slots)) if slots else None


def build_tokens(
    records: Sequence[SlotRecord], announcements: Sequence[Announcement], n_nodes: Optional[int] = None
) -> list[list[LinkToken]]:
    """Per-link token lists in timeslot order.

    ``(i, t)`` is a token iff node ``i`` announced an emission at ``t``, node
    ``i+1`` announced a detection at ``t``, and the two bases agree. Records
    are only used to check that both inputs describe the same slot range.
    """
    rec_range = _slot_range(records)
    ann_range = _slot_range(announcements)
    if ann_range is not None and (rec_range is None or ann_range[0] < rec_range[0] or ann_range[1] > rec_range[1]):
        raise InputError(f"announcements cover slots {ann_range}, records cover {rec_range}")
    if n_nodes is None:
        n_nodes = 1 + max((r.node for r in records), default=0)

    emitted: dict[tuple[int, int], Basis] = {}
    detected: dict[tuple[int, int], Basis] = {}
    for a in announcements:
        (emitted if a.role is Role.EMIT else detected)[(a.node, a.timeslot)] = a.basis

    links: list[list[LinkToken]] = [[] for _ in range(n_nodes - 1)]
    for (node, t), basis in detected.items():
        if node == 0:
            continue
        if emitted.get((node - 1, t)) == basis:
            links[node - 1].append(LinkToken(node - 1, t))
    for tokens in links:
        tokens.sort(key=lambda tok: tok.timeslot)
    return links


def schedule_chains(token_lists: Sequence[Sequence[LinkToken]]) -> list[KeyChain]:
    """Zip the per-link FIFO queues; yields min(len) chains.

    Each chain uses one token per link, so no schedule can beat the shortest
    queue, and zipping reaches that bound.
    """
    if not token_lists:
        return []
    return [KeyChain(tuple(toks)) for toks in zip(*token_lists)]


def _token_bits(book: RecordBook, tok: LinkToken) -> tuple[int, int]:
    """(sender bit, receiver bit) as privately held by each endpoint."""
    sent = book.emission(tok.link, tok.timeslot)
    got = book.detection(tok.link + 1, tok.timeslot)
    if sent is None or got is None or sent.bit is None or got.bit is None:
        raise IntegrityError(f"missing private record for token on link {tok.link} at slot {tok.timeslot}")
    return sent.bit, got.bit


def chain_announcements(chain: KeyChain, book: RecordBook) -> tuple[int, ...]:
    """XOR announcements from each relay on the chain.

    Relay ``k`` holds the bit it received on link ``k-1`` and the bit it sent
    on link ``k``; it publishes their XOR.
    """
    flips = []
    for k in range(1, len(chain.tokens)):
        _, received = _token_bits(book, chain.tokens[k - 1])
        sent, _ = _token_bits(book, chain.tokens[k])
        flips.append(received ^ sent)
    return tuple(flips)


def assemble_keys(
    chains: Sequence[KeyChain], flips: Sequence[Sequence[int]], book: RecordBook
) -> SiftedKey:
    key = SiftedKey()
    for chain, deltas in zip(chains, flips, strict=True):
        alice_bit, _ = _token_bits(book, chain.tokens[0])
        _, bob_bit = _token_bits(book, chain.tokens[-1])
        for d in deltas:
            bob_bit ^= d
        key.alice.append(alice_bit)
        key.bob.append(bob_bit)
        key.chains.append(KeyChain(chain.tokens, tuple(deltas)))
    return key


def bridge(records: Sequence[SlotRecord], n_nodes: Optional[int] = None) -> SiftedKey:
    """Full bridged post-processing of one run's records."""
    book = RecordBook(records, n_nodes)
    tokens = build_tokens(records, announce(records), book.n_nodes)
    chains = schedule_chains(tokens)
    return assemble_keys(chains, [chain_announcements(c, book) for c in chains], book)


def sift_naive(
    records: Sequence[SlotRecord],
    announcements: Sequence[Announcement],
    n_nodes: Optional[int] = None,
    book: Optional[RecordBook] = None,
) -> SiftedKey:
    """Keep only photons whose whole path used a single basis.

    This is plain end-to-end sifting without bridging: Bob's detection is
    traced back through the relays (following delay remappings) and kept
    only if every node on the way announced the same basis.
    """
    if book is None:
        book = RecordBook(records, n_nodes)
    last = book.n_nodes - 1
    emitted = {(a.node, a.timeslot): a.basis for a in announcements if a.role is Role.EMIT}
    detected = {(a.node, a.timeslot): a.basis for a in announcements if a.role is Role.DETECT}
    key = SiftedKey()
    for (node, t), bob_basis in sorted(detected.items()):
        if node != last:
            continue
        path = book.trace_path(t)
        if path is None:
            continue
        bases = [emitted.get((i, s)) for i, s in enumerate(path)]
        bases += [detected.get((i + 1, s)) for i, s in enumerate(path)]
        if None in bases or len(set(bases)) != 1:
            continue
        key.alice.append(book.emission(0, path[0]).bit)
        key.bob.append(book.detection(last, t).bit)
        key.chains.append(KeyChain(tuple(LinkToken(i, s) for i, s in enumerate(path))))
    return key


@dataclass(frozen=True)
class QberEstimate:
    rate: float
    sampled: tuple[int, ...]

    def remaining(self, key: Sequence[int]) -> list[int]:
        """Key bits not revealed by the sample."""
        used = set(self.sampled)
        return [b for i, b in enumerate(key) if i not in used]


def estimate_qber(
    alice_key: Sequence[int], bob_key: Sequence[int], sample_fraction: float, rng: RngStream
) -> QberEstimate:
    if len(alice_key) != len(bob_key):
        raise ValueError("keys must have equal length")
    if not 0.0 < sample_fraction <= 1.0:
        raise ValueError("sample_fraction must lie in (0, 1]")
    if not alice_key:
        raise UndefinedRateError("cannot estimate an error rate on empty keys")
    k = max(1, round(sample_fraction * len(alice_key)))
    idx = sorted(rng.sample(range(len(alice_key)), k))
    errors = sum(alice_key[i] != bob_key[i] for i in idx)
    return QberEstimate(errors / k, tuple(idx))


# Line format (tab separated, '#' starts a comment line):
#   R  run_id  timeslot  node  role  basis  origin  detected  withheld  bit  resend_of
#   A  run_id  timeslot  node  role  basis  padded
# Empty fields are written as '-'. With withheld=1 the bit column is '-'.

def _opt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, Basis):
        return value.name
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def dump_lines(
    out: TextIO,
    run_id: str,
    records: Iterable[SlotRecord] = (),
    announcements: Iterable[Announcement] = (),
    withhold_bits: bool = False,
) -> None:
    for r in records:
        bit = None if withhold_bits else r.bit
        fields = ["R", run_id, r.timeslot, r.node, r.role, r.basis, r.origin,
                  r.detected, withhold_bits, bit, r.resend_of]
        out.write("\t".join(_opt(f) for f in fields) + "\n")
    for a in announcements:
        fields = ["A", run_id, a.timeslot, a.node, a.role, a.basis, a.padded]
        out.write("\t".join(_opt(f) for f in fields) + "\n")


def dumps_lines(run_id: str, records=(), announcements=(), withhold_bits: bool = False) -> str:
    buf = io.StringIO()
    dump_lines(buf, run_id, records, announcements, withhold_bits)
    return buf.getvalue()


def load_lines(src: TextIO | str) -> dict[str, tuple[list[SlotRecord], list[Announcement]]]:
    """Parse the line format back into ``{run_id: (records, announcements)}``."""
    if isinstance(src, str):
        src = io.StringIO(src)

    def val(s, conv):
        return None if s == "-" else conv(s)

    runs: dict[str, tuple[list[SlotRecord], list[Announcement]]] = {}
    for lineno, line in enumerate(src, 1):
        line = line.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        try:
            kind, run_id = parts[0], parts[1]
            recs, anns = runs.setdefault(run_id, ([], []))
            if kind == "R" and len(parts) == 11:
                _, _, t, node, role, basis, origin, det, _withheld, bit, resend = parts
                recs.append(SlotRecord(
                    int(t), int(node), Role(role), val(basis, Basis.__getitem__), val(bit, int),
                    val(origin, Origin), det == "1", val(resend, int),
                ))
            elif kind == "A" and len(parts) == 7:
                _, _, t, node, role, basis, padded = parts
                anns.append(Announcement(int(node), int(t), Role(role), Basis[basis], padded == "1"))
            else:
                raise ValueError(f"unrecognised record kind or field count ({len(parts)})")
        except (KeyError, ValueError, IndexError) as exc:
            raise InputError(f"line {lineno}: {exc}") from exc
    return runs
