"""Closed forms, basis-pattern enumeration, and per-run summary statistics."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Optional, Sequence

from .core import Basis, PhotonState, RngStream
from .nodes import ModeKind, ReceiverModel, RecordBook, Role, SimulationRun, link_viable
from .sifting import announce, assemble_keys, build_tokens, chain_announcements, estimate_qber, schedule_chains, sift_naive

MAX_ENUMERATION_NODES = 12


def _check_n(n: int, upper: Optional[int] = None) -> None:
    if n < 2 or (upper is not None and n > upper):
        bound = f"[2, {upper}]" if upper else ">= 2"
        raise ValueError(f"node count must be {bound}, got {n}")


def useful_fraction(n: int) -> Fraction:
    """Fraction of timeslots giving a key to at least one adjacent node pair."""
    _check_n(n)
    return 1 - Fraction(1, 2 ** (n - 1))


def naive_end_to_end_fraction(n: int) -> Fraction:
    """Fraction of timeslots in which every node used the same basis."""
    _check_n(n)
    return Fraction(1, 2 ** (n - 1))


def origin_fraction(transmittance: float, hops: int) -> float:
    """Share of slots in which Bob detects a photon that really came from Alice."""
    if not 0.0 <= transmittance <= 1.0:
        raise ValueError("transmittance must lie in [0, 1]")
    if hops < 1:
        raise ValueError("hops must be >= 1")
    return transmittance ** hops


@dataclass(frozen=True)
class PatternOutcome:
    pattern: tuple[Basis, ...]
    # maximal (first, last) node ranges that share one basis, length >= 2
    opportunities: tuple[tuple[int, int], ...]

    @property
    def useful(self) -> bool:
        return bool(self.opportunities)

    @property
    def end_to_end(self) -> bool:
        return self.opportunities == ((0, len(self.pattern) - 1),)

    @property
    def label(self) -> str:
        return "".join(b.name for b in self.pattern)


@dataclass(frozen=True)
class PatternEnumeration:
    n: int
    outcomes: tuple[PatternOutcome, ...]
    useful_fraction: Fraction
    end_to_end_fraction: Fraction
    link_match_fraction: Fraction  # per-link matched-basis share, drives the bridged rate
    no_key_patterns: tuple[tuple[Basis, ...], ...]


def classify(pattern: Sequence[Basis]) -> PatternOutcome:
    runs = []
    start = 0
    for k in range(1, len(pattern) + 1):
        if k == len(pattern) or pattern[k] != pattern[start]:
            if k - 1 > start:
                runs.append((start, k - 1))
            start = k
    return PatternOutcome(tuple(pattern), tuple(runs))


def enumerate_patterns(n: int) -> PatternEnumeration:
    """Classify all 2**n equiprobable basis choices along an n-node chain."""
    _check_n(n, MAX_ENUMERATION_NODES)
    outcomes = tuple(classify(p) for p in itertools.product(Basis, repeat=n))
    total = len(outcomes)
    matches = sum(p[i] == p[i + 1] for o in outcomes for p in [o.pattern] for i in range(n - 1))
    return PatternEnumeration(
        n=n,
        outcomes=outcomes,
        useful_fraction=Fraction(sum(o.useful for o in outcomes), total),
        end_to_end_fraction=Fraction(sum(o.end_to_end for o in outcomes), total),
        link_match_fraction=Fraction(matches, total * (n - 1)),
        no_key_patterns=tuple(o.pattern for o in outcomes if not o.useful),
    )


@dataclass
class RunSummary:
    """Aggregate statistics of one run. Fractions are ``None`` when undefined."""

    n_nodes: int
    mode: str
    transmittance: tuple[float, ...]
    eve_link: Optional[int]
    seed: int
    slots: int
    total_slots: int
    link_detections: list[int] = field(default_factory=list)
    link_windows: list[int] = field(default_factory=list)
    link_detection_rates: list[Optional[float]] = field(default_factory=list)
    link_tokens: list[int] = field(default_factory=list)
    link_viable: list[Optional[bool]] = field(default_factory=list)
    naive_key_bits: int = 0
    naive_fraction: Optional[float] = None
    chains: int = 0
    bridged_fraction: Optional[float] = None
    bob_detection_rate: Optional[float] = None
    source_detections: int = 0
    origin_fraction: Optional[float] = None
    qber: Optional[float] = None
    naive_qber: Optional[float] = None
    key_mismatches: int = 0
    closed_form_useful_fraction: Optional[Fraction] = None
    closed_form_end_to_end_fraction: Optional[Fraction] = None
    closed_form_origin_fraction: Optional[float] = None

    def to_text(self) -> str:
        """Flat ``key = value`` document with a fixed field order."""
        lines = []
        for f in fields(self):
            lines.append(f"{f.name} = {_fmt(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".10g")
    if isinstance(value, (list, tuple)):
        return ",".join(_fmt(v) for v in value) if value else "-"
    return str(value)


def parse_summary_text(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        if line.strip():
            key, _, value = line.partition(" = ")
            out[key] = value
    return out


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den else None


def summarize(
    run: SimulationRun,
    receiver: ReceiverModel = ReceiverModel(),
    qber_sample: float = 1.0,
) -> RunSummary:
    """Post-process a finished run and collect every reported statistic.

    Link detection rates are per active window: all timeslots of the run,
    except downstream of a delay relay, where the window is the slots in
    which that relay was actually sending.
    """
    n = run.n_nodes
    records = run.records
    book = RecordBook(records, n)
    anns = announce(records)

    detections = [0] * (n - 1)
    emissions = [0] * n
    for r in records:
        if r.role is Role.DETECT and r.detected:
            detections[r.node - 1] += 1
        elif r.role is Role.EMIT:
            emissions[r.node] += 1
    windows = []
    for i in range(n - 1):
        relay_upstream = 0 < i and run.mode.kind is ModeKind.DELAY
        windows.append(emissions[i] if relay_upstream else run.total_slots)
    rates = [_ratio(d, w) for d, w in zip(detections, windows)]

    tokens = build_tokens(records, anns, n)
    chains = schedule_chains(tokens)
    key = assemble_keys(chains, [chain_announcements(c, book) for c in chains], book)
    naive = sift_naive(records, anns, n, book)
    source_hits = sum(1 for t in range(run.total_slots) if book.trace_path(t) is not None)

    qrng = RngStream(run.seed, "qber")
    qber = estimate_qber(key.alice, key.bob, qber_sample, qrng).rate if len(key) else None
    naive_qber = estimate_qber(naive.alice, naive.bob, qber_sample, qrng).rate if len(naive) else None

    summary = RunSummary(
        n_nodes=n,
        mode=str(run.mode),
        transmittance=run.transmittance,
        eve_link=run.eve.link_index if run.eve is not None else None,
        seed=run.seed,
        slots=run.slots,
        total_slots=run.total_slots,
        link_detections=detections,
        link_windows=windows,
        link_detection_rates=rates,
        link_tokens=[len(t) for t in tokens],
        link_viable=[None if r is None else link_viable(r, receiver) for r in rates],
        naive_key_bits=len(naive),
        naive_fraction=_ratio(len(naive), run.slots),
        chains=len(chains),
        bridged_fraction=_ratio(len(chains), run.slots),
        bob_detection_rate=rates[-1],
        source_detections=source_hits,
        origin_fraction=_ratio(source_hits, run.slots),
        qber=qber,
        naive_qber=naive_qber,
        key_mismatches=sum(a != b for a, b in zip(key.alice, key.bob)),
        closed_form_useful_fraction=useful_fraction(n),
        closed_form_end_to_end_fraction=naive_end_to_end_fraction(n),
        closed_form_origin_fraction=math.prod(run.transmittance),
    )
    return summary


def intercept_resend_distribution(state: PhotonState) -> dict[PhotonState, Fraction]:
    """Exact distribution of the photon an intercept/resend attacker forwards.

    Enumerates attacker basis x measurement outcome with exact weights.
    """
    dist: dict[PhotonState, Fraction] = {}
    for eve_basis in Basis:
        for outcome in (0, 1):
            if eve_basis == state.basis:
                p = Fraction(1, 2) if outcome == state.bit else Fraction(0)
            else:
                p = Fraction(1, 4)
            if p:
                key = PhotonState(eve_basis, outcome)
                dist[key] = dist.get(key, Fraction(0)) + p
    return dist


def intercept_resend_error_rate() -> Fraction:
    """Exact bit error on a basis-matched hop carrying an intercept/resend attacker.

    Sums over the sender bit, attacker basis, attacker outcome and receiver
    outcome, conditioned on sender and receiver sharing a basis (the sender
    basis is fixed by symmetry).
    """
    err = Fraction(0)
    total = Fraction(0)
    for bit in (0, 1):
        sent = PhotonState(Basis.X, bit)
        for fwd, p in intercept_resend_distribution(sent).items():
            for got in (0, 1):
                if fwd.basis == sent.basis:
                    q = Fraction(1) if got == fwd.bit else Fraction(0)
                else:
                    q = Fraction(1, 2)
                w = Fraction(1, 2) * p * q
                total += w
                if got != bit:
                    err += w
    return err / total
