"""Executable acceptance checks, shared by ``relayqkd check`` and the test suite.

Every check returns a :class:`CriterionResult`; tolerances are fixed here.
"""
from __future__ import annotations

import tempfile
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Callable, Sequence

from scipy.stats import chisquare

from .analytics import enumerate_patterns, intercept_resend_error_rate, summarize, useful_fraction
from .channel import EavesdropperConfig
from .core import Basis, RngStream
from .harness import parse_config, run
from .nodes import ReceiverModel, RecordBook, RelayMode, simulate
from .sifting import (
    Announcement,
    LinkToken,
    announce,
    assemble_keys,
    build_tokens,
    chain_announcements,
    dumps_lines,
    schedule_chains,
)

X, Y = Basis.X, Basis.Y

# Three-node chain: basis pattern -> node ranges that can share a key.
THREE_NODE_KEYS = {
    (X, X, X): ((0, 2),),
    (Y, Y, Y): ((0, 2),),
    (X, X, Y): ((0, 1),),
    (Y, Y, X): ((0, 1),),
    (X, Y, Y): ((1, 2),),
    (Y, X, X): ((1, 2),),
    (X, Y, X): (),
    (Y, X, Y): (),
}

MC_SLOTS = 100_000


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d}. {self.title}: {self.detail}"


def _within(value, target, tol) -> bool:
    return value is not None and abs(value - target) <= tol


def check_useful_fraction() -> CriterionResult:
    bad = [n for n in range(2, 13) if enumerate_patterns(n).useful_fraction != useful_fraction(n)]
    e3 = enumerate_patterns(3)
    table = {o.pattern: o.opportunities for o in e3.outcomes}
    table_ok = table == THREE_NODE_KEYS and set(e3.no_key_patterns) == {(X, Y, X), (Y, X, Y)}
    return CriterionResult(
        1, "useful fraction 1 - 1/2^(n-1) equals enumeration, n=2..12",
        not bad and table_ok,
        f"mismatched n={bad or 'none'}; 3-node table {'matches' if table_ok else 'DIFFERS'}",
    )


def check_naive_fraction() -> CriterionResult:
    got = {n: summarize(simulate(n, MC_SLOTS, 1.0, RelayMode.naive(), seed=11)).naive_fraction for n in (2, 3)}
    ok = _within(got[3], 0.25, 0.01) and _within(got[2], 0.5, 0.01)
    return CriterionResult(2, "naive end-to-end fraction (tol 0.01)", ok, f"n=3: {got[3]:.4f} (0.25), n=2: {got[2]:.4f} (0.5)")


def check_bridged_half() -> CriterionResult:
    got = {n: summarize(simulate(n, MC_SLOTS, 1.0, RelayMode.naive(), seed=12)).bridged_fraction for n in (3, 4, 5, 6)}
    ok = all(_within(v, 0.5, 0.01) for v in got.values())
    return CriterionResult(
        3, "bridged chain fraction is 1/2 for n=3..6 (tol 0.01)", ok,
        ", ".join(f"n={n}: {v:.4f}" for n, v in got.items()),
    )


AGREEMENT_SLOTS = 2000


def check_key_agreement() -> CriterionResult:
    runs = chains = mismatches = 0
    for n in range(2, 7):
        for xi in (1.0, 0.7, 0.4):
            for mode in (RelayMode.naive(), RelayMode.padding(), RelayMode.delay(8)):
                for seed in range(5):
                    s = summarize(simulate(n, AGREEMENT_SLOTS, xi, mode, seed=seed))
                    runs += 1
                    chains += s.chains
                    mismatches += s.key_mismatches
    return CriterionResult(
        4, "Alice/Bob key agreement without Eve (zero mismatches)", mismatches == 0 and chains > 0,
        f"{runs} runs, {chains} chains, {mismatches} mismatches",
    )


def check_distance_extension() -> CriterionResult:
    model = ReceiverModel(0.3)
    naive = summarize(simulate(3, MC_SLOTS, 0.5, RelayMode.naive(), seed=13), model)
    padded = summarize(simulate(3, MC_SLOTS, 0.5, RelayMode.padding(), seed=13), model)
    ok = (
        _within(naive.bob_detection_rate, 0.25, 0.02) and naive.link_viable[-1] is False
        and _within(padded.bob_detection_rate, 0.5, 0.02) and padded.link_viable[-1] is True
    )
    return CriterionResult(
        5, "padding makes the second hop viable at xi=0.5, threshold 0.3 (tol 0.02)", ok,
        f"naive {naive.bob_detection_rate:.4f} viable={naive.link_viable[-1]}, "
        f"padding {padded.bob_detection_rate:.4f} viable={padded.link_viable[-1]}",
    )


def check_origin_scaling() -> CriterionResult:
    parts, ok = [], True
    for xi in (0.9, 0.7, 0.5):
        for hops in (1, 2, 3):
            s = summarize(simulate(hops + 1, MC_SLOTS, xi, RelayMode.padding(), seed=14))
            ok &= _within(s.origin_fraction, xi ** hops, 0.01)
            parts.append(f"{xi}^{hops}: {s.origin_fraction:.4f}/{xi ** hops:.4f}")
    return CriterionResult(6, "source-origin fraction equals xi^m (tol 0.01)", ok, "; ".join(parts))


EVE_SLOTS = 20_000


def check_eavesdropper() -> CriterionResult:
    expected = float(intercept_resend_error_rate())
    clean = summarize(simulate(4, EVE_SLOTS, 1.0, RelayMode.naive(), seed=15))
    rates = []
    for link in range(3):
        s = summarize(simulate(4, EVE_SLOTS, 1.0, RelayMode.naive(), EavesdropperConfig(link), seed=15))
        rates.append(s.qber)
    ok = clean.qber == 0.0 and all(_within(r, expected, 0.02) for r in rates)
    return CriterionResult(
        7, f"intercept/resend QBER {expected} on any link (tol 0.02), 0 without", ok,
        f"no Eve {clean.qber:.4f}; Eve on links 0..2: " + ", ".join(f"{r:.4f}" for r in rates),
    )


def max_disjoint_chains(token_lists: Sequence[Sequence[LinkToken]]) -> int:
    """Exhaustive branch-and-bound search for the most disjoint chains.

    A chain takes one token from every link. The first remaining link-0
    token is either left unused or combined with every possible choice on
    the other links. The optimistic bound (smallest remaining queue) only
    prunes branches that cannot beat the incumbent.
    """
    best = 0

    def search(remaining: tuple[tuple[LinkToken, ...], ...], used: int) -> None:
        nonlocal best
        bound = used + min(len(r) for r in remaining)
        if bound <= best:
            return
        if not remaining[0]:
            best = max(best, used)
            return
        head, rest0 = remaining[0][0], remaining[0][1:]
        others = remaining[1:]

        def combos(i: int, picked: tuple[int, ...]):
            if i == len(others):
                yield picked
                return
            for j in range(len(others[i])):
                yield from combos(i + 1, picked + (j,))

        for picked in combos(0, ()):
            nxt = (rest0,) + tuple(lst[:j] + lst[j + 1:] for lst, j in zip(others, picked))
            search(nxt, used + 1)
        search((rest0,) + others, used)
        best = max(best, used)

    if not token_lists or any(len(t) == 0 for t in token_lists):
        return 0
    search(tuple(tuple(t) for t in token_lists), 0)
    return best


def check_scheduler_optimality(cases: int = 500) -> CriterionResult:
    rng = RngStream(16, "scheduler-cases")
    failures = 0
    for case in range(cases):
        slots = 1 + int(rng.random() * 12)
        xi = (1.0, 0.8, 0.5)[int(rng.random() * 3)]
        mode = (RelayMode.naive(), RelayMode.padding(), RelayMode.delay(3))[int(rng.random() * 3)]
        sim = simulate(4, slots, xi, mode, seed=1000 + case)
        tokens = build_tokens(sim.records, announce(sim.records), 4)
        chains = schedule_chains(tokens)
        used = [tok for c in chains for tok in c.tokens]
        lower = min(len(t) for t in tokens)
        if not (len(chains) == lower == max_disjoint_chains(tokens) and len(used) == len(set(used))):
            failures += 1
    return CriterionResult(
        8, "FIFO-zip chain count equals exhaustive maximum and min token count", failures == 0,
        f"{cases} random n=4 instances (<=12 slots), {failures} failures",
    )


PRIVACY_CHAINS = 10_000


def check_transcript_privacy() -> CriterionResult:
    sim = simulate(4, 22_000, 1.0, RelayMode.naive(), seed=17)
    book = RecordBook(sim.records, 4)
    anns = announce(sim.records)
    chains = schedule_chains(build_tokens(sim.records, anns, 4))[:PRIVACY_CHAINS]
    key = assemble_keys(chains, [chain_announcements(c, book) for c in chains], book)
    pvalues = []
    for k in range(2):
        ones = sum(c.flips[k] for c in key.chains)
        pvalues.append(chisquare([len(key.chains) - ones, ones]).pvalue)
    ann_fields = {f.name for f in fields(Announcement)}
    text = dumps_lines("privacy", announcements=anns[:200])
    structural = "bit" not in ann_fields and all(len(line.split("\t")) == 7 for line in text.splitlines())
    ok = len(key.chains) == PRIVACY_CHAINS and all(p > 0.01 for p in pvalues) and structural
    return CriterionResult(
        9, "relay XOR announcements are Bernoulli(1/2), announcements carry no bits", ok,
        f"{len(key.chains)} chains, chi-square p = " + ", ".join(f"{p:.3f}" for p in pvalues)
        + f"; structural {'ok' if structural else 'VIOLATED'}",
    )


def check_reproducibility() -> CriterionResult:
    with tempfile.TemporaryDirectory() as tmp:
        outputs = []
        for k in range(2):
            cfg = parse_config(overrides={
                "n_nodes": 4, "slots": 5000, "transmittance": 0.7, "mode": "padding",
                "eve_link": 1, "seed": 99, "output_dir": Path(tmp) / f"r{k}", "trace": True,
            })
            run(cfg)
            outputs.append(((Path(tmp) / f"r{k}" / "summary.txt").read_bytes(),
                            (Path(tmp) / f"r{k}" / "trace.csv").read_bytes()))
    ok = outputs[0] == outputs[1]
    return CriterionResult(10, "identical config and seed give byte-identical outputs", ok,
                           "summary and trace identical" if ok else "outputs differ")


CRITERIA: dict[int, Callable[[], CriterionResult]] = {
    1: check_useful_fraction,
    2: check_naive_fraction,
    3: check_bridged_half,
    4: check_key_agreement,
    5: check_distance_extension,
    6: check_origin_scaling,
    7: check_eavesdropper,
    8: check_scheduler_optimality,
    9: check_transcript_privacy,
    10: check_reproducibility,
}


def run_all(selected: Sequence[int] = (), echo: Callable[[str], None] | None = print) -> list[CriterionResult]:
    results = []
    for number in selected or CRITERIA:
        res = CRITERIA[number]()
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
