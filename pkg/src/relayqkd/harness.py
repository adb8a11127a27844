"""Run configuration, single runs, and reproducible parameter sweeps.

Config files are INI style (stdlib ``configparser``)::

    [run]
    n_nodes = 3            ; required
    slots = 1000           ; required, >= 1
    transmittance = 0.5    ; scalar, or one value per hop: 0.9, 0.8
    mode = padding         ; naive | padding | delay:<batch_size>
    threshold = 0.3        ; receiver minimum detection rate
    eve_link = 1           ; optional intercept/resend attacker on link i
    seed = 7
    qber_sample = 1.0
    output_dir = out
    trace = false

    [sweep]
    n_nodes = 3, 4, 5
    transmittance = 1.0, 0.5
    mode = naive, padding

Sweep children get seeds from :func:`child_seed`, which mixes the master
seed with the child's axis *values*, so dropping one value from an axis
leaves every other child bit-identical.
"""
from __future__ import annotations

import configparser
import csv
import dataclasses
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional

from .analytics import RunSummary, summarize
from .channel import EavesdropperConfig
from .core import derive_seed
from .nodes import ReceiverModel, RelayMode, SimulationRun, simulate

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    def __init__(self, key: str, reason: str):
        super().__init__(f"{key}: {reason}")
        self.key = key
        self.reason = reason


@dataclass(frozen=True)
class RunConfig:
    n_nodes: int
    slots: int
    transmittance: float | tuple[float, ...] = 1.0
    mode: RelayMode = RelayMode()
    threshold: float = 0.0
    eve_link: Optional[int] = None
    seed: int = 0
    qber_sample: float = 1.0
    output_dir: Optional[Path] = None
    trace: bool = False
    sweep_n_nodes: tuple[int, ...] = ()
    sweep_transmittance: tuple[float, ...] = ()
    sweep_mode: tuple[RelayMode, ...] = ()

    def __post_init__(self):
        if self.n_nodes < 2:
            raise ConfigError("n_nodes", "must be >= 2")
        if self.slots < 1:
            raise ConfigError("slots", "must be >= 1")
        if isinstance(self.transmittance, tuple):
            if len(self.transmittance) != self.n_nodes - 1:
                raise ConfigError(
                    "transmittance",
                    f"per-hop list has {len(self.transmittance)} entries, expected n_nodes - 1 = {self.n_nodes - 1}",
                )
            values = self.transmittance
        else:
            values = (self.transmittance,)
        for v in values + self.sweep_transmittance:
            if not 0.0 <= v <= 1.0:
                raise ConfigError("transmittance", f"{v} outside [0, 1]")
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError("threshold", "must lie in [0, 1]")
        if not 0.0 < self.qber_sample <= 1.0:
            raise ConfigError("qber_sample", "must lie in (0, 1]")
        for n in (self.n_nodes,) + self.sweep_n_nodes:
            if n < 2:
                raise ConfigError("n_nodes", f"{n} must be >= 2")
            if self.eve_link is not None and not 0 <= self.eve_link <= n - 2:
                raise ConfigError("eve_link", f"{self.eve_link} outside [0, {n - 2}] for {n} nodes")
        if self.sweep_n_nodes and isinstance(self.transmittance, tuple):
            raise ConfigError("transmittance", "a per-hop list cannot be combined with a node-count sweep")

    @property
    def is_sweep(self) -> bool:
        return bool(self.sweep_n_nodes or self.sweep_transmittance or self.sweep_mode)

    def eve(self) -> Optional[EavesdropperConfig]:
        return None if self.eve_link is None else EavesdropperConfig(self.eve_link)


def _as_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _split(text: str) -> list[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


def _transmittance(text: str) -> float | tuple[float, ...]:
    parts = [float(p) for p in _split(text)]
    if len(parts) == 1 and "," not in text:
        return parts[0]
    return tuple(parts)


_RUN_KEYS = {
    "n_nodes": int,
    "slots": int,
    "transmittance": _transmittance,
    "mode": RelayMode.parse,
    "threshold": float,
    "eve_link": lambda s: None if s.strip().lower() in ("", "none") else int(s),
    "seed": int,
    "qber_sample": float,
    "output_dir": Path,
    "trace": _as_bool,
}
_SWEEP_KEYS = {
    "n_nodes": lambda s: tuple(int(p) for p in _split(s)),
    "transmittance": lambda s: tuple(float(p) for p in _split(s)),
    "mode": lambda s: tuple(RelayMode.parse(p) for p in _split(s)),
}


def _convert(table: Mapping[str, Any], key: str, raw: Any, label: str):
    if key not in table:
        raise ConfigError(label, "unknown key")
    if not isinstance(raw, str):
        return raw
    try:
        return table[key](raw)
    except ValueError as exc:
        raise ConfigError(label, str(exc)) from exc


def parse_config(path: Optional[str | Path] = None, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """Build a validated :class:`RunConfig` from an INI file and/or overrides.

    Override keys use the ``[run]`` names, plus ``sweep_<axis>`` for sweep
    axes; values may be raw strings or already-typed. Overrides win.
    """
    values: dict[str, Any] = {}
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except configparser.Error as exc:
            raise ConfigError(str(path), f"malformed config: {exc}") from exc
        for section in parser.sections():
            if section not in ("run", "sweep"):
                raise ConfigError(f"[{section}]", "unknown section")
        if parser.has_section("run"):
            for key, raw in parser.items("run"):
                values[key] = _convert(_RUN_KEYS, key, raw, f"run.{key}")
        if parser.has_section("sweep"):
            for key, raw in parser.items("sweep"):
                values[f"sweep_{key}"] = _convert(_SWEEP_KEYS, key, raw, f"sweep.{key}")
    for key, raw in (overrides or {}).items():
        if raw is None:
            continue
        if key.startswith("sweep_"):
            values[key] = _convert(_SWEEP_KEYS, key[len("sweep_"):], raw, key)
        else:
            values[key] = _convert(_RUN_KEYS, key, raw, key)
    for required in ("n_nodes", "slots"):
        if required not in values:
            raise ConfigError(required, "missing required key")
    if isinstance(values.get("transmittance"), list):
        values["transmittance"] = tuple(values["transmittance"])
    return RunConfig(**values)


def simulate_config(config: RunConfig) -> SimulationRun:
    return simulate(
        config.n_nodes,
        config.slots,
        config.transmittance,
        config.mode,
        config.eve(),
        config.seed,
    )


def write_trace(run: SimulationRun, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timeslot", "node", "role", "basis", "origin", "detected", "resend_of"])
        for r in run.records:
            w.writerow([
                r.timeslot,
                r.node,
                r.role.value,
                "" if r.basis is None else r.basis.name,
                "" if r.origin is None else r.origin.value,
                int(r.detected),
                "" if r.resend_of is None else r.resend_of,
            ])


def run(config: RunConfig) -> RunSummary:
    """Simulate, post-process and summarise one configuration.

    Writes ``summary.txt`` (and ``trace.csv`` when tracing) into
    ``output_dir`` if one is set.
    """
    sim = simulate_config(config)
    summary = summarize(sim, ReceiverModel(config.threshold), config.qber_sample)
    if config.output_dir is not None:
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.txt").write_text(summary.to_text())
        if config.trace:
            write_trace(sim, out / "trace.csv")
        log.info("wrote run outputs to %s", out)
    return summary


def child_seed(master: int, n_nodes: int, transmittance, mode: RelayMode) -> int:
    """blake2b-64 of ``"master/n=<n>/xi=<xi>/mode=<mode>"``."""
    xi = ",".join(repr(float(v)) for v in transmittance) if isinstance(transmittance, tuple) else repr(float(transmittance))
    return derive_seed(master, f"n={n_nodes}", f"xi={xi}", f"mode={mode}")


def child_id(n_nodes: int, transmittance, mode: RelayMode) -> str:
    xi = "-".join(f"{v:g}" for v in transmittance) if isinstance(transmittance, tuple) else f"{transmittance:g}"
    return f"n{n_nodes}_xi{xi}_{str(mode).replace(':', '')}"


def expand_sweep(config: RunConfig) -> list[tuple[str, RunConfig]]:
    ns = config.sweep_n_nodes or (config.n_nodes,)
    xis = config.sweep_transmittance or (config.transmittance,)
    modes = config.sweep_mode or (config.mode,)
    children = []
    for n, xi, mode in itertools.product(ns, xis, modes):
        cid = child_id(n, xi, mode)
        children.append((cid, dataclasses.replace(
            config,
            n_nodes=n,
            transmittance=xi,
            mode=mode,
            seed=child_seed(config.seed, n, xi, mode),
            output_dir=None if config.output_dir is None else Path(config.output_dir) / cid,
            sweep_n_nodes=(),
            sweep_transmittance=(),
            sweep_mode=(),
        )))
    return children


def sweep(config: RunConfig, workers: int = 1) -> dict[str, RunSummary]:
    """Run every child of the sweep; results are keyed by child id.

    Children are independent, so ``workers > 1`` runs them in a process
    pool without changing any output. An index file ``sweep_index.csv`` is
    written when ``output_dir`` is set.
    """
    children = expand_sweep(config)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = list(pool.map(run, [c for _, c in children]))
    else:
        summaries = [run(c) for _, c in children]
    results = {cid: s for (cid, _), s in zip(children, summaries)}
    if config.output_dir is not None:
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "sweep_index.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["child", "n_nodes", "transmittance", "mode", "seed", "summary"])
            for cid, c in children:
                xi = c.transmittance if not isinstance(c.transmittance, tuple) else " ".join(map(str, c.transmittance))
                w.writerow([cid, c.n_nodes, xi, str(c.mode), c.seed, f"{cid}/summary.txt"])
    return results

