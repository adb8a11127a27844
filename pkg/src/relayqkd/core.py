"""BB84 primitives: bases, photon states, and seeded random streams.

Qubits are symbolic. A photon is a (basis, bit) pair and the only physics
that matters is whether a measurement basis matches the encoding basis.
"""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from enum import IntEnum


class Basis(IntEnum):
    X = 0
    Y = 1

    def complement(self) -> "Basis":
        return Basis(1 - self)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class PhotonState:
    """One of the four BB84 eigenstates |±>_X, |±>_Y."""

    basis: Basis
    bit: int

    def __post_init__(self):
        if self.bit not in (0, 1):
            raise ValueError(f"bit must be 0 or 1, got {self.bit!r}")


_BASES = (Basis.X, Basis.Y)


def derive_seed(*parts) -> int:
    """Mix arbitrary printable parts into a 64-bit seed (blake2b, little endian)."""
    text = "/".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "little")


class RngStream:
    """A named, reproducible stream of random draws.

    The stream for ``(seed, label)`` is independent of every other label, so
    each node/purpose pair gets its own sequence and adding a relay never
    shifts the draws seen by another node.
    """

    __slots__ = ("seed", "label", "_rng")

    def __init__(self, seed: int, label: str = ""):
        self.seed = int(seed)
        self.label = label
        self._rng = random.Random(derive_seed(self.seed, label))

    def child(self, label: str) -> "RngStream":
        return RngStream(self.seed, f"{self.label}/{label}" if self.label else label)

    def bit(self) -> int:
        return self._rng.getrandbits(1)

    def basis(self) -> Basis:
        return _BASES[self._rng.getrandbits(1)]

    def random(self) -> float:
        return self._rng.random()

    def sample(self, population, k: int) -> list:
        return self._rng.sample(population, k)

    def getstate(self):
        return self._rng.getstate()

    def setstate(self, state) -> None:
        self._rng.setstate(state)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, label={self.label!r})"


def encode(bit: int, basis: Basis) -> PhotonState:
    return PhotonState(Basis(basis), bit)


def measure(state: PhotonState, basis: Basis, rng: RngStream) -> int:
    """Measure ``state`` in ``basis``.

    A matched basis returns the encoded bit. A conjugate basis gives an
    unbiased coin drawn from ``rng``; no draw is consumed on a match.
    """
    if basis == state.basis:
        return state.bit
    return rng.bit()


def random_photon(rng: RngStream) -> PhotonState:
    basis = rng.basis()
    return PhotonState(basis, rng.bit())
