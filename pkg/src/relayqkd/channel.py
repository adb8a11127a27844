"""Lossy hops between adjacent nodes, with an optional intercept/resend attacker."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import PhotonState, RngStream, encode, measure


@dataclass(frozen=True)
class ChannelParams:
    """Per-hop survival probability of a photon."""

    transmittance: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.transmittance <= 1.0:
            raise ValueError(f"transmittance must lie in [0, 1], got {self.transmittance}")


@dataclass(frozen=True)
class EavesdropperConfig:
    """Intercept/resend attacker sitting on link ``link_index`` (node i -> i+1).

    Measures every surviving photon in a uniformly random basis and resends
    the measured state.
    """

    link_index: int
    strategy: str = "intercept-resend-random-basis"

    def __post_init__(self):
        if self.link_index < 0:
            raise ValueError("link_index must be non-negative")
        if self.strategy != "intercept-resend-random-basis":
            raise ValueError(f"unsupported eavesdropper strategy {self.strategy!r}")

    def validate_for(self, n_nodes: int) -> None:
        if not 0 <= self.link_index <= n_nodes - 2:
            raise ValueError(
                f"eve link_index {self.link_index} outside [0, {n_nodes - 2}] for {n_nodes} nodes"
            )


def intercept_resend(photon: PhotonState, rng: RngStream) -> PhotonState:
    basis = rng.basis()
    return encode(measure(photon, basis, rng), basis)


def transmit(
    photon: Optional[PhotonState],
    params: ChannelParams,
    eve: Optional[EavesdropperConfig],
    rng: RngStream,
    eve_rng: Optional[RngStream] = None,
) -> Optional[PhotonState]:
    """Send ``photon`` over one hop.

    The loss draw is made for every call (even with nothing to send) so that
    the stream stays aligned to the timeslot index. The attacker only sees
    photons that survive; its draws come from ``eve_rng`` when given.
    """
    survived = rng.random() < params.transmittance
    if photon is None or not survived:
        return None
    if eve is not None:
        photon = intercept_resend(photon, eve_rng if eve_rng is not None else rng)
    return photon
