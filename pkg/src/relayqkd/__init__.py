"""End-to-end BB84 key distribution through chains of trusted intercept/resend relays."""
from .analytics import (
    RunSummary,
    enumerate_patterns,
    naive_end_to_end_fraction,
    origin_fraction,
    summarize,
    useful_fraction,
)
from .channel import ChannelParams, EavesdropperConfig, transmit
from .core import Basis, PhotonState, RngStream, encode, measure, random_photon
from .harness import RunConfig, parse_config, run, sweep
from .nodes import ReceiverModel, Relay, RelayMode, SlotRecord, Topology, link_viable, simulate
from .sifting import (
    Announcement,
    KeyChain,
    LinkToken,
    SiftedKey,
    announce,
    assemble_keys,
    bridge,
    build_tokens,
    chain_announcements,
    estimate_qber,
    schedule_chains,
    sift_naive,
)

__version__ = "0.1.0"
