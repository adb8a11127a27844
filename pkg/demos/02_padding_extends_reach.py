# %% [markdown]
# # Padding keeps the last hop alive
#
# With half the photons lost on each hop, a pass-through relay only forwards
# what it caught, so Bob sees a quarter of the slots filled. A padding relay
# fills every empty slot with a fresh random photon and remembers which ones
# it made up.

# %%
from relayqkd import ReceiverModel, RelayMode, simulate, summarize

receiver = ReceiverModel(min_rate_threshold=0.3)
for mode in (RelayMode.naive(), RelayMode.padding(), RelayMode.delay(32)):
    s = summarize(simulate(3, 50_000, 0.5, mode, seed=1), receiver)
    print(f"{str(mode):9s} link rates {[round(r, 3) for r in s.link_detection_rates]} "
          f"viable {s.link_viable} origin {s.origin_fraction:.3f}")

# %% [markdown]
# Only a fraction xi**m of the slots carry a photon that really left Alice.

# %%
for hops in (1, 2, 3, 4):
    s = summarize(simulate(hops + 1, 50_000, 0.7, RelayMode.padding(), seed=2))
    print(f"m={hops}: measured {s.origin_fraction:.4f}, 0.7**m = {0.7 ** hops:.4f}")
