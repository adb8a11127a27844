# %% [markdown]
# # Bridging timeslots with relay bit flips
#
# Slot 0 uses bases X-X-Y-Y: links 0 and 2 match but the relays disagree.
# Slot 1 uses X-Y-Y-X: only the middle link matches. Taking links 0 and 2
# from slot 0 and link 1 from slot 1 gives a complete path.

# %%
from relayqkd import Basis, KeyChain, LinkToken, SlotRecord, assemble_keys, chain_announcements
from relayqkd.nodes import Origin, RecordBook, Role

X, Y = Basis.X, Basis.Y


def slot(t, bases, bits):
    recs = [SlotRecord(t, 0, Role.EMIT, bases[0], bits[0], Origin.SOURCE)]
    for k in range(1, 4):
        recs.append(SlotRecord(t, k, Role.DETECT, bases[k], bits[k], detected=True))
        if k < 3:
            recs.append(SlotRecord(t, k, Role.EMIT, bases[k], bits[k], Origin.RECEIVED))
    return recs


book = RecordBook(slot(0, (X, X, Y, Y), (1, 1, 0, 0)) + slot(1, (X, Y, Y, X), (1, 0, 0, 1)), 4)
chain = KeyChain((LinkToken(0, 0), LinkToken(1, 1), LinkToken(2, 0)))
flips = chain_announcements(chain, book)
key = assemble_keys([chain], [flips], book)
print("relay announcements:", flips)
print("Alice", key.alice, "Bob", key.bob)

# %% [markdown]
# On real runs every link matches half the time, so the bridged key rate
# stays at one half however many relays there are.

# %%
from relayqkd import simulate, summarize

for n in range(2, 8):
    s = summarize(simulate(n, 40_000, 1.0, seed=3))
    print(f"n={n}: naive {s.naive_fraction:.4f}  bridged {s.bridged_fraction:.4f}")
