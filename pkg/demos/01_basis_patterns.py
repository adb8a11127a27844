# %% [markdown]
# # Where can a key form along a relay chain?
#
# Every node picks X or Y uniformly. Adjacent nodes that agree can share a
# bit; a timeslot is wasted only when the choices alternate all the way.

# %%
from relayqkd import enumerate_patterns, naive_end_to_end_fraction, useful_fraction

three = enumerate_patterns(3)
for o in three.outcomes:
    print(o.label, o.opportunities or "no key")

# %% [markdown]
# The share of timeslots useful to *some* pair grows with the chain, while
# the share usable end to end in one go halves with every extra node.

# %%
for n in range(2, 9):
    e = enumerate_patterns(n)
    assert e.useful_fraction == useful_fraction(n)
    print(f"n={n}: useful {e.useful_fraction}, end-to-end {naive_end_to_end_fraction(n)}, "
          f"per-link match {e.link_match_fraction}")
