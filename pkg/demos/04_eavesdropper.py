# %% [markdown]
# # An intercept/resend attacker shows up in the error rate
#
# The relays are trusted; the attacker sits on one fibre. Wherever it sits,
# a quarter of the bridged key bits disagree.

# %%
from relayqkd import EavesdropperConfig, simulate, summarize
from relayqkd.analytics import intercept_resend_error_rate

print("exact single-hop error:", intercept_resend_error_rate())
print("no attacker:", summarize(simulate(4, 20_000, seed=4)).qber)
for link in range(3):
    s = summarize(simulate(4, 20_000, eve=EavesdropperConfig(link), seed=4))
    print(f"attacker on link {link}: qber {s.qber:.4f} over {s.chains} chains")
