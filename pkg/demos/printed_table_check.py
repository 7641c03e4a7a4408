# %% [markdown]
# Marginals of a published connectedness table are functions of its cells.
# Feed the pairwise block back in and compare.

# %%
import numpy as np

import spillover as sp

names = ("A", "B", "C")
cells = np.array([          # percent, own share on the diagonal
    [70.0, 20.0, 10.0],
    [15.0, 60.0, 25.0],
    [5.0, 35.0, 60.0],
])
rep = sp.connectedness_report(sp.FevdTable.from_shares(cells / 100, names))

# %%
rep.receiver, rep.giver, rep.net, rep.tci

# %%
# receiver is 100 minus own, inc.own is giver plus own
assert np.allclose(rep.receiver, 100 - np.diag(cells))
assert np.allclose(rep.inc_own, rep.giver + np.diag(cells))
assert abs(rep.net.sum()) < 1e-12

# %%
# pairwise view: who dominates whom, and how tight each link is
np.round(rep.npdc, 2), np.round(rep.pci, 3), rep.npt
