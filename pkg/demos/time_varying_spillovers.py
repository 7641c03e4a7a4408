# %% [markdown]
# Time-varying connectedness on a simulated panel where the leading variable switches halfway.

# %%
import numpy as np

import spillover as sp

rng = np.random.default_rng(7)
T, N = 1200, 3
before = np.array([[0.3, 0.0, 0.0], [0.4, 0.3, 0.0], [0.4, 0.0, 0.3]])   # v0 leads
after = before.T.copy()                                                 # v0 follows

y = np.zeros((T, N))
for t in range(1, T):
    A = before if t < T // 2 else after
    y[t] = A @ y[t - 1] + rng.standard_normal(N)

s = np.datetime64("2020-01-01")
panel = sp.PanelSeries(("v0", "v1", "v2"), np.arange(s, s + T), y)

# %%
traj = sp.tvp_filter(panel, sp.TvpConfig(kappa1=0.99, kappa2=0.99))
dyn = sp.dynamic_report(sp.trajectory_fevd(traj, h=10))
len(dyn), dyn.dates[0]

# %%
net = dyn.net_series("v0")
half = np.searchsorted(dyn.dates, panel.dates[T // 2])
print("mean NET of v0 before the switch", net[:half].mean().round(2))
print("mean NET of v0 after the switch ", net[half:].mean().round(2))

# %%
# a rolling-window VAR gives a cruder view of the same thing
roll = sp.dynamic_report(sp.rolling_var_fevd(panel, window=200, p=1, h=10))
roll.net_series("v0")[[0, -1]].round(2)

# %%
# pairwise dominance of v0 over v1, then the time-averaged table
print(dyn.pair_series("v0", "v1", "npdc")[[0, half, -1]].round(2))
avg = sp.average_report(dyn)
avg.tci
