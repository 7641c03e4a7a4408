# %% [markdown]
# Walk through the bundled synthetic panel: two bank prices and a volatility level.

# %%
import numpy as np

import spillover as sp
from spillover.pipeline import bundled_path

levels = sp.load_csv(bundled_path("synthetic_prices.csv"), date_column="date")
levels.names, levels.T

# %%
# cumulative returns for the banks, raw level for the volatility index
spec = sp.TransformSpec({"BANK_A": "cumulative-return", "BANK_B": "cumulative-return", "VOL": "identity"})
levels = sp.apply_transforms(levels, spec)
returns = sp.first_difference(levels)

for n, d in sp.describe(returns).items():
    print(n, round(d.mean, 5), round(d.sd, 5), round(d.skewness, 3))

# %%
# unit roots: levels should not reject, differences should
for n in levels.names:
    print(n, sp.adf_test(levels.column(n)).p_value, sp.adf_test(returns.column(n)).p_value)

# %%
p = sp.select_lag(returns, p_max=4, criterion="bic")
model = sp.fit_var(returns, p)
table = sp.gfevd(model, 10)
report = sp.connectedness_report(table)

for row in report.table_rows():
    print("  ".join(f"{c:>8}" for c in row))

# %%
# BANK_A drives the system, so it should show up as the net giver
dict(zip(report.names, np.round(report.net, 2)))

# %%
print(sp.export_network(report, threshold=1.0))
