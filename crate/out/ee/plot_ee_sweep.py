#!/usr/bin/env python3
# Energy efficiency vs number of BS antennas, one pair of curves per user count.
import csv
import os
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "ee_sweep.csv")
series = defaultdict(list)
with open(path) as f:
    for row in csv.DictReader(f):
        series[int(row["m_r"])].append(
            (int(row["n_t"]), float(row["ee_zf_mbit_per_j"]), float(row["ee_rnn_mbit_per_j"]))
        )
fig, ax = plt.subplots(figsize=(6, 4))
for m_r, pts in sorted(series.items()):
    pts.sort()
    n_t = [p[0] for p in pts]
    ax.plot(n_t, [p[2] for p in pts], "o-", label=f"RNN, M_r={m_r}")
    ax.plot(n_t, [p[1] for p in pts], "s--", label=f"min-norm ZF, M_r={m_r}")
ax.set_xlabel("BS antennas N_t")
ax.set_ylabel("Energy efficiency (Mbit/J)")
ax.grid(True, alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(os.path.dirname(path), "ee_sweep.png"), dpi=150)
