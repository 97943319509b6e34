#!/usr/bin/env python3
# Detection recall per class and overall accuracy vs SNR.
import csv
import os
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "accuracy.csv")
recall = defaultdict(list)
overall = {}
with open(path) as f:
    for row in csv.DictReader(f):
        snr = float(row["snr_db"])
        recall[row["class"]].append((snr, float(row["recall"])))
        overall[snr] = float(row["overall_accuracy"])
fig, ax = plt.subplots(figsize=(6, 4))
for cls, pts in sorted(recall.items()):
    pts.sort()
    ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", label=cls)
snrs = sorted(overall)
ax.plot(snrs, [overall[s] for s in snrs], "k--", label="overall")
ax.set_xlabel("SNR (dB)")
ax.set_ylabel("Detection accuracy")
ax.set_ylim(0, 1.05)
ax.grid(True, alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(os.path.dirname(path), "accuracy.png"), dpi=150)
