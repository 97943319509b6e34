#!/usr/bin/env python3
"""Single mean-field CD-1 step on a 3-visible / 2-hidden RBM, written out by hand.

Sums run over the inner index in ascending order from 0.0, matching the
library's reduction order, so the output can be compared bit for bit.
Writes cd1_fixture.txt next to this script: one `name index bits` line per
value, with the IEEE-754 bit pattern in hex.
"""
import math
import os
import struct

W = [[0.1, -0.2], [0.3, 0.05], [-0.15, 0.25]]
B_V = [0.01, -0.02, 0.03]
B_H = [0.05, -0.05]
V = [1.0, 0.0, 1.0]
LR = 0.1
MOMENTUM = 0.5


def sig(x):
    return 1.0 / (1.0 + math.exp(-x))


def up(v):
    out = []
    for j in range(2):
        s = 0.0
        for i in range(3):
            s += v[i] * W[i][j]
        out.append(sig(s + B_H[j]))
    return out


def down(h):
    out = []
    for i in range(3):
        s = 0.0
        for j in range(2):
            s += h[j] * W[i][j]
        out.append(sig(s + B_V[i]))
    return out


h_p = up(V)
v_r = down(h_p)
h_r = up(v_r)
scale = LR / 1.0

new_w = []
for i in range(3):
    for j in range(2):
        pos = 0.0 + V[i] * h_p[j]
        neg = 0.0 + v_r[i] * h_r[j]
        vel = MOMENTUM * 0.0 + scale * (pos - neg)
        new_w.append(W[i][j] + vel)
new_bv = [B_V[i] + (MOMENTUM * 0.0 + scale * (0.0 + (V[i] - v_r[i]))) for i in range(3)]
new_bh = [B_H[j] + (MOMENTUM * 0.0 + scale * (0.0 + (h_p[j] - h_r[j]))) for j in range(2)]
err = 0.0
for i in range(3):
    d = V[i] - v_r[i]
    err += d * d


def bits(x):
    return struct.unpack("<Q", struct.pack("<d", x))[0]


lines = []
for name, values in [("weights", new_w), ("bias_visible", new_bv), ("bias_hidden", new_bh), ("recon_error", [err])]:
    for k, v in enumerate(values):
        lines.append(f"{name} {k} {bits(v):016x}  # {v!r}")

path = os.path.join(os.path.dirname(os.path.abspath(__file__)), "cd1_fixture.txt")
with open(path, "w") as f:
    f.write("\n".join(lines) + "\n")
print("\n".join(lines))
