"""Two agents with cubic coupling reach agreement, but only algebraically.

Run:  python demos/consensus.py
"""
import numpy as np

from isslab import consensus_analyze, consensus_error_oracle

rep = consensus_analyze(1.0, 0.0, horizon=10.0, h=1e-3)
print(rep.to_text())

# the disagreement e = x - z obeys e' = -2 e^3, so it shrinks like 1/sqrt(t)
for t in (0.0, 1.0, 10.0, 100.0, 1000.0):
    print(f"t={t:7.1f}  |e| = {float(consensus_error_oracle(1.0, t)):.5f}")

# a linear protocol e' = -2e would be at exp(-20) ~ 2e-9 by now
print(f"e(10) = {float(consensus_error_oracle(1.0, 10.0)):.5f}  vs linear {np.exp(-20.0):.1e}")
