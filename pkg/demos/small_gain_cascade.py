"""Small-gain and cascade evidence for coupled pairs.

Run:  python demos/small_gain_cascade.py
"""
import numpy as np

from isslab import analyze_interconnection, get_example, small_gain_check
from isslab import funcalg as fa
from isslab.analyzers import small_gain_table

grid = np.logspace(-3, 3, 7)
print("gains 0.4 s and 2 s:")
print(small_gain_table(fa.linear(0.4), fa.linear(2.0), grid))
print("passed:", small_gain_check(fa.linear(0.4), fa.linear(2.0), grid).passed)

# identity gains sit exactly on the boundary; the test says nothing either way
print("identity gains pass:", small_gain_check(fa.identity(), fa.identity(), grid).passed)

sysx, sysz = get_example("example1").pair
rep = analyze_interconnection(sysx, sysz, [1.0], [1.0], 20.0, 1e-3)
print()
print("example1 loop:", rep.verdict.value)
for c in rep.checks:
    print(f"  {c.name:12s} {c.status:12s} {c.metrics}")

# the agents meet even though their gain loop fails the small-gain test
sysx, sysz = get_example("mas_cubic").pair
rep = analyze_interconnection(sysx, sysz, [1.0], [0.0], 50.0, 1e-2,
                              gains=get_example("mas_cubic").extras["gains"], equilibrium=[0.5, 0.5],
                              terminal_tol=0.1)
print()
print("mas_cubic loop:", rep.verdict.value)
for c in rep.checks:
    print(f"  {c.name:12s} {c.status}")
