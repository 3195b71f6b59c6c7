"""Loops where one block is not ISS on its own.

Both examples pair an ISS block with an integrator-like block. The
reduced-loop check and a Lyapunov function give evidence of stability even
though the small-gain test does not apply.

Run:  python demos/special_loop.py        (about ten seconds)
"""
from isslab import Verdict, analyze_special_interconnection, get_example

for name in ("example4b", "example4a"):
    entry = get_example(name)
    sysx, sysz = entry.pair
    x0, z0 = entry.extras["from_original"](0.5, 0.5)
    rep = analyze_special_interconnection(sysx, sysz, entry.extras["gamma"], [x0], [z0], 200.0, 1e-2,
                                          lyapunov=entry.extras["lyapunov"])
    print(f"{name}: {entry.description}")
    print(f"  verdict {rep.verdict.value}")
    for c in rep.checks:
        print(f"  {c.name:12s} {c.status:6s} {c.metrics}")
    if rep.verdict is not Verdict.STABLE:
        # example4a decays like t^(-1/2), so t = 200 is not long enough to settle
        print("  V still falls monotonically; convergence is just slow")
    print()
