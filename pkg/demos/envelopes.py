"""Envelopes around a forced nonlinear system.

The cubic system x' = -x^3 + u settles near cbrt(u). We drive it with a slow
sinusoid, build the two-sided envelope from the rate bounds of the error
Jacobian, and check that the simulated state never leaves it.

Run:  python demos/envelopes.py
"""
import numpy as np

from isslab import (EnvelopeParams, InputSignal, check_containment, envelope_corollary1,
                    envelope_theorem2, get_example, integrate)
from isslab.envelope import steady_tracking_error
from isslab.funcalg import ClassKLFunction

sys_ = get_example("cubic_scalar").model
u = InputSignal.sinusoid(amplitude=1.0, frequency=0.5, offset=8.0)
traj = integrate(sys_, [1.0], u, 0.0, 20.0, 1e-3)

# x stays in [1, 2.1] or so; there -3x^2 lies in [-13.3, -3]
params = EnvelopeParams(lambda1=lambda t: 3.0, lambda2=lambda t: 13.3)
rep = check_containment(traj, envelope_theorem2(sys_, params, u, traj.times, [1.0]), tol=1e-9)
print(f"two-sided envelope: contained={rep.contained}, max violation {rep.max_violation:.2e}")

target = np.cbrt(u.sample(traj.times)[:, 0])
print(f"envelope width after t=10: {steady_tracking_error(rep, target, 10.0):.4f}")

# the norm bound from the ISS certificate is much looser but needs no rates
cert = sys_.certificate
beta = ClassKLFunction(lambda s, t: s * np.exp(-t))
norm_rep = check_containment(traj, envelope_corollary1(cert, lambda t: 1.0, beta, u, traj.times, 1.0))
gap = float(np.max(norm_rep.upper - traj.norms()))
print(f"norm envelope: contained={norm_rep.contained}, largest gap {gap:.3f}")
