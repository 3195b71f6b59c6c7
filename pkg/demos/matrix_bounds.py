"""Scalar eigenvalue bounds for a state-dependent matrix.

Run:  python demos/matrix_bounds.py        (ISSLAB_SEED changes the sampling)
"""
import numpy as np

from isslab import FunctionMatrix, check_definiteness, get_example, scalar_bounds

iso = FunctionMatrix(lambda x: -(1.0 + float(x @ x)) * np.eye(2), 2, 1.0)
pair = scalar_bounds(iso)
print(" s     lambda1(s)  lambda2(s)  -(1+s^2)")
for s in (0.0, 0.25, 0.5, 0.75, 1.0):
    print(f"{s:4.2f}  {pair.lambda1(s):10.5f}  {pair.lambda2(s):10.5f}  {-(1 + s * s):9.5f}")
print("decay rates usable by the envelopes:", pair.rates())

# a Hurwitz spectrum does not make x^T A x negative
flat = FunctionMatrix(lambda x: np.array([[0.0, 1.0], [-1.0, -1.0]]), 2, 1.0)
rep = check_definiteness(flat)
print()
print("[[0, 1], [-1, -1]]: eigen test", rep.metrics["eigen_verdict"], "| quadratic form test", rep.passed)
print("  witness direction", rep.metrics["witness_e"])

jac = get_example("example3_coupled").extras["jacobian"]
rep = check_definiteness(FunctionMatrix(lambda x: jac(x, None, 0.0), 2, 1.0))
print("example3 Jacobian strictly negative definite:", rep.passed,
      f"(worst form {rep.metrics['worst_quadratic_form']:.3g})")
