"""Build homogeneous polynomials and integrate their descent flows.

Walks through the two core objects of the package: the sparse
HomogeneousPolynomial with its exact gradient, and the adaptive
integrator for x' = -grad phi(x).  The flow of a nonnegative
homogeneous polynomial can only shrink both phi and the norm, and the
integrator enforces that step by step.
"""

import numpy as np

from homflow import FlowOptions, HomogeneousPolynomial, euler_residual, integrate_flow

# ---------------------------------------------------------------------
# a sparse polynomial is a dict from exponent tuples to coefficients
# ---------------------------------------------------------------------
print("== polynomials ==")
pinch = HomogeneousPolynomial(2, 4, {(4, 0): 0.5, (2, 2): -1.0, (0, 4): 0.5})
print("phi(x, y) = 0.5 x^4 - x^2 y^2 + 0.5 y^4   (= 0.5 (x^2 - y^2)^2)")
for pt in ([1.0, 0.0], [1.0, 1.0], [2.0, 1.0]):
    x = np.array(pt)
    print(f"  phi{tuple(pt)} = {pinch.eval(x):.6f}   grad = {pinch.grad_eval(x)}")

# homogeneity ties the gradient back to the value: <grad phi, x> = m phi
x = np.array([0.7, -1.3])
print(f"Euler residual <grad phi, x> - m phi at {x}: {euler_residual(pinch, x):.2e}")

# algebra returns new polynomials; degrees must match for sums
x1 = HomogeneousPolynomial.variable(2, 0)
x2 = HomogeneousPolynomial.variable(2, 1)
rebuilt = 0.5 * (x1 * x1 - x2 * x2) * (x1 * x1 - x2 * x2)
print(f"rebuilt from variables, coefficients match: {rebuilt.terms == pinch.terms}")

# ---------------------------------------------------------------------
# the descent flow, compared against a closed-form solution
# ---------------------------------------------------------------------
print()
print("== flow vs closed form ==")
# for phi = 0.5 x^4 in one variable the flow is x' = -2 x^3, solved by
# x(t) = x0 / sqrt(1 + 4 x0^2 t)
quartic_1d = HomogeneousPolynomial(1, 4, {(4,): 0.5})
x0 = 1.3
traj = integrate_flow(quartic_1d, np.array([x0]), 5.0,
                      FlowOptions(grad_tol=0.0, phi_tol=0.0))
exact = x0 / np.sqrt(1.0 + 4.0 * x0**2 * traj.t)
err = np.max(np.abs(traj.states[:, 0] - exact))
print(f"integrated to t = {traj.t_final:g} in {traj.n_accepted} accepted steps "
      f"({traj.n_rejected} rejected)")
print(f"max deviation from x0/sqrt(1+4x0^2 t): {err:.2e}")

print()
print("== monotonicity along the flow ==")
traj = integrate_flow(pinch, np.array([2.0, 0.4]), 3.0,
                      FlowOptions(grad_tol=0.0, phi_tol=0.0))
norms = np.linalg.norm(traj.states, axis=1)
print(f"status: {traj.status}, stored samples: {len(traj.t)}")
print(f"phi  decreased from {traj.phi[0]:.4f} to {traj.phi[-1]:.3e}")
print(f"|x|  decreased from {norms[0]:.4f} to {norms[-1]:.4f}")
print(f"largest relative uptick beyond roundoff: norm {traj.max_norm_uptick:.1e}, "
      f"phi {traj.max_phi_uptick:.1e}")

# a few rows of the thinned sample grid
print()
print("   t        phi          |grad phi|")
for k in np.linspace(0, len(traj.t) - 1, 6).astype(int):
    print(f"  {traj.t[k]:7.3f}  {traj.phi[k]:.5e}  {traj.grad_norm[k]:.5e}")

# ---------------------------------------------------------------------
# early stopping: tolerances met before the time horizon
# ---------------------------------------------------------------------
print()
print("== convergence stopping ==")
ns = HomogeneousPolynomial(2, 2, {(2, 0): 1.0, (0, 2): 1.0})
traj = integrate_flow(ns, np.array([1.0, 1.0]), 50.0)
print(f"phi = |x|^2 from (1,1): status {traj.status} at t = {traj.t_final:.2f} "
      f"(horizon 50), phi = {traj.phi_final:.1e}, |grad| = {traj.grad_norm_final:.1e}")
