"""Moment energies of linear group actions and their critical points.

A family of commuting symmetric matrices X_1, ..., X_k defines the
energy phi(v) = sum_i <X_i v, v>^2.  Its gradient flow moves v inside
the orbit of the group generated by the X_i, and the limit points are
exactly the vectors whose pairings <X_i v, v> all vanish.  Those are
the minimal-norm vectors of their orbits, the certificates that an
orbit is closed.
"""

import numpy as np

from homflow import (
    CompactGroupSampler,
    HomogeneousPolynomial,
    MomentMap,
    SelfAdjointBasis,
    average_phi_K,
    criticality,
    equivariance_check,
    min_norm_check,
    moment_grad_projected,
    moment_phi_projected,
    orbit_limit,
    orthonormalize_basis,
)

# ---------------------------------------------------------------------
# one diagonal generator: the energy is a familiar quartic
# ---------------------------------------------------------------------
print("== the moment energy of diag(1,-1)/sqrt(2) ==")
basis = SelfAdjointBasis([np.diag([1.0, -1.0]) / np.sqrt(2.0)])
mm = MomentMap(basis)
print("phi(v) = <X v, v>^2 = (v1^2 - v2^2)^2 / 2")
poly = mm.to_polynomial()
print(f"expanded coefficients: {poly.terms}")

# the same energy and gradient also come from projecting v v^T onto the
# span of the basis; both routes agree to roundoff
v = np.array([0.9, -0.4])
print(f"pairing form      : phi = {mm.eval(v):.12f}, grad = {mm.grad_eval(v)}")
print(f"projection form   : phi = {moment_phi_projected(basis, v):.12f}, "
      f"grad = {moment_grad_projected(basis, v)}")

# ---------------------------------------------------------------------
# flowing to the minimal vector of an orbit
# ---------------------------------------------------------------------
print()
print("== orbit limits ==")
rng = np.random.default_rng(7)
# raw generators are fine: orthonormalize_basis makes them
# trace-orthonormal without changing their span
diag_family = orthonormalize_basis([np.diag([1.0, -1.0, 0.0]),
                                    np.diag([0.0, 1.0, -1.0])])
v0 = np.array([1.0, 0.7, 1.6])
res = orbit_limit(diag_family, v0)
u = res.trajectory.x_final
crit = criticality(diag_family, u)
print(f"start {v0}, limit {np.round(u, 6)}")
print(f"pairings at the limit: {crit.pairings}  (critical: {crit.is_critical})")
mn = min_norm_check(diag_family, u, n_samples=300, rng=rng)
print(f"minimal-norm probe over 300 group elements: worst margin "
      f"{mn.worst_margin:.2e} (passed: {mn.passed})")

# ---------------------------------------------------------------------
# symmetry: the flow commutes with the compact group that fixes phi
# ---------------------------------------------------------------------
print()
print("== equivariance of the flow ==")
# sign flips of both coordinates leave any even polynomial invariant
flips = CompactGroupSampler("finite", elements=[
    np.eye(2), np.diag([-1.0, 1.0]), np.diag([1.0, -1.0]), -np.eye(2),
])
rep = equivariance_check(mm, flips, np.array([1.1, 0.4]), t=1.0)
print(f"max |g^-1 F(t, g x) - F(t, x)| over {rep.n_elements} sampled flips: "
      f"{rep.max_deviation:.2e}")

# ---------------------------------------------------------------------
# averaging a polynomial over a circle of rotations
# ---------------------------------------------------------------------
print()
print("== Haar averaging ==")
so2 = CompactGroupSampler("torus", generators=[np.array([[0.0, -1.0],
                                                         [1.0, 0.0]])])
x14 = HomogeneousPolynomial(2, 4, {(4, 0): 1.0})
avg = average_phi_K(x14, so2)
print(f"average of x1^4 over SO(2): {avg.terms}")
print("matches the closed form (3/8) |x|^4 =")
print("  3/8 x1^4 + 3/4 x1^2 x2^2 + 3/8 x2^4")
