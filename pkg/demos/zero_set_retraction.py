"""Retract points onto the zero set of a nonnegative polynomial.

Following the descent flow to infinity carries any starting point to a
point where phi vanishes, without ever increasing the norm.  Sampling
the flow at reparametrized times s/(1-s) turns that limit into a
deformation of the whole space onto the zero set.  The tail of phi
along the way decays like a power of t, which a log-log fit recovers.
"""

import numpy as np

from homflow import (
    HomogeneousPolynomial,
    decay_fit,
    integrate_flow,
    FlowOptions,
    retract,
    retraction_path,
)

pinch = HomogeneousPolynomial(2, 4, {(4, 0): 0.5, (2, 2): -1.0, (0, 4): 0.5})
print("phi = 0.5 (x^2 - y^2)^2, zero set = the two diagonals y = +-x")
print()

# ---------------------------------------------------------------------
# a ring of starts, all pulled onto the diagonals
# ---------------------------------------------------------------------
print("== retraction endpoints ==")
print("   start              endpoint             phi(end)    |end|/|start|")
for theta in np.linspace(0.1, np.pi / 2 - 0.1, 5):
    x0 = 1.5 * np.array([np.cos(theta), np.sin(theta)])
    res = retract(pinch, x0, phi_tol=1e-12)
    shrink = np.linalg.norm(res.y) / np.linalg.norm(x0)
    print(f"  ({x0[0]: .3f},{x0[1]: .3f})   ({res.y[0]: .5f},{res.y[1]: .5f})"
          f"   {res.phi_value:.1e}    {shrink:.4f}")
print("endpoints sit on y = +-x and the norm never grew")

# ---------------------------------------------------------------------
# the deformation parameter s in [0, 1], with s = 1 the limit itself
# ---------------------------------------------------------------------
print()
print("== deformation path ==")
path = retraction_path(pinch, np.array([1.2, 0.3]), samples=6)
print("    s        t = s/(1-s)   point")
for s, t, p in zip(path.s, path.t_values, path.states):
    t_str = f"{t:9.3f}" if np.isfinite(t) else "      inf"
    print(f"  {s:5.2f}  {t_str}       ({p[0]: .6f}, {p[1]: .6f})")
print(f"limit on the zero set: ({path.limit[0]:.6f}, {path.limit[1]:.6f})")

# ---------------------------------------------------------------------
# how fast does phi die off?  fit the tail of a long integration
# ---------------------------------------------------------------------
print()
print("== decay of phi along the flow ==")
traj = integrate_flow(pinch, np.array([1.0, 0.0]), 1.0e4,
                      FlowOptions(grad_tol=0.0, phi_tol=0.0, store_ratio=1.1))
fit = decay_fit(traj)
print(f"from (1, 0): phi(t) ~ {fit.amplitude:.4f} * t^{fit.exponent:.4f} "
      f"on the last {fit.n_tail} samples")
print(f"largest t * phi(t) observed: {fit.sup_t_phi:.6f} at t = {fit.arg_sup:.2f}")
print("(the closed form here is phi = 1/(2 (1+4t)^2), so the exponent is -2")
print(" and t * phi peaks at 1/32 = 0.03125, attained at t = 1/4)")
