"""Gradient descent flow x'(t) = -grad phi(x(t)) for homogeneous phi >= 0.

For a nonnegative homogeneous polynomial of degree m the flow obeys two
exact monotonicity laws, both consequences of the chain rule and the
Euler identity <grad phi(x), x> = m phi(x):

    d/dt phi(x(t))      = -|grad phi(x(t))|^2   <= 0
    d/dt |x(t)|^2       = -2 m phi(x(t))        <= 0

The integrator below is an embedded Dormand-Prince 5(4) pair with the
first-same-as-last optimization.  On top of the usual local error test,
a step is rejected and halved whenever it would violate either
monotonicity law beyond a small relative slack, so accepted trajectories
respect the laws by construction.  The slack carries a tiny absolute
component (abs_tol for the norm, the evaluation roundoff floor for phi)
because neither quantity can be resolved more finely than floating
point computes it; without that allowance the guard would reject pure
noise once a trajectory settles onto the zero set.

States are recorded on a geometrically thinned grid (plus any exactly
requested landing times), which keeps long integrations to a few hundred
stored rows while resolving both the fast initial transient and the slow
algebraic tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

__all__ = [
    "FlowOptions",
    "Trajectory",
    "RetractResult",
    "RetractionPath",
    "DecayFit",
    "ConvergenceError",
    "AlreadyConvergedError",
    "integrate_flow",
    "flow_at_times",
    "retract",
    "retraction_path",
    "decay_fit",
    "arclength_tail",
]


class ConvergenceError(RuntimeError):
    """The flow failed to reach the requested tolerances.

    Carries the partial ``trajectory`` so callers can inspect how far the
    integration got before giving up.
    """

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class AlreadyConvergedError(ValueError):
    """Raised when a decay fit is requested but the sampled values sit at
    the zero set already, leaving no tail to fit."""


@dataclass
class FlowOptions:
    """Tunable knobs for the integrator.

    rel_tol, abs_tol : local error control of the embedded pair.
    grad_tol, phi_tol : both must be met for status "converged".
    max_time : horizon used by retract when no explicit t_end is given.
    min_step : relative step-size floor; repeated halving below this
        aborts with status "step_failure".
    max_steps : cap on attempted steps, same failure status.
    store_ratio : consecutive stored times grow at least by this factor.
    monotone_tol : relative slack for the norm and phi descent guards.
        On top of it the norm guard allows abs_tol absolutely and the
        phi guard allows the evaluation roundoff floor at the new point.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    grad_tol: float = 1e-7
    phi_tol: float = 1e-10
    max_time: float = 1e8
    min_step: float = 1e-14
    max_steps: int = 1_000_000
    store_ratio: float = 1.2
    monotone_tol: float = 1e-9


# Dormand-Prince 5(4) tableau.  _E is b5 - b4, the error weights.
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)

_EPS = float(np.finfo(float).eps)


def _phi_noise_floor(system, x, phi_value) -> float:
    """Absolute resolution limit of system.eval near x.

    Near the zero set phi is computed by cancellation between terms of
    size eval_magnitude(x), so values below a small multiple of epsilon
    times that magnitude are indistinguishable from zero and must not
    trip the descent guard.  The factor 64 covers per-term rounding and
    pairwise-summation growth for any degree this package handles.
    """
    mag = getattr(system, "eval_magnitude", None)
    scale = float(mag(x)) if mag is not None else abs(float(phi_value))
    return 64.0 * _EPS * (1.0 + scale)


class Trajectory:
    """Recorded samples of one flow integration.

    Attributes
    ----------
    t, states, phi, grad_norm : ndarray
        Sample times (N,), states (N, n), clamped phi values (N,) and
        gradient norms (N,).  Row 0 is always the initial condition.
    status : str
        "converged", "max_time" (reached the requested horizon without
        meeting the tolerances) or "step_failure".
    n_accepted, n_rejected : int
        Step counts over the whole integration, not just stored rows.
    max_norm_uptick, max_phi_uptick : float
        Largest relative increase of the norm or of phi over any single
        accepted step, beyond the absolute allowance the guard grants
        (abs_tol for the norm, the roundoff floor for phi).  0.0 when
        every increase stayed within measurement precision.
    """

    def __init__(self, t, states, phi, grad_norm, status, n_accepted, n_rejected,
                 max_norm_uptick, max_phi_uptick):
        self.t = np.asarray(t, dtype=float)
        self.states = np.asarray(states, dtype=float)
        self.phi = np.asarray(phi, dtype=float)
        self.grad_norm = np.asarray(grad_norm, dtype=float)
        self.status = status
        self.n_accepted = int(n_accepted)
        self.n_rejected = int(n_rejected)
        self.max_norm_uptick = float(max_norm_uptick)
        self.max_phi_uptick = float(max_phi_uptick)

    @property
    def t_final(self) -> float:
        return float(self.t[-1])

    @property
    def x_final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def phi_final(self) -> float:
        return float(self.phi[-1])

    @property
    def grad_norm_final(self) -> float:
        return float(self.grad_norm[-1])

    def __len__(self):
        return self.t.shape[0]

    def __repr__(self):
        return (
            f"Trajectory({len(self)} samples, t in [0, {self.t_final:g}], "
            f"status={self.status!r}, phi_final={self.phi_final:.3e})"
        )

    def to_csv(self, path) -> None:
        """Write samples as CSV with 17 significant digits per value.

        Header is ``t,x_1,...,x_n,phi,grad_norm``; the format round-trips
        doubles exactly, so identical runs produce identical bytes.
        """
        n = self.states.shape[1]
        cols = ["t"] + [f"x_{i + 1}" for i in range(n)] + ["phi", "grad_norm"]
        rows = [",".join(cols)]
        for i in range(len(self)):
            vals = [self.t[i], *self.states[i], self.phi[i], self.grad_norm[i]]
            rows.append(",".join(format(float(v), ".17g") for v in vals))
        text = "\n".join(rows) + "\n"
        if hasattr(path, "write"):
            path.write(text)
        else:
            with open(path, "w", newline="") as fh:
                fh.write(text)


def _check_system(system, x0):
    x0 = np.asarray(x0, dtype=float)
    n = getattr(system, "n_vars", None)
    if n is None:
        raise TypeError("system must expose n_vars, eval and grad_eval")
    if x0.shape != (n,):
        raise ValueError(f"initial point has shape {x0.shape}, expected ({n},)")
    if not np.all(np.isfinite(x0)):
        raise ValueError("initial point has non-finite entries")
    return x0


def _initial_step(system, x0, f0, opts, t_cap):
    """Hairer-style starting step size from the first two derivatives."""
    scale = opts.abs_tol + np.abs(x0) * opts.rel_tol
    d0 = math.sqrt(float(np.mean((x0 / scale) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, t_cap)
    f1 = -system.grad_eval(x0 + h0 * f0)
    d2 = math.sqrt(float(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, t_cap)


def _integrate(system, x0, t_end, opts, landing_times=None, stop_on_converged=True):
    """Core loop shared by all public entry points.

    ``landing_times`` is a strictly increasing array of times that must be
    hit exactly; the returned dict maps each landing time to its state.
    """
    x = _check_system(system, x0).copy()
    if not (t_end > 0 and math.isfinite(t_end)):
        raise ValueError(f"t_end must be positive and finite, got {t_end}")

    pending = list(landing_times) if landing_times is not None else []
    for i in range(1, len(pending)):
        if not pending[i] > pending[i - 1]:
            raise ValueError("landing times must be strictly increasing")
    if pending and (pending[0] < 0 or pending[-1] > t_end):
        raise ValueError("landing times must lie in [0, t_end]")
    landed = {}
    while pending and pending[0] == 0.0:
        landed[pending.pop(0)] = x.copy()

    f = -system.grad_eval(x)
    phi_raw = float(system.eval(x))
    norm_val = float(np.linalg.norm(x))
    gnorm = float(np.linalg.norm(f))

    ts = [0.0]
    xs = [x.copy()]
    phis = [max(phi_raw, 0.0)]
    gns = [gnorm]
    last_store_t = 0.0

    def finish(status):
        return Trajectory(
            np.array(ts), np.array(xs), np.array(phis), np.array(gns),
            status, n_acc, n_rej, max_norm_up, max_phi_up,
        ), landed

    n_acc = 0
    n_rej = 0
    max_norm_up = 0.0
    max_phi_up = 0.0

    if stop_on_converged and gnorm <= opts.grad_tol and phis[0] <= opts.phi_tol:
        return finish("converged")

    t = 0.0
    h = _initial_step(system, x, f, opts, t_end)
    ks = np.empty((7, x.shape[0]))

    while True:
        if n_acc + n_rej >= opts.max_steps:
            return finish("step_failure")

        h_try = min(h, t_end - t)
        landing = None
        if pending and t + h_try >= pending[0]:
            landing = pending[0]
            h_try = landing - t

        ks[0] = f
        for s in range(1, 7):
            xa = x + h_try * (np.asarray(_DP_A[s]) @ ks[:s])
            ks[s] = -system.grad_eval(xa)
        x_new = x + h_try * (_DP_B5 @ ks)
        err = h_try * (_DP_E @ ks)
        scale = opts.abs_tol + opts.rel_tol * np.maximum(np.abs(x), np.abs(x_new))
        err_norm = math.sqrt(float(np.mean((err / scale) ** 2)))

        norm_new = float(np.linalg.norm(x_new))
        phi_new_raw = float(system.eval(x_new))
        slack = opts.monotone_tol
        norm_ok = norm_new <= norm_val * (1 + slack) + opts.abs_tol
        phi_ok = phi_new_raw <= phi_raw * (1 + slack) + opts.abs_tol**2
        phi_floor = None
        if norm_ok and not phi_ok:
            # Second chance against the evaluation noise floor, computed
            # lazily: rejecting jitter below roundoff would stall the
            # stepper once a trajectory reaches the zero set.
            phi_floor = _phi_noise_floor(system, x_new, phi_new_raw)
            phi_ok = phi_new_raw <= max(phi_raw, 0.0) + phi_floor

        if err_norm > 1.0:
            n_rej += 1
            h = h_try * max(0.2, 0.9 * err_norm**-0.2)
        elif not (norm_ok and phi_ok):
            n_rej += 1
            h = h_try * 0.5
        else:
            n_acc += 1
            t = landing if landing is not None else t + h_try
            if norm_new > norm_val:
                excess = norm_new - norm_val - opts.abs_tol
                if excess > 0.0:
                    max_norm_up = max(max_norm_up, excess / max(norm_val, 1e-300))
            if phi_new_raw > phi_raw:
                if phi_floor is None:
                    phi_floor = _phi_noise_floor(system, x_new, phi_new_raw)
                excess = phi_new_raw - phi_raw - phi_floor
                if excess > 0.0:
                    max_phi_up = max(max_phi_up, excess / max(phi_raw, 1e-300))
            x = x_new
            f = ks[6]
            norm_val = norm_new
            phi_raw = phi_new_raw
            gnorm = float(np.linalg.norm(f))
            phi_clamped = max(phi_new_raw, 0.0)

            if landing is not None:
                pending.pop(0)
                landed[landing] = x.copy()

            done = t >= t_end and not pending
            converged = (
                stop_on_converged
                and gnorm <= opts.grad_tol
                and phi_clamped <= opts.phi_tol
            )
            if landing is not None or done or converged or t >= last_store_t * opts.store_ratio:
                ts.append(t)
                xs.append(x.copy())
                phis.append(phi_clamped)
                gns.append(gnorm)
                last_store_t = t
            if converged:
                return finish("converged")
            if done:
                return finish("max_time")
            if err_norm == 0.0:
                h = h_try * 5.0
            else:
                h = h_try * min(5.0, max(0.2, 0.9 * err_norm**-0.2))

        if h < opts.min_step * max(1.0, abs(t)):
            return finish("step_failure")


def integrate_flow(system, x0, t_end, opts: Optional[FlowOptions] = None) -> Trajectory:
    """Integrate the gradient descent flow from x0 up to time t_end.

    Stops early with status "converged" when both gradient-norm and phi
    tolerances are met; otherwise runs to t_end (status "max_time").
    A trajectory is returned even on "step_failure", truncated at the
    last accepted state.
    """
    opts = opts or FlowOptions()
    traj, _ = _integrate(system, x0, t_end, opts, stop_on_converged=True)
    return traj


def flow_at_times(system, x0, times, opts: Optional[FlowOptions] = None) -> np.ndarray:
    """States of the flow at exactly the requested times.

    ``times`` must be strictly increasing and nonnegative.  Early
    convergence stopping is disabled so every time is actually reached.
    Returns an array of shape (len(times), n_vars).
    """
    opts = opts or FlowOptions()
    times = [float(v) for v in times]
    if not times:
        return np.zeros((0, getattr(system, "n_vars", 0)))
    t_end = times[-1]
    if t_end == 0.0:
        x0 = _check_system(system, x0)
        return np.tile(x0, (len(times), 1))
    traj, landed = _integrate(
        system, x0, t_end, opts, landing_times=times, stop_on_converged=False
    )
    if traj.status == "step_failure":
        raise ConvergenceError(
            f"integration stalled at t={traj.t_final:g} before reaching all "
            f"requested times", traj,
        )
    return np.array([landed[v] for v in times])


@dataclass
class RetractResult:
    """Outcome of flowing an initial point down to the zero set."""

    y: np.ndarray
    t_reached: float
    phi_value: float
    grad_norm: float
    trajectory: Trajectory


def retract(system, x0, phi_tol: float = 1e-10, grad_tol: float = 1e-7,
            opts: Optional[FlowOptions] = None) -> RetractResult:
    """Flow x0 toward the zero set until phi and the gradient norm both
    drop below their tolerances.

    Raises ConvergenceError (with the partial trajectory attached) if the
    horizon ``opts.max_time`` is exhausted or stepping fails first.
    """
    opts = replace(opts or FlowOptions(), phi_tol=float(phi_tol),
                   grad_tol=float(grad_tol))
    traj, _ = _integrate(system, x0, opts.max_time, opts, stop_on_converged=True)
    if traj.status != "converged":
        raise ConvergenceError(
            f"retraction did not converge by t={traj.t_final:g} "
            f"(status {traj.status}, phi={traj.phi_final:.3e}, "
            f"grad_norm={traj.grad_norm_final:.3e})",
            traj,
        )
    return RetractResult(
        y=traj.x_final.copy(),
        t_reached=traj.t_final,
        phi_value=traj.phi_final,
        grad_norm=traj.grad_norm_final,
        trajectory=traj,
    )


@dataclass
class RetractionPath:
    """The deformation x -> flow state at time s/(1-s), for s in [0, 1].

    At s = 0 this is the identity; as s -> 1 the reparametrized time blows
    up and the path ends at the limit point on the zero set, so the whole
    family deforms the ambient space onto the zero set while fixing it
    pointwise.  ``states[i]`` is the point at parameter ``s[i]``; the row
    for s = 1 (when present) is the converged limit.
    """

    s: np.ndarray
    states: np.ndarray
    t_values: np.ndarray
    limit: Optional[np.ndarray] = None


def retraction_path(system, x0, samples: Union[int, Sequence[float]] = 11,
                    phi_tol: float = 1e-10, grad_tol: float = 1e-7,
                    opts: Optional[FlowOptions] = None) -> RetractionPath:
    """Sample the zero-set deformation at parameters s in [0, 1].

    ``samples`` is either a point count (uniform grid on [0, 1]) or an
    explicit increasing sequence of parameters.  Parameters below 1 map
    to the finite flow times t = s/(1-s); the parameter 1 maps to the
    retraction limit and triggers a full convergence run.
    """
    if isinstance(samples, (int, np.integer)):
        if samples < 2:
            raise ValueError("need at least 2 sample parameters")
        svals = np.linspace(0.0, 1.0, int(samples))
    else:
        svals = np.asarray(list(samples), dtype=float)
        if svals.size == 0:
            raise ValueError("need at least 1 sample parameter")
        if np.any(svals < 0) or np.any(svals > 1):
            raise ValueError("sample parameters must lie in [0, 1]")
        if np.any(np.diff(svals) <= 0):
            raise ValueError("sample parameters must be strictly increasing")
    opts = opts or FlowOptions()

    finite_s = svals[svals < 1.0]
    t_vals = finite_s / (1.0 - finite_s)
    with np.errstate(divide="ignore"):
        all_t = np.where(svals < 1.0, svals / (1.0 - svals), np.inf)

    x0 = _check_system(system, x0)
    states = []
    positive = [float(tv) for tv in t_vals if tv > 0]
    if positive:
        landed_states = flow_at_times(system, x0, positive, opts)
    hit = 0
    for tv in t_vals:
        if tv == 0.0:
            states.append(x0.copy())
        else:
            states.append(landed_states[hit])
            hit += 1

    limit = None
    if svals[-1] == 1.0:
        res = retract(system, x0, phi_tol=phi_tol, grad_tol=grad_tol, opts=opts)
        limit = res.y
        states.append(limit.copy())
    return RetractionPath(
        s=svals, states=np.array(states), t_values=all_t, limit=limit
    )


@dataclass
class DecayFit:
    """Least-squares power law fitted to the tail of phi along a flow.

    exponent/amplitude describe phi(t) ~ amplitude * t**exponent on the
    fitted tail.  sup_t_phi is the largest observed t * phi(t) over all
    positive-time samples with phi > 0, attained at t = arg_sup.
    """

    exponent: float
    amplitude: float
    sup_t_phi: float
    arg_sup: float
    n_tail: int


def decay_fit(traj: Trajectory, tail_fraction: float = 0.5) -> DecayFit:
    """Fit log phi against log t on the last ``tail_fraction`` of samples.

    Samples with t = 0 or with phi clamped at 0 carry no information for
    the fit and are dropped; if fewer than four usable samples remain the
    trajectory is already sitting on the zero set and
    AlreadyConvergedError is raised.
    """
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must lie in (0, 1]")
    mask = (traj.t > 0) & (traj.phi > 0)
    tv = traj.t[mask]
    pv = traj.phi[mask]
    if tv.size < 4:
        raise AlreadyConvergedError(
            f"only {tv.size} positive samples available, no decay tail to fit"
        )
    n_tail = max(2, int(math.ceil(tail_fraction * tv.size)))
    lt = np.log(tv[-n_tail:])
    lp = np.log(pv[-n_tail:])
    slope, intercept = np.polyfit(lt, lp, 1)
    prod = tv * pv
    k = int(np.argmax(prod))
    return DecayFit(
        exponent=float(slope),
        amplitude=float(np.exp(intercept)),
        sup_t_phi=float(prod[k]),
        arg_sup=float(tv[k]),
        n_tail=n_tail,
    )


def arclength_tail(traj: Trajectory, t_from: float) -> float:
    """Trapezoid estimate of the arc length of the flow past t_from.

    The speed along the flow equals the gradient norm, so this integrates
    the stored grad_norm column from t_from to the end of the trajectory.
    The value at t_from itself is linearly interpolated.  Accuracy is set
    by the storage density; integrate with a store_ratio close to 1 when
    a tight value matters.
    """
    t_from = float(t_from)
    if t_from < 0:
        raise ValueError("t_from must be nonnegative")
    if t_from >= traj.t_final:
        return 0.0
    mask = traj.t > t_from
    g0 = float(np.interp(t_from, traj.t, traj.grad_norm))
    ts = np.concatenate(([t_from], traj.t[mask]))
    gs = np.concatenate(([g0], traj.grad_norm[mask]))
    return float(np.trapezoid(gs, ts))
