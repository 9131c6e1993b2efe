import io
import math

import numpy as np
import pytest

from homflow import (
    AlreadyConvergedError,
    ConvergenceError,
    FlowOptions,
    arclength_tail,
    decay_fit,
    flow_at_times,
    integrate_flow,
    retract,
    retraction_path,
)
from homflow import fixtures as fx

NO_STOP = FlowOptions(grad_tol=0.0, phi_tol=0.0)


def test_linear_flow_matches_exponential():
    # phi = |x|^2 gives x(t) = exp(-2t) x0 exactly
    p = fx.norm_square(2)
    x0 = np.array([1.0, -0.5])
    times = [0.25, 0.5, 1.0, 2.0, 3.5, 5.0]
    states = flow_at_times(p, x0, times)
    exact = np.array([np.exp(-2.0 * t) * x0 for t in times])
    assert np.max(np.abs(states - exact)) < 1e-8


def test_quartic_axis_flow_matches_closed_form():
    # phi = (x1^2 - x2^2)^2 / 2 from (a, 0): a(t) = a0 / sqrt(1 + 4 a0^2 t)
    p = fx.pinch_quartic()
    a0 = 1.3
    times = [0.1, 0.5, 1.0, 5.0, 20.0, 50.0]
    states = flow_at_times(p, np.array([a0, 0.0]), times)
    exact = np.array([[a0 / math.sqrt(1 + 4 * a0**2 * t), 0.0] for t in times])
    assert np.max(np.abs(states - exact)) < 1e-8


def test_norm_and_phi_monotone_along_flow():
    rng = np.random.default_rng(17)
    systems = [fx.variety_quartic(), fx.pinch_quartic(),
               fx.random_sos_quartic(3, rng)]
    for p in systems:
        for _ in range(5):
            x0 = rng.standard_normal(p.n_vars)
            traj = integrate_flow(p, x0, 3.0, NO_STOP)
            norms = np.linalg.norm(traj.states, axis=1)
            assert np.all(np.diff(norms) <= 1e-9 * norms[:-1] + 1e-12)
            # phi lives near its roundoff floor once the trajectory hits
            # the zero set, hence the absolute allowance
            assert np.all(np.diff(traj.phi) <= 1e-9 * traj.phi[:-1] + 1e-10)
            assert traj.max_norm_uptick <= 1e-9
            assert traj.max_phi_uptick <= 1e-9


def test_fixed_point_short_circuits():
    p = fx.variety_quartic()
    traj = integrate_flow(p, np.zeros(2), 10.0)
    assert traj.status == "converged"
    assert len(traj) == 1
    assert traj.t_final == 0.0

    # a nonzero start on the zero set of x1^4 is also a fixed point
    traj2 = integrate_flow(fx.axis_quartic(), np.array([0.0, 2.0]), 10.0)
    assert traj2.status == "converged"
    assert np.array_equal(traj2.x_final, [0.0, 2.0])


def test_statuses_max_time_and_converged():
    p = fx.norm_square(2)
    x0 = np.array([1.0, 1.0])
    short = integrate_flow(p, x0, 1.0)
    assert short.status == "max_time"
    assert short.t_final == pytest.approx(1.0)
    longer = integrate_flow(p, x0, 50.0)
    assert longer.status == "converged"
    assert longer.t_final < 20.0
    assert longer.grad_norm_final <= 1e-7
    assert longer.phi_final <= 1e-10


def test_step_failure_on_max_steps():
    opts = FlowOptions(max_steps=3, grad_tol=0.0, phi_tol=0.0)
    traj = integrate_flow(fx.variety_quartic(), np.array([1.0, 0.5]), 1e6, opts)
    assert traj.status == "step_failure"
    assert len(traj) >= 1


class _Expanding:
    """Fake system whose descent direction grows the norm; the
    monotonicity guard must refuse to integrate it."""

    n_vars = 2

    def eval(self, x):
        return 0.0

    def grad_eval(self, x):
        return -np.asarray(x, dtype=float)


def test_monotone_guard_stops_norm_growth():
    opts = FlowOptions(max_steps=2000, grad_tol=0.0, phi_tol=0.0)
    traj = integrate_flow(_Expanding(), np.array([1.0, 0.0]), 10.0, opts)
    assert traj.status == "step_failure"
    assert traj.max_norm_uptick <= opts.monotone_tol
    assert traj.n_rejected > 0
    # essentially no forward progress was accepted
    assert traj.t_final < 1e-4


def test_flow_at_times_validation_and_edges():
    p = fx.norm_square(2)
    x0 = np.array([1.0, 0.0])
    with pytest.raises(ValueError):
        flow_at_times(p, x0, [1.0, 0.5])
    with pytest.raises(ValueError):
        flow_at_times(p, x0, [-1.0, 2.0])
    assert flow_at_times(p, x0, []).shape == (0, 2)
    only_zero = flow_at_times(p, x0, [0.0])
    assert np.array_equal(only_zero, [[1.0, 0.0]])
    with pytest.raises(ValueError):
        integrate_flow(p, x0, 0.0)
    with pytest.raises(ValueError):
        integrate_flow(p, np.array([1.0]), 1.0)
    with pytest.raises(ValueError):
        integrate_flow(p, np.array([np.nan, 0.0]), 1.0)


def test_flow_at_times_lands_exactly():
    p = fx.variety_quartic()
    x0 = np.array([0.9, -0.4])
    a = flow_at_times(p, x0, [1.0, 2.0])
    b = flow_at_times(p, x0, [0.5, 1.0, 2.0])
    assert np.max(np.abs(a[0] - b[1])) < 1e-9
    assert np.max(np.abs(a[1] - b[2])) < 1e-9


def test_trajectory_csv_format_and_roundtrip():
    p = fx.norm_square(3)
    traj = integrate_flow(p, np.array([1.0, -2.0, 0.5]), 2.0, NO_STOP)
    buf = io.StringIO()
    traj.to_csv(buf)
    lines = buf.getvalue().strip().split("\n")
    assert lines[0] == "t,x_1,x_2,x_3,phi,grad_norm"
    assert len(lines) == len(traj) + 1
    row = np.array([float(v) for v in lines[1].split(",")])
    assert row[0] == traj.t[0]
    assert np.array_equal(row[1:4], traj.states[0])
    assert row[4] == traj.phi[0]
    assert row[5] == traj.grad_norm[0]
    # 17 significant digits round-trip the final row exactly too
    last = np.array([float(v) for v in lines[-1].split(",")])
    assert last[0] == traj.t[-1]
    assert np.array_equal(last[1:4], traj.states[-1])


def test_retract_reaches_zero_set_and_shrinks():
    p = fx.variety_quartic()
    rng = np.random.default_rng(23)
    for _ in range(5):
        x0 = rng.uniform(-1, 1, size=2)
        res = retract(p, x0, phi_tol=1e-10, grad_tol=1e-7)
        assert res.phi_value <= 1e-10
        assert res.grad_norm <= 1e-7
        assert np.linalg.norm(res.y) <= np.linalg.norm(x0) * (1 + 1e-9)
        assert res.trajectory.status == "converged"
        assert res.t_reached == res.trajectory.t_final


def test_retract_failure_carries_trajectory():
    p = fx.variety_quartic()
    opts = FlowOptions(max_time=1.0)
    with pytest.raises(ConvergenceError) as exc_info:
        retract(p, np.array([1.0, -0.8]), opts=opts)
    traj = exc_info.value.trajectory
    assert traj is not None
    assert traj.status == "max_time"
    assert traj.t_final == pytest.approx(1.0)


def test_retraction_path_structure():
    p = fx.variety_quartic()
    x0 = np.array([0.8, -0.5])
    path = retraction_path(p, x0, samples=6)
    assert np.array_equal(path.s, np.linspace(0, 1, 6))
    assert np.array_equal(path.states[0], x0)
    finite = path.t_values[:-1]
    assert np.allclose(finite, path.s[:-1] / (1 - path.s[:-1]))
    assert math.isinf(path.t_values[-1])
    assert path.limit is not None
    assert p.eval(path.limit) <= 1e-10
    # the energy decreases monotonically along the deformation parameter
    vals = np.array([p.eval(x) for x in path.states])
    assert np.all(np.diff(vals) <= 1e-9 * vals[:-1] + 1e-12)


def test_retraction_path_explicit_parameters_and_validation():
    p = fx.norm_square(2)
    x0 = np.array([1.0, 0.0])
    path = retraction_path(p, x0, samples=[0.0, 0.5, 0.9])
    assert path.limit is None
    assert path.states.shape == (3, 2)
    exact = np.exp(-2.0 * np.array([0.0, 1.0, 9.0]))[:, None] * x0[None, :]
    assert np.max(np.abs(path.states - exact)) < 1e-7
    with pytest.raises(ValueError):
        retraction_path(p, x0, samples=1)
    with pytest.raises(ValueError):
        retraction_path(p, x0, samples=[0.5, 0.4])
    with pytest.raises(ValueError):
        retraction_path(p, x0, samples=[0.1, 1.2])


def test_decay_fit_quartic_tail():
    # H(t) = 1 / (2 (1 + 4t)^2) decays like t^-2 with amplitude 1/32
    p = fx.pinch_quartic()
    opts = FlowOptions(grad_tol=0.0, phi_tol=0.0, store_ratio=1.05)
    traj = integrate_flow(p, np.array([1.0, 0.0]), 1e4, opts)
    fit = decay_fit(traj, tail_fraction=0.5)
    assert fit.exponent == pytest.approx(-2.0, abs=0.05)
    assert fit.amplitude == pytest.approx(1.0 / 32.0, rel=0.05)
    # global sup of t * H(t) is 1/32, attained at t = 1/4
    assert fit.sup_t_phi == pytest.approx(1.0 / 32.0, rel=0.05)
    assert 0.05 < fit.arg_sup < 1.0


def test_decay_fit_rejects_flat_trajectories():
    p = fx.axis_quartic()
    traj = integrate_flow(p, np.array([0.0, 1.0]), 10.0)  # fixed point
    with pytest.raises(AlreadyConvergedError):
        decay_fit(traj)
    with pytest.raises(ValueError):
        decay_fit(integrate_flow(p, np.array([1.0, 0.0]), 5.0, NO_STOP),
                  tail_fraction=0.0)


def test_arclength_tail_matches_exponential_integral():
    # |grad| along the |x|^2 flow from (1,0) is 2 exp(-2t)
    p = fx.norm_square(2)
    opts = FlowOptions(grad_tol=0.0, phi_tol=0.0, store_ratio=1.01)
    traj = integrate_flow(p, np.array([1.0, 0.0]), 12.0, opts)
    val = arclength_tail(traj, 1.0)
    assert val == pytest.approx(math.exp(-2.0), rel=1e-2)
    # tails shrink as the start moves right, and vanish past the end
    assert arclength_tail(traj, 3.0) < val
    assert arclength_tail(traj, traj.t_final) == 0.0
    assert arclength_tail(traj, 100.0) == 0.0
    with pytest.raises(ValueError):
        arclength_tail(traj, -1.0)


def test_flow_options_override_tolerances():
    p = fx.norm_square(2)
    x0 = np.array([1.0, 0.0])
    loose = retract(p, x0, phi_tol=1e-6, grad_tol=1e-3)
    tight = retract(p, x0, phi_tol=1e-12, grad_tol=1e-9)
    assert loose.t_reached < tight.t_reached
    assert tight.phi_value <= 1e-12
