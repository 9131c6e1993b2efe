import numpy as np
import pytest

import homflow.fixtures as fx
from homflow import (
    HomogeneousPolynomial,
    MomentMap,
    SphereSampler,
    estimate_neeman_constant,
    lojasiewicz_ratio,
    lojasiewicz_scan,
    neeman_ratio,
    single_matrix_bound,
    single_matrix_scan,
)


class TestSphereSampler:

    def test_unit_norm_and_shape(self):
        s = SphereSampler(seed=0)
        for n in range(1, 7):
            pts = s.points(n, 500)
            assert pts.shape == (500, n)
            assert np.max(np.abs(np.linalg.norm(pts, axis=1) - 1.0)) <= 1e-12

    def test_deterministic_and_cached(self):
        a = SphereSampler(seed=4).points(3, 200)
        b = SphereSampler(seed=4).points(3, 200)
        assert np.array_equal(a, b)
        s = SphereSampler(seed=4)
        assert s.points(5, 100) is s.points(5, 100)

    def test_one_dimension_hits_both_signs(self):
        pts = SphereSampler(seed=1).points(1, 10)
        assert set(np.unique(pts)) == {-1.0, 1.0}

    def test_validation(self):
        s = SphereSampler(seed=0)
        with pytest.raises(ValueError):
            s.points(0, 10)
        with pytest.raises(ValueError):
            s.points(2, 0)


class TestLojasiewiczScan:

    def test_norm_square_closed_form(self):
        # gradient 2x on the sphere gives ratio 4 everywhere at eps = 1
        reports = lojasiewicz_scan(fx.norm_square(3), [1.0],
                                   SphereSampler(seed=2), n_samples=2000)
        (rep,) = reports
        assert rep.epsilon == 1.0
        assert rep.c_estimate == pytest.approx(4.0, rel=1e-12)

    def test_axis_quartic_closed_form(self):
        # x1**4 has constant ratio 4**(4/3) off its zero set
        reports = lojasiewicz_scan(fx.axis_quartic(), [1.0 / 3.0],
                                   SphereSampler(seed=2), n_samples=20_000)
        (rep,) = reports
        assert rep.c_estimate == pytest.approx(4.0 ** (4.0 / 3.0), rel=1e-9)

    def test_pinch_quartic_closed_form(self):
        reports = lojasiewicz_scan(fx.pinch_quartic(), [1.0 / 3.0],
                                   SphereSampler(seed=2), n_samples=200_000)
        (rep,) = reports
        assert rep.c_estimate == pytest.approx(2.0 ** (7.0 / 3.0), rel=1e-3)

    def test_multiple_epsilons_in_order(self):
        eps = [0.1, 1.0 / 3.0, 0.25]
        reports = lojasiewicz_scan(fx.pinch_quartic(), eps,
                                   SphereSampler(seed=0), n_samples=1000)
        assert [r.epsilon for r in reports] == pytest.approx(eps)

    def test_epsilon_cap(self):
        phi = fx.axis_quartic()  # degree 4, cap 1/3
        for bad in (0.34, 0.0, -0.1):
            with pytest.raises(ValueError):
                lojasiewicz_scan(phi, [bad], SphereSampler(seed=0),
                                 n_samples=10)
        lin = HomogeneousPolynomial(2, 1, {(1, 0): 1.0})
        with pytest.raises(ValueError):
            lojasiewicz_scan(lin, [1.0], SphereSampler(seed=0), n_samples=10)

    def test_vacuous_exclusion(self):
        # raising the floor far above max(phi) empties the scan
        reports = lojasiewicz_scan(fx.axis_quartic(), [1.0 / 3.0],
                                   SphereSampler(seed=3), n_samples=500,
                                   floor_tol=10.0)
        (rep,) = reports
        assert rep.c_estimate is None
        assert rep.worst_point is None
        assert rep.vacuous_excluded == 500

    def test_zero_polynomial_is_all_vacuous(self):
        zero = HomogeneousPolynomial.zero(2, 4)
        (rep,) = lojasiewicz_scan(zero, [1.0 / 3.0],
                                  SphereSampler(seed=0), n_samples=50)
        assert rep.c_estimate is None
        assert rep.vacuous_excluded == 50

    def test_commuting_flag_absent_for_polynomials(self):
        (rep,) = lojasiewicz_scan(fx.norm_square(2), [1.0],
                                  SphereSampler(seed=0), n_samples=50)
        assert rep.commuting is None

    def test_report_json_keys(self):
        (rep,) = lojasiewicz_scan(fx.norm_square(2), [1.0],
                                  SphereSampler(seed=0), n_samples=50)
        d = rep.to_json_dict()
        assert set(d) == {"epsilon", "c_estimate", "worst_point",
                          "n_samples", "commuting", "vacuous_excluded"}
        assert d["n_samples"] == 50
        assert isinstance(d["worst_point"], list)

    def test_ratio_scale_invariance(self):
        phi = fx.pinch_quartic()
        rng = np.random.default_rng(6)
        for _ in range(20):
            x = rng.standard_normal(2)
            if phi.eval(x) < 1e-12:
                continue
            r1 = lojasiewicz_ratio(phi, 1.0 / 3.0, x)
            for lam in (0.1, 3.0, 17.0):
                r2 = lojasiewicz_ratio(phi, 1.0 / 3.0, lam * x)
                assert r2 == pytest.approx(r1, rel=1e-9)

    def test_ratio_on_zero_set_is_inf(self):
        assert lojasiewicz_ratio(fx.pinch_quartic(), 1.0 / 3.0,
                                 np.array([1.0, 1.0])) == np.inf


class TestNeemanRatio:

    def test_frozen_values_diag_torus(self):
        r = neeman_ratio(fx.diag_torus_basis(), np.array([1.0, 0.0]))
        assert r.lhs == pytest.approx(1.0 / 16.0, rel=1e-12)
        assert r.rhs == pytest.approx(1.0 / 8.0, rel=1e-12)
        assert r.ratio == pytest.approx(0.5, rel=1e-12)
        assert not r.vacuous
        assert r.commuting
        assert r.pairings == pytest.approx([1.0 / np.sqrt(2.0)])

    def test_frozen_values_full_diag(self):
        basis = fx.full_diag_basis(2)
        r0 = neeman_ratio(basis, np.array([1.0, 0.0]))
        assert r0.lhs == pytest.approx(1.0, rel=1e-12)
        assert r0.rhs == pytest.approx(1.0, rel=1e-12)
        assert r0.ratio == pytest.approx(1.0, rel=1e-12)
        r1 = neeman_ratio(basis, np.array([1.0, 1.0]))
        assert r1.lhs == pytest.approx(4.0, rel=1e-12)
        assert r1.rhs == pytest.approx(8.0, rel=1e-12)
        assert r1.ratio == pytest.approx(0.5, rel=1e-12)

    def test_vacuous_direction(self):
        # the pairing of diag(1,-1) vanishes on the diagonal; integer
        # coordinates keep the cancellation exact in floating point
        r = neeman_ratio(fx.diag_torus_basis(), np.array([1.0, 1.0]))
        assert r.vacuous
        assert r.ratio == np.inf
        assert r.lhs == pytest.approx(0.0, abs=1e-14)

    def test_noncommuting_flag(self):
        r = neeman_ratio(fx.noncommuting_pair(), np.array([1.0, 0.5]))
        assert not r.commuting

    def test_sides_match_moment_energy(self):
        # rhs is phi(v)**3 and sqrt(lhs) is |grad phi(v)|**2 / 16
        rng = np.random.default_rng(8)
        basis = fx.random_commuting_basis(3, 2, rng)
        mm = MomentMap(basis)
        for _ in range(10):
            v = rng.standard_normal(3)
            r = neeman_ratio(basis, v)
            assert r.rhs == pytest.approx(mm.eval(v) ** 3, rel=1e-9,
                                          abs=1e-12)
            gn2 = float(np.dot(mm.grad_eval(v), mm.grad_eval(v)))
            assert 16.0 * np.sqrt(r.lhs) == pytest.approx(gn2, rel=1e-9,
                                                          abs=1e-12)

    def test_positive_infimum_for_commuting_family(self):
        rng = np.random.default_rng(9)
        basis = fx.random_commuting_basis(3, 2, rng)
        worst = np.inf
        seen = 0
        for _ in range(300):
            v = rng.standard_normal(3)
            v /= np.linalg.norm(v)
            r = neeman_ratio(basis, v)
            if not r.vacuous:
                worst = min(worst, r.ratio)
                seen += 1
        assert seen > 200
        assert 0.0 < worst < np.inf

    def test_validation(self):
        with pytest.raises(ValueError):
            neeman_ratio(fx.diag_torus_basis(), np.array([1.0, 0.0, 0.0]))


class TestSingleMatrixBound:

    def test_frozen_values(self):
        assert single_matrix_bound(np.diag([2.0, 1.0, 0.0])) \
            == pytest.approx(0.5, rel=1e-12)
        assert single_matrix_bound(np.eye(3)) == pytest.approx(1.0, rel=1e-12)
        assert single_matrix_bound(np.diag([1.0, -1.0])) \
            == pytest.approx(1.0, rel=1e-12)
        assert single_matrix_bound(np.diag([-3.0, 2.0, 0.5])) \
            == pytest.approx(0.25 / 3.0, rel=1e-10)

    def test_basis_independent(self):
        rng = np.random.default_rng(2)
        eigs = np.array([2.5, -1.0, 0.3, 0.0])
        Q = fx.random_orthogonal(4, rng)
        X = Q @ np.diag(eigs) @ Q.T
        X = 0.5 * (X + X.T)
        assert single_matrix_bound(X) == pytest.approx(0.09 / 2.5, rel=1e-9)

    def test_zero_tol_effect(self):
        X = np.diag([1.0, 1e-13])
        assert single_matrix_bound(X) == pytest.approx(1.0, rel=1e-9)
        assert single_matrix_bound(X, zero_tol=1e-15) \
            == pytest.approx(1e-26, rel=1e-6)

    def test_validation(self):
        with pytest.raises(ValueError):
            single_matrix_bound(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            single_matrix_bound(np.array([[0.0, 1.0], [0.0, 0.0]]))
        with pytest.raises(ValueError):
            single_matrix_bound(np.zeros((2, 3)))

    def test_scan_dominates_bound(self):
        rng = np.random.default_rng(10)
        sampler = SphereSampler(seed=10)
        for _ in range(10):
            d = int(rng.integers(2, 6))
            eigs = rng.uniform(-2, 2, size=d)
            eigs[np.abs(eigs) < 0.1] = 0.0
            if np.all(eigs == 0.0):
                eigs[0] = 1.0
            Q = fx.random_orthogonal(d, rng)
            X = Q @ np.diag(eigs) @ Q.T
            X = 0.5 * (X + X.T)
            scan = single_matrix_scan(X, sampler, n_samples=50_000)
            assert scan.min_ratio >= single_matrix_bound(X) - 1e-9
            assert scan.n_samples == 50_000

    def test_scan_tight_for_balanced_spectrum(self):
        # for diag(1,-1) the ratio 1/|cos 2t| bottoms out at the bound
        X = np.diag([1.0, -1.0])
        scan = single_matrix_scan(X, SphereSampler(seed=3),
                                  n_samples=100_000)
        assert scan.min_ratio == pytest.approx(single_matrix_bound(X),
                                               rel=1e-6)

    def test_scan_vacuous_exclusion(self):
        # the pairing of diag(1,-1) only vanishes on the diagonals, which
        # the offset angle grid never hits exactly
        scan = single_matrix_scan(np.diag([1.0, -1.0]), SphereSampler(seed=0),
                                  n_samples=1000, floor_tol=0.5)
        assert scan.vacuous_excluded > 0
        assert scan.min_ratio >= 1.0


class TestEstimateNeemanConstant:

    def test_frozen_diag_torus(self):
        # the moment energy of diag(1,-1)/sqrt(2) is the pinch quartic
        rep = estimate_neeman_constant(fx.diag_torus_basis(),
                                       SphereSampler(seed=5),
                                       n_samples=200_000)
        assert rep.epsilon == pytest.approx(1.0 / 3.0)
        assert rep.commuting is True
        assert rep.c_estimate == pytest.approx(2.0 ** (7.0 / 3.0), rel=1e-3)

    def test_matches_polynomial_scan(self):
        rng = np.random.default_rng(12)
        basis = fx.random_commuting_basis(3, 2, rng)
        rep = estimate_neeman_constant(basis, SphereSampler(seed=6),
                                       n_samples=20_000)
        phi = MomentMap(basis).to_polynomial()
        (poly_rep,) = lojasiewicz_scan(phi, [1.0 / 3.0],
                                       SphereSampler(seed=6),
                                       n_samples=20_000)
        assert rep.c_estimate == pytest.approx(poly_rep.c_estimate, rel=1e-9)

    def test_noncommuting_flagged(self):
        rep = estimate_neeman_constant(fx.noncommuting_pair(),
                                       SphereSampler(seed=5),
                                       n_samples=5000)
        assert rep.commuting is False
