"""Scale-invariant gradient inequalities for homogeneous energies.

For a nonnegative homogeneous polynomial phi of degree m >= 2 the
quantity

    |grad phi(x)|**(1+eps) * |x|**(1-(m-1)*eps) / phi(x)

is invariant under x -> lambda x whenever 0 < eps <= 1/(m-1): the
numerator scales like lambda**m, matching phi.  A positive lower bound C
over the unit sphere is therefore a global inequality

    |grad phi(x)|**(1+eps) * |x|**(1-(m-1)*eps) >= C * phi(x),

which is the engine behind algebraic decay rates of the descent flow.
This module estimates such constants by deterministic sphere scans, and
provides the sharper pointwise quantities available for moment energies
of commuting symmetric families, including the single-operator spectral
bound and the cube-against-square ratio for several operators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .groups import MomentMap, SelfAdjointBasis

__all__ = [
    "SphereSampler",
    "InequalityReport",
    "RatioScan",
    "NeemanRatio",
    "lojasiewicz_ratio",
    "lojasiewicz_scan",
    "neeman_ratio",
    "single_matrix_bound",
    "single_matrix_scan",
    "estimate_neeman_constant",
]

# Plastic-number reciprocals drive the 3-angle Kronecker lattice on S^3.
_PLASTIC = 1.3247179572447460
_DEFAULT_FLOOR = 1e-14


class SphereSampler:
    """Deterministic, well-spread point sets on unit spheres.

    The construction depends on the dimension: an offset angle grid on
    the circle, a Fibonacci spiral on S^2, a Kronecker lattice in Hopf
    coordinates on S^3 and seeded normalized Gaussians above that.
    Every call with the same (n_vars, count) returns the same points;
    results are cached because scans reuse large sets.
    """

    def __init__(self, seed: int = 0):
        self.seed = int(seed)
        self._cache = {}

    def points(self, n_vars: int, count: int) -> np.ndarray:
        if n_vars < 1 or count < 1:
            raise ValueError("need n_vars >= 1 and count >= 1")
        key = (n_vars, count)
        if key not in self._cache:
            self._cache[key] = self._build(n_vars, count)
        return self._cache[key]

    __call__ = points

    def _build(self, n: int, count: int) -> np.ndarray:
        if n == 1:
            pts = np.ones((count, 1))
            pts[1::2, 0] = -1.0
            return pts
        if n == 2:
            theta = 2 * np.pi * (np.arange(count) + 0.5) / count
            return np.column_stack([np.cos(theta), np.sin(theta)])
        if n == 3:
            k = np.arange(count)
            z = 1.0 - 2.0 * (k + 0.5) / count
            r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
            golden = np.pi * (3.0 - np.sqrt(5.0))
            theta = golden * k
            return np.column_stack([r * np.cos(theta), r * np.sin(theta), z])
        if n == 4:
            # Hopf coordinates: with u uniform in [0,1]^3 and
            # eta = asin(sqrt(u1)), the point
            # (cos xi1 cos eta, sin xi1 cos eta, cos xi2 sin eta,
            #  sin xi2 sin eta) is uniform on S^3.
            k = np.arange(1, count + 1)[:, None]
            alpha = np.array([1.0 / _PLASTIC, 1.0 / _PLASTIC**2,
                              1.0 / _PLASTIC**3])
            u = np.mod(0.5 + k * alpha[None, :], 1.0)
            eta = np.arcsin(np.sqrt(u[:, 0]))
            xi1 = 2 * np.pi * u[:, 1]
            xi2 = 2 * np.pi * u[:, 2]
            return np.column_stack([
                np.cos(xi1) * np.cos(eta),
                np.sin(xi1) * np.cos(eta),
                np.cos(xi2) * np.sin(eta),
                np.sin(xi2) * np.sin(eta),
            ])
        rng = np.random.default_rng([self.seed, n, count])
        pts = rng.standard_normal((count, n))
        norms = np.linalg.norm(pts, axis=1)
        # resample the (measure-zero) rows that landed too close to 0
        bad = norms < 1e-12
        while np.any(bad):
            pts[bad] = rng.standard_normal((int(bad.sum()), n))
            norms[bad] = np.linalg.norm(pts[bad], axis=1)
            bad = norms < 1e-12
        return pts / norms[:, None]


@dataclass
class InequalityReport:
    """Result of one constant estimate at a fixed exponent.

    c_estimate is the infimum of the scanned ratio (None when every
    sample point sat on the zero set); worst_point attains it.
    ``commuting`` is True/False for operator-family scans and None for
    plain polynomial scans, where no family is involved.
    """

    epsilon: float
    c_estimate: Optional[float]
    worst_point: Optional[np.ndarray]
    n_samples: int
    commuting: Optional[bool]
    vacuous_excluded: int

    def to_json_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "c_estimate": self.c_estimate,
            "worst_point": None if self.worst_point is None
            else [float(v) for v in self.worst_point],
            "n_samples": self.n_samples,
            "commuting": self.commuting,
            "vacuous_excluded": self.vacuous_excluded,
        }


def _epsilon_cap(degree: int) -> float:
    return 1.0 / (degree - 1)


def _check_epsilon(epsilon: float, degree: int) -> float:
    if degree < 2:
        raise ValueError(f"degree must be >= 2 for a gradient inequality, got {degree}")
    cap = _epsilon_cap(degree)
    eps = float(epsilon)
    # tiny slack so that e.g. eps = 1/3 passes for degree 4 despite rounding
    if not 0.0 < eps <= cap * (1 + 1e-12):
        raise ValueError(
            f"epsilon must lie in (0, {cap:.17g}] for degree {degree}, got {eps}"
        )
    return min(eps, cap)


def lojasiewicz_ratio(phi, epsilon: float, x) -> float:
    """The scale-invariant ratio at one point (inf on the zero set)."""
    eps = _check_epsilon(epsilon, phi.degree)
    x = np.asarray(x, dtype=float)
    val = float(phi.eval(x))
    if val <= 0.0:
        return math.inf
    gnorm = float(np.linalg.norm(phi.grad_eval(x)))
    r = float(np.linalg.norm(x))
    return gnorm ** (1 + eps) * r ** (1 - (phi.degree - 1) * eps) / val


def lojasiewicz_scan(phi, epsilons: Sequence[float], sampler: SphereSampler,
                     n_samples: int = 100_000,
                     floor_tol: float = _DEFAULT_FLOOR) -> list:
    """Estimate the inequality constant on the unit sphere for each
    exponent.

    By scale invariance the infimum over the sphere equals the global
    one, so the scan evaluates phi and its gradient on a deterministic
    spherical point set and takes the minimum of
    |grad phi|**(1+eps) / phi over points with phi above ``floor_tol``
    (on the sphere the norm factor is 1).  Points at or numerically on
    the zero set satisfy the inequality vacuously and are excluded, with
    the count reported.

    Returns one InequalityReport per exponent, in input order.
    """
    eps_list = [_check_epsilon(e, phi.degree) for e in epsilons]
    pts = sampler.points(phi.n_vars, n_samples)
    vals = phi.eval_batch(pts)
    gnorms = np.linalg.norm(phi.grad_eval_batch(pts), axis=1)
    mask = vals > floor_tol
    excluded = int(n_samples - mask.sum())
    out = []
    for eps in eps_list:
        if not np.any(mask):
            out.append(InequalityReport(eps, None, None, n_samples, None, excluded))
            continue
        ratios = gnorms[mask] ** (1 + eps) / vals[mask]
        k = int(np.argmin(ratios))
        out.append(InequalityReport(
            epsilon=eps,
            c_estimate=float(ratios[k]),
            worst_point=pts[mask][k].copy(),
            n_samples=int(n_samples),
            commuting=None,
            vacuous_excluded=excluded,
        ))
    return out


@dataclass
class NeemanRatio:
    """Pointwise comparison of the two sides of the commuting-family
    inequality

        C * (sum_ij c_i c_j <X_i v, X_j v>)**2  >=  (sum_i c_i**2)**3,

    with c_i = <X_i v, v>.  The double sum equals |sum_i c_i X_i v|**2,
    which is |grad phi(v)|**2 / 16 for the moment energy, and the right
    side is phi(v)**3, so ``ratio`` = lhs/rhs measures how much slack
    the point leaves for the constant (C must exceed 1/ratio at every
    nonvacuous point).
    """

    lhs: float
    rhs: float
    ratio: float
    vacuous: bool
    commuting: bool
    pairings: np.ndarray


def neeman_ratio(basis: SelfAdjointBasis, v) -> NeemanRatio:
    """Evaluate both sides of the cube-against-square inequality at v.

    The double-sum form and the squared-norm form of the left side are
    both computed and must agree to roundoff; a mismatch means the
    inputs are corrupt and raises ArithmeticError.
    """
    v = np.asarray(v, dtype=float)
    images = basis.mats @ v
    c = images @ v
    s = c @ images
    gram_form = float(c @ (images @ images.T) @ c)
    norm_form = float(s @ s)
    if abs(gram_form - norm_form) > 1e-9 * (1.0 + abs(gram_form)):
        raise ArithmeticError(
            f"double-sum identity violated: {gram_form!r} vs {norm_form!r}"
        )
    lhs = norm_form**2
    rhs = float(c @ c) ** 3
    vacuous = rhs == 0.0
    ratio = math.inf if vacuous else lhs / rhs
    return NeemanRatio(
        lhs=lhs, rhs=rhs, ratio=ratio, vacuous=vacuous,
        commuting=basis.commuting(), pairings=c,
    )


def single_matrix_bound(X, zero_tol: float = 1e-12) -> float:
    """Spectral lower bound a_k**2 / |a_1| for one symmetric operator.

    Order the eigenvalues by decreasing magnitude, a_1 the largest and
    a_k the smallest nonzero one (relative threshold ``zero_tol``).
    Expanding v in the eigenbasis shows

        |X v|**2 >= (a_k**2 / |a_1|) * |<X v, v>|

    for every v, since |a_i| * |a_1| >= a_k**2 termwise.  The bound is
    attained at the a_k eigenvector.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError("operator must be a square matrix")
    if np.max(np.abs(X - X.T)) > 1e-12 * max(1.0, float(np.max(np.abs(X)))):
        raise ValueError("operator must be symmetric")
    eigs = np.linalg.eigvalsh(X)
    mags = np.abs(eigs)
    a1 = float(np.max(mags))
    if a1 == 0.0:
        raise ValueError("zero operator has no spectral bound")
    nonzero = mags[mags > zero_tol * a1]
    ak = float(np.min(nonzero))
    return ak * ak / a1


@dataclass
class RatioScan:
    """Infimum of a pointwise ratio over a spherical sample."""

    min_ratio: Optional[float]
    worst_point: Optional[np.ndarray]
    n_samples: int
    vacuous_excluded: int


def single_matrix_scan(X, sampler: SphereSampler, n_samples: int = 100_000,
                       floor_tol: float = 1e-6) -> RatioScan:
    """Scan |X v|**2 / |<X v, v>| over the unit sphere.

    A point is excluded as vacuous when |<X v, v>| <= floor_tol times
    |v|^T |X| |v|, that is, when forming the pairing cancels away more
    than 1/floor_tol of its magnitude.  There the ratio is a 0/0 form
    that double precision cannot resolve, while the inequality it feeds
    holds vacuously.  Kept ratios are accurate to roughly machine
    epsilon over floor_tol, so the default supports comparisons against
    single_matrix_bound(X) at 1e-9 margins.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    pts = sampler.points(n, n_samples)
    Xv = pts @ X.T
    q = np.einsum("ni,ni->n", pts, Xv)
    r2 = np.einsum("ni,ni->n", Xv, Xv)
    apts = np.abs(pts)
    mag = np.einsum("ni,ni->n", apts, apts @ np.abs(X).T)
    mask = np.abs(q) > floor_tol * mag
    excluded = int(n_samples - mask.sum())
    if not np.any(mask):
        return RatioScan(None, None, int(n_samples), excluded)
    ratios = r2[mask] / np.abs(q[mask])
    k = int(np.argmin(ratios))
    return RatioScan(
        min_ratio=float(ratios[k]),
        worst_point=pts[mask][k].copy(),
        n_samples=int(n_samples),
        vacuous_excluded=excluded,
    )


def estimate_neeman_constant(basis: SelfAdjointBasis, sampler: SphereSampler,
                             n_samples: int = 100_000,
                             floor_tol: float = _DEFAULT_FLOOR
                             ) -> InequalityReport:
    """Scan the moment energy of an operator family at exponent 1/3.

    The moment energy has degree 4, so the largest admissible exponent
    is 1/3 and the scanned ratio is |grad phi|**(4/3) / phi on the
    sphere.  A positive infimum c certifies
    phi**3 <= |grad phi|**4 / c**3, the power form of the commuting
    family inequality (with C = 256 / c**3 in the cube form).  The
    report records whether the family actually commutes; for families
    that do not, the estimate is still a valid scan but no positive
    lower bound is guaranteed to exist.
    """
    mm = MomentMap(basis)
    eps = _epsilon_cap(4)
    pts = sampler.points(basis.n, n_samples)
    vals = mm.eval_batch(pts)
    gnorms = np.linalg.norm(mm.grad_eval_batch(pts), axis=1)
    mask = vals > floor_tol
    excluded = int(n_samples - mask.sum())
    if not np.any(mask):
        return InequalityReport(eps, None, None, int(n_samples),
                                basis.commuting(), excluded)
    ratios = gnorms[mask] ** (1 + eps) / vals[mask]
    k = int(np.argmin(ratios))
    return InequalityReport(
        epsilon=eps,
        c_estimate=float(ratios[k]),
        worst_point=pts[mask][k].copy(),
        n_samples=int(n_samples),
        commuting=basis.commuting(),
        vacuous_excluded=excluded,
    )
