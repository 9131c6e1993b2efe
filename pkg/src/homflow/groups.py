"""Linear group actions, moment-map energies and symmetry tools.

The setting is a reductive matrix group acting on R^n, stable under
transpose.  Its Lie algebra splits into symmetric and antisymmetric
parts under the trace inner product tr(P Q^T).  The symmetric part
drives a degree-4 energy

    phi(v) = sum_i <X_i v, v>**2 = tr(P(v v^T)^2),

where {X_i} is a trace-orthonormal basis of the symmetric part and P is
the orthogonal projection onto the Lie algebra.  Its gradient

    grad phi(v) = 4 P(v v^T) v = 4 sum_i <X_i v, v> X_i v

is tangent to the orbit through v, so the descent flow moves v inside
the orbit closure.  Zeros of the gradient are exactly the points where
every <X_i v, v> vanishes, which characterizes minimal-norm vectors in
an orbit; both facts have direct numeric probes below.

Compact symmetry groups (finite groups of orthogonal matrices, or tori
of rotations) enter through exact Haar averaging of polynomials and
through equivariance checks of the flow itself.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import expm

from .flow import FlowOptions, Trajectory, flow_at_times, retract
from .poly import HomogeneousPolynomial, compose_linear

__all__ = [
    "SelfAdjointBasis",
    "orthonormalize_basis",
    "project_lie",
    "MomentMap",
    "moment_phi",
    "moment_grad",
    "moment_phi_projected",
    "moment_grad_projected",
    "tangent_residual",
    "CriticalityReport",
    "criticality",
    "MinNormReport",
    "min_norm_check",
    "CompactGroupSampler",
    "average_phi_K",
    "EquivarianceReport",
    "equivariance_check",
    "OrbitLimitResult",
    "orbit_limit",
]

_SYM_TOL = 1e-12
_ORTHO_TOL = 1e-10


def trace_inner(P, Q) -> float:
    """tr(P Q^T), the Frobenius pairing."""
    return float(np.sum(np.asarray(P) * np.asarray(Q)))


class SelfAdjointBasis:
    """Trace-orthonormal basis of the symmetric part of a Lie algebra.

    Parameters
    ----------
    sym_mats : sequence of (n, n) arrays
        Symmetric matrices, orthonormal under tr(P Q^T).
    antisym_mats : sequence of (n, n) arrays, optional
        Orthonormal antisymmetric complement.  Only needed when
        projections onto the full algebra should include it; the
        moment-map formulas never see it because v v^T is symmetric.
    """

    def __init__(self, sym_mats, antisym_mats=(), check: bool = True):
        mats = np.array([np.asarray(m, dtype=float) for m in sym_mats])
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValueError("basis elements must be square matrices")
        if mats.shape[0] == 0:
            raise ValueError("need at least one symmetric basis element")
        anti = (
            np.array([np.asarray(m, dtype=float) for m in antisym_mats])
            if len(antisym_mats)
            else np.zeros((0, mats.shape[1], mats.shape[1]))
        )
        if check:
            for i, X in enumerate(mats):
                if np.max(np.abs(X - X.T)) > _SYM_TOL:
                    raise ValueError(f"basis element {i} is not symmetric")
            for i, A in enumerate(anti):
                if np.max(np.abs(A + A.T)) > _SYM_TOL:
                    raise ValueError(f"complement element {i} is not antisymmetric")
            gram = np.einsum("aij,bij->ab", mats, mats)
            if np.max(np.abs(gram - np.eye(mats.shape[0]))) > _ORTHO_TOL:
                raise ValueError("symmetric basis is not trace-orthonormal")
            if anti.shape[0]:
                agram = np.einsum("aij,bij->ab", anti, anti)
                if np.max(np.abs(agram - np.eye(anti.shape[0]))) > _ORTHO_TOL:
                    raise ValueError("antisymmetric complement is not orthonormal")
        self.mats = mats
        self.antisym = anti
        self.n = mats.shape[1]
        self.k = mats.shape[0]

    def __len__(self):
        return self.k

    def __repr__(self):
        return (
            f"SelfAdjointBasis({self.k} symmetric + {self.antisym.shape[0]} "
            f"antisymmetric on R^{self.n})"
        )

    def pairings(self, v) -> np.ndarray:
        """The vector of <X_i v, v> over the symmetric basis."""
        v = np.asarray(v, dtype=float)
        return np.einsum("kij,j,i->k", self.mats, v, v)

    def commuting(self, tol: float = 1e-10) -> bool:
        """True when every pair of symmetric basis elements commutes."""
        for i in range(self.k):
            for j in range(i + 1, self.k):
                C = self.mats[i] @ self.mats[j] - self.mats[j] @ self.mats[i]
                if np.max(np.abs(C)) > tol:
                    return False
        return True


def orthonormalize_basis(generators, rank_tol: float = 1e-10) -> SelfAdjointBasis:
    """Build a SelfAdjointBasis from arbitrary algebra generators.

    Each generator is split into its symmetric and antisymmetric halves
    (X +- X^T)/2; each family is then Gram-Schmidt orthonormalized under
    the trace inner product, dropping directions whose remaining norm
    falls below ``rank_tol`` times the largest generator norm.

    The generating set must be transpose stable for the split halves to
    span the same algebra; this routine assumes it and never checks
    closure under brackets.
    """
    gens = [np.asarray(g, dtype=float) for g in generators]
    if not gens:
        raise ValueError("need at least one generator")
    n = gens[0].shape[0]
    for g in gens:
        if g.shape != (n, n):
            raise ValueError("generators must be square matrices of equal size")
    scale = max(np.linalg.norm(g) for g in gens)
    if scale == 0:
        raise ValueError("all generators are zero")
    thresh = rank_tol * scale

    def gram_schmidt(cands):
        basis = []
        for M in cands:
            for B in basis:
                M = M - trace_inner(M, B) * B
            # second pass for numerical orthogonality
            for B in basis:
                M = M - trace_inner(M, B) * B
            nrm = np.linalg.norm(M)
            if nrm > thresh:
                basis.append(M / nrm)
        return basis

    sym = gram_schmidt([(g + g.T) / 2 for g in gens])
    anti = gram_schmidt([(g - g.T) / 2 for g in gens])
    if not sym:
        raise ValueError(
            "generators have no symmetric part; the moment energy would vanish"
        )
    return SelfAdjointBasis(sym, anti, check=True)


def project_lie(basis: SelfAdjointBasis, M) -> np.ndarray:
    """Orthogonal projection of a matrix onto the spanned algebra.

    Uses the symmetric basis and, when present, the antisymmetric
    complement.  For symmetric input the complement contributes nothing.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (basis.n, basis.n):
        raise ValueError(f"matrix must have shape ({basis.n}, {basis.n})")
    coefs = np.einsum("kij,ij->k", basis.mats, M)
    out = np.einsum("k,kij->ij", coefs, basis.mats)
    if basis.antisym.shape[0]:
        acoefs = np.einsum("kij,ij->k", basis.antisym, M)
        out = out + np.einsum("k,kij->ij", acoefs, basis.antisym)
    return out


class MomentMap:
    """The energy v -> sum_i <X_i v, v>**2 with its exact gradient.

    Implements the same evaluation interface as HomogeneousPolynomial
    (n_vars, eval, grad_eval and their batch forms), so the flow engine
    accepts it directly.  ``to_polynomial`` expands it into an explicit
    degree-4 polynomial when coefficients are needed.
    """

    def __init__(self, basis: SelfAdjointBasis):
        self.basis = basis
        self.n_vars = basis.n
        self.degree = 4

    def eval(self, v) -> float:
        c = self.basis.pairings(v)
        return float(c @ c)

    __call__ = eval

    def eval_magnitude(self, v) -> float:
        """Roundoff scale of ``eval`` at v: the same sums with every
        matrix entry and coordinate replaced by its absolute value."""
        u = np.abs(np.asarray(v, dtype=float))
        m = np.einsum("kij,j,i->k", np.abs(self.basis.mats), u, u)
        return float(m @ m)

    def grad_eval(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        Xv = self.basis.mats @ v
        c = Xv @ v
        return 4.0 * (c @ Xv)

    def eval_batch(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        Xp = np.einsum("kij,nj->nki", self.basis.mats, pts)
        c = np.einsum("nki,ni->nk", Xp, pts)
        return np.einsum("nk,nk->n", c, c)

    def grad_eval_batch(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        Xp = np.einsum("kij,nj->nki", self.basis.mats, pts)
        c = np.einsum("nki,ni->nk", Xp, pts)
        return 4.0 * np.einsum("nk,nki->ni", c, Xp)

    def to_polynomial(self) -> HomogeneousPolynomial:
        total = HomogeneousPolynomial.zero(self.n_vars, 4)
        for X in self.basis.mats:
            q = HomogeneousPolynomial.from_quadratic_form(X)
            total = total + q * q
        return total

    def __repr__(self):
        return f"MomentMap({self.basis!r})"


def moment_phi(basis: SelfAdjointBasis, v) -> float:
    """sum_i <X_i v, v>**2, evaluated from the pairings."""
    return MomentMap(basis).eval(v)


def moment_grad(basis: SelfAdjointBasis, v) -> np.ndarray:
    """4 sum_i <X_i v, v> X_i v, evaluated from the pairings."""
    return MomentMap(basis).grad_eval(v)


def moment_phi_projected(basis: SelfAdjointBasis, v) -> float:
    """tr(P(v v^T)^2), the projection form of the same energy."""
    v = np.asarray(v, dtype=float)
    P = project_lie(basis, np.outer(v, v))
    return float(np.sum(P * P.T))


def moment_grad_projected(basis: SelfAdjointBasis, v) -> np.ndarray:
    """4 P(v v^T) v, the projection form of the gradient."""
    v = np.asarray(v, dtype=float)
    return 4.0 * project_lie(basis, np.outer(v, v)) @ v


def tangent_residual(basis: SelfAdjointBasis, v, w) -> float:
    """Distance from w to the tangent space of the orbit through v.

    The tangent space is spanned by {X_i v} and {A_j v} over the stored
    basis; the residual of a least-squares fit measures how far w sits
    outside it.  The moment gradient must give residual ~ 0.
    """
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    cols = [X @ v for X in basis.mats] + [A @ v for A in basis.antisym]
    T = np.stack(cols, axis=1)
    coef = np.linalg.lstsq(T, w, rcond=None)[0]
    return float(np.linalg.norm(w - T @ coef))


@dataclass
class CriticalityReport:
    """Pairings <X_i v, v> and whether they all vanish within tol."""

    pairings: np.ndarray
    max_abs: float
    tol: float
    is_critical: bool


def criticality(basis: SelfAdjointBasis, v, tol: float = 1e-8) -> CriticalityReport:
    """Check the first-order condition <X_i v, v> = 0 for all i.

    Vanishing of every pairing is equivalent to grad phi(v) = 0 and, for
    nonzero v, to v having minimal norm among suitable group translates.
    """
    c = basis.pairings(v)
    m = float(np.max(np.abs(c))) if c.size else 0.0
    return CriticalityReport(pairings=c, max_abs=m, tol=float(tol),
                             is_critical=m <= tol)


@dataclass
class MinNormReport:
    """Sampled test of |g v| >= |v| over group elements g = exp(Z)."""

    worst_margin: float
    worst_direction: Optional[np.ndarray]
    n_samples: int
    passed: bool


def min_norm_check(basis: SelfAdjointBasis, v, n_samples: int = 200,
                   scale: float = 1.0, tol: float = 1e-10,
                   rng=None) -> MinNormReport:
    """Probe the minimal-norm property of a critical vector.

    Samples Z = sum t_i X_i with Gaussian coefficients at several
    magnitudes and checks |exp(Z) v| - |v| >= -tol * |v|.  Orthogonal
    factors of the group preserve norms, so sampling the symmetric
    exponential directions covers the general element.
    """
    v = np.asarray(v, dtype=float)
    rng = np.random.default_rng(0) if rng is None else rng
    base = float(np.linalg.norm(v))
    worst = math.inf
    worst_dir = None
    for i in range(int(n_samples)):
        mag = scale * 10.0 ** rng.uniform(-2, 1)
        coefs = rng.standard_normal(basis.k)
        coefs *= mag / max(np.linalg.norm(coefs), 1e-300)
        Z = np.einsum("k,kij->ij", coefs, basis.mats)
        margin = float(np.linalg.norm(expm(Z) @ v)) - base
        if margin < worst:
            worst = margin
            worst_dir = coefs
    return MinNormReport(
        worst_margin=worst,
        worst_direction=worst_dir,
        n_samples=int(n_samples),
        passed=worst >= -tol * max(base, 1.0),
    )


def _torus_frequencies(A, tol: float = 1e-8):
    """Integer rotation frequencies of an antisymmetric generator."""
    eigs = np.linalg.eigvals(A)
    freqs = set()
    for lam in eigs:
        if abs(lam.real) > tol:
            raise ValueError("torus generator has a non-imaginary eigenvalue")
        w = abs(lam.imag)
        k = round(w)
        if abs(w - k) > tol * max(1.0, w):
            raise ValueError(
                f"torus generator frequency {w:g} is not an integer; rescale "
                "the generator so one full turn is 2*pi"
            )
        if k:
            freqs.add(int(k))
    if not freqs:
        raise ValueError("torus generator is nilpotent to zero; no rotation")
    return max(freqs)


class CompactGroupSampler:
    """Finite groups of orthogonal matrices, or tori of rotations.

    kind="finite": ``elements`` lists every group element (orthogonal,
    checked).  Haar measure is the uniform average.

    kind="torus": ``generators`` lists commuting antisymmetric matrices
    with integer eigenfrequencies, each parametrizing a circle
    theta -> exp(theta A).  Haar averaging of a polynomial of degree m
    uses m * freq + 1 equally spaced angles per circle, which integrates
    every trigonometric polynomial of that degree exactly.
    """

    def __init__(self, kind: str, elements=None, generators=None):
        self.kind = kind
        if kind == "finite":
            if not elements:
                raise ValueError("finite sampler needs at least one element")
            els = np.array([np.asarray(g, dtype=float) for g in elements])
            n = els.shape[1]
            for i, g in enumerate(els):
                if g.shape != (n, n):
                    raise ValueError("group elements must share one size")
                if np.max(np.abs(g.T @ g - np.eye(n))) > _ORTHO_TOL:
                    raise ValueError(f"element {i} is not orthogonal")
            self.elements = els
            self.n = n
        elif kind == "torus":
            if not generators:
                raise ValueError("torus sampler needs at least one generator")
            gens = np.array([np.asarray(a, dtype=float) for a in generators])
            n = gens.shape[1]
            for i, A in enumerate(gens):
                if A.shape != (n, n):
                    raise ValueError("torus generators must share one size")
                if np.max(np.abs(A + A.T)) > _SYM_TOL:
                    raise ValueError(f"generator {i} is not antisymmetric")
            for i in range(len(gens)):
                for j in range(i + 1, len(gens)):
                    C = gens[i] @ gens[j] - gens[j] @ gens[i]
                    if np.max(np.abs(C)) > _ORTHO_TOL:
                        raise ValueError("torus generators must commute")
            self.generators = gens
            self.frequencies = [_torus_frequencies(A) for A in gens]
            self.n = n
        else:
            raise ValueError(f"unknown sampler kind {kind!r}")

    def haar_nodes(self, poly_degree: int, max_nodes: int = 100_000):
        """Weighted group elements that average degree-m polynomials
        exactly.  Returns (weights, elements)."""
        if self.kind == "finite":
            w = np.full(len(self.elements), 1.0 / len(self.elements))
            return w, self.elements
        counts = [int(poly_degree) * f + 1 for f in self.frequencies]
        total = 1
        for c in counts:
            total *= c
        if total > max_nodes:
            raise ValueError(
                f"exact averaging needs {total} nodes, above the cap {max_nodes}"
            )
        mats = np.empty((total, self.n, self.n))
        for row, idx in enumerate(itertools.product(*[range(c) for c in counts])):
            Z = np.zeros((self.n, self.n))
            for j, (i_j, c_j) in enumerate(zip(idx, counts)):
                Z += (2 * math.pi * i_j / c_j) * self.generators[j]
            mats[row] = expm(Z)
        return np.full(total, 1.0 / total), mats

    def sample(self, rng, count: int) -> np.ndarray:
        """Random group elements (uniform for finite, uniform angles for
        tori)."""
        if self.kind == "finite":
            idx = rng.integers(0, len(self.elements), size=count)
            return self.elements[idx]
        out = np.empty((count, self.n, self.n))
        for i in range(count):
            theta = rng.uniform(0.0, 2 * math.pi, size=len(self.generators))
            Z = np.einsum("k,kij->ij", theta, self.generators)
            out[i] = expm(Z)
        return out


def average_phi_K(phi: HomogeneousPolynomial,
                  sampler: CompactGroupSampler) -> HomogeneousPolynomial:
    """Haar average of phi over the compact group, as a polynomial.

    The result is invariant under the group and inherits nonnegativity
    and the degree from phi.  Averaging is exact up to roundoff: finite
    groups sum over all elements, tori use enough quadrature angles for
    the polynomial degree.
    """
    if phi.n_vars != sampler.n:
        raise ValueError("polynomial and group act on different dimensions")
    weights, mats = sampler.haar_nodes(phi.degree)
    total = HomogeneousPolynomial.zero(phi.n_vars, phi.degree)
    for w, g in zip(weights, mats):
        total = total + float(w) * compose_linear(phi, g)
    return total


@dataclass
class EquivarianceReport:
    """Deviations |g^-1 F(t, g x0) - F(t, x0)| over sampled g."""

    max_deviation: float
    deviations: np.ndarray
    t: float
    n_elements: int


def equivariance_check(system, sampler: CompactGroupSampler, x0, t: float = 1.0,
                       n_elements: int = 8, invariance_tol: float = 1e-8,
                       rng=None, opts: Optional[FlowOptions] = None
                       ) -> EquivarianceReport:
    """Verify that the flow commutes with the symmetry group at time t.

    First confirms on random points that the energy really is invariant
    under sampled group elements (raising ValueError otherwise, since
    the equivariance identity is meaningless without invariance), then
    measures |g^-1 F(t, g x0) - F(t, x0)| for each sampled g.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    x0 = np.asarray(x0, dtype=float)
    gs = sampler.sample(rng, n_elements)

    probe = rng.standard_normal((16, sampler.n))
    for g in gs:
        before = np.array([system.eval(p) for p in probe])
        after = np.array([system.eval(g @ p) for p in probe])
        err = np.max(np.abs(after - before) / np.maximum(1.0, np.abs(before)))
        if err > invariance_tol:
            raise ValueError(
                f"energy is not invariant under a sampled group element "
                f"(relative error {err:.2e}); equivariance is undefined"
            )

    base = flow_at_times(system, x0, [float(t)], opts)[0]
    devs = np.empty(len(gs))
    for i, g in enumerate(gs):
        moved = flow_at_times(system, g @ x0, [float(t)], opts)[0]
        devs[i] = np.linalg.norm(g.T @ moved - base)
    return EquivarianceReport(
        max_deviation=float(np.max(devs)) if len(devs) else 0.0,
        deviations=devs,
        t=float(t),
        n_elements=len(gs),
    )


@dataclass
class OrbitLimitResult:
    """Limit of the moment-energy flow started inside an orbit."""

    u: np.ndarray
    t_reached: float
    phi_value: float
    grad_norm: float
    criticality: CriticalityReport
    uniqueness_guaranteed: bool
    note: str
    trajectory: Trajectory


def orbit_limit(basis: SelfAdjointBasis, v0, phi_tol: float = 1e-10,
                grad_tol: float = 1e-7, crit_tol: float = 1e-6,
                complexified: bool = False,
                opts: Optional[FlowOptions] = None) -> OrbitLimitResult:
    """Flow v0 down the moment energy to a critical point of its orbit.

    The gradient is tangent to the orbit, so the limit u lies in the
    orbit closure and satisfies <X_i u, u> = 0 for every symmetric basis
    element.  Set ``complexified=True`` when the acting group is the
    complexification of its maximal compact subgroup; only then is the
    limit the distinguished minimal vector, unique up to that compact
    subgroup.  Over the reals the flow still converges to some critical
    point, but different starting points of one orbit may reach
    different components.
    """
    mm = MomentMap(basis)
    res = retract(mm, v0, phi_tol=phi_tol, grad_tol=grad_tol, opts=opts)
    crit = criticality(basis, res.y, tol=crit_tol)
    if complexified:
        note = ("limit is the minimal vector of the orbit closure, unique up "
                "to the maximal compact subgroup")
    else:
        note = ("real group action: the limit is a critical point of the "
                "orbit closure but need not be unique")
    return OrbitLimitResult(
        u=res.y,
        t_reached=res.t_reached,
        phi_value=res.phi_value,
        grad_norm=res.grad_norm,
        criticality=crit,
        uniqueness_guaranteed=bool(complexified),
        note=note,
        trajectory=res.trajectory,
    )
