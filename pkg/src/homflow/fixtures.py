"""Small ready-made systems: polynomials with known flows, operator
families and compact symmetry groups.

Most of these have closed-form behavior that the test suite pins down,
so they double as worked examples of the library API.
"""

from __future__ import annotations

import numpy as np

from .groups import CompactGroupSampler, SelfAdjointBasis, orthonormalize_basis
from .poly import HomogeneousPolynomial, build_variety_phi

__all__ = [
    "norm_square",
    "axis_quartic",
    "pinch_quartic",
    "variety_quartic",
    "diag_torus_basis",
    "full_diag_basis",
    "random_commuting_basis",
    "conjugated_basis",
    "noncommuting_pair",
    "so2_generator",
    "so2_sampler",
    "sign_flip_sampler",
    "cyclic_rotation_sampler",
    "random_orthogonal",
    "random_sos_quartic",
]


def norm_square(n: int = 2) -> HomogeneousPolynomial:
    """|x|^2; the flow is x(t) = exp(-2t) x0."""
    terms = {}
    for i in range(n):
        e = [0] * n
        e[i] = 2
        terms[tuple(e)] = 1.0
    return HomogeneousPolynomial(n, 2, terms)


def axis_quartic() -> HomogeneousPolynomial:
    """x1^4 in two variables; zero set is the x2 axis."""
    return HomogeneousPolynomial(2, 4, {(4, 0): 1.0})


def pinch_quartic() -> HomogeneousPolynomial:
    """(x1^2 - x2^2)^2 / 2 in two variables.

    From (a, 0) the flow stays on the axis and solves a' = -2 a^3, so
    a(t) = a0 / sqrt(1 + 4 a0^2 t) and the energy along the flow is
    a0^4 / (2 (1 + 4 a0^2 t)^2).
    """
    x1 = HomogeneousPolynomial.variable(2, 0)
    x2 = HomogeneousPolynomial.variable(2, 1)
    d = x1 * x1 - x2 * x2
    return 0.5 * (d * d)


def variety_quartic() -> HomogeneousPolynomial:
    """x1^4 + x2^4 built from the generators x1 and x2^2.

    The generators have degrees 1 and 2, so the common zero locus
    construction squares x1 twice and x2^2 once; the only zero is the
    origin.
    """
    x1 = HomogeneousPolynomial.variable(2, 0)
    x2 = HomogeneousPolynomial.variable(2, 1)
    return build_variety_phi([x1, x2 * x2])


def diag_torus_basis() -> SelfAdjointBasis:
    """One-operator family diag(1, -1)/sqrt(2), trace-orthonormal."""
    return SelfAdjointBasis([np.diag([1.0, -1.0]) / np.sqrt(2.0)])


def full_diag_basis(n: int) -> SelfAdjointBasis:
    """All coordinate projections diag(e_i); a maximal commuting family."""
    mats = [np.diag(np.eye(n)[i]) for i in range(n)]
    return SelfAdjointBasis(mats)


def random_commuting_basis(n: int, k: int, rng) -> SelfAdjointBasis:
    """k orthonormalized random diagonal operators on R^n (commuting)."""
    gens = [np.diag(rng.standard_normal(n)) for _ in range(k)]
    return orthonormalize_basis(gens)


def conjugated_basis(basis: SelfAdjointBasis, rng) -> SelfAdjointBasis:
    """Conjugate a family by a random orthogonal matrix.

    Preserves symmetry, trace orthonormality and commutativity, but the
    conjugated operators are no longer diagonal.
    """
    Q = random_orthogonal(basis.n, rng)
    return SelfAdjointBasis([Q @ X @ Q.T for X in basis.mats],
                            [Q @ A @ Q.T for A in basis.antisym])


def noncommuting_pair() -> SelfAdjointBasis:
    """Two orthonormal symmetric operators on R^2 that do not commute."""
    s = 1.0 / np.sqrt(2.0)
    return SelfAdjointBasis([np.diag([s, -s]), np.array([[0.0, s], [s, 0.0]])])


def so2_generator() -> np.ndarray:
    return np.array([[0.0, -1.0], [1.0, 0.0]])


def so2_sampler() -> CompactGroupSampler:
    """The full rotation circle acting on R^2."""
    return CompactGroupSampler("torus", generators=[so2_generator()])


def sign_flip_sampler(n: int) -> CompactGroupSampler:
    """The finite group of all coordinate sign flips on R^n."""
    els = []
    for bits in range(2**n):
        signs = [(-1.0 if bits >> i & 1 else 1.0) for i in range(n)]
        els.append(np.diag(signs))
    return CompactGroupSampler("finite", elements=els)


def cyclic_rotation_sampler(k: int) -> CompactGroupSampler:
    """The cyclic group of k planar rotations by multiples of 2 pi / k."""
    els = []
    for j in range(k):
        t = 2.0 * np.pi * j / k
        els.append(np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]]))
    return CompactGroupSampler("finite", elements=els)


def random_orthogonal(n: int, rng) -> np.ndarray:
    """Haar-ish random orthogonal matrix via sign-fixed QR."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def random_sos_quartic(n: int, rng, n_forms: int = 2) -> HomogeneousPolynomial:
    """Sum of squares of random quadratic forms; nonnegative, degree 4."""
    total = HomogeneousPolynomial.zero(n, 4)
    for _ in range(n_forms):
        S = rng.standard_normal((n, n))
        q = HomogeneousPolynomial.from_quadratic_form((S + S.T) / 2.0)
        total = total + q * q
    return total
