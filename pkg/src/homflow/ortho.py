"""Simultaneous orthogonalization of a finite family of vectors.

Any v_1, ..., v_n in R^d admit an orthogonal change of family
coordinates A in O(n) such that the new family z = A v (rows transform,
the ambient space is untouched) consists of m pairwise orthogonal
nonzero vectors followed by n - m zero vectors, where m is the dimension
of the span.

The construction mirrors how one proves this.  Permute a maximal
independent prefix to the front and express the remaining vectors
through it, v_dep = X v_ind.  The block matrix

    B = [[ I_m   0      ]
         [ X    -I_(n-m)]]

kills the dependent rows: B (v_ind; v_dep) = (v_ind; 0).  Factor
B = u a k with u unit upper triangular, a positive diagonal and k
orthogonal.  Upper triangular factors only mix a row with rows below
it, so k (v_ind; v_dep) = a^-1 u^-1 (v_ind; 0) still has zero bottom
rows, and k is orthogonal.  Finally an eigenrotation of the Gram matrix
of the surviving top rows makes them pairwise orthogonal; the Gram
eigenvalues are the squared lengths of the output vectors and equal the
squared nonzero singular values of the input stack.

Applied to the vectors X_i v of a family of operators, the same A
rotates the operators themselves, which is how the construction is used
by the gradient inequalities for commuting families.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, rq

__all__ = [
    "OrthogonalizationResult",
    "AlignedFamily",
    "simultaneous_orthogonalize",
    "align_operator_family",
    "span_rank",
]


@dataclass
class OrthogonalizationResult:
    """Output of simultaneous_orthogonalize.

    A : (n, n) orthogonal matrix acting on family indices.
    z : (n, d) transformed stack, z = A @ vectors; rows past m vanish.
    c : (m,) descending positive diagonal of the Gram matrix of the
        surviving rows, i.e. the squared lengths |z_i|^2.
    m : dimension of the span of the input family.
    permutation : (n,) the pivot order; entry i is the original index
        moved to position i before the block construction.
    """

    A: np.ndarray
    z: np.ndarray
    c: np.ndarray
    m: int
    permutation: np.ndarray


def _pivoted_prefix(V, thresh):
    """Greedy residual-norm pivoting, returning indices of a maximal
    independent subfamily in selection order.

    Modified Gram-Schmidt with a second correction pass; ties in the
    residual norms resolve to the lowest index so the output is
    deterministic.
    """
    resid = np.array(V, dtype=float, copy=True)
    n = resid.shape[0]
    available = list(range(n))
    chosen = []
    while available:
        norms = np.linalg.norm(resid[available], axis=1)
        best_pos = int(np.argmax(norms))
        if norms[best_pos] <= thresh:
            break
        idx = available.pop(best_pos)
        q = resid[idx] / np.linalg.norm(resid[idx])
        chosen.append(idx)
        for j in available:
            resid[j] -= (resid[j] @ q) * q
            resid[j] -= (resid[j] @ q) * q
    return chosen


def simultaneous_orthogonalize(vectors, rank_tol: float = 1e-10
                               ) -> OrthogonalizationResult:
    """Orthogonalize a vector family by an orthogonal recombination.

    Parameters
    ----------
    vectors : (n, d) array_like
        The family, one vector per row.
    rank_tol : float
        Relative threshold deciding when a residual counts as dependent,
        measured against the largest row norm.

    Returns
    -------
    OrthogonalizationResult
        With z = A @ vectors exactly (A is applied to the input rows to
        produce z, so the identity holds to the last bit); the geometric
        postconditions (zero tail rows, diagonal Gram) hold to roundoff.
    """
    V = np.asarray(vectors, dtype=float)
    if V.ndim != 2 or V.shape[0] < 1:
        raise ValueError("vectors must be a nonempty (n, d) array")
    n = V.shape[0]
    scale = float(np.max(np.linalg.norm(V, axis=1)))
    if scale == 0.0:
        return OrthogonalizationResult(
            A=np.eye(n), z=V.copy(), c=np.zeros(0), m=0,
            permutation=np.arange(n),
        )

    chosen = _pivoted_prefix(V, rank_tol * scale)
    m = len(chosen)
    order = chosen + [i for i in range(n) if i not in chosen]
    P = np.zeros((n, n))
    P[np.arange(n), order] = 1.0
    Vp = V[order]

    B = np.eye(n)
    if m < n:
        X = np.linalg.lstsq(Vp[:m].T, Vp[m:].T, rcond=None)[0].T
        B[m:, :m] = X
        B[m:, m:] = -np.eye(n - m)

    R, Q = rq(B)
    dsign = np.sign(np.diag(R))
    dsign[dsign == 0] = 1.0
    K = dsign[:, None] * Q

    top = (K @ Vp)[:m]
    gram = top @ top.T
    lam, E = np.linalg.eigh(gram)
    lam = lam[::-1]
    E = E[:, ::-1]
    for j in range(m):
        i_star = int(np.argmax(np.abs(E[:, j])))
        if E[i_star, j] < 0:
            E[:, j] = -E[:, j]

    S = np.eye(n)
    S[:m, :m] = E.T
    A = S @ K @ P
    z = A @ V
    return OrthogonalizationResult(
        A=A, z=z, c=lam.copy(), m=m, permutation=np.array(order)
    )


@dataclass
class AlignedFamily:
    """A family of operators recombined so their images of one vector
    are pairwise orthogonal.

    operators : (n, d, d) the rotated stack Y_i = sum_j A_ij X_j.
    vectors : (n, d) the images Y_i v; rows past ``ortho.m`` vanish.
    ortho : the underlying OrthogonalizationResult for the images X_i v.
    """

    operators: np.ndarray
    vectors: np.ndarray
    ortho: OrthogonalizationResult


def align_operator_family(operators, v, rank_tol: float = 1e-10) -> AlignedFamily:
    """Recombine operators so that the images of v come out orthogonal.

    Linear combinations preserve symmetry and commutativity, so an
    aligned version of a commuting symmetric family is again commuting
    and symmetric, with Y_i v pairwise orthogonal and zero past the span
    dimension of {X_i v}.
    """
    ops = np.array([np.asarray(X, dtype=float) for X in operators])
    if ops.ndim != 3 or ops.shape[1] != ops.shape[2]:
        raise ValueError("operators must be a stack of square matrices")
    v = np.asarray(v, dtype=float)
    if v.shape != (ops.shape[1],):
        raise ValueError(
            f"vector has shape {v.shape}, expected ({ops.shape[1]},)"
        )
    images = ops @ v
    res = simultaneous_orthogonalize(images, rank_tol=rank_tol)
    rotated = np.einsum("ij,jkl->ikl", res.A, ops)
    return AlignedFamily(operators=rotated, vectors=rotated @ v, ortho=res)


def span_rank(vectors, tol: float = 1e-10) -> int:
    """Numerical dimension of the span of a vector family.

    Column-pivoted QR of the transposed stack; counts diagonal entries
    of R above ``tol`` times the leading one.
    """
    V = np.asarray(vectors, dtype=float)
    if V.ndim != 2:
        raise ValueError("vectors must be an (n, d) array")
    if V.size == 0:
        return 0
    R = qr(V.T, mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return 0
    return int(np.sum(diag > tol * diag[0]))
