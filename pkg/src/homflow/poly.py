"""Sparse multivariate polynomials that are homogeneous by construction.

A polynomial is stored as a map from exponent multi-indices to real
coefficients.  Every stored multi-index has the same entry sum, so
homogeneity is structural rather than checked at evaluation time:

    x0**4 + 2*x0**2*x1**2   ->   {(4, 0): 1.0, (2, 2): 2.0}

Coefficients are double-precision floats.  Zero coefficients are never
stored, and terms are kept in descending graded-lexicographic order so
that evaluation and serialization are reproducible bit for bit.
"""

from __future__ import annotations

import json
import math
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "HomogeneousPolynomial",
    "GradientField",
    "euler_residual",
    "build_variety_phi",
    "compose_linear",
]

# Expansion guards for build_variety_phi: fail loudly instead of thrashing.
MAX_VARIETY_DEGREE = 32
MAX_VARIETY_TERMS = 10**6

# Rows per chunk in batched evaluation, scaled down for wide term tables.
_CHUNK_BUDGET = 2**23


def _grlex_key(exps):
    return (sum(exps), exps)


def _sorted_terms(terms):
    """Terms in descending graded-lex order (deterministic everywhere)."""
    return sorted(terms.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True)


class HomogeneousPolynomial:
    """A real polynomial in ``n_vars`` variables, homogeneous of fixed degree.

    Parameters
    ----------
    n_vars : int
        Number of variables (>= 1).
    degree : int
        Common total degree of every monomial (>= 0).
    terms : mapping from tuple of ints to float
        Exponent multi-index -> coefficient.  Every multi-index must have
        length ``n_vars`` and entry sum ``degree``.  Zero coefficients are
        dropped on construction.
    """

    __slots__ = ("n_vars", "degree", "terms", "_exps", "_coefs", "_grad")

    def __init__(self, n_vars: int, degree: int, terms: Mapping[tuple, float]):
        if n_vars < 1:
            raise ValueError(f"n_vars must be >= 1, got {n_vars}")
        if degree < 0:
            raise ValueError(f"degree must be >= 0, got {degree}")
        clean = {}
        for exps, coef in terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != n_vars:
                raise ValueError(
                    f"multi-index {exps} has length {len(exps)}, expected {n_vars}"
                )
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in multi-index {exps}")
            if sum(exps) != degree:
                raise ValueError(
                    f"multi-index {exps} sums to {sum(exps)}, expected degree {degree}"
                )
            coef = float(coef)
            if coef != 0.0:
                clean[exps] = clean.get(exps, 0.0) + coef
        clean = {e: c for e, c in clean.items() if c != 0.0}
        self.n_vars = int(n_vars)
        self.degree = int(degree)
        self.terms = dict(_sorted_terms(clean))
        srt = list(self.terms.items())
        self._exps = np.array([e for e, _ in srt], dtype=np.int64).reshape(
            len(srt), n_vars
        )
        self._coefs = np.array([c for _, c in srt], dtype=np.float64)
        self._grad = None

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, n_vars: int, degree: int) -> "HomogeneousPolynomial":
        return cls(n_vars, degree, {})

    @classmethod
    def monomial(cls, n_vars: int, exps: Sequence[int], coef: float = 1.0):
        return cls(n_vars, int(sum(exps)), {tuple(exps): coef})

    @classmethod
    def variable(cls, n_vars: int, i: int) -> "HomogeneousPolynomial":
        """The degree-1 polynomial x_i."""
        if not 0 <= i < n_vars:
            raise ValueError(f"variable index {i} out of range for n_vars={n_vars}")
        e = [0] * n_vars
        e[i] = 1
        return cls(n_vars, 1, {tuple(e): 1.0})

    @classmethod
    def from_quadratic_form(cls, mat) -> "HomogeneousPolynomial":
        """The quadratic form x -> <M x, x> as a degree-2 polynomial."""
        mat = np.asarray(mat, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("quadratic form matrix must be square")
        n = mat.shape[0]
        terms = {}
        for i in range(n):
            for j in range(i, n):
                coef = mat[i, i] if i == j else mat[i, j] + mat[j, i]
                if coef != 0.0:
                    e = [0] * n
                    e[i] += 1
                    e[j] += 1
                    terms[tuple(e)] = terms.get(tuple(e), 0.0) + coef
        return cls(n, 2, terms)

    # -- evaluation -----------------------------------------------------

    def eval(self, x) -> float:
        """Evaluate at a point.  Summation order is fixed by term order."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_vars,):
            raise ValueError(f"point has shape {x.shape}, expected ({self.n_vars},)")
        if self._coefs.size == 0:
            return 0.0
        mono = np.prod(x[None, :] ** self._exps, axis=1)
        return float(np.dot(self._coefs, mono))

    __call__ = eval

    def eval_magnitude(self, x) -> float:
        """Sum of |coef| * |x|^exps, the roundoff scale of ``eval`` at x.

        Cancellation between terms means ``eval(x)`` carries an absolute
        error of a small multiple of machine epsilon times this value, so
        it is the yardstick for deciding when a value is numerically zero.
        """
        x = np.abs(np.asarray(x, dtype=float))
        if x.shape != (self.n_vars,):
            raise ValueError(f"point has shape {x.shape}, expected ({self.n_vars},)")
        if self._coefs.size == 0:
            return 0.0
        mono = np.prod(x[None, :] ** self._exps, axis=1)
        return float(np.dot(np.abs(self._coefs), mono))

    def eval_batch(self, points) -> np.ndarray:
        """Evaluate at many points: ``points`` has shape (N, n_vars)."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.n_vars:
            raise ValueError(f"points must have shape (N, {self.n_vars})")
        out = np.empty(pts.shape[0])
        if self._coefs.size == 0:
            out[:] = 0.0
            return out
        chunk = max(1, _CHUNK_BUDGET // max(1, self._coefs.size * self.n_vars))
        for lo in range(0, pts.shape[0], chunk):
            p = pts[lo : lo + chunk]
            mono = np.prod(p[:, None, :] ** self._exps[None, :, :], axis=2)
            out[lo : lo + chunk] = mono @ self._coefs
        return out

    def grad_eval(self, x) -> np.ndarray:
        """Evaluate the gradient vector at a point."""
        return self.gradient().eval(x)

    def grad_eval_batch(self, points) -> np.ndarray:
        return self.gradient().eval_batch(points)

    # -- calculus -------------------------------------------------------

    def partial(self, i: int) -> "HomogeneousPolynomial":
        """Exact partial derivative with respect to x_i (degree drops by 1)."""
        if not 0 <= i < self.n_vars:
            raise ValueError(f"variable index {i} out of range")
        if self.degree == 0:
            return HomogeneousPolynomial.zero(self.n_vars, 0)
        terms = {}
        for exps, coef in self.terms.items():
            e = exps[i]
            if e == 0:
                continue
            lowered = exps[:i] + (e - 1,) + exps[i + 1 :]
            terms[lowered] = terms.get(lowered, 0.0) + coef * e
        return HomogeneousPolynomial(self.n_vars, self.degree - 1, terms)

    def gradient(self) -> "GradientField":
        """All partial derivatives, cached after the first call."""
        if self._grad is None:
            self._grad = GradientField(
                tuple(self.partial(i) for i in range(self.n_vars))
            )
        return self._grad

    # -- algebra --------------------------------------------------------

    def __add__(self, other):
        self._check_compatible(other, same_degree=True)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0.0) + c
        return HomogeneousPolynomial(self.n_vars, self.degree, terms)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return HomogeneousPolynomial(
                self.n_vars,
                self.degree,
                {e: c * float(other) for e, c in self.terms.items()},
            )
        self._check_compatible(other, same_degree=False)
        terms = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                e = tuple(a + b for a, b in zip(ea, eb))
                terms[e] = terms.get(e, 0.0) + ca * cb
        return HomogeneousPolynomial(self.n_vars, self.degree + other.degree, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        out = HomogeneousPolynomial(self.n_vars, 0, {(0,) * self.n_vars: 1.0})
        for _ in range(k):
            out = out * self
        return out

    def _check_compatible(self, other, same_degree: bool):
        if not isinstance(other, HomogeneousPolynomial):
            raise TypeError(f"expected HomogeneousPolynomial, got {type(other)}")
        if other.n_vars != self.n_vars:
            raise ValueError(
                f"variable count mismatch: {self.n_vars} vs {other.n_vars}"
            )
        if same_degree and other.degree != self.degree and self.terms and other.terms:
            raise ValueError(
                f"cannot add degree {self.degree} and degree {other.degree} terms"
            )

    def __eq__(self, other):
        if not isinstance(other, HomogeneousPolynomial):
            return NotImplemented
        return (
            self.n_vars == other.n_vars
            and self.degree == other.degree
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.n_vars, self.degree, tuple(self.terms.items())))

    def coef_distance(self, other: "HomogeneousPolynomial") -> float:
        """Max absolute coefficient difference over the union of monomials."""
        self._check_compatible(other, same_degree=False)
        keys = set(self.terms) | set(other.terms)
        if not keys:
            return 0.0
        return max(abs(self.terms.get(e, 0.0) - other.terms.get(e, 0.0)) for e in keys)

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    def __repr__(self):
        if not self.terms:
            return f"HomogeneousPolynomial({self.n_vars} vars, deg {self.degree}, 0)"
        bits = []
        for exps, coef in list(self.terms.items())[:4]:
            mono = "*".join(
                f"x{i}" + (f"^{e}" if e > 1 else "")
                for i, e in enumerate(exps)
                if e > 0
            )
            bits.append(f"{coef:g}*{mono}" if mono else f"{coef:g}")
        tail = " + ..." if len(self.terms) > 4 else ""
        return (
            f"HomogeneousPolynomial({self.n_vars} vars, deg {self.degree}: "
            + " + ".join(bits)
            + tail
            + ")"
        )

    # -- serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "n_vars": self.n_vars,
            "degree": self.degree,
            "terms": [
                {"exps": list(e), "coef": c} for e, c in self.terms.items()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "HomogeneousPolynomial":
        try:
            n_vars = d["n_vars"]
            degree = d["degree"]
            raw = d["terms"]
        except KeyError as exc:
            raise ValueError(f"polynomial JSON missing field {exc}") from exc
        terms = {}
        for entry in raw:
            exps = tuple(entry["exps"])
            terms[exps] = terms.get(exps, 0.0) + float(entry["coef"])
        return cls(n_vars, degree, terms)

    @classmethod
    def from_json(cls, s: str) -> "HomogeneousPolynomial":
        return cls.from_json_dict(json.loads(s))


class GradientField:
    """The exact gradient of a homogeneous polynomial, one component per
    variable.  Components are themselves homogeneous (of degree m - 1).

    Evaluation stacks every component's monomials into one table so a
    single vectorized pass produces the whole gradient vector.
    """

    __slots__ = ("components", "n_vars", "_exps", "_coefs", "_onehot")

    def __init__(self, components: Iterable[HomogeneousPolynomial]):
        comps = tuple(components)
        if not comps:
            raise ValueError("gradient needs at least one component")
        n = comps[0].n_vars
        if len(comps) != n or any(c.n_vars != n for c in comps):
            raise ValueError("need exactly one component per variable")
        self.components = comps
        self.n_vars = n
        exps = []
        coefs = []
        comp_ids = []
        for i, c in enumerate(comps):
            for e, co in c.terms.items():
                exps.append(e)
                coefs.append(co)
                comp_ids.append(i)
        self._exps = np.array(exps, dtype=np.int64).reshape(len(exps), n)
        self._coefs = np.array(coefs, dtype=np.float64)
        onehot = np.zeros((len(exps), n))
        for row, i in enumerate(comp_ids):
            onehot[row, i] = 1.0
        self._onehot = onehot

    def eval(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_vars,):
            raise ValueError(f"point has shape {x.shape}, expected ({self.n_vars},)")
        if self._coefs.size == 0:
            return np.zeros(self.n_vars)
        vals = self._coefs * np.prod(x[None, :] ** self._exps, axis=1)
        return vals @ self._onehot

    __call__ = eval

    def eval_batch(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.n_vars:
            raise ValueError(f"points must have shape (N, {self.n_vars})")
        out = np.empty((pts.shape[0], self.n_vars))
        if self._coefs.size == 0:
            out[:] = 0.0
            return out
        chunk = max(1, _CHUNK_BUDGET // max(1, self._coefs.size * self.n_vars))
        for lo in range(0, pts.shape[0], chunk):
            p = pts[lo : lo + chunk]
            vals = self._coefs * np.prod(
                p[:, None, :] ** self._exps[None, :, :], axis=2
            )
            out[lo : lo + chunk] = vals @ self._onehot
        return out


def euler_residual(p: HomogeneousPolynomial, x) -> float:
    """<grad p(x), x> - m p(x), identically zero up to roundoff.

    The identity holds exactly for every homogeneous polynomial of
    degree m, so the residual is a pure roundoff probe.
    """
    x = np.asarray(x, dtype=float)
    return float(np.dot(p.grad_eval(x), x)) - p.degree * p.eval(x)


def build_variety_phi(
    generators: Sequence[HomogeneousPolynomial],
    max_degree: int = MAX_VARIETY_DEGREE,
    max_terms: int = MAX_VARIETY_TERMS,
) -> HomogeneousPolynomial:
    """Nonnegative polynomial whose zero set is the common zero locus.

    Given homogeneous generators f_i of degrees r_i, let r = lcm(r_i) and
    return sum_i (f_i ** (r / r_i)) ** 2, homogeneous of degree 2r.  The
    result vanishes exactly where all generators vanish, and is a sum of
    even powers, hence >= 0 everywhere.

    Raises ValueError when 2r exceeds ``max_degree`` or the expansion
    grows past ``max_terms`` monomials.
    """
    gens = list(generators)
    if not gens:
        raise ValueError("need at least one generator")
    n = gens[0].n_vars
    for g in gens:
        if g.n_vars != n:
            raise ValueError("generators must share a variable count")
        if g.degree < 1:
            raise ValueError("generators must have degree >= 1")
        if not g.terms:
            raise ValueError("zero generator has no well-defined zero locus")
    r = 1
    for g in gens:
        r = math.lcm(r, g.degree)
    if 2 * r > max_degree:
        raise ValueError(
            f"combined degree 2*lcm = {2 * r} exceeds the limit {max_degree}"
        )
    total = HomogeneousPolynomial.zero(n, 2 * r)
    for g in gens:
        piece = (g ** (r // g.degree)) ** 2
        if piece.n_terms > max_terms:
            raise ValueError(
                f"expansion produced {piece.n_terms} monomials, limit {max_terms}"
            )
        total = total + piece
        if total.n_terms > max_terms:
            raise ValueError(
                f"expansion produced {total.n_terms} monomials, limit {max_terms}"
            )
    return total


def compose_linear(p: HomogeneousPolynomial, mat) -> HomogeneousPolynomial:
    """The pullback x -> p(A x), again homogeneous of the same degree.

    ``mat`` has shape (n_vars, n_new); each variable of ``p`` is replaced
    by the corresponding linear form in the new variables.
    """
    A = np.asarray(mat, dtype=float)
    if A.ndim != 2 or A.shape[0] != p.n_vars:
        raise ValueError(f"matrix must have {p.n_vars} rows, got shape {A.shape}")
    n_new = A.shape[1]
    one = HomogeneousPolynomial(n_new, 0, {(0,) * n_new: 1.0})
    # Cache powers of each substituted linear form up to its max exponent.
    forms = []
    for i in range(p.n_vars):
        row = {
            tuple(1 if j == k else 0 for k in range(n_new)): A[i, j]
            for j in range(n_new)
            if A[i, j] != 0.0
        }
        forms.append(HomogeneousPolynomial(n_new, 1, row))
    max_exp = [0] * p.n_vars
    for exps in p.terms:
        for i, e in enumerate(exps):
            max_exp[i] = max(max_exp[i], e)
    powers = []
    for i in range(p.n_vars):
        cache = [one]
        for _ in range(max_exp[i]):
            cache.append(cache[-1] * forms[i])
        powers.append(cache)
    total = HomogeneousPolynomial.zero(n_new, p.degree)
    for exps, coef in p.terms.items():
        term = one
        for i, e in enumerate(exps):
            if e:
                term = term * powers[i][e]
        total = total + coef * term
    return total
