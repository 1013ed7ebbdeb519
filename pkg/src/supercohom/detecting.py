"""Generic odd element x0, its centralizer, and the detecting subalgebras.

Naming: ``f1`` is the subspace of g1 fixed by the centralizer of x0 and ``f0``
its even stabilizer; ``e1`` is the Cartan subspace spanned by the sums
x_alpha + x_{-alpha}, and ``e = Lie(H) + e1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linprog

from .algebra import LieSuperalgebra, _Decomposer, _unit, bracket, root_index, subalgebra
from .errors import ClosureFailure, DegenerateCoefficients, InvalidParams
from .invariants import table1_degrees
from .linalg import SparseMatrix, format_rational, kernel_sparse, span_rank

Vector = dict


# --------------------------------------------------------------------------
# table data


def omega(a: LieSuperalgebra) -> list[tuple[Fraction, ...]]:
    """The odd positive roots whose root vectors build x0 (empty for Q families)."""
    fam, p = a.family, a.params
    if fam in ("GL", "SL"):
        m, n = p
        size = m + n
        return [tuple(x - y for x, y in zip(_unit(size, i), _unit(size, m + i))) for i in range(min(m, n))]
    if fam == "PSL":
        n = p[0]
        return [tuple(x - y for x, y in zip(_unit(2 * n, i), _unit(2 * n, n + i))) for i in range(n)]
    if fam == "OSP":
        k, n = p[0] // 2, p[1] // 2
        return [tuple(x - y for x, y in zip(_unit(k + n, i), _unit(k + n, k + i))) for i in range(min(k, n))]
    if fam == "P":
        n = p[0]
        count = n // 2 if n % 2 == 0 else (n + 1) // 2
        return [tuple(x + y for x, y in zip(_unit(n, i), _unit(n, n - 1 - i))) for i in range(count)]
    if fam in ("Q", "QHAT"):
        return []
    raise InvalidParams(f"no generic element for family {fam}")


def table4_dim(family: str, params) -> int:
    """Dimension of the centralizer of x0 in g0, per family."""
    fam = family.upper()
    p = tuple(params) if not isinstance(params, int) else (params,)
    if fam == "GL":
        m, n = p
        return min(m, n) + (n - m) ** 2
    if fam == "SL":
        m, n = p
        return min(m, n) + (n - m) ** 2 - 1
    if fam == "PSL":
        return p[0] - 1
    if fam == "OSP":
        m, n = p[0] // 2, p[1] // 2
        r = min(m, n)
        if p[0] % 2:
            if m >= n:
                return r + 2 * (m - n) ** 2 + (m - n)
            return r + 2 * (n - m) ** 2 + (n - m)
        return r + 2 * (n - m) ** 2 + (n - m)
    if fam == "P":
        return p[0] // 2
    if fam == "QHAT":
        return p[0]
    if fam == "Q":
        return p[0] - 1
    raise InvalidParams(f"no centralizer dimension for {family!r}")


def is_polar(family: str, params) -> bool:
    return family.upper() not in ("PSL", "P")


def is_stable(family: str, params) -> bool:
    fam = family.upper()
    if fam == "OSP" and params[0] % 2:
        return params[0] // 2 >= params[1] // 2
    return True


# --------------------------------------------------------------------------
# x0


@dataclass(frozen=True)
class GenericElement:
    omega: tuple[tuple[Fraction, ...], ...]
    coefficients: tuple[Fraction, ...]
    vector: dict
    support: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "omega": [[format_rational(x) for x in w] for w in self.omega],
            "coefficients": [format_rational(c) for c in self.coefficients],
            "vector": sorted([k, format_rational(v)] for k, v in self.vector.items()),
        }


def default_coefficients(a: LieSuperalgebra) -> list[Fraction]:
    if a.family == "QHAT":
        return [Fraction(i + 1) for i in range(a.params[0])]
    if a.family == "Q":
        n = a.params[0]
        return [Fraction(2 * i + 1 - n, 2) for i in range(n)]
    return [Fraction(i + 1) for i in range(len(omega(a)))]


def _q_diagonal_vector(a: LieSuperalgebra, diag: Sequence[Fraction]) -> dict[int, Fraction]:
    """Odd element whose B block is diag(diag), in the algebra's zero-weight odd basis."""
    if a.family == "QHAT":
        return {k: d for k, d in zip(a.zero_odd, diag) if d}
    # basis element i has diagonal e_i - e_{i+1}, so its coefficient is d_0 + ... + d_i
    out = {}
    acc = Fraction(0)
    for k, d in zip(a.zero_odd, diag):
        acc += d
        if acc:
            out[k] = acc
    return out


def e1_basis(a: LieSuperalgebra) -> list[dict[int, Fraction]]:
    """Cartan subspace basis: x_alpha + x_{-alpha} over Omega, or the diagonal odd part."""
    if a.family in ("Q", "QHAT"):
        return [{k: Fraction(1)} for k in a.zero_odd]
    out = []
    for w in omega(a):
        v = {root_index(a, w, 1): Fraction(1)}
        try:
            v[root_index(a, tuple(-x for x in w), 1)] = Fraction(1)
        except KeyError:
            pass
        out.append(v)
    return out


def make_x0(a: LieSuperalgebra, coefficients: Sequence[object] | None = None) -> GenericElement:
    coef = [Fraction(c) for c in (coefficients if coefficients is not None else default_coefficients(a))]
    if a.family in ("Q", "QHAT"):
        n = a.params[0]
        if len(coef) != n:
            raise DegenerateCoefficients(f"need {n} diagonal entries")
        if len(set(coef)) != n:
            raise DegenerateCoefficients("diagonal entries must be pairwise distinct")
        if a.family == "Q" and sum(coef) != 0:
            raise DegenerateCoefficients("diagonal entries must sum to zero for Q")
        vec = _q_diagonal_vector(a, coef)
        return GenericElement((), tuple(coef), vec, tuple(sorted(vec)))
    om = omega(a)
    if len(coef) != len(om):
        raise DegenerateCoefficients(f"need {len(om)} coefficients")
    if any(c == 0 for c in coef):
        raise DegenerateCoefficients("coefficients must be nonzero")
    if len({c * c for c in coef}) != len(coef):
        raise DegenerateCoefficients("coefficients must have pairwise distinct squares")
    vec: dict[int, Fraction] = {}
    for c, base in zip(coef, e1_basis(a)):
        for k, v in base.items():
            vec[k] = vec.get(k, 0) + c * v
    return GenericElement(tuple(om), tuple(coef), vec, tuple(sorted(vec)))


# --------------------------------------------------------------------------
# centralizer, fixed points, stabilizer


def _kernel_vectors(m: SparseMatrix, cols: Sequence[int]) -> list[dict[int, Fraction]]:
    _, vecs = kernel_sparse(m)
    return [{cols[j]: v for j, v in vec.items()} for vec in vecs]


def centralizer_even(a: LieSuperalgebra, x: Mapping[int, object]) -> list[dict[int, Fraction]]:
    """Basis of {y in g0 : [y, x] = 0}."""
    cols = list(a.even)
    ent = {}
    for c, j in enumerate(cols):
        for k, v in enumerate(bracket(a, {j: 1}, dict(x))):
            if v:
                ent[(k, c)] = v
    return _kernel_vectors(SparseMatrix(a.dim, len(cols), ent), cols)


def fixed_odd_space(a: LieSuperalgebra, lie_h: Sequence[Mapping[int, object]]) -> list[dict[int, Fraction]]:
    """Joint kernel on g1 of ad(y) for y in ``lie_h``."""
    cols = list(a.odd)
    ent = {}
    for s, y in enumerate(lie_h):
        for c, j in enumerate(cols):
            for k, v in enumerate(bracket(a, dict(y), {j: 1})):
                if v:
                    ent[(s * a.dim + k, c)] = v
    return _kernel_vectors(SparseMatrix(len(lie_h) * a.dim, len(cols), ent), cols)


def normalizer_even(a: LieSuperalgebra, f1: Sequence[Mapping[int, object]]) -> list[dict[int, Fraction]]:
    """Basis of {y in g0 : [y, f1] inside f1}."""
    odd = list(a.odd)
    # functionals on g1 vanishing on f1
    f_mat = SparseMatrix(len(f1), len(odd), {(s, c): Fraction(v[k]) for s, v in enumerate(f1)
                                              for c, k in enumerate(odd) if v.get(k)})
    annihilators = _kernel_vectors(f_mat, odd)
    if not annihilators:
        return [{k: Fraction(1)} for k in a.even]
    cols = list(a.even)
    ent = {}
    row = 0
    for f in f1:
        images = [bracket(a, {j: 1}, dict(f)) for j in cols]
        for phi in annihilators:
            for c, img in enumerate(images):
                v = sum((phi[k] * img[k] for k in phi if img[k]), Fraction(0))
                if v:
                    ent[(row, c)] = v
            row += 1
    return _kernel_vectors(SparseMatrix(row, len(cols), ent), cols)


def in_span(vectors: Sequence[Mapping[int, object]], x: Mapping[int, object]) -> bool:
    base = span_rank(vectors)
    return span_rank(list(vectors) + [x]) == base


# --------------------------------------------------------------------------
# Dadok-Kac style closed-orbit test


def _positive_kernel_vector(weights: list[tuple[Fraction, ...]]) -> list[Fraction] | None:
    """Exact strictly positive lambda with sum lambda_i w_i = 0, or None."""
    s = len(weights)
    if s == 0:
        return None
    dim = len(weights[0])
    m = SparseMatrix(dim, s, {(i, j): w[i] for j, w in enumerate(weights) for i in range(dim) if w[i]})
    free, vecs = kernel_sparse(m)
    if not vecs:
        return None
    # maximise t subject to lambda = K c, lambda_j >= t, sum lambda = 1
    k = np.array([[float(v.get(j, 0)) for v in vecs] for j in range(s)])
    nv = len(vecs)
    obj = np.zeros(nv + 1)
    obj[-1] = -1.0
    a_ub = np.hstack([-k, np.ones((s, 1))])
    b_ub = np.zeros(s)
    a_eq = np.hstack([k.sum(axis=0, keepdims=True), np.zeros((1, 1))])
    res = linprog(obj, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0],
                  bounds=[(None, None)] * nv + [(None, 1.0)], method="highs")
    if res.status != 0 or res.x[-1] <= 1e-9:
        return None
    coeffs = [Fraction(float(c)).limit_denominator(10**6) for c in res.x[:nv]]
    lam = [sum((c * v.get(j, 0) for c, v in zip(coeffs, vecs)), Fraction(0)) for j in range(s)]
    # lambda is an exact kernel element by construction; only positivity needs checking
    return lam if all(x > 0 for x in lam) else None


def closed_orbit_precheck(a: LieSuperalgebra, x0: GenericElement | Sequence[int]) -> bool:
    """Conditions of the closed-orbit criterion for the weights supporting x0.

    Weights are compared as eigenvalue vectors of the Cartan basis, so quotient
    families are handled correctly.  Condition (2) asks for a strictly positive
    combination of the weights equal to zero.
    """
    support = list(x0.support if isinstance(x0, GenericElement) else x0)
    weights = [tuple(a.cartan_values[k]) for k in support]
    if len(set(weights)) != len(weights):
        return False
    if _positive_kernel_vector(weights) is None:
        return False
    skip = set(a.cartan_indices)
    even_roots = {tuple(a.cartan_values[k]) for k in a.even if k not in skip}
    even_roots.discard(tuple(Fraction(0) for _ in a.cartan_indices))
    for i, u in enumerate(weights):
        for j, w in enumerate(weights):
            if i != j and tuple(x - y for x, y in zip(u, w)) in even_roots:
                return False
    return True


# --------------------------------------------------------------------------
# assembly


@dataclass
class DetectionReport:
    x0: GenericElement
    lie_h: list[dict]
    f1: list[dict]
    e1: list[dict]
    f0: list[dict]
    dims: dict
    checks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def vecs(vs):
            return [sorted([k, format_rational(v)] for k, v in vec.items()) for vec in vs]

        return {
            "x0": self.x0.to_dict(),
            "lieH_basis": vecs(self.lie_h),
            "f1_basis": vecs(self.f1),
            "e1_basis": vecs(self.e1),
            "f0_basis": vecs(self.f0),
            "dims": dict(self.dims),
            "checks": dict(self.checks),
        }


def detection_data(a: LieSuperalgebra, coefficients: Sequence[object] | None = None) -> DetectionReport:
    x0 = make_x0(a, coefficients)
    lie_h = centralizer_even(a, x0.vector)
    f1 = fixed_odd_space(a, lie_h)
    e1 = e1_basis(a)
    f0 = normalizer_even(a, f1)
    krull = len(table1_degrees(a.family, a.params))
    dims = {
        "g0": a.dim_even,
        "g1": a.dim_odd,
        "lieH": len(lie_h),
        "f0": len(f0),
        "f1": len(f1),
        "e1": len(e1),
        "krull": krull,
        "table4_lieH": table4_dim(a.family, a.params),
    }
    checks = {
        "table4": len(lie_h) == dims["table4_lieH"],
        "f1_contains_e1": all(in_span(f1, v) for v in e1),
        "x0_in_e1": in_span(e1, x0.vector),
        "closed_orbit": closed_orbit_precheck(a, x0) if x0.omega else None,
        "polar": is_polar(a.family, a.params),
        "stable": is_stable(a.family, a.params),
    }
    if checks["stable"]:
        checks["stability_identity"] = len(lie_h) == a.dim_even - a.dim_odd + krull
    if checks["polar"]:
        checks["e1_is_krull"] = len(e1) == krull
    return DetectionReport(x0, lie_h, f1, e1, f0, dims, checks)


def assemble_detecting(a: LieSuperalgebra, which: str = "E", coefficients: Sequence[object] | None = None
                       ) -> tuple[LieSuperalgebra, DetectionReport]:
    """The detecting subalgebra F = f0 + f1 or E = Lie(H) + e1 as a SUB algebra.

    Raises ClosureFailure if some bracket escapes the span or if [f1, f1] is not
    contained in Lie(H).
    """
    which = which.upper()
    if which not in ("E", "F"):
        raise ValueError("which must be 'E' or 'F'")
    rep = detection_data(a, coefficients)
    lie_dec = _Decomposer(rep.lie_h) if rep.lie_h else None
    for i, u in enumerate(rep.f1):
        for v in rep.f1[i:]:
            br = {k: x for k, x in enumerate(bracket(a, u, v)) if x}
            if br and (lie_dec is None or lie_dec.coords(br) is None):
                raise ClosureFailure("[f1, f1] is not contained in Lie(H)")
    rep.checks["f1_brackets_in_lieH"] = True
    if which == "E":
        vecs = rep.lie_h + rep.e1
        labels = [f"h{i + 1}" for i in range(len(rep.lie_h))] + [f"y{i + 1}" for i in range(len(rep.e1))]
    else:
        vecs = rep.f0 + rep.f1
        labels = [f"n{i + 1}" for i in range(len(rep.f0))] + [f"u{i + 1}" for i in range(len(rep.f1))]
    sub = subalgebra(a, vecs, labels, tag=which)
    rep.checks["closure"] = True
    if which == "E":
        rep.checks["e0_commutes_with_e1"] = all(
            not any(bracket(a, h, y)) for h in rep.lie_h for y in rep.e1)
    return sub, rep
