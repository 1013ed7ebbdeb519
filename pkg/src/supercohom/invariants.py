"""Invariant polynomials on the odd part under the even part.

Polynomials on g1 are dicts keyed by monomials, a monomial being the sorted
tuple of variable indices it contains (so ``(0, 0, 2)`` is xi_0^2 xi_2).
Variable ``l`` is the coordinate dual to the ``l``-th odd basis element.
"""

from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Mapping, Sequence

import numpy as np

from .algebra import LieSuperalgebra, roots
from .errors import DimensionMismatch, NotPolar, UnknownFamily
from .linalg import (
    SparseMatrix,
    _rref_mod_p,
    default_primes,
    kernel_modular,
    kernel_sparse,
    rank,
)

Monomial = tuple
Poly = dict

# ambient size above which "auto" mode switches to modular rank
EXACT_LIMIT = 2000


# --------------------------------------------------------------------------
# graded dimension records


@dataclass(frozen=True)
class DimensionSeries:
    dims: tuple[int, ...]
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if any(d < 0 for d in self.dims):
            raise ValueError("graded dimensions must be nonnegative")

    @property
    def max_degree(self) -> int:
        return len(self.dims) - 1

    def __getitem__(self, d):
        return self.dims[d]

    def __len__(self):
        return len(self.dims)

    def to_list(self) -> list[int]:
        return list(self.dims)


def series_from_degrees(degrees: Sequence[int], max_degree: int) -> tuple[int, ...]:
    """Coefficients of prod 1/(1 - t^d) through ``max_degree``."""
    coeffs = [1] + [0] * max_degree
    for d in degrees:
        if d <= 0:
            raise ValueError("generator degrees must be positive")
        for k in range(d, max_degree + 1):
            coeffs[k] += coeffs[k - d]
    return tuple(coeffs)


def table1_degrees(family: str, params) -> list[int]:
    """Generator degrees of the invariant ring for each family."""
    fam = family.upper()
    p = tuple(int(x) for x in (params if not isinstance(params, int) else (params,)))
    if fam in ("GL", "SL"):
        r = min(p)
        return [2 * i for i in range(1, r + 1)]
    if fam == "PSL":
        n = p[0]
        return [2 * i for i in range(1, n)] + [n, n]
    if fam == "OSP":
        m, n = p[0] // 2, p[1] // 2
        if p[0] % 2:
            r = min(m, n)
            return [4 * i for i in range(1, r + 1)]
        if m > n:
            return [4 * i for i in range(1, n + 1)]
        return [4 * i for i in range(1, m)] + [2 * m]
    if fam == "P":
        n = p[0]
        if n % 2:
            l = n // 2
            return [4 * i for i in range(1, l + 1)] + [n]
        l = n // 2
        return [4 * i for i in range(1, l)] + [l, n]
    if fam == "QHAT":
        return list(range(1, p[0] + 1))
    if fam == "Q":
        return list(range(2, p[0] + 1))
    raise UnknownFamily(family)


def predicted_series(family: str, params, max_degree: int) -> DimensionSeries:
    degs = table1_degrees(family, params)
    return DimensionSeries(series_from_degrees(degs, max_degree), {"degrees": sorted(degs)})


# --------------------------------------------------------------------------
# symmetric powers and the derivation action


@dataclass(frozen=True)
class SymmetricPowerBasis:
    nvars: int
    degree: int
    monomials: tuple[Monomial, ...]

    @classmethod
    def of(cls, nvars: int, degree: int) -> "SymmetricPowerBasis":
        return cls(nvars, degree, tuple(itertools.combinations_with_replacement(range(nvars), degree)))

    def __len__(self):
        return len(self.monomials)

    def exponents(self) -> list[tuple[int, ...]]:
        return [to_exponents(m, self.nvars) for m in self.monomials]

    def index(self) -> dict[Monomial, int]:
        return {m: i for i, m in enumerate(self.monomials)}


def to_exponents(m: Monomial, nvars: int) -> tuple[int, ...]:
    e = [0] * nvars
    for v in m:
        e[v] += 1
    return tuple(e)


def from_exponents(e: Sequence[int]) -> Monomial:
    return tuple(i for i, k in enumerate(e) for _ in range(k))


def odd_coaction(a: LieSuperalgebra, z: Mapping[int, object] | int) -> dict[int, dict[int, Fraction]]:
    """z . xi_l as a linear form in the xi's (contragredient of ad z on g1)."""
    zs = {z: Fraction(1)} if isinstance(z, int) else {int(k): Fraction(v) for k, v in z.items() if v}
    if any(a.parity[k] for k in zs):
        raise ValueError("derivation action needs an even element")
    odd = a.odd
    pos = {k: l for l, k in enumerate(odd)}
    act: dict[int, dict[int, Fraction]] = {}
    for k_pos, k in enumerate(odd):
        # [z, x_k] = sum_l A_{lk} x_l  gives  z . xi_l = -sum_k A_{lk} xi_k
        for i, c in zs.items():
            for tgt, v in a.bracket_basis(i, k).items():
                l = pos[tgt]
                row = act.setdefault(l, {})
                row[k_pos] = row.get(k_pos, 0) - c * v
    return {l: {k: v for k, v in row.items() if v} for l, row in act.items()}


def apply_derivation(act: Mapping[int, Mapping[int, object]], m: Monomial) -> dict[Monomial, object]:
    out: dict[Monomial, object] = {}
    prev = None
    for idx, l in enumerate(m):
        if l == prev or l not in act:
            prev = l
            continue
        prev = l
        mult = m.count(l)
        rest = list(m)
        del rest[idx]
        for k, c in act[l].items():
            new = list(rest)
            bisect.insort(new, k)
            key = tuple(new)
            out[key] = out.get(key, 0) + mult * c
    return {k: v for k, v in out.items() if v}


def derivation_action(a: LieSuperalgebra, z, d: int) -> SparseMatrix:
    """Matrix of the even element z acting on S^d(g1*) in the lexicographic monomial basis."""
    basis = SymmetricPowerBasis.of(a.dim_odd, d)
    if d == 0:
        odd_coaction(a, z)
        return SparseMatrix.zeros(1, 1)
    act = odd_coaction(a, z)
    idx = basis.index()
    ent = {}
    for c, m in enumerate(basis.monomials):
        for tgt, v in apply_derivation(act, m).items():
            ent[(idx[tgt], c)] = v
    return SparseMatrix(len(basis), len(basis), ent)


def apply_to_poly(act, p: Mapping[Monomial, object]) -> dict[Monomial, object]:
    out: dict = {}
    for m, c in p.items():
        for tgt, v in apply_derivation(act, m).items():
            out[tgt] = out.get(tgt, 0) + c * v
    return {k: v for k, v in out.items() if v}


# --------------------------------------------------------------------------
# the linear system for invariants


def generating_even(a: LieSuperalgebra) -> list[int]:
    """Even basis elements that, with the Cartan subalgebra, generate g0.

    Uses the root vectors of simple even roots (positive and negative);
    without weight data every even basis element is returned.
    """
    if not a.cartan_indices or a.weight_of is None:
        return list(a.even)
    even_pos = [r.coords for r in roots(a)[0]]
    pos_set = set(even_pos)
    simple = set()
    for r in even_pos:
        if not any(tuple(x - y for x, y in zip(r, s)) in pos_set for s in even_pos if s != r):
            simple.add(r)
    simple |= {tuple(-x for x in r) for r in simple}
    skip = set(a.cartan_indices)
    return [k for k in a.even if k not in skip and a.weight_of[k] in simple]


def weight_zero_monomials(a: LieSuperalgebra, d: int) -> list[Monomial]:
    monos = SymmetricPowerBasis.of(a.dim_odd, d).monomials
    if not a.cartan_indices:
        return list(monos)
    wt = [a.cartan_values[k] for k in a.odd]
    ncart = len(a.cartan_indices)
    out = []
    for m in monos:
        s = [0] * ncart
        for v in m:
            w = wt[v]
            for i in range(ncart):
                s[i] += w[i]
        if not any(s):
            out.append(m)
    return out


def invariant_system(a: LieSuperalgebra, d: int, generators: Sequence[int] | None = None
                     ) -> tuple[list[Monomial], SparseMatrix]:
    """(domain monomials, stacked derivation matrix) whose kernel is S^d(g1*)^{g0}."""
    cols = weight_zero_monomials(a, d)
    gens = generating_even(a) if generators is None else list(generators)
    row_of: dict[tuple[int, Monomial], int] = {}
    ent = {}
    for z in gens:
        act = odd_coaction(a, z)
        for c, m in enumerate(cols):
            for tgt, v in apply_derivation(act, m).items():
                r = row_of.setdefault((z, tgt), len(row_of))
                ent[(r, c)] = v
    return cols, SparseMatrix(len(row_of), len(cols), ent)


def _resolve_mode(mode: str, cols: int) -> str:
    if mode == "auto":
        return "exact" if cols <= EXACT_LIMIT else "modular"
    if mode not in ("exact", "modular"):
        raise ValueError(f"unknown mode {mode!r}")
    return mode


def invariant_dimensions(a: LieSuperalgebra, max_degree: int, mode: str = "modular",
                         primes: Sequence[int] | None = None) -> DimensionSeries:
    """dim S^d(g1*)^{g0} for d = 0..max_degree.

    Modular mode ranks each system over two primes and keeps the larger rank
    (a modular rank never exceeds the rational one); disagreements are recorded
    in ``meta["prime_disagreements"]``.
    """
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    primes = tuple(primes or default_primes())
    dims = [1]
    disagreements = []
    modes = ["exact"]
    for d in range(1, max_degree + 1):
        cols, m = invariant_system(a, d)
        md = _resolve_mode(mode, len(cols))
        modes.append(md)
        if md == "exact":
            r = rank(m)
        else:
            ranks = [rank(m, "modular", p) for p in primes]
            if len(set(ranks)) > 1:
                disagreements.append({"degree": d, "ranks": ranks})
            r = max(ranks)
        dims.append(len(cols) - r)
    meta = {"modes": modes, "primes": list(primes), "prime_disagreements": disagreements}
    return DimensionSeries(tuple(dims), meta)


def invariant_basis(a: LieSuperalgebra, d: int) -> list[Poly]:
    """Exact basis of S^d(g1*)^{g0} as polynomials with rational coefficients."""
    if d == 0:
        return [{(): Fraction(1)}]
    cols, m = invariant_system(a, d)
    _, vecs = kernel_sparse(m)
    return [{cols[j]: v for j, v in vec.items()} for vec in vecs]


def invariant_basis_modular(a: LieSuperalgebra, d: int, prime: int) -> list[dict[Monomial, int]]:
    if d == 0:
        return [{(): 1}]
    cols, m = invariant_system(a, d)
    _, vecs = kernel_modular(m, prime)
    return [{cols[j]: v for j, v in vec.items()} for vec in vecs]


def is_invariant(a: LieSuperalgebra, p: Mapping[Monomial, object]) -> bool:
    """Exact check that every even basis element kills ``p``."""
    for z in a.even:
        if apply_to_poly(odd_coaction(a, z), p):
            return False
    return True


# --------------------------------------------------------------------------
# ring generators by evaluation at random points


def _eval_monomials(monos: Sequence[Monomial], points: np.ndarray, prime: int) -> np.ndarray:
    k = points.shape[0]
    if not monos:
        return np.zeros((k, 0), dtype=np.int64)
    d = len(monos[0])
    vals = np.ones((k, len(monos)), dtype=np.int64)
    if d:
        idx = np.array(monos, dtype=np.int64)
        for t in range(d):
            vals = vals * points[:, idx[:, t]] % prime
    return vals


def _eval_polys(polys: Sequence[Mapping[Monomial, int]], points: np.ndarray, prime: int) -> list[np.ndarray]:
    out = []
    for p in polys:
        monos = list(p)
        vals = _eval_monomials(monos, points, prime)
        acc = np.zeros(points.shape[0], dtype=np.int64)
        for j, m in enumerate(monos):
            acc = (acc + vals[:, j] * (p[m] % prime)) % prime
        out.append(acc)
    return out


def _rank_rows(rows: Sequence[np.ndarray], prime: int) -> int:
    if not rows:
        return 0
    return len(_rref_mod_p(np.array(rows, dtype=np.int64), prime, want_reduced=False)[1])


def generator_degrees(a: LieSuperalgebra, max_degree: int, mode: str = "modular", seed: int = 0,
                      prime: int | None = None) -> list[int]:
    """Degrees of a minimal generating set of the invariant ring, up to ``max_degree``.

    In each degree the number of new generators is the invariant dimension minus
    the dimension of the part generated by lower-degree generators.  Spans are
    compared through values at random points over GF(prime).
    """
    p = prime or default_primes()[0]
    dims = invariant_dimensions(a, max_degree, mode=mode).dims
    npts = max(dims) + 24
    rng = np.random.Generator(np.random.PCG64(seed))
    points = rng.integers(1, p, size=(npts, a.dim_odd), dtype=np.int64)
    sub: dict[int, list[np.ndarray]] = {0: [np.ones(npts, dtype=np.int64)]}
    gens: dict[int, list[np.ndarray]] = {}
    degrees = []
    for d in range(1, max_degree + 1):
        products = []
        for e, gl in gens.items():
            if e <= d and d - e in sub:
                for g in gl:
                    for s in sub[d - e]:
                        products.append(g * s % p)
        basis: list[np.ndarray] = []
        r = 0
        for v in products:
            if _rank_rows(basis + [v], p) > r:
                basis.append(v)
                r += 1
        new = []
        if dims[d] > r:
            for v in _eval_polys(invariant_basis_modular(a, d, p), points, p):
                if _rank_rows(basis + [v], p) > r:
                    basis.append(v)
                    new.append(v)
                    r += 1
                    if r == dims[d]:
                        break
        if new:
            gens[d] = new
            degrees.extend([d] * len(new))
        sub[d] = basis
    return degrees


# --------------------------------------------------------------------------
# restriction to a subspace


def _poly_mul(p: Mapping[Monomial, object], q: Mapping[Monomial, object]) -> dict[Monomial, object]:
    out: dict = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            key = tuple(sorted(m1 + m2))
            out[key] = out.get(key, 0) + c1 * c2
    return {k: v for k, v in out.items() if v}


def substitute(p: Mapping[Monomial, object], images: Sequence[Mapping[Monomial, object]]) -> dict[Monomial, object]:
    """Replace variable l of ``p`` by the polynomial ``images[l]``."""
    out: dict = {}
    cache: dict[Monomial, dict] = {(): {(): 1}}

    def power(m: Monomial):
        if m not in cache:
            cache[m] = _poly_mul(power(m[:-1]), images[m[-1]])
        return cache[m]

    for m, c in p.items():
        for k, v in power(m).items():
            out[k] = out.get(k, 0) + c * v
    return {k: v for k, v in out.items() if v}


def restrict_polynomial(a: LieSuperalgebra, p: Mapping[Monomial, object],
                        target: Sequence[Sequence[object] | Mapping[int, object]]) -> dict[Monomial, Fraction]:
    """Pull ``p`` back along the inclusion of span(target) into g1.

    Target vectors are coordinate vectors over the full basis of ``a``; the
    result is a polynomial in one variable per target vector.
    """
    odd = a.odd
    pos = {k: l for l, k in enumerate(odd)}
    for m in p:
        if any(not 0 <= v < len(odd) for v in m):
            raise DimensionMismatch("polynomial uses a variable outside g1")
    images: list[dict] = [{} for _ in odd]
    for s, vec in enumerate(target):
        if isinstance(vec, Mapping):
            items = vec.items()
        else:
            if len(vec) != a.dim:
                raise DimensionMismatch(f"target vectors must have length {a.dim}")
            items = enumerate(vec)
        for k, c in items:
            if not c:
                continue
            if k not in pos:
                raise DimensionMismatch("target vector has an even component")
            images[pos[k]][(s,)] = images[pos[k]].get((s,), 0) + Fraction(c)
    return substitute(p, images)


# --------------------------------------------------------------------------
# the finite reflection groups


@dataclass(frozen=True)
class ReflectionGroupSpec:
    kind: str  # hyperoctahedral | signed4 | signed4_even | symmetric | symmetric_traceless
    rank: int
    degrees: tuple[int, ...]
    jacobian: str

    def allowed(self, e: Sequence[int]) -> bool:
        """Whether the monomial with exponents ``e`` is fixed by the diagonal part."""
        if self.kind == "hyperoctahedral":
            return all(x % 2 == 0 for x in e)
        if self.kind == "signed4":
            return all(x % 4 == 0 for x in e)
        if self.kind == "signed4_even":
            return all(x % 2 == 0 for x in e) and len({x % 4 for x in e}) <= 1
        return True

    def invariant_dimension(self, d: int) -> int:
        if self.kind == "symmetric_traceless":
            return _traceless_symmetric_dimension(self.rank + 1, d)
        # the diagonal part is spanned by allowed monomials; the permutations act on
        # them, so invariants are orbit sums, one per sorted exponent pattern
        count = 0
        for parts in _partitions_at_most(d, self.rank):
            e = list(parts) + [0] * (self.rank - len(parts))
            if self.allowed(e):
                count += 1
        return count

    def invariant_dimensions(self, max_degree: int) -> tuple[int, ...]:
        return tuple(self.invariant_dimension(d) for d in range(max_degree + 1))


def _partitions_at_most(d: int, parts: int, largest: int | None = None):
    if largest is None:
        largest = d
    if d == 0:
        yield ()
        return
    if parts == 0:
        return
    for first in range(min(d, largest), 0, -1):
        for rest in _partitions_at_most(d - first, parts - 1, first):
            yield (first,) + rest


def _traceless_transposition(n: int, j: int) -> list[dict]:
    """Linear substitution on trace-zero diagonal coordinates for swapping x_j, x_{j+1}.

    Coordinate s_i multiplies diag(e_i - e_{i+1}), i = 0..n-2, so x_i = s_i - s_{i-1}.
    """
    images = [{(i,): Fraction(1)} for i in range(n - 1)]
    img = {(j,): Fraction(-1)}
    if j - 1 >= 0:
        img[(j - 1,)] = Fraction(1)
    if j + 1 <= n - 2:
        img[(j + 1,)] = Fraction(1)
    images[j] = img
    return images


@lru_cache(maxsize=None)
def _traceless_symmetric_dimension(n: int, d: int) -> int:
    from .linalg import span_rank

    monos = list(itertools.combinations_with_replacement(range(n - 1), d))
    if d == 0:
        return 1
    perms = list(itertools.permutations(range(n)))
    idx = {m: i for i, m in enumerate(monos)}
    vecs = []
    for m in monos:
        acc: dict = {}
        for perm in perms:
            for k, v in substitute({m: Fraction(1)}, _permutation_substitution(n, perm)).items():
                acc[idx[k]] = acc.get(idx[k], 0) + v
        vecs.append({k: v for k, v in acc.items() if v})
    return span_rank(vecs)


def _permutation_substitution(n: int, perm: Sequence[int]) -> list[dict]:
    """Images of s_i = x_0 + ... + x_i after permuting diagonal entries by ``perm``."""
    # x_k = s_k - s_{k-1}; new s_i = sum_{j<=i} x_{perm[j]}
    images = []
    for i in range(n - 1):
        img: dict = {}
        for j in range(i + 1):
            k = perm[j]
            if k <= n - 2:
                img[(k,)] = img.get((k,), 0) + 1
            if k - 1 >= 0:
                img[(k - 1,)] = img.get((k - 1,), 0) - 1
        images.append({m: Fraction(v) for m, v in img.items() if v})
    return images


def reflection_group(family: str, params) -> ReflectionGroupSpec:
    fam = family.upper()
    p = tuple(int(x) for x in (params if not isinstance(params, int) else (params,)))
    if fam in ("PSL", "P"):
        raise NotPolar(f"{fam} acts stably but not polarly on its odd part")
    degs = tuple(table1_degrees(fam, p))
    if fam in ("GL", "SL"):
        r = min(p)
        return ReflectionGroupSpec("hyperoctahedral", r, degs, "x1...xr prod_{i<j} (xi^2 - xj^2)")
    if fam == "OSP":
        m, n = p[0] // 2, p[1] // 2
        r = min(m, n)
        if p[0] % 2 or m > n:
            return ReflectionGroupSpec("signed4", r, degs, "x1...xr prod_{i<j} (xi^4 - xj^4)")
        return ReflectionGroupSpec("signed4_even", r, degs, "x1^2...xr^2 prod_{i<j} (xi^4 - xj^4)")
    if fam == "QHAT":
        return ReflectionGroupSpec("symmetric", p[0], degs, "prod_{i<j} (xi - xj)")
    if fam == "Q":
        return ReflectionGroupSpec("symmetric_traceless", p[0] - 1, degs, "prod_{i<j} (xi - xj)")
    raise UnknownFamily(family)


def _clean(p: Mapping) -> dict:
    return {k: v for k, v in p.items() if v}


def w_invariance_check(family: str, params, q: Mapping[Monomial, object]) -> bool:
    """Whether ``q`` (a polynomial in the Cartan-subspace coordinates) is W-invariant.

    Diagonal generators are tested through exponent congruences, permutations by
    exact substitution of adjacent transpositions.
    """
    spec = reflection_group(family, params)
    q = _clean(q)
    r = spec.rank
    for m in q:
        if any(not 0 <= v < r for v in m):
            raise DimensionMismatch(f"polynomial must be in {r} variables")
        if not spec.allowed(to_exponents(m, r)):
            return False
    for j in range(r - 1 if spec.kind != "symmetric_traceless" else r):
        if spec.kind == "symmetric_traceless":
            images = _traceless_transposition(r + 1, j)
        else:
            images = [{(i,): 1} for i in range(r)]
            images[j], images[j + 1] = {(j + 1,): 1}, {(j,): 1}
        if _clean(substitute(q, images)) != q:
            return False
    return True


def jacobian_eval(family: str, params, point: Sequence[object]) -> Fraction:
    """The Jacobian of the reflection group evaluated at ``point``.

    For Q(n-1) the point may be given either as the n trace-zero diagonal entries
    or in the n-1 coordinates of the basis diag(e_i - e_{i+1}).
    """
    spec = reflection_group(family, params)
    x = [Fraction(v) for v in point]
    if spec.kind == "symmetric_traceless":
        n = spec.rank + 1
        if len(x) == n - 1:
            s = [Fraction(0)] + x + [Fraction(0)]
            x = [s[i + 1] - s[i] for i in range(n)]
        elif len(x) != n:
            raise DimensionMismatch(f"point must have {n - 1} or {n} coordinates")
    elif len(x) != spec.rank:
        raise DimensionMismatch(f"point must have {spec.rank} coordinates")
    out = Fraction(1)
    if spec.kind in ("symmetric", "symmetric_traceless"):
        for i, j in itertools.combinations(range(len(x)), 2):
            out *= x[i] - x[j]
        return out
    power = 2 if spec.kind == "hyperoctahedral" else 4
    lead = 2 if spec.kind == "signed4_even" else 1
    for v in x:
        out *= v ** lead
    for i, j in itertools.combinations(range(len(x)), 2):
        out *= x[i] ** power - x[j] ** power
    return out


def monomial_count(nvars: int, d: int) -> int:
    return comb(nvars + d - 1, d)
