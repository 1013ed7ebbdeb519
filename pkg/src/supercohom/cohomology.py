"""Relative cohomology H(a, a0; M), its polynomial module structure and support varieties.

A p-cochain is a function on the degree-p monomials in the odd basis with
values in M.  Ambient coordinates are pairs (monomial, module index); the
cochains proper are the a0-invariant ones.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import factorial
from typing import Mapping, Sequence

import numpy as np

from .algebra import LieSuperalgebra
from .errors import AlgebraMismatch, InvalidParams
from .invariants import DimensionSeries, Monomial, Poly, SymmetricPowerBasis, generating_even
from .linalg import SparseMatrix, kernel_sparse, rank
from .modules import Supermodule, dual, is_projective_over_x, restrict, sample_point, tensor, trivial

Cochain = dict  # ambient index -> Fraction


def _multinomial_weight(m: Monomial) -> int:
    """b! for the exponent vector b of the monomial."""
    out = 1
    for _, grp in itertools.groupby(m):
        out *= factorial(len(list(grp)))
    return out


def _remove_at(m: Monomial, i: int) -> Monomial:
    return m[:i] + m[i + 1:]


class RelativeComplex:
    """The cochain complex for the pair (a, a0) with coefficients in M, built lazily per degree."""

    def __init__(self, a: LieSuperalgebra, module: Supermodule):
        if module.algebra.ref != a.ref or module.algebra.dim != a.dim:
            raise AlgebraMismatch(f"module is over {module.algebra.ref}, not {a.ref}")
        self.algebra = a
        self.module = module
        self.odd = list(a.odd)
        self.nvars = len(self.odd)
        self._ambient: dict[int, list[tuple[Monomial, int]]] = {}
        self._invariants: dict[int, tuple[list[int], list[Cochain]]] = {}
        self._amb_diff: dict[int, SparseMatrix] = {}
        self._diff: dict[int, SparseMatrix] = {}

    # ---- weights --------------------------------------------------------

    @cached_property
    def _weights(self):
        """(odd weights, module weights) when the Cartan acts diagonally, else None."""
        a, m = self.algebra, self.module
        if not a.cartan_indices:
            return None
        mod_wt = [[Fraction(0)] * len(a.cartan_indices) for _ in range(m.dim)]
        for c, h in enumerate(a.cartan_indices):
            for (i, j), v in m.action[h].entries.items():
                if i != j:
                    return None
                mod_wt[i][c] = v
        odd_wt = [a.cartan_values[k] for k in self.odd]
        return odd_wt, [tuple(w) for w in mod_wt]

    def ambient(self, p: int) -> list[tuple[Monomial, int]]:
        """Ambient coordinates of degree p, restricted to weight zero when weights are available."""
        if p not in self._ambient:
            monos = SymmetricPowerBasis.of(self.nvars, p).monomials
            wts = self._weights
            out = []
            for mono in monos:
                if wts is None:
                    out.extend((mono, j) for j in range(self.module.dim))
                    continue
                odd_wt, mod_wt = wts
                s = [sum(odd_wt[v][c] for v in mono) for c in range(len(self.algebra.cartan_indices))]
                out.extend((mono, j) for j in range(self.module.dim) if list(mod_wt[j]) == s)
            self._ambient[p] = out
        return self._ambient[p]

    def ambient_index(self, p: int) -> dict[tuple[Monomial, int], int]:
        return {key: i for i, key in enumerate(self.ambient(p))}

    def cochain_parity(self, p: int, j: int) -> int:
        return (p + self.module.parity_of(j)) % 2

    # ---- invariants ------------------------------------------------------

    def _even_action_rows(self, p: int) -> SparseMatrix:
        """Stacked maps phi -> z.phi for generating even z; their common kernel is the cochain space."""
        a, m = self.algebra, self.module
        cols = self.ambient(p)
        gens = generating_even(a) if self._weights is not None else list(a.even)
        pos = {k: l for l, k in enumerate(self.odd)}
        row_of: dict = {}
        ent: dict = {}

        def put(row_key, c, v):
            r = row_of.setdefault(row_key, len(row_of))
            ent[(r, c)] = ent.get((r, c), 0) + v

        for z in gens:
            rho_z = m.action[z].col_dicts()
            # [z, x_k] = sum_l A_lk x_l
            ad = {pos[k]: {pos[t]: v for t, v in a.bracket_basis(z, k).items()} for k in self.odd}
            for c, (mono, j) in enumerate(cols):
                # (z.phi)(x^b) = rho(z) phi(x^b) - phi(z.x^b); here phi is the basis cochain at (mono, j)
                for i, v in rho_z[j].items():
                    put((z, mono, i), c, v)
                # phi(z.x^b) picks the coefficient of ``mono`` in z.x^b over all b
                for b_mono, coeff in _derivation_preimage(ad, mono).items():
                    put((z, b_mono, j), c, -coeff)
        ent = {k: v for k, v in ent.items() if v}
        return SparseMatrix(len(row_of), len(cols), ent)

    def invariants(self, p: int) -> tuple[list[int], list[Cochain]]:
        """(free ambient columns, basis of invariant cochains); coordinates are values at the free columns."""
        if p not in self._invariants:
            self._invariants[p] = kernel_sparse(self._even_action_rows(p))
        return self._invariants[p]

    def cochain_dim(self, p: int) -> int:
        return len(self.invariants(p)[1])

    def coordinates(self, p: int, vec: Cochain) -> dict[int, Fraction]:
        free, _ = self.invariants(p)
        return {i: vec[f] for i, f in enumerate(free) if vec.get(f)}

    # ---- differential -----------------------------------------------------

    def ambient_differential(self, p: int) -> SparseMatrix:
        """Matrix of d on ambient coordinates, degree p to p+1, from the general sign rule.

        (d phi)(x_1...x_{p+1}) = sum_i (-1)^{gamma_i} x_i . phi(x_1..^x_i..x_{p+1})
        with gamma_i = i + 1 + |x_i| (|x_1| + ... + |x_{i-1}| + |phi|).
        """
        if p not in self._amb_diff:
            a, m = self.algebra, self.module
            src = self.ambient_index(p)
            tgt = self.ambient_index(p + 1)
            par = [a.parity[k] for k in self.odd]
            rho_cols = [m.action[k].col_dicts() for k in self.odd]
            ent: dict = {}
            for mono in SymmetricPowerBasis.of(self.nvars, p + 1).monomials:
                for i0, k in enumerate(mono):
                    i = i0 + 1
                    before = sum(par[v] for v in mono[:i0])
                    rest = _remove_at(mono, i0)
                    for j in range(m.dim):
                        c = src.get((rest, j))
                        if c is None:
                            continue
                        gamma = i + 1 + par[k] * (before + self.cochain_parity(p, j))
                        sign = -1 if gamma % 2 else 1
                        for r, v in rho_cols[k][j].items():
                            row = tgt.get((mono, r))
                            if row is None:
                                raise AssertionError("differential left the weight-zero ambient space")
                            ent[(row, c)] = ent.get((row, c), 0) + sign * v
            ent = {k: v for k, v in ent.items() if v}
            self._amb_diff[p] = SparseMatrix(len(tgt), len(src), ent)
        return self._amb_diff[p]

    def apply_ambient(self, p: int, vec: Cochain) -> Cochain:
        mat = self.ambient_differential(p)
        out: dict = {}
        cols = mat.col_dicts()
        for c, v in vec.items():
            for r, w in cols[c].items():
                out[r] = out.get(r, 0) + v * w
        return {k: v for k, v in out.items() if v}

    def differential(self, p: int) -> SparseMatrix:
        """d^p on cochains, in the invariant bases of degrees p and p+1."""
        if p not in self._diff:
            _, basis = self.invariants(p)
            cols = [self.coordinates(p + 1, self.apply_ambient(p, b)) for b in basis]
            self._diff[p] = SparseMatrix.from_columns(cols, self.cochain_dim(p + 1))
        return self._diff[p]

    def d_squared_zero(self, p: int) -> bool:
        return not (self.differential(p + 1) @ self.differential(p)).entries

    def cocycles(self, p: int) -> list[Cochain]:
        _, basis = self.invariants(p)
        _, ker = kernel_sparse(self.differential(p))
        out = []
        for v in ker:
            acc: dict = {}
            for i, c in v.items():
                for k, w in basis[i].items():
                    acc[k] = acc.get(k, 0) + c * w
            out.append({k: w for k, w in acc.items() if w})
        return out

    def boundaries(self, p: int) -> list[Cochain]:
        if p == 0:
            return []
        _, basis = self.invariants(p - 1)
        return [v for v in (self.apply_ambient(p - 1, b) for b in basis) if v]

    def dims(self, max_degree: int) -> DimensionSeries:
        ranks = [rank(self.differential(p)) for p in range(max_degree + 1)]
        out = []
        for p in range(max_degree + 1):
            out.append(self.cochain_dim(p) - ranks[p] - (ranks[p - 1] if p else 0))
        meta = {"cochain_dims": [self.cochain_dim(p) for p in range(max_degree + 1)], "ranks": ranks}
        return DimensionSeries(tuple(out), meta)


def _derivation_preimage(ad: Mapping[int, Mapping[int, Fraction]], target: Monomial) -> dict[Monomial, Fraction]:
    """Coefficient of ``target`` in z.x^b, for every monomial b with a nonzero one.

    z.x^b = sum over positions of x_k in b of [z, x_k] in place of x_k.
    """
    out: dict = {}
    for i0, l in enumerate(target):
        if i0 and target[i0 - 1] == l:
            continue
        rest = _remove_at(target, i0)
        for k, row in ad.items():
            v = row.get(l)
            if not v:
                continue
            # replacing one of the b_k copies of x_k in x^b by x_l gives the target
            b = tuple(sorted(rest + (k,)))
            out[b] = out.get(b, 0) + b.count(k) * v
    return {k: v for k, v in out.items() if v}


def differential(a: LieSuperalgebra, module: Supermodule, p: int) -> SparseMatrix:
    return RelativeComplex(a, module).differential(p)


def cohomology_dims(a: LieSuperalgebra, module: Supermodule | None, max_degree: int) -> DimensionSeries:
    if max_degree < 0:
        raise InvalidParams("max_degree must be >= 0")
    return RelativeComplex(a, module if module is not None else trivial(a)).dims(max_degree)


def euler_check(a: LieSuperalgebra, module: Supermodule, max_degree: int) -> bool:
    """Alternating sums of cochain and cohomology dimensions through ``max_degree``.

    The truncated complex differs from the full one by the image of the last
    differential, which is accounted for.
    """
    cx = RelativeComplex(a, module)
    h = cx.dims(max_degree).dims
    c = [cx.cochain_dim(p) for p in range(max_degree + 1)]
    last = rank(cx.differential(max_degree))
    lhs = sum((-1) ** p * c[p] for p in range(max_degree + 1))
    rhs = sum((-1) ** p * h[p] for p in range(max_degree + 1)) + (-1) ** max_degree * last
    return lhs == rhs


# --------------------------------------------------------------------------
# the polynomial module structure for detecting subalgebras


def _require_abelian_odd_action(e: LieSuperalgebra):
    for h in e.even:
        for y in e.odd:
            if e.bracket_basis(h, y):
                raise InvalidParams("the even part must commute with the odd part")


def module_action(cx: RelativeComplex, r: Mapping[Monomial, object], c: Cochain, p: int) -> Cochain:
    """Multiply the degree-p cochain ``c`` by the polynomial ``r`` on the odd part.

    A cochain phi corresponds to sum_b phi(x^b)/b! xi^b (tensor) M; in that
    picture the action is plain polynomial multiplication.
    """
    _require_abelian_odd_action(cx.algebra)
    src = cx.ambient(p)
    deg = {len(m) for m in r}
    if len(deg) > 1:
        raise InvalidParams("r must be homogeneous")
    q = deg.pop() if deg else 0
    tgt = cx.ambient_index(p + q)
    out: dict = {}
    for idx, v in c.items():
        mono, j = src[idx]
        f = Fraction(v) / _multinomial_weight(mono)
        for rm, rc in r.items():
            if not rc:
                continue
            new = tuple(sorted(mono + rm))
            key = tgt[(new, j)]
            out[key] = out.get(key, 0) + f * Fraction(rc) * _multinomial_weight(new)
    return {k: v for k, v in out.items() if v}


def leibniz_check(cx: RelativeComplex, r: Mapping[Monomial, object], c: Cochain, p: int) -> bool:
    """d(r c) = (-1)^q r dc, the differential on polynomials being zero."""
    q = len(next(iter(r))) if r else 0
    lhs = cx.apply_ambient(p + q, module_action(cx, r, c, p))
    rhs = module_action(cx, r, cx.apply_ambient(p, c), p + 1)
    if q % 2:
        rhs = {k: -v for k, v in rhs.items()}
    return lhs == rhs


@dataclass
class TruncatedIdeal:
    cutoff: int
    nvars: int
    components: dict[int, list[Poly]] = field(default_factory=dict)
    generators: list[Poly] = field(default_factory=list)

    def vanishes_at(self, point: Sequence[object]) -> bool:
        pt = [Fraction(v) for v in point]
        for polys in self.components.values():
            for f in polys:
                if evaluate(f, pt) != 0:
                    return False
        return True

    def is_zero(self) -> bool:
        return not any(self.components.values())

    def to_dict(self) -> dict:
        def enc(poly):
            return sorted([list(m), str(c)] for m, c in poly.items())

        return {
            "cutoff": self.cutoff,
            "nvars": self.nvars,
            "components": {str(q): [enc(f) for f in fs] for q, fs in sorted(self.components.items())},
            "generators": [enc(f) for f in self.generators],
        }


def evaluate(poly: Mapping[Monomial, object], point: Sequence[Fraction]) -> Fraction:
    total = Fraction(0)
    for m, c in poly.items():
        term = Fraction(c)
        for v in m:
            term *= point[v]
        total += term
    return total


def _left_annihilator(vectors: Sequence[Cochain], size: int) -> list[dict[int, Fraction]]:
    """Functionals on the ambient space vanishing on every vector."""
    if not vectors:
        return [{i: Fraction(1)} for i in range(size)]
    _, ker = kernel_sparse(SparseMatrix.from_rows(vectors, size))
    return ker


def annihilator_truncated(e: LieSuperalgebra, module: Supermodule, max_degree: int) -> TruncatedIdeal:
    """Polynomials f of degree q <= D with f.H^p(M* (x) M) = 0 in H^{p+q} for all p <= D - q."""
    _require_abelian_odd_action(e)
    cx = RelativeComplex(e, tensor(dual(module), module))
    nv = cx.nvars
    cocycles = {p: cx.cocycles(p) for p in range(max_degree + 1)}
    ann = {p: _left_annihilator(cx.boundaries(p), len(cx.ambient(p))) for p in range(max_degree + 1)}
    ideal = TruncatedIdeal(max_degree, nv)
    for q in range(max_degree + 1):
        monos = SymmetricPowerBasis.of(nv, q).monomials
        rows: list[dict[int, Fraction]] = []
        for p in range(max_degree - q + 1):
            for z in cocycles[p]:
                images = [module_action(cx, {mono: 1}, z, p) for mono in monos]
                for w in ann[p + q]:
                    row = {}
                    for col, img in enumerate(images):
                        s = sum((w.get(k, 0) * v for k, v in img.items()), Fraction(0))
                        if s:
                            row[col] = s
                    if row:
                        rows.append(row)
        _, ker = kernel_sparse(SparseMatrix.from_rows(rows, len(monos)))
        ideal.components[q] = [{monos[i]: v for i, v in vec.items()} for vec in ker]
    ideal.generators = _minimal_generators(ideal, nv)
    return ideal


def _minimal_generators(ideal: TruncatedIdeal, nvars: int) -> list[Poly]:
    from .invariants import _poly_mul
    from .linalg import IntegerEchelon

    gens = []
    for q in sorted(ideal.components):
        index = {m: i for i, m in enumerate(SymmetricPowerBasis.of(nvars, q).monomials)}
        ech = IntegerEchelon()
        if q > 0:
            for f in ideal.components.get(q - 1, []):
                for v in range(nvars):
                    prod = _poly_mul(f, {(v,): 1})
                    ech.add({index[m]: c for m, c in prod.items()})
        for f in ideal.components[q]:
            if ech.add({index[m]: c for m, c in f.items()}):
                gens.append(f)
    return gens


@dataclass
class SupportComparison:
    module: str
    cutoff: int
    points: list[list[int]]
    in_rank_variety: list[bool]
    in_support_variety: list[bool]
    note: str = ("support membership means every certified ideal element up to the cutoff vanishes; "
                 "this over-approximates the true support variety")

    @property
    def disagreements(self) -> list[int]:
        return [i for i, (a, b) in enumerate(zip(self.in_rank_variety, self.in_support_variety)) if a != b]

    def to_dict(self) -> dict:
        return {
            "module": self.module,
            "cutoff": self.cutoff,
            "points": self.points,
            "in_rank_variety": self.in_rank_variety,
            "in_support_variety": self.in_support_variety,
            "disagreements": self.disagreements,
            "note": self.note,
        }


def avrunin_scott_compare(module: Supermodule, max_degree: int = 8, samples: int = 50,
                          seed: int = 0) -> SupportComparison:
    """Rank variety against annihilator support at random nonzero points of e1."""
    e = module.algebra
    ideal = annihilator_truncated(e, module, max_degree)
    odd = list(e.odd)
    rng = np.random.Generator(np.random.PCG64(seed))
    pts, rank_in, supp_in = [], [], []
    for _ in range(samples):
        # random support, at least one coordinate
        mask = rng.integers(0, 2, size=len(odd))
        if not mask.any():
            mask[int(rng.integers(0, len(odd)))] = 1
        support = [i for i in range(len(odd)) if mask[i]]
        vals = sample_point(rng, support)
        coords = [0] * len(odd)
        for i, v in zip(support, vals):
            coords[i] = v
        x = {k: Fraction(c) for k, c in zip(odd, coords) if c}
        pts.append(coords)
        rank_in.append(not is_projective_over_x(module, x))
        supp_in.append(ideal.vanishes_at(coords))
    return SupportComparison(module.name, max_degree, pts, rank_in, supp_in)


# --------------------------------------------------------------------------
# helpers


def pair_algebra(g: LieSuperalgebra, pair: str) -> LieSuperalgebra:
    """The first member of the pair (g, g0), (f, f0) or (e, e0)."""
    pair = pair.lower()
    if pair == "g":
        return g
    if pair in ("e", "f"):
        from .detecting import assemble_detecting

        return assemble_detecting(g, pair.upper())[0]
    raise InvalidParams(f"unknown pair {pair!r}")


def coefficients_over(target: LieSuperalgebra, module: Supermodule | None) -> Supermodule:
    """Restrict a module to ``target`` if it is given over the parent algebra."""
    if module is None:
        return trivial(target)
    if module.algebra.ref == target.ref:
        return module
    return restrict(module, target)
