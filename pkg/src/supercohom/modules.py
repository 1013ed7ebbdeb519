"""Finite-dimensional supermodules, rank-one projectivity and rank varieties."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .algebra import LieSuperalgebra, bracket
from .errors import AlgebraMismatch, InvalidParams, NonSemisimpleH
from .linalg import SparseMatrix, as_rational, format_rational, kernel_sparse, rank


@dataclass(frozen=True, eq=False)
class Supermodule:
    """Action matrices indexed by algebra basis element; even coordinates come first."""

    algebra: LieSuperalgebra
    dim0: int
    dim1: int
    action: tuple[SparseMatrix, ...]
    name: str = ""

    @property
    def dim(self) -> int:
        return self.dim0 + self.dim1

    def parity_of(self, i: int) -> int:
        return 0 if i < self.dim0 else 1

    def rho(self, x: Mapping[int, object] | Sequence[object]) -> SparseMatrix:
        """Action matrix of an algebra element given by coordinates."""
        items = x.items() if isinstance(x, Mapping) else enumerate(x)
        ent: dict = {}
        for k, c in items:
            c = as_rational(c)
            if not c:
                continue
            for key, v in self.action[k].entries.items():
                ent[key] = ent.get(key, 0) + c * v
        return SparseMatrix(self.dim, self.dim, ent)

    def __eq__(self, other):
        if not isinstance(other, Supermodule):
            return NotImplemented
        return (self.algebra.ref == other.algebra.ref and self.dim0 == other.dim0 and self.dim1 == other.dim1
                and self.action == other.action)

    def __hash__(self):
        return hash((self.algebra.ref, self.dim0, self.dim1))

    def __repr__(self):
        return f"Supermodule({self.name or '?'} over {self.algebra.ref}, dims=({self.dim0},{self.dim1}))"


def _check_same(m: Supermodule, n: Supermodule):
    if m.algebra.ref != n.algebra.ref or m.algebra.dim != n.algebra.dim:
        raise AlgebraMismatch(f"{m.algebra.ref} vs {n.algebra.ref}")


def _permute(mat: SparseMatrix, perm: Sequence[int]) -> SparseMatrix:
    """Rename coordinate i as perm[i] in both rows and columns."""
    return SparseMatrix(mat.rows, mat.cols, {(perm[i], perm[j]): v for (i, j), v in mat.entries.items()})


def _even_first(parities: Sequence[int]) -> list[int]:
    order = sorted(range(len(parities)), key=lambda i: (parities[i], i))
    perm = [0] * len(parities)
    for new, old in enumerate(order):
        perm[old] = new
    return perm


def kron(a: SparseMatrix, b: SparseMatrix) -> SparseMatrix:
    ent = {}
    for (i, j), v in a.entries.items():
        for (k, l), w in b.entries.items():
            ent[(i * b.rows + k, j * b.cols + l)] = v * w
    return SparseMatrix(a.rows * b.rows, a.cols * b.cols, ent)


def _diag(values: Sequence[object]) -> SparseMatrix:
    return SparseMatrix(len(values), len(values), {(i, i): v for i, v in enumerate(values) if v})


# --------------------------------------------------------------------------
# constructors


def trivial(a: LieSuperalgebra) -> Supermodule:
    zero = SparseMatrix.zeros(1, 1)
    return Supermodule(a, 1, 0, tuple(zero for _ in range(a.dim)), "trivial")


def natural(a: LieSuperalgebra) -> Supermodule:
    if a.matrices is None or a.vector_parity is None:
        raise AlgebraMismatch(f"{a.ref} has no matrix realisation")
    if a.quotient:
        raise AlgebraMismatch(f"{a.ref} is a quotient; its defining space is not a module")
    n = len(a.vector_parity)
    perm = _even_first(a.vector_parity)
    acts = tuple(_permute(SparseMatrix(n, n, m), perm) for m in a.matrices)
    d1 = sum(a.vector_parity)
    return Supermodule(a, n - d1, d1, acts, "natural")


def adjoint(a: LieSuperalgebra) -> Supermodule:
    acts = []
    for i in range(a.dim):
        ent = {}
        for j in range(a.dim):
            for k, c in a.bracket_basis(i, j).items():
                ent[(k, j)] = c
        acts.append(SparseMatrix(a.dim, a.dim, ent))
    # basis is already even-first
    return Supermodule(a, a.dim_even, a.dim_odd, tuple(acts), "adjoint")


def dual(m: Supermodule) -> Supermodule:
    """Contragredient: rho*(x)_{ab} = -(-1)^{|x||b|} rho(x)_{ba}."""
    acts = []
    for k, mat in enumerate(m.action):
        px = m.algebra.parity[k]
        ent = {}
        for (i, j), v in mat.entries.items():
            # entry (b, a) = (i, j) of rho(x) becomes entry (a, b) = (j, i)
            sign = -1 if px and m.parity_of(i) else 1
            ent[(j, i)] = -sign * v
        acts.append(SparseMatrix(m.dim, m.dim, ent))
    return Supermodule(m.algebra, m.dim0, m.dim1, tuple(acts), f"dual({m.name})")


def tensor(m: Supermodule, n: Supermodule) -> Supermodule:
    """x(u (x) v) = xu (x) v + (-1)^{|x||u|} u (x) xv, relaid out even-first."""
    _check_same(m, n)
    parities = [m.parity_of(i) ^ n.parity_of(j) for i in range(m.dim) for j in range(n.dim)]
    perm = _even_first(parities)
    ident_m = SparseMatrix.identity(m.dim)
    ident_n = SparseMatrix.identity(n.dim)
    sign_m = _diag([-1 if m.parity_of(i) else 1 for i in range(m.dim)])
    acts = []
    for k in range(m.algebra.dim):
        left = kron(m.action[k], ident_n)
        right = kron(sign_m if m.algebra.parity[k] else ident_m, n.action[k])
        acts.append(_permute(left + right, perm))
    d1 = sum(parities)
    return Supermodule(m.algebra, len(parities) - d1, d1, tuple(acts), f"({m.name})⊗({n.name})")


def parity_shift(m: Supermodule) -> Supermodule:
    parities = [1 - m.parity_of(i) for i in range(m.dim)]
    perm = _even_first(parities)
    acts = tuple(_permute(mat, perm) for mat in m.action)
    return Supermodule(m.algebra, m.dim1, m.dim0, acts, f"Π({m.name})")


def direct_sum(m: Supermodule, n: Supermodule) -> Supermodule:
    _check_same(m, n)
    parities = [m.parity_of(i) for i in range(m.dim)] + [n.parity_of(j) for j in range(n.dim)]
    perm = _even_first(parities)
    acts = []
    for k in range(m.algebra.dim):
        ent = dict(m.action[k].entries)
        ent.update({(i + m.dim, j + m.dim): v for (i, j), v in n.action[k].entries.items()})
        acts.append(_permute(SparseMatrix(m.dim + n.dim, m.dim + n.dim, ent), perm))
    return Supermodule(m.algebra, m.dim0 + n.dim0, m.dim1 + n.dim1, tuple(acts), f"({m.name})⊕({n.name})")


def restrict(m: Supermodule, sub: LieSuperalgebra) -> Supermodule:
    if sub.embedding is None or sub.ref.split(":", 1)[-1] != m.algebra.ref:
        raise AlgebraMismatch(f"{sub.ref} is not a subalgebra of {m.algebra.ref}")
    acts = tuple(m.rho(v) for v in sub.embedding)
    return Supermodule(sub, m.dim0, m.dim1, acts, f"res({m.name})")


def conjugate(m: Supermodule, g: SparseMatrix, g_inv: SparseMatrix) -> Supermodule:
    """Change of basis by an even invertible matrix."""
    for (i, j) in g.entries:
        if m.parity_of(i) != m.parity_of(j):
            raise InvalidParams("change of basis must be even")
    acts = tuple(g @ mat @ g_inv for mat in m.action)
    return Supermodule(m.algebra, m.dim0, m.dim1, acts, m.name)


def exterior_regular(e: LieSuperalgebra) -> Supermodule:
    """U(e) tensor_{U(e0)} C for a detecting subalgebra, i.e. the exterior algebra on e1.

    Valid when e0 commutes with e1: then e0 acts by zero and the odd basis
    elements act as anticommuting wedge operators.
    """
    odd = list(e.odd)
    r = len(odd)
    for h in e.even:
        for y in odd:
            if e.bracket_basis(h, y):
                raise InvalidParams("the even part must commute with the odd part")
    subsets = [s for k in range(r + 1) for s in itertools.combinations(range(r), k)]
    parities = [len(s) % 2 for s in subsets]
    perm = _even_first(parities)
    index = {s: perm[i] for i, s in enumerate(subsets)}
    acts = [SparseMatrix.zeros(len(subsets), len(subsets)) for _ in range(e.dim)]
    for pos, k in enumerate(odd):
        ent = {}
        for s in subsets:
            if pos in s:
                continue
            # moving y_pos past the smaller indices already present
            sign = -1 if sum(1 for t in s if t < pos) % 2 else 1
            new = tuple(sorted(s + (pos,)))
            ent[(index[new], index[s])] = Fraction(sign)
        acts[k] = SparseMatrix(len(subsets), len(subsets), ent)
    d1 = sum(parities)
    return Supermodule(e, len(subsets) - d1, d1, tuple(acts), "regular")


def from_odd_operators(e: LieSuperalgebra, odd_mats: Sequence[SparseMatrix], dim0: int, dim1: int,
                       name: str = "") -> Supermodule:
    """Module whose odd basis elements act by ``odd_mats``; the even action is
    forced by rho([y_i, y_j]) = Y_i Y_j + Y_j Y_i.  Even directions not reached by
    odd brackets act by zero.  The result should be checked with validate_module."""
    from .algebra import _Decomposer

    odd = list(e.odd)
    if len(odd_mats) != len(odd):
        raise InvalidParams(f"need {len(odd)} odd operators")
    pairs = []
    vecs = []
    for a_pos, i in enumerate(odd):
        for b_pos in range(a_pos, len(odd)):
            br = e.bracket_basis(i, odd[b_pos])
            if br:
                pairs.append((a_pos, b_pos))
                vecs.append(dict(br))
    # pick a maximal independent set of brackets, then invert on it
    chosen_pairs, chosen = [], []
    for pr, v in zip(pairs, vecs):
        try:
            _Decomposer(chosen + [v])
        except ValueError:
            continue
        chosen_pairs.append(pr)
        chosen.append(v)
    n = dim0 + dim1
    acts = [SparseMatrix.zeros(n, n) for _ in range(e.dim)]
    for pos, k in enumerate(odd):
        acts[k] = odd_mats[pos]
    if chosen:
        dec = _Decomposer(chosen)
        anti = [odd_mats[a] @ odd_mats[b] + odd_mats[b] @ odd_mats[a] for a, b in chosen_pairs]
        # write h_k in the chosen brackets and act by the matching anticommutators
        for k in e.even:
            coef = dec.coords({k: Fraction(1)})
            if coef is None:
                continue
            mat = SparseMatrix.zeros(n, n)
            for t, c in coef.items():
                mat = mat + anti[t].scale(c)
            acts[k] = mat
    return Supermodule(e, dim0, dim1, tuple(acts), name)


def validate_module(m: Supermodule) -> list[dict]:
    """Parity blocks and the bracket relation on all basis pairs."""
    out = []
    a = m.algebra
    for k, mat in enumerate(m.action):
        if mat.shape != (m.dim, m.dim):
            out.append({"kind": "shape", "where": [k]})
            continue
        for (i, j) in mat.entries:
            if m.parity_of(i) ^ m.parity_of(j) != a.parity[k]:
                out.append({"kind": "parity", "where": [k, i, j]})
                break
    for i in range(a.dim):
        for j in range(a.dim):
            sign = -1 if a.parity[i] and a.parity[j] else 1
            lhs = m.rho(a.bracket_basis(i, j))
            rhs = m.action[i] @ m.action[j] - (m.action[j] @ m.action[i]).scale(sign)
            if lhs != rhs:
                out.append({"kind": "relation", "where": [i, j]})
    return out


# --------------------------------------------------------------------------
# rank-one projectivity


@dataclass(frozen=True)
class RankOneRestriction:
    x: dict
    h: dict
    case: str  # "I" when [x,x] = 0, "II" otherwise


def rank_one(a: LieSuperalgebra, x: Mapping[int, object]) -> RankOneRestriction:
    h = {k: v for k, v in enumerate(bracket(a, x, x)) if v}
    return RankOneRestriction(dict(x), h, "I" if not h else "II")


def is_projective_over_x(m: Supermodule, x: Mapping[int, object] | Sequence[object]) -> bool:
    """Whether M is projective over the subalgebra generated by the odd element x.

    With h = [x,x], M splits as ker rho(h) plus the nonzero eigenspaces of rho(h),
    on which x squares to an invertible map.  On ker rho(h) x squares to zero, and
    projectivity there is freeness: rank rho(x) = dim / 2.
    """
    a = m.algebra
    xs = dict(x) if isinstance(x, Mapping) else {i: v for i, v in enumerate(x) if v}
    if any(a.parity[k] == 0 for k, v in xs.items() if v):
        raise InvalidParams("x must be odd")
    rho_x = m.rho(xs)
    rho_h = m.rho({k: v for k, v in enumerate(bracket(a, xs, xs)) if v})
    if rank(rho_h) != rank(rho_h @ rho_h):
        raise NonSemisimpleH("ker rho(h) differs from ker rho(h)^2")
    _, kern = kernel_sparse(rho_h)
    d0 = len(kern)
    if d0 == 0:
        return True
    basis = SparseMatrix.from_columns(kern, m.dim)
    return 2 * rank(rho_x @ basis) == d0


def duality_check(m: Supermodule, x) -> bool:
    return is_projective_over_x(m, x) == is_projective_over_x(dual(m), x)


def tensor_projectivity_law_check(m: Supermodule, n: Supermodule, x) -> bool:
    return is_projective_over_x(tensor(m, n), x) == (is_projective_over_x(m, x) or is_projective_over_x(n, x))


def direct_sum_law_check(m: Supermodule, n: Supermodule, x) -> bool:
    return is_projective_over_x(direct_sum(m, n), x) == (is_projective_over_x(m, x) and is_projective_over_x(n, x))


# --------------------------------------------------------------------------
# q(1) and random modules over detecting subalgebras


def q1_projective(a: LieSuperalgebra, lam) -> Supermodule:
    """The two-dimensional module P(lambda) of q(1) = QHAT(1) on which [x,x] acts by lambda.

    The odd basis element x satisfies [x,x] = 2h for the even basis element h.
    """
    if a.family != "QHAT" or a.params != (1,):
        raise AlgebraMismatch("P(lambda) is defined for QHAT(1)")
    lam = as_rational(lam)
    h_idx, x_idx = a.even[0], a.odd[0]
    acts = [None, None]
    acts[h_idx] = _diag([lam / 2, lam / 2])
    acts[x_idx] = SparseMatrix(2, 2, {(0, 1): lam / 2, (1, 0): 1})
    return Supermodule(a, 1, 1, tuple(acts), f"P({format_rational(lam)})")


def rank_one_tensor_check(a: LieSuperalgebra, lam, mu) -> dict:
    """Compare P(lam) (x) P(mu) with P(lam+mu) + P(lam+mu) through ranks."""
    lam, mu = as_rational(lam), as_rational(mu)
    t = tensor(q1_projective(a, lam), q1_projective(a, mu))
    s = direct_sum(q1_projective(a, lam + mu), q1_projective(a, lam + mu))
    x = {a.odd[0]: 1}
    h = {k: v for k, v in enumerate(bracket(a, x, x)) if v}
    out = {"graded_dims": (t.dim0, t.dim1) == (s.dim0, s.dim1)}
    shift = SparseMatrix.identity(t.dim).scale(lam + mu)
    out["h_scalar"] = rank(t.rho(h) - shift) == 0 and rank(s.rho(h) - shift) == 0
    ok = True
    pt, ps = t.rho(x), s.rho(x)
    acc_t, acc_s = pt, ps
    for _ in range(4):
        ok &= rank(acc_t) == rank(acc_s)
        acc_t, acc_s = acc_t @ pt, acc_s @ ps
    out["x_power_ranks"] = ok
    out["projective"] = is_projective_over_x(t, x) and is_projective_over_x(s, x)
    out["holds"] = all(out.values())
    return out


def _rank_one_block(kind: str, lam: Fraction = Fraction(0)) -> tuple[SparseMatrix, int, int]:
    """(odd operator Y, dim0, dim1) with Y^2 scalar, for one odd generator."""
    if kind == "C":
        return SparseMatrix.zeros(1, 1), 1, 0
    if kind == "ΠC":
        return SparseMatrix.zeros(1, 1), 0, 1
    if kind == "P":
        return SparseMatrix(2, 2, {(0, 1): lam / 2, (1, 0): Fraction(1)}), 1, 1
    raise InvalidParams(kind)


def _block_sum(blocks: Sequence[tuple[SparseMatrix, int, int]]) -> tuple[SparseMatrix, int, int]:
    parities = []
    ent = {}
    off = 0
    for y, d0, d1 in blocks:
        parities += [0] * d0 + [1] * d1
        ent.update({(i + off, j + off): v for (i, j), v in y.entries.items()})
        off += d0 + d1
    perm = _even_first(parities)
    mat = _permute(SparseMatrix(off, off, ent), perm)
    d1 = sum(parities)
    return mat, off - d1, d1


def random_module(e: LieSuperalgebra, rng: np.random.Generator, blocks_per_factor: int = 2,
                  name: str = "random") -> Supermodule:
    """A random module over a detecting subalgebra whose odd basis anticommutes pairwise.

    Each odd generator gets a random sum of rank-one blocks (C, ΠC, P(lambda)),
    the factors are combined by a graded tensor product, and the result is
    conjugated by a random even change of basis.
    """
    odd = list(e.odd)
    factors = []
    for _ in odd:
        blocks = []
        for _ in range(blocks_per_factor):
            kind = ["C", "ΠC", "P", "P"][int(rng.integers(0, 4))]
            lam = Fraction(int(rng.integers(-3, 4)))
            blocks.append(_rank_one_block(kind, lam))
        factors.append(_block_sum(blocks))
    # graded tensor product of the factors: Y_i acts on slot i with signs from earlier slots
    mats = []
    dims = [d0 + d1 for _, d0, d1 in factors]
    for i, (y, d0, _) in enumerate(factors):
        op = SparseMatrix.identity(1)
        for j, (_, dj0, _) in enumerate(factors):
            if j < i:
                op = kron(op, _diag([1] * dj0 + [-1] * (dims[j] - dj0)))
            elif j == i:
                op = kron(op, y)
            else:
                op = kron(op, SparseMatrix.identity(dims[j]))
        mats.append(op)
    parities = [0]
    for _, d0, d1 in factors:
        parities = [p ^ q for p in parities for q in [0] * d0 + [1] * d1]
    perm = _even_first(parities)
    mats = [_permute(m, perm) for m in mats]
    d1 = sum(parities)
    d0 = len(parities) - d1
    mod = from_odd_operators(e, mats, d0, d1, name)
    g, g_inv = _random_even_basis_change(d0, d1, rng)
    return conjugate(mod, g, g_inv)


def _random_even_basis_change(d0: int, d1: int, rng: np.random.Generator) -> tuple[SparseMatrix, SparseMatrix]:
    """Unit lower-triangular blocks, so the inverse is exact and cheap."""
    from .linalg import inverse

    ent = {}
    for lo, size in ((0, d0), (d0, d1)):
        for i in range(size):
            ent[(lo + i, lo + i)] = Fraction(1)
            for j in range(i):
                v = int(rng.integers(-2, 3))
                if v:
                    ent[(lo + i, lo + j)] = Fraction(v)
    g = SparseMatrix(d0 + d1, d0 + d1, ent)
    return g, inverse(g)


# --------------------------------------------------------------------------
# rank varieties


@dataclass
class RankVarietyReport:
    module: str
    strata: list[dict] = field(default_factory=list)
    estimated_dim: int = 0
    estimated_dim_any: int = 0
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "module": self.module,
            "seed": self.seed,
            "estimated_dim": self.estimated_dim,
            "estimated_dim_any": self.estimated_dim_any,
            "strata": self.strata,
        }


def sample_point(rng: np.random.Generator, support: Sequence[int]) -> list[int]:
    """Nonzero integers in [-9, 9] on the support."""
    vals = rng.integers(1, 10, size=len(support)) * rng.choice([-1, 1], size=len(support))
    return [int(v) for v in vals]


def rank_variety_probe(m: Supermodule, e1_basis: Sequence[Mapping[int, object]] | None = None,
                       samples_per_stratum: int = 5, seed: int = 0) -> RankVarietyReport:
    """Sample points of each coordinate stratum of e1 and test projectivity.

    Strata are the nonempty supports S of the coordinates, in lexicographic
    order.  ``estimated_dim`` is the largest |S| whose samples are all
    nonprojective; ``estimated_dim_any`` the largest |S| with some
    nonprojective sample.
    """
    a = m.algebra
    basis = [dict(v) for v in e1_basis] if e1_basis is not None else [{k: Fraction(1)} for k in a.odd]
    r = len(basis)
    rng = np.random.Generator(np.random.PCG64(seed))
    supports = sorted(s for k in range(1, r + 1) for s in itertools.combinations(range(r), k))
    report = RankVarietyReport(m.name, seed=seed)
    for s in supports:
        points, flags = [], []
        for _ in range(samples_per_stratum):
            coords = sample_point(rng, s)
            x: dict[int, Fraction] = {}
            for c, idx in zip(coords, s):
                for k, v in basis[idx].items():
                    x[k] = x.get(k, 0) + c * Fraction(v)
            try:
                flags.append(is_projective_over_x(m, x))
            except NonSemisimpleH:
                flags.append(None)
            points.append(coords)
        nonproj = [f is False for f in flags]
        if nonproj and all(nonproj):
            report.estimated_dim = max(report.estimated_dim, len(s))
        if any(nonproj):
            report.estimated_dim_any = max(report.estimated_dim_any, len(s))
        report.strata.append({"support": list(s), "points": points, "projective": flags})
    return report


# --------------------------------------------------------------------------
# JSON


def resolve_algebra(ref: str) -> LieSuperalgebra:
    """Rebuild an algebra from its reference string, e.g. "GL:1,1" or "E:GL:2,2"."""
    from .algebra import build
    from .detecting import assemble_detecting

    parts = ref.split(":")
    if parts[0] in ("E", "F") and len(parts) == 3:
        return assemble_detecting(resolve_algebra(":".join(parts[1:])), parts[0])[0]
    if len(parts) != 2:
        raise InvalidParams(f"cannot parse algebra reference {ref!r}")
    return build(parts[0], [int(p) for p in parts[1].split(",") if p])


def module_to_dict(m: Supermodule) -> dict:
    action = sorted([k, i, j, format_rational(v)] for k, mat in enumerate(m.action) for (i, j), v in mat.entries.items())
    return {"algebra_ref": m.algebra.ref, "dim0": m.dim0, "dim1": m.dim1, "action": action, "name": m.name}


def module_from_dict(d: Mapping, algebra: LieSuperalgebra | None = None) -> Supermodule:
    a = algebra if algebra is not None else resolve_algebra(d["algebra_ref"])
    if a.ref != d["algebra_ref"]:
        raise AlgebraMismatch(f"module is over {d['algebra_ref']}, got {a.ref}")
    n = int(d["dim0"]) + int(d["dim1"])
    ents: list[dict] = [{} for _ in range(a.dim)]
    for k, i, j, v in d["action"]:
        if not 0 <= k < a.dim:
            raise InvalidParams(f"action index {k} outside algebra of dimension {a.dim}")
        ents[k][(i, j)] = Fraction(v)
    acts = tuple(SparseMatrix(n, n, e) for e in ents)
    return Supermodule(a, int(d["dim0"]), int(d["dim1"]), acts, d.get("name", ""))


def module_to_json(m: Supermodule) -> str:
    return json.dumps(module_to_dict(m), sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def module_from_json(text: str, algebra: LieSuperalgebra | None = None) -> Supermodule:
    return module_from_dict(json.loads(text), algebra)
