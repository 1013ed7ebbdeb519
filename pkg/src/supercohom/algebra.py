"""Classical Lie superalgebras as structure-constant algebras over Q.

Every family is realised inside gl(V) for a super vector space V.  Basis
matrices are listed even-first, the bracket is the supercommutator, and
structure constants are obtained by decomposing each supercommutator in the
chosen basis.  Quotient families (psl(n|n) and Q(n-1)) carry one extra central
matrix whose coefficient is discarded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Hashable, Mapping, Sequence

import numpy as np

from .errors import ClosureFailure, DimensionMismatch, InvalidParams
from .linalg import IntegerEchelon, SparseMatrix, as_rational, format_rational, inverse, kernel_basis

FAMILIES = ("GL", "SL", "PSL", "OSP", "P", "Q", "QHAT", "SUB")

Matrix = dict  # sparse square matrix: (row, col) -> Fraction
Vector = dict  # sparse coordinate vector: index -> Fraction


# --------------------------------------------------------------------------
# sparse matrix helpers on V


def mat_mul(x: Matrix, y: Matrix) -> Matrix:
    by_row: dict[int, list[tuple[int, Fraction]]] = {}
    for (r, c), v in y.items():
        by_row.setdefault(r, []).append((c, v))
    out: Matrix = {}
    for (r, k), v in x.items():
        for c, w in by_row.get(k, ()):
            out[(r, c)] = out.get((r, c), 0) + v * w
    return {k: v for k, v in out.items() if v}


def mat_lincomb(terms: Sequence[tuple[object, Matrix]]) -> Matrix:
    out: Matrix = {}
    for coef, m in terms:
        coef = as_rational(coef)
        if not coef:
            continue
        for k, v in m.items():
            out[k] = out.get(k, 0) + coef * v
    return {k: v for k, v in out.items() if v}


def supercommutator(x: Matrix, px: int, y: Matrix, py: int) -> Matrix:
    sign = -1 if px and py else 1
    return mat_lincomb([(1, mat_mul(x, y)), (-sign, mat_mul(y, x))])


def supertrace(x: Matrix, vector_parity: Sequence[int]) -> Fraction:
    return sum((v if vector_parity[r] == 0 else -v for (r, c), v in x.items() if r == c), Fraction(0))


# --------------------------------------------------------------------------
# decomposition in a spanning family


class _Decomposer:
    """Coordinates of vectors with respect to a linearly independent family."""

    def __init__(self, family: Sequence[Mapping[Hashable, Fraction]]):
        self.family = [dict(f) for f in family]
        n = len(self.family)
        keys = sorted({k for f in self.family for k in f})
        ech = IntegerEchelon()
        chosen = []
        for key in keys:
            row = {i: f[key] for i, f in enumerate(self.family) if key in f}
            if ech.add(row):
                chosen.append(key)
                if len(chosen) == n:
                    break
        if len(chosen) < n:
            raise ValueError("spanning family is linearly dependent")
        self.keys = chosen
        square = SparseMatrix(n, n, {(r, i): f[key] for r, key in enumerate(chosen)
                                     for i, f in enumerate(self.family) if key in f})
        self.inv = inverse(square).row_dicts() if n else []

    def coords(self, x: Mapping[Hashable, Fraction]) -> dict[int, Fraction] | None:
        rhs = [x.get(k, 0) for k in self.keys]
        coef = {}
        for i, row in enumerate(self.inv):
            v = sum((w * rhs[j] for j, w in row.items() if rhs[j]), Fraction(0))
            if v:
                coef[i] = v
        recon: dict = {}
        for i, c in coef.items():
            for k, v in self.family[i].items():
                recon[k] = recon.get(k, 0) + c * v
        recon = {k: v for k, v in recon.items() if v}
        target = {k: as_rational(v) for k, v in x.items() if v}
        return coef if recon == target else None


# --------------------------------------------------------------------------
# the algebra object


@dataclass(frozen=True)
class Root:
    coords: tuple[Fraction, ...]
    parity: int
    positive: bool


@dataclass(frozen=True, eq=False)
class LieSuperalgebra:
    """A finite-dimensional Lie superalgebra given by structure constants.

    ``constants[(i, j)]`` is the sparse coordinate vector of ``[x_i, x_j]``.
    Matrix families also record the defining matrices on V, so the natural
    module and the supertrace form can be recovered.
    """

    family: str
    params: tuple[int, ...]
    basis_labels: tuple[str, ...]
    parity: tuple[int, ...]
    constants: dict
    cartan_indices: tuple[int, ...] = ()
    weight_of: tuple[tuple[Fraction, ...], ...] | None = None
    cartan_coords: tuple[tuple[Fraction, ...], ...] = ()
    coord_labels: tuple[str, ...] = ()
    form: tuple[tuple[Fraction, ...], ...] | None = None
    weight_form: tuple[tuple[Fraction, ...], ...] | None = None
    zero_odd: tuple[int, ...] = ()
    matrices: tuple[Matrix, ...] | None = None
    vector_parity: tuple[int, ...] | None = None
    quotient: bool = False
    ref: str = ""
    embedding: tuple[Vector, ...] | None = None

    @property
    def dim(self) -> int:
        return len(self.parity)

    @cached_property
    def even(self) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.parity) if p == 0)

    @cached_property
    def odd(self) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.parity) if p == 1)

    @property
    def dim_even(self) -> int:
        return len(self.even)

    @property
    def dim_odd(self) -> int:
        return len(self.odd)

    @property
    def rank(self) -> int:
        return len(self.coord_labels)

    def bracket_basis(self, i: int, j: int) -> dict[int, Fraction]:
        return self.constants.get((i, j), {})

    @cached_property
    def cartan_values(self) -> tuple[tuple[Fraction, ...], ...]:
        """Eigenvalue of each Cartan element on each basis element, read off the brackets."""
        out = []
        for k in range(self.dim):
            out.append(tuple(self.bracket_basis(h, k).get(k, Fraction(0)) for h in self.cartan_indices))
        return tuple(out)

    def __eq__(self, other):
        if not isinstance(other, LieSuperalgebra):
            return NotImplemented
        return to_dict(self) == to_dict(other)

    def __hash__(self):
        return hash(to_json(self))

    def __repr__(self):
        return f"LieSuperalgebra({self.ref or self.family}, dim={self.dim_even}|{self.dim_odd})"


def bracket(a: LieSuperalgebra, x: Sequence[object] | Mapping[int, object],
            y: Sequence[object] | Mapping[int, object]) -> list[Fraction]:
    """Bilinear extension of the structure constants to coordinate vectors."""
    xs = _as_sparse(a, x)
    ys = _as_sparse(a, y)
    out = [Fraction(0)] * a.dim
    for i, u in xs.items():
        for j, v in ys.items():
            for k, c in a.bracket_basis(i, j).items():
                out[k] += u * v * c
    return out


def _as_sparse(a: LieSuperalgebra, x) -> dict[int, Fraction]:
    if isinstance(x, Mapping):
        if any(not 0 <= int(k) < a.dim for k in x):
            raise DimensionMismatch("coordinate index out of range")
        return {int(k): as_rational(v) for k, v in x.items() if v}
    if len(x) != a.dim:
        raise DimensionMismatch(f"vector of length {len(x)} for algebra of dimension {a.dim}")
    return {i: as_rational(v) for i, v in enumerate(x) if v}


def ad_matrix(a: LieSuperalgebra, x: Mapping[int, object] | Sequence[object],
              rows: Sequence[int] | None = None, cols: Sequence[int] | None = None) -> SparseMatrix:
    """Matrix of y -> [x, y], optionally restricted to basis rows and columns."""
    xs = _as_sparse(a, x)
    rows = list(range(a.dim)) if rows is None else list(rows)
    cols = list(range(a.dim)) if cols is None else list(cols)
    where = {r: i for i, r in enumerate(rows)}
    ent: dict[tuple[int, int], Fraction] = {}
    for jc, j in enumerate(cols):
        for i, u in xs.items():
            for k, c in a.bracket_basis(i, j).items():
                if k not in where:
                    if c:
                        raise ClosureFailure(f"[x, {a.basis_labels[j]}] leaves the target rows")
                    continue
                key = (where[k], jc)
                ent[key] = ent.get(key, 0) + u * c
    return SparseMatrix(len(rows), len(cols), ent)


def weight_label(coords: Sequence[Fraction], labels: Sequence[str]) -> str:
    parts = []
    for c, name in zip(coords, labels):
        if not c:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        body = name if mag == 1 else f"{format_rational(mag)}{name}"
        parts.append(f"{sign}{body}")
    if not parts:
        return "0"
    s = "".join(parts)
    return s[1:] if s.startswith("+") else s


def roots(a: LieSuperalgebra) -> tuple[list[Root], list[Root], list[Root], list[Root]]:
    """(positive even, negative even, positive odd, negative odd) roots.

    Positivity is decided by the height functional (N, N-1, ..., 1) on weight
    coordinates, which orders coordinates as listed; for gl-type algebras this
    is the upper-triangular Borel.
    """
    if a.weight_of is None:
        raise InvalidParams(f"{a.family} algebra carries no weight data")
    skip = set(a.cartan_indices) | set(a.zero_odd)
    n = a.rank
    height = [n - i for i in range(n)]
    groups: tuple[list[Root], ...] = ([], [], [], [])
    for k in range(a.dim):
        if k in skip:
            continue
        w = a.weight_of[k]
        h = sum(x * y for x, y in zip(w, height))
        pos = h > 0
        groups[2 * a.parity[k] + (0 if pos else 1)].append(Root(w, a.parity[k], pos))
    return groups


def root_index(a: LieSuperalgebra, coords: Sequence[object], parity: int) -> int:
    """Basis index of the root vector with the given weight and parity."""
    target = tuple(as_rational(c) for c in coords)
    skip = set(a.cartan_indices) | set(a.zero_odd)
    hits = [k for k in range(a.dim) if k not in skip and a.parity[k] == parity and a.weight_of[k] == target]
    if len(hits) != 1:
        raise KeyError(f"no unique root vector of weight {target} and parity {parity}")
    return hits[0]


# --------------------------------------------------------------------------
# construction from matrices


@dataclass
class _Elem:
    label: str
    matrix: Matrix
    parity: int
    weight: tuple[Fraction, ...]
    kind: str = "root"  # root | cartan | zero_odd


def _unit(n: int, i: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(int(k == i)) for k in range(n))


def _wsub(x, y):
    return tuple(a - b for a, b in zip(x, y))


def _from_matrices(family: str, params: tuple[int, ...], elems: list[_Elem], vector_parity: list[int],
                   vector_weights: list[tuple[Fraction, ...]], coord_labels: list[str],
                   central: Matrix | None = None, with_form: bool = False,
                   weight_form: list[list[Fraction]] | None = None) -> LieSuperalgebra:
    elems = [e for e in elems if e.parity == 0] + [e for e in elems if e.parity == 1]
    mats = [e.matrix for e in elems]
    family_span = mats + ([central] if central is not None else [])
    dec = _Decomposer(family_span)
    n = len(elems)
    par = [e.parity for e in elems]
    constants = {}
    for i in range(n):
        for j in range(n):
            comm = supercommutator(mats[i], par[i], mats[j], par[j])
            if not comm:
                continue
            coef = dec.coords(comm)
            if coef is None:
                raise ClosureFailure(f"[{elems[i].label}, {elems[j].label}] leaves the span")
            coef = {k: v for k, v in coef.items() if k < n}
            if coef:
                constants[(i, j)] = coef
    cartan = tuple(i for i, e in enumerate(elems) if e.kind == "cartan")
    # each weight coordinate is evaluated at the first vector of V carrying that unit weight
    rank = len(coord_labels)
    probe = []
    for c in range(rank):
        u = _unit(rank, c)
        probe.append(next(a for a, w in enumerate(vector_weights) if w == u))
    cartan_coords = tuple(tuple(mats[h].get((a, a), Fraction(0)) for a in probe) for h in cartan)
    form = None
    if with_form:
        form = tuple(tuple(supertrace(mat_mul(mats[i], mats[j]), vector_parity) for j in range(n))
                     for i in range(n))
    wf = None if weight_form is None else tuple(tuple(Fraction(x) for x in row) for row in weight_form)
    return LieSuperalgebra(
        family=family,
        params=tuple(params),
        basis_labels=tuple(e.label for e in elems),
        parity=tuple(par),
        constants=constants,
        cartan_indices=cartan,
        weight_of=tuple(e.weight for e in elems),
        cartan_coords=cartan_coords,
        coord_labels=tuple(coord_labels),
        form=form,
        weight_form=wf,
        zero_odd=tuple(i for i, e in enumerate(elems) if e.kind == "zero_odd"),
        matrices=tuple(mats),
        vector_parity=tuple(vector_parity),
        quotient=central is not None,
        ref=f"{family}:{','.join(map(str, params))}",
    )


def _diag_form(plus: int, minus: int, scale=Fraction(1)) -> list[list[Fraction]]:
    n = plus + minus
    return [[(scale if i < plus else -scale) if i == j else Fraction(0) for j in range(n)] for i in range(n)]


def _gl_elems(m: int, n: int, cartan: str) -> tuple[list[_Elem], list[int], list, list[str]]:
    """Matrix units of gl(m|n) with the diagonal replaced according to ``cartan``.

    ``cartan`` is "full" (E_ii), "sl" (supertrace-zero basis h_i) or "psl"
    (h_i without the one coupling the two blocks, which spans I modulo the rest).
    """
    size = m + n
    vpar = [0] * m + [1] * n
    vw = [_unit(size, a) for a in range(size)]
    labels = [f"e{a + 1}" for a in range(size)]
    elems = []
    for a in range(size):
        for b in range(size):
            p = vpar[a] ^ vpar[b]
            if a != b:
                elems.append(_Elem(f"E{a + 1},{b + 1}", {(a, b): Fraction(1)}, p, _wsub(vw[a], vw[b])))
                continue
            zero = tuple(Fraction(0) for _ in range(size))
            if cartan == "full":
                elems.append(_Elem(f"E{a + 1},{a + 1}", {(a, a): Fraction(1)}, 0, zero, "cartan"))
            elif a < size - 1:
                if cartan == "psl" and a == m - 1:
                    continue
                sign = 1 if a == m - 1 else -1
                mat = {(a, a): Fraction(1), (a + 1, a + 1): Fraction(sign)}
                elems.append(_Elem(f"H{a + 1}", mat, 0, zero, "cartan"))
    return elems, vpar, vw, labels


def _build_gl(m, n):
    elems, vpar, vw, labels = _gl_elems(m, n, "full")
    return _from_matrices("GL", (m, n), elems, vpar, vw, labels, with_form=True, weight_form=_diag_form(m, n))


def _build_sl(m, n):
    elems, vpar, vw, labels = _gl_elems(m, n, "sl")
    return _from_matrices("SL", (m, n), elems, vpar, vw, labels, with_form=True, weight_form=_diag_form(m, n))


def _build_psl(n):
    elems, vpar, vw, labels = _gl_elems(n, n, "psl")
    ident = {(a, a): Fraction(1) for a in range(2 * n)}
    return _from_matrices("PSL", (n,), elems, vpar, vw, labels, central=ident, weight_form=_diag_form(n, n))


def _build_osp(big_m: int, big_n: int) -> LieSuperalgebra:
    k = big_m // 2
    n = big_n // 2
    rank = k + n
    size = big_m + big_n
    vpar = [0] * big_m + [1] * big_n
    vw: list[tuple[Fraction, ...]] = []
    for i in range(big_m):
        if i < k:
            vw.append(_unit(rank, i))
        elif big_m % 2 and i == k:
            vw.append(tuple(Fraction(0) for _ in range(rank)))
        else:
            vw.append(tuple(-x for x in _unit(rank, big_m - 1 - i)))
    for j in range(big_n):
        vw.append(_unit(rank, k + j) if j < n else tuple(-x for x in _unit(rank, k + j - n)))
    gram: dict[tuple[int, int], int] = {}
    for i in range(big_m):
        gram[(i, big_m - 1 - i)] = 1
    for j in range(n):
        gram[(big_m + j, big_m + n + j)] = 1
        gram[(big_m + n + j, big_m + j)] = -1
    coord_labels = [f"ε{i + 1}" for i in range(k)] + [f"δ{j + 1}" for j in range(n)]

    groups: dict[tuple[int, tuple], list[tuple[int, int]]] = {}
    for a in range(size):
        for b in range(size):
            groups.setdefault((vpar[a] ^ vpar[b], _wsub(vw[a], vw[b])), []).append((a, b))
    by_col: dict[int, list[tuple[int, int]]] = {}
    for (r, c) in gram:
        by_col.setdefault(r, []).append((r, c))

    elems = []
    for (p, w), units in groups.items():
        where = {u: i for i, u in enumerate(units)}
        eqs = []
        # beta(X v_c, v_d) + (-1)^{|X||c|} beta(v_c, X v_d) = 0 for all c, d
        for c in range(size):
            for d in range(size):
                row: dict[int, Fraction] = {}
                for a in range(size):
                    if (a, c) in where and (a, d) in gram:
                        row[where[(a, c)]] = row.get(where[(a, c)], 0) + gram[(a, d)]
                sign = -1 if p and vpar[c] else 1
                for a in range(size):
                    if (a, d) in where and (c, a) in gram:
                        row[where[(a, d)]] = row.get(where[(a, d)], 0) + sign * gram[(c, a)]
                row = {i: v for i, v in row.items() if v}
                if row:
                    eqs.append(row)
        sol = kernel_basis(SparseMatrix.from_rows(eqs, len(units)))
        for vec in sol:
            mat = {units[i]: v for i, v in enumerate(vec) if v}
            elems.append((min(mat), p, w, mat))
    elems.sort(key=lambda t: (t[1], t[0]))
    out = []
    h_count = 0
    for _, p, w, mat in elems:
        if p == 0 and not any(w):
            h_count += 1
            out.append(_Elem(f"H{h_count}", mat, 0, w, "cartan"))
        else:
            out.append(_Elem(f"X[{weight_label(w, coord_labels)}]", mat, p, w))
    wf = _diag_form(k, n, Fraction(1, 2))
    return _from_matrices("OSP", (big_m, big_n), out, vpar, vw, coord_labels, with_form=True, weight_form=wf)


def _build_p(n: int) -> LieSuperalgebra:
    vpar = [0] * n + [1] * n
    vw = [_unit(n, i) for i in range(n)] + [tuple(-x for x in _unit(n, i)) for i in range(n)]
    labels = [f"e{i + 1}" for i in range(n)]
    zero = tuple(Fraction(0) for _ in range(n))
    one = Fraction(1)
    elems = []
    for i in range(n):
        for j in range(n):
            if i == j:
                if i < n - 1:
                    mat = {(i, i): one, (i + 1, i + 1): -one, (n + i, n + i): -one, (n + i + 1, n + i + 1): one}
                    elems.append(_Elem(f"H{i + 1}", mat, 0, zero, "cartan"))
            else:
                mat = {(i, j): one, (n + j, n + i): -one}
                elems.append(_Elem(f"A{i + 1},{j + 1}", mat, 0, _wsub(vw[i], vw[j])))
    for i in range(n):
        for j in range(i, n):
            mat = {(i, n + j): one, (j, n + i): one} if i != j else {(i, n + i): one}
            elems.append(_Elem(f"B{i + 1},{j + 1}", mat, 1, _wsub(vw[i], vw[n + j])))
    for i in range(n):
        for j in range(i + 1, n):
            mat = {(n + i, j): one, (n + j, i): -one}
            elems.append(_Elem(f"C{i + 1},{j + 1}", mat, 1, _wsub(vw[n + i], vw[j])))
    return _from_matrices("P", (n,), elems, vpar, vw, labels)


def _build_q(n: int, hat: bool) -> LieSuperalgebra:
    vpar = [0] * n + [1] * n
    vw = [_unit(n, i) for i in range(n)] * 2
    labels = [f"e{i + 1}" for i in range(n)]
    zero = tuple(Fraction(0) for _ in range(n))
    one = Fraction(1)
    elems = []
    for p, name in ((0, "A"), (1, "B")):
        off = (0, n) if p else (0, 0)

        def block(i, j, c=one):
            # the (i, j) entry of the A or B block, copied to both diagonal or off-diagonal slots
            return {(i, j + off[1]): c, (i + n, j + n - off[1]): c}

        for i in range(n):
            for j in range(n):
                if i != j:
                    elems.append(_Elem(f"{name}{i + 1},{j + 1}", block(i, j), p, _wsub(vw[i], vw[j])))
                elif hat:
                    elems.append(_Elem(f"{name}{i + 1},{i + 1}", block(i, i), p, zero,
                                       "cartan" if p == 0 else "zero_odd"))
                elif i < n - 1:
                    mat = {**block(i, i), **block(i + 1, i + 1, -one)}
                    elems.append(_Elem(f"{name}H{i + 1}", mat, p, zero, "cartan" if p == 0 else "zero_odd"))
    if hat:
        return _from_matrices("QHAT", (n,), elems, vpar, vw, labels)
    ident = {(a, a): one for a in range(2 * n)}
    return _from_matrices("Q", (n,), elems, vpar, vw, labels, central=ident)


def _int_params(params) -> tuple[int, ...]:
    if isinstance(params, int):
        params = (params,)
    try:
        out = tuple(int(p) for p in params)
    except (TypeError, ValueError) as exc:
        raise InvalidParams(f"parameters must be integers, got {params!r}") from exc
    if any(int(p) != p for p in params):
        raise InvalidParams(f"parameters must be integers, got {params!r}")
    return out


def build(family: str, params) -> LieSuperalgebra:
    """Construct a classical Lie superalgebra.

    ``GL``/``SL`` take ``(m, n)``; ``OSP`` takes ``(M, N)`` for osp(M|N);
    ``PSL``, ``P``, ``Q`` and ``QHAT`` take the matrix block size ``n``, giving
    psl(n|n), P(n-1), Q(n-1) and q(n) respectively.
    """
    fam = str(family).upper()
    p = _int_params(params)
    if fam == "GL":
        if len(p) != 2 or min(p) < 1:
            raise InvalidParams("GL needs (m, n) with m, n >= 1")
        return _build_gl(*p)
    if fam == "SL":
        if len(p) != 2 or min(p) < 1 or p[0] == p[1]:
            raise InvalidParams("SL needs (m, n) with m, n >= 1 and m != n; use PSL for m = n")
        return _build_sl(*p)
    if fam == "PSL":
        if len(p) == 2 and p[0] == p[1]:
            p = p[:1]
        if len(p) != 1 or p[0] < 2:
            raise InvalidParams("PSL needs n >= 2")
        return _build_psl(p[0])
    if fam == "OSP":
        if len(p) != 2 or p[0] < 1 or p[1] < 2 or p[1] % 2:
            raise InvalidParams("OSP needs (M, N) with M >= 1 and N even, N >= 2")
        return _build_osp(*p)
    if fam == "P":
        if len(p) != 1 or p[0] < 3:
            raise InvalidParams("P needs n >= 3")
        return _build_p(p[0])
    if fam == "Q":
        if len(p) != 1 or p[0] < 3:
            raise InvalidParams("Q needs n >= 3")
        return _build_q(p[0], hat=False)
    if fam == "QHAT":
        if len(p) != 1 or p[0] < 1:
            raise InvalidParams("QHAT needs n >= 1")
        return _build_q(p[0], hat=True)
    raise InvalidParams(f"unknown family {family!r}")


def subalgebra(parent: LieSuperalgebra, vectors: Sequence[Mapping[int, object]],
               labels: Sequence[str] | None = None, tag: str = "SUB") -> LieSuperalgebra:
    """The subalgebra spanned by homogeneous ``vectors`` of ``parent`` (family SUB).

    Raises ClosureFailure when some bracket leaves the span.
    """
    vecs = []
    pars = []
    for v in vectors:
        v = {int(k): as_rational(x) for k, x in v.items() if x}
        ps = {parent.parity[k] for k in v}
        if len(ps) > 1:
            raise InvalidParams("subalgebra vectors must be homogeneous")
        vecs.append(v)
        pars.append(ps.pop() if ps else 0)
    order = sorted(range(len(vecs)), key=lambda i: pars[i])
    vecs = [vecs[i] for i in order]
    pars = [pars[i] for i in order]
    if labels is None:
        labels = [f"y{i + 1}" for i in range(len(vecs))]
    else:
        labels = [labels[i] for i in order]
    dec = _Decomposer(vecs)
    constants = {}
    for i, u in enumerate(vecs):
        for j, v in enumerate(vecs):
            br = bracket(parent, u, v)
            br = {k: x for k, x in enumerate(br) if x}
            if not br:
                continue
            coef = dec.coords(br)
            if coef is None:
                raise ClosureFailure(f"[{labels[i]}, {labels[j]}] leaves the span")
            constants[(i, j)] = coef
    mats = None
    if parent.matrices is not None:
        mats = tuple(mat_lincomb([(c, parent.matrices[k]) for k, c in v.items()]) for v in vecs)
    return LieSuperalgebra(
        family="SUB",
        params=(),
        basis_labels=tuple(labels),
        parity=tuple(pars),
        constants=constants,
        matrices=mats,
        vector_parity=parent.vector_parity,
        quotient=parent.quotient,
        ref=f"{tag}:{parent.ref}",
        embedding=tuple(vecs),
    )


# --------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    violations: list[dict]

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for v in self.violations:
            out[v["kind"]] = out.get(v["kind"], 0) + 1
        return out

    def __len__(self):
        return len(self.violations)


def _integer_tensor(a: LieSuperalgebra) -> tuple[np.ndarray, int]:
    """Structure constants scaled by a common denominator, as an integer tensor."""
    den = 1
    for vec in a.constants.values():
        for v in vec.values():
            den = den * v.denominator // gcd(den, v.denominator)
    big = max((abs(v) * den for vec in a.constants.values() for v in vec.values()), default=0)
    exact_ok = big * big * max(a.dim, 1) * 4 < 2**62
    t = np.zeros((a.dim,) * 3, dtype=np.int64 if exact_ok else object)
    if not exact_ok:
        t[...] = 0
    for (i, j), vec in a.constants.items():
        for k, v in vec.items():
            t[i, j, k] = int(v * den)
    return t, int(den)


def validate(a: LieSuperalgebra, max_reported: int = 50) -> ValidationReport:
    """Exhaustive check of parity additivity, super antisymmetry, super Jacobi,
    weight metadata and (where stored) invariance of the form."""
    out: list[dict] = []
    par = np.array(a.parity, dtype=np.int64)
    n = a.dim

    for (i, j), vec in a.constants.items():
        for k in vec:
            if a.parity[k] != a.parity[i] ^ a.parity[j]:
                out.append({"kind": "parity", "where": [i, j, k]})

    t, _ = _integer_tensor(a)
    sign = np.where(np.outer(par, par) == 1, -1, 1)
    # [x_i, x_j] + (-1)^{|i||j|} [x_j, x_i] = 0
    anti = t + sign[:, :, None] * t.transpose(1, 0, 2)
    for i, j, k in zip(*np.nonzero(anti)):
        if i <= j:
            out.append({"kind": "antisymmetry", "where": [int(i), int(j), int(k)]})

    # [x,[y,z]] = [[x,y],z] + (-1)^{|x||y|} [y,[x,z]]
    lhs = np.einsum("jkl,ilm->ijkm", t, t)
    first = np.einsum("ijl,lkm->ijkm", t, t)
    second = np.einsum("ikl,jlm->ijkm", t, t) * sign[:, :, None, None]
    jac = lhs - first - second
    bad = np.argwhere(np.any(jac != 0, axis=3))
    for i, j, k in bad:
        out.append({"kind": "jacobi", "where": [int(i), int(j), int(k)]})

    if a.weight_of is not None:
        cartan = set(a.cartan_indices)
        for hpos, h in enumerate(a.cartan_indices):
            coords = a.cartan_coords[hpos]
            for k in range(n):
                expected = sum((w * c for w, c in zip(a.weight_of[k], coords)), Fraction(0))
                got = dict(a.bracket_basis(h, k))
                want = {k: expected} if expected else {}
                if k in cartan and got:
                    out.append({"kind": "weight", "where": [h, k], "detail": "Cartan elements do not commute"})
                elif got != want:
                    out.append({"kind": "weight", "where": [h, k]})

    if a.form is not None:
        g = np.array([[int(x * _form_den(a)) for x in row] for row in a.form], dtype=object)
        tt = t.astype(object)
        left = np.einsum("xyk,kz->xyz", tt, g)
        right = np.einsum("yzk,xk->xyz", tt, g)
        for x, y, z in np.argwhere(left != right):
            out.append({"kind": "form", "where": [int(x), int(y), int(z)]})

    if len(out) > max_reported:
        counts: dict[str, int] = {}
        for v in out:
            counts[v["kind"]] = counts.get(v["kind"], 0) + 1
        trimmed = out[:max_reported]
        trimmed.append({"kind": "truncated", "where": [], "detail": counts})
        out = trimmed
    return ValidationReport(out)


def _form_den(a: LieSuperalgebra) -> int:
    den = 1
    for row in a.form:
        for x in row:
            den = den * x.denominator // gcd(den, x.denominator)
    return int(den)


def with_constant(a: LieSuperalgebra, i: int, j: int, k: int, value) -> LieSuperalgebra:
    """Copy of ``a`` with one structure constant overwritten (fault injection)."""
    constants = {key: dict(vec) for key, vec in a.constants.items()}
    vec = constants.setdefault((i, j), {})
    value = as_rational(value)
    if value:
        vec[k] = value
    else:
        vec.pop(k, None)
    if not vec:
        constants.pop((i, j))
    d = {f: getattr(a, f) for f in a.__dataclass_fields__}
    d["constants"] = constants
    return LieSuperalgebra(**d)


# --------------------------------------------------------------------------
# JSON


def _fr(x: Fraction) -> str:
    return format_rational(x)


def to_dict(a: LieSuperalgebra) -> dict:
    bracket_list = sorted([i, j, k, _fr(v)] for (i, j), vec in a.constants.items() for k, v in vec.items())
    return {
        "family": a.family,
        "params": list(a.params),
        "labels": list(a.basis_labels),
        "parity": list(a.parity),
        "bracket": bracket_list,
        "cartan": list(a.cartan_indices),
        "weights": None if a.weight_of is None else [[_fr(x) for x in w] for w in a.weight_of],
        "cartan_coords": [[_fr(x) for x in c] for c in a.cartan_coords],
        "coord_labels": list(a.coord_labels),
        "form": None if a.form is None else sorted(
            [i, j, _fr(x)] for i, row in enumerate(a.form) for j, x in enumerate(row) if x),
        "weight_form": None if a.weight_form is None else [[_fr(x) for x in row] for row in a.weight_form],
        "zero_odd": list(a.zero_odd),
        "matrices": None if a.matrices is None else sorted(
            [k, r, c, _fr(v)] for k, m in enumerate(a.matrices) for (r, c), v in m.items()),
        "vector_parity": None if a.vector_parity is None else list(a.vector_parity),
        "quotient": a.quotient,
        "ref": a.ref,
        "embedding": None if a.embedding is None else sorted(
            [k, i, _fr(v)] for k, vec in enumerate(a.embedding) for i, v in vec.items()),
    }


def from_dict(d: Mapping) -> LieSuperalgebra:
    n = len(d["parity"])
    constants: dict = {}
    for i, j, k, v in d["bracket"]:
        constants.setdefault((i, j), {})[k] = Fraction(v)
    form = None
    if d.get("form") is not None:
        rows = [[Fraction(0)] * n for _ in range(n)]
        for i, j, v in d["form"]:
            rows[i][j] = Fraction(v)
        form = tuple(tuple(r) for r in rows)
    mats = None
    if d.get("matrices") is not None:
        ms: list[dict] = [{} for _ in range(n)]
        for k, r, c, v in d["matrices"]:
            ms[k][(r, c)] = Fraction(v)
        mats = tuple(ms)
    emb = None
    if d.get("embedding") is not None:
        es: list[dict] = [{} for _ in range(n)]
        for k, i, v in d["embedding"]:
            es[k][i] = Fraction(v)
        emb = tuple(es)
    weights = d.get("weights")
    wf = d.get("weight_form")
    return LieSuperalgebra(
        family=d["family"],
        params=tuple(d["params"]),
        basis_labels=tuple(d.get("labels") or [f"x{i + 1}" for i in range(n)]),
        parity=tuple(d["parity"]),
        constants=constants,
        cartan_indices=tuple(d.get("cartan", ())),
        weight_of=None if weights is None else tuple(tuple(Fraction(x) for x in w) for w in weights),
        cartan_coords=tuple(tuple(Fraction(x) for x in c) for c in d.get("cartan_coords", ())),
        coord_labels=tuple(d.get("coord_labels", ())),
        form=form,
        weight_form=None if wf is None else tuple(tuple(Fraction(x) for x in r) for r in wf),
        zero_odd=tuple(d.get("zero_odd", ())),
        matrices=mats,
        vector_parity=None if d.get("vector_parity") is None else tuple(d["vector_parity"]),
        quotient=bool(d.get("quotient", False)),
        ref=d.get("ref", ""),
        embedding=emb,
    )


def to_json(a: LieSuperalgebra) -> str:
    return json.dumps(to_dict(a), sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def from_json(text: str) -> LieSuperalgebra:
    return from_dict(json.loads(text))


def table3_dimensions(family: str, params) -> tuple[int, int]:
    """Closed-form (dim g0, dim g1) for each family."""
    fam = family.upper()
    p = _int_params(params)
    if fam == "GL":
        m, n = p
        return m * m + n * n, 2 * m * n
    if fam == "SL":
        m, n = p
        return m * m + n * n - 1, 2 * m * n
    if fam == "PSL":
        n = p[0]
        return 2 * n * n - 2, 2 * n * n
    if fam == "OSP":
        big_m, big_n = p
        m, n = big_m // 2, big_n // 2
        if big_m % 2:
            return 2 * m * m + m + 2 * n * n + n, (2 * m + 1) * 2 * n
        return 2 * m * m - m + 2 * n * n + n, 4 * m * n
    if fam == "P":
        n = p[0]
        return n * n - 1, n * n
    if fam == "QHAT":
        n = p[0]
        return n * n, n * n
    if fam == "Q":
        n = p[0]
        return n * n - 1, n * n - 1
    raise InvalidParams(f"no dimension formula for {family!r}")


def in_scope_algebras(max_size: int = 6) -> list[tuple[str, tuple[int, ...]]]:
    """Every (family, params) whose defining matrices have size at most ``max_size``."""
    out: list[tuple[str, tuple[int, ...]]] = []
    for s in range(2, max_size + 1):
        for m in range(1, s):
            out.append(("GL", (m, s - m)))
    for s in range(3, max_size + 1):
        for m in range(1, s):
            if m != s - m:
                out.append(("SL", (m, s - m)))
    for n in range(2, max_size // 2 + 1):
        out.append(("PSL", (n,)))
    for big_n in range(2, max_size, 2):
        for big_m in range(1, max_size - big_n + 1):
            out.append(("OSP", (big_m, big_n)))
    for n in range(3, max_size // 2 + 1):
        out.append(("P", (n,)))
        out.append(("Q", (n,)))
    for n in range(1, max_size // 2 + 1):
        out.append(("QHAT", (n,)))
    return out
