"""Exact rational and prime-field linear algebra on sparse matrices.

Rational arithmetic uses :class:`fractions.Fraction`.  Exact elimination is
fraction-free: every row is scaled to a primitive integer vector and rows are
combined by integer cross-multiplication followed by content removal, so
denominators never appear during elimination.  The modular path reduces the
same matrices modulo a word-sized prime and eliminates densely with numpy.
"""

from __future__ import annotations

import heapq
import os
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

Rational = Fraction

DEFAULT_PRIME = 2147483629
SECOND_PRIME = 2147483587
PRIME_ENV = "SUPERCOHOM_PRIME"

# dense numpy elimination is used below this many stored cells
_DENSE_LIMIT = 60_000_000


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    # deterministic for n < 3.3e24 with these bases
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeFieldConfig:
    prime: int = DEFAULT_PRIME

    def __post_init__(self):
        if not _is_prime(self.prime):
            raise ValueError(f"{self.prime} is not prime")
        if self.prime >= 2**31:
            raise ValueError("prime must be below 2**31 for int64 elimination")

    @classmethod
    def from_env(cls) -> "PrimeFieldConfig":
        raw = os.environ.get(PRIME_ENV)
        return cls(int(raw)) if raw else cls()


def default_primes() -> tuple[int, int]:
    """Primary prime (environment override honoured) and a confirming prime."""
    first = PrimeFieldConfig.from_env().prime
    second = SECOND_PRIME if first != SECOND_PRIME else DEFAULT_PRIME
    return first, second


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    raise TypeError(f"cannot convert {x!r} to an exact rational")


def format_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class SparseMatrix:
    """Immutable sparse matrix over the rationals.

    ``entries`` maps ``(row, col)`` to a nonzero :class:`Fraction`.
    """

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries: Mapping[tuple[int, int], object] = ()):
        clean = {}
        for (i, j), v in dict(entries).items():
            if not (0 <= i < rows and 0 <= j < cols):
                raise IndexError(f"entry ({i}, {j}) outside {rows}x{cols}")
            v = as_rational(v)
            if v:
                clean[(i, j)] = v
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", MappingProxyType(clean))

    def __setattr__(self, name, value):
        raise AttributeError("SparseMatrix is immutable")

    @classmethod
    def from_dense(cls, data: Sequence[Sequence[object]], cols: int | None = None) -> "SparseMatrix":
        rows = len(data)
        if cols is None:
            cols = len(data[0]) if rows else 0
        return cls(rows, cols, {(i, j): v for i, row in enumerate(data) for j, v in enumerate(row) if v})

    @classmethod
    def from_rows(cls, rows: Sequence[Mapping[int, object]], cols: int) -> "SparseMatrix":
        return cls(len(rows), cols, {(i, j): v for i, row in enumerate(rows) for j, v in row.items()})

    @classmethod
    def from_columns(cls, columns: Sequence[Mapping[int, object]], rows: int) -> "SparseMatrix":
        return cls(rows, len(columns), {(i, j): v for j, col in enumerate(columns) for i, v in col.items()})

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(n, n, {(i, i): 1 for i in range(n)})

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "SparseMatrix":
        return cls(rows, cols, {})

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.shape == other.shape and dict(self.entries) == dict(other.entries)

    def __hash__(self):
        return hash((self.rows, self.cols, frozenset(self.entries.items())))

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz})"

    def row_dicts(self) -> list[dict[int, Fraction]]:
        out: list[dict[int, Fraction]] = [{} for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def col_dicts(self) -> list[dict[int, Fraction]]:
        out: list[dict[int, Fraction]] = [{} for _ in range(self.cols)]
        for (i, j), v in self.entries.items():
            out[j][i] = v
        return out

    def to_dense(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.cols, self.rows, {(j, i): v for (i, j), v in self.entries.items()})

    T = property(transpose)

    def matvec(self, vec: Sequence[object]) -> list[Fraction]:
        if len(vec) != self.cols:
            raise ValueError(f"vector of length {len(vec)} for {self.cols} columns")
        out = [Fraction(0)] * self.rows
        for (i, j), v in self.entries.items():
            x = vec[j]
            if x:
                out[i] += v * x
        return out

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        rows = other.row_dicts()
        acc: dict[tuple[int, int], Fraction] = {}
        for (i, k), v in self.entries.items():
            for j, w in rows[k].items():
                acc[(i, j)] = acc.get((i, j), 0) + v * w
        return SparseMatrix(self.rows, other.cols, acc)

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        acc = dict(self.entries)
        for k, v in other.entries.items():
            acc[k] = acc.get(k, 0) + v
        return SparseMatrix(self.rows, self.cols, acc)

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        return self + other.scale(-1)

    def scale(self, c) -> "SparseMatrix":
        c = as_rational(c)
        return SparseMatrix(self.rows, self.cols, {k: v * c for k, v in self.entries.items()})

    def vstack(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.cols:
            raise ValueError("column mismatch")
        ent = dict(self.entries)
        ent.update({(i + self.rows, j): v for (i, j), v in other.entries.items()})
        return SparseMatrix(self.rows + other.rows, self.cols, ent)

    @staticmethod
    def stack(blocks: Iterable["SparseMatrix"], cols: int) -> "SparseMatrix":
        ent = {}
        offset = 0
        for b in blocks:
            if b.cols != cols:
                raise ValueError("column mismatch")
            for (i, j), v in b.entries.items():
                ent[(i + offset, j)] = v
            offset += b.rows
        return SparseMatrix(offset, cols, ent)

    def to_modular(self, prime: int) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.int64)
        for (i, j), v in self.entries.items():
            out[i, j] = v.numerator * pow(v.denominator, -1, prime) % prime
        return out


# --------------------------------------------------------------------------
# fraction-free exact elimination


def _primitive(row: dict[int, int]) -> dict[int, int]:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            return row
    if g > 1:
        return {k: v // g for k, v in row.items()}
    return row


def _integer_row(row: Mapping[int, object]) -> dict[int, int]:
    den = 1
    fr = {}
    for k, v in row.items():
        v = as_rational(v)
        if v:
            fr[k] = v
            den = den * v.denominator // gcd(den, v.denominator)
    return _primitive({k: int(v * den) for k, v in fr.items()})


class IntegerEchelon:
    """Row echelon form over the integers, grown one row at a time.

    Each stored row is primitive and indexed by its leading column.
    """

    def __init__(self):
        self.pivots: dict[int, dict[int, int]] = {}

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def _eliminate(self, row: dict[int, int], full: bool) -> dict[int, int]:
        pivots = self.pivots
        heap = [k for k in row if k in pivots]
        heapq.heapify(heap)
        done = set()
        while heap:
            c = heapq.heappop(heap)
            if c in done or c not in row:
                continue
            done.add(c)
            p = pivots[c]
            a, b = p[c], row[c]
            g = gcd(a, b)
            a, b = a // g, b // g
            new = {k: a * v for k, v in row.items()} if a != 1 else dict(row)
            for k, v in p.items():
                val = new.get(k, 0) - b * v
                if val:
                    new[k] = val
                else:
                    new.pop(k, None)
                    continue
                if k in pivots and k not in done and k > c:
                    heapq.heappush(heap, k)
            row = _primitive(new)
            if not full and row and min(row) not in pivots:
                break
        return row

    def reduce(self, row: Mapping[int, object], full: bool = False) -> dict[int, int]:
        """Reduce a row against the stored pivots (leading terms only unless ``full``)."""
        r = _integer_row(row)
        if not r:
            return r
        if not full and min(r) not in self.pivots:
            return r
        return self._eliminate(r, full)

    def add(self, row: Mapping[int, object]) -> bool:
        r = self.reduce(row)
        if not r:
            return False
        lead = min(r)
        if r[lead] < 0:
            r = {k: -v for k, v in r.items()}
        self.pivots[lead] = r
        return True

    def reduced(self) -> dict[int, dict[int, int]]:
        """Integer reduced echelon form: each pivot row is zero in every other pivot column."""
        out: dict[int, dict[int, int]] = {}
        for c in sorted(self.pivots, reverse=True):
            row = dict(self.pivots[c])
            heap = [k for k in row if k in out and k != c]
            heapq.heapify(heap)
            while heap:
                k = heapq.heappop(heap)
                if k not in row:
                    continue
                p = out[k]
                a, b = p[k], row[k]
                g = gcd(a, b)
                a, b = a // g, b // g
                row = {j: a * v for j, v in row.items()}
                for j, v in p.items():
                    val = row.get(j, 0) - b * v
                    if val:
                        row[j] = val
                    else:
                        row.pop(j, None)
                row = _primitive(row)
            out[c] = row
        return out


def _echelon_of(m: SparseMatrix) -> IntegerEchelon:
    ech = IntegerEchelon()
    rows = [r for r in m.row_dicts() if r]
    rows.sort(key=len)
    for r in rows:
        ech.add(r)
    return ech


# --------------------------------------------------------------------------
# modular elimination


def _rref_mod_p(a: np.ndarray, p: int, want_reduced: bool) -> tuple[np.ndarray, list[int]]:
    a = a % p
    m, n = a.shape
    r = 0
    pivots: list[int] = []
    for c in range(n):
        if r == m:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), p - 2, p)
        a[r, c:] = a[r, c:] * inv % p
        if want_reduced:
            idx = np.flatnonzero(a[:, c])
            idx = idx[idx != r]
        else:
            idx = r + 1 + np.flatnonzero(a[r + 1:, c])
        if idx.size:
            a[idx, c:] = (a[idx, c:] - a[idx, c:c + 1] * a[r, c:]) % p
        pivots.append(c)
        r += 1
    return a[:r], pivots


class ModularEchelon:
    """Sparse row echelon form over GF(p)."""

    def __init__(self, prime: int):
        self.p = prime
        self.pivots: dict[int, dict[int, int]] = {}

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, row: Mapping[int, int], full: bool = False) -> dict[int, int]:
        p = self.p
        row = {k: v % p for k, v in row.items() if v % p}
        pivots = self.pivots
        heap = [k for k in row if k in pivots]
        heapq.heapify(heap)
        while heap:
            c = heapq.heappop(heap)
            if c not in row:
                continue
            if not full and c != min(row):
                break
            prow = pivots[c]
            f = row[c]
            for k, v in prow.items():
                val = (row.get(k, 0) - f * v) % p
                if val:
                    if k not in row and k in pivots:
                        heapq.heappush(heap, k)
                    row[k] = val
                else:
                    row.pop(k, None)
        return row

    def add(self, row: Mapping[int, int]) -> bool:
        r = self.reduce(row)
        if not r:
            return False
        lead = min(r)
        inv = pow(r[lead], self.p - 2, self.p)
        self.pivots[lead] = {k: v * inv % self.p for k, v in r.items()}
        return True


def _modular_rows(m: SparseMatrix, p: int) -> list[dict[int, int]]:
    rows: list[dict[int, int]] = [{} for _ in range(m.rows)]
    for (i, j), v in m.entries.items():
        rows[i][j] = v.numerator * pow(v.denominator, -1, p) % p
    return [r for r in rows if r]


# --------------------------------------------------------------------------
# public operations


def rank(m: SparseMatrix, mode: str = "exact", prime: int | None = None) -> int:
    """Rank over Q (``mode="exact"``) or over GF(prime) (``mode="modular"``).

    The modular rank never exceeds the rational rank.
    """
    if m.nnz == 0:
        return 0
    if mode == "exact":
        return _echelon_of(m).rank
    if mode != "modular":
        raise ValueError(f"unknown mode {mode!r}")
    p = prime or PrimeFieldConfig.from_env().prime
    if m.rows * m.cols <= _DENSE_LIMIT:
        a = m.to_modular(p)
        if a.shape[0] > a.shape[1]:
            a = a.T.copy()
        return len(_rref_mod_p(a, p, want_reduced=False)[1])
    ech = ModularEchelon(p)
    rows = _modular_rows(m, p)
    rows.sort(key=len)
    for r in rows:
        ech.add(r)
    return ech.rank


def kernel_sparse(m: SparseMatrix) -> tuple[list[int], list[dict[int, Fraction]]]:
    """Right null space as sparse vectors, one per free column.

    The vector attached to free column ``f`` is 1 at ``f`` and 0 at every other
    free column, so the coordinates of a null vector in this basis are its
    values at the free columns.
    """
    red = _echelon_of(m).reduced()
    free = [j for j in range(m.cols) if j not in red]
    vecs: list[dict[int, Fraction]] = [{f: Fraction(1)} for f in free]
    where = {f: i for i, f in enumerate(free)}
    for c, row in red.items():
        lead = row[c]
        for j, v in row.items():
            if j != c:
                vecs[where[j]][c] = Fraction(-v, lead)
    return free, vecs


def kernel_basis(m: SparseMatrix) -> list[list[Fraction]]:
    """Basis of ``{v : m v = 0}`` as dense rational vectors."""
    _, vecs = kernel_sparse(m)
    out = []
    for v in vecs:
        dense = [Fraction(0)] * m.cols
        for j, x in v.items():
            dense[j] = x
        out.append(dense)
    return out


def kernel_modular(m: SparseMatrix, prime: int) -> tuple[list[int], list[dict[int, int]]]:
    """Null space over GF(prime), same free-column normalisation as :func:`kernel_sparse`."""
    p = prime
    if m.nnz == 0:
        return list(range(m.cols)), [{j: 1} for j in range(m.cols)]
    if m.rows * m.cols <= _DENSE_LIMIT:
        red, piv = _rref_mod_p(m.to_modular(p), p, want_reduced=True)
        pivset = set(piv)
        free = [j for j in range(m.cols) if j not in pivset]
        vecs = []
        for f in free:
            v = {f: 1}
            col = red[:, f]
            for r in np.flatnonzero(col):
                v[piv[r]] = int(-col[r] % p)
            vecs.append(v)
        return free, vecs
    ech = ModularEchelon(p)
    for r in sorted(_modular_rows(m, p), key=len):
        ech.add(r)
    full = {}
    for c in sorted(ech.pivots, reverse=True):
        saved = ech.pivots.pop(c)
        ech_tmp = ModularEchelon(p)
        ech_tmp.pivots = full
        row = ech_tmp.reduce(saved, full=True)
        full[c] = row
        ech.pivots[c] = saved
    free = [j for j in range(m.cols) if j not in full]
    where = {f: i for i, f in enumerate(free)}
    vecs = [{f: 1} for f in free]
    for c, row in full.items():
        for j, v in row.items():
            if j != c:
                vecs[where[j]][c] = (-v) % p
    return free, vecs


def solve(m: SparseMatrix, b: Sequence[object]) -> list[Fraction] | None:
    """A particular solution of ``m x = b`` (free variables set to zero), or None."""
    if len(b) != m.rows:
        raise ValueError(f"right-hand side has length {len(b)}, expected {m.rows}")
    aug_col = m.cols
    rows = m.row_dicts()
    for i, v in enumerate(b):
        v = as_rational(v)
        if v:
            rows[i][aug_col] = v
    ech = IntegerEchelon()
    for r in sorted((r for r in rows if r), key=len):
        ech.add(r)
    if aug_col in ech.pivots:
        return None
    red = ech.reduced()
    x = [Fraction(0)] * m.cols
    for c, row in red.items():
        x[c] = Fraction(row.get(aug_col, 0), row[c])
    return x


def span_rank(vectors: Iterable[Mapping[int, object]], mode: str = "exact", prime: int | None = None) -> int:
    """Rank of a family of sparse vectors."""
    if mode == "exact":
        ech = IntegerEchelon()
        for v in vectors:
            ech.add(v)
        return ech.rank
    p = prime or PrimeFieldConfig.from_env().prime
    ech = ModularEchelon(p)
    for v in vectors:
        ech.add({k: (x.numerator * pow(x.denominator, -1, p)) if isinstance(x, Fraction) else int(x)
                 for k, x in v.items()})
    return ech.rank


def inverse(m: SparseMatrix) -> SparseMatrix:
    """Exact inverse of a square matrix; raises ValueError if singular."""
    n = m.rows
    if m.cols != n:
        raise ValueError("inverse of a non-square matrix")
    rows = m.row_dicts()
    ech = IntegerEchelon()
    for i, r in enumerate(rows):
        aug = dict(r)
        aug[n + i] = Fraction(1)
        ech.add(aug)
    red = ech.reduced()
    if any(c >= n for c in red) or len(red) < n:
        raise ValueError("matrix is singular")
    ent = {}
    for c, row in red.items():
        lead = row[c]
        for j, v in row.items():
            if j >= n:
                ent[(c, j - n)] = Fraction(v, lead)
    return SparseMatrix(n, n, ent)
