"""Half-sum of roots, atypicality, defect and superdimension."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .algebra import LieSuperalgebra, Root, roots
from .errors import DimensionMismatch, NoForm
from .linalg import span_rank


def _require_form(a: LieSuperalgebra):
    if a.weight_form is None:
        raise NoForm(f"{a.family} has no even invariant form on weights")
    return a.weight_form


def pairing(a: LieSuperalgebra, x: Sequence[Fraction], y: Sequence[Fraction]) -> Fraction:
    """The form induced on weights, in the algebra's coordinate basis."""
    g = _require_form(a)
    if len(x) != len(g) or len(y) != len(g):
        raise DimensionMismatch(f"weights must have {len(g)} coordinates")
    return sum((Fraction(x[i]) * g[i][j] * Fraction(y[j]) for i in range(len(g)) for j in range(len(g))
                if x[i] and y[j] and g[i][j]), Fraction(0))


def rho(a: LieSuperalgebra) -> tuple[Fraction, ...]:
    _require_form(a)
    even_pos, _, odd_pos, _ = roots(a)
    out = [Fraction(0)] * a.rank
    for r in even_pos:
        for i, c in enumerate(r.coords):
            out[i] += c / 2
    for r in odd_pos:
        for i, c in enumerate(r.coords):
            out[i] -= c / 2
    return tuple(out)


def _independent(vectors: list[tuple[Fraction, ...]]) -> bool:
    return span_rank({i: c for i, c in enumerate(v) if c} for v in vectors) == len(vectors)


def max_isotropic_set(a: LieSuperalgebra, candidates: Sequence[Root]) -> list[Root]:
    """Largest family of pairwise orthogonal, linearly independent isotropic roots.

    Exhaustive depth-first search; ties are broken by the first family found in
    a canonical order so the answer does not depend on the input order.
    """
    cands = sorted({r.coords: r for r in candidates if pairing(a, r.coords, r.coords) == 0}.values(),
                   key=lambda r: r.coords)
    n = len(cands)
    ortho = [[pairing(a, cands[i].coords, cands[j].coords) == 0 for j in range(n)] for i in range(n)]
    best: list[int] = []

    def search(chosen: list[int], start: int):
        nonlocal best
        if len(chosen) > len(best):
            best = list(chosen)
        if len(chosen) + (n - start) <= len(best):
            return
        for k in range(start, n):
            if all(ortho[k][c] for c in chosen) and _independent([cands[c].coords for c in chosen + [k]]):
                chosen.append(k)
                search(chosen, k + 1)
                chosen.pop()

    search([], 0)
    return [cands[i] for i in best]


def atypicality(a: LieSuperalgebra, weight: Sequence[object]) -> int:
    _require_form(a)
    if len(weight) != a.rank:
        raise DimensionMismatch(f"weight must have {a.rank} coordinates")
    shifted = [Fraction(x) + r for x, r in zip(weight, rho(a))]
    odd_pos = roots(a)[2]
    cands = [r for r in odd_pos if pairing(a, shifted, r.coords) == 0]
    return len(max_isotropic_set(a, cands))


def defect_combinatorial(a: LieSuperalgebra) -> int:
    _require_form(a)
    return len(max_isotropic_set(a, roots(a)[2]))


def cohomological_defect(a: LieSuperalgebra, max_degree: int | None = None, mode: str = "modular") -> int:
    """Number of ring generators of the invariant ring found up to ``max_degree``.

    When ``max_degree`` is omitted it is the largest generator degree listed for
    the family, so every listed generator can be seen.
    """
    from .invariants import generator_degrees, table1_degrees

    if max_degree is None:
        max_degree = max(table1_degrees(a.family, a.params), default=0)
    return len(generator_degrees(a, max_degree, mode=mode))


def superdimension(module) -> int:
    return module.dim0 - module.dim1
