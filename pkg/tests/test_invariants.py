from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import algebra
from supercohom.algebra import bracket
from supercohom.detecting import e1_basis
from supercohom.errors import DimensionMismatch, NotPolar, UnknownFamily
from supercohom.invariants import (
    DimensionSeries,
    SymmetricPowerBasis,
    derivation_action,
    generator_degrees,
    invariant_basis,
    invariant_dimensions,
    is_invariant,
    jacobian_eval,
    predicted_series,
    reflection_group,
    restrict_polynomial,
    series_from_degrees,
    table1_degrees,
    w_invariance_check,
)
from supercohom.linalg import SparseMatrix


def power_series(degrees, n):
    """Coefficients of prod 1/(1 - t^d) by brute-force counting of exponent tuples."""
    out = []
    for total in range(n + 1):
        count = 0

        def walk(i, rest):
            nonlocal count
            if i == len(degrees):
                count += rest == 0
                return
            for k in range(rest // degrees[i] + 1):
                walk(i + 1, rest - k * degrees[i])

        walk(0, total)
        out.append(count)
    return tuple(out)


@given(st.lists(st.integers(1, 5), max_size=4), st.integers(0, 12))
def test_series_from_degrees_counts_exponents(degrees, n):
    assert series_from_degrees(degrees, n) == power_series(degrees, n)


def test_dimension_series_rejects_negative_entries():
    with pytest.raises(ValueError):
        DimensionSeries((1, -1))


@pytest.mark.parametrize("family,params,expected", [
    ("GL", (2, 2), [2, 4]),
    ("PSL", (2,), [2, 2, 2]),
    ("PSL", (3,), [2, 4, 3, 3]),
    ("OSP", (3, 2), [4]),
    ("OSP", (2, 4), [2]),
    ("P", (3,), [4, 3]),
    ("P", (4,), [4, 2, 4]),
    ("QHAT", (3,), [1, 2, 3]),
    ("Q", (3,), [2, 3]),
])
def test_listed_generator_degrees(family, params, expected):
    assert sorted(table1_degrees(family, params)) == sorted(expected)


def test_unknown_family_has_no_degrees():
    with pytest.raises(UnknownFamily):
        table1_degrees("G3", (1,))


@given(st.integers(1, 5), st.integers(0, 5))
def test_symmetric_power_basis_size(nvars, d):
    basis = SymmetricPowerBasis.of(nvars, d)
    assert len(basis) == comb(nvars + d - 1, d)
    assert list(basis.monomials) == sorted(basis.monomials)


def test_degree_zero_action_is_zero():
    a = algebra("GL", (1, 1))
    assert derivation_action(a, a.even[0], 0) == SparseMatrix.zeros(1, 1)


def test_cartan_acts_by_negated_weights_in_degree_one():
    a = algebra("GL", (2, 1))
    for h_pos, h in enumerate(a.cartan_indices):
        mat = derivation_action(a, h, 1)
        for l, k in enumerate(a.odd):
            # ad h on x_k is the weight; the dual coordinate gets its negative
            assert mat.entries.get((l, l), 0) == -a.cartan_values[k][h_pos]
        assert all(i == j for i, j in mat.entries)


def test_gl11_degree_two_diagonal():
    a = algebra("GL", (1, 1))
    e11 = a.basis_labels.index("E1,1")
    mat = derivation_action(a, e11, 2)
    assert sorted(mat.entries.get((i, i), 0) for i in range(3)) == [-2, 0, 2]


@given(st.data())
def test_derivation_action_is_a_representation(data):
    a = algebra("GL", (2, 1))
    i = data.draw(st.sampled_from(a.even))
    j = data.draw(st.sampled_from(a.even))
    d = data.draw(st.integers(1, 3))
    left = derivation_action(a, i, d) @ derivation_action(a, j, d) - derivation_action(a, j, d) @ derivation_action(a, i, d)
    br = {k: v for k, v in enumerate(bracket(a, {i: 1}, {j: 1})) if v}
    right = SparseMatrix.zeros(left.rows, left.cols)
    for k, v in br.items():
        right = right + derivation_action(a, k, d).scale(v)
    assert left == right


@pytest.mark.parametrize("family,params,d", [("GL", (1, 1), 5), ("GL", (2, 2), 6), ("QHAT", (2,), 4),
                                             ("OSP", (3, 2), 8), ("P", (3,), 8), ("PSL", (2,), 6)])
def test_invariant_dimensions_follow_generator_degrees(family, params, d):
    got = invariant_dimensions(algebra(family, params), d)
    assert got.dims == predicted_series(family, params, d).dims
    assert got.meta["prime_disagreements"] == []


def test_known_series_values():
    assert predicted_series("GL", (2, 2), 6).dims == (1, 0, 1, 0, 2, 0, 2)
    assert predicted_series("PSL", (2,), 6).dims == (1, 0, 3, 0, 6, 0, 10)
    assert predicted_series("QHAT", (2,), 4).dims == (1, 1, 2, 2, 3)
    assert predicted_series("OSP", (3, 2), 8).dims == (1, 0, 0, 0, 1, 0, 0, 0, 1)


def test_exact_and_modular_modes_agree():
    a = algebra("SL", (2, 1))
    assert invariant_dimensions(a, 6, mode="exact").dims == invariant_dimensions(a, 6, mode="modular").dims


def test_invariant_basis_is_invariant():
    a = algebra("GL", (2, 1))
    for d in (2, 4):
        for p in invariant_basis(a, d):
            assert is_invariant(a, p)


@pytest.mark.parametrize("family,params", [("GL", (2, 2)), ("Q", (3,)), ("P", (3,))])
def test_generator_degrees(family, params):
    a = algebra(family, params)
    assert sorted(generator_degrees(a, max(table1_degrees(family, params)))) == sorted(table1_degrees(family, params))


def test_restriction_of_gl11_quadratic_invariant():
    a = algebra("GL", (1, 1))
    (inv,) = invariant_basis(a, 2)
    restricted = restrict_polynomial(a, inv, e1_basis(a))
    assert set(restricted) == {(0, 0)}
    assert restricted[(0, 0)] != 0


def test_restriction_edge_cases():
    a = algebra("GL", (1, 1))
    assert restrict_polynomial(a, {}, e1_basis(a)) == {}
    (inv,) = invariant_basis(a, 2)
    assert restrict_polynomial(a, {(): 3, **inv}, []) == {(): 3}
    with pytest.raises(DimensionMismatch):
        restrict_polynomial(a, {(5,): 1}, e1_basis(a))


def test_w_invariance_examples():
    assert w_invariance_check("GL", (2, 2), {(): 1})
    assert w_invariance_check("GL", (2, 2), {(0, 0): 1, (1, 1): 1})
    assert not w_invariance_check("GL", (2, 2), {(0, 0): 1, (0, 1): -1})
    assert not w_invariance_check("OSP", (3, 2), {(0, 0): 1})
    assert w_invariance_check("OSP", (3, 2), {(0, 0, 0, 0): 1})


def hyperoctahedral_orbit_invariant(poly, r):
    """Oracle: apply every signed permutation to the monomials."""
    import itertools

    for perm in itertools.permutations(range(r)):
        for signs in itertools.product([1, -1], repeat=r):
            image = {}
            for m, c in poly.items():
                new = tuple(sorted(perm[v] for v in m))
                s = 1
                for v in m:
                    s *= signs[v]
                image[new] = image.get(new, 0) + s * c
            if {k: v for k, v in image.items() if v} != poly:
                return False
    return True


@given(st.dictionaries(st.sampled_from([(0, 0), (1, 1), (0, 1), (0, 0, 1, 1), (0, 0, 0, 0), (1, 1, 1, 1)]),
                       st.integers(-3, 3).filter(bool), max_size=4))
def test_w_invariance_matches_orbit_oracle(poly):
    assert w_invariance_check("GL", (2, 2), poly) == hyperoctahedral_orbit_invariant(poly, 2)


def test_jacobian_values():
    assert jacobian_eval("GL", (2, 2), (1, 2)) == -6
    assert jacobian_eval("GL", (2, 2), (1, 1)) == 0
    for fam, params, r in [("GL", (2, 2), 2), ("OSP", (3, 2), 1), ("QHAT", (3,), 3)]:
        assert jacobian_eval(fam, params, [0] * r) == 0


def test_jacobian_q_coordinates_agree():
    # s = (1, 3) means diag(1, 2, -3): x = (1, 2, -3)
    assert jacobian_eval("Q", (3,), (1, 3)) == jacobian_eval("Q", (3,), (1, 2, -3))


def test_non_polar_families_have_no_reflection_group():
    for fam, params in [("PSL", (2,)), ("P", (3,))]:
        with pytest.raises(NotPolar):
            reflection_group(fam, params)


@pytest.mark.parametrize("family,params", [("GL", (2, 2)), ("SL", (2, 1)), ("OSP", (3, 2)), ("QHAT", (2,)),
                                           ("Q", (3,))])
def test_reflection_group_dimensions_match_invariants(family, params):
    spec = reflection_group(family, params)
    assert spec.invariant_dimensions(8) == predicted_series(family, params, 8).dims


def test_q_traceless_invariants_hit_prediction():
    assert reflection_group("Q", (3,)).invariant_dimensions(6) == (1, 0, 1, 1, 1, 1, 2)
