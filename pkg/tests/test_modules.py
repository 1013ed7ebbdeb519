import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import algebra, detecting
from supercohom.algebra import bracket
from supercohom.errors import AlgebraMismatch, InvalidParams, NonSemisimpleH
from supercohom.linalg import SparseMatrix
from supercohom.modules import (
    Supermodule,
    adjoint,
    direct_sum,
    dual,
    duality_check,
    exterior_regular,
    from_odd_operators,
    is_projective_over_x,
    module_from_json,
    module_to_json,
    natural,
    parity_shift,
    q1_projective,
    random_module,
    rank_one,
    rank_one_tensor_check,
    rank_variety_probe,
    restrict,
    tensor,
    tensor_projectivity_law_check,
    trivial,
    validate_module,
)
from supercohom.weights import superdimension


def dense(mat):
    out = np.zeros(mat.shape)
    for (i, j), v in mat.entries.items():
        out[i, j] = float(v)
    return out


def projective_oracle(m, x):
    """Floating-point restatement: null space of rho(h) by SVD, then half rank of rho(x) on it."""
    a = m.algebra
    rho_x = dense(m.rho(x))
    rho_h = dense(m.rho({k: v for k, v in enumerate(bracket(a, x, x)) if v}))
    if m.dim == 0:
        return True
    _, s, vt = np.linalg.svd(rho_h)
    null = vt[int(np.sum(s > 1e-9)):].T
    if null.shape[1] == 0:
        return True
    return 2 * np.linalg.matrix_rank(rho_x @ null, tol=1e-9) == null.shape[1]


def odd_vector(a, coords):
    return {k: Fraction(c) for k, c in zip(a.odd, coords) if c}


def e_odd_point(e, data):
    coords = data.draw(st.lists(st.integers(-4, 4), min_size=len(e.odd), max_size=len(e.odd))
                       .filter(lambda v: any(v)))
    return odd_vector(e, coords)


# constructors


def test_constructor_dimensions():
    g = algebra("GL", (2, 3))
    assert (natural(g).dim0, natural(g).dim1) == (2, 3)
    h = algebra("GL", (1, 1))
    t = tensor(natural(h), dual(natural(h)))
    assert (t.dim0, t.dim1) == (2, 2)
    assert (parity_shift(trivial(h)).dim0, parity_shift(trivial(h)).dim1) == (0, 1)
    assert (adjoint(g).dim0, adjoint(g).dim1) == (g.dim_even, g.dim_odd)


@pytest.mark.parametrize("family,params", [("GL", (1, 1)), ("GL", (2, 1)), ("SL", (2, 1)), ("OSP", (1, 2)),
                                           ("QHAT", (2,)), ("P", (3,))])
def test_constructor_outputs_validate(family, params):
    a = algebra(family, params)
    nat = natural(a)
    for m in (trivial(a), nat, adjoint(a), dual(nat), parity_shift(nat), direct_sum(nat, trivial(a))):
        assert validate_module(m) == [], m
    assert validate_module(tensor(nat, dual(nat))) == []


def test_natural_is_undefined_for_quotients():
    with pytest.raises(AlgebraMismatch):
        natural(algebra("PSL", (2,)))


def test_mismatched_algebras():
    with pytest.raises(AlgebraMismatch):
        tensor(trivial(algebra("GL", (1, 1))), trivial(algebra("GL", (2, 1))))
    with pytest.raises(AlgebraMismatch):
        restrict(trivial(algebra("GL", (1, 1))), detecting("GL", (2, 2), "E")[0])


def test_dual_matrices_by_hand():
    # for odd x and odd basis vector b the transpose picks up a plus sign
    a = algebra("GL", (1, 1))
    m = natural(a)
    d = dual(m)
    for k in range(a.dim):
        rho, rho_d = m.action[k], d.action[k]
        for (i, j), v in rho.entries.items():
            sign = -1 if a.parity[k] and m.parity_of(i) else 1
            assert rho_d.entries.get((j, i)) == -sign * v


def test_validator_flags_broken_relation():
    a = algebra("GL", (1, 1))
    m = natural(a)
    acts = list(m.action)
    acts[a.even[0]] = acts[a.even[0]].scale(2)
    assert any(v["kind"] == "relation" for v in validate_module(Supermodule(a, 1, 1, tuple(acts))))
    acts = list(m.action)
    acts[a.odd[0]] = SparseMatrix(2, 2, {(0, 0): 1})
    assert any(v["kind"] == "parity" for v in validate_module(Supermodule(a, 1, 1, tuple(acts))))


def test_restriction_to_detecting_subalgebra_validates():
    e, _ = detecting("GL", (2, 2), "E")
    m = restrict(natural(algebra("GL", (2, 2))), e)
    assert (m.dim0, m.dim1) == (2, 2)
    assert validate_module(m) == []


def test_regular_module_of_e():
    e, _ = detecting("GL", (2, 2), "E")
    reg = exterior_regular(e)
    assert (reg.dim0, reg.dim1) == (2, 2)
    assert validate_module(reg) == []


def test_json_round_trip():
    e, _ = detecting("GL", (1, 1), "E")
    m = random_module(e, np.random.default_rng(5))
    text = module_to_json(m)
    back = module_from_json(text)
    assert back == m
    assert module_to_json(back) == text
    raw = json.loads(text)
    assert set(raw) == {"algebra_ref", "dim0", "dim1", "action", "name"}


def test_json_rejects_wrong_algebra():
    m = natural(algebra("GL", (1, 1)))
    with pytest.raises(AlgebraMismatch):
        module_from_json(module_to_json(m), algebra("GL", (2, 1)))
    bad = json.loads(module_to_json(m))
    bad["action"].append([99, 0, 0, "1"])
    with pytest.raises(InvalidParams):
        module_from_json(json.dumps(bad))


# rank one


def test_rank_one_cases():
    q = algebra("QHAT", (1,))
    r = rank_one(q, {q.odd[0]: 1})
    assert r.case == "II"
    g = algebra("GL", (1, 1))
    assert rank_one(g, {g.odd[0]: 1}).case == "I"


def test_trivial_module_is_never_projective():
    g = algebra("GL", (1, 1))
    assert not is_projective_over_x(trivial(g), {g.odd[0]: 1})
    assert not is_projective_over_x(trivial(g), {g.odd[0]: 1, g.odd[1]: 1})


def test_case_one_regular_module_is_projective():
    g = algebra("GL", (1, 1))
    x = {g.odd[0]: 1}
    e, _ = detecting("GL", (1, 1), "E")
    reg = exterior_regular(e)
    assert is_projective_over_x(reg, {e.odd[0]: 1})
    # the natural module restricted to a single root vector is the same two-dimensional shape
    assert is_projective_over_x(natural(g), x)


def test_natural_gl11_at_cartan_element():
    g = algebra("GL", (1, 1))
    x = {g.odd[0]: 1, g.odd[1]: 1}
    nat = natural(g)
    h = {k: v for k, v in enumerate(bracket(g, x, x)) if v}
    assert nat.rho(h) == SparseMatrix.identity(2).scale(2)
    assert is_projective_over_x(nat, x)
    assert projective_oracle(nat, x)


def test_non_semisimple_h_is_rejected():
    q = algebra("QHAT", (1,))
    # x acts by a length-four chain, so [x,x] acts by a nonzero nilpotent
    y = SparseMatrix(4, 4, {(2, 0): 1, (1, 2): 1, (3, 1): 1})
    m = from_odd_operators(q, [y], 2, 2)
    assert validate_module(m) == []
    with pytest.raises(NonSemisimpleH):
        is_projective_over_x(m, {q.odd[0]: 1})


def test_even_vector_is_rejected():
    g = algebra("GL", (1, 1))
    with pytest.raises(InvalidParams):
        is_projective_over_x(trivial(g), {g.even[0]: 1})


@pytest.mark.parametrize("lam", [1, 2, -3, Fraction(1, 2)])
def test_q1_projective_modules(lam):
    q = algebra("QHAT", (1,))
    p = q1_projective(q, lam)
    assert validate_module(p) == []
    assert is_projective_over_x(p, {q.odd[0]: 1})


@pytest.mark.parametrize("lam,mu", [(1, 2), (1, -1), (0, 3), (2, -2), (0, 0)])
def test_rank_one_tensor_decomposition(lam, mu):
    assert rank_one_tensor_check(algebra("QHAT", (1,)), lam, mu)["holds"]


def test_tensor_law_examples():
    g = algebra("GL", (1, 1))
    x = {g.odd[0]: 1}
    assert tensor_projectivity_law_check(trivial(g), trivial(g), x)
    assert tensor_projectivity_law_check(natural(g), trivial(g), x)
    assert is_projective_over_x(tensor(natural(g), trivial(g)), x)


def test_duality_examples():
    g = algebra("GL", (1, 1))
    assert duality_check(trivial(g), {g.odd[0]: 1})
    e, _ = detecting("GL", (1, 1), "E")
    assert duality_check(exterior_regular(e), {e.odd[0]: 1})


# laws over detecting subalgebras, sampled


@pytest.fixture(scope="module", params=[("GL", (1, 1)), ("GL", (2, 2))])
def e_algebra(request):
    return detecting(*request.param, "E")[0]


@settings(max_examples=50)
@given(data=st.data())
def test_projectivity_laws_on_random_modules(e_algebra, data):
    seed = data.draw(st.integers(0, 10**6))
    rng = np.random.default_rng(seed)
    m = random_module(e_algebra, rng, blocks_per_factor=2 if len(e_algebra.odd) == 1 else 1)
    n = random_module(e_algebra, rng, blocks_per_factor=1)
    x = e_odd_point(e_algebra, data)
    try:
        pm = is_projective_over_x(m, x)
    except NonSemisimpleH:
        return
    assert pm == projective_oracle(m, x)
    assert duality_check(m, x)
    assert is_projective_over_x(m, {k: 3 * v for k, v in x.items()}) == pm
    try:
        is_projective_over_x(n, x)
    except NonSemisimpleH:
        return
    assert tensor_projectivity_law_check(m, n, x)
    assert is_projective_over_x(direct_sum(m, n), x) == (pm and is_projective_over_x(n, x))


@settings(max_examples=50)
@given(data=st.data())
def test_odd_superdimension_forces_full_variety(e_algebra, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 10**6)))
    m = random_module(e_algebra, rng, blocks_per_factor=1)
    m = direct_sum(m, trivial(e_algebra))
    x = e_odd_point(e_algebra, data)
    if superdimension(m) % 2 == 0:
        return
    try:
        assert not is_projective_over_x(m, x)
    except NonSemisimpleH:
        pass


def test_random_modules_validate(e_algebra):
    rng = np.random.default_rng(11)
    for _ in range(5):
        assert validate_module(random_module(e_algebra, rng, blocks_per_factor=1)) == []


def test_random_module_is_four_dimensional_over_gl11():
    e, _ = detecting("GL", (1, 1), "E")
    rng = np.random.default_rng(0)
    dims = {random_module(e, rng).dim for _ in range(20)}
    assert dims <= {2, 3, 4}


# rank varieties


def test_rank_variety_of_trivial_module_is_everything():
    e, _ = detecting("GL", (2, 2), "E")
    rep = rank_variety_probe(trivial(e), samples_per_stratum=3, seed=1)
    assert rep.estimated_dim == 2
    assert [s["support"] for s in rep.strata] == [[0], [0, 1], [1]]


def test_rank_variety_of_natural_gl11_is_zero():
    g = algebra("GL", (1, 1))
    e, _ = detecting("GL", (1, 1), "E")
    m = restrict(natural(g), e)
    rep = rank_variety_probe(m, samples_per_stratum=5, seed=0)
    assert rep.estimated_dim == 0
    # grid oracle
    y = {k: 1 for k in e.odd}
    for c in range(1, 51):
        assert projective_oracle(m, {k: Fraction(c, 7) * v for k, v in y.items()})


def test_rank_variety_report_is_deterministic_and_rechecked():
    e, _ = detecting("GL", (2, 2), "E")
    m = restrict(natural(algebra("GL", (2, 2))), e)
    a = rank_variety_probe(m, seed=4)
    b = rank_variety_probe(m, seed=4)
    assert a.to_dict() == b.to_dict()
    assert 0 <= a.estimated_dim <= a.estimated_dim_any <= len(e.odd)
    assert a.estimated_dim == 1
    for stratum in a.strata:
        for pt, flag in zip(stratum["points"], stratum["projective"]):
            x = {}
            for c, idx in zip(pt, stratum["support"]):
                x[e.odd[idx]] = Fraction(c)
            assert flag == projective_oracle(m, x)


def test_odd_superdimension_module_has_full_probe():
    e, _ = detecting("GL", (2, 2), "E")
    m = direct_sum(restrict(natural(algebra("GL", (2, 2))), e), trivial(e))
    assert superdimension(m) == 1
    assert rank_variety_probe(m, seed=2).estimated_dim == len(e.odd)
