"""Acceptance criteria 1-12, one PASS/FAIL line each.

Run with pytest (``pytest tests/test_acceptance.py -s`` or plain ``pytest -v``) or
directly as a script: ``python3 tests/test_acceptance.py``.
"""

import filecmp
import tempfile
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from supercohom.algebra import bracket, build, in_scope_algebras, table3_dimensions, validate
from supercohom.cli import main
from supercohom.cohomology import RelativeComplex, avrunin_scott_compare
from supercohom.detecting import assemble_detecting, detection_data, e1_basis, in_span, is_stable, table4_dim
from supercohom.errors import ClosureFailure, NonSemisimpleH
from supercohom.invariants import (
    SymmetricPowerBasis,
    invariant_basis,
    invariant_dimensions,
    predicted_series,
    reflection_group,
    restrict_polynomial,
    table1_degrees,
    w_invariance_check,
)
from supercohom.linalg import span_rank
from supercohom.modules import (
    direct_sum,
    dual,
    exterior_regular,
    is_projective_over_x,
    module_to_json,
    natural,
    q1_projective,
    random_module,
    rank_one_tensor_check,
    restrict,
    tensor,
    trivial,
)
from supercohom.tables import DEFAULT_FAMILIES, PSL_DEGREE_CAP, table3
from supercohom.weights import cohomological_defect, defect_combinatorial, superdimension

RESTRICTION_FAMILIES = [("GL", (2, 2)), ("SL", (2, 1)), ("OSP", (3, 2)), ("QHAT", (2,))]


def criterion_1():
    rep = table3(6)
    direct = all(tuple(r["computed"]) == table3_dimensions(r["family"], tuple(r["params"])) for r in rep.rows)
    return rep.ok and direct and len(rep.rows) == 40, f"{len(rep.rows)} rows"


def criterion_2():
    total = 0
    for fam, params in in_scope_algebras(6):
        total += len(validate(build(fam, params)).violations)
    return total == 0, f"{total} violations over {len(in_scope_algebras(6))} algebras"


def criterion_3():
    bad = []
    for fam, params in DEFAULT_FAMILIES:
        d = PSL_DEGREE_CAP if fam == "PSL" else 8
        got = invariant_dimensions(build(fam, params), d, mode="modular")
        if got.dims != predicted_series(fam, params, d).dims or got.meta["prime_disagreements"]:
            bad.append((fam, params))
        if len(got.meta["primes"]) != 2:
            bad.append((fam, params, "primes"))
    return not bad, f"mismatches {bad}"


def criterion_4():
    bad = []
    for fam, params in DEFAULT_FAMILIES:
        a = build(fam, params)
        rep = detection_data(a)
        if len(rep.lie_h) != table4_dim(fam, params):
            bad.append((fam, params, "table"))
        if is_stable(fam, params):
            if len(rep.lie_h) != a.dim_even - a.dim_odd + len(table1_degrees(fam, params)):
                bad.append((fam, params, "stability"))
    return not bad, f"failures {bad}"


def criterion_5():
    bad = []
    for fam, params in [("GL", (2, 2)), ("PSL", (2,)), ("QHAT", (2,)), ("OSP", (3, 2))]:
        a = build(fam, params)
        try:
            for which in ("E", "F"):
                assemble_detecting(a, which)
        except ClosureFailure as exc:
            bad.append((fam, params, str(exc)))
            continue
        rep = detection_data(a)
        for u in rep.f1:
            for v in rep.f1:
                br = {k: x for k, x in enumerate(bracket(a, u, v)) if x}
                if br and not in_span(rep.lie_h, br):
                    bad.append((fam, params, "f1 bracket"))
    return not bad, f"failures {bad}"


def criterion_6():
    bad = []
    for fam, params in RESTRICTION_FAMILIES:
        a = build(fam, params)
        e1 = e1_basis(a)
        group_dims = reflection_group(fam, params).invariant_dimensions(8)
        for d in range(9):
            basis = invariant_basis(a, d)
            if len(basis) != group_dims[d]:
                bad.append((fam, params, d, "dimension"))
            restricted = [restrict_polynomial(a, f, e1) for f in basis]
            if not all(w_invariance_check(fam, params, r) for r in restricted):
                bad.append((fam, params, d, "not W-invariant"))
            index = {m: i for i, m in enumerate(SymmetricPowerBasis.of(len(e1), d).monomials)}
            vecs = [{index[m]: c for m, c in r.items()} for r in restricted]
            if span_rank(vecs) != len(basis):
                bad.append((fam, params, d, "dependent"))
    return not bad, f"failures {bad}"


def criterion_7():
    bad = []
    for fam, params in [("GL", (1, 1)), ("GL", (2, 1))]:
        a = build(fam, params)
        nat = natural(a)
        for name, m in [("trivial", trivial(a)), ("natural", nat), ("end", tensor(nat, dual(nat)))]:
            cx = RelativeComplex(a, m)
            if not all(cx.d_squared_zero(p) for p in range(5)):
                bad.append((fam, params, name))
        got = RelativeComplex(a, trivial(a)).dims(6).dims
        if got != invariant_dimensions(a, 6).dims:
            bad.append((fam, params, "trivial series"))
    return not bad, f"failures {bad}"


def criterion_8():
    q = build("QHAT", (1,))
    rng = np.random.Generator(np.random.PCG64(8))
    pairs = [(Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 4))),
              Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 4)))) for _ in range(20)]
    tensor_ok = all(rank_one_tensor_check(q, lam, mu)["holds"] for lam, mu in pairs)
    x = {q.odd[0]: 1}
    proj_ok = all(is_projective_over_x(q1_projective(q, lam), x) for lam, _ in pairs)
    g = build("GL", (1, 1))
    e, _ = assemble_detecting(g, "E")
    case_one = is_projective_over_x(exterior_regular(e), {e.odd[0]: 1}) and \
        is_projective_over_x(natural(g), {g.odd[0]: 1})
    trivial_ok = not is_projective_over_x(trivial(g), {g.odd[0]: 1}) and not is_projective_over_x(trivial(q), x)
    ok = tensor_ok and proj_ok and case_one and trivial_ok
    return ok, f"tensor {tensor_ok}, P(lambda) {proj_ok}, regular {case_one}, trivial {trivial_ok}"


def _point(rng, e):
    while True:
        coords = [int(v) for v in rng.integers(-5, 6, size=len(e.odd))]
        if any(coords):
            return {k: Fraction(c) for k, c in zip(e.odd, coords) if c}


def _sampled_law(e, rng, law, points=50):
    """Evaluate ``law(M, N, x)`` until ``points`` samples have a semisimple [x,x]."""
    seen = failures = tries = 0
    blocks = 2 if len(e.odd) == 1 else 1
    while seen < points and tries < 10 * points:
        tries += 1
        m = random_module(e, rng, blocks_per_factor=blocks)
        n = random_module(e, rng, blocks_per_factor=blocks)
        x = _point(rng, e)
        try:
            ok = law(m, n, x)
        except NonSemisimpleH:
            continue
        seen += 1
        failures += not ok
    return seen, failures


def _proj(m, x):
    return is_projective_over_x(m, x)


LAWS = {
    "tensor-intersection": lambda m, n, x: _proj(tensor(m, n), x) == (_proj(m, x) or _proj(n, x)),
    "duality": lambda m, n, x: _proj(dual(m), x) == _proj(m, x),
    "endomorphisms": lambda m, n, x: _proj(tensor(dual(m), m), x) == _proj(m, x),
    "odd-superdimension": lambda m, n, x: not _proj(
        m if superdimension(m) % 2 else direct_sum(m, trivial(m.algebra)), x),
    "direct-sum union": lambda m, n, x: _proj(direct_sum(m, n), x) == (_proj(m, x) and _proj(n, x)),
}


def criterion_9():
    rng = np.random.Generator(np.random.PCG64(9))
    summary = []
    ok = True
    for ref in [("GL", (1, 1)), ("GL", (2, 2))]:
        e, _ = assemble_detecting(build(*ref), "E")
        for name, law in LAWS.items():
            seen, failures = _sampled_law(e, rng, law)
            ok &= seen >= 50 and failures == 0
            if failures or seen < 50:
                summary.append(f"{ref[0]}{ref[1]} {name}: {failures}/{seen}")
    return ok, "; ".join(summary) or "all laws hold at 50 points per algebra"


def criterion_10():
    g11 = build("GL", (1, 1))
    e11, _ = assemble_detecting(g11, "E")
    e22, _ = assemble_detecting(build("GL", (2, 2)), "E")
    nat = restrict(natural(g11), e11)
    modules = [trivial(e11), exterior_regular(e11), nat, direct_sum(nat, trivial(e11)),
               trivial(e22), exterior_regular(e22)]
    total = 0
    for i, m in enumerate(modules):
        total += len(avrunin_scott_compare(m, max_degree=8, samples=50, seed=i).disagreements)
    return total == 0, f"{total} disagreements over {len(modules)} modules"


def criterion_11():
    bad = []
    for fam, params in [("GL", (2, 2)), ("SL", (2, 1)), ("OSP", (3, 2))]:
        a = build(fam, params)
        values = (defect_combinatorial(a), cohomological_defect(a), len(e1_basis(a)))
        if len(set(values)) != 1:
            bad.append((fam, params, values))
    psl = build("PSL", (2,))
    gap = (defect_combinatorial(psl), cohomological_defect(psl))
    return not bad and gap == (2, 3), f"failures {bad}; psl(2|2) combinatorial {gap[0]} vs cohomological {gap[1]}"


def _cli_runs(tmp: Path):
    mod = tmp / "module.json"
    mod.write_text(module_to_json(natural(build("GL", (1, 1)))), encoding="utf-8")
    return [
        ["build", "--family", "osp", "--m", "3", "--n", "2"],
        ["validate", "--family", "gl", "--m", "2", "--n", "1"],
        ["invariants", "--family", "gl", "--m", "2", "--n", "2", "--max-degree", "6", "--seed", "7"],
        ["detect", "--family", "q", "--n", "3", "--which", "F"],
        ["cohom", "--family", "gl", "--m", "1", "--n", "1", "--pair", "e", "--coeff", "regular",
         "--max-degree", "4", "--annihilator"],
        ["cohom", "--family", "gl", "--m", "1", "--n", "1", "--coeff", str(mod), "--max-degree", "3"],
        ["module", "validate", str(mod)],
        ["rankvar", "--family", "gl", "--m", "2", "--n", "2", "--module", "natural", "--seed", "5"],
        ["atyp", "--family", "gl", "--m", "2", "--n", "2", "--weight", "1,0,0,0"],
        ["tables", "--table", "4"],
    ]


def criterion_12():
    runner = CliRunner()
    mismatched = []
    with tempfile.TemporaryDirectory() as d:
        tmp = Path(d)
        for args in _cli_runs(tmp):
            first = runner.invoke(main, args)
            second = runner.invoke(main, args)
            if first.exit_code != second.exit_code or first.output != second.output:
                mismatched.append(args[0])
        for k in ("a", "b"):
            res = runner.invoke(main, ["pipeline", "--family", "gl", "--m", "1", "--n", "1", "--seed", "3",
                                       "--out", str(tmp / k)])
            if res.exit_code != 0:
                mismatched.append("pipeline exit")
        files = sorted(p.name for p in (tmp / "a").iterdir())
        _, diff, errors = filecmp.cmpfiles(tmp / "a", tmp / "b", files, shallow=False)
        if diff or errors:
            mismatched.append(f"pipeline {diff + errors}")
    return not mismatched, f"differences {mismatched}"


CRITERIA = {
    1: ("Table 3 dimensions", criterion_1, 5),
    2: ("super Jacobi and antisymmetry", criterion_2, 30),
    3: ("Table 1 Hilbert series", criterion_3, 600),
    4: ("Table 4 centralizers and stability identity", criterion_4, 60),
    5: ("detecting-subalgebra closure", criterion_5, 60),
    6: ("restriction isomorphism", criterion_6, 300),
    7: ("differential correctness", criterion_7, 120),
    8: ("rank-one theory", criterion_8, 10),
    9: ("rank-variety property suite", criterion_9, 120),
    10: ("annihilator support vs rank variety", criterion_10, 300),
    11: ("defect equalities", criterion_11, 60),
    12: ("CLI determinism", criterion_12, 60),
}


def run_criterion(k):
    title, fn, budget = CRITERIA[k]
    start = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - start
    passed = bool(ok) and elapsed < budget
    line = (f"{'PASS' if passed else 'FAIL'} criterion {k}: {title} "
            f"({elapsed:.1f}s of {budget}s) {detail}")
    return passed, line


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k, capsys):
    passed, line = run_criterion(k)
    with capsys.disabled():
        print("\n" + line)
    assert passed, line


if __name__ == "__main__":
    results = [run_criterion(k) for k in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    raise SystemExit(0 if all(p for p, _ in results) else 1)
