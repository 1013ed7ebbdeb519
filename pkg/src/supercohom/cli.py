"""Command-line entry point.

Exit codes: 0 when everything checked matches, 2 on a table or validation
mismatch, 1 on errors.  Every JSON artifact is UTF-8 with sorted keys; all
sampling is seeded through numpy's PCG64 generator.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path

import click

from . import algebra as alg
from .errors import SupercohomError

MISMATCH = 2
ERROR = 1

ONE_PARAM = ("PSL", "P", "Q", "QHAT")


def dumps(obj) -> str:
    def default(x):
        if isinstance(x, Fraction):
            return str(x)
        if isinstance(x, tuple):
            return list(x)
        raise TypeError(f"cannot serialize {type(x).__name__}")

    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2, default=default) + "\n"


def emit(obj, out: str | None):
    text = dumps(obj)
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


def parse_params(family: str, m: int | None, n: int | None, params: str | None) -> tuple[str, tuple[int, ...]]:
    fam = family.upper()
    if params:
        try:
            return fam, tuple(int(p) for p in params.split(",") if p.strip())
        except ValueError as exc:
            raise click.BadParameter(f"cannot parse --params {params!r}") from exc
    if fam in ONE_PARAM:
        if n is None:
            raise click.BadParameter(f"{fam} needs --n")
        return fam, (n,)
    if m is None or n is None:
        raise click.BadParameter(f"{fam} needs --m and --n")
    return fam, (m, n)


def family_options(f):
    f = click.option("--params", default=None, help="comma-separated parameters, overriding --m/--n")(f)
    f = click.option("--n", "n", type=int, default=None)(f)
    f = click.option("--m", "m", type=int, default=None)(f)
    f = click.option("--family", required=True, help="gl, sl, psl, osp, p, q or qhat")(f)
    return f


def run_guarded(fn):
    try:
        code = fn()
    except click.ClickException:
        raise
    except (SupercohomError, ValueError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(ERROR)
    sys.exit(code or 0)


@click.group()
@click.option("--prime", type=int, default=None, help="modular prime (overrides SUPERCOHOM_PRIME)")
def main(prime):
    """Cohomology and support varieties of classical Lie superalgebras."""
    if prime is not None:
        import os

        from .linalg import PRIME_ENV, PrimeFieldConfig

        PrimeFieldConfig(prime)
        os.environ[PRIME_ENV] = str(prime)


@main.command()
@family_options
@click.option("--out", default=None)
def build(family, m, n, params, out):
    """Build an algebra and write its structure constants."""

    def go():
        fam, p = parse_params(family, m, n, params)
        emit(alg.to_dict(alg.build(fam, p)), out)

    run_guarded(go)


@main.command()
@family_options
@click.option("--out", default=None)
def validate(family, m, n, params, out):
    """Check parity, antisymmetry, Jacobi, weights and the invariant form."""

    def go():
        fam, p = parse_params(family, m, n, params)
        rep = alg.validate(alg.build(fam, p))
        emit({"family": fam, "params": list(p), "ok": rep.ok, "violations": rep.violations}, out)
        return 0 if rep.ok else MISMATCH

    run_guarded(go)


def invariants_report(fam, p, max_degree, mode, seed) -> dict:
    from .invariants import generator_degrees, invariant_dimensions, predicted_series, table1_degrees

    a = alg.build(fam, p)
    computed = invariant_dimensions(a, max_degree, mode=mode)
    predicted = predicted_series(fam, p, max_degree)
    gens = sorted(generator_degrees(a, max(table1_degrees(fam, p), default=0), mode=mode, seed=seed))
    return {
        "family": fam,
        "params": list(p),
        "D": max_degree,
        "computed": list(computed.dims),
        "predicted": list(predicted.dims),
        "generator_degrees": gens,
        "match": computed.dims == predicted.dims and gens == sorted(table1_degrees(fam, p)),
        "prime_disagreements": computed.meta.get("prime_disagreements", []),
    }


@main.command()
@family_options
@click.option("--max-degree", type=int, default=8)
@click.option("--mode", type=click.Choice(["modular", "exact", "auto"]), default="modular")
@click.option("--seed", type=int, default=0)
@click.option("--out", default=None)
def invariants(family, m, n, params, max_degree, mode, seed, out):
    """Graded dimensions of the invariant polynomials on the odd part."""

    def go():
        fam, p = parse_params(family, m, n, params)
        rep = invariants_report(fam, p, max_degree, mode, seed)
        emit(rep, out)
        return 0 if rep["match"] else MISMATCH

    run_guarded(go)


def detect_report(fam, p, which) -> dict:
    from .detecting import assemble_detecting, detection_data

    a = alg.build(fam, p)
    try:
        sub, rep = assemble_detecting(a, which)
        out = rep.to_dict()
        out["subalgebra"] = {"ref": sub.ref, "dim0": sub.dim_even, "dim1": sub.dim_odd,
                             "valid": alg.validate(sub).ok}
    except SupercohomError as exc:
        out = detection_data(a).to_dict()
        out["subalgebra"] = {"error": f"{type(exc).__name__}: {exc}"}
    out.update({"family": fam, "params": list(p), "which": which})
    return out


@main.command()
@family_options
@click.option("--which", type=click.Choice(["E", "F", "e", "f"]), default="E")
@click.option("--out", default=None)
def detect(family, m, n, params, which, out):
    """Generic element, its centralizer and a detecting subalgebra."""

    def go():
        fam, p = parse_params(family, m, n, params)
        rep = detect_report(fam, p, which.upper())
        emit(rep, out)
        return 0 if rep["checks"].get("table4") else MISMATCH

    run_guarded(go)


def load_module(spec: str, g):
    """A coefficient module: trivial, natural, regular (over e) or a JSON file."""
    from . import modules as mods

    if spec == "trivial":
        return None
    if spec == "natural":
        return mods.natural(g)
    if spec == "adjoint":
        return mods.adjoint(g)
    path = Path(spec)
    if not path.exists():
        raise click.BadParameter(f"unknown coefficient module {spec!r}")
    return mods.module_from_json(path.read_text(encoding="utf-8"))


def cohom_report(fam, p, pair, coeff, max_degree, annihilator) -> dict:
    from .cohomology import RelativeComplex, annihilator_truncated, coefficients_over, pair_algebra
    from . import modules as mods

    g = alg.build(fam, p)
    a = pair_algebra(g, pair)
    if coeff == "regular":
        if pair != "e":
            raise click.BadParameter("the regular module is defined over e")
        module = mods.exterior_regular(a)
    else:
        module = coefficients_over(a, load_module(coeff, g))
    cx = RelativeComplex(a, module)
    series = cx.dims(max_degree)
    out = {
        "family": fam,
        "params": list(p),
        "pair": pair,
        "coeff": coeff if coeff in ("trivial", "natural", "adjoint", "regular") else module.name or "file",
        "max_degree": max_degree,
        "dims": list(series.dims),
        "cochain_dims": series.meta["cochain_dims"],
        "d_squared_zero": all(cx.d_squared_zero(q) for q in range(max_degree)),
    }
    if annihilator:
        if pair != "e":
            raise click.BadParameter("the annihilator is computed over the pair (e, e0)")
        out["ideal"] = annihilator_truncated(a, module, max_degree).to_dict()
    return out


@main.command()
@family_options
@click.option("--pair", type=click.Choice(["g", "f", "e"]), default="g")
@click.option("--coeff", default="trivial", help="trivial, natural, adjoint, regular or a module JSON file")
@click.option("--max-degree", type=int, default=4)
@click.option("--annihilator/--no-annihilator", default=False)
@click.option("--out", default=None)
def cohom(family, m, n, params, pair, coeff, max_degree, annihilator, out):
    """Relative cohomology dimensions (and optionally the truncated annihilator)."""

    def go():
        fam, p = parse_params(family, m, n, params)
        rep = cohom_report(fam, p, pair, coeff, max_degree, annihilator)
        emit(rep, out)
        return 0 if rep["d_squared_zero"] else MISMATCH

    run_guarded(go)


@main.group()
def module():
    """Supermodule utilities."""


@module.command("validate")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", default=None)
def module_validate(path, out):
    """Check a module JSON file against the representation axioms."""
    from .modules import module_from_json, validate_module

    def go():
        mod = module_from_json(Path(path).read_text(encoding="utf-8"))
        bad = validate_module(mod)
        emit({"algebra_ref": mod.algebra.ref, "dim0": mod.dim0, "dim1": mod.dim1,
              "ok": not bad, "violations": bad[:50]}, out)
        return 0 if not bad else MISMATCH

    run_guarded(go)


def rankvar_report(fam, p, which_module, samples, seed) -> dict:
    from . import modules as mods
    from .detecting import assemble_detecting

    g = alg.build(fam, p)
    e, _ = assemble_detecting(g, "E")
    if which_module == "trivial":
        mod = mods.restrict(mods.trivial(g), e)
    elif which_module == "natural":
        mod = mods.restrict(mods.natural(g), e)
    elif which_module == "regular":
        mod = mods.exterior_regular(e)
    else:
        path = Path(which_module)
        if not path.exists():
            raise click.BadParameter(f"unknown module {which_module!r}")
        mod = mods.module_from_json(path.read_text(encoding="utf-8"))
        if mod.algebra.ref != e.ref:
            mod = mods.restrict(mod, e)
    rep = mods.rank_variety_probe(mod, samples_per_stratum=samples, seed=seed).to_dict()
    rep.update({"family": fam, "params": list(p), "dim_e1": e.dim_odd, "sdim": mod.dim0 - mod.dim1})
    return rep


@main.command()
@family_options
@click.option("--module", "which_module", default="trivial", help="trivial, natural, regular or a module JSON file")
@click.option("--samples", type=int, default=5)
@click.option("--seed", type=int, default=0)
@click.option("--out", default=None)
def rankvar(family, m, n, params, which_module, samples, seed, out):
    """Sample the rank variety of a module over the detecting subalgebra e."""

    def go():
        fam, p = parse_params(family, m, n, params)
        emit(rankvar_report(fam, p, which_module, samples, seed), out)

    run_guarded(go)


@main.command()
@family_options
@click.option("--weight", default=None, help="comma-separated weight coordinates (default: zero)")
@click.option("--out", default=None)
def atyp(family, m, n, params, weight, out):
    """Half-sum of roots, atypicality of a weight and the defect."""
    from .weights import atypicality, defect_combinatorial, rho

    def go():
        fam, p = parse_params(family, m, n, params)
        a = alg.build(fam, p)
        wt = [Fraction(x) for x in weight.split(",")] if weight else [Fraction(0)] * a.rank
        emit({"family": fam, "params": list(p), "coords": list(a.coord_labels), "weight": wt,
              "rho": list(rho(a)), "atypicality": atypicality(a, wt), "defect": defect_combinatorial(a)}, out)

    run_guarded(go)


@main.command()
@click.option("--table", "which", type=click.Choice(["1", "3", "4"]), required=True)
@click.option("--family", default=None)
@click.option("--m", "m", type=int, default=None)
@click.option("--n", "n", type=int, default=None)
@click.option("--params", default=None)
@click.option("--max-size", type=int, default=6)
@click.option("--max-degree", type=int, default=8)
@click.option("--mode", type=click.Choice(["modular", "exact", "auto"]), default="modular")
@click.option("--seed", type=int, default=0)
@click.option("--out", default=None, help="directory for table<k>.json and table<k>.txt")
def tables(which, family, m, n, params, max_size, max_degree, mode, seed, out):
    """Recompute a table row by row; exit 2 on any MISMATCH."""
    from . import tables as tbl

    def go():
        fams = [parse_params(family, m, n, params)] if family else None
        if which == "3":
            rep = tbl.table3(max_size)
        elif which == "1":
            rep = tbl.table1(fams, max_degree, mode, seed)
        else:
            rep = tbl.table4(fams)
        if out:
            d = Path(out)
            d.mkdir(parents=True, exist_ok=True)
            (d / f"table{which}.json").write_text(dumps(rep.to_dict()), encoding="utf-8")
            (d / f"table{which}.txt").write_text(rep.to_text(), encoding="utf-8")
        click.echo(rep.to_text(), nl=False)
        return 0 if rep.ok else MISMATCH

    run_guarded(go)


@main.command()
@family_options
@click.option("--max-degree", type=int, default=4)
@click.option("--seed", type=int, default=0)
@click.option("--samples", type=int, default=5)
@click.option("--out", required=True, help="output directory")
def pipeline(family, m, n, params, max_degree, seed, samples, out):
    """build, validate, invariants, detect, cohom and rankvar, with a manifest.

    Families without a Cartan subspace stop after detect and invariants.
    """
    from .detecting import is_polar

    fam, p = parse_params(family, m, n, params)
    root = Path(out)
    root.mkdir(parents=True, exist_ok=True)
    stages: list[dict] = []

    def run(name, fn):
        try:
            return fn()
        except (SupercohomError, ValueError, KeyError, click.ClickException) as exc:
            click.echo(f"stage {name} failed: {exc}", err=True)
            sys.exit(ERROR)

    def record(name, data):
        fname = f"{name}.json"
        (root / fname).write_text(dumps(data), encoding="utf-8")
        stages.append({"name": name, "file": fname})

    def do_validate():
        rep = alg.validate(alg.build(fam, p))
        if not rep.ok:
            raise SupercohomError(f"{len(rep.violations)} violations")
        return {"ok": True, "violations": []}

    built = run("build", lambda: alg.to_dict(alg.build(fam, p)))
    checked = run("validate", do_validate)
    polar = is_polar(fam, p)
    # construction always runs; its artifacts are kept only on the polar path
    if polar:
        record("build", built)
        record("validate", checked)
    record("invariants", run("invariants", lambda: invariants_report(fam, p, max_degree, "modular", seed)))
    record("detect", run("detect", lambda: detect_report(fam, p, "E")))
    if polar:
        record("cohom", run("cohom", lambda: {"g": cohom_report(fam, p, "g", "trivial", max_degree, False),
                                              "e": cohom_report(fam, p, "e", "trivial", max_degree, False)}))
        record("rankvar", run("rankvar", lambda: rankvar_report(fam, p, "trivial", samples, seed)))
    manifest = {"family": fam, "params": list(p), "seed": seed, "max_degree": max_degree,
                "polar": polar, "stages": stages}
    (root / "manifest.json").write_text(dumps(manifest), encoding="utf-8")
    click.echo(dumps(manifest), nl=False)


if __name__ == "__main__":
    main()
