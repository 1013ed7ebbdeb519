"""Recompute the dimension, invariant-ring and centralizer tables row by row."""

from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import build, in_scope_algebras, table3_dimensions
from .detecting import detection_data, is_stable, table4_dim
from .invariants import generator_degrees, invariant_dimensions, predicted_series, table1_degrees

# families checked when no family is requested
DEFAULT_FAMILIES: tuple[tuple[str, tuple[int, ...]], ...] = (
    ("GL", (1, 1)),
    ("GL", (1, 2)),
    ("GL", (2, 2)),
    ("SL", (2, 1)),
    ("OSP", (3, 2)),
    ("QHAT", (2,)),
    ("Q", (3,)),
    ("P", (3,)),
    ("PSL", (2,)),
)

PSL_DEGREE_CAP = 6


@dataclass
class TableReport:
    table: int
    rows: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r["status"] == "MATCH" for r in self.rows)

    def to_dict(self) -> dict:
        return {"table": self.table, "ok": self.ok, "rows": self.rows}

    def to_text(self) -> str:
        if not self.rows:
            return f"table {self.table}: no rows\n"
        keys = [k for k in self.rows[0] if k != "status"] + ["status"]
        cells = [[_cell(r[k]) for k in keys] for r in self.rows]
        widths = [max(len(k), *(len(c[i]) for c in cells)) for i, k in enumerate(keys)]
        lines = ["  ".join(k.ljust(w) for k, w in zip(keys, widths)).rstrip()]
        lines.append("  ".join("-" * w for w in widths))
        lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
        return "\n".join(lines) + "\n"


def _cell(v) -> str:
    if isinstance(v, (list, tuple)):
        return "(" + ",".join(_cell(x) for x in v) + ")"
    return str(v)


def _status(ok: bool) -> str:
    return "MATCH" if ok else "MISMATCH"


def table3(max_size: int = 6) -> TableReport:
    rep = TableReport(3)
    for fam, params in in_scope_algebras(max_size):
        a = build(fam, params)
        computed = [a.dim_even, a.dim_odd]
        expected = list(table3_dimensions(fam, params))
        rep.rows.append({"family": fam, "params": list(params), "computed": computed, "expected": expected,
                         "status": _status(computed == expected)})
    return rep


def table1(families=None, max_degree: int = 8, mode: str = "modular", seed: int = 0) -> TableReport:
    rep = TableReport(1)
    for fam, params in families or DEFAULT_FAMILIES:
        a = build(fam, params)
        d = min(max_degree, PSL_DEGREE_CAP) if fam == "PSL" and families is None else max_degree
        computed = invariant_dimensions(a, d, mode=mode)
        predicted = predicted_series(fam, params, d)
        gens = sorted(generator_degrees(a, max(table1_degrees(fam, params), default=0), mode=mode, seed=seed))
        ok = computed.dims == predicted.dims and gens == sorted(table1_degrees(fam, params))
        rep.rows.append({"family": fam, "params": list(params), "max_degree": d,
                         "computed": list(computed.dims), "predicted": list(predicted.dims),
                         "generator_degrees": gens, "expected_degrees": sorted(table1_degrees(fam, params)),
                         "status": _status(ok)})
    return rep


def table4(families=None) -> TableReport:
    rep = TableReport(4)
    for fam, params in families or DEFAULT_FAMILIES:
        a = build(fam, params)
        report = detection_data(a)
        dim_h = len(report.lie_h)
        expected = table4_dim(fam, params)
        row = {"family": fam, "params": list(params), "dim_lieH": dim_h, "expected": expected}
        ok = dim_h == expected
        if is_stable(fam, params):
            rhs = a.dim_even - a.dim_odd + len(table1_degrees(fam, params))
            row["stability_identity"] = dim_h == rhs
            ok = ok and dim_h == rhs
        else:
            row["stability_identity"] = "n/a"
        row["status"] = _status(ok)
        rep.rows.append(row)
    return rep
