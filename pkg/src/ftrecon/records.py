"""JSON-lines records for semigroups and clones."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .catalog import SemigroupTable, composition_table
from .clone import TruncatedClone, build_cmp_tables
from .functions import DomainSpec, FinitaryFn


class RecordError(ValueError):
    pass


def semigroup_record(S: SemigroupTable, include_backing: bool = True) -> dict:
    rec = {
        "kind": "semigroup",
        "label": S.label,
        "size": S.size,
        "domain": S.domain.to_json(),
        "table": S.table.reshape(-1).tolist(),
    }
    if include_backing and S.elements is not None:
        rec["backing"] = [list(e.map) for e in S.elements]
    return rec


def semigroup_from_record(rec: dict) -> SemigroupTable:
    """Rebuilds the table as stored; the backing is not used to recompute it."""
    if rec.get("kind") != "semigroup":
        raise RecordError("not a semigroup record")
    n = int(rec["size"])
    table = np.asarray(rec["table"], dtype=np.int64)
    if table.size != n * n:
        raise RecordError("table length does not match size")
    if table.min() < 0 or table.max() >= n:
        raise RecordError("table entries out of range")
    domain = DomainSpec.from_json(rec["domain"])
    elements = None
    if "backing" in rec:
        elements = [FinitaryFn(domain, row) for row in rec["backing"]]
    return SemigroupTable(domain, table.reshape(n, n), elements, rec.get("label", ""))


def clone_record(C: TruncatedClone) -> dict:
    return {
        "kind": "clone",
        "domain": C.domain.to_json(),
        "cap": C.cap,
        "ops": {str(n): tab.tolist() for n, tab in sorted(C.ops.items())},
    }


def clone_from_record(rec: dict) -> TruncatedClone:
    if rec.get("kind") != "clone":
        raise RecordError("not a clone record")
    domain = DomainSpec.from_json(rec["domain"])
    cap = int(rec["cap"])
    ops = {int(n): np.asarray(tab, dtype=np.int64) for n, tab in rec["ops"].items()}
    return TruncatedClone(domain, cap, ops, build_cmp_tables(domain.size, ops, cap))


def dumps(rec: dict) -> str:
    return json.dumps(rec, sort_keys=True, separators=(",", ":"))


def write_records(path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(dumps(rec) + "\n")


def read_records(path) -> list:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return [json.loads(line) for line in text.splitlines() if line.strip()]
    except json.JSONDecodeError as exc:
        raise RecordError(f"{path}: {exc}") from None


def backing_matches(S: SemigroupTable) -> bool:
    return S.elements is not None and np.array_equal(S.table, composition_table(S.elements))
