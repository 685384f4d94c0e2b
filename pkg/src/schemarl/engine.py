"""Deterministic in-memory relational evaluator.

Merging two tables is a full outer join (on the shared surrogate-key column,
or on declared-equivalent attribute values), so no stored fact is ever lost.
Query evaluation is inner: rows carrying NULL in a referenced attribute are
excluded, which makes query answers invariant across schema states.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass

from .errors import StateError
from .schema import (
    ConstraintPool,
    JoinAction,
    PhysicalTable,
    Row,
    SchemaState,
    canonical_rows,
)

OPS = {
    "=": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    ">": operator.gt,
    "<=": operator.le,
    ">=": operator.ge,
}


@dataclass(frozen=True)
class CostUnits:
    rows_scanned: int = 0
    rows_joined: int = 0

    @property
    def total(self) -> int:
        return self.rows_scanned + self.rows_joined

    def __add__(self, other: "CostUnits") -> "CostUnits":
        return CostUnits(self.rows_scanned + other.rows_scanned,
                         self.rows_joined + other.rows_joined)

    def to_json(self) -> dict:
        return {"rows_scanned": self.rows_scanned, "rows_joined": self.rows_joined,
                "total": self.total}


# ---------------------------------------------------------------------------
# Query plans (built by workload.plan, evaluated here)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanNode:
    table_id: int
    predicates: tuple[tuple[int, str, object], ...]  # (attr, op, literal)
    referenced: tuple[int, ...]  # query attrs hosted here (NULL-excluded)


@dataclass(frozen=True)
class JoinNode:
    left: "ScanNode | JoinNode"
    right: "ScanNode | JoinNode"
    kind: str  # "key" | "value"
    key_family: str | None = None
    left_attr: int | None = None
    right_attr: int | None = None


@dataclass(frozen=True)
class JoinPlan:
    root: "ScanNode | JoinNode"
    project: tuple[int, ...]

    def base_tables(self) -> list[ScanNode]:
        out = []

        def walk(node):
            if isinstance(node, ScanNode):
                out.append(node)
            else:
                walk(node.left)
                walk(node.right)

        walk(self.root)
        return out


# ---------------------------------------------------------------------------
# Table merging (the physical effect of a join action)
# ---------------------------------------------------------------------------

def _equivalence_pair(a: PhysicalTable, b: PhysicalTable, pool: ConstraintPool,
                      act: JoinAction) -> tuple[int, int]:
    if act.left in a.attrs and act.right in b.attrs and pool.equivalent(act.left, act.right):
        return act.left, act.right
    if act.right in a.attrs and act.left in b.attrs and pool.equivalent(act.left, act.right):
        return act.right, act.left
    for x in sorted(a.attrs):
        for y in sorted(b.attrs):
            if pool.equivalent(x, y):
                return x, y
    raise StateError("tables share no key family and no declared equivalence links them")


def _full_outer(a_rows, b_rows, a_key, b_key):
    """Full outer join pairing; keys of None match nothing. Yields
    (a_row | None, b_row | None) pairs in deterministic order."""
    index: dict[object, list[int]] = {}
    for j, rb in enumerate(b_rows):
        k = b_key(rb)
        if k is not None:
            index.setdefault(k, []).append(j)
    matched: set[int] = set()
    pairs = []
    for ra in a_rows:
        k = a_key(ra)
        hits = index.get(k, []) if k is not None else []
        if hits:
            for j in hits:
                pairs.append((ra, b_rows[j]))
                matched.add(j)
        else:
            pairs.append((ra, None))
    for j, rb in enumerate(b_rows):
        if j not in matched:
            pairs.append((None, rb))
    return pairs


def merge_tables(a: PhysicalTable, b: PhysicalTable, pool: ConstraintPool,
                 act: JoinAction) -> PhysicalTable:
    """Full outer join of two tables.

    Tables sharing a key family join on that key column (shared key columns
    are coalesced); otherwise they join on equality of a declared-equivalent
    attribute pair and both attribute columns are kept.
    """
    shared = [f for f in a.key_cols if f in b.key_cols]
    key_cols = a.key_cols + tuple(f for f in b.key_cols if f not in a.key_cols)
    attrs = a.attrs + b.attrs

    if shared:
        family = shared[0]
        a_slot, b_slot = a.key_slot(family), b.key_slot(family)
        pairs = _full_outer(a.rows, b.rows,
                            lambda r: r[a_slot], lambda r: r[b_slot])
    else:
        x, y = _equivalence_pair(a, b, pool, act)
        x_slot, y_slot = a.attr_slot(x), b.attr_slot(y)
        pairs = _full_outer(a.rows, b.rows,
                            lambda r: r[x_slot], lambda r: r[y_slot])

    b_key_pos = {f: b.key_slot(f) for f in b.key_cols}
    rows: list[Row] = []
    for ra, rb in pairs:
        out = []
        for pos, f in enumerate(key_cols):
            va = ra[a.key_slot(f)] if ra is not None and f in a.key_cols else None
            vb = rb[b_key_pos[f]] if rb is not None and f in b.key_cols else None
            out.append(va if va is not None else vb)
        for attr in a.attrs:
            out.append(ra[a.attr_slot(attr)] if ra is not None else None)
        for attr in b.attrs:
            out.append(rb[b.attr_slot(attr)] if rb is not None else None)
        rows.append(tuple(out))

    return PhysicalTable(id=min(a.id, b.id), attrs=attrs, key_cols=key_cols,
                         rows=canonical_rows(rows))


# ---------------------------------------------------------------------------
# Plan execution
# ---------------------------------------------------------------------------

Column = tuple[str, object]  # ("key", family) or ("attr", attr_id)


class _Counters:
    __slots__ = ("scanned", "joined")

    def __init__(self):
        self.scanned = 0
        self.joined = 0


def _eval_scan(node: ScanNode, state: SchemaState, counters: _Counters):
    try:
        table = state.table(node.table_id)
    except KeyError:
        raise StateError(f"plan references table {node.table_id} absent from this state") from None
    counters.scanned += len(table.rows)
    columns: list[Column] = [("key", f) for f in table.key_cols] + \
                            [("attr", a) for a in table.attrs]
    ref_slots = [table.attr_slot(a) for a in node.referenced]
    pred_slots = [(table.attr_slot(attr), OPS[op], literal)
                  for attr, op, literal in node.predicates]
    rows = []
    for row in table.rows:
        if any(row[s] is None for s in ref_slots):
            continue
        ok = True
        for slot, fn, literal in pred_slots:
            v = row[slot]
            if v is None or not fn(v, literal):
                ok = False
                break
        if ok:
            rows.append(row)
    return columns, rows


def _eval_join(node: JoinNode, state: SchemaState, counters: _Counters):
    lcols, lrows = _eval_node(node.left, state, counters)
    rcols, rrows = _eval_node(node.right, state, counters)
    if node.kind == "key":
        l_slot = lcols.index(("key", node.key_family))
        r_slot = rcols.index(("key", node.key_family))
    else:
        l_slot = lcols.index(("attr", node.left_attr))
        r_slot = rcols.index(("attr", node.right_attr))
    index: dict[object, list[Row]] = {}
    for row in rrows:
        k = row[r_slot]
        if k is not None:
            index.setdefault(k, []).append(row)
    out = []
    for row in lrows:
        k = row[l_slot]
        if k is None:
            continue
        for rrow in index.get(k, ()):
            out.append(row + rrow)
    counters.joined += len(out)
    return lcols + rcols, out


def _eval_node(node, state, counters):
    if isinstance(node, ScanNode):
        return _eval_scan(node, state, counters)
    return _eval_join(node, state, counters)


def execute(plan: JoinPlan, state: SchemaState) -> tuple[list[tuple], CostUnits]:
    """Evaluate a plan bottom-up with hash joins.

    Returns the deduplicated, sorted projection rows and the cost counters:
    rows_scanned sums base-table cardinalities (pre-filter), rows_joined sums
    every join operator's output cardinality.
    """
    counters = _Counters()
    columns, rows = _eval_node(plan.root, state, counters)
    slots = [columns.index(("attr", a)) for a in plan.project]
    result = sorted({tuple(row[s] for s in slots) for row in rows})
    return result, CostUnits(counters.scanned, counters.joined)


# ---------------------------------------------------------------------------
# Storage accounting
# ---------------------------------------------------------------------------

def _column_width(values: list) -> int:
    observed = [v for v in values if v is not None]
    if not observed:
        return 0
    if all(isinstance(v, (int, float)) for v in observed):
        return 8
    return max(len(str(v).encode("utf-8")) for v in observed)


def table_storage(table: PhysicalTable) -> int:
    """64 header bytes + rows x (sum of column widths + null bitmap bytes)."""
    if not table.rows:
        return 64
    ncols = table.width
    width_sum = sum(_column_width([row[i] for row in table.rows]) for i in range(ncols))
    bitmap = math.ceil(ncols / 8)
    return 64 + len(table.rows) * (width_sum + bitmap)


def storage(state: SchemaState) -> int:
    """Total bytes of the state under the fixed-width + null-bitmap model."""
    return sum(table_storage(t) for t in state.tables)
