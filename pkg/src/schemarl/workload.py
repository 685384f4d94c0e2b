"""Query workload: parsing, per-state planning and cost aggregation.

Queries are conjunctive: a projection list plus comparison predicates. The
planner locates the host table of every referenced attribute and connects
hosts greedily along key-family or declared-equivalence edges, always taking
the pair with the smallest estimated output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

from .catalog import Catalog, Scalar
from .engine import CostUnits, JoinNode, JoinPlan, ScanNode, execute, storage
from .errors import UnanswerableQueryError, WorkloadError
from .schema import ConstraintPool, SchemaState

OP_NAMES = ("=", "<", ">", "<=", ">=", "!=")


class Predicate(NamedTuple):
    attr: int
    op: str
    literal: Scalar


@dataclass(frozen=True)
class Query:
    name: str
    project: tuple[int, ...]
    predicates: tuple[Predicate, ...] = ()
    weight: int | float = 1

    @property
    def referenced(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.project) | {p.attr for p in self.predicates}))


@dataclass(frozen=True)
class Workload:
    queries: tuple[Query, ...]

    def __post_init__(self):
        if not self.queries:
            raise WorkloadError("workload must contain at least one query")


def _check_literal(kind: str, literal: Scalar, qname: str, attr: int) -> Scalar:
    if kind == "INTEGER":
        if isinstance(literal, bool) or not isinstance(literal, int):
            raise WorkloadError(f"query {qname!r}: attribute {attr} is INTEGER but literal "
                                f"{literal!r} is not an integer")
        return literal
    if kind == "FLOAT":
        if isinstance(literal, bool) or not isinstance(literal, (int, float)):
            raise WorkloadError(f"query {qname!r}: attribute {attr} is FLOAT but literal "
                                f"{literal!r} is not numeric")
        return float(literal)
    if not isinstance(literal, str):
        raise WorkloadError(f"query {qname!r}: attribute {attr} is TEXT but literal "
                            f"{literal!r} is not a string")
    return literal


def connectable(pool: ConstraintPool, catalog: Catalog, attrs: list[int]) -> bool:
    """Whether the attributes can in principle be joined into one table:
    connected under shared key families plus declared equivalences."""
    if len(attrs) <= 1:
        return True
    parents: dict[object, object] = {}

    def find(x):
        parents.setdefault(x, x)
        while parents[x] != x:
            parents[x] = parents[parents[x]]
            x = parents[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parents[rx] = ry

    for e in catalog.entries:
        union(("attr", e.attr), ("family", e.entity_label))
    for a, b in pool.declared:
        union(("attr", a), ("attr", b))
    roots = {find(("attr", a)) for a in attrs}
    return len(roots) == 1


def parse_workload(text: str, catalog: Catalog, pool: ConstraintPool | None = None) -> Workload:
    """Parse and validate the workload JSON document.

    When a constraint pool is supplied, every query's attributes must be
    connectable under it (otherwise no schema state could ever answer it).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WorkloadError(f"malformed workload JSON: {exc.msg} (line {exc.lineno})") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("queries"), list):
        raise WorkloadError("workload document must be an object with a 'queries' list")

    queries = []
    for i, raw in enumerate(doc["queries"]):
        name = raw.get("name", f"q{i}")
        project = raw.get("project")
        if not project:
            raise WorkloadError(f"query {name!r}: empty projection")
        for attr in project:
            if not isinstance(attr, int) or not 0 <= attr < len(catalog):
                raise WorkloadError(f"query {name!r}: unknown attribute id {attr}")
        predicates = []
        for item in raw.get("where", []):
            if not isinstance(item, list) or len(item) != 3:
                raise WorkloadError(f"query {name!r}: predicates must be [attr, op, literal] triples")
            attr, op, literal = item
            if not isinstance(attr, int) or not 0 <= attr < len(catalog):
                raise WorkloadError(f"query {name!r}: unknown attribute id {attr}")
            if op not in OP_NAMES:
                raise WorkloadError(f"query {name!r}: unknown operator {op!r}")
            literal = _check_literal(catalog.kind_of(attr), literal, name, attr)
            predicates.append(Predicate(attr, op, literal))
        weight = raw.get("weight", 1)
        if isinstance(weight, bool) or not isinstance(weight, (int, float)) or weight <= 0:
            raise WorkloadError(f"query {name!r}: weight must be a positive number")
        query = Query(name=name, project=tuple(project),
                      predicates=tuple(predicates), weight=weight)
        if pool is not None and not connectable(pool, catalog, list(query.referenced)):
            raise WorkloadError(f"query {name!r}: referenced attributes {list(query.referenced)} "
                                "are not connectable under the constraint pool")
        queries.append(query)
    return Workload(queries=tuple(queries))


# ---------------------------------------------------------------------------
# Planning
# ---------------------------------------------------------------------------

class _Component(NamedTuple):
    min_table: int
    node: object  # ScanNode | JoinNode
    card: int
    families: frozenset[str]
    attrs: frozenset[int]


def _edge_between(a: _Component, b: _Component, pool: ConstraintPool):
    """Cheapest edge between two components, or None.

    Key-family joins estimate min(card) and are preferred; value joins
    estimate the cardinality product.
    """
    shared = sorted(a.families & b.families)
    if shared:
        return (min(a.card, b.card), 0, ("key", shared[0]))
    for x in sorted(a.attrs):
        for y in sorted(b.attrs):
            if pool.equivalent(x, y):
                return (a.card * b.card, 1, ("value", x, y))
    return None


def plan(q: Query, state: SchemaState, pool: ConstraintPool) -> JoinPlan:
    """Build a join plan for the query against this state.

    Single-host queries become a bare scan; otherwise host tables are joined
    greedily, smallest estimated output first, along key-family or
    equivalence edges. Predicates are pushed down to base scans.
    """
    referenced = q.referenced
    hosts: dict[int, list[int]] = {}
    for attr in referenced:
        if attr not in state.attr_location:
            raise StateMismatch(f"query {q.name!r} references attribute {attr} "
                                "absent from the state")
        hosts.setdefault(state.attr_location[attr], []).append(attr)

    components: list[_Component] = []
    for table_id in sorted(hosts):
        table = state.table(table_id)
        preds = tuple(p for p in q.predicates if p.attr in table.attrs)
        refs = tuple(a for a in referenced if a in table.attrs)
        node = ScanNode(table_id=table_id, predicates=preds, referenced=refs)
        components.append(_Component(min_table=table_id, node=node,
                                     card=len(table.rows),
                                     families=frozenset(table.key_cols),
                                     attrs=frozenset(table.attrs)))

    while len(components) > 1:
        best = None
        for i in range(len(components)):
            for j in range(i + 1, len(components)):
                a, b = components[i], components[j]
                if a.min_table > b.min_table:
                    a, b = b, a
                edge = _edge_between(a, b, pool)
                if edge is None:
                    continue
                est, rank, detail = edge
                cand = (est, rank, a.min_table, b.min_table, detail, a, b)
                if best is None or cand[:4] < best[:4]:
                    best = cand
        if best is None:
            groups = sorted(sorted(c.attrs & set(referenced)) for c in components)
            raise UnanswerableQueryError(
                q.name, f"query {q.name!r}: attribute groups {groups} cannot be "
                        "connected in this state under the constraint pool")
        est, rank, detail, a, b = best[0], best[1], best[4], best[5], best[6]
        if detail[0] == "key":
            node = JoinNode(left=a.node, right=b.node, kind="key", key_family=detail[1])
        else:
            node = JoinNode(left=a.node, right=b.node, kind="value",
                            left_attr=detail[1], right_attr=detail[2])
        merged = _Component(min_table=min(a.min_table, b.min_table), node=node,
                            card=max(est, 0), families=a.families | b.families,
                            attrs=a.attrs | b.attrs)
        components = [c for c in components if c not in (a, b)] + [merged]

    return JoinPlan(root=components[0].node, project=q.project)


class StateMismatch(WorkloadError):
    """A plan or query references attributes outside the given state."""


# ---------------------------------------------------------------------------
# Workload costing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QueryCost:
    name: str
    cost: CostUnits | None  # None when the query is unanswerable
    weight: int | float
    charged: int | float

    @property
    def answerable(self) -> bool:
        return self.cost is not None

    def to_json(self) -> dict:
        return {"name": self.name, "weight": self.weight, "charged": self.charged,
                "answerable": self.answerable,
                "cost": self.cost.to_json() if self.cost else None}


@dataclass(frozen=True)
class CostReport:
    per_query: tuple[QueryCost, ...]
    total: int | float
    storage: int

    def to_json(self) -> dict:
        return {"total": self.total, "storage": self.storage,
                "queries": [qc.to_json() for qc in self.per_query]}


def workload_cost(w: Workload, state: SchemaState, pool: ConstraintPool,
                  unanswerable_penalty: int | float | None = None) -> CostReport:
    """Cost every query against the state and aggregate the weighted total.

    Unanswerable queries are charged the penalty constant; with no penalty
    given they raise instead.
    """
    per_query = []
    total: int | float = 0
    for q in w.queries:
        try:
            p = plan(q, state, pool)
            _, cost = execute(p, state)
            charged = q.weight * cost.total
            per_query.append(QueryCost(q.name, cost, q.weight, charged))
        except UnanswerableQueryError:
            if unanswerable_penalty is None:
                raise
            charged = q.weight * unanswerable_penalty
            per_query.append(QueryCost(q.name, None, q.weight, charged))
        total += charged
    return CostReport(per_query=tuple(per_query), total=total, storage=storage(state))
