"""The evolving relational schema as a partition of attributes into physical
tables, plus the user-declared joinability constraints that gate join actions.

A state is immutable; applying a join returns a new state. Joinability between
two tables holds when they share a surrogate-key family or when a declared
value equivalence links an attribute of one to an attribute of the other.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .catalog import Catalog, EntityFact
from .errors import ConstraintError, InvalidActionError
from .shred import BinaryTable

Row = tuple  # one slot per key column, then one per attribute; slots may be None


class JoinAction(NamedTuple):
    left: int
    right: int


class _UnionFind:
    def __init__(self):
        self.parent: dict[int, int] = {}

    def find(self, x: int) -> int:
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            # Smaller id wins the root: keeps class representatives stable.
            if rx > ry:
                rx, ry = ry, rx
            self.parent[ry] = rx


_NUMERIC = {"INTEGER", "FLOAT"}


def _kinds_compatible(a: str, b: str) -> bool:
    return a == b or (a in _NUMERIC and b in _NUMERIC)


@dataclass
class ConstraintPool:
    """Declared attribute equivalences closed under union-find."""

    declared: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        self._uf = _UnionFind()
        for a, b in self.declared:
            self._uf.union(a, b)

    def add(self, a: int, b: int, catalog: Catalog) -> None:
        if a == b:
            raise ConstraintError(f"attribute {a} declared equal to itself")
        ka, kb = catalog.kind_of(a), catalog.kind_of(b)
        if not _kinds_compatible(ka, kb):
            raise ConstraintError(f"attributes {a} ({ka}) and {b} ({kb}) have incompatible value kinds")
        self.declared = self.declared + ((a, b),)
        self._uf.union(a, b)

    def equivalent(self, a: int, b: int) -> bool:
        if a == b:
            return True
        if a not in self._uf.parent or b not in self._uf.parent:
            return False
        return self._uf.find(a) == self._uf.find(b)

    def classes(self) -> list[list[int]]:
        """Non-singleton equivalence classes, each sorted, in sorted order."""
        groups: dict[int, list[int]] = {}
        for member in self._uf.parent:
            groups.setdefault(self._uf.find(member), []).append(member)
        return sorted(sorted(g) for g in groups.values() if len(g) > 1)


def parse_constraints(text: str, catalog: Catalog) -> ConstraintPool:
    """Parse `<id> = <id>` lines (with `#` comments) into a constraint pool."""
    pool = ConstraintPool()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        parts = stripped.split("=")
        if len(parts) != 2:
            raise ConstraintError(f"line {lineno}: expected '<id> = <id>', got {line!r}")
        try:
            a, b = int(parts[0].strip()), int(parts[1].strip())
        except ValueError:
            raise ConstraintError(f"line {lineno}: attribute ids must be integers") from None
        for attr in (a, b):
            if not 0 <= attr < len(catalog):
                raise ConstraintError(f"line {lineno}: unknown attribute id {attr}")
        if a == b:
            raise ConstraintError(f"line {lineno}: attribute {a} declared equal to itself")
        try:
            pool.add(a, b, catalog)
        except ConstraintError as exc:
            raise ConstraintError(f"line {lineno}: {exc}") from None
    return pool


@dataclass(frozen=True)
class PhysicalTable:
    id: int
    attrs: tuple[int, ...]
    key_cols: tuple[str, ...]
    rows: tuple[Row, ...]

    @property
    def width(self) -> int:
        return len(self.key_cols) + len(self.attrs)

    def key_slot(self, family: str) -> int:
        return self.key_cols.index(family)

    def attr_slot(self, attr: int) -> int:
        return len(self.key_cols) + self.attrs.index(attr)


def canonical_rows(rows: list[Row]) -> tuple[Row, ...]:
    """Deterministic row order; None sorts after values within each slot."""
    return tuple(sorted(rows, key=lambda row: tuple((v is None, v if v is not None else "") for v in row)))


@dataclass(frozen=True)
class SchemaState:
    tables: tuple[PhysicalTable, ...]
    attr_location: dict[int, int]

    def table(self, table_id: int) -> PhysicalTable:
        for t in self.tables:
            if t.id == table_id:
                return t
        raise KeyError(f"no table with id {table_id}")

    def host_of(self, attr: int) -> PhysicalTable:
        return self.table(self.attr_location[attr])


def init_state(tables: list[BinaryTable]) -> SchemaState:
    """One single-attribute physical table per binary table."""
    physical = tuple(
        PhysicalTable(id=t.attr, attrs=(t.attr,), key_cols=(t.key_family,),
                      rows=canonical_rows([(key, value) for key, value in t.rows]))
        for t in tables
    )
    return SchemaState(tables=physical,
                       attr_location={t.attr: t.attr for t in tables})


def _tables_joinable(pool: ConstraintPool, a: PhysicalTable, b: PhysicalTable) -> bool:
    if set(a.key_cols) & set(b.key_cols):
        return True
    return any(pool.equivalent(x, y) for x in a.attrs for y in b.attrs)


def joinable(pool: ConstraintPool, state: SchemaState, a: int, b: int) -> bool:
    """True when attributes a and b live in different tables that can join."""
    if a == b:
        return False
    ta, tb = state.attr_location.get(a), state.attr_location.get(b)
    if ta is None or tb is None or ta == tb:
        return False
    return _tables_joinable(pool, state.table(ta), state.table(tb))


def valid_actions(pool: ConstraintPool, state: SchemaState) -> list[JoinAction]:
    """All joinable attribute pairs (a, b) with a < b, in ascending order."""
    attrs = sorted(state.attr_location)
    # Joinability is a table-level property; decide once per table pair.
    table_ok: dict[tuple[int, int], bool] = {}
    actions = []
    for i, a in enumerate(attrs):
        for b in attrs[i + 1:]:
            ta, tb = state.attr_location[a], state.attr_location[b]
            if ta == tb:
                continue
            key = (ta, tb) if ta < tb else (tb, ta)
            if key not in table_ok:
                table_ok[key] = _tables_joinable(pool, state.table(ta), state.table(tb))
            if table_ok[key]:
                actions.append(JoinAction(a, b))
    return actions


def apply_join(pool: ConstraintPool, state: SchemaState, act: JoinAction) -> SchemaState:
    """Merge the two tables hosting the action's attributes; other tables are
    untouched and the input state is not mutated."""
    if not joinable(pool, state, act.left, act.right):
        raise InvalidActionError(f"action {tuple(act)} is not valid in this state")
    from .engine import merge_tables  # deferred: engine owns merge semantics

    ta = state.host_of(act.left)
    tb = state.host_of(act.right)
    merged = merge_tables(ta, tb, pool, act)
    tables = tuple(t for t in state.tables if t.id not in (ta.id, tb.id)) + (merged,)
    location = dict(state.attr_location)
    for attr in merged.attrs:
        location[attr] = merged.id
    return SchemaState(tables=tables, attr_location=location)


def signature(state: SchemaState) -> str:
    """Canonical text for the attribute partition, e.g. `{0,3}|{1}|{2,5}`."""
    groups = sorted(tuple(sorted(t.attrs)) for t in state.tables)
    return "|".join("{" + ",".join(str(a) for a in g) + "}" for g in groups)


def parse_signature(text: str) -> list[list[int]]:
    """Inverse of `signature`; also accepts the bare `0,3|1|2` group syntax."""
    groups = []
    for chunk in text.split("|"):
        chunk = chunk.strip().removeprefix("{").removesuffix("}")
        if not chunk:
            raise ValueError(f"empty attribute group in {text!r}")
        groups.append(sorted(int(part.strip()) for part in chunk.split(",")))
    return groups


def state_facts(state: SchemaState, catalog: Catalog) -> set[EntityFact]:
    """Recover the fact set stored in a state: for every attribute, the
    non-NULL (key-of-its-family, value) pairs."""
    facts: set[EntityFact] = set()
    for table in state.tables:
        for attr in table.attrs:
            family = catalog.family_of(attr)
            k_slot = table.key_slot(family)
            a_slot = table.attr_slot(attr)
            for row in table.rows:
                key, value = row[k_slot], row[a_slot]
                if key is not None and value is not None:
                    facts.add(EntityFact(key, attr, value))
    return facts
