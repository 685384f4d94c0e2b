"""Decompose the fact stream into one two-column (key, value) table per
attribute: the initial, fully decomposed relational schema."""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

from .catalog import Catalog, EntityFact, Scalar
from .errors import StateError


@dataclass(frozen=True)
class BinaryTable:
    """A single-attribute table; rows are deduplicated and canonically sorted."""

    attr: int
    key_family: str
    rows: tuple[tuple[str, Scalar], ...]


def shred(catalog: Catalog, facts: list[EntityFact]) -> list[BinaryTable]:
    """Group facts by attribute into binary tables, in attribute-id order.

    Duplicate (entity, value) pairs collapse; multi-valued attributes keep
    one row per distinct value.
    """
    buckets: dict[int, set[tuple[str, Scalar]]] = {e.attr: set() for e in catalog.entries}
    for fact in facts:
        if fact.attr not in buckets:
            raise StateError(f"fact references attribute {fact.attr} absent from the catalog")
        buckets[fact.attr].add((fact.entity_key, fact.value))
    return [
        BinaryTable(attr=entry.attr, key_family=entry.entity_label,
                    rows=tuple(sorted(buckets[entry.attr])))
        for entry in catalog.entries
    ]


def reconstruct(tables: list[BinaryTable]) -> list[EntityFact]:
    """Flatten binary tables back to a fact list (the dedup of shred's input)."""
    return [EntityFact(key, table.attr, value)
            for table in tables for key, value in table.rows]


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", name).strip("_") or "attr"


def dump_tables(tables: list[BinaryTable], catalog: Catalog, out_dir: str | Path) -> list[Path]:
    """Write one `t<attr>_<name>.csv` per table with `key,value` columns."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for table in tables:
        entry = catalog.entry(table.attr)
        path = out_dir / f"t{table.attr}_{_safe_name(entry.name)}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["key", "value"])
            for key, value in table.rows:
                writer.writerow([key, value])
        written.append(path)
    return written
