"""Multi-model ingestion: JSON documents, RDF N-Triples and relational CSV
are parsed into a single stream of (entity, attribute, value) facts with a
globally numbered attribute catalog.

Attribute identity is the pair (entity_label, name); numbering is dense and
deterministic: sources in manifest order, names in first-appearance order
within each source.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, NamedTuple

from .errors import IngestError, ParseError

MODELS = ("JSON", "RDF", "RELATIONAL")
VALUE_KINDS = ("TEXT", "INTEGER", "FLOAT")

Scalar = str | int | float


class SourceFact(NamedTuple):
    """A raw fact as read from one source, before attribute numbering."""

    entity_key: str
    name: str
    value: Scalar


class EntityFact(NamedTuple):
    """A fact with its attribute resolved to a catalog id and a coerced value."""

    entity_key: str
    attr: int
    value: Scalar


@dataclass(frozen=True)
class Source:
    path: str
    model: str
    entity_label: str
    key_field: str = "id"


@dataclass(frozen=True)
class SourceManifest:
    sources: tuple[Source, ...]

    def __post_init__(self):
        if not self.sources:
            raise IngestError("manifest must declare at least one source")
        labels = [s.entity_label for s in self.sources]
        if len(set(labels)) != len(labels):
            raise IngestError(f"duplicate entity labels in manifest: {labels}")
        for s in self.sources:
            if s.model not in MODELS:
                raise IngestError(f"unknown model tag {s.model!r} (expected one of {MODELS})")

    @classmethod
    def from_json(cls, doc: dict, base_dir: str | Path | None = None) -> "SourceManifest":
        if not isinstance(doc, dict) or "sources" not in doc:
            raise IngestError("manifest document must be an object with a 'sources' list")
        sources = []
        for raw in doc["sources"]:
            try:
                path = raw["path"]
                model = raw["model"]
                label = raw["entity_label"]
            except (KeyError, TypeError) as exc:
                raise IngestError(f"manifest source missing field: {exc}") from exc
            if base_dir is not None and not Path(path).is_absolute():
                path = str(Path(base_dir) / path)
            sources.append(Source(path=path, model=model, entity_label=label,
                                  key_field=raw.get("key_field", "id")))
        return cls(sources=tuple(sources))

    @classmethod
    def from_file(cls, path: str | Path) -> "SourceManifest":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed manifest JSON: {exc.msg}",
                             path=str(path), line=exc.lineno, offset=exc.colno) from exc
        return cls.from_json(doc, base_dir=path.parent)

    def to_json(self) -> dict:
        return {"sources": [{"path": s.path, "model": s.model,
                             "entity_label": s.entity_label, "key_field": s.key_field}
                            for s in self.sources]}


@dataclass(frozen=True)
class CatalogEntry:
    attr: int
    name: str
    source_model: str
    entity_label: str
    value_kind: str


@dataclass(frozen=True)
class Catalog:
    """Dense, deterministic numbering of every distinct attribute."""

    entries: tuple[CatalogEntry, ...]

    def __post_init__(self):
        for i, e in enumerate(self.entries):
            if e.attr != i:
                raise IngestError(f"catalog numbering has a gap at {i} (found {e.attr})")

    def __len__(self) -> int:
        return len(self.entries)

    def entry(self, attr: int) -> CatalogEntry:
        if not 0 <= attr < len(self.entries):
            raise KeyError(f"unknown attribute id {attr}")
        return self.entries[attr]

    def family_of(self, attr: int) -> str:
        return self.entry(attr).entity_label

    def kind_of(self, attr: int) -> str:
        return self.entry(attr).value_kind

    def id_for(self, entity_label: str, name: str) -> int:
        for e in self.entries:
            if e.entity_label == entity_label and e.name == name:
                return e.attr
        raise KeyError(f"no attribute named {name!r} under entity {entity_label!r}")

    def to_json(self) -> dict:
        return {"attributes": [{"id": e.attr, "name": e.name, "model": e.source_model,
                                "entity": e.entity_label, "kind": e.value_kind}
                               for e in self.entries]}

    @classmethod
    def from_json(cls, doc: dict) -> "Catalog":
        entries = tuple(CatalogEntry(attr=a["id"], name=a["name"], source_model=a["model"],
                                     entity_label=a["entity"], value_kind=a["kind"])
                        for a in doc["attributes"])
        return cls(entries=entries)


# ---------------------------------------------------------------------------
# JSON ingestion
# ---------------------------------------------------------------------------

def _coerce_key(value: Any, where: str) -> str:
    if isinstance(value, str):
        if not value:
            raise IngestError(f"{where}: entity key is empty")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise IngestError(f"{where}: entity key must be a string or number, got {type(value).__name__}")
    return str(value)


def _flatten_object(obj: dict, prefix: str, out: list[tuple[str, Scalar]], where: str) -> None:
    for key, value in obj.items():
        name = f"{prefix}.{key}" if prefix else key
        if isinstance(value, dict):
            _flatten_object(value, name, out, where)
        elif isinstance(value, list):
            for elem in value:
                if isinstance(elem, (dict, list)):
                    raise IngestError(f"{where}: array under {name!r} contains non-scalar elements "
                                      "(arrays of objects are not supported)")
                if elem is None:
                    continue
                out.append((name, elem))
        elif value is None:
            continue
        else:
            out.append((name, value))


def ingest_json(path: str | Path, entity_label: str, key_field: str = "id") -> list[SourceFact]:
    """Parse a JSON array of objects or newline-delimited objects into facts.

    Nested objects are flattened with dot-joined names; arrays of scalars
    yield one fact per element; null leaves yield no fact.
    """
    path = Path(path)
    text = path.read_text()
    objects: list[dict]
    try:
        doc = json.loads(text)
        if isinstance(doc, list):
            objects = []
            for i, elem in enumerate(doc):
                if not isinstance(elem, dict):
                    raise IngestError(f"{path}: array element {i} is not an object")
                objects.append(elem)
        elif isinstance(doc, dict):
            objects = [doc]
        else:
            raise IngestError(f"{path}: top-level JSON must be an array of objects or "
                              "newline-delimited objects")
    except json.JSONDecodeError:
        # Newline-delimited mode: one object per non-blank line.
        objects = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"malformed JSON: {exc.msg}", path=str(path),
                                 line=lineno, offset=exc.colno) from exc
            if not isinstance(obj, dict):
                raise IngestError(f"{path}:{lineno}: line is not a JSON object")
            objects.append(obj)

    facts: list[SourceFact] = []
    for index, obj in enumerate(objects):
        if key_field not in obj:
            raise IngestError(f"{path}: object {index} is missing key field {key_field!r}")
        entity_key = _coerce_key(obj[key_field], f"{path}: object {index}")
        leaves: list[tuple[str, Scalar]] = []
        _flatten_object(obj, "", leaves, f"{path}: object {index}")
        for name, value in leaves:
            facts.append(SourceFact(entity_key, name, value))
    return facts


# ---------------------------------------------------------------------------
# RDF N-Triples ingestion
# ---------------------------------------------------------------------------

_TRIPLE_RE = re.compile(
    r'^<([^<>"]*)>\s+<([^<>"]*)>\s+'
    r'(?:<([^<>"]*)>|"((?:[^"\\]|\\.)*)")\s*\.\s*$'
)

_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t", "r": "\r", "b": "\b", "f": "\f"}


def _unescape_literal(raw: str) -> str:
    out = []
    i = 0
    while i < len(raw):
        ch = raw[i]
        if ch == "\\" and i + 1 < len(raw):
            nxt = raw[i + 1]
            if nxt in _ESCAPES:
                out.append(_ESCAPES[nxt])
                i += 2
                continue
            if nxt == "u" and i + 6 <= len(raw):
                out.append(chr(int(raw[i + 2:i + 6], 16)))
                i += 6
                continue
        out.append(ch)
        i += 1
    return "".join(out)


def _local_name(iri: str) -> str:
    cut = max(iri.rfind("/"), iri.rfind("#"), iri.rfind(":"))
    local = iri[cut + 1:]
    return local if local else iri


def ingest_rdf(path: str | Path, entity_label: str) -> list[SourceFact]:
    """Parse N-Triples into facts: subject is the entity key, the predicate's
    local name is the attribute, the object (literal or IRI) is the value."""
    path = Path(path)
    facts: list[SourceFact] = []
    # Predicates sharing a local name across namespaces get numeric suffixes.
    name_by_iri: dict[str, str] = {}
    local_counts: dict[str, int] = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _TRIPLE_RE.match(stripped)
        if not m:
            raise ParseError("line does not match the N-Triples grammar "
                             "'<subject> <predicate> object .'", path=str(path), line=lineno)
        subject, predicate, obj_iri, obj_literal = m.groups()
        if not subject:
            raise ParseError("empty subject IRI", path=str(path), line=lineno)
        if predicate not in name_by_iri:
            local = _local_name(predicate)
            count = local_counts.get(local, 0) + 1
            local_counts[local] = count
            name_by_iri[predicate] = local if count == 1 else f"{local}_{count}"
        value: Scalar = obj_iri if obj_iri is not None else _unescape_literal(obj_literal)
        facts.append(SourceFact(subject, name_by_iri[predicate], value))
    return facts


# ---------------------------------------------------------------------------
# Relational CSV ingestion
# ---------------------------------------------------------------------------

def ingest_relational(path: str | Path, entity_label: str) -> list[SourceFact]:
    """Parse a headered CSV; the first column is the entity key, every other
    non-empty cell becomes one fact."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty CSV file", path=str(path), line=1) from None
        if len(set(header)) != len(header):
            raise IngestError(f"{path}: duplicate header names: {header}")
        if len(header) < 2:
            raise IngestError(f"{path}: need a key column and at least one value column")
        facts: list[SourceFact] = []
        for rownum, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(f"row has {len(row)} cells, header has {len(header)}",
                                 path=str(path), line=rownum)
            key = row[0]
            if not key:
                raise IngestError(f"{path}: row {rownum} has an empty entity key")
            for name, cell in zip(header[1:], row[1:]):
                if cell == "":
                    continue
                facts.append(SourceFact(key, name, cell))
    return facts


# ---------------------------------------------------------------------------
# Catalog assembly
# ---------------------------------------------------------------------------

_INT_RE = re.compile(r"^[+-]?\d+$")


def _parses_int(value: Scalar) -> bool:
    if isinstance(value, bool):
        return False
    if isinstance(value, int):
        return True
    if isinstance(value, str):
        return bool(_INT_RE.match(value.strip()))
    return False


def _parses_float(value: Scalar) -> bool:
    if isinstance(value, bool):
        return False
    if isinstance(value, (int, float)):
        return True
    if isinstance(value, str):
        lowered = value.strip().lower().lstrip("+-")
        if lowered in ("inf", "infinity", "nan"):
            return False
        try:
            float(value)
            return True
        except ValueError:
            return False
    return False


def _sniff_kind(values: list[Scalar]) -> str:
    if all(_parses_int(v) for v in values):
        return "INTEGER"
    if all(_parses_float(v) for v in values):
        return "FLOAT"
    return "TEXT"


def _coerce(value: Scalar, kind: str) -> Scalar:
    if kind == "INTEGER":
        return int(str(value).strip()) if isinstance(value, str) else int(value)
    if kind == "FLOAT":
        return float(value)
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


_INGESTERS = {"JSON": ingest_json, "RDF": ingest_rdf, "RELATIONAL": ingest_relational}


def build_catalog(manifest: SourceManifest) -> tuple[Catalog, list[EntityFact]]:
    """Ingest every source and assign dense attribute ids.

    Ids follow manifest order then first-appearance order within each source;
    value kinds are sniffed over all observed values (two-pass) and every
    fact value is coerced to its attribute's kind.
    """
    per_source: list[tuple[Source, list[SourceFact]]] = []
    for source in manifest.sources:
        if source.model == "JSON":
            facts = ingest_json(source.path, source.entity_label, source.key_field)
        else:
            facts = _INGESTERS[source.model](source.path, source.entity_label)
        per_source.append((source, facts))

    ids: dict[tuple[str, str], int] = {}
    order: list[tuple[Source, str]] = []
    numbered: list[tuple[str, int, Scalar]] = []
    for source, facts in per_source:
        for fact in facts:
            key = (source.entity_label, fact.name)
            if key not in ids:
                ids[key] = len(ids)
                order.append((source, fact.name))
            numbered.append((fact.entity_key, ids[key], fact.value))

    if not numbered:
        raise IngestError("manifest produced an empty fact stream")

    values_by_attr: dict[int, list[Scalar]] = {i: [] for i in range(len(ids))}
    for _, attr, value in numbered:
        values_by_attr[attr].append(value)
    kinds = {attr: _sniff_kind(vals) for attr, vals in values_by_attr.items()}

    entries = tuple(
        CatalogEntry(attr=i, name=name, source_model=source.model,
                     entity_label=source.entity_label, value_kind=kinds[i])
        for i, (source, name) in enumerate(order)
    )
    catalog = Catalog(entries=entries)
    stream = [EntityFact(key, attr, _coerce(value, kinds[attr]))
              for key, attr, value in numbered]
    return catalog, stream
