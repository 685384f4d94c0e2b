"""Run-directory persistence and SQL DDL export.

A run directory is self-contained: the input copies make `whatif` and
`export-ddl` reproducible later, episodes.jsonl is append-only with one
complete JSON object per step, and result.json is written once at completion.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

from .catalog import Catalog, SourceManifest
from .learner import EpisodeRecord, LearnParams, RunResult
from .schema import parse_signature

SQL_TYPES = {"TEXT": "TEXT", "INTEGER": "BIGINT", "FLOAT": "DOUBLE PRECISION"}


def _dump(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def write_run_inputs(root: str | Path, manifest: SourceManifest, catalog: Catalog,
                     constraints_text: str, workload_text: str,
                     params: LearnParams) -> Path:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    (root / "manifest.json").write_text(_dump(manifest.to_json()))
    (root / "catalog.json").write_text(_dump(catalog.to_json()))
    (root / "constraints.txt").write_text(constraints_text)
    (root / "workload.json").write_text(workload_text)
    (root / "params.json").write_text(_dump(params.to_json()))
    return root


class EpisodeWriter:
    """Appends one JSON line per step, flushed per episode, so a killed run
    always leaves a readable prefix."""

    def __init__(self, root: str | Path):
        self.path = Path(root) / "episodes.jsonl"
        self._fh = open(self.path, "w")

    def append(self, record: EpisodeRecord) -> None:
        for i, step in enumerate(record.steps):
            line = json.dumps({
                "episode": record.episode, "step": i,
                "left": step.left, "right": step.right,
                "reward": step.reward, "cost": step.cost_after,
                "storage": step.storage_after, "signature": step.signature_after,
            }, sort_keys=True)
            self._fh.write(line + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


def write_result(root: str | Path, result: RunResult) -> Path:
    path = Path(root) / "result.json"
    path.write_text(_dump(result.to_json()))
    return path


def read_result(root: str | Path) -> dict:
    return json.loads((Path(root) / "result.json").read_text())


def _sql_ident(text: str) -> str:
    ident = re.sub(r"[^A-Za-z0-9]+", "_", text).strip("_")
    return ident or "col"


def ddl_for_signature(sig_text: str, catalog: Catalog) -> str:
    """CREATE TABLE statements for the attribute grouping named by a
    signature string; one table per group, keys first, attributes after."""
    groups = parse_signature(sig_text)
    statements = []
    for index, group in enumerate(sorted(tuple(sorted(g)) for g in groups)):
        families = sorted({catalog.family_of(a) for a in group})
        columns = [f"key_{_sql_ident(f)} TEXT" for f in families]
        for attr in group:
            entry = catalog.entry(attr)
            columns.append(f"a{attr}_{_sql_ident(entry.name)} {SQL_TYPES[entry.value_kind]}")
        body = ",\n  ".join(columns)
        statements.append(f"CREATE TABLE t{index} (\n  {body}\n);")
    return "\n\n".join(statements) + "\n"


def write_ddl(root: str | Path, sig_text: str, catalog: Catalog) -> Path:
    path = Path(root) / "ddl.sql"
    path.write_text(ddl_for_signature(sig_text, catalog))
    return path
