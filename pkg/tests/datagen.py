"""Deterministic synthetic dataset builders shared by the test suite.

Every builder writes real source files into a directory and returns the
manifest (plus constraint/workload text where relevant), so tests go through
the same parsing paths as production use.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from schemarl import SourceManifest

TITLE_POOL = ["Databases", "Learning", "Retrieval", "Graphs", "Security",
              "Systems", "Networks", "Compilers", "Queues", "Streams"]


def write_canonical_dataset(root: Path) -> dict:
    """The three-source dataset most tests run against.

    person (JSON): id, name, title, age        -> attrs 0..3
    pub    (RDF) : title, year, venue          -> attrs 4..6
    emp    (CSV) : org, city                   -> attrs 7..8

    One declared equivalence links person.title (2) to pub.title (4).
    The emp source stays an island (no cross constraint).
    """
    root.mkdir(parents=True, exist_ok=True)
    persons = []
    for i in range(1, 13):
        # p09..p12 reuse the first four titles so cross-model joins fan out.
        title = TITLE_POOL[(i - 1) % 8] if i <= 8 else TITLE_POOL[i - 9]
        persons.append({"id": f"p{i:02d}", "name": f"Person {i:02d}",
                        "title": title, "age": 19 + i})
    (root / "persons.json").write_text(json.dumps(persons, indent=1))

    lines = []
    for i in range(1, 11):
        subj = f"http://example.org/pub/b{i:02d}"
        title = TITLE_POOL[i - 1] if i <= 6 else f"Unmatched {i}"
        lines.append(f'<{subj}> <http://example.org/v/title> "{title}" .')
        lines.append(f"<{subj}> <http://example.org/v/year> \"{1999 + i}\" .")
        lines.append(f'<{subj}> <http://example.org/v/venue> "Venue {1 + (i % 3)}" .')
    (root / "pubs.nt").write_text("\n".join(lines) + "\n")

    rows = ["id,org,city"]
    for i in range(1, 9):
        city = f"City {i}" if i <= 6 else ""  # two empty cells
        rows.append(f"e{i},Org {1 + (i % 4)},{city}")
    (root / "employers.csv").write_text("\n".join(rows) + "\n")

    manifest = {"sources": [
        {"path": str(root / "persons.json"), "model": "JSON", "entity_label": "person"},
        {"path": str(root / "pubs.nt"), "model": "RDF", "entity_label": "pub"},
        {"path": str(root / "employers.csv"), "model": "RELATIONAL", "entity_label": "emp"},
    ]}
    (root / "manifest.json").write_text(json.dumps(manifest, indent=1))

    constraints = "# person.title joins pub.title\n2 = 4\n"
    (root / "constraints.txt").write_text(constraints)

    workload = {"queries": [
        {"name": "q_person_all", "project": [0, 1, 2, 3]},
        {"name": "q_pub_all", "project": [4, 5, 6]},
        {"name": "q_titles", "project": [2, 4]},
        {"name": "q_name_age", "project": [1, 3], "where": [[3, ">", 25]]},
        {"name": "q_emp", "project": [7, 8]},
        {"name": "q_name", "project": [1]},
    ]}
    (root / "workload.json").write_text(json.dumps(workload, indent=1))

    return {
        "manifest_path": root / "manifest.json",
        "manifest": manifest,
        "constraints": constraints,
        "workload": json.dumps(workload),
    }


def write_two_source_dataset(root: Path) -> dict:
    """person + pub only: the fully merged single table is reachable."""
    full = write_canonical_dataset(root)
    manifest = {"sources": full["manifest"]["sources"][:2]}
    (root / "manifest2.json").write_text(json.dumps(manifest, indent=1))
    workload = {"queries": [
        {"name": "q_person_all", "project": [0, 1, 2, 3]},
        {"name": "q_pub_all", "project": [4, 5, 6]},
        {"name": "q_titles", "project": [2, 4]},
    ]}
    return {
        "manifest_path": root / "manifest2.json",
        "manifest": manifest,
        "constraints": full["constraints"],
        "workload": json.dumps(workload),
    }


def write_instance(root: Path, n_attrs: int, seed: int) -> dict:
    """A small two-family instance for oracle-vs-learner checks.

    n_attrs in 4..6 total: a JSON source (id + fields) and an RDF source,
    one cross-model equivalence on a shared title domain, and a join-heavy
    workload touching every family plus the bridge pair.
    """
    assert 4 <= n_attrs <= 6
    rng = random.Random(seed)
    n_json = n_attrs // 2
    n_rdf = n_attrs - n_json

    root.mkdir(parents=True, exist_ok=True)
    persons = []
    for i in range(15):
        obj = {"id": f"p{i:02d}", "label": rng.choice(TITLE_POOL)}
        for f in range(n_json - 2):
            obj[f"f{f}"] = rng.randint(0, 9)
        persons.append(obj)
    (root / "left.json").write_text(json.dumps(persons))

    preds = ["label"] + [f"p{k}" for k in range(n_rdf - 1)]
    lines = []
    for i in range(12):
        subj = f"http://inst.example/s{i:02d}"
        lines.append(f'<{subj}> <http://inst.example/v/label> "{rng.choice(TITLE_POOL)}" .')
        for pred in preds[1:]:
            lines.append(f'<{subj}> <http://inst.example/v/{pred}> "{rng.randint(0, 99)}" .')
    (root / "right.nt").write_text("\n".join(lines) + "\n")

    manifest = {"sources": [
        {"path": str(root / "left.json"), "model": "JSON", "entity_label": "left"},
        {"path": str(root / "right.nt"), "model": "RDF", "entity_label": "right"},
    ]}
    (root / "manifest.json").write_text(json.dumps(manifest))

    # Attribute ids: JSON assigns id=0, label=1, f0=2, ... then RDF follows
    # first-appearance order of predicates starting at n_json.
    bridge_left = 1
    bridge_right = n_json
    constraints = f"{bridge_left} = {bridge_right}\n"
    (root / "constraints.txt").write_text(constraints)

    json_attrs = list(range(n_json))
    rdf_attrs = list(range(n_json, n_attrs))
    queries = [
        {"name": "q_left", "project": json_attrs},
        {"name": "q_right", "project": rdf_attrs},
        {"name": "q_bridge", "project": [bridge_left, bridge_right]},
    ]
    if len(json_attrs) >= 3:
        queries.append({"name": "q_left_pair", "project": json_attrs[:2]})
    workload = json.dumps({"queries": queries})
    (root / "workload.json").write_text(workload)

    return {
        "manifest_path": root / "manifest.json",
        "manifest": manifest,
        "constraints": constraints,
        "workload": workload,
    }


def write_wide_dataset(root: Path) -> dict:
    """3 sources / 12 attributes / roughly 5k facts, for shredding tests."""
    rng = random.Random(7)
    root.mkdir(parents=True, exist_ok=True)

    objects = []
    for i in range(600):
        objects.append({
            "id": f"j{i:04d}",
            "name": f"Item {i}",
            "addr": {"city": f"City {i % 37}"},
            "score": round(rng.uniform(0, 100), 2),
            "tags": [f"t{rng.randint(0, 19)}", f"t{rng.randint(20, 39)}"],
        })
    (root / "wide.json").write_text("\n".join(json.dumps(o) for o in objects))

    lines = []
    preds = ["title", "year", "author", "pages"]
    for i in range(250):
        subj = f"http://wide.example/r{i:04d}"
        for pred in preds:
            lines.append(f'<{subj}> <http://wide.example/v/{pred}> "{pred}-{i % 53}" .')
    (root / "wide.nt").write_text("\n".join(lines) + "\n")

    rows = ["key,alpha,beta,gamma"]
    for i in range(200):
        alpha = f"a{i % 11}"
        beta = str(i * 3) if i % 10 else ""  # every 10th beta is empty
        gamma = f"g{i % 5}"
        rows.append(f"r{i:03d},{alpha},{beta},{gamma}")
    (root / "wide.csv").write_text("\n".join(rows) + "\n")

    manifest = {"sources": [
        {"path": str(root / "wide.json"), "model": "JSON", "entity_label": "doc"},
        {"path": str(root / "wide.nt"), "model": "RDF", "entity_label": "res"},
        {"path": str(root / "wide.csv"), "model": "RELATIONAL", "entity_label": "rec"},
    ]}
    (root / "manifest.json").write_text(json.dumps(manifest))
    return {"manifest_path": root / "manifest.json", "manifest": manifest}
