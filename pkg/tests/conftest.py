import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from datagen import write_canonical_dataset, write_two_source_dataset  # noqa: E402

from schemarl import (
    Environment,
    SourceManifest,
    build_catalog,
    init_state,
    parse_constraints,
    parse_workload,
    shred,
)


@pytest.fixture(scope="session")
def canonical(tmp_path_factory):
    """Catalog, facts, pool, workload and environment for the 3-source fixture."""
    root = tmp_path_factory.mktemp("canonical")
    spec = write_canonical_dataset(root)
    manifest = SourceManifest.from_file(spec["manifest_path"])
    catalog, facts = build_catalog(manifest)
    pool = parse_constraints(spec["constraints"], catalog)
    workload = parse_workload(spec["workload"], catalog, pool)
    env = Environment(catalog, facts, pool, workload)
    return {
        "root": root,
        "spec": spec,
        "manifest": manifest,
        "catalog": catalog,
        "facts": facts,
        "pool": pool,
        "workload": workload,
        "env": env,
        "tables": env.initial_tables,
        "state0": env.initial_state,
    }


@pytest.fixture(scope="session")
def two_source(tmp_path_factory):
    root = tmp_path_factory.mktemp("two_source")
    spec = write_two_source_dataset(root)
    manifest = SourceManifest.from_file(spec["manifest_path"])
    catalog, facts = build_catalog(manifest)
    pool = parse_constraints(spec["constraints"], catalog)
    workload = parse_workload(spec["workload"], catalog, pool)
    env = Environment(catalog, facts, pool, workload)
    return {
        "root": root,
        "spec": spec,
        "catalog": catalog,
        "facts": facts,
        "pool": pool,
        "workload": workload,
        "env": env,
        "state0": env.initial_state,
    }
