"""Workload-driven relational schema search for multi-model data.

JSON, RDF and CSV sources are shredded into single-attribute tables (the
fully decomposed initial schema); an episodic Q-learner then merges tables
join by join, rewarded by the drop in total workload cost, under
user-declared cross-model joinability constraints.
"""

from .catalog import (
    Catalog,
    CatalogEntry,
    EntityFact,
    Source,
    SourceManifest,
    build_catalog,
    ingest_json,
    ingest_rdf,
    ingest_relational,
)
from .engine import CostUnits, JoinPlan, execute, merge_tables, storage
from .errors import (
    ConstraintError,
    IngestError,
    InvalidActionError,
    ParseError,
    SchemarlError,
    StateError,
    UnanswerableQueryError,
    WorkloadError,
)
from .learner import (
    BestSchema,
    Environment,
    EpisodeRecord,
    LearnParams,
    QTables,
    RunResult,
    brute_force_optimum,
    run_episode,
    select_action,
    td_update,
    train,
)
from .schema import (
    ConstraintPool,
    JoinAction,
    PhysicalTable,
    SchemaState,
    apply_join,
    init_state,
    joinable,
    parse_constraints,
    parse_signature,
    signature,
    state_facts,
    valid_actions,
)
from .shred import BinaryTable, dump_tables, reconstruct, shred
from .workload import (
    CostReport,
    Query,
    Workload,
    connectable,
    parse_workload,
    plan,
    workload_cost,
)

__version__ = "0.1.0"
