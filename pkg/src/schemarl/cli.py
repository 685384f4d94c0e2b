"""Batch command line: shred sources, train, evaluate what-if groupings,
run the exhaustive oracle, export DDL and serve the HTTP API."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .catalog import Catalog, SourceManifest, build_catalog
from .errors import SchemarlError
from .learner import Environment, LearnParams, brute_force_optimum, train
from .runs import ddl_for_signature, read_result, write_ddl, write_result, write_run_inputs, EpisodeWriter
from .schema import ConstraintPool, parse_constraints, parse_signature
from .shred import dump_tables, shred
from .workload import parse_workload


def _load_env(manifest_path: str, constraints_path: str | None,
              workload_path: str) -> Environment:
    manifest = SourceManifest.from_file(manifest_path)
    catalog, facts = build_catalog(manifest)
    if constraints_path:
        pool = parse_constraints(Path(constraints_path).read_text(), catalog)
    else:
        pool = ConstraintPool()
    workload = parse_workload(Path(workload_path).read_text(), catalog, pool)
    return Environment(catalog, facts, pool, workload)


@click.group()
def cli():
    """Relational schema search for multi-model data."""


def main():
    """Entry point: map package errors to nonzero exits with their message."""
    try:
        cli(standalone_mode=True)
    except (SchemarlError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


@cli.command("shred")
@click.argument("manifest_path", type=click.Path(exists=True))
@click.option("-o", "--out", "out_dir", required=True, type=click.Path())
def shred_cmd(manifest_path, out_dir):
    """Decompose the sources into per-attribute CSV tables."""
    manifest = SourceManifest.from_file(manifest_path)
    catalog, facts = build_catalog(manifest)
    tables = shred(catalog, facts)
    paths = dump_tables(tables, catalog, out_dir)
    Path(out_dir, "catalog.json").write_text(
        json.dumps(catalog.to_json(), sort_keys=True, indent=1) + "\n")
    click.echo(f"wrote {len(paths)} tables to {out_dir}")


@cli.command("learn")
@click.argument("manifest_path", type=click.Path(exists=True))
@click.option("--constraints", "constraints_path", type=click.Path(exists=True))
@click.option("--workload", "workload_path", required=True, type=click.Path(exists=True))
@click.option("--alpha", default=0.1, show_default=True)
@click.option("--gamma", default=0.9, show_default=True)
@click.option("--greedy", default=0.9, show_default=True)
@click.option("--episodes", default=20, show_default=True)
@click.option("--max-steps", default=None, type=int)
@click.option("--seed", default=0, show_default=True)
@click.option("--baseline-time", default=None, type=float)
@click.option("--baseline-space", default=None, type=float)
@click.option("--wall-clock", is_flag=True, default=False,
              help="reward measured evaluation time instead of deterministic "
                   "cost units (not reproducible)")
@click.option("--out", "out_dir", required=True, type=click.Path())
def learn_cmd(manifest_path, constraints_path, workload_path, alpha, gamma,
              greedy, episodes, max_steps, seed, baseline_time, baseline_space,
              wall_clock, out_dir):
    """Train the schema search and persist the run directory."""
    manifest = SourceManifest.from_file(manifest_path)
    catalog, facts = build_catalog(manifest)
    constraints_text = Path(constraints_path).read_text() if constraints_path else ""
    pool = parse_constraints(constraints_text, catalog)
    workload_text = Path(workload_path).read_text()
    workload = parse_workload(workload_text, catalog, pool)
    env = Environment(catalog, facts, pool, workload, wall_clock=wall_clock)
    params = LearnParams(alpha=alpha, gamma=gamma, greedy=greedy,
                         episodes=episodes, max_steps=max_steps, seed=seed,
                         baseline_time=baseline_time, baseline_space=baseline_space)
    write_run_inputs(out_dir, manifest, catalog, constraints_text,
                     workload_text, params)
    writer = EpisodeWriter(out_dir)
    try:
        result = train(env, params, on_episode=lambda rec, bt, bs: writer.append(rec))
    finally:
        writer.close()
    write_result(out_dir, result)
    write_ddl(out_dir, result.best_by_time.signature, catalog)
    click.echo(json.dumps({
        "best_by_time": result.best_by_time._asdict(),
        "best_by_space": result.best_by_space._asdict(),
        "episodes": len(result.episodes),
    }, sort_keys=True))


@cli.command("oracle")
@click.argument("manifest_path", type=click.Path(exists=True))
@click.option("--constraints", "constraints_path", type=click.Path(exists=True))
@click.option("--workload", "workload_path", required=True, type=click.Path(exists=True))
@click.option("--max-attrs", default=8, show_default=True)
def oracle_cmd(manifest_path, constraints_path, workload_path, max_attrs):
    """Exhaustively enumerate reachable schemas and print the optimum."""
    env = _load_env(manifest_path, constraints_path, workload_path)
    best = brute_force_optimum(env, max_attrs=max_attrs)
    click.echo(json.dumps(best._asdict(), sort_keys=True))


@cli.command("whatif")
@click.argument("run_dir", type=click.Path(exists=True))
@click.option("--groups", required=True,
              help="attribute grouping, e.g. '0,3|1|2'")
def whatif_cmd(run_dir, groups):
    """Evaluate a hand-written attribute grouping against a run's inputs."""
    from .service import evaluate_whatif

    run = Path(run_dir)
    manifest = SourceManifest.from_json(json.loads((run / "manifest.json").read_text()))
    catalog, facts = build_catalog(manifest)
    pool = parse_constraints((run / "constraints.txt").read_text(), catalog)
    workload = parse_workload((run / "workload.json").read_text(), catalog, pool)
    env = Environment(catalog, facts, pool, workload)
    try:
        parsed = parse_signature(groups)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    outcome = evaluate_whatif(parsed, env)
    click.echo(json.dumps(outcome, sort_keys=True))


@cli.command("export-ddl")
@click.argument("run_dir", type=click.Path(exists=True))
@click.option("--signature", "sig_text", required=True)
@click.option("-o", "--out", "out_path", type=click.Path(), default=None)
def export_ddl_cmd(run_dir, sig_text, out_path):
    """Print (or write) CREATE TABLE statements for a seen signature."""
    run = Path(run_dir)
    catalog = Catalog.from_json(json.loads((run / "catalog.json").read_text()))
    result = read_result(run)
    known = set(result["all_seen"])
    if sig_text not in known:
        raise click.ClickException(f"signature {sig_text!r} was not seen in this run")
    ddl = ddl_for_signature(sig_text, catalog)
    if out_path:
        Path(out_path).write_text(ddl)
        click.echo(f"wrote {out_path}")
    else:
        click.echo(ddl, nl=False)


@cli.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--runs", "runs_dir", default="runs", show_default=True,
              type=click.Path())
@click.option("--ui", "ui_dir", default=None, type=click.Path(),
              help="directory with the built web UI to serve at /")
def serve_cmd(host, port, runs_dir, ui_dir):
    """Run the HTTP API (and optionally the web UI)."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(runs_dir=runs_dir, ui_dir=ui_dir), host=host, port=port)


if __name__ == "__main__":
    main()
