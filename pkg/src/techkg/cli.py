"""Command-line driver for pipeline jobs.

Stages map onto subcommands one-to-one where sensible; `semnet` and
`cluster` both target the network stage, since clustering is computed
with the network (cluster additionally prints the grouping). Without
--config the bundled demo corpus runs, which is the quickest way to
see the whole pipeline end to end.
"""

import json
import sys
from dataclasses import replace
from pathlib import Path

import click

from . import data
from .pipeline import (
    Pipeline,
    PipelineConfig,
    PipelineError,
    ReviewConflict,
    TRANSPORT_MODES,
)


def _guard(fn, *args, **kwargs):
    """Turn expected failures into clean CLI errors instead of tracebacks."""
    try:
        return fn(*args, **kwargs)
    except (PipelineError, ReviewConflict, ValueError, KeyError) as exc:
        detail = exc.args[0] if exc.args else str(exc)
        raise click.ClickException(str(detail)) from exc

STAGE_COMMANDS = (
    ("ingest", "ingested", "Load the corpus and retrieve query matches per genre."),
    ("keyphrases", "keyphrases_done", "Score thesaurus terms by cross-genre nPMI."),
    ("semnet", "network_built", "Embed kept terms and build the clustered semantic network."),
    ("extract", "extracted", "Run schema-constrained triple extraction over the selection."),
    ("validate", "validated", "Commit reviewed triples to a KG and run consistency checks."),
    ("export", "exported", "Write the view JSON and graph statistics."),
)


def _load_config(ctx) -> PipelineConfig:
    path = ctx.obj["config_path"]
    if path is None:
        path = data.config_path()
        click.echo(f"no --config given; using bundled demo {path}", err=True)
    config = PipelineConfig.from_file(path)
    if ctx.obj["transport"]:
        config = replace(config, transport_mode=ctx.obj["transport"])
        config.validate()
    return config


def _pipeline(ctx) -> Pipeline:
    if ctx.obj.get("pipeline") is None:
        config = _load_config(ctx)
        job_dir = Path(config.output_dir) / "jobs" / ctx.obj["job_id"]
        ctx.obj["pipeline"] = Pipeline(job_dir, config=config, job_id=ctx.obj["job_id"])
    return ctx.obj["pipeline"]


def _echo_json(obj):
    click.echo(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False))


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Pipeline config JSON; defaults to the bundled demo.")
@click.option("--job", "job_id", default="default", show_default=True,
              help="Job name under <output_dir>/jobs/.")
@click.option("--transport", type=click.Choice(TRANSPORT_MODES), default=None,
              help="Override the config's transport mode for this invocation.")
@click.pass_context
def main(ctx, config_path, job_id, transport):
    """Corpus-to-knowledge-graph pipeline."""
    ctx.obj = {"config_path": config_path, "job_id": job_id, "transport": transport}


def _stage_command(name, stage, help_text):
    @main.command(name=name, help=help_text)
    @click.pass_context
    def cmd(ctx):
        record = _guard(_pipeline(ctx).run_stage, stage)
        click.echo(f"job {record['job_id']}: stage {stage} complete")

    return cmd


for _name, _stage, _help in STAGE_COMMANDS:
    _stage_command(_name, _stage, _help)


@main.command()
@click.pass_context
def cluster(ctx):
    """Ensure the network stage ran, then print the cluster grouping."""
    pipe = _pipeline(ctx)
    _guard(pipe.run_stage, "network_built")
    for entry in pipe.clusters():
        labels = ", ".join(m["label"] for m in entry["members"])
        click.echo(f"cluster {entry['cluster']} ({entry['size']}): {labels}")


@main.command()
@click.option("--add", "add_id", default="", help="Add a document to the selection.")
@click.option("--remove", "remove_id", default="", help="Remove a document from the selection.")
@click.pass_context
def select(ctx, add_id, remove_id):
    """Rank documents by relevance and keep the top k; amend with --add/--remove."""
    pipe = _pipeline(ctx)
    if add_id or remove_id:
        _echo_json(_guard(pipe.amend, add=add_id, remove=remove_id))
        return
    _guard(pipe.run_stage, "selected")
    _echo_json(pipe.selection())


@main.group()
def review():
    """List or decide triples awaiting expert review."""


@review.command(name="list")
@click.pass_context
def review_list(ctx):
    _echo_json(_guard(_pipeline(ctx).review_list))


@review.command(name="accept")
@click.argument("triple_id")
@click.pass_context
def review_accept(ctx, triple_id):
    _echo_json(_guard(_pipeline(ctx).review_decide, triple_id, accept=True))


@review.command(name="reject")
@click.argument("triple_id")
@click.option("--reason", default="", help="Why the triple is wrong.")
@click.pass_context
def review_reject(ctx, triple_id, reason):
    _echo_json(_guard(_pipeline(ctx).review_decide, triple_id, accept=False, reason=reason))


@main.command()
@click.pass_context
def stats(ctx):
    """Print axiom, class, and property counts of the validated KG."""
    _echo_json(_guard(_pipeline(ctx).kg_statistics))


@main.command()
@click.option("--dump", required=True, type=click.Path(exists=True, dir_okay=False),
              help="External nodes/edges JSON dump to compare against.")
@click.pass_context
def compare(ctx, dump):
    """Compare KG label coverage against an external graph dump."""
    _echo_json(_guard(_pipeline(ctx).coverage, dump))


@main.command(name="run-all")
@click.option("--auto-accept", is_flag=True, default=False,
              help="Accept all pending triples instead of stopping for review.")
@click.pass_context
def run_all(ctx, auto_accept):
    """Run every stage in order."""
    if auto_accept:
        ctx.obj["pipeline"] = None
        config = replace(_load_config(ctx), auto_accept=True)
        job_dir = Path(config.output_dir) / "jobs" / ctx.obj["job_id"]
        ctx.obj["pipeline"] = Pipeline(job_dir, config=config, job_id=ctx.obj["job_id"])
    record = _guard(_pipeline(ctx).run_all)
    click.echo(f"job {record['job_id']}: all stages complete")
    _echo_json(_guard(_pipeline(ctx).kg_statistics))


@main.command()
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Where to write figures and the metrics table (default: job dir).")
@click.pass_context
def report(ctx, out_dir):
    """Render figures and a metrics table from the job's artifacts."""
    pipe = _pipeline(ctx)
    if out_dir is None:
        manifest = _guard(pipe.report)
    else:
        from .report import render_report

        artifacts = {}
        for key, stage, name in (
            ("scores", "keyphrases_done", "scores.json"),
            ("topicmap", "network_built", "topicmap.json"),
            ("validation", "validated", "validation.json"),
            ("kg_stats", "exported", "stats.json"),
        ):
            try:
                artifacts[key] = pipe.load_artifact(stage, name)
            except Exception:
                continue
        manifest = render_report(artifacts, out_dir)
        manifest["dir"] = str(out_dir)
    _echo_json(manifest)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8765, show_default=True, type=int)
@click.option("--ui", "ui_dir", type=click.Path(file_okay=False), default=None,
              help="Static UI directory; defaults to ./frontend/dist when present.")
@click.pass_context
def serve(ctx, host, port, ui_dir):
    """Serve the HTTP API (and the explorer UI when built)."""
    from .service import JobManager, serve as run_server

    config = _load_config(ctx)
    if ui_dir is None and Path("frontend/dist").is_dir():
        ui_dir = "frontend/dist"
    manager = JobManager(config.output_dir, default_config=config)
    click.echo(f"listening on http://{host}:{port}")
    run_server(manager, host=host, port=port, ui_dir=ui_dir)


if __name__ == "__main__":
    sys.exit(main())
