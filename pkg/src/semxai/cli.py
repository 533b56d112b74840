"""Command-line entry point: ``semxai [--config PATH] [--seed-override N] [--out-dir DIR] COMMAND``."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from .config import ConfigError, fixture_config_path, load_config


def _config(ctx):
    obj = ctx.obj
    path = obj["config"] or fixture_config_path()
    try:
        return load_config(path, obj["seed_override"])
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from None


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="Pipeline YAML (defaults to the bundled fixture config).")
@click.option("--seed-override", type=int, default=None, help="Replace the configured seed.")
@click.option("--out-dir", type=click.Path(file_okay=False), default="out", show_default=True)
@click.option("-v", "--verbose", is_flag=True)
@click.pass_context
def main(ctx, config_path, seed_override, out_dir, verbose):
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")
    ctx.obj = {"config": config_path, "seed_override": seed_override, "out_dir": Path(out_dir)}


@main.command()
@click.pass_context
def ingest(ctx):
    """Load inputs into the knowledge graph and export it."""
    from .pipeline import ingest_only

    _, summary = ingest_only(_config(ctx), ctx.obj["out_dir"])
    click.echo(json.dumps(summary, sort_keys=True))


@main.command()
@click.pass_context
def explain(ctx):
    """Run the full pipeline and write explanations, predictions, kg and manifest."""
    from .pipeline import run_pipeline

    result = run_pipeline(_config(ctx), ctx.obj["out_dir"])
    failures = result.manifest["failures"]
    click.echo(f"{len(result.explanations)} explanations written to {ctx.obj['out_dir']}")
    for f in failures:
        click.echo(f"skipped {f['material']} {f['month']}: {f['error']}", err=True)


@main.command()
@click.option("--annotations", type=click.Path(exists=True, dir_okay=False), required=True)
@click.pass_context
def evaluate(ctx, annotations):
    """Compute explanation-quality metrics from an annotation CSV."""
    from .evaluation import MalformedAnnotationFile, NoAnnotations, load_annotations, report, write_report

    try:
        rep = report(load_annotations(annotations))
    except (MalformedAnnotationFile, NoAnnotations) as exc:
        raise click.ClickException(str(exc)) from None
    write_report(rep, ctx.obj["out_dir"])
    click.echo(rep.render_text(), nl=False)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, type=int, show_default=True)
@click.pass_context
def serve(ctx, host, port):
    """Serve predictions and explanations from a previous ``explain`` run."""
    from .service import MissingOutputs, PortInUse, serve as run

    try:
        run(ctx.obj["out_dir"], host, port)
    except (MissingOutputs, PortInUse) as exc:
        raise click.ClickException(str(exc)) from None


@main.command("make-fixtures")
@click.argument("target", type=click.Path(file_okay=False))
@click.option("--seed", default=7, show_default=True)
def make_fixtures(target, seed):
    """Regenerate the synthetic fixture corpus into TARGET."""
    from .fixtures import generate_corpus

    click.echo(str(generate_corpus(target, seed)))


if __name__ == "__main__":
    sys.exit(main())
