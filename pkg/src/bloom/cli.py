"""Command-line entry points: serve the API, run the safety benchmark, replay fixtures."""

from __future__ import annotations

import sys

import click

from .auth import TokenRecord, TokenRegistry
from .config import ServiceConfig
from .errors import DatasetError
from .persistence import FileStore, InMemoryStore
from .provider import provider_from_config
from .runtime import CoachingService
from .safety import SafetyPipeline
from .safety_eval import evaluate_benchmark, load_dataset, validate_corpus, write_report


@click.group()
def main():
    """Physical-activity coaching service."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON config file; env vars override.")
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
def serve(config_path, host, port):
    """Run the HTTP/websocket service."""
    import uvicorn

    from .server import create_app

    config = ServiceConfig.load(config_path)
    if host:
        config.host = host
    if port:
        config.port = port
    store = FileStore(config.store_path) if config.store_path else InMemoryStore()
    if config.token_registry_path:
        registry = TokenRegistry.from_file(config.token_registry_path)
    else:
        registry = TokenRegistry([TokenRecord("dev-token", "dev")])
        click.echo("no token registry configured; using dev-token -> dev", err=True)
    provider = provider_from_config(config.provider, model=config.model)
    service = CoachingService(store, provider, timezone=config.timezone,
                              template_notifications=config.template_notifications,
                              token_budget=config.token_budget,
                              response_temperature=config.response_temperature)
    uvicorn.run(create_app(service, registry), host=config.host, port=config.port)


@main.command()
@click.option("--dataset", required=True, type=click.Path(exists=True),
              help="JSONL benchmark file.")
@click.option("--split", default="test", type=click.Choice(["train", "validation", "test"]))
@click.option("--provider", "provider_spec", default="live",
              help='"live" or "scripted:<fixture path>".')
@click.option("--trials", default=1, type=int)
@click.option("--workers", default=1, type=int, help="Concurrent classifications.")
@click.option("--report", "report_path", type=click.Path(), default=None,
              help="Write the full JSON report here.")
@click.option("--check-corpus/--no-check-corpus", default=False,
              help="Also validate the canonical 600-example corpus shape.")
def bench(dataset, split, provider_spec, trials, workers, report_path, check_corpus):
    """Evaluate the safety classifiers on a benchmark dataset."""
    try:
        examples = load_dataset(dataset)
    except DatasetError as exc:
        click.echo(f"dataset invalid: {exc}", err=True)
        for line, reason in exc.rows[:20]:
            click.echo(f"  line {line}: {reason}", err=True)
        sys.exit(2)
    if check_corpus:
        violations = validate_corpus(examples)
        if violations:
            click.echo("corpus shape violations:", err=True)
            for violation in violations:
                click.echo(f"  {violation}", err=True)
            sys.exit(2)
    provider = provider_from_config(provider_spec)
    pipeline = SafetyPipeline(provider)
    report = evaluate_benchmark(examples, pipeline, split=split, trials=trials,
                                max_workers=workers)
    click.echo(report.render_table())
    if report_path:
        write_report(report, report_path)
        click.echo(f"report written to {report_path}")


@main.command()
@click.argument("fixture", type=click.Path(exists=True))
@click.option("--runs", default=1, type=int, help="Repeat to check determinism.")
def replay(fixture, runs):
    """Replay a recorded conversation fixture end to end."""
    from .replay import replay_fixture_file

    transcripts = replay_fixture_file(fixture, runs=runs)
    if runs > 1:
        identical = all(t == transcripts[0] for t in transcripts)
        click.echo(f"runs: {runs}  byte-identical: {identical}", err=True)
        if not identical:
            sys.exit(1)
    click.echo(transcripts[0])


if __name__ == "__main__":
    main()
