"""Command line entry points: serve, repl, validate, profile."""

from __future__ import annotations

import logging
import os
import sys
import time
from pathlib import Path

import click

from .nlu.segmentation import Hypothesis
from .pipeline import Engine, TurnRequest


def _setup_logging():
    level = os.environ.get("ENGINE_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _dir_options(fn):
    fn = click.option("--data-dir", type=click.Path(path_type=Path), default=None,
                      help="Directory with the graph and template data files.")(fn)
    fn = click.option("--store-dir", type=click.Path(path_type=Path), default=None,
                      help="Writable directory for learned facts and sessions.")(fn)
    return fn


@click.group()
def main():
    """Knowledge-graph dialogue engine."""
    _setup_logging()


@main.command()
@_dir_options
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(data_dir, store_dir, host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=data_dir, store_dir=store_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@_dir_options
@click.option("--user", "user_id", default="repl-user", show_default=True)
@click.option("--debug", is_flag=True, help="Print the per-turn debug trace.")
def repl(data_dir, store_dir, user_id, debug):
    """Interactive conversation on stdin/stdout."""
    engine = Engine(data_dir=data_dir, store_dir=store_dir)
    conversation_id = engine.create_conversation(user_id)
    click.echo(f"conversation {conversation_id} (user {user_id}); "
               "empty line or Ctrl-D quits")
    while True:
        try:
            line = input("> ").strip()
        except (EOFError, KeyboardInterrupt):
            break
        if not line:
            break
        response = engine.handle_turn(
            conversation_id, TurnRequest(hypotheses=(Hypothesis(line),)))
        click.echo(response.text)
        if debug:
            click.echo(repr(response.debug))
    click.echo("bye")


@main.command()
@_dir_options
def validate(data_dir, store_dir):
    """Check the data files; exit nonzero when violations exist."""
    try:
        engine = Engine(data_dir=data_dir, store_dir=store_dir)
    except Exception as exc:
        click.echo(f"FAIL: {exc}", err=True)
        sys.exit(1)
    problems = engine.validation_report()
    for problem in problems:
        click.echo(f"violation: {problem}", err=True)
    click.echo(f"{len(engine.graph.entities)} entities, "
               f"{len(engine.graph.properties)} properties, "
               f"{len(list(engine.pairs))} pairs, "
               f"{len(engine.index.entries)} patterns")
    sys.exit(1 if problems else 0)


@main.command()
@_dir_options
@click.option("--utterance", default="hello how are you what's your name",
              show_default=True)
@click.option("--repeats", default=20, show_default=True, type=int)
def profile(data_dir, store_dir, utterance, repeats):
    """Latency report for one utterance (median per-turn wall time)."""
    engine = Engine(data_dir=data_dir, store_dir=store_dir)
    samples = []
    for i in range(repeats):
        conversation_id = engine.create_conversation(f"profile-{i}")
        started = time.perf_counter()
        response = engine.handle_turn(
            conversation_id, TurnRequest(hypotheses=(Hypothesis(utterance),)))
        samples.append((time.perf_counter() - started) * 1000)
    samples.sort()
    median = samples[len(samples) // 2]
    click.echo(f"utterance: {utterance!r}")
    click.echo(f"turns: {repeats}  median: {median:.1f} ms  "
               f"min: {samples[0]:.1f} ms  max: {samples[-1]:.1f} ms")
    click.echo(f"last response: {response.text}")


if __name__ == "__main__":
    main()
