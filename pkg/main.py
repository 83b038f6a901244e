import json
import sys
from pathlib import Path
from typing import Optional

import click

from app.core.exceptions import DlpawError, ParseError
from app.core.parser import CheckItem, Definition, RunItem
from app.core.pretty import pretty, store_records
from app.schemas.reports import TraceRecord
from app.services.corpus import (
    check_file, check_source, closures, extract_choice, extract_dc, load, oracle,
)
from app.services.machine import BigStepMachine, run_report
from app.services.macros import expand
from app.services.smallstep import SmallStepMachine, agree, as_step_outcome
from app.services.suite import run_suite
from app.utils.logger import setup_logging
from config import settings

MACHINES = click.Choice(["big", "small"])


def _load(path: str):
    try:
        return load(Path(path))
    except ParseError as e:
        for diagnostic in e.diagnostics:
            click.echo(diagnostic.render(path), err=True)
        sys.exit(1)


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Log at DEBUG level")
def cli(verbose: bool):
    """dlpaw - type checker and abstract machines for a classical calculus with dependent choice"""
    setup_logging("DEBUG" if verbose else None)


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True, help="Print the report as JSON")
def check(file: str, as_json: bool):
    """Type-check every definition and check item of FILE"""
    report = check_file(Path(file))
    if as_json:
        click.echo(report.model_dump_json(indent=2))
    else:
        for diagnostic in report.diagnostics:
            click.echo(diagnostic.render(file), err=True)
        for entry in report.definitions:
            if entry.status == "ok":
                click.echo(f"{entry.name} : {entry.declared_type}")
            else:
                click.echo(f"{file}: {entry.name}: {entry.error}", err=True)
    sys.exit(0 if report.ok else 1)


class _TraceWriter:
    """JSON-lines trace sink for both machines"""

    def __init__(self, handle):
        self.handle = handle

    def big(self, step: int, rule: str, cl) -> None:
        self._write(TraceRecord(step=step, rule=rule or "", command=pretty(cl.cmd), store=store_records(cl.store)))

    def small(self, step: int, rule: str, fc, store) -> None:
        record = TraceRecord(step=step, rule=rule or "", focus=fc.focus.value, command=pretty(fc.cmd), store=store_records(store))
        self._write(record)

    def _write(self, record: TraceRecord) -> None:
        self.handle.write(record.model_dump_json() + "\n")


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--machine", type=MACHINES, default=settings.DEFAULT_MACHINE, show_default=True)
@click.option("--fuel", type=int, default=settings.FUEL, show_default=True, help="Step budget per run item")
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), help="Write a JSON-lines trace")
@click.option("--require-typed", is_flag=True, help="Refuse to run a file that does not type-check")
@click.option("--json", "as_json", is_flag=True, help="Print run reports as JSON")
def run(file: str, machine: str, fuel: int, trace_path: Optional[str], require_typed: bool, as_json: bool):
    """Evaluate the run items of FILE"""
    source = _load(file)
    if require_typed:
        report = check_source(source, file)
        if not report.ok:
            for entry in report.definitions:
                if entry.status != "ok":
                    click.echo(f"{file}: {entry.name}: {entry.error}", err=True)
            sys.exit(1)
    handle = open(trace_path, "w") if trace_path else None
    writer = _TraceWriter(handle) if handle else None
    reports = []
    try:
        for cl in closures(source):
            if machine == "big":
                outcome = BigStepMachine(fuel, trace=writer.big if writer else None).run(cl)
            else:
                outcome = as_step_outcome(SmallStepMachine(fuel, trace=writer.small if writer else None).run(cl))
            reports.append(run_report(outcome, machine))
    finally:
        if handle:
            handle.close()
    _print_runs(reports, as_json)
    sys.exit(0 if all(r.outcome == "normal" for r in reports) else 1)


def _print_runs(reports, as_json: bool) -> None:
    if as_json:
        click.echo(json.dumps([r.model_dump() for r in reports], indent=2, ensure_ascii=False))
        return
    for report in reports:
        if report.answer is not None:
            click.echo(f"{report.outcome} after {report.steps} steps: {report.answer}")
        else:
            click.echo(f"{report.outcome} after {report.steps} steps: {report.command} ({report.reason})")


@cli.command(name="expand")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
def expand_command(file: str):
    """Print the definitions and run items of FILE with all sugar expanded"""
    source = _load(file)
    try:
        for item in source.items:
            if isinstance(item, Definition):
                click.echo(f"def {item.name} := {pretty(expand(item.proof))}")
            elif isinstance(item, CheckItem):
                click.echo(f"check {pretty(expand(item.proof))} : {pretty(item.formula)}")
            elif isinstance(item, RunItem):
                click.echo(f"run {pretty(expand(item.closure))}")
    except DlpawError as e:
        click.echo(f"{file}: {e}", err=True)
        sys.exit(1)


@cli.command()
@click.argument("program", type=click.Choice(["acn", "dc"]))
@click.option("--n", "n", type=click.IntRange(min=0), default=3, show_default=True, help="Index of the witness")
@click.option("--x0", type=click.IntRange(min=0), default=0, show_default=True, help="Starting point (dc)")
@click.option("--machine", type=MACHINES, default=settings.DEFAULT_MACHINE, show_default=True)
@click.option("--fuel", type=int, default=settings.FUEL, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def demo(program: str, n: int, x0: int, machine: str, fuel: int, as_json: bool):
    """Extract f(n) from the choice function built by PROGRAM"""
    try:
        if program == "acn":
            report = extract_choice(n, machine=machine, fuel=fuel)
        else:
            report = extract_dc(n, x0, machine=machine, fuel=fuel)
    except DlpawError as e:
        click.echo(f"demo {program}: {e}", err=True)
        sys.exit(1)
    if as_json:
        click.echo(report.model_dump_json(indent=2))
        return
    click.echo(f"f({n}) = {report.value if report.value is not None else report.term}")
    click.echo(f"cofix unfoldings: {report.unfoldings} (re-query: {report.requery_unfoldings}), steps: {report.steps}")
    if program == "acn":
        click.echo(f"oracle wit(H {n}) = {oracle(n)}")


@cli.command()
@click.option("--corpus", "directory", type=click.Path(file_okay=False), default=settings.CORPUS_DIR, show_default=True)
@click.option("--fuzz", type=click.IntRange(min=0), default=0, show_default=True, help="Generated closures")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--fuel", type=int, default=settings.FUEL, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def suite(directory: str, fuzz: int, seed: int, fuel: int, as_json: bool):
    """Run the property suite over the corpus and generated closures"""
    report = run_suite(directory, fuzz, fuel, seed)
    if as_json:
        click.echo(json.dumps({"checks": report.checks, "failures": report.failures, "ok": report.ok}, indent=2))
    else:
        for name, count in sorted(report.checks.items()):
            click.echo(f"{name}: {count}")
        for failure in report.failures:
            click.echo(f"FAIL {failure}", err=True)
    sys.exit(0 if report.ok else 1)


@cli.command(name="agree")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--fuel", type=int, default=settings.FUEL, show_default=True)
def agree_command(file: str, fuel: int):
    """Run the run items of FILE on both machines and compare the answers"""
    source = _load(file)
    failed = False
    for index, cl in enumerate(closures(source)):
        result = agree(cl, fuel)
        status = "agree" if result.agree else f"DISAGREE: {result.detail}"
        click.echo(f"#{index}: {status} ({result.big.steps} big / {result.small.steps} small steps)")
        failed = failed or not result.agree
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    cli()
