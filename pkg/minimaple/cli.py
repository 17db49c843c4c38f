"""Command-line driver: parse, check, run, format and dump MiniMaple files."""
from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import click

from minimaple.checker import CheckResult, TypeChecker
from minimaple.config import Settings, load_settings, setup_logger
from minimaple.errors import JSON_SCHEMA_VERSION, ParseFailure
from minimaple.interpreter import Interpreter
from minimaple.nodes import Program
from minimaple.parser import parse_source
from minimaple.printer import pretty_print, to_json
from minimaple.report import ReportRenderer, env_json

EXIT_OK = 0
EXIT_TYPE_ERRORS = 1
EXIT_SYNTAX_ERRORS = 2
EXIT_RUNTIME_ERROR = 3
EXIT_USAGE = 4


@dataclass
class FileOutcome:
    path: str
    exit_code: int = EXIT_OK
    text: str = ''
    records: list[dict] = field(default_factory=list)
    stderr: str = ''
    program: Optional[Program] = None
    check: Optional[CheckResult] = None


class Driver:
    """Runs one pipeline stage sequence per input file"""

    def __init__(self, settings: Settings, renderer: ReportRenderer, logger=None):
        self.settings = settings
        self.renderer = renderer
        self.logger = logger or logging.getLogger(__name__)

    def parse_file(self, path: str) -> FileOutcome:
        outcome = FileOutcome(path)
        try:
            with open(path, encoding='utf-8') as source_file:
                source = source_file.read()
        except (OSError, UnicodeDecodeError) as e:
            self.logger.error(f"✗ Cannot read {path}: {e}")
            outcome.exit_code = EXIT_USAGE
            outcome.stderr = f"Error: cannot read {path}: {e}"
            return outcome
        try:
            outcome.program = parse_source(source, path)
            self.logger.info(f"✓ Parsed {path}")
        except ParseFailure as failure:
            self.logger.info(f"✗ {path}: {failure}")
            outcome.exit_code = EXIT_SYNTAX_ERRORS
            outcome.text = self.renderer.parse_failure_report(path, failure.diagnostics)
            outcome.records = [d.to_dict() for d in failure.diagnostics]
        return outcome

    def check_file(self, path: str) -> FileOutcome:
        outcome = self.parse_file(path)
        if outcome.program is None:
            return outcome
        result = TypeChecker(self.logger).check_program(outcome.program)
        outcome.check = result
        outcome.text = self.renderer.check_report(path, result)
        outcome.records = self.renderer.check_json(path, result)
        outcome.exit_code = EXIT_TYPE_ERRORS if self.renderer.failed(result) else EXIT_OK
        return outcome

    def run_file(self, path: str) -> FileOutcome:
        outcome = self.check_file(path)
        if outcome.exit_code != EXIT_OK:
            return outcome
        result = Interpreter(self.settings.run_options, self.logger).run_program(outcome.program)
        outcome.text += self.renderer.run_report(result)
        outcome.records += self.renderer.run_json(path, result)
        if not result.ok:
            outcome.exit_code = EXIT_RUNTIME_ERROR
        return outcome

    def dump_ast(self, path: str) -> FileOutcome:
        outcome = self.parse_file(path)
        if outcome.program is not None:
            outcome.records = [{'schema': JSON_SCHEMA_VERSION, 'file': path, **to_json(outcome.program)}]
        return outcome

    def dump_env(self, path: str) -> FileOutcome:
        outcome = self.check_file(path)
        if outcome.check is not None:
            outcome.records = [{
                'schema': JSON_SCHEMA_VERSION,
                'file': path,
                'env': env_json(outcome.check.env),
                'procedures': [{'name': p.name, 'type': str(p.type), 'env': env_json(p.entry_env)}
                               for p in outcome.check.procedures],
            }]
        return outcome

    def format_file(self, path: str) -> FileOutcome:
        outcome = self.parse_file(path)
        if outcome.program is not None:
            outcome.text = pretty_print(outcome.program)
            if not outcome.text.endswith('\n'):
                outcome.text += '\n'
        return outcome

    def process(self, paths: tuple[str, ...], action: Callable[[str], FileOutcome]) -> list[FileOutcome]:
        """Files are processed concurrently; results keep input order."""
        with ThreadPoolExecutor(max_workers=max(1, self.settings.workers)) as executor:
            return list(executor.map(action, paths))


def emit(outcomes: list[FileOutcome], output_format: str) -> int:
    for outcome in outcomes:
        if outcome.stderr:
            click.echo(outcome.stderr, err=True)
        if output_format == 'json':
            for record in outcome.records:
                click.echo(json.dumps(record))
        elif outcome.text:
            click.echo(outcome.text, nl=False)
    return max((o.exit_code for o in outcomes), default=EXIT_OK)


def report_options(command):
    command = click.option('--werror', is_flag=True, help='Treat warnings as errors.')(command)
    command = click.option('--verbose', is_flag=True,
                           help='Show infos, per-procedure blocks and nested trace events.')(command)
    command = click.option('--format', 'output_format', type=click.Choice(['text', 'json']),
                           default='text', show_default=True)(command)
    command = click.argument('paths', nargs=-1, required=True, type=click.Path(dir_okay=False))(command)
    return command


def make_driver(ctx: click.Context, verbose: bool, werror: bool, **run_overrides) -> Driver:
    settings: Settings = ctx.obj['settings'].with_run_options(**run_overrides)
    logger = ctx.obj['logger']
    return Driver(settings, ReportRenderer(verbose, werror, logger), logger)


@click.group()
@click.pass_context
def cli(ctx):
    """Static checking and reference execution for MiniMaple programs."""
    settings = load_settings()
    logger = setup_logger('minimaple', settings.log_dir, settings.log_level, settings.log_file)
    ctx.obj = {'settings': settings, 'logger': logger}


@cli.command()
@report_options
@click.pass_context
def check(ctx, paths, output_format, verbose, werror):
    """Type-check files and print the annotation of the top-level sequence."""
    driver = make_driver(ctx, verbose, werror)
    ctx.exit(emit(driver.process(paths, driver.check_file), output_format))


@cli.command()
@report_options
@click.option('--check-contracts', is_flag=True, help='Evaluate procedure requires/ensures clauses.')
@click.option('--check-invariants', is_flag=True, help='Evaluate loop invariants and decreases terms.')
@click.option('--no-assert', is_flag=True, help='Skip ASSERT commands.')
@click.option('--step-limit', type=click.IntRange(min=1), default=None)
@click.option('--quantifier-bound', type=click.IntRange(min=1), default=None)
@click.pass_context
def run(ctx, paths, output_format, verbose, werror, check_contracts, check_invariants, no_assert,
        step_limit, quantifier_bound):
    """Check, then execute files that type-checked."""
    driver = make_driver(
        ctx, verbose, werror,
        check_contracts=True if check_contracts else None,
        check_loop_specs=True if check_invariants else None,
        check_assertions=False if no_assert else None,
        step_limit=step_limit,
        quantifier_bound=quantifier_bound,
    )
    ctx.exit(emit(driver.process(paths, driver.run_file), output_format))


@cli.command('dump-ast')
@click.argument('paths', nargs=-1, required=True, type=click.Path(dir_okay=False))
@click.pass_context
def dump_ast(ctx, paths):
    """Emit the syntax tree of each file as one JSON line."""
    driver = make_driver(ctx, False, False)
    ctx.exit(emit(driver.process(paths, driver.dump_ast), 'json'))


@cli.command('dump-env')
@click.argument('paths', nargs=-1, required=True, type=click.Path(dir_okay=False))
@click.option('--werror', is_flag=True)
@click.pass_context
def dump_env(ctx, paths, werror):
    """Emit the final type environment of each file as JSON."""
    driver = make_driver(ctx, False, werror)
    ctx.exit(emit(driver.process(paths, driver.dump_env), 'json'))


@cli.command()
@click.argument('paths', nargs=-1, required=True, type=click.Path(dir_okay=False))
@click.pass_context
def fmt(ctx, paths):
    """Print each file in canonical form."""
    driver = make_driver(ctx, False, False)
    ctx.exit(emit(driver.process(paths, driver.format_file), 'text'))


def main(argv=None) -> int:
    try:
        code = cli.main(args=argv, prog_name='minimaple', standalone_mode=False)
    except click.UsageError as e:
        click.echo(f"Error: {e.format_message()}", err=True)
        return EXIT_USAGE
    except click.Abort:
        return EXIT_USAGE
    return code if isinstance(code, int) else EXIT_OK
