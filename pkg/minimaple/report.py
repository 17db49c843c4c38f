"""Text and JSON renderings of check and run results."""
from __future__ import annotations

import logging
import os
from typing import Iterable, Optional

from jinja2 import Environment, FileSystemLoader

from minimaple.checker import CheckResult, CommandInfo
from minimaple.errors import JSON_SCHEMA_VERSION, Diagnostic, Severity
from minimaple.interpreter import RunResult, TraceEvent
from minimaple.printer import quote_string
from minimaple.typesys import Procedure, Type, TypeEnv, sort_key
from minimaple.values import ProcVal, show, to_json

TEMPLATE_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'templates')

SEQUENCE_TITLE = 'COMMAND-SEQUENCE-ANNOTATION'
PROCEDURE_TITLE = 'PROCEDURE-ANNOTATION'
SUCCESS_VERDICT = 'The program type-checked correctly.'


def dump_order(env: TypeEnv) -> list[tuple[str, Type]]:
    """Procedure-typed bindings first, then the rest; each group in binding order."""
    items = list(env.items())
    return ([(n, t) for n, t in items if isinstance(t, Procedure)]
            + [(n, t) for n, t in items if not isinstance(t, Procedure)])


def type_set(types: Iterable[Type]) -> str:
    return '{' + ','.join(str(t) for t in sorted(types, key=sort_key)) + '}'


def exception_set(names: Iterable[str]) -> str:
    return '{' + ','.join(quote_string(n) for n in sorted(names)) + '}'


def env_json(env: TypeEnv) -> dict[str, str]:
    return {name: str(t) for name, t in dump_order(env)}


class ReportRenderer:
    """Renders reports through the packaged Jinja2 templates"""

    def __init__(self, verbose: bool = False, werror: bool = False, logger=None):
        self.verbose = verbose
        self.werror = werror
        self.logger = logger or logging.getLogger(__name__)
        self.jinja_env = Environment(
            loader=FileSystemLoader(TEMPLATE_DIR),
            keep_trailing_newline=True,
            trim_blocks=True,
            lstrip_blocks=True,
        )

    def shown(self, diagnostics: list[Diagnostic]) -> list[str]:
        return [d.format() for d in diagnostics if self.verbose or d.severity is not Severity.INFO]

    def failed(self, result: CheckResult) -> bool:
        return bool(result.errors) or (self.werror and bool(result.warnings))

    def annotation(self, info: CommandInfo, title: str = SEQUENCE_TITLE, env: Optional[TypeEnv] = None) -> str:
        template = self.jinja_env.get_template('annotation.txt.j2')
        env = info.env_after if env is None else env
        return template.render(
            title=title,
            bindings=[f"{name}:{t}" for name, t in dump_order(env)],
            ret_types=type_set(info.ret_types),
            exceptions=exception_set(info.exceptions),
            ret_flag=info.ret_flag.value,
        )

    def verdict(self, result: CheckResult) -> str:
        if not self.failed(result):
            return SUCCESS_VERDICT
        errors, warnings = len(result.errors), len(result.warnings)
        if errors:
            return f"The program failed to type-check with {errors} error(s)."
        return f"The program failed to type-check: {warnings} warning(s) treated as errors."

    def check_report(self, path: str, result: CheckResult) -> str:
        procedures = []
        if self.verbose:
            for proc in result.procedures:
                procedures.append({
                    'name': proc.name,
                    'type': str(proc.type),
                    'block': self.annotation(proc.info, PROCEDURE_TITLE, proc.entry_env),
                })
        template = self.jinja_env.get_template('check_report.txt.j2')
        return template.render(
            path=path,
            diagnostics=self.shown(result.diagnostics),
            block=self.annotation(result.info),
            procedures=procedures,
            verdict=self.verdict(result),
        )

    def parse_failure_report(self, path: str, diagnostics: list[Diagnostic]) -> str:
        lines = [d.format() for d in diagnostics]
        lines.append(f"{path} failed to parse with {len(diagnostics)} error(s).")
        return '\n'.join(lines) + '\n'

    def visible_events(self, trace: list[TraceEvent]) -> list[TraceEvent]:
        if self.verbose:
            return list(trace)
        return [t for t in trace
                if t.event == 'error' or (t.depth == 0 and t.event in ('assign', 'call', 'return', 'assert'))]

    def run_report(self, result: RunResult) -> str:
        passed = sum(1 for o in result.outcomes if o.passed)
        failed = len(result.outcomes) - passed
        if result.ok:
            verdict = f"Execution completed after {result.steps} steps."
        else:
            verdict = f"Execution failed: {result.diagnostics[0].format()}"
        template = self.jinja_env.get_template('run_report.txt.j2')
        return template.render(
            events=[t.format() for t in self.visible_events(result.trace)],
            passed=passed,
            failed=failed,
            verdict=verdict,
            bindings=[(name, show(value)) for name, value in result.state.globals.items()],
        )

    # ------------------------------------------------------------ JSON

    def check_json(self, path: str, result: CheckResult) -> list[dict]:
        records = [d.to_dict() for d in result.diagnostics]
        records.append({
            'schema': JSON_SCHEMA_VERSION,
            'file': path,
            'ok': not self.failed(result),
            'env': env_json(result.env),
            'ret_types': [str(t) for t in sorted(result.info.ret_types, key=sort_key)],
            'exceptions': sorted(result.info.exceptions),
            'ret_flag': result.info.ret_flag.value,
        })
        return records

    def run_json(self, path: str, result: RunResult) -> list[dict]:
        records = [{'schema': JSON_SCHEMA_VERSION, **t.to_dict()} for t in self.visible_events(result.trace)]
        records.append({
            'schema': JSON_SCHEMA_VERSION,
            'file': path,
            'ok': result.ok,
            'error': None if result.ok else result.diagnostics[0].to_dict(),
            'steps': result.steps,
            'outcomes': {'passed': sum(1 for o in result.outcomes if o.passed),
                         'failed': sum(1 for o in result.outcomes if not o.passed)},
            'globals': {name: None if isinstance(v, ProcVal) else to_json(v)
                        for name, v in result.state.globals.items()},
        })
        return records
