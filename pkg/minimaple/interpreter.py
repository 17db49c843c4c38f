"""Reference interpreter: states with static scoping, commands, loops and contract checking."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from minimaple import nodes as ast
from minimaple.errors import NO_SPAN, Diagnostic, ExecutionError, RaisedError, SourceSpan, TypeResolutionError
from minimaple.spec_eval import SpecContext, SpecEvalMixin
from minimaple.typesys import NamedTypeTable, Record, Type, resolve
from minimaple.values import (
    BoolVal, FloatVal, IntVal, ListVal, ProcVal, RecordVal, StringVal, SymbolVal, UnevalVal, Value,
    VOID_VALUE, arith, compare, conforms, elements, index, make_set, negate, show, truth, values_equal,
)


@dataclass
class RunOptions:
    check_assertions: bool = True
    check_loop_specs: bool = False
    check_contracts: bool = False
    step_limit: int = 1_000_000
    quantifier_bound: int = 10_000
    record_iterations: bool = False

    def __post_init__(self):
        if self.step_limit < 1:
            raise ValueError("step_limit must be at least 1")
        if self.quantifier_bound < 1:
            raise ValueError("quantifier_bound must be at least 1")


# ---------------------------------------------------------------- state

class Frame:
    """Variables of one procedure activation; `parent` is the static link."""

    def __init__(self, parent: Optional['Frame'] = None, global_names=()):
        self.vars: dict[str, Value] = {}
        self.parent = parent
        self.global_names = frozenset(global_names)


class State:
    """Globals frame plus the stack of call frames. Updated in place by execution."""

    def __init__(self, globals_: Optional[dict[str, Value]] = None):
        self.globals: dict[str, Value] = dict(globals_ or {})
        self.frames: list[Frame] = []

    @property
    def current(self) -> Optional[Frame]:
        return self.frames[-1] if self.frames else None

    def lookup(self, name: str) -> Optional[Value]:
        frame = self.current
        while frame is not None:
            if name in frame.global_names:
                break
            if name in frame.vars:
                return frame.vars[name]
            frame = frame.parent
        return self.globals.get(name)

    def assign(self, name: str, value: Value) -> None:
        frame = self.current
        while frame is not None:
            if name in frame.global_names:
                break
            if name in frame.vars:
                frame.vars[name] = value
                return
            frame = frame.parent
        if frame is None and self.current is not None:
            # undeclared inside a procedure: becomes local to the activation
            self.current.vars[name] = value
            return
        self.globals[name] = value

    def view(self) -> dict[str, Value]:
        """Every visible name with the value a lookup would give."""
        names = set(self.globals)
        frame = self.current
        while frame is not None:
            names |= frame.vars.keys()
            frame = frame.parent
        return {n: self.lookup(n) for n in names}

    def snapshot(self):
        return dict(self.globals), [dict(f.vars) for f in self.frames]


@dataclass(frozen=True)
class ErrorState:
    """Absorbing error element of the state domain."""
    message: str
    label: Optional[str] = None
    span: Optional[SourceSpan] = None

    def to_exception(self) -> ExecutionError:
        return ExecutionError(self.message, self.label, self.span)


StateU = State | ErrorState


class Normal:
    def __repr__(self):
        return 'NORMAL'


NORMAL = Normal()


@dataclass(frozen=True)
class Returned:
    value: Value


@dataclass(frozen=True)
class TraceEvent:
    event: str              # assign, call, return, assert, invariant, variant, error
    span: SourceSpan
    detail: str
    depth: int = 0

    def format(self) -> str:
        return f"{self.span.line}:{self.span.column} {self.event} {self.detail}"

    def to_dict(self) -> dict:
        return {'event': self.event, 'span': self.span.to_dict(), 'detail': self.detail}


@dataclass(frozen=True)
class Outcome:
    """One evaluation of an assertion, contract clause, invariant or variant."""
    kind: str
    span: SourceSpan
    passed: bool
    label: Optional[str] = None


@dataclass
class IterationRecord:
    """The guard states t(k) and body states u(k) of one loop execution."""
    span: SourceSpan
    guard_states: list[dict] = field(default_factory=list)
    body_states: list[dict] = field(default_factory=list)


@dataclass
class RunResult:
    state: State
    error: Optional[ErrorState]
    diagnostics: list[Diagnostic]
    outcomes: list[Outcome]
    trace: list[TraceEvent]
    iterations: list[IterationRecord]
    steps: int = 0

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def final(self) -> StateU:
        return self.error or self.state


# ---------------------------------------------------------------- interpreter

class Interpreter(SpecEvalMixin):

    def __init__(self, options: Optional[RunOptions] = None, logger=None):
        self.options = options or RunOptions()
        self.logger = logger or logging.getLogger(__name__)
        self.reset()

    def reset(self) -> None:
        self.table = NamedTypeTable()
        self.defines: dict[str, ast.Define] = {}
        self.abstract: set[str] = set()
        self.steps = 0
        self.depth = 0
        self.trace: list[TraceEvent] = []
        self.outcomes: list[Outcome] = []
        self.iterations: list[IterationRecord] = []
        self.ret_types: list[Type] = []
        self._types: dict[int, Type] = {}

    def declare(self, declarations) -> None:
        for d in declarations:
            try:
                if isinstance(d, ast.NamedTypeDecl):
                    self.table.define(d.name, d.type_ast)
                elif isinstance(d, ast.AbstractTypeDecl):
                    self.table.declare_abstract(d.name)
            except TypeResolutionError as e:
                raise ExecutionError(str(e), span=d.span)
            if isinstance(d, ast.Define):
                self.defines[d.name] = d
            elif isinstance(d, ast.PredicateDecl):
                self.abstract.add(d.name)
            elif isinstance(d, ast.Assume):
                self.logger.debug("Assumption recorded, not evaluated")

    def resolve(self, type_ast: ast.TypeAst) -> Type:
        key = id(type_ast)
        if key not in self._types:
            try:
                self._types[key] = resolve(type_ast, self.table)
            except TypeResolutionError as e:
                raise ExecutionError(str(e))
        return self._types[key]

    def tick(self, span: SourceSpan) -> None:
        self.steps += 1
        if self.steps > self.options.step_limit:
            raise ExecutionError("step limit", span=span)

    def record(self, event: str, span: SourceSpan, detail: str) -> None:
        self.trace.append(TraceEvent(event, span, detail, self.depth))

    def fail(self, exc: ExecutionError) -> ErrorState:
        detail = exc.message if exc.label is None else f"{exc.message}: {exc.label}"
        self.record('error', exc.span or NO_SPAN, detail)
        return ErrorState(exc.message, exc.label, exc.span)

    # ------------------------------------------------------------ public, error-absorbing

    def eval_expr(self, state: StateU, e: ast.Expr):
        """Returns (state, value); value is None when the state became an error."""
        if isinstance(state, ErrorState):
            return state, None
        try:
            return state, self.evaluate(state, e)
        except ExecutionError as exc:
            return self.fail(exc), None

    def exec_command(self, state: StateU, cmd: ast.Command):
        if isinstance(state, ErrorState):
            return state, NORMAL
        try:
            return state, self.execute(state, cmd)
        except ExecutionError as exc:
            return self.fail(exc), NORMAL

    def exec_while(self, state: StateU, loop: ast.ForLoop):
        return self.exec_command(state, loop)

    def apply_procedure(self, proc: ProcVal, args: list[Value], state: StateU):
        if isinstance(state, ErrorState):
            return state, None
        try:
            return state, self.invoke(state, proc, list(args), proc.proc.span)
        except ExecutionError as exc:
            return self.fail(exc), None

    def run_program(self, program: ast.Program) -> RunResult:
        """Register declarations, then run the commands from the empty state."""
        self.reset()
        state = State()
        error: Optional[ErrorState] = None
        try:
            self.declare(program.declarations)
            self.run_sequence(state, program.commands)
        except ExecutionError as exc:
            error = self.fail(exc)
        except RecursionError:
            error = self.fail(ExecutionError("recursion too deep", span=program.span))
        if error is None:
            self.logger.info(f"✓ Program finished after {self.steps} steps")
            diagnostics = []
        else:
            self.logger.info(f"✗ Program stopped: {error.message}")
            diagnostics = [error.to_exception().to_diagnostic()]
        return RunResult(state, error, diagnostics, list(self.outcomes), list(self.trace),
                         list(self.iterations), self.steps)

    # ------------------------------------------------------------ expressions

    def evaluate(self, state: State, e: ast.Expr, spec: Optional[SpecContext] = None) -> Value:
        try:
            return self._evaluate(state, e, spec)
        except ExecutionError as exc:
            if exc.span is None:
                exc.span = e.span
            raise

    def _evaluate(self, state: State, e: ast.Expr, spec: Optional[SpecContext]) -> Value:
        if isinstance(e, ast.IntLit):
            return IntVal(e.value)
        if isinstance(e, ast.FloatLit):
            return FloatVal(e.value)
        if isinstance(e, ast.StringLit):
            return StringVal(e.value)
        if isinstance(e, ast.BoolLit):
            return BoolVal(e.value)
        if isinstance(e, ast.Name):
            if spec is not None and e.name in spec.bindings:
                return spec.bindings[e.name]
            value = state.lookup(e.name)
            return SymbolVal(e.name) if value is None else value
        if isinstance(e, ast.ListLit):
            return ListVal(tuple(self.evaluate(state, i, spec) for i in e.items))
        if isinstance(e, ast.SetLit):
            return make_set(self.evaluate(state, i, spec) for i in e.items)
        if isinstance(e, ast.Index):
            base = self.evaluate(state, e.base, spec)
            return index(base, self.evaluate(state, e.index, spec))
        if isinstance(e, ast.Call):
            return self.call(state, e, spec)
        if isinstance(e, ast.TypeTest):
            return BoolVal(conforms(self.evaluate(state, e.expr, spec), self.resolve(e.type_ast)))
        if isinstance(e, ast.Unary):
            operand = self.evaluate(state, e.operand, spec)
            if e.op == 'not':
                return BoolVal(not truth(operand, "operand of 'not'"))
            return negate(operand)
        if isinstance(e, ast.Binary):
            return self.binary(state, e, spec)
        if isinstance(e, ast.Uneval):
            return UnevalVal(e.expr)
        if isinstance(e, ast.ProcDef):
            return ProcVal(e, state.current)
        return self.evaluate_spec(state, e, spec)

    def binary(self, state: State, e: ast.Binary, spec: Optional[SpecContext]) -> Value:
        left = self.evaluate(state, e.left, spec)
        if e.op == 'and':
            if not truth(left, "operand of 'and'"):
                return BoolVal(False)
            return BoolVal(truth(self.evaluate(state, e.right, spec), "operand of 'and'"))
        if e.op == 'or':
            if truth(left, "operand of 'or'"):
                return BoolVal(True)
            return BoolVal(truth(self.evaluate(state, e.right, spec), "operand of 'or'"))
        right = self.evaluate(state, e.right, spec)
        if e.op == '=':
            return BoolVal(values_equal(left, right))
        if e.op == '<>':
            return BoolVal(not values_equal(left, right))
        if e.op in ('<', '<=', '>', '>='):
            return BoolVal(compare(e.op, left, right))
        return arith(e.op, left, right)

    def call(self, state: State, e: ast.Call, spec: Optional[SpecContext]) -> Value:
        target = state.lookup(e.callee)
        if target is None and e.callee in self.abstract:
            raise ExecutionError("abstract predicate not executable", label=e.callee)
        args = [self.evaluate(state, a, spec) for a in e.args]
        if isinstance(target, ProcVal):
            if spec is not None:
                raise ExecutionError("procedure call inside a specification", label=e.callee)
            return self.invoke(state, target, args, e.span)
        if target is None and e.callee in self.defines:
            return self.apply_define(state, self.defines[e.callee], args)
        if target is None and e.callee == 'nops':
            if len(args) != 1:
                raise ExecutionError("argument count mismatch", label="nops takes one argument")
            return IntVal(len(elements(args[0])))
        raise ExecutionError("calling a non-procedure value", label=e.callee)

    def invoke(self, state: State, proc: ProcVal, args: list[Value], span: SourceSpan) -> Value:
        p = proc.proc
        name = proc.name or 'proc'
        if len(args) != len(p.params):
            raise ExecutionError("argument count mismatch",
                                 label=f"{name} expects {len(p.params)}, got {len(args)}", span=span)
        for arg, param in zip(args, p.params):
            expected = self.resolve(param.type_ast)
            if not conforms(arg, expected):
                raise ExecutionError("argument type mismatch",
                                     label=f"{show(arg)} is not of type {expected}", span=span)

        frame = Frame(proc.scope, p.globals)
        frame.vars.update((param.name, arg) for param, arg in zip(p.params, args))
        self.record('call', span, f"{name}(" + ', '.join(show(a) for a in args) + ')')
        state.frames.append(frame)
        self.depth += 1
        self.ret_types.append(self.resolve(p.ret_type))
        try:
            for d in p.locals:
                frame.vars[d.name] = SymbolVal(d.name) if d.init is None else self.evaluate(state, d.init)
            contracts = self.options.check_contracts and p.spec is not None
            old = state.view() if contracts else None
            if contracts:
                self.check_clause('requires', state, p.spec.requires, SpecContext(old=old),
                                  "precondition violated", span)
            try:
                signal = self.run_sequence(state, p.body)
            except RaisedError:
                if contracts and p.spec.exceptional is not None:
                    self.check_clause('exception', state, p.spec.exceptional, SpecContext(old=old),
                                      "exceptional postcondition violated", span)
                raise
            result = signal.value if isinstance(signal, Returned) else VOID_VALUE
            if contracts:
                self.check_clause('ensures', state, p.spec.ensures, SpecContext(result=result, old=old),
                                  "postcondition violated", span)
        finally:
            self.ret_types.pop()
            self.depth -= 1
            state.frames.pop()
        self.record('return', span, f"{name} returns {show(result)}")
        return result

    def check_clause(self, kind: str, state: State, expr: ast.Expr, ctx: SpecContext,
                     message: str, span: SourceSpan, label: Optional[str] = None) -> None:
        passed = self.holds(state, expr, ctx, f"{kind} clause")
        self.outcomes.append(Outcome(kind, expr.span, passed, label))
        event = kind if kind in ('invariant', 'variant') else 'assert'
        self.record(event, expr.span, f"{kind} {'holds' if passed else 'violated'}")
        if not passed:
            raise ExecutionError(message, label=label, span=span)

    # ------------------------------------------------------------ commands

    def run_sequence(self, state: State, commands) -> Normal | Returned:
        for cmd in commands:
            signal = self.execute(state, cmd)
            if isinstance(signal, Returned):
                return signal
        return NORMAL

    def execute(self, state: State, cmd: ast.Command) -> Normal | Returned:
        self.tick(cmd.span)
        if isinstance(cmd, ast.MultiAssign):
            values = []
            for target, src in zip(cmd.targets, cmd.sources):
                if isinstance(src, ast.ProcDef):
                    values.append(ProcVal(src, state.current, target))
                else:
                    values.append(self.evaluate(state, src))
            for target, value in zip(cmd.targets, values):
                state.assign(target, value)
                self.record('assign', cmd.span, f"{target} := {show(value)}")
            return NORMAL
        if isinstance(cmd, ast.If):
            for cond, body in cmd.branches:
                if truth(self.evaluate(state, cond)):
                    return self.run_sequence(state, body)
            if cmd.else_body is not None:
                return self.run_sequence(state, cmd.else_body)
            return NORMAL
        if isinstance(cmd, ast.ForLoop):
            return self.iterate(state, cmd)
        if isinstance(cmd, ast.Return):
            value = VOID_VALUE if cmd.value is None else self.evaluate(state, cmd.value)
            return Returned(self.pack(value))
        if isinstance(cmd, ast.ErrorCmd):
            raise RaisedError(cmd.message, span=cmd.span)
        if isinstance(cmd, ast.ExprCmd):
            self.evaluate(state, cmd.expr)
            return NORMAL
        if isinstance(cmd, ast.Assert):
            if self.options.check_assertions:
                self.check_clause('assert', state, cmd.cond, SpecContext(), "assertion failed",
                                  cmd.span, cmd.label)
            return NORMAL
        raise ExecutionError(f"cannot execute {type(cmd).__name__}", span=cmd.span)

    def pack(self, value: Value) -> Value:
        """A list returned where a record type is declared becomes a record."""
        if self.ret_types and isinstance(self.ret_types[-1], Record) and isinstance(value, ListVal):
            if len(value.items) == len(self.ret_types[-1].fields):
                return RecordVal(value.items)
        return value

    def iterate(self, state: State, loop: ast.ForLoop) -> Normal | Returned:
        """Guard states t(k) and body states u(k): test the guard in t(k); the body
        turns t(k) into u(k) = t(k+1). For-clauses desugar to an initial assignment,
        a bound test conjoined in front of the while condition and a trailing increment."""
        step = stop = None
        if loop.var is not None:
            start = IntVal(1) if loop.start is None else self.evaluate(state, loop.start)
            step = IntVal(1) if loop.step is None else self.evaluate(state, loop.step)
            if loop.stop is not None:
                stop = self.evaluate(state, loop.stop)
            state.assign(loop.var, start)
        descending = step is not None and compare('<', step, IntVal(0))

        spec = loop.spec if self.options.check_loop_specs else None
        old = state.view()
        previous_variant: Optional[int] = None
        chain = IterationRecord(loop.span) if self.options.record_iterations else None
        if chain is not None:
            self.iterations.append(chain)

        while True:
            self.tick(loop.span)
            if spec is not None:
                now = state.view()
                self.check_clause('invariant', state, spec.invariant, SpecContext(old=old),
                                  "invariant violated", spec.span)
                old = now
            if chain is not None:
                chain.guard_states.append(state.view())
            if not self.guard(state, loop, stop, descending):
                return NORMAL
            if spec is not None:
                previous_variant = self.check_variant(state, spec, previous_variant)
            signal = self.run_sequence(state, loop.body)
            if chain is not None:
                chain.body_states.append(state.view())
            if isinstance(signal, Returned):
                return signal
            if loop.var is not None:
                state.assign(loop.var, arith('+', state.lookup(loop.var), step))

    def guard(self, state: State, loop: ast.ForLoop, stop: Optional[Value], descending: bool) -> bool:
        if loop.var is not None and stop is not None:
            current = state.lookup(loop.var)
            if not compare('>=' if descending else '<=', current, stop):
                return False
        if loop.cond is not None:
            return truth(self.evaluate(state, loop.cond), "loop guard")
        return True

    def check_variant(self, state: State, spec: ast.LoopSpec, previous: Optional[int]) -> int:
        value = self.evaluate(state, spec.decreases, SpecContext())
        passed = (isinstance(value, IntVal) and value.value >= 0
                  and (previous is None or value.value < previous))
        self.outcomes.append(Outcome('variant', spec.decreases.span, passed))
        self.record('variant', spec.decreases.span, f"decreases {show(value)}")
        if not passed:
            raise ExecutionError("variant violated", label=show(value), span=spec.span)
        return value.value


def run_program(program: ast.Program, options: Optional[RunOptions] = None, logger=None) -> RunResult:
    return Interpreter(options, logger).run_program(program)
