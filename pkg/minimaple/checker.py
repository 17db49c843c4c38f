"""Flow-sensitive type checker: expression, condition, command and procedure judgments."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from minimaple import nodes as ast
from minimaple.errors import Diagnostic, Severity, TypeResolutionError, error, info, warning
from minimaple.specs import BUILTINS, FunctionSig, SpecScope, SpecTypingMixin, boolean_like, integer_like
from minimaple.typesys import (
    ANYTHING, BOOLEAN, EMPTY_ENV, FLOAT, INTEGER, RATIONAL, STRING, SYMBOL, UNEVAL, VOID,
    Abstract, ListOf, NamedTypeTable, Procedure, Record, SetOf, Tagged, Type, TypeEnv, Union,
    can_specialize, combine, element_type, is_numeric, is_subtype, make_union, resolve, specialize,
    subtract, super_type, super_type_of,
)


class Context(Enum):
    GLOBAL = 'global'
    LOCAL = 'local'


class RetFlag(Enum):
    ARET = 'aret'
    NOT_ARET = 'not_aret'


@dataclass(frozen=True)
class CommandInfo:
    env_after: TypeEnv
    ret_types: frozenset = frozenset()
    exceptions: frozenset = frozenset()
    ret_flag: RetFlag = RetFlag.NOT_ARET


@dataclass
class Annotation:
    node: ast.Node
    env_before: TypeEnv
    info: CommandInfo
    branch_envs: tuple[TypeEnv, ...] = ()


@dataclass
class ProcAnnotation:
    name: str
    node: ast.ProcDef
    type: Procedure
    entry_env: TypeEnv
    info: CommandInfo


@dataclass
class CheckResult:
    program: ast.Program
    diagnostics: list[Diagnostic]
    env: TypeEnv
    info: CommandInfo
    annotations: dict[int, Annotation] = field(default_factory=dict)
    procedures: list[ProcAnnotation] = field(default_factory=list)

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity is Severity.ERROR]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity is Severity.WARNING]

    @property
    def ok(self) -> bool:
        return not self.errors

    def annotation(self, node: ast.Node) -> Annotation:
        return self.annotations[id(node)]

    def at_line(self, line: int) -> list[Annotation]:
        """Annotations of the commands starting on a source line, outermost first."""
        return [a for a in self.annotations.values() if a.node.span.line == line]


def contains_abstract(t: Type) -> bool:
    if isinstance(t, Abstract):
        return True
    if isinstance(t, (ListOf, SetOf)):
        return contains_abstract(t.elem)
    if isinstance(t, (Record,)):
        return any(contains_abstract(f) for f in t.fields)
    if isinstance(t, Procedure):
        return contains_abstract(t.ret) or any(contains_abstract(a) for a in t.args)
    if isinstance(t, (Tagged,)):
        return any(contains_abstract(a) for a in t.args)
    if isinstance(t, Union):
        return any(contains_abstract(m) for m in t.members)
    return False


def used_names(nodes) -> set[str]:
    names: set[str] = set()
    for root in nodes:
        for n in ast.walk(root):
            if isinstance(n, ast.Name):
                names.add(n.name)
            elif isinstance(n, ast.MultiAssign):
                names.update(n.targets)
            elif isinstance(n, ast.ForLoop) and n.var is not None:
                names.add(n.var)
            elif isinstance(n, ast.OldRef):
                names.add(n.name)
            elif isinstance(n, ast.Call):
                names.add(n.callee)
    return names


class TypeChecker(SpecTypingMixin):
    """Checks one program at a time; instances can be reused."""

    def __init__(self, logger=None):
        self.logger = logger or logging.getLogger(__name__)
        self.reset()

    def reset(self) -> None:
        self.diagnostics: list[Diagnostic] = []
        self.annotations: dict[int, Annotation] = {}
        self.procedures: list[ProcAnnotation] = []
        self.table = NamedTypeTable()
        self.functions: dict[str, FunctionSig] = dict(BUILTINS)
        self.proc_exceptions: dict[str, frozenset] = {}
        self.context = Context.GLOBAL
        self.ret_stack: list[Type] = []
        self.visible_procs: dict[str, Type] = {}
        self.spec: Optional[SpecScope] = None
        self.raised: set = set()

    # ------------------------------------------------------------ entry points

    def check_program(self, program: ast.Program) -> CheckResult:
        """Check declarations, then the command sequence under (empty env, global, no assignables)."""
        self.reset()
        self.declare(program.declarations)
        seq = self.check_sequence(EMPTY_ENV, Context.GLOBAL, frozenset(), program.commands)
        diagnostics = sorted(self.diagnostics, key=Diagnostic.sort_key)
        errors = sum(1 for d in diagnostics if d.is_error)
        if errors:
            self.logger.info(f"✗ Type checking found {errors} error(s)")
        else:
            self.logger.info(f"✓ Type checking passed ({len(diagnostics)} diagnostic(s))")
        return CheckResult(program, diagnostics, seq.env_after, seq,
                           dict(self.annotations), list(self.procedures))

    def resolve_type(self, type_ast: ast.TypeAst, node: ast.Node) -> Type:
        try:
            return resolve(type_ast, self.table)
        except TypeResolutionError as e:
            self.diagnostics.append(error('unknown-type', str(e), node.span))
            return ANYTHING

    # ------------------------------------------------------------ expressions

    def check_expr(self, pi: TypeEnv, e: ast.Expr, expected: Optional[Type] = None) -> Type:
        if isinstance(e, ast.IntLit):
            return INTEGER
        if isinstance(e, ast.FloatLit):
            return FLOAT
        if isinstance(e, ast.StringLit):
            return STRING
        if isinstance(e, ast.BoolLit):
            return BOOLEAN
        if isinstance(e, ast.Name):
            return self.lookup(pi, e)
        if isinstance(e, ast.ListLit):
            return self.check_list_literal(pi, e, expected)
        if isinstance(e, ast.SetLit):
            elem = expected.elem if isinstance(expected, SetOf) else None
            types = [self.check_expr(pi, i, elem) for i in e.items]
            if not types:
                return expected if isinstance(expected, SetOf) else SetOf(ANYTHING)
            return SetOf(super_type_of(types))
        if isinstance(e, ast.Index):
            return self.check_index(pi, e)
        if isinstance(e, ast.Call):
            return self.check_call(pi, e)
        if isinstance(e, ast.TypeTest):
            self.check_expr(pi, e.expr)
            self.resolve_type(e.type_ast, e)
            return BOOLEAN
        if isinstance(e, ast.Unary):
            if e.op == 'not':
                self.check_bool_expr(pi, e, "operand of 'not'")
                return BOOLEAN
            t = self.check_expr(pi, e.operand)
            if t == ANYTHING or is_numeric(t):
                return t
            self.diagnostics.append(error('non-numeric', f"cannot negate a value of type {t}", e.span))
            return ANYTHING
        if isinstance(e, ast.Binary):
            return self.check_binary(pi, e)
        if isinstance(e, ast.Uneval):
            return UNEVAL
        if isinstance(e, ast.ProcDef):
            return self.check_procedure(pi, e)
        return self.check_spec_node(pi, e)

    def lookup(self, pi: TypeEnv, e: ast.Name) -> Type:
        if e.name in pi:
            return pi[e.name]
        if self.spec is not None and self.spec.free_names:
            return ANYTHING
        if self.context is Context.GLOBAL:
            return SYMBOL
        if e.name in self.visible_procs:
            return self.visible_procs[e.name]
        self.diagnostics.append(warning(
            'undeclared-name', f"'{e.name}' is neither a parameter nor declared local or global", e.span))
        return ANYTHING

    def check_list_literal(self, pi: TypeEnv, e: ast.ListLit, expected: Optional[Type]) -> Type:
        candidates = []
        if isinstance(expected, Record):
            candidates = [expected]
        elif isinstance(expected, Union):
            candidates = [m for m in expected.members if isinstance(m, Record)]
        for rec in candidates:
            if len(rec.fields) != len(e.items):
                continue
            mark = len(self.diagnostics)
            types = [self.check_expr(pi, i, f) for i, f in zip(e.items, rec.fields)]
            if all(is_subtype(t, f) for t, f in zip(types, rec.fields)):
                return Record(tuple(types))
            del self.diagnostics[mark:]
        elem = None
        if isinstance(expected, ListOf):
            elem = expected.elem
        types = [self.check_expr(pi, i, elem) for i in e.items]
        if not types:
            return expected if isinstance(expected, (ListOf, Record)) else ListOf(ANYTHING)
        return ListOf(super_type_of(types))

    def check_index(self, pi: TypeEnv, e: ast.Index) -> Type:
        base = self.check_expr(pi, e.base)
        idx = self.check_expr(pi, e.index)
        if not integer_like(idx):
            self.diagnostics.append(error('bad-index', f"index must be an integer, found {idx}", e.index.span))
        if base == ANYTHING:
            return ANYTHING
        if isinstance(base, Record):
            if isinstance(e.index, ast.IntLit):
                k = e.index.value
                if 1 <= k <= len(base.fields):
                    return base.fields[k - 1]
                self.diagnostics.append(error(
                    'bad-index', f"index {k} is out of range for {base}", e.index.span))
                return ANYTHING
            return super_type_of(base.fields)
        elem = element_type(base) if not isinstance(base, SetOf) else None
        if elem is not None:
            return elem
        self.diagnostics.append(error('not-indexable', f"cannot index a value of type {base}", e.span))
        return ANYTHING

    def check_args(self, pi: TypeEnv, e: ast.Call, params: tuple[Type, ...], lenient: bool) -> None:
        if len(e.args) != len(params):
            self.diagnostics.append(error(
                'argument-mismatch', f"'{e.callee}' expects {len(params)} argument(s), got {len(e.args)}",
                e.span))
            for arg in e.args:
                self.check_expr(pi, arg)
            return
        for arg, param in zip(e.args, params):
            at = self.check_expr(pi, arg, param)
            if is_subtype(at, param) or (lenient and at == ANYTHING):
                continue
            self.diagnostics.append(error(
                'argument-mismatch', f"argument of type {at} does not match parameter type {param}", arg.span))

    def check_call(self, pi: TypeEnv, e: ast.Call) -> Type:
        callee: Optional[Type] = None
        if e.callee in pi:
            callee = pi[e.callee]
        elif e.callee in self.functions:
            return self.check_function_call(pi, e, self.functions[e.callee])
        elif self.context is Context.LOCAL and e.callee in self.visible_procs:
            callee = self.visible_procs[e.callee]
        if callee is None:
            self.diagnostics.append(warning('undeclared-name', f"call of unknown procedure '{e.callee}'", e.span))
            for arg in e.args:
                self.check_expr(pi, arg)
            return ANYTHING
        if isinstance(callee, Procedure):
            self.check_args(pi, e, callee.args, lenient=False)
            self.raised |= self.proc_exceptions.get(e.callee, frozenset())
            return callee.ret
        for arg in e.args:
            self.check_expr(pi, arg)
        if callee == ANYTHING:
            return ANYTHING
        self.diagnostics.append(error('not-callable', f"'{e.callee}' has type {callee} and cannot be called", e.span))
        return ANYTHING

    def check_function_call(self, pi: TypeEnv, e: ast.Call, sig: FunctionSig) -> Type:
        if not sig.executable and self.spec is None:
            self.diagnostics.append(error(
                'spec-only', f"'{e.callee}' is declared for specifications and cannot be executed", e.span))
        if sig.name == 'nops' and sig.kind == 'builtin':
            if len(e.args) != 1:
                self.check_args(pi, e, sig.params, lenient=True)
                return INTEGER
            at = self.check_expr(pi, e.args[0])
            if not (at == ANYTHING or is_subtype(at, make_union(
                    (ListOf(ANYTHING), SetOf(ANYTHING)))) or isinstance(at, (Record, Tagged))):
                self.diagnostics.append(error(
                    'argument-mismatch', f"nops needs a list, set or record, found {at}", e.args[0].span))
            return INTEGER
        self.check_args(pi, e, sig.params, lenient=True)
        return sig.result

    def check_binary(self, pi: TypeEnv, e: ast.Binary) -> Type:
        op = e.op
        if op in ('and', 'or'):
            self.check_bool_expr(pi, e, f"operand of '{op}'")
            return BOOLEAN
        left = self.check_expr(pi, e.left)
        right = self.check_expr(pi, e.right)
        if op in ('=', '<>'):
            return BOOLEAN
        for side, t in ((e.left, left), (e.right, right)):
            if t != ANYTHING and not is_numeric(t):
                self.diagnostics.append(error(
                    'non-numeric', f"operator '{op}' needs numeric operands, found {t}", side.span))
                return BOOLEAN if op in ('<', '<=', '>', '>=') else ANYTHING
        if op in ('<', '<=', '>', '>='):
            return BOOLEAN
        if ANYTHING in (left, right):
            return ANYTHING
        if op == 'mod':
            if not (is_subtype(left, INTEGER) and is_subtype(right, INTEGER)):
                self.diagnostics.append(error('non-numeric', "mod needs integer operands", e.span))
            return INTEGER
        if op == '/' and is_subtype(left, RATIONAL) and is_subtype(right, RATIONAL):
            return RATIONAL
        return super_type(left, right)

    # ------------------------------------------------------------ conditions

    def check_bool_expr(self, pi: TypeEnv, e: ast.Expr, what: str = "condition"):
        """Check a condition; returns (then-delta, else-delta) narrowing maps."""
        if isinstance(e, ast.TypeTest):
            return self.check_type_test(pi, e)
        if isinstance(e, ast.Unary) and e.op == 'not':
            then_delta, else_delta = self.check_bool_expr(pi, e.operand, what)
            return else_delta, then_delta
        if isinstance(e, ast.Binary) and e.op == 'and':
            left_then, _ = self.check_bool_expr(pi, e.left, what)
            right_then, _ = self.check_bool_expr(specialize(pi, left_then), e.right, what)
            return {**left_then, **right_then}, {}
        if isinstance(e, ast.Binary) and e.op == 'or':
            _, left_else = self.check_bool_expr(pi, e.left, what)
            _, right_else = self.check_bool_expr(specialize(pi, left_else), e.right, what)
            return {}, {**left_else, **right_else}
        if isinstance(e, (ast.Implies, ast.Equivalent, ast.Forall, ast.Exists)):
            self.check_spec_node(pi, e)
            return {}, {}
        t = self.check_expr(pi, e)
        if not boolean_like(t):
            self.diagnostics.append(error('non-boolean', f"{what} must be boolean, found {t}", e.span))
        return {}, {}

    def check_type_test(self, pi: TypeEnv, e: ast.TypeTest):
        subject = self.check_expr(pi, e.expr)
        tested = self.resolve_type(e.type_ast, e)
        if not isinstance(e.expr, ast.Name) or e.expr.name not in pi:
            if self.spec is None:
                self.diagnostics.append(info(
                    'no-narrowing', f"type test on {type(e.expr).__name__.lower()} does not narrow", e.span))
            return {}, {}
        name = e.expr.name
        quiet = self.spec is not None
        if is_subtype(subject, tested):
            if not quiet:
                self.diagnostics.append(warning(
                    'redundant-test', f"type({name},{tested}) is always true for {name}:{subject}", e.span))
            return {}, {}
        if not is_subtype(tested, subject):
            if not self.overlaps(subject, tested):
                if not quiet:
                    self.diagnostics.append(warning(
                        'redundant-test', f"type({name},{tested}) is always false for {name}:{subject}", e.span))
            return {}, {}
        rest = subtract(subject, tested)
        return {name: tested}, ({} if rest is None else {name: rest})

    @staticmethod
    def overlaps(a: Type, b: Type) -> bool:
        left = a.members if isinstance(a, Union) else (a,)
        right = b.members if isinstance(b, Union) else (b,)
        return any(is_subtype(x, y) or is_subtype(y, x) for x in left for y in right)

    # ------------------------------------------------------------ commands

    def annotate(self, node: ast.Node, env: TypeEnv, result: CommandInfo, branches=()) -> None:
        self.annotations[id(node)] = Annotation(node, env, result, tuple(branches))

    def check_sequence(self, pi: TypeEnv, ctx: Context, asgn: frozenset,
                       commands: tuple[ast.Command, ...]) -> CommandInfo:
        env = pi
        rets: set = set()
        excs: set = set()
        flag = RetFlag.NOT_ARET
        warned = False
        for cmd in commands:
            if flag is RetFlag.ARET and not warned:
                self.diagnostics.append(warning('unreachable', "command can never be executed", cmd.span))
                warned = True
            result = self.check_command(env, ctx, asgn, cmd)
            env = result.env_after
            rets |= result.ret_types
            excs |= result.exceptions
            if result.ret_flag is RetFlag.ARET:
                flag = RetFlag.ARET
        return CommandInfo(env, frozenset(rets), frozenset(excs), flag)

    def check_command(self, pi: TypeEnv, ctx: Context, asgn: frozenset, cmd: ast.Command) -> CommandInfo:
        saved_ctx, saved_raised = self.context, self.raised
        self.context, self.raised = ctx, set()
        branches: list[TypeEnv] = []
        try:
            if isinstance(cmd, ast.MultiAssign):
                result = self.check_assign(pi, ctx, asgn, cmd)
            elif isinstance(cmd, ast.If):
                result = self.check_if(pi, ctx, asgn, cmd, branches)
            elif isinstance(cmd, ast.ForLoop):
                result = self.check_loop(pi, ctx, asgn, cmd)
            elif isinstance(cmd, ast.Return):
                result = self.check_return(pi, cmd)
            elif isinstance(cmd, ast.ErrorCmd):
                result = CommandInfo(pi, frozenset(), frozenset({cmd.message}), RetFlag.ARET)
            elif isinstance(cmd, ast.ExprCmd):
                self.check_expr(pi, cmd.expr)
                result = CommandInfo(pi)
            elif isinstance(cmd, ast.Assert):
                self.check_spec(pi, cmd)
                result = CommandInfo(pi)
            else:
                raise TypeError(f"not a command: {cmd!r}")
            if self.raised:
                result = replace(result, exceptions=result.exceptions | frozenset(self.raised))
        finally:
            self.context, self.raised = saved_ctx, saved_raised
        self.annotate(cmd, pi, result, branches)
        return result

    def check_assign(self, pi: TypeEnv, ctx: Context, asgn: frozenset, cmd: ast.MultiAssign) -> CommandInfo:
        types = []
        for target, src in zip(cmd.targets, cmd.sources):
            if isinstance(src, ast.ProcDef):
                types.append(self.check_procedure(pi, src, target))
            else:
                expected = pi.get(target) if ctx is Context.LOCAL else None
                types.append(self.check_expr(pi, src, expected))
        env = pi
        for target, t, src in zip(cmd.targets, types, cmd.sources):
            if ctx is Context.GLOBAL:
                env = env.bind(target, t)
                continue
            if target not in asgn:
                self.diagnostics.append(error(
                    'not-assignable', f"'{target}' is not a parameter, local or global of this scope", src.span))
                continue
            current = env.get(target)
            if current is None:
                env = env.bind(target, t)
            elif is_subtype(t, current):
                env = specialize(env, {target: t})
            else:
                self.diagnostics.append(error(
                    'narrow-conflict-assign',
                    f"new value of '{target}' has type {t}, which is not a subtype of {current}", src.span))
        return CommandInfo(env)

    def check_if(self, pi: TypeEnv, ctx: Context, asgn: frozenset, cmd: ast.If,
                 branches: list[TypeEnv]) -> CommandInfo:
        else_env = pi
        outcomes: list[CommandInfo] = []
        for cond, body in cmd.branches:
            then_delta, else_delta = self.check_bool_expr(pi, cond)
            if can_specialize(pi, then_delta):
                branch_env = specialize(pi, then_delta)
            else:
                self.diagnostics.append(error(
                    'narrow-conflict', "condition conflicts with the known type information", cond.span))
                branch_env = pi
            if can_specialize(else_env, else_delta):
                else_env = specialize(else_env, else_delta)
            branches.append(branch_env)
            outcomes.append(self.check_sequence(branch_env, ctx, asgn, body))
        if cmd.else_body is not None:
            branches.append(else_env)
            outcomes.append(self.check_sequence(else_env, ctx, asgn, cmd.else_body))
            all_return = all(o.ret_flag is RetFlag.ARET for o in outcomes)
            merged = outcomes[0].env_after
            rest = outcomes[1:]
        else:
            all_return = False
            merged = else_env
            rest = outcomes
        for o in rest:
            merged = combine(merged, o.env_after)
        rets = frozenset().union(*(o.ret_types for o in outcomes))
        excs = frozenset().union(*(o.exceptions for o in outcomes))
        flag = RetFlag.ARET if all_return else RetFlag.NOT_ARET
        return CommandInfo(merged.restrict(pi.keys()), rets, excs, flag)

    def check_loop(self, pi: TypeEnv, ctx: Context, asgn: frozenset, loop: ast.ForLoop) -> CommandInfo:
        """The body is checked once; the environment after the loop is the one before it."""
        body_env = pi
        if loop.var is not None:
            range_types = []
            for clause in (loop.start, loop.step, loop.stop):
                if clause is None:
                    continue
                t = self.check_expr(pi, clause)
                if t != ANYTHING and not is_numeric(t):
                    self.diagnostics.append(error('non-numeric', f"loop range must be numeric, found {t}", clause.span))
                    t = ANYTHING
                range_types.append(t)
            if loop.start is None or loop.step is None:
                range_types.append(INTEGER)
            body_env = pi.bind(loop.var, super_type_of(range_types))
        if loop.cond is not None:
            then_delta, _ = self.check_bool_expr(body_env, loop.cond, "loop condition")
            body_env = specialize(body_env, then_delta)
        if loop.spec is not None:
            self.check_spec(body_env, loop.spec)
        body_asgn = asgn if ctx is Context.LOCAL else frozenset(pi.keys())
        if loop.var is not None:
            body_asgn = body_asgn | {loop.var}
        body = self.check_sequence(body_env, Context.LOCAL, body_asgn, loop.body)
        return CommandInfo(pi, body.ret_types, body.exceptions, RetFlag.NOT_ARET)

    def check_return(self, pi: TypeEnv, cmd: ast.Return) -> CommandInfo:
        if not self.ret_stack:
            self.diagnostics.append(error('return-outside-proc', "return outside of a procedure", cmd.span))
            if cmd.value is not None:
                self.check_expr(pi, cmd.value)
            return CommandInfo(pi, frozenset(), frozenset(), RetFlag.ARET)
        declared = self.ret_stack[-1]
        t = VOID if cmd.value is None else self.check_expr(pi, cmd.value, declared)
        if not is_subtype(t, declared):
            self.diagnostics.append(error(
                'return-mismatch', f"returns {t} but the procedure is declared to return {declared}", cmd.span))
        return CommandInfo(pi, frozenset({t}), frozenset(), RetFlag.ARET)

    # ------------------------------------------------------------ procedures

    def check_procedure(self, pi: TypeEnv, p: ast.ProcDef, name: Optional[str] = None) -> Procedure:
        params = [(x.name, self.resolve_type(x.type_ast, x)) for x in p.params]
        ret = self.resolve_type(p.ret_type, p)
        proc_type = Procedure(ret, tuple(t for _, t in params))
        if contains_abstract(proc_type):
            self.diagnostics.append(error(
                'abstract-in-program', "abstract types exist only in specifications", p.span))

        saved = (self.context, self.visible_procs, self.raised)
        self.context = Context.LOCAL
        self.visible_procs = dict(self.visible_procs)
        self.visible_procs.update((k, v) for k, v in pi.items() if isinstance(v, Procedure))
        if name is not None:
            self.visible_procs[name] = proc_type
        self.raised = set()
        try:
            env = TypeEnv(params)
            declared = {n for n, _ in params}
            for d in p.locals:
                if d.name in declared:
                    self.diagnostics.append(warning(
                        'duplicate-declaration', f"'{d.name}' is declared more than once", d.span))
                    continue
                declared.add(d.name)
                local_type = SYMBOL if d.type_ast is None else self.resolve_type(d.type_ast, d)
                if d.type_ast is not None and contains_abstract(local_type):
                    self.diagnostics.append(error(
                        'abstract-in-program', "abstract types exist only in specifications", d.span))
                if d.init is not None:
                    init_type = self.check_expr(TypeEnv(params), d.init,
                                                local_type if d.type_ast is not None else None)
                    if d.type_ast is None:
                        local_type = init_type
                    elif not is_subtype(init_type, local_type):
                        self.diagnostics.append(error(
                            'bad-init', f"initial value of '{d.name}' has type {init_type}, "
                                        f"declared {local_type}", d.init.span))
                env = env.bind(d.name, local_type)
            for g in p.globals:
                if g in declared:
                    self.diagnostics.append(warning(
                        'duplicate-declaration', f"'{g}' is declared both global and local", p.span))
                    continue
                declared.add(g)
                env = env.bind(g, ANYTHING)

            if p.spec is not None:
                self.check_spec(env, p.spec, ret, p)

            self.ret_stack.append(ret)
            try:
                body = self.check_sequence(env, Context.LOCAL, frozenset(declared), p.body)
            finally:
                self.ret_stack.pop()
            if ret != VOID and body.ret_flag is not RetFlag.ARET:
                self.diagnostics.append(error(
                    'missing-return', f"procedure declared to return {ret} may end without return", p.span))

            used = used_names(p.body) | (used_names([p.spec]) if p.spec is not None else set())
            used |= used_names(d.init for d in p.locals if d.init is not None)
            for d in p.locals:
                if d.name not in used:
                    self.diagnostics.append(warning(
                        'unused-variable', f"local '{d.name}' is declared but not used", d.span))
            for g in p.globals:
                if g not in used:
                    self.diagnostics.append(warning(
                        'unused-variable', f"global '{g}' is declared but not used", p.span))
            raised = frozenset(body.exceptions | self.raised)
        finally:
            self.context, self.visible_procs, self.raised = saved
        if name is not None:
            self.proc_exceptions[name] = raised
        self.procedures.append(ProcAnnotation(name or '<anonymous>', p, proc_type, env,
                                              replace(body, exceptions=raised)))
        return proc_type


def check_program(program: ast.Program, logger=None) -> CheckResult:
    return TypeChecker(logger).check_program(program)
