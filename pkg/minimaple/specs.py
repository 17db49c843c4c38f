"""Well-typedness of specification declarations, contracts, loop specs and assertions.

Mixed into TypeChecker; every method here relies on its expression and
boolean-expression checking.
"""
from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
from typing import Optional

from minimaple import nodes as ast
from minimaple.errors import Diagnostic, TypeResolutionError, error
from minimaple.typesys import (
    ANYTHING, BOOLEAN, INTEGER, ListOf, Record, Type, TypeEnv,
    element_type, is_numeric, is_subtype, specialize, super_type_of,
)


@dataclass
class FunctionSig:
    """A callable known from declarations: define'd functions, predicates, builtins."""
    name: str
    params: tuple[Type, ...]
    result: Type
    kind: str                       # builtin, define, predicate, function

    @property
    def executable(self) -> bool:
        return self.kind in ('builtin', 'define')


BUILTINS = {
    'nops': FunctionSig('nops', (ANYTHING,), INTEGER, 'builtin'),
}


@dataclass
class SpecScope:
    clause: str
    result_type: Optional[Type] = None
    free_names: bool = False        # unbound names stand for anything (assume)


def boolean_like(t: Type) -> bool:
    return t == ANYTHING or is_subtype(t, BOOLEAN)


def integer_like(t: Type) -> bool:
    return t == ANYTHING or is_subtype(t, INTEGER)


class SpecTypingMixin:

    @contextmanager
    def spec_scope(self, scope: SpecScope):
        saved = self.spec
        self.spec = scope
        try:
            yield scope
        finally:
            self.spec = saved

    def expect_spec_boolean(self, pi: TypeEnv, expr: ast.Expr, scope: SpecScope, what: str) -> None:
        with self.spec_scope(scope):
            self.check_bool_expr(pi, expr, what)

    def check_spec(self, env: TypeEnv, spec, result_type: Optional[Type] = None,
                   proc: Optional[ast.ProcDef] = None) -> list[Diagnostic]:
        """Type-check one spec construct under `env`; returns the diagnostics it produced."""
        start = len(self.diagnostics)
        if isinstance(spec, ast.ProcSpec):
            self.expect_spec_boolean(env, spec.requires, SpecScope('requires'), "requires clause")
            self.expect_spec_boolean(env, spec.ensures, SpecScope('ensures', result_type), "ensures clause")
            if spec.exceptional is not None:
                self.expect_spec_boolean(env, spec.exceptional, SpecScope('exception'), "exception clause")
            declared = set(proc.globals) if proc is not None else set()
            for name in spec.globals:
                if name not in declared:
                    self.diagnostics.append(error(
                        'spec-global', f"'{name}' is listed in the specification but not declared global",
                        spec.span))
        elif isinstance(spec, ast.LoopSpec):
            self.expect_spec_boolean(env, spec.invariant, SpecScope('invariant'), "loop invariant")
            with self.spec_scope(SpecScope('decreases')):
                t = self.check_expr(env, spec.decreases)
            if not integer_like(t):
                self.diagnostics.append(error(
                    'bad-variant', f"decreases term must be integer, found {t}", spec.decreases.span))
        elif isinstance(spec, ast.Assert):
            self.expect_spec_boolean(env, spec.cond, SpecScope('assert'), "assertion")
        elif isinstance(spec, ast.Assume):
            self.expect_spec_boolean(env, spec.expr, SpecScope('assume', free_names=True), "assumption")
        elif isinstance(spec, ast.Define):
            self.check_define(spec)
        return self.diagnostics[start:]

    # ------------------------------------------------------------ declarations

    def declare(self, declarations: tuple[ast.Declaration, ...]) -> None:
        for d in declarations:
            try:
                if isinstance(d, ast.NamedTypeDecl):
                    self.table.define(d.name, d.type_ast)
                elif isinstance(d, ast.AbstractTypeDecl):
                    self.table.declare_abstract(d.name)
            except TypeResolutionError as e:
                self.diagnostics.append(error('type-decl', str(e), d.span))
        for d in declarations:
            if isinstance(d, ast.NamedTypeDecl):
                self.resolve_type(d.type_ast, d)

        for d in declarations:
            if isinstance(d, (ast.PredicateDecl, ast.Define)) and d.name in self.functions:
                self.diagnostics.append(error('redefined', f"'{d.name}' is already declared", d.span))
                continue
            if isinstance(d, ast.PredicateDecl):
                params = tuple(ANYTHING if p.type_ast is None else self.resolve_type(p.type_ast, p)
                               for p in d.params)
                if d.result is None:
                    self.functions[d.name] = FunctionSig(d.name, params, BOOLEAN, 'predicate')
                else:
                    self.functions[d.name] = FunctionSig(
                        d.name, params, self.resolve_type(d.result, d), 'function')
            elif isinstance(d, ast.Define):
                self.functions[d.name] = self.define_signature(d)

        for d in declarations:
            if isinstance(d, (ast.Define, ast.Assume)):
                self.check_spec(TypeEnv(), d)
        self.logger.debug(f"Declared {len(self.functions) - len(BUILTINS)} spec functions")

    def rule_env(self, pattern: ast.Call) -> TypeEnv:
        return TypeEnv((a.name, self.resolve_type(a.type_ast, a))
                       for a in pattern.args if isinstance(a, ast.TypedVar))

    def define_signature(self, d: ast.Define) -> FunctionSig:
        arity = len(d.rules[0][0].args)
        columns: list[list[Type]] = [[] for _ in range(arity)]
        for pattern, _ in d.rules:
            if len(pattern.args) != arity:
                self.diagnostics.append(error(
                    'define-arity', f"all rules of '{d.name}' must take {arity} argument(s)", pattern.span))
                continue
            for i, arg in enumerate(pattern.args):
                if isinstance(arg, ast.TypedVar):
                    columns[i].append(self.resolve_type(arg.type_ast, arg))
                else:
                    with self.spec_scope(SpecScope('define')):
                        columns[i].append(self.check_expr(TypeEnv(), arg))
        params = tuple(super_type_of(col) for col in columns)
        return FunctionSig(d.name, params, ANYTHING, 'define')

    def check_define(self, d: ast.Define) -> None:
        """Type the rule bodies; the result type is the least fixed point reachable
        from the non-recursive rules, or anything when none settles."""
        sig = self.functions.get(d.name)
        if sig is None or sig.kind != 'define':
            return
        rules = [(p, b) for p, b in d.rules if len(p.args) == len(sig.params)]

        def body_types() -> list[Type]:
            with self.spec_scope(SpecScope('define')):
                return [self.check_expr(self.rule_env(p), b) for p, b in rules]

        def calls_self(body: ast.Expr) -> bool:
            return any(isinstance(n, ast.Call) and n.callee == d.name for n in ast.walk(body))

        mark = len(self.diagnostics)
        sig.result = ANYTHING
        with self.spec_scope(SpecScope('define')):
            base = [self.check_expr(self.rule_env(p), b) for p, b in rules if not calls_self(b)]
        assumed = super_type_of(base)
        for _ in range(3):
            sig.result = assumed
            found = super_type_of(body_types())
            if found == assumed:
                break
            assumed = found
        else:
            assumed = ANYTHING
        del self.diagnostics[mark:]
        sig.result = assumed
        body_types()

    # ------------------------------------------------------------ spec-only expressions

    def check_spec_node(self, pi: TypeEnv, e: ast.Expr) -> Type:
        if isinstance(e, ast.Implies):
            then_delta, _ = self.check_bool_expr(pi, e.left, "implication")
            self.check_bool_expr(specialize(pi, then_delta), e.right, "implication")
            return BOOLEAN
        if isinstance(e, ast.Equivalent):
            self.check_bool_expr(pi, e.left, "equivalence")
            self.check_bool_expr(pi, e.right, "equivalence")
            return BOOLEAN
        if isinstance(e, (ast.Forall, ast.Exists)):
            bound = self.resolve_type(e.type_ast, e)
            self.check_bool_expr(pi.bind(e.var, bound), e.body, "quantifier body")
            return BOOLEAN
        if isinstance(e, ast.NumQuant):
            return self.check_num_quant(pi, e)
        if isinstance(e, ast.ResultRef):
            if self.spec is None or self.spec.result_type is None:
                self.diagnostics.append(error('misplaced-result', "RESULT outside an ensures clause", e.span))
                return ANYTHING
            return self.spec.result_type
        if isinstance(e, ast.OldRef):
            if e.name not in pi:
                self.diagnostics.append(error('unknown-name', f"OLD refers to unknown name '{e.name}'", e.span))
                return ANYTHING
            return pi[e.name]
        if isinstance(e, ast.TypedVar):
            return self.resolve_type(e.type_ast, e)
        raise TypeError(f"not a spec node: {e!r}")

    def check_num_quant(self, pi: TypeEnv, e: ast.NumQuant) -> Type:
        rng = e.range
        if isinstance(rng, ast.InRange):
            ct = self.check_expr(pi, rng.collection)
            if ct == ANYTHING:
                et = ANYTHING
            elif isinstance(ct, Record):
                et = super_type_of(ct.fields)
            else:
                et = element_type(ct)
            if et is None:
                self.diagnostics.append(error(
                    'bad-range', f"'{rng.var} in ...' needs a list or set, found {ct}", rng.span))
                et = ANYTHING
        else:
            for bound in (rng.low, rng.high):
                bt = self.check_expr(pi, bound)
                if not integer_like(bt):
                    self.diagnostics.append(error(
                        'bad-range', f"range bounds must be integers, found {bt}", bound.span))
            et = INTEGER
        inner = pi.bind(rng.var, et)
        if e.filter is not None:
            then_delta, _ = self.check_bool_expr(inner, e.filter, "quantifier filter")
            inner = specialize(inner, then_delta)
        tt = self.check_expr(inner, e.term)
        if e.kind == 'seq':
            return ListOf(tt)
        if tt != ANYTHING and not is_numeric(tt):
            self.diagnostics.append(error(
                'non-numeric', f"{e.kind} needs a numeric term, found {tt}", e.term.span))
            return ANYTHING
        return tt
