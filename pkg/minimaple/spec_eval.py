"""Runtime evaluation of specification expressions.

Mixed into Interpreter. Spec evaluation reads the state but never writes it,
and procedure calls are refused inside it.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from minimaple import nodes as ast
from minimaple.errors import ExecutionError
from minimaple.typesys import INTEGER
from minimaple.values import (
    TRUE, BoolVal, IntVal, ListVal, Value,
    arith, compare, conforms, elements, truth, values_equal,
)


@dataclass
class SpecContext:
    """Binders introduced by quantifiers and define rules, plus RESULT and the OLD pre-state."""
    bindings: dict[str, Value] = field(default_factory=dict)
    result: Optional[Value] = None
    old: Optional[dict[str, Value]] = None

    def bind(self, name: str, value: Value) -> 'SpecContext':
        return replace(self, bindings={**self.bindings, name: value})


def conjuncts(e: ast.Expr) -> list[ast.Expr]:
    if isinstance(e, ast.Binary) and e.op == 'and':
        return conjuncts(e.left) + conjuncts(e.right)
    return [e]


def mentions(e: ast.Expr, name: str) -> bool:
    return any(isinstance(n, ast.Name) and n.name == name for n in ast.walk(e))


class SpecEvalMixin:

    def eval_spec_expr(self, state, e: ast.Expr, bindings: Optional[dict] = None,
                       result: Optional[Value] = None, old: Optional[dict] = None) -> Value:
        """Evaluate a spec expression over `state` without changing it."""
        return self.evaluate(state, e, SpecContext(dict(bindings or {}), result, old))

    def holds(self, state, e: ast.Expr, ctx: SpecContext, what: str) -> bool:
        return truth(self.evaluate(state, e, ctx), what)

    def evaluate_spec(self, state, e: ast.Expr, ctx: Optional[SpecContext]) -> Value:
        if ctx is None:
            raise ExecutionError(f"{type(e).__name__} is only meaningful in a specification")
        if isinstance(e, ast.Implies):
            if not self.holds(state, e.left, ctx, "implication"):
                return TRUE
            return BoolVal(self.holds(state, e.right, ctx, "implication"))
        if isinstance(e, ast.Equivalent):
            left = self.holds(state, e.left, ctx, "equivalence")
            return BoolVal(left == self.holds(state, e.right, ctx, "equivalence"))
        if isinstance(e, (ast.Forall, ast.Exists)):
            return self.eval_quantifier(state, e, ctx)
        if isinstance(e, ast.NumQuant):
            return self.eval_num_quant(state, e, ctx)
        if isinstance(e, ast.ResultRef):
            if ctx.result is None:
                raise ExecutionError("RESULT has no value here")
            return ctx.result
        if isinstance(e, ast.OldRef):
            if ctx.old is None or e.name not in ctx.old:
                raise ExecutionError("no pre-state value", label=f"OLD {e.name}")
            return ctx.old[e.name]
        raise ExecutionError(f"cannot evaluate {type(e).__name__}")

    # ------------------------------------------------------------ quantifiers

    def check_range_size(self, count: int) -> None:
        if count > self.options.quantifier_bound:
            raise ExecutionError("quantifier range too large",
                                 label=f"{count} values, bound is {self.options.quantifier_bound}")

    def quantifier_bounds(self, state, e, ctx: SpecContext) -> tuple[int, int]:
        """Recover a finite integer range from guards `a<=v`, `v<=b` (and strict forms)."""
        guard = e.body.left if isinstance(e.body, ast.Implies) else e.body
        lows: list[int] = []
        highs: list[int] = []

        def bound(expr: ast.Expr) -> Optional[int]:
            if mentions(expr, e.var):
                return None
            v = self.evaluate(state, expr, ctx)
            if not isinstance(v, IntVal):
                raise ExecutionError("quantifier bound must be an integer", label=f"{e.var}")
            return v.value

        for g in conjuncts(guard):
            if not isinstance(g, ast.Binary) or g.op not in ('<', '<=', '>', '>='):
                continue
            op, left, right = g.op, g.left, g.right
            if op in ('>', '>='):
                op, left, right = {'>': '<', '>=': '<='}[op], right, left
            strict = 1 if op == '<' else 0
            if isinstance(right, ast.Name) and right.name == e.var:
                b = bound(left)
                if b is not None:
                    lows.append(b + strict)
            elif isinstance(left, ast.Name) and left.name == e.var:
                b = bound(right)
                if b is not None:
                    highs.append(b - strict)
        if not lows or not highs:
            raise ExecutionError("unbounded quantifier", label=e.var)
        return max(lows), min(highs)

    def eval_quantifier(self, state, e, ctx: SpecContext) -> Value:
        if self.resolve(e.type_ast) != INTEGER:
            raise ExecutionError("unbounded quantifier", label=e.var)
        low, high = self.quantifier_bounds(state, e, ctx)
        self.check_range_size(max(0, high - low + 1))
        want = isinstance(e, ast.Exists)
        for k in range(low, high + 1):
            if self.holds(state, e.body, ctx.bind(e.var, IntVal(k)), "quantifier body") == want:
                return BoolVal(want)
        return BoolVal(not want)

    def eval_num_quant(self, state, e: ast.NumQuant, ctx: SpecContext) -> Value:
        rng = e.range
        if isinstance(rng, ast.InRange):
            domain = elements(self.evaluate(state, rng.collection, ctx))
        else:
            low = self.evaluate(state, rng.low, ctx)
            high = self.evaluate(state, rng.high, ctx)
            if not (isinstance(low, IntVal) and isinstance(high, IntVal)):
                raise ExecutionError("range bounds must be integers", label=rng.var)
            self.check_range_size(max(0, high.value - low.value + 1))
            domain = tuple(IntVal(k) for k in range(low.value, high.value + 1))
        self.check_range_size(len(domain))

        terms: list[Value] = []
        for item in domain:
            inner = ctx.bind(rng.var, item)
            if e.filter is not None and not self.holds(state, e.filter, inner, "filter"):
                continue
            terms.append(self.evaluate(state, e.term, inner))

        if e.kind == 'seq':
            return ListVal(tuple(terms))
        if e.kind in ('add', 'mul'):
            acc: Value = IntVal(0 if e.kind == 'add' else 1)
            op = '+' if e.kind == 'add' else '*'
            for t in terms:
                acc = arith(op, acc, t)
            return acc
        if not terms:
            raise ExecutionError(f"{e.kind} over an empty range")
        best = terms[0]
        for t in terms[1:]:
            if compare('<' if e.kind == 'min' else '>', t, best):
                best = t
        return best

    # ------------------------------------------------------------ define

    def apply_define(self, state, d: ast.Define, args: list[Value]) -> Value:
        """First rule whose pattern matches wins."""
        self.tick(d.span)
        for pattern, body in d.rules:
            bindings = self.match_rule(state, pattern, args)
            if bindings is not None:
                return self.evaluate(state, body, SpecContext(bindings))
        shown = ', '.join(type(a).__name__ for a in args)
        raise ExecutionError("no rule matches", label=f"{d.name}({shown})")

    def match_rule(self, state, pattern: ast.Call, args: list[Value]) -> Optional[dict[str, Value]]:
        if len(pattern.args) != len(args):
            return None
        bindings: dict[str, Value] = {}
        for p, a in zip(pattern.args, args):
            if isinstance(p, ast.TypedVar):
                if not conforms(a, self.resolve(p.type_ast)):
                    return None
                bindings[p.name] = a
            elif isinstance(p, ast.Name):
                bindings[p.name] = a
            elif not values_equal(self.evaluate(state, p, SpecContext()), a):
                return None
        return bindings
