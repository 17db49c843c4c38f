"""AST for MiniMaple programs, type annotations and spec expressions.

All nodes are frozen dataclasses with tuple children; `span` never takes
part in equality so two parses of the same text compare equal whatever
their layout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from minimaple.errors import NO_SPAN, SourceSpan


@dataclass(frozen=True)
class Node:
    span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False, kw_only=True)


# ---------------------------------------------------------------- type annotations

@dataclass(frozen=True)
class TypeAst(Node):
    pass


@dataclass(frozen=True)
class TypeName(TypeAst):
    """integer, boolean, string, float, rational, anything, symbol, void, uneval"""
    name: str


@dataclass(frozen=True)
class SetType(TypeAst):
    elem: TypeAst


@dataclass(frozen=True)
class ListType(TypeAst):
    elem: TypeAst


@dataclass(frozen=True)
class RecordType(TypeAst):
    items: tuple[TypeAst, ...]


@dataclass(frozen=True)
class ProcType(TypeAst):
    ret: TypeAst
    args: tuple[TypeAst, ...]


@dataclass(frozen=True)
class TaggedType(TypeAst):
    name: str
    args: tuple[TypeAst, ...]


@dataclass(frozen=True)
class OrType(TypeAst):
    members: tuple[TypeAst, ...]


@dataclass(frozen=True)
class NamedTypeRef(TypeAst):
    name: str


# ---------------------------------------------------------------- expressions

@dataclass(frozen=True)
class Expr(Node):
    pass


@dataclass(frozen=True)
class IntLit(Expr):
    value: int


@dataclass(frozen=True)
class FloatLit(Expr):
    value: float


@dataclass(frozen=True)
class StringLit(Expr):
    value: str


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool


@dataclass(frozen=True)
class Name(Expr):
    name: str


@dataclass(frozen=True)
class ListLit(Expr):
    """A bracketed sequence; typed as a list or as a record depending on context."""
    items: tuple[Expr, ...]


@dataclass(frozen=True)
class SetLit(Expr):
    items: tuple[Expr, ...]


@dataclass(frozen=True)
class Index(Expr):
    base: Expr
    index: Expr


@dataclass(frozen=True)
class Call(Expr):
    callee: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class TypeTest(Expr):
    expr: Expr
    type_ast: TypeAst


@dataclass(frozen=True)
class Unary(Expr):
    op: str          # '-' or 'not'
    operand: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Uneval(Expr):
    expr: Expr


@dataclass(frozen=True)
class Param(Node):
    name: str
    type_ast: Optional[TypeAst]


@dataclass(frozen=True)
class LocalDecl(Node):
    name: str
    type_ast: Optional[TypeAst] = None
    init: Optional[Expr] = None


@dataclass(frozen=True)
class ProcDef(Expr):
    params: tuple[Param, ...]
    ret_type: TypeAst
    globals: tuple[str, ...] = ()
    locals: tuple[LocalDecl, ...] = ()
    spec: Optional['ProcSpec'] = None
    body: tuple['Command', ...] = ()


# spec-only expressions

@dataclass(frozen=True)
class TypedVar(Expr):
    """`n::integer` inside a define rule pattern."""
    name: str
    type_ast: TypeAst


@dataclass(frozen=True)
class Implies(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Equivalent(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Forall(Expr):
    var: str
    type_ast: TypeAst
    body: Expr


@dataclass(frozen=True)
class Exists(Expr):
    var: str
    type_ast: TypeAst
    body: Expr


@dataclass(frozen=True)
class InRange(Node):
    var: str
    collection: Expr


@dataclass(frozen=True)
class IntervalRange(Node):
    var: str
    low: Expr
    high: Expr


QuantRange = Union[InRange, IntervalRange]
NUM_QUANTIFIERS = ('add', 'mul', 'min', 'max', 'seq')


@dataclass(frozen=True)
class NumQuant(Expr):
    kind: str
    term: Expr
    range: QuantRange
    filter: Optional[Expr] = None


@dataclass(frozen=True)
class ResultRef(Expr):
    pass


@dataclass(frozen=True)
class OldRef(Expr):
    name: str


# ---------------------------------------------------------------- specifications

@dataclass(frozen=True)
class ProcSpec(Node):
    requires: Expr
    globals: tuple[str, ...]
    ensures: Expr
    exceptional: Optional[Expr] = None


@dataclass(frozen=True)
class LoopSpec(Node):
    invariant: Expr
    decreases: Expr


# ---------------------------------------------------------------- commands

@dataclass(frozen=True)
class Command(Node):
    pass


@dataclass(frozen=True)
class MultiAssign(Command):
    targets: tuple[str, ...]
    sources: tuple[Expr, ...]


@dataclass(frozen=True)
class If(Command):
    branches: tuple[tuple[Expr, tuple[Command, ...]], ...]
    else_body: Optional[tuple[Command, ...]] = None


@dataclass(frozen=True)
class ForLoop(Command):
    """for/while loop; `var` is None for a bare `while ... do` loop."""
    var: Optional[str]
    start: Optional[Expr] = None
    step: Optional[Expr] = None
    stop: Optional[Expr] = None
    cond: Optional[Expr] = None
    spec: Optional[LoopSpec] = None
    body: tuple[Command, ...] = ()


@dataclass(frozen=True)
class Return(Command):
    value: Optional[Expr] = None


@dataclass(frozen=True)
class ErrorCmd(Command):
    message: str


@dataclass(frozen=True)
class ExprCmd(Command):
    expr: Expr


@dataclass(frozen=True)
class Assert(Command):
    cond: Expr
    label: Optional[str] = None


# ---------------------------------------------------------------- declarations

@dataclass(frozen=True)
class Declaration(Node):
    pass


@dataclass(frozen=True)
class Define(Declaration):
    """define(I, rules); each rule is (pattern Call, body)."""
    name: str
    rules: tuple[tuple[Call, Expr], ...]


@dataclass(frozen=True)
class NamedTypeDecl(Declaration):
    name: str
    type_ast: TypeAst


@dataclass(frozen=True)
class AbstractTypeDecl(Declaration):
    name: str


@dataclass(frozen=True)
class Assume(Declaration):
    expr: Expr


@dataclass(frozen=True)
class PredicateDecl(Declaration):
    """I(params); or I(params)::T; -- a predicate when `result` is None."""
    name: str
    params: tuple[Param, ...]
    result: Optional[TypeAst] = None


@dataclass(frozen=True)
class Program(Node):
    declarations: tuple[Declaration, ...] = ()
    commands: tuple[Command, ...] = ()


def children(node: Node) -> list[Node]:
    """Direct child nodes in field order, flattening tuples and branch pairs."""
    out: list[Node] = []

    def collect(value):
        if isinstance(value, Node):
            out.append(value)
        elif isinstance(value, tuple):
            for item in value:
                collect(item)

    for name in node.__dataclass_fields__:
        if name != 'span':
            collect(getattr(node, name))
    return out


def walk(node: Node):
    """Pre-order traversal."""
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(children(current)))
