"""Canonical source rendering of ASTs, plus the JSON form used by `dump-ast`."""
from __future__ import annotations

import re
from typing import Any

from minimaple import nodes as ast
from minimaple.lexer import KEYWORDS, int_text

INDENT = '    '
_PLAIN_IDENT = re.compile(r'[A-Za-z_][A-Za-z_0-9]*\Z')

# binding strength, loosest first
PREC_EQUIV = 1
PREC_IMPLIES = 2
PREC_OR = 3
PREC_AND = 4
PREC_NOT = 5
PREC_CMP = 6
PREC_ADD = 7
PREC_MUL = 8
PREC_NEG = 9
PREC_ATOM = 10

BINARY_PREC = {
    'or': PREC_OR, 'and': PREC_AND,
    '=': PREC_CMP, '<>': PREC_CMP, '<': PREC_CMP, '<=': PREC_CMP, '>': PREC_CMP, '>=': PREC_CMP,
    '+': PREC_ADD, '-': PREC_ADD,
    '*': PREC_MUL, '/': PREC_MUL, 'mod': PREC_MUL,
}


def ident(name: str) -> str:
    if _PLAIN_IDENT.match(name) and name not in KEYWORDS:
        return name
    return f'`{name}`'


def quote_string(value: str) -> str:
    escaped = (value.replace('\\', '\\\\').replace('"', '\\"')
               .replace('\n', '\\n').replace('\t', '\\t'))
    return f'"{escaped}"'


def precedence(e: ast.Expr) -> int:
    if isinstance(e, ast.Equivalent):
        return PREC_EQUIV
    if isinstance(e, ast.Implies):
        return PREC_IMPLIES
    if isinstance(e, ast.Binary):
        return BINARY_PREC[e.op]
    if isinstance(e, ast.Unary):
        return PREC_NOT if e.op == 'not' else PREC_NEG
    return PREC_ATOM


class Printer:
    """Renders nodes back to MiniMaple text that re-parses to an equal AST."""

    def type_str(self, t: ast.TypeAst) -> str:
        if isinstance(t, ast.TypeName):
            return t.name
        if isinstance(t, ast.ListType):
            return f"list({self.type_str(t.elem)})"
        if isinstance(t, ast.SetType):
            return f"{{{self.type_str(t.elem)}}}"
        if isinstance(t, ast.RecordType):
            return '[' + ','.join(self.type_str(i) for i in t.items) + ']'
        if isinstance(t, ast.ProcType):
            args = ','.join(self.type_str(a) for a in t.args)
            return f"procedure[{self.type_str(t.ret)}]({args})"
        if isinstance(t, ast.OrType):
            return 'Or(' + ','.join(self.type_str(m) for m in t.members) + ')'
        if isinstance(t, ast.TaggedType):
            return f"{ident(t.name)}(" + ','.join(self.type_str(a) for a in t.args) + ')'
        if isinstance(t, ast.NamedTypeRef):
            return ident(t.name)
        raise TypeError(f"not a type node: {t!r}")

    # ------------------------------------------------------------ expressions

    def expr(self, e: ast.Expr, level: int = 0, min_prec: int = 0) -> str:
        text = self._expr(e, level)
        if precedence(e) < min_prec:
            return f"({text})"
        return text

    def args(self, items, level: int) -> str:
        return ', '.join(self.expr(i, level) for i in items)

    def _expr(self, e: ast.Expr, level: int) -> str:
        if isinstance(e, ast.IntLit):
            return int_text(e.value)
        if isinstance(e, ast.FloatLit):
            return repr(e.value)
        if isinstance(e, ast.StringLit):
            return quote_string(e.value)
        if isinstance(e, ast.BoolLit):
            return 'true' if e.value else 'false'
        if isinstance(e, ast.Name):
            return ident(e.name)
        if isinstance(e, ast.ListLit):
            return f"[{self.args(e.items, level)}]"
        if isinstance(e, ast.SetLit):
            return f"{{{self.args(e.items, level)}}}"
        if isinstance(e, ast.Index):
            return f"{self.expr(e.base, level, PREC_ATOM)}[{self.expr(e.index, level)}]"
        if isinstance(e, ast.Call):
            return f"{ident(e.callee)}({self.args(e.args, level)})"
        if isinstance(e, ast.TypedVar):
            return f"{ident(e.name)}::{self.type_str(e.type_ast)}"
        if isinstance(e, ast.TypeTest):
            return f"type({self.expr(e.expr, level)}, {self.type_str(e.type_ast)})"
        if isinstance(e, ast.Unary):
            if e.op == 'not':
                return f"not {self.expr(e.operand, level, PREC_NOT)}"
            return f"-{self.expr(e.operand, level, PREC_NEG)}"
        if isinstance(e, ast.Binary):
            prec = BINARY_PREC[e.op]
            right_prec = prec + 1
            if prec == PREC_CMP:
                left_prec = right_prec = PREC_ADD
            else:
                left_prec = prec
            if prec == PREC_AND:
                right_prec = PREC_NOT
            return (f"{self.expr(e.left, level, left_prec)} {e.op} "
                    f"{self.expr(e.right, level, right_prec)}")
        if isinstance(e, ast.Implies):
            return f"{self.expr(e.left, level, PREC_OR)} implies {self.expr(e.right, level, PREC_IMPLIES)}"
        if isinstance(e, ast.Equivalent):
            return (f"{self.expr(e.left, level, PREC_EQUIV)} equivalent "
                    f"{self.expr(e.right, level, PREC_IMPLIES)}")
        if isinstance(e, ast.Uneval):
            return f"'{self.expr(e.expr, level)}'"
        if isinstance(e, (ast.Forall, ast.Exists)):
            word = 'forall' if isinstance(e, ast.Forall) else 'exists'
            return f"{word}({ident(e.var)}::{self.type_str(e.type_ast)}, {self.expr(e.body, level)})"
        if isinstance(e, ast.NumQuant):
            parts = [self.expr(e.term, level), self.range_str(e.range, level)]
            if e.filter is not None:
                parts.append(self.expr(e.filter, level))
            return f"{e.kind}({', '.join(parts)})"
        if isinstance(e, ast.ResultRef):
            return 'RESULT'
        if isinstance(e, ast.OldRef):
            return f"OLD {ident(e.name)}"
        if isinstance(e, ast.ProcDef):
            text = self.proc(e, level)
            if e.spec is not None:
                return self.proc_spec(e.spec, level) + ' ' + text
            return text
        raise TypeError(f"not an expression node: {e!r}")

    def range_str(self, r, level: int) -> str:
        if isinstance(r, ast.InRange):
            return f"{ident(r.var)} in {self.expr(r.collection, level, PREC_ADD)}"
        return (f"{ident(r.var)} = {self.expr(r.low, level, PREC_ADD)}.."
                f"{self.expr(r.high, level, PREC_ADD)}")

    def proc(self, p: ast.ProcDef, level: int) -> str:
        pad = INDENT * (level + 1)
        params = ', '.join(f"{ident(x.name)}::{self.type_str(x.type_ast)}" for x in p.params)
        lines = [f"proc({params})::{self.type_str(p.ret_type)};"]
        if p.globals:
            lines.append(f"{pad}global {', '.join(ident(g) for g in p.globals)};")
        if p.locals:
            decls = []
            for d in p.locals:
                text = ident(d.name)
                if d.type_ast is not None:
                    text += f"::{self.type_str(d.type_ast)}"
                if d.init is not None:
                    text += f" := {self.expr(d.init, level + 1)}"
                decls.append(text)
            lines.append(f"{pad}local {', '.join(decls)};")
        lines.extend(self.block(p.body, level + 1))
        lines.append(f"{INDENT * level}end proc")
        return '\n'.join(lines)

    # ------------------------------------------------------------ specs

    def spec_comment(self, clauses: list[str], level: int) -> str:
        pad = INDENT * level
        inner = [f"{pad}{INDENT}{c}" for c in clauses]
        return '\n'.join(['(*@'] + inner + [f"{pad}@*)"])

    def proc_spec(self, spec: ast.ProcSpec, level: int) -> str:
        clauses = [f"requires {self.expr(spec.requires, level + 1)};"]
        if spec.globals:
            clauses.append(f"global {', '.join(ident(g) for g in spec.globals)};")
        clauses.append(f"ensures {self.expr(spec.ensures, level + 1)};")
        if spec.exceptional is not None:
            clauses.append(f"exception {self.expr(spec.exceptional, level + 1)};")
        return self.spec_comment(clauses, level)

    def loop_spec(self, spec: ast.LoopSpec, level: int) -> str:
        return self.spec_comment([
            f"invariant {self.expr(spec.invariant, level + 1)};",
            f"decreases {self.expr(spec.decreases, level + 1)};",
        ], level)

    # ------------------------------------------------------------ commands

    def block(self, commands, level: int) -> list[str]:
        lines = []
        for c in commands:
            lines.extend(self.command(c, level))
        return lines

    def command(self, c: ast.Command, level: int) -> list[str]:
        pad = INDENT * level
        if isinstance(c, ast.MultiAssign):
            targets = ', '.join(ident(t) for t in c.targets)
            if len(c.sources) == 1 and isinstance(c.sources[0], ast.ProcDef) and c.sources[0].spec:
                proc = c.sources[0]
                head = pad + self.proc_spec(proc.spec, level)
                return [head, f"{pad}{targets} := {self.proc(proc, level)};"]
            return [f"{pad}{targets} := {self.args(c.sources, level)};"]
        if isinstance(c, ast.If):
            lines = []
            for i, (cond, body) in enumerate(c.branches):
                word = 'if' if i == 0 else 'elif'
                lines.append(f"{pad}{word} {self.expr(cond, level)} then")
                lines.extend(self.block(body, level + 1))
            if c.else_body is not None:
                lines.append(f"{pad}else")
                lines.extend(self.block(c.else_body, level + 1))
            lines.append(f"{pad}end if;")
            return lines
        if isinstance(c, ast.ForLoop):
            if c.var is None:
                head = f"while {self.expr(c.cond, level)}"
            else:
                head = f"for {ident(c.var)}"
                for word, value in (('from', c.start), ('by', c.step), ('to', c.stop), ('while', c.cond)):
                    if value is not None:
                        head += f" {word} {self.expr(value, level)}"
            lines = [f"{pad}{head} do"]
            if c.spec is not None:
                lines.append(INDENT * (level + 1) + self.loop_spec(c.spec, level + 1))
            lines.extend(self.block(c.body, level + 1))
            lines.append(f"{pad}end do;")
            return lines
        if isinstance(c, ast.Return):
            if c.value is None:
                return [f"{pad}return;"]
            return [f"{pad}return {self.expr(c.value, level)};"]
        if isinstance(c, ast.ErrorCmd):
            return [f"{pad}error {quote_string(c.message)};"]
        if isinstance(c, ast.ExprCmd):
            return [f"{pad}{self.expr(c.expr, level)};"]
        if isinstance(c, ast.Assert):
            label = '' if c.label is None else f", {quote_string(c.label)}"
            return [f"{pad}ASSERT({self.expr(c.cond, level)}{label});"]
        raise TypeError(f"not a command node: {c!r}")

    # ------------------------------------------------------------ declarations

    def declaration(self, d: ast.Declaration) -> str:
        if isinstance(d, ast.Define):
            rules = ', '.join(f"{self.expr(p)} = {self.expr(b)}" for p, b in d.rules)
            return f"define({ident(d.name)}, {rules});"
        if isinstance(d, ast.NamedTypeDecl):
            return f"`type/{d.name}` := {self.type_str(d.type_ast)};"
        if isinstance(d, ast.AbstractTypeDecl):
            return f"`type/{d.name}`;"
        if isinstance(d, ast.Assume):
            return f"assume({self.expr(d.expr)});"
        if isinstance(d, ast.PredicateDecl):
            params = []
            for p in d.params:
                text = ident(p.name)
                if p.type_ast is not None:
                    text += f"::{self.type_str(p.type_ast)}"
                params.append(text)
            result = '' if d.result is None else f"::{self.type_str(d.result)}"
            return f"(*@ {ident(d.name)}({', '.join(params)}){result}; @*)"
        raise TypeError(f"not a declaration node: {d!r}")

    def program(self, p: ast.Program) -> str:
        lines = [self.declaration(d) for d in p.declarations]
        if lines and p.commands:
            lines.append('')
        lines.extend(self.block(p.commands, 0))
        return '\n'.join(lines) + ('\n' if lines else '')


def pretty_print(node: Any) -> str:
    """Render any AST node as canonical MiniMaple text."""
    printer = Printer()
    if isinstance(node, ast.Program):
        return printer.program(node)
    if isinstance(node, ast.Command):
        return '\n'.join(printer.command(node, 0))
    if isinstance(node, ast.Declaration):
        return printer.declaration(node)
    if isinstance(node, ast.TypeAst):
        return printer.type_str(node)
    if isinstance(node, ast.ProcSpec):
        return printer.proc_spec(node, 0)
    if isinstance(node, ast.LoopSpec):
        return printer.loop_spec(node, 0)
    return printer.expr(node)


def to_json(node: ast.Node) -> dict:
    """{kind, span, attrs, children} tree for `dump-ast`."""
    attrs: dict[str, Any] = {}
    for name in node.__dataclass_fields__:
        if name == 'span':
            continue
        value = getattr(node, name)
        if isinstance(value, (str, int, float, bool)) or value is None:
            attrs[name] = value
        elif isinstance(value, tuple) and all(isinstance(v, str) for v in value):
            attrs[name] = list(value)
    return {
        'kind': type(node).__name__,
        'span': node.span.to_dict(),
        'attrs': attrs,
        'children': [to_json(child) for child in ast.children(node)],
    }
