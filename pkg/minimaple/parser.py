"""Recursive-descent parser for MiniMaple programs, types and spec expressions."""
from __future__ import annotations

import logging
from dataclasses import replace
from typing import Optional

from minimaple import nodes as ast
from minimaple.errors import LexError, ParseError, ParseFailure, SourceSpan
from minimaple.lexer import Token, TokenKind, int_text, tokenize

logger = logging.getLogger(__name__)

BASE_TYPES = ('integer', 'boolean', 'string', 'float', 'rational', 'anything',
              'symbol', 'void', 'uneval')
PROC_SPEC_WORDS = ('requires', 'global', 'ensures', 'exception')
LOOP_SPEC_WORDS = ('invariant', 'decreases')
COMPARISONS = {
    TokenKind.EQ: '=', TokenKind.NE: '<>', TokenKind.LT: '<',
    TokenKind.LE: '<=', TokenKind.GT: '>', TokenKind.GE: '>=',
}
# spec clauses that may mention RESULT / OLD
RESULT_CLAUSES = ('ensures',)
OLD_CLAUSES = ('ensures', 'invariant')


def _eof_after(token: Token) -> Token:
    span = token.span
    return Token(TokenKind.EOF, None, SourceSpan(span.file, span.line, span.column + span.length, 0))


class Parser:
    """Parses one token stream; syntax errors are collected with recovery at ';'."""

    def __init__(self, tokens: list[Token], clause: Optional[str] = None):
        if not tokens or tokens[-1].kind is not TokenKind.EOF:
            end = tokens[-1] if tokens else Token(TokenKind.EOF, None, SourceSpan('<input>', 1, 1, 0))
            tokens = list(tokens) + [_eof_after(end)]
        self.tokens = tokens
        self.pos = 0
        self.clause = clause          # None while parsing program code
        self.errors: list[ParseError] = []

    # ------------------------------------------------------------ token helpers

    def peek(self, offset: int = 0) -> Token:
        index = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[index]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind is not TokenKind.EOF:
            self.pos += 1
        return tok

    def at(self, kind: TokenKind) -> bool:
        return self.peek().kind is kind

    def at_kw(self, *words: str) -> bool:
        return self.peek().is_keyword(*words)

    def accept(self, kind: TokenKind) -> Optional[Token]:
        if self.at(kind):
            return self.next()
        return None

    def accept_kw(self, word: str) -> Optional[Token]:
        if self.at_kw(word):
            return self.next()
        return None

    def expect(self, kind: TokenKind, what: str) -> Token:
        if not self.at(kind):
            self.fail(f"expected {what}")
        return self.next()

    def expect_kw(self, word: str) -> Token:
        if not self.at_kw(word):
            self.fail(f"expected '{word}'")
        return self.next()

    def fail(self, message: str, token: Optional[Token] = None):
        token = token or self.peek()
        if token.kind is TokenKind.EOF:
            found = 'end of input'
        elif token.kind is TokenKind.INT:
            found = repr(int_text(token.value))
        else:
            found = repr(str(token.value))
        raise ParseError(f"{message}, found {found}", token.span)

    def synchronize(self, stop_words: tuple[str, ...], start: int) -> None:
        """Skip to just past the next ';' or up to a block terminator."""
        while not self.at(TokenKind.EOF):
            if self.accept(TokenKind.SEMI):
                break
            if stop_words and self.at_kw(*stop_words):
                break
            self.next()
        if self.pos == start:
            self.next()

    def sub_parser(self, spec_token: Token, clause: Optional[str] = None) -> 'Parser':
        inner = list(spec_token.value) + [_eof_after(spec_token)]
        sub = Parser(inner, clause)
        sub.errors = self.errors
        return sub

    def finish(self):
        if self.errors:
            raise ParseFailure([e.to_diagnostic() for e in self.errors])

    # ------------------------------------------------------------ program

    def parse_program(self) -> ast.Program:
        start = self.peek().span
        declarations: list[ast.Declaration] = []
        commands: list[ast.Command] = []
        while not self.at(TokenKind.EOF):
            pos = self.pos
            try:
                if self.at_declaration():
                    tok = self.peek()
                    items = self.parse_declaration_item()
                    if commands:
                        self.errors.append(ParseError("declarations must precede commands", tok.span))
                    else:
                        declarations.extend(items)
                else:
                    commands.append(self.parse_command())
            except ParseError as e:
                self.errors.append(e)
                self.synchronize((), pos)
        self.finish()
        logger.debug(f"Parsed {len(declarations)} declarations, {len(commands)} commands")
        return ast.Program(tuple(declarations), tuple(commands), span=start)

    def at_declaration(self) -> bool:
        tok = self.peek()
        if tok.kind is TokenKind.TYPENAME or tok.is_keyword('define', 'assume'):
            return True
        if tok.kind is TokenKind.SPEC:
            first = tok.value[0] if tok.value else None
            return first is None or not first.is_keyword(*PROC_SPEC_WORDS, *LOOP_SPEC_WORDS)
        return False

    def parse_declaration_item(self) -> list[ast.Declaration]:
        tok = self.peek()
        if tok.kind is TokenKind.SPEC:
            self.next()
            sub = self.sub_parser(tok, clause='decl')
            decls = []
            while not sub.at(TokenKind.EOF):
                pos = sub.pos
                try:
                    decls.append(sub.parse_declaration(allow_predicate=True))
                except ParseError as e:
                    self.errors.append(e)
                    sub.synchronize((), pos)
            return decls
        return [self.parse_declaration(allow_predicate=False)]

    def parse_declaration(self, allow_predicate: bool) -> ast.Declaration:
        tok = self.peek()
        saved, self.clause = self.clause, 'decl'
        try:
            if tok.kind is TokenKind.TYPENAME:
                self.next()
                if self.accept(TokenKind.ASSIGN):
                    type_ast = self.parse_type()
                    self.expect(TokenKind.SEMI, "';'")
                    return ast.NamedTypeDecl(tok.value, type_ast, span=tok.span)
                self.expect(TokenKind.SEMI, "':=' or ';'")
                return ast.AbstractTypeDecl(tok.value, span=tok.span)
            if tok.is_keyword('define'):
                return self.parse_define()
            if tok.is_keyword('assume'):
                self.next()
                self.expect(TokenKind.LPAREN, "'('")
                expr = self.parse_expr()
                self.expect(TokenKind.RPAREN, "')'")
                self.expect(TokenKind.SEMI, "';'")
                return ast.Assume(expr, span=tok.span)
            if allow_predicate and tok.kind is TokenKind.IDENT:
                return self.parse_predicate_decl()
            self.fail("expected a declaration")
        finally:
            self.clause = saved

    def parse_define(self) -> ast.Define:
        head = self.expect_kw('define')
        self.expect(TokenKind.LPAREN, "'('")
        name = self.expect(TokenKind.IDENT, "function name").value
        rules = []
        while self.accept(TokenKind.COMMA):
            rule_tok = self.expect(TokenKind.IDENT, "rule pattern")
            if rule_tok.value != name:
                self.fail(f"rule pattern must apply '{name}'", rule_tok)
            self.expect(TokenKind.LPAREN, "'('")
            args = []
            if not self.at(TokenKind.RPAREN):
                args.append(self.parse_pattern_arg())
                while self.accept(TokenKind.COMMA):
                    args.append(self.parse_pattern_arg())
            self.expect(TokenKind.RPAREN, "')'")
            self.expect(TokenKind.EQ, "'='")
            body = self.parse_expr()
            rules.append((ast.Call(name, tuple(args), span=rule_tok.span), body))
        if not rules:
            self.fail("define needs at least one rule")
        self.expect(TokenKind.RPAREN, "')'")
        self.expect(TokenKind.SEMI, "';'")
        return ast.Define(name, tuple(rules), span=head.span)

    def parse_pattern_arg(self) -> ast.Expr:
        tok = self.peek()
        if tok.kind is TokenKind.IDENT and self.peek(1).kind is TokenKind.DCOLON:
            self.next()
            self.next()
            return ast.TypedVar(tok.value, self.parse_type(), span=tok.span)
        return self.parse_expr()

    def parse_predicate_decl(self) -> ast.PredicateDecl:
        tok = self.next()
        self.expect(TokenKind.LPAREN, "'('")
        params = []
        if not self.at(TokenKind.RPAREN):
            params.append(self.parse_param(required=False))
            while self.accept(TokenKind.COMMA):
                params.append(self.parse_param(required=False))
        self.expect(TokenKind.RPAREN, "')'")
        result = self.parse_type() if self.accept(TokenKind.DCOLON) else None
        self.expect(TokenKind.SEMI, "';'")
        return ast.PredicateDecl(tok.value, tuple(params), result, span=tok.span)

    # ------------------------------------------------------------ commands

    def parse_block(self, terminators: tuple[str, ...]) -> tuple[ast.Command, ...]:
        commands = []
        while not self.at(TokenKind.EOF) and not self.at_kw(*terminators):
            pos = self.pos
            try:
                commands.append(self.parse_command())
            except ParseError as e:
                self.errors.append(e)
                if self.pos == pos and self.at(TokenKind.SPEC):
                    # drop only the comment; the command after it is still parsed
                    self.next()
                else:
                    self.synchronize(terminators, pos)
        return tuple(commands)

    def parse_command(self) -> ast.Command:
        tok = self.peek()
        if tok.kind is TokenKind.SPEC:
            return self.parse_spec_before_command()
        if tok.is_keyword('if'):
            return self.parse_if()
        if tok.is_keyword('for', 'while'):
            return self.parse_loop()
        if tok.is_keyword('return'):
            self.next()
            value = None
            if not self.at(TokenKind.SEMI):
                value = self.parse_expr()
            self.expect(TokenKind.SEMI, "';'")
            return ast.Return(value, span=tok.span)
        if tok.is_keyword('error'):
            self.next()
            message = self.expect(TokenKind.STRING, "error message string").value
            self.expect(TokenKind.SEMI, "';'")
            return ast.ErrorCmd(message, span=tok.span)
        if tok.is_keyword('ASSERT'):
            return self.parse_assert()
        if tok.is_keyword('global', 'local'):
            self.fail(f"'{tok.value}' declarations are only allowed at the head of a procedure")
        if tok.kind is TokenKind.IDENT and self.peek(1).kind in (TokenKind.ASSIGN, TokenKind.COMMA):
            return self.parse_assignment()
        expr = self.parse_expr()
        if not isinstance(expr, ast.Call):
            self.fail("only procedure calls can be used as commands", tok)
        self.expect(TokenKind.SEMI, "';'")
        return ast.ExprCmd(expr, span=tok.span)

    def parse_spec_before_command(self) -> ast.Command:
        tok = self.peek()
        first = tok.value[0] if tok.value else None
        if first is not None and first.is_keyword(*LOOP_SPEC_WORDS):
            self.fail("a loop specification must be the first element of a loop body", tok)
        if first is None or not first.is_keyword(*PROC_SPEC_WORDS):
            self.fail("declarations must precede commands", tok)
        self.next()
        spec = self.parse_proc_spec(tok)
        command = self.parse_command()
        if (isinstance(command, ast.MultiAssign) and len(command.sources) == 1
                and isinstance(command.sources[0], ast.ProcDef)
                and command.sources[0].spec is None):
            proc = replace(command.sources[0], spec=spec)
            return replace(command, sources=(proc,))
        raise ParseError("a procedure specification must precede a procedure definition", tok.span)

    def parse_assignment(self) -> ast.MultiAssign:
        start = self.peek()
        targets = [self.expect(TokenKind.IDENT, "identifier").value]
        while self.accept(TokenKind.COMMA):
            targets.append(self.expect(TokenKind.IDENT, "identifier").value)
        self.expect(TokenKind.ASSIGN, "':='")
        sources = [self.parse_expr()]
        while self.accept(TokenKind.COMMA):
            sources.append(self.parse_expr())
        self.expect(TokenKind.SEMI, "';'")
        if len(targets) != len(sources):
            raise ParseError(
                f"assignment has {len(targets)} target(s) but {len(sources)} value(s)", start.span)
        return ast.MultiAssign(tuple(targets), tuple(sources), span=start.span)

    def parse_if(self) -> ast.If:
        head = self.expect_kw('if')
        branches = []
        cond = self.parse_expr()
        self.expect_kw('then')
        branches.append((cond, self.parse_block(('elif', 'else', 'end'))))
        else_body = None
        while True:
            if self.accept_kw('elif'):
                cond = self.parse_expr()
                self.expect_kw('then')
                branches.append((cond, self.parse_block(('elif', 'else', 'end'))))
            elif self.accept_kw('else'):
                else_body = self.parse_block(('end',))
                break
            else:
                break
        self.expect_kw('end')
        self.expect_kw('if')
        self.expect(TokenKind.SEMI, "';'")
        return ast.If(tuple(branches), else_body, span=head.span)

    def parse_loop(self) -> ast.ForLoop:
        head = self.next()
        var = None
        clauses: dict[str, ast.Expr] = {}
        if head.is_keyword('for'):
            var = self.expect(TokenKind.IDENT, "loop variable").value
            while self.at_kw('from', 'by', 'to', 'while'):
                word = self.next()
                if word.value in clauses:
                    self.fail(f"duplicate '{word.value}' clause", word)
                clauses[word.value] = self.parse_expr()
                if word.value == 'while':
                    break
        else:
            clauses['while'] = self.parse_expr()
        self.expect_kw('do')
        spec = None
        if self.at(TokenKind.SPEC):
            tok = self.peek()
            first = tok.value[0] if tok.value else None
            if first is not None and first.is_keyword(*LOOP_SPEC_WORDS):
                self.next()
                spec = self.parse_loop_spec(tok)
        body = self.parse_block(('end',))
        self.expect_kw('end')
        self.expect_kw('do')
        self.expect(TokenKind.SEMI, "';'")
        return ast.ForLoop(var, clauses.get('from'), clauses.get('by'), clauses.get('to'),
                           clauses.get('while'), spec, body, span=head.span)

    def parse_assert(self) -> ast.Assert:
        head = self.expect_kw('ASSERT')
        self.expect(TokenKind.LPAREN, "'('")
        saved, self.clause = self.clause, 'assert'
        try:
            cond = self.parse_expr()
        finally:
            self.clause = saved
        label = None
        if self.accept(TokenKind.COMMA):
            label = self.expect(TokenKind.STRING, "assertion label").value
        self.expect(TokenKind.RPAREN, "')'")
        self.expect(TokenKind.SEMI, "';'")
        return ast.Assert(cond, label, span=head.span)

    # ------------------------------------------------------------ spec comments

    def parse_proc_spec(self, tok: Token) -> ast.ProcSpec:
        sub = self.sub_parser(tok)
        requires: ast.Expr = ast.BoolLit(True, span=tok.span)
        ensures: ast.Expr = ast.BoolLit(True, span=tok.span)
        globals_: list[str] = []
        exceptional = None
        # errors stay inside the comment; the definition after it is still parsed
        try:
            if sub.accept_kw('requires'):
                requires = sub.parse_clause('requires')
            if sub.accept_kw('global'):
                globals_.append(sub.expect(TokenKind.IDENT, "identifier").value)
                while sub.accept(TokenKind.COMMA):
                    globals_.append(sub.expect(TokenKind.IDENT, "identifier").value)
                sub.expect(TokenKind.SEMI, "';'")
            if sub.accept_kw('ensures'):
                ensures = sub.parse_clause('ensures')
            if sub.accept_kw('exception'):
                exceptional = sub.parse_clause('exception')
            sub.expect(TokenKind.EOF, "end of procedure specification")
        except ParseError as e:
            self.errors.append(e)
        return ast.ProcSpec(requires, tuple(globals_), ensures, exceptional, span=tok.span)

    def parse_loop_spec(self, tok: Token) -> ast.LoopSpec:
        sub = self.sub_parser(tok)
        invariant: ast.Expr = ast.BoolLit(True, span=tok.span)
        decreases: ast.Expr = ast.IntLit(0, span=tok.span)
        try:
            sub.expect_kw('invariant')
            invariant = sub.parse_clause('invariant')
            sub.expect_kw('decreases')
            decreases = sub.parse_clause('decreases')
            sub.expect(TokenKind.EOF, "end of loop specification")
        except ParseError as e:
            self.errors.append(e)
        return ast.LoopSpec(invariant, decreases, span=tok.span)

    def parse_clause(self, clause: str) -> ast.Expr:
        saved, self.clause = self.clause, clause
        try:
            expr = self.parse_expr()
        finally:
            self.clause = saved
        self.expect(TokenKind.SEMI, "';'")
        return expr

    # ------------------------------------------------------------ expressions

    def require_spec(self, tok: Token) -> None:
        if self.clause is None:
            self.fail(f"'{tok.value}' is only allowed in specifications", tok)

    def parse_expr(self) -> ast.Expr:
        left = self.parse_implies()
        while self.at_kw('equivalent'):
            tok = self.next()
            self.require_spec(tok)
            left = ast.Equivalent(left, self.parse_implies(), span=tok.span)
        return left

    def parse_implies(self) -> ast.Expr:
        left = self.parse_or()
        if self.at_kw('implies'):
            tok = self.next()
            self.require_spec(tok)
            return ast.Implies(left, self.parse_implies(), span=tok.span)
        return left

    def parse_or(self) -> ast.Expr:
        left = self.parse_and()
        while self.at_kw('or'):
            tok = self.next()
            left = ast.Binary('or', left, self.parse_and(), span=tok.span)
        return left

    def parse_and(self) -> ast.Expr:
        left = self.parse_not()
        while self.at_kw('and'):
            tok = self.next()
            left = ast.Binary('and', left, self.parse_not(), span=tok.span)
        return left

    def parse_not(self) -> ast.Expr:
        if self.at_kw('not'):
            tok = self.next()
            return ast.Unary('not', self.parse_not(), span=tok.span)
        return self.parse_comparison()

    def parse_comparison(self) -> ast.Expr:
        left = self.parse_additive()
        if self.peek().kind in COMPARISONS:
            tok = self.next()
            right = self.parse_additive()
            if self.peek().kind in COMPARISONS:
                self.fail("comparison operators do not chain")
            return ast.Binary(COMPARISONS[tok.kind], left, right, span=tok.span)
        return left

    def parse_additive(self) -> ast.Expr:
        left = self.parse_multiplicative()
        while self.peek().kind in (TokenKind.PLUS, TokenKind.MINUS):
            tok = self.next()
            left = ast.Binary(tok.value, left, self.parse_multiplicative(), span=tok.span)
        return left

    def parse_multiplicative(self) -> ast.Expr:
        left = self.parse_unary()
        while self.peek().kind in (TokenKind.STAR, TokenKind.SLASH) or self.at_kw('mod'):
            tok = self.next()
            left = ast.Binary(str(tok.value), left, self.parse_unary(), span=tok.span)
        return left

    def parse_unary(self) -> ast.Expr:
        if self.at(TokenKind.MINUS):
            tok = self.next()
            return ast.Unary('-', self.parse_unary(), span=tok.span)
        return self.parse_postfix()

    def parse_postfix(self) -> ast.Expr:
        expr = self.parse_primary()
        while self.at(TokenKind.LBRACKET):
            tok = self.next()
            index = self.parse_expr()
            self.expect(TokenKind.RBRACKET, "']'")
            expr = ast.Index(expr, index, span=tok.span)
        return expr

    def parse_expr_list(self, closing: TokenKind, what: str) -> tuple[ast.Expr, ...]:
        items = []
        if not self.at(closing):
            items.append(self.parse_expr())
            while self.accept(TokenKind.COMMA):
                items.append(self.parse_expr())
        self.expect(closing, what)
        return tuple(items)

    def parse_primary(self) -> ast.Expr:
        tok = self.peek()
        kind = tok.kind
        if kind is TokenKind.INT:
            self.next()
            return ast.IntLit(tok.value, span=tok.span)
        if kind is TokenKind.FLOAT:
            self.next()
            return ast.FloatLit(tok.value, span=tok.span)
        if kind is TokenKind.STRING:
            self.next()
            return ast.StringLit(tok.value, span=tok.span)
        if kind is TokenKind.IDENT:
            self.next()
            if self.accept(TokenKind.LPAREN):
                return ast.Call(tok.value, self.parse_expr_list(TokenKind.RPAREN, "')'"), span=tok.span)
            return ast.Name(tok.value, span=tok.span)
        if kind is TokenKind.LPAREN:
            self.next()
            expr = self.parse_expr()
            self.expect(TokenKind.RPAREN, "')'")
            return expr
        if kind is TokenKind.LBRACKET:
            self.next()
            return ast.ListLit(self.parse_expr_list(TokenKind.RBRACKET, "']'"), span=tok.span)
        if kind is TokenKind.LBRACE:
            self.next()
            return ast.SetLit(self.parse_expr_list(TokenKind.RBRACE, "'}'"), span=tok.span)
        if kind is TokenKind.QUOTE:
            self.next()
            expr = self.parse_expr()
            self.expect(TokenKind.QUOTE, "closing quote")
            return ast.Uneval(expr, span=tok.span)
        if kind is TokenKind.SPEC:
            first = tok.value[0] if tok.value else None
            if first is None or not first.is_keyword(*PROC_SPEC_WORDS):
                self.fail("only a procedure specification may appear inside an expression")
            self.next()
            spec = self.parse_proc_spec(tok)
            if not self.at_kw('proc'):
                raise ParseError("a procedure specification must precede a procedure definition", tok.span)
            return replace(self.parse_proc(), spec=spec)
        if kind is TokenKind.KEYWORD:
            word = tok.value
            if word in ('true', 'false'):
                self.next()
                return ast.BoolLit(word == 'true', span=tok.span)
            if word == 'type':
                self.next()
                self.expect(TokenKind.LPAREN, "'('")
                expr = self.parse_expr()
                self.expect(TokenKind.COMMA, "','")
                type_ast = self.parse_type()
                self.expect(TokenKind.RPAREN, "')'")
                return ast.TypeTest(expr, type_ast, span=tok.span)
            if word == 'proc':
                return self.parse_proc()
            if word == 'RESULT':
                self.next()
                if self.clause not in RESULT_CLAUSES:
                    self.fail("RESULT is only allowed in an ensures clause", tok)
                return ast.ResultRef(span=tok.span)
            if word == 'OLD':
                self.next()
                if self.clause not in OLD_CLAUSES:
                    self.fail("OLD is only allowed in invariant and ensures clauses", tok)
                name = self.expect(TokenKind.IDENT, "identifier after OLD")
                return ast.OldRef(name.value, span=tok.span)
            if word in ('forall', 'exists'):
                return self.parse_logical_quantifier()
            if word in ast.NUM_QUANTIFIERS:
                return self.parse_numeric_quantifier()
        self.fail("expected an expression")

    def parse_logical_quantifier(self) -> ast.Expr:
        tok = self.next()
        self.require_spec(tok)
        self.expect(TokenKind.LPAREN, "'('")
        var = self.expect(TokenKind.IDENT, "bound variable").value
        self.expect(TokenKind.DCOLON, "'::'")
        type_ast = self.parse_type()
        self.expect(TokenKind.COMMA, "','")
        body = self.parse_expr()
        self.expect(TokenKind.RPAREN, "')'")
        cls = ast.Forall if tok.value == 'forall' else ast.Exists
        return cls(var, type_ast, body, span=tok.span)

    def parse_numeric_quantifier(self) -> ast.NumQuant:
        tok = self.next()
        self.require_spec(tok)
        self.expect(TokenKind.LPAREN, "'('")
        term = self.parse_expr()
        self.expect(TokenKind.COMMA, "','")
        var_tok = self.expect(TokenKind.IDENT, "range variable")
        if self.accept_kw('in'):
            rng = ast.InRange(var_tok.value, self.parse_additive(), span=var_tok.span)
        elif self.accept(TokenKind.EQ):
            low = self.parse_additive()
            self.expect(TokenKind.DOTDOT, "'..' in range")
            high = self.parse_additive()
            rng = ast.IntervalRange(var_tok.value, low, high, span=var_tok.span)
        else:
            self.fail("malformed range, expected 'v in E' or 'v = E..E'")
        filter_ = None
        if self.accept(TokenKind.COMMA):
            filter_ = self.parse_expr()
        self.expect(TokenKind.RPAREN, "')'")
        return ast.NumQuant(tok.value, term, rng, filter_, span=tok.span)

    def parse_param(self, required: bool = True) -> ast.Param:
        tok = self.expect(TokenKind.IDENT, "parameter name")
        type_ast = None
        if self.accept(TokenKind.DCOLON):
            type_ast = self.parse_type()
        elif required:
            self.fail(f"parameter '{tok.value}' needs a type annotation")
        return ast.Param(tok.value, type_ast, span=tok.span)

    def parse_proc(self) -> ast.ProcDef:
        head = self.expect_kw('proc')
        saved, self.clause = self.clause, None
        try:
            self.expect(TokenKind.LPAREN, "'('")
            params = []
            if not self.at(TokenKind.RPAREN):
                params.append(self.parse_param())
                while self.accept(TokenKind.COMMA):
                    params.append(self.parse_param())
            self.expect(TokenKind.RPAREN, "')'")
            seen = set()
            for p in params:
                if p.name in seen:
                    raise ParseError(f"duplicate parameter '{p.name}'", p.span)
                seen.add(p.name)
            self.expect(TokenKind.DCOLON, "'::' and a return type")
            ret_type = self.parse_type()
            self.expect(TokenKind.SEMI, "';'")
            globals_: list[str] = []
            locals_: list[ast.LocalDecl] = []
            while self.at_kw('global', 'local'):
                word = self.next()
                if word.value == 'global':
                    globals_.append(self.expect(TokenKind.IDENT, "identifier").value)
                    while self.accept(TokenKind.COMMA):
                        globals_.append(self.expect(TokenKind.IDENT, "identifier").value)
                else:
                    locals_.append(self.parse_local())
                    while self.accept(TokenKind.COMMA):
                        locals_.append(self.parse_local())
                self.expect(TokenKind.SEMI, "';'")
            body = self.parse_block(('end',))
            self.expect_kw('end')
            self.expect_kw('proc')
        finally:
            self.clause = saved
        return ast.ProcDef(tuple(params), ret_type, tuple(globals_), tuple(locals_), None, body,
                           span=head.span)

    def parse_local(self) -> ast.LocalDecl:
        tok = self.expect(TokenKind.IDENT, "local name")
        type_ast = self.parse_type() if self.accept(TokenKind.DCOLON) else None
        init = self.parse_expr() if self.accept(TokenKind.ASSIGN) else None
        return ast.LocalDecl(tok.value, type_ast, init, span=tok.span)

    # ------------------------------------------------------------ types

    def parse_type_list(self, closing: TokenKind, what: str) -> tuple[ast.TypeAst, ...]:
        items = []
        if not self.at(closing):
            items.append(self.parse_type())
            while self.accept(TokenKind.COMMA):
                items.append(self.parse_type())
        self.expect(closing, what)
        return tuple(items)

    def parse_type(self) -> ast.TypeAst:
        tok = self.peek()
        if tok.kind is TokenKind.KEYWORD:
            word = tok.value
            if word in BASE_TYPES:
                self.next()
                return ast.TypeName(word, span=tok.span)
            if word == 'list':
                self.next()
                self.expect(TokenKind.LPAREN, "'('")
                args = self.parse_type_list(TokenKind.RPAREN, "')'")
                if len(args) != 1:
                    raise ParseError("list takes exactly one type argument", tok.span)
                return ast.ListType(args[0], span=tok.span)
            if word == 'Or':
                self.next()
                self.expect(TokenKind.LPAREN, "'('")
                args = self.parse_type_list(TokenKind.RPAREN, "')'")
                if len(args) < 2:
                    raise ParseError("Or takes at least two type arguments", tok.span)
                return ast.OrType(args, span=tok.span)
            if word == 'procedure':
                self.next()
                self.expect(TokenKind.LBRACKET, "'['")
                ret = self.parse_type_list(TokenKind.RBRACKET, "']'")
                if len(ret) != 1:
                    raise ParseError("procedure takes exactly one return type", tok.span)
                self.expect(TokenKind.LPAREN, "'('")
                args = self.parse_type_list(TokenKind.RPAREN, "')'")
                return ast.ProcType(ret[0], args, span=tok.span)
        if tok.kind is TokenKind.LBRACE:
            self.next()
            args = self.parse_type_list(TokenKind.RBRACE, "'}'")
            if len(args) != 1:
                raise ParseError("set type takes exactly one element type", tok.span)
            return ast.SetType(args[0], span=tok.span)
        if tok.kind is TokenKind.LBRACKET:
            self.next()
            return ast.RecordType(self.parse_type_list(TokenKind.RBRACKET, "']'"), span=tok.span)
        if tok.kind is TokenKind.IDENT:
            self.next()
            if self.accept(TokenKind.LPAREN):
                return ast.TaggedType(tok.value, self.parse_type_list(TokenKind.RPAREN, "')'"),
                                      span=tok.span)
            return ast.NamedTypeRef(tok.value, span=tok.span)
        self.fail("expected a type")


def parse_program(tokens: list[Token]) -> ast.Program:
    """Parse a full token stream; raises ParseFailure carrying every syntax error."""
    return Parser(tokens).parse_program()


def _parse_fragment(tokens: list[Token], clause: Optional[str], rule) -> object:
    parser = Parser(tokens, clause)
    try:
        result = rule(parser)
        parser.expect(TokenKind.EOF, "end of input")
    except ParseError as e:
        parser.errors.append(e)
    parser.finish()
    return result


def parse_type_expr(tokens: list[Token]) -> ast.TypeAst:
    return _parse_fragment(tokens, None, Parser.parse_type)


def parse_spec_expr(tokens: list[Token], clause: str = 'ensures') -> ast.Expr:
    """Parse a spec expression as it would appear in `clause`
    (requires, ensures, invariant, decreases, exception, assert or decl)."""
    return _parse_fragment(tokens, clause, Parser.parse_expr)


def parse_source(text: str, path: str = '<input>') -> ast.Program:
    """Tokenize and parse; lexical errors are reported as a ParseFailure too."""
    try:
        tokens = tokenize(text, path)
    except LexError as e:
        raise ParseFailure([e.to_diagnostic()]) from None
    return parse_program(tokens)
