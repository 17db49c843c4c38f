import pytest

from minimaple import nodes as ast
from minimaple.errors import LexError, ParseFailure
from minimaple.lexer import TokenKind, tokenize
from minimaple.parser import parse_spec_expr, parse_type_expr
from minimaple.printer import pretty_print, quote_string, to_json


def kinds(text):
    return [t.kind for t in tokenize(text)]


def messages(failure):
    return [d.message for d in failure.value.diagnostics]


# ---------------------------------------------------------------- lexer

def test_tokenize_assignment():
    tokens = tokenize("x := 1.5e3;")
    assert [t.kind for t in tokens] == [
        TokenKind.IDENT, TokenKind.ASSIGN, TokenKind.FLOAT, TokenKind.SEMI, TokenKind.EOF]
    assert tokens[2].value == 1500.0


def test_tokens_carry_line_and_column():
    tokens = tokenize("a:=1;\n  b:=2;", 'prog.mm')
    b = tokens[4]
    assert b.value == 'b'
    assert (b.span.file, b.span.line, b.span.column, b.span.length) == ('prog.mm', 2, 3, 1)


def test_line_comment_is_skipped():
    tokens = tokenize("# pi = {x:integer}\nx:=1;")
    assert tokens[0].value == 'x'
    assert tokens[0].span.line == 2


def test_interval_is_not_a_float():
    assert kinds("1..n") == [TokenKind.INT, TokenKind.DOTDOT, TokenKind.IDENT, TokenKind.EOF]


def test_spec_comment_is_a_single_token():
    tokens = tokenize("(*@ requires true; @*) p")
    assert tokens[0].kind is TokenKind.SPEC
    inner = tokens[0].value
    assert inner[0].is_keyword('requires')
    assert [t.kind for t in inner] == [TokenKind.KEYWORD, TokenKind.KEYWORD, TokenKind.SEMI]
    assert tokens[1].value == 'p'


def test_backquoted_label_is_a_string():
    tokens = tokenize("''test failed``")
    assert tokens[0].kind is TokenKind.STRING
    assert tokens[0].value == 'test failed'


def test_named_type_token():
    tokens = tokenize("`type/DDO`;")
    assert tokens[0].kind is TokenKind.TYPENAME
    assert tokens[0].value == 'DDO'


def test_backquoted_identifier():
    tokens = tokenize("`list` := 1;")
    assert tokens[0].kind is TokenKind.IDENT
    assert tokens[0].value == 'list'


def test_string_escapes():
    tokens = tokenize(r'"a\"b\n"')
    assert tokens[0].value == 'a"b\n'


@pytest.mark.parametrize('text, message', [
    ('x := "abc', 'unterminated string literal'),
    ('x := 1 $ 2;', "illegal character '$'"),
    ('(*@ requires true;', 'unterminated spec comment'),
    ('(*@ (*@ @*) @*)', 'nested spec comment'),
    ('x := 1; @*)', "'@*)' without an opening spec comment"),
    ('é := 1;', "illegal character 'é'"),
    ('x := ²;', "illegal character '²'"),
    ('x := 1e400;', 'float literal out of range: 1e400'),
])
def test_lex_errors(text, message):
    with pytest.raises(LexError) as failure:
        tokenize(text)
    assert failure.value.message == message


def test_unterminated_spec_points_at_its_start():
    with pytest.raises(LexError) as failure:
        tokenize("x := 1;\n(*@ requires true;")
    assert (failure.value.span.line, failure.value.span.column) == (2, 1)


def test_lex_error_becomes_parse_failure(parse):
    with pytest.raises(ParseFailure) as failure:
        parse("x := 1 $ 2;")
    assert [d.code for d in failure.value.diagnostics] == ['lex']


# ---------------------------------------------------------------- parser

def test_arithmetic_precedence(parse):
    program = parse("x := 1 + 2 * 3;")
    assert program.commands[0] == ast.MultiAssign(
        ('x',), (ast.Binary('+', ast.IntLit(1), ast.Binary('*', ast.IntLit(2), ast.IntLit(3))),))


def test_not_binds_tighter_than_and(parse):
    expr = parse("x := not a and b;").commands[0].sources[0]
    assert expr == ast.Binary('and', ast.Unary('not', ast.Name('a')), ast.Name('b'))


def test_unary_minus(parse):
    expr = parse("x := -2 - 3;").commands[0].sources[0]
    assert expr == ast.Binary('-', ast.Unary('-', ast.IntLit(2)), ast.IntLit(3))


def test_multiple_assignment(parse):
    cmd = parse("a, b := 1, 2;").commands[0]
    assert cmd.targets == ('a', 'b')
    assert cmd.sources == (ast.IntLit(1), ast.IntLit(2))


def test_if_elif_else(parse):
    cmd = parse("if a then x:=1; elif b then x:=2; else x:=3; end if;").commands[0]
    assert isinstance(cmd, ast.If)
    assert [cond for cond, _ in cmd.branches] == [ast.Name('a'), ast.Name('b')]
    assert cmd.else_body == (ast.MultiAssign(('x',), (ast.IntLit(3),)),)


def test_product_procedure_shape(parse_corpus):
    program = parse_corpus('product.mm')
    assert len(program.commands) == 3
    assign = program.commands[1]
    assert assign.targets == ('prod',)
    proc = assign.sources[0]
    assert isinstance(proc, ast.ProcDef)
    assert proc.params == (ast.Param('l', ast.ListType(ast.OrType(
        (ast.TypeName('integer'), ast.TypeName('float'))))),)
    assert proc.ret_type == ast.RecordType((ast.TypeName('integer'), ast.TypeName('float')))
    assert proc.globals == ('status',)
    assert [d.name for d in proc.locals] == ['i', 'x', 'si', 'sf']
    assert proc.locals[0].type_ast is None
    assert proc.locals[2].init == ast.IntLit(1)
    assert proc.locals[3].init == ast.FloatLit(1.0)

    loop, reset, ret = proc.body
    assert isinstance(loop, ast.ForLoop)
    assert loop.var == 'i'
    assert (loop.start, loop.step) == (ast.IntLit(1), ast.IntLit(1))
    assert loop.stop == ast.Call('nops', (ast.Name('l'),))
    assert loop.cond is None
    assert len(loop.body) == 3
    assert reset.sources == (ast.Unary('-', ast.IntLit(1)),)
    assert ret == ast.Return(ast.ListLit((ast.Name('si'), ast.Name('sf'))))


def test_command_spans_follow_source_lines(parse_corpus):
    proc = parse_corpus('product.mm').commands[1].sources[0]
    loop, reset, ret = proc.body
    assert [loop.span.line, reset.span.line, ret.span.line] == [7, 27, 29]
    assert [c.span.line for c in loop.body] == [8, 9, 11]


def test_procedure_spec_attaches_to_definition(parse_corpus):
    proc = parse_corpus('product_contract.mm').commands[1].sources[0]
    spec = proc.spec
    assert isinstance(spec, ast.ProcSpec)
    assert spec.requires == ast.BoolLit(True)
    assert spec.globals == ('status',)
    assert isinstance(spec.ensures, ast.Binary) and spec.ensures.op == 'or'
    assert spec.exceptional is None


def test_loop_spec(parse_corpus):
    loop = parse_corpus('sum_loop.mm').commands[3]
    assert loop.var is None
    assert loop.cond == ast.Binary('<=', ast.Name('i'), ast.Name('n'))
    assert loop.spec.invariant == ast.Binary(
        '=', ast.Name('s'),
        ast.Binary('-', ast.Binary('+', ast.OldRef('s'), ast.Name('i')), ast.IntLit(1)))
    assert loop.spec.decreases == ast.Binary('-', ast.Name('n'), ast.Name('i'))


def test_declarations(parse_corpus):
    program = parse_corpus('define_fac.mm')
    assert [type(d).__name__ for d in program.declarations] == [
        'Define', 'NamedTypeDecl', 'AbstractTypeDecl',
        'PredicateDecl', 'PredicateDecl', 'PredicateDecl', 'PredicateDecl', 'PredicateDecl',
        'Assume',
    ]
    define = program.declarations[0]
    assert define.rules[0][0] == ast.Call('fac', (ast.IntLit(0),))
    assert define.rules[1][0] == ast.Call('fac', (ast.TypedVar('n', ast.TypeName('integer')),))
    in_field = program.declarations[3]
    assert in_field.params == (ast.Param('c', None),)
    assert in_field.result is None
    assert program.declarations[6].result == ast.TypeName('integer')
    assert len(program.commands) == 2


def test_assert_with_label(parse_corpus):
    program = parse_corpus('assert_example.mm')
    assert program.commands[3] == ast.Assert(
        ast.TypeTest(ast.Name('y'), ast.TypeName('integer')), 'test failed')


def test_empty_program(parse_corpus):
    assert parse_corpus('empty.mm') == ast.Program((), ())


def test_type_expression():
    t = parse_type_expr(tokenize("procedure[integer](list(Or(integer,float)),{string})"))
    assert t == ast.ProcType(ast.TypeName('integer'), (
        ast.ListType(ast.OrType((ast.TypeName('integer'), ast.TypeName('float')))),
        ast.SetType(ast.TypeName('string')),
    ))


def test_numeric_quantifier_forms():
    interval = parse_spec_expr(tokenize("add(i, i=1..n)"))
    assert interval == ast.NumQuant('add', ast.Name('i'), ast.IntervalRange('i', ast.IntLit(1), ast.Name('n')))
    member = parse_spec_expr(tokenize("mul(e, e in l, type(e,integer))"))
    assert member.range == ast.InRange('e', ast.Name('l'))
    assert member.filter == ast.TypeTest(ast.Name('e'), ast.TypeName('integer'))


def test_syntax_errors_are_collected_with_recovery(parse):
    with pytest.raises(ParseFailure) as failure:
        parse("x := ;\ny := 2;\nz := );\n")
    diagnostics = failure.value.diagnostics
    assert [d.span.line for d in diagnostics] == [1, 3]
    assert all(d.code == 'syntax' for d in diagnostics)
    assert diagnostics[0].message == "expected an expression, found ';'"


def test_syntax_error_position(parse):
    with pytest.raises(ParseFailure) as failure:
        parse("x := 1 +;")
    span = failure.value.diagnostics[0].span
    assert (span.line, span.column) == (1, 9)


@pytest.mark.parametrize('text, message', [
    ("x := 1 < 2 < 3;", "comparison operators do not chain"),
    ("a, b := 1;", "assignment has 2 target(s) but 1 value(s)"),
    ("x := 1;\n`type/T` := integer;", "declarations must precede commands"),
    ("x := a implies b;", "'implies' is only allowed in specifications"),
    ("x := forall(i::integer, true);", "'forall' is only allowed in specifications"),
    ("p := proc(a::integer, a::integer)::integer; return a; end proc;", "duplicate parameter 'a'"),
    ("p := proc(a)::integer; return a; end proc;", "parameter 'a' needs a type annotation"),
    ("x + 1;", "only procedure calls can be used as commands"),
    ("(*@ requires RESULT = 1; ensures true; @*)\np := proc()::integer; return 1; end proc;",
     "RESULT is only allowed in an ensures clause"),
    ("s := 0;\nwhile s < 3 do (*@ invariant OLD t = 1; decreases 3 - s; @*) s := s + 1; end do;\n"
     "(*@ requires OLD s = 1; ensures true; @*)\np := proc()::integer; return 1; end proc;",
     "OLD is only allowed in invariant and ensures clauses"),
])
def test_syntax_error_messages(parse, text, message):
    with pytest.raises(ParseFailure) as failure:
        parse(text)
    assert any(message in m for m in messages(failure))


def error_lines(failure):
    return [d.span.line for d in failure.value.diagnostics]


@pytest.mark.parametrize('text, lines', [
    ("(*@ foo( ; @*)\nx := ;\ny := 1;", [1, 2]),
    ("(*@ requires x >; ensures true; @*)\np := proc(x::integer)::integer; return x; end proc;\nz := ;", [1, 3]),
    ("i := 0;\nwhile i < 3 do (*@ invariant i >; decreases 3 - i; @*) i := i + 1; end do;\nz := ;", [2, 3]),
    ("x := 1;\n`type/T` := integer;\ny := ;", [2, 3]),
    ("x := 1;\nif x > 0 then\n(*@ invariant x > 0; decreases x; @*)\ny := ;\nend if;", [3, 4]),
    ("if true then\nx := 1;\n(*@ assume x > 0; @*)\nend if;\ny := ;", [3, 5]),
])
def test_errors_in_spec_comments_keep_later_errors(parse, text, lines):
    with pytest.raises(ParseFailure) as failure:
        parse(text)
    assert error_lines(failure) == lines


# ---------------------------------------------------------------- printer

def test_every_corpus_program_round_trips(parse, parse_corpus, corpus_names):
    for name in corpus_names:
        program = parse_corpus(name)
        text = pretty_print(program)
        assert parse(text) == program, name


def test_printing_is_idempotent(parse, parse_corpus, corpus_names):
    for name in corpus_names:
        once = pretty_print(parse_corpus(name))
        assert pretty_print(parse(once)) == once, name


def test_long_integer_literal_round_trips(parse):
    digits = '9' * 5000
    program = parse(f"x := {digits};")
    assert program.commands[0].sources[0].value == 10 ** 5000 - 1
    assert pretty_print(program) == f"x := {digits};\n"


@pytest.mark.parametrize('value', [1e300, 1e-300, 2.5e16, 0.1])
def test_float_literal_round_trips(value):
    text = pretty_print(ast.FloatLit(value))
    assert parse_spec_expr(tokenize(text)) == ast.FloatLit(value)


def test_parentheses_only_where_needed(parse):
    program = parse("x := (1 - (2 - 3)) * 4;\ny := (a + b) + c;")
    assert pretty_print(program) == "x := (1 - (2 - 3)) * 4;\ny := a + b + c;\n"


def test_procedure_layout(parse):
    program = parse("f := proc(n::integer)::integer; local k::integer := 2; return n * k; end proc;")
    assert pretty_print(program) == (
        "f := proc(n::integer)::integer;\n"
        "    local k::integer := 2;\n"
        "    return n * k;\n"
        "end proc;\n"
    )


def test_keyword_names_are_backquoted():
    assert pretty_print(ast.Name('list')) == '`list`'
    assert pretty_print(ast.Name('total')) == 'total'


def test_quote_string_escapes():
    assert quote_string('say "hi"\n') == '"say \\"hi\\"\\n"'


def test_ast_json(parse):
    tree = to_json(parse("x := 1;"))
    assert tree['kind'] == 'Program'
    assign = tree['children'][0]
    assert assign['kind'] == 'MultiAssign'
    assert assign['attrs'] == {'targets': ['x']}
    literal = assign['children'][0]
    assert literal['kind'] == 'IntLit'
    assert literal['attrs'] == {'value': 1}
    assert literal['children'] == []
    assert (literal['span']['line'], literal['span']['column']) == (1, 6)
