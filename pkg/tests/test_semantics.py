import math
from fractions import Fraction

import pytest

from minimaple import nodes as ast
from minimaple.errors import ExecutionError
from minimaple.interpreter import NORMAL, ErrorState, Interpreter, RunOptions, State
from minimaple.lexer import int_value, tokenize
from minimaple.parser import parse_spec_expr
from minimaple.values import (
    BoolVal, FloatVal, IntVal, ListVal, ProcVal, RationalVal, RecordVal, SetVal, StringVal, SymbolVal,
    make_set, show, to_json,
)


def float_product(*factors):
    acc = 1.0
    for f in factors:
        acc *= f
    return acc


def evaluate(text, state=None, **options):
    """Evaluate one expression; returns the value or the error state."""
    interp = Interpreter(RunOptions(**options))
    state = state or State()
    new_state, value = interp.eval_expr(state, parse_spec_expr(tokenize(text)))
    return new_state if value is None else value


def spec_value(text, state=None, **options):
    interp = Interpreter(RunOptions(**options))
    return interp.eval_spec_expr(state or State(), parse_spec_expr(tokenize(text)))


# ---------------------------------------------------------------- expressions

@pytest.mark.parametrize('text, expected', [
    ('1 + 2 * 3', IntVal(7)),
    ('1/2 + 1/2', IntVal(1)),
    ('1/3', RationalVal(Fraction(1, 3))),
    ('2 * 1.5', FloatVal(3.0)),
    ('7 mod 3', IntVal(1)),
    ('-(2 - 5)', IntVal(3)),
    ('1 = 1.0', BoolVal(True)),
    ('[1, 2] <> [1, 2]', BoolVal(False)),
    ('[10, 20, 30][2]', IntVal(20)),
    ('{3, 1, 3}', SetVal((IntVal(1), IntVal(3)))),
    ('nops([4, 5, 6])', IntVal(3)),
    ('type(1, rational)', BoolVal(True)),
    ('type(1.5, Or(integer,float))', BoolVal(True)),
    ('type([1, 2.5], list(integer))', BoolVal(False)),
    ('false and 1', BoolVal(False)),
    ('undefined', SymbolVal('undefined')),
    ('"a"', StringVal('a')),
])
def test_expression_values(text, expected):
    assert evaluate(text) == expected


@pytest.mark.parametrize('text, message', [
    ('1/0', 'division by zero'),
    ('[1, 2, 3][4]', 'index out of bounds'),
    ('true and 1', "non-boolean operand of 'and': 1"),
    ('"a" + 1', 'arithmetic on non-numeric value "a"'),
    ('1.5 mod 2', 'mod needs integer operands'),
    ('f(1)', 'calling a non-procedure value'),
])
def test_expression_errors(text, message):
    result = evaluate(text)
    assert isinstance(result, ErrorState)
    assert result.message == message


FACTORIAL = "p := 1;\nfor k from 1 to {n} do p := p * k; end do;\n"


def test_integers_stay_exact_past_the_display_limit(run):
    result = run(FACTORIAL.format(n=2000))
    assert result.ok
    p = result.state.globals['p']
    assert p == IntVal(math.factorial(2000))
    text = show(p)
    assert len(text) == 5736
    assert text.endswith('0' * 499)
    assert int_value(text) == p.value
    assert to_json(p) == text
    assert result.trace[-1].detail == f"p := {text}"


def test_float_overflow_is_a_runtime_error(run):
    result = run(FACTORIAL.format(n=200) + "g := p * 1.5;\n")
    assert result.error.message == 'number too large for float arithmetic'
    assert result.state.globals['p'] == IntVal(math.factorial(200))
    assert 'g' not in result.state.globals


def test_sets_order_numbers_of_any_size():
    big = 10 ** 400
    s = make_set([IntVal(big), FloatVal(1.5), IntVal(-big), RationalVal(Fraction(big + 1, 2))])
    assert s.items == (IntVal(-big), FloatVal(1.5), RationalVal(Fraction(big + 1, 2)), IntVal(big))
    assert show(RationalVal(Fraction(1, big))) == '1/1' + '0' * 400


def test_error_state_absorbs_everything(parse):
    interp = Interpreter()
    stuck = ErrorState('boom')
    program = parse("f := proc()::integer; return 1; end proc;\nx := 1;\n")
    assert interp.exec_command(stuck, program.commands[1]) == (stuck, NORMAL)
    assert interp.eval_expr(stuck, ast.IntLit(1)) == (stuck, None)
    proc = ProcVal(program.commands[0].sources[0], None, 'f')
    assert interp.apply_procedure(proc, [], stuck) == (stuck, None)
    assert interp.trace == []


def test_error_inside_expression_keeps_its_position(run):
    result = run("x := 1;\ny := x / 0;\n")
    assert not result.ok
    assert result.error.message == 'division by zero'
    assert result.error.span.line == 2
    assert result.diagnostics[0].format().endswith('error[runtime]: division by zero')
    assert result.state.globals == {'x': IntVal(1)}


# ---------------------------------------------------------------- programs

def test_product(run_corpus):
    result = run_corpus('product.mm')
    assert result.ok
    expected = RecordVal((IntVal(720), FloatVal(float_product(8.54, 34.4, 8.1, 5.4))))
    assert result.state.globals['result'] == expected
    assert result.state.globals['status'] == IntVal(-1)
    assert show(expected) == '[720, 12849.76224]'


def test_guard_must_be_bound(run_corpus):
    assert run_corpus('product_guard.mm').state.globals['result'] == run_corpus('product.mm').state.globals['result']
    result = run_corpus('product_unbound_guard.mm')
    assert result.error.message == 'non-boolean loop guard: running'


def test_premature_exit(run_corpus):
    result = run_corpus('product_contract.mm')
    assert result.ok
    assert result.state.globals['premature'] == RecordVal((IntVal(2), FloatVal(1.0)))
    assert result.state.globals['status'] == IntVal(2)


def test_contracts_hold_for_product(run_corpus):
    result = run_corpus('product_contract.mm', check_contracts=True)
    assert result.ok
    kinds = [o.kind for o in result.outcomes]
    assert kinds == ['requires', 'ensures', 'requires', 'ensures']
    assert all(o.passed for o in result.outcomes)


def test_contracts_are_skipped_by_default(run_corpus):
    assert run_corpus('product_contract.mm').outcomes == []


def product_ensures(parse_corpus):
    program = parse_corpus('product_contract.mm')
    definition = program.commands[1].sources[0]
    return definition.spec.ensures


@pytest.mark.parametrize('first, holds', [(2, True), (3, False)])
def test_ensures_clause_judges_the_premature_result(parse_corpus, first, holds):
    ensures = product_ensures(parse_corpus)
    state = State({'status': IntVal(2)})
    args = {'l': ListVal((IntVal(2), IntVal(0), IntVal(3)))}
    result = RecordVal((IntVal(first), FloatVal(1.0)))
    value = Interpreter().eval_spec_expr(state, ensures, bindings=args, result=result)
    assert value == BoolVal(holds)


INC = (
    "(*@ requires x >= 0; ensures RESULT = x + 1; @*)\n"
    "inc := proc(x::integer)::integer; return {body}; end proc;\n"
    "y := inc({arg});\n"
)


def test_postcondition_violation(run):
    source = INC.format(body='x', arg='3')
    result = run(source, check_contracts=True)
    assert result.error.message == 'postcondition violated'
    assert [o.passed for o in result.outcomes] == [True, False]
    assert run(source).state.globals['y'] == IntVal(3)


def test_precondition_violation(run):
    result = run(INC.format(body='x + 1', arg='-1'), check_contracts=True)
    assert result.error.message == 'precondition violated'
    assert 'y' not in result.state.globals


CHK = (
    "(*@ requires true; ensures RESULT = x; exception {clause}; @*)\n"
    "chk := proc(x::integer)::integer;\n"
    "  if x < 0 then error \"negative\"; end if;\n"
    "  return x;\n"
    "end proc;\n"
    "y := chk(-5);\n"
)


def test_exception_clause_holds(run):
    result = run(CHK.format(clause='x < 0'), check_contracts=True)
    assert result.error.message == 'negative'
    assert [(o.kind, o.passed) for o in result.outcomes] == [('requires', True), ('exception', True)]


def test_exception_clause_violated(run):
    result = run(CHK.format(clause='x > 0'), check_contracts=True)
    assert result.error.message == 'exceptional postcondition violated'


def test_loop_invariant_and_variant(run_corpus):
    result = run_corpus('sum_loop.mm', check_loop_specs=True)
    assert result.ok
    assert result.state.globals['s'] == IntVal(5050)
    invariants = [o for o in result.outcomes if o.kind == 'invariant']
    variants = [o for o in result.outcomes if o.kind == 'variant']
    assert len(invariants) == 101
    assert len(variants) == 100
    assert all(o.passed for o in result.outcomes)
    shown = [t.detail for t in result.trace if t.event == 'variant']
    assert shown[0] == 'decreases 99'
    assert shown[-1] == 'decreases 0'


def test_broken_loop_breaks_invariant(run_corpus):
    result = run_corpus('sum_loop_broken.mm', check_loop_specs=True)
    assert result.error.message == 'invariant violated'
    assert [o.passed for o in result.outcomes if o.kind == 'invariant'] == [True, False]
    assert run_corpus('sum_loop_broken.mm').state.globals['s'] == IntVal(5150)


def test_variant_must_decrease(run):
    result = run(
        "i := 0;\n"
        "while i < 3 do (*@ invariant true; decreases i; @*) i := i + 1; end do;\n",
        check_loop_specs=True)
    assert result.error.message == 'variant violated'
    assert result.error.label == '1'


def test_assertions(run_corpus, run):
    result = run_corpus('assert_example.mm')
    assert result.ok
    assert [(o.kind, o.passed) for o in result.outcomes] == [('assert', True)]

    failing = "x := 1;\nASSERT(x = 2, ''x is two``);\n"
    result = run(failing)
    assert result.error.message == 'assertion failed'
    assert result.error.label == 'x is two'
    assert 'assertion failed: x is two' in result.diagnostics[0].format()
    assert run(failing, check_assertions=False).ok


def test_define_rules(run_corpus):
    result = run_corpus('define_fac.mm')
    assert result.ok
    assert result.state.globals['f0'] == IntVal(1)
    assert result.state.globals['f5'] == IntVal(120)


def test_no_define_rule_matches(run):
    result = run("define(half, half(n::integer) = n / 2);\nx := half(1.5);\n")
    assert result.error.message == 'no rule matches'


def test_error_command_stops_execution(run_corpus):
    result = run_corpus('error_first.mm')
    assert result.error.message == 'boom'
    assert 'x' not in result.state.globals


def test_static_scoping(run):
    result = run(
        "x := 10;\n"
        "g := proc()::integer; return x; end proc;\n"
        "h := proc()::integer; local x::integer := 5; return g(); end proc;\n"
        "r := h();\n")
    assert result.state.globals['r'] == IntVal(10)


def test_closures_see_their_defining_frame(run):
    result = run(
        "x := 10;\n"
        "mk := proc()::integer;\n"
        "  local x::integer := 1, g;\n"
        "  g := proc()::integer; return x; end proc;\n"
        "  x := 2;\n"
        "  return g();\n"
        "end proc;\n"
        "r := mk();\n")
    assert result.state.globals['r'] == IntVal(2)
    assert result.state.globals['x'] == IntVal(10)


def test_globals_are_written_through(run):
    result = run(
        "count := 0;\n"
        "bump := proc()::integer; global count; count := count + 1; return count; end proc;\n"
        "a := bump();\nb := bump();\n")
    assert result.state.globals['count'] == IntVal(2)
    assert result.state.globals['b'] == IntVal(2)


def test_argument_checks(run):
    base = "f := proc(x::integer)::integer; return x; end proc;\n"
    assert run(base + "y := f(1.5);\n").error.message == 'argument type mismatch'
    assert run(base + "y := f(1, 2);\n").error.message == 'argument count mismatch'


def test_procedure_call_refused_in_specification(run):
    result = run(
        "f := proc(x::integer)::integer; return x; end proc;\n"
        "ASSERT(f(1) = 1);\n")
    assert result.error.message == 'procedure call inside a specification'


def test_abstract_predicate_is_not_executable(run):
    result = run("(*@ isPos(x::integer); @*)\nASSERT(isPos(1));\n")
    assert result.error.message == 'abstract predicate not executable'


# ---------------------------------------------------------------- loops

@pytest.mark.parametrize('loop, total, last', [
    ("for k from 1 to 5 do s := s + k; end do;", 15, 6),
    ("for k from 5 by -1 to 1 do s := s + k; end do;", 15, 0),
    ("for k from 1 to 10 while s < 10 do s := s + k; end do;", 10, 5),
    ("for k from 2 by 2 to 7 do s := s + k; end do;", 12, 8),
    ("for k to 3 do s := s + k; end do;", 6, 4),
])
def test_for_loop_desugaring(run, loop, total, last):
    result = run("s := 0;\n" + loop + "\n")
    assert result.ok
    assert result.state.globals['s'] == IntVal(total)
    assert result.state.globals['k'] == IntVal(last)


def test_stop_value_is_evaluated_once(run):
    result = run("n := 3; s := 0;\nfor k from 1 to n do n := n + 1; s := s + 1; end do;\n")
    assert result.state.globals['s'] == IntVal(3)


def test_return_leaves_loop_and_procedure(run):
    result = run(
        "find := proc(l::list(integer))::integer; local k::integer;\n"
        "  for k from 1 to nops(l) do if l[k] > 2 then return k; end if; end do;\n"
        "  return 0;\n"
        "end proc;\n"
        "at := find([1, 2, 5, 7]);\n")
    assert result.state.globals['at'] == IntVal(3)


def test_iteration_chain(run):
    result = run("i := 0;\nwhile i < 3 do i := i + 1; end do;\n", record_iterations=True)
    chain = result.iterations[0]
    assert [s['i'] for s in chain.guard_states] == [IntVal(0), IntVal(1), IntVal(2), IntVal(3)]
    assert len(chain.body_states) == 3
    assert chain.body_states == chain.guard_states[1:]


def test_step_limit(run):
    result = run("x := 0;\nwhile true do x := x + 1; end do;\n", step_limit=50)
    assert result.error.message == 'step limit'
    assert result.steps == 51


def test_run_options_validation():
    with pytest.raises(ValueError):
        RunOptions(step_limit=0)
    with pytest.raises(ValueError):
        RunOptions(quantifier_bound=0)


# ---------------------------------------------------------------- specifications

@pytest.mark.parametrize('text, expected', [
    ('add(i, i=1..10)', IntVal(55)),
    ('mul(i, i=1..0)', IntVal(1)),
    ('add(e, e in [1, 2.5])', FloatVal(3.5)),
    ('seq(i*i, i=1..3)', ListVal((IntVal(1), IntVal(4), IntVal(9)))),
    ('max(e, e in [3, 9, 2])', IntVal(9)),
    ('min(e, e in {3, 9, 2}, e > 2)', IntVal(3)),
    ('forall(i::integer, 1 <= i and i <= 5 implies i * i >= i)', BoolVal(True)),
    ('exists(i::integer, 1 <= i and i <= 5 and i * i = 16)', BoolVal(True)),
    ('exists(i::integer, 0 < i and i < 4 and i = 4)', BoolVal(False)),
    ('true implies false', BoolVal(False)),
    ('false implies 1', BoolVal(True)),
    ('(1 < 2) equivalent (2 > 1)', BoolVal(True)),
])
def test_specification_values(text, expected):
    assert spec_value(text) == expected


@pytest.mark.parametrize('text, message', [
    ('min(i, i=1..0)', 'min over an empty range'),
    ('forall(i::integer, i >= 0)', 'unbounded quantifier'),
    ('forall(x::float, x = x)', 'unbounded quantifier'),
    ('add(i, i=1..100)', 'quantifier range too large'),
    ('RESULT = 1', 'RESULT has no value here'),
])
def test_specification_errors(text, message):
    with pytest.raises(ExecutionError) as excinfo:
        spec_value(text, quantifier_bound=50)
    assert excinfo.value.message == message


def test_quantifier_bounds_come_from_state():
    state = State({'n': IntVal(4)})
    assert spec_value('forall(i::integer, 1 <= i and i < n implies i < 4)', state) == BoolVal(True)
    assert spec_value('add(i, i=1..n)', state) == IntVal(10)


def test_old_values():
    interp = Interpreter()
    state = State({'s': IntVal(3)})
    expr = parse_spec_expr(tokenize('s = OLD s + 1'), 'invariant')
    assert interp.eval_spec_expr(state, expr, old={'s': IntVal(2)}) == BoolVal(True)
    stuck, _ = interp.eval_expr(state, expr)
    assert stuck.message == 'OldRef is only meaningful in a specification'


def test_specification_evaluation_leaves_state_unchanged():
    state = State({'l': ListVal((IntVal(1), IntVal(2))), 'n': IntVal(2)})
    before = state.snapshot()
    spec_value('forall(i::integer, 1 <= i and i <= n implies l[i] > 0) and add(e, e in l) = 3', state)
    assert state.snapshot() == before
