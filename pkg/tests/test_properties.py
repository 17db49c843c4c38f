"""Randomized laws of the type lattice, type environments, the printer and the runtime arithmetic."""
import random
from fractions import Fraction

import pytest

from minimaple import nodes as ast
from minimaple.errors import CheckerFault
from minimaple.lexer import tokenize
from minimaple.parser import parse_spec_expr
from minimaple.printer import pretty_print
from minimaple.typesys import (
    ANYTHING, BOOLEAN, FLOAT, INTEGER, RATIONAL, STRING, SYMBOL,
    ListOf, Procedure, Record, SetOf, Tagged, TypeEnv, Union,
    can_specialize, combine, is_subtype, make_union, normalize, specialize, subtract, super_type,
)
from minimaple.values import IntVal, RationalVal, arith, from_number, make_set

CASES = 1000
ATOMS = (INTEGER, RATIONAL, FLOAT, BOOLEAN, STRING, SYMBOL, ANYTHING)


def random_type(rng: random.Random, depth: int = 2):
    """A normalized type term."""
    if depth == 0 or rng.random() < 0.35:
        return rng.choice(ATOMS)
    pick = rng.randrange(6)
    if pick == 0:
        return ListOf(random_type(rng, depth - 1))
    if pick == 1:
        return SetOf(random_type(rng, depth - 1))
    if pick == 2:
        return Record(tuple(random_type(rng, depth - 1) for _ in range(rng.randint(1, 2))))
    if pick == 3:
        return Procedure(random_type(rng, depth - 1), (random_type(rng, depth - 1),))
    if pick == 4:
        return Tagged(rng.choice(('P', 'Q')), (random_type(rng, depth - 1),))
    return make_union(random_type(rng, depth - 1) for _ in range(rng.randint(2, 3)))


def raw_type(rng: random.Random, depth: int = 2):
    """Like random_type, but unions are built without normalizing."""
    if depth == 0 or rng.random() < 0.35:
        return rng.choice(ATOMS[:-1])
    pick = rng.randrange(3)
    if pick == 0:
        return ListOf(raw_type(rng, depth - 1))
    if pick == 1:
        return Record((raw_type(rng, depth - 1), raw_type(rng, depth - 1)))
    return Union(tuple(raw_type(rng, depth - 1) for _ in range(rng.randint(2, 3))))


def test_subtyping_is_reflexive_and_transitive():
    rng = random.Random(11)
    for _ in range(CASES):
        a, b, c = random_type(rng), random_type(rng), random_type(rng)
        assert is_subtype(a, a)
        assert is_subtype(a, ANYTHING)
        if is_subtype(a, b) and is_subtype(b, c):
            assert is_subtype(a, c), (a, b, c)


def test_union_laws():
    rng = random.Random(12)
    for _ in range(CASES):
        a, b, c = random_type(rng), random_type(rng), random_type(rng)
        assert make_union((a, a)) == a
        assert make_union((a, b)) == make_union((b, a))
        assert make_union((make_union((a, b)), c)) == make_union((a, make_union((b, c))))
        joined = make_union((a, b))
        assert is_subtype(a, joined) and is_subtype(b, joined)


def test_super_type_is_an_upper_bound():
    rng = random.Random(13)
    for _ in range(CASES):
        a, b = random_type(rng), random_type(rng)
        sup = super_type(a, b)
        assert is_subtype(a, sup) and is_subtype(b, sup)
        if is_subtype(a, b):
            assert sup == b


def test_subtract_removes_exactly_the_tested_member():
    rng = random.Random(14)
    checked = 0
    while checked < CASES:
        t = random_type(rng)
        if not isinstance(t, Union):
            continue
        member = rng.choice(t.members)
        rest = subtract(t, member)
        assert rest is not None
        assert not is_subtype(member, rest)
        assert make_union((rest, member)) == t
        checked += 1


def test_normalize_is_idempotent():
    rng = random.Random(15)
    for _ in range(CASES):
        t = raw_type(rng)
        once = normalize(t)
        assert normalize(once) == once
        assert is_subtype(once, normalize(Union((once, rng.choice(ATOMS)))))


ENV_NAMES = ('p', 'q', 'r')


def random_env(rng: random.Random, names=ENV_NAMES) -> TypeEnv:
    return TypeEnv((n, random_type(rng)) for n in names)


def narrowing_of(rng: random.Random, t):
    """Mostly a subtype of `t`, sometimes an unrelated type."""
    pick = rng.random()
    if isinstance(t, Union) and pick < 0.5:
        return rng.choice(t.members)
    if pick < 0.8:
        return t
    return random_type(rng)


def test_specialize_then_combine_restores_the_environment():
    rng = random.Random(19)
    for _ in range(CASES):
        pi = random_env(rng)
        delta = {n: narrowing_of(rng, pi[n]) for n in ENV_NAMES if rng.random() < 0.6}
        if not can_specialize(pi, delta):
            with pytest.raises(CheckerFault):
                specialize(pi, delta)
            continue
        narrowed = specialize(pi, delta)
        assert list(narrowed) == list(pi)
        for n in pi:
            assert is_subtype(narrowed[n], pi[n])
            if n in delta and is_subtype(delta[n], pi[n]):
                assert narrowed[n] == delta[n]
        assert combine(narrowed, pi) == pi
        joined = combine(pi, narrowed)
        assert all(is_subtype(pi[n], joined[n]) and is_subtype(narrowed[n], joined[n]) for n in pi)
        assert specialize(pi, {}) == pi


def test_combine_is_an_upper_bound():
    rng = random.Random(20)
    for _ in range(CASES):
        left = random_env(rng, rng.sample(ENV_NAMES, rng.randint(0, 3)))
        right = random_env(rng, rng.sample(ENV_NAMES, rng.randint(0, 3)))
        joined = combine(left, right)
        assert set(joined) == set(left) | set(right)
        for env in (left, right):
            assert all(is_subtype(t, joined[n]) for n, t in env.items())
        assert combine(left, left) == left


NAMES = ('a', 'b', 'x1', 'total')
BINARY_OPS = ('+', '-', '*', '/', 'mod', '=', '<>', '<', '<=', '>', '>=', 'and', 'or')


def random_expr(rng: random.Random, depth: int = 4) -> ast.Expr:
    if depth == 0 or rng.random() < 0.3:
        pick = rng.randrange(4)
        if pick == 0:
            return ast.IntLit(rng.randrange(100))
        if pick == 1:
            return ast.FloatLit(rng.choice((0.5, 2.25, 10.0)))
        if pick == 2:
            return ast.BoolLit(rng.random() < 0.5)
        return ast.Name(rng.choice(NAMES))
    pick = rng.randrange(8)
    if pick == 0:
        operand = random_expr(rng, depth - 1)
        if isinstance(operand, ast.Unary) and operand.op == '-':
            return operand
        return ast.Unary('-', operand)
    if pick == 1:
        return ast.Unary('not', random_expr(rng, depth - 1))
    if pick == 2:
        return ast.Index(ast.Name(rng.choice(NAMES)), random_expr(rng, depth - 1))
    if pick == 3:
        return ast.ListLit(tuple(random_expr(rng, depth - 1) for _ in range(rng.randint(0, 2))))
    return ast.Binary(rng.choice(BINARY_OPS), random_expr(rng, depth - 1), random_expr(rng, depth - 1))


def test_printed_expressions_reparse_to_the_same_tree():
    rng = random.Random(16)
    for _ in range(CASES):
        expr = random_expr(rng)
        text = pretty_print(expr)
        assert parse_spec_expr(tokenize(text)) == expr, text


def test_rational_arithmetic_is_exact():
    rng = random.Random(17)
    for _ in range(CASES):
        p, q = rng.randint(-50, 50), rng.choice([d for d in range(-9, 10) if d != 0])
        r, s = rng.randint(-50, 50), rng.randint(1, 9)
        x = arith('/', IntVal(p), IntVal(q))
        y = arith('/', IntVal(r), IntVal(s))
        assert x == from_number(Fraction(p, q))
        assert isinstance(x, IntVal) == (p % q == 0)
        assert arith('-', arith('+', x, y), y) == x
        if not (isinstance(y, IntVal) and y.value == 0):
            assert arith('*', arith('/', x, y), y) == x
        assert isinstance(arith('*', x, y), (IntVal, RationalVal))


def test_sets_are_canonical():
    rng = random.Random(18)
    for _ in range(CASES):
        items = [IntVal(rng.randrange(6)) for _ in range(rng.randint(0, 8))]
        s = make_set(items)
        assert len(s.items) == len({i.value for i in items})
        assert [i.value for i in s.items] == sorted({i.value for i in items})
        rng.shuffle(items)
        assert make_set(items) == s
        assert make_set(s.items) == s
