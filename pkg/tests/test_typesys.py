import pytest

from minimaple import nodes as ast
from minimaple.errors import CheckerFault, TypeResolutionError
from minimaple.typesys import (
    ANYTHING, BOOLEAN, FLOAT, INTEGER, RATIONAL, STRING, SYMBOL,
    Abstract, ListOf, NamedTypeTable, Procedure, Record, SetOf, Tagged, TypeEnv, Union,
    combine, element_type, is_numeric, is_subtype, make_union, resolve, specialize, subtract,
    super_type,
)

INT_OR_FLOAT = make_union((INTEGER, FLOAT))


def test_numeric_tower():
    assert is_subtype(INTEGER, RATIONAL)
    assert not is_subtype(RATIONAL, INTEGER)
    assert not is_subtype(INTEGER, FLOAT)
    assert not is_subtype(FLOAT, RATIONAL)


def test_anything_is_top():
    for t in (INTEGER, STRING, ListOf(FLOAT), Record((INTEGER, BOOLEAN)), INT_OR_FLOAT):
        assert is_subtype(t, ANYTHING)
    assert not is_subtype(ANYTHING, INTEGER)


def test_structural_subtyping():
    assert is_subtype(ListOf(INTEGER), ListOf(RATIONAL))
    assert is_subtype(SetOf(INTEGER), SetOf(INT_OR_FLOAT))
    assert is_subtype(Record((INTEGER, FLOAT)), Record((RATIONAL, FLOAT)))
    assert not is_subtype(Record((INTEGER,)), Record((INTEGER, FLOAT)))
    assert not is_subtype(ListOf(INTEGER), SetOf(INTEGER))
    assert is_subtype(Tagged('pair', (INTEGER,)), Tagged('pair', (RATIONAL,)))
    assert not is_subtype(Tagged('pair', (INTEGER,)), Tagged('other', (INTEGER,)))


def test_procedure_subtyping_is_contravariant_in_arguments():
    narrow = Procedure(INTEGER, (RATIONAL,))
    wide = Procedure(RATIONAL, (INTEGER,))
    assert is_subtype(narrow, wide)
    assert not is_subtype(wide, narrow)


def test_union_membership():
    assert is_subtype(INTEGER, INT_OR_FLOAT)
    assert is_subtype(INT_OR_FLOAT, make_union((RATIONAL, FLOAT)))
    assert not is_subtype(INT_OR_FLOAT, INTEGER)


def test_union_normal_form():
    assert make_union((INTEGER, RATIONAL)) == RATIONAL
    assert make_union((FLOAT, INTEGER)) == Union((INTEGER, FLOAT))
    assert make_union((INTEGER, make_union((FLOAT, STRING)))) == make_union((STRING, FLOAT, INTEGER))
    assert make_union((INTEGER, ANYTHING)) == ANYTHING
    assert make_union((STRING, STRING)) == STRING
    with pytest.raises(CheckerFault):
        make_union(())


def test_type_rendering():
    prod = Procedure(Record((INTEGER, FLOAT)), (ListOf(INT_OR_FLOAT),))
    assert str(prod) == 'procedure[[integer,float]](list(Or(integer,float)))'
    assert str(SetOf(STRING)) == '{string}'
    assert str(Tagged('DDO', (INTEGER, SYMBOL))) == 'DDO(integer,symbol)'


def test_super_type():
    assert super_type(INTEGER, RATIONAL) == RATIONAL
    assert super_type(FLOAT, INTEGER) == INT_OR_FLOAT
    assert super_type(STRING, ANYTHING) == ANYTHING
    assert super_type(INT_OR_FLOAT, INTEGER) == INT_OR_FLOAT


def test_subtract_after_failed_test():
    assert subtract(INT_OR_FLOAT, INTEGER) == FLOAT
    assert subtract(INTEGER, INTEGER) is None
    assert subtract(make_union((INTEGER, FLOAT, STRING)), make_union((INTEGER, STRING))) == FLOAT
    assert subtract(ANYTHING, INTEGER) == ANYTHING
    assert subtract(INT_OR_FLOAT, STRING) == INT_OR_FLOAT


def test_numeric_and_element_types():
    assert is_numeric(INTEGER)
    assert is_numeric(INT_OR_FLOAT)
    assert not is_numeric(STRING)
    assert not is_numeric(ANYTHING)
    assert element_type(ListOf(STRING)) == STRING
    assert element_type(SetOf(INTEGER)) == INTEGER
    assert element_type(INTEGER) is None


def test_environment_is_immutable():
    pi = TypeEnv([('x', INTEGER)])
    bigger = pi.bind('y', STRING)
    assert list(pi) == ['x']
    assert list(bigger) == ['x', 'y']
    assert bigger.without('x') == TypeEnv([('y', STRING)])
    assert bigger.restrict(['y', 'z']) == TypeEnv([('y', STRING)])


def test_specialize_narrows_in_place():
    pi = TypeEnv([('x', INT_OR_FLOAT), ('y', INTEGER)])
    narrowed = specialize(pi, {'x': INTEGER, 'z': STRING})
    assert list(narrowed.items()) == [('x', INTEGER), ('y', INTEGER)]
    # a wider type never replaces a narrower one
    assert specialize(pi, {'y': RATIONAL})['y'] == INTEGER


def test_specialize_rejects_unrelated_types():
    with pytest.raises(CheckerFault):
        specialize(TypeEnv([('x', INT_OR_FLOAT)]), {'x': STRING})


def test_combine_joins_bindings():
    merged = combine(TypeEnv([('x', INTEGER)]), TypeEnv([('x', FLOAT), ('y', STRING)]))
    assert list(merged.items()) == [('x', INT_OR_FLOAT), ('y', STRING)]


def test_resolve_annotations():
    annotation = ast.ProcType(
        ast.RecordType((ast.TypeName('integer'), ast.TypeName('float'))),
        (ast.ListType(ast.OrType((ast.TypeName('float'), ast.TypeName('integer')))),))
    assert resolve(annotation) == Procedure(Record((INTEGER, FLOAT)), (ListOf(INT_OR_FLOAT),))
    assert resolve(ast.OrType((ast.TypeName('integer'), ast.TypeName('rational')))) == RATIONAL


def test_named_and_abstract_types():
    table = NamedTypeTable()
    table.define('ListInt', ast.ListType(ast.TypeName('integer')))
    table.declare_abstract('DDO')
    assert resolve(ast.NamedTypeRef('ListInt'), table) == ListOf(INTEGER)
    assert resolve(ast.SetType(ast.NamedTypeRef('DDO')), table) == SetOf(Abstract('DDO'))


def test_unknown_and_recursive_type_names():
    table = NamedTypeTable()
    table.define('A', ast.NamedTypeRef('B'))
    table.define('B', ast.ListType(ast.NamedTypeRef('A')))
    with pytest.raises(TypeResolutionError, match='recursive type definition'):
        resolve(ast.NamedTypeRef('A'), table)
    with pytest.raises(TypeResolutionError, match="unknown type name 'C'"):
        resolve(ast.NamedTypeRef('C'), table)


def test_type_declared_twice():
    table = NamedTypeTable()
    table.declare_abstract('T')
    with pytest.raises(TypeResolutionError, match='declared twice'):
        table.define('T', ast.TypeName('integer'))
