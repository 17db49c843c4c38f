"""Runtime values, Maple-style numeric rules and runtime type membership."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from minimaple import nodes as ast
from minimaple.errors import ExecutionError
from minimaple.lexer import int_text
from minimaple.printer import pretty_print
from minimaple.typesys import (
    ANYTHING, BOOLEAN, FLOAT, INTEGER, RATIONAL, STRING, SYMBOL, UNEVAL, VOID,
    ListOf, Procedure, Record, SetOf, Tagged, Type, Union,
)


class Value:
    """Base class of runtime values."""


@dataclass(frozen=True)
class IntVal(Value):
    value: int


@dataclass(frozen=True)
class RationalVal(Value):
    value: Fraction

    def __post_init__(self):
        if self.value.denominator == 1:
            raise ValueError("a rational with denominator 1 must be an IntVal")


@dataclass(frozen=True)
class FloatVal(Value):
    value: float


@dataclass(frozen=True)
class BoolVal(Value):
    value: bool


@dataclass(frozen=True)
class StringVal(Value):
    value: str


@dataclass(frozen=True)
class SymbolVal(Value):
    name: str


@dataclass(frozen=True)
class ListVal(Value):
    items: tuple[Value, ...]


@dataclass(frozen=True)
class SetVal(Value):
    """Deduplicated, canonically ordered; build through `make_set`."""
    items: tuple[Value, ...]


@dataclass(frozen=True)
class RecordVal(Value):
    items: tuple[Value, ...]


@dataclass(frozen=True)
class TaggedVal(Value):
    name: str
    items: tuple[Value, ...]


@dataclass(frozen=True, eq=False)
class ProcVal(Value):
    """A closure: the definition plus the frame it was evaluated in (None at top level)."""
    proc: ast.ProcDef
    scope: Optional[object] = None
    name: Optional[str] = None


@dataclass(frozen=True)
class UnevalVal(Value):
    expr: ast.Expr


@dataclass(frozen=True)
class VoidVal(Value):
    pass


VOID_VALUE = VoidVal()
TRUE = BoolVal(True)
FALSE = BoolVal(False)

Number = int | Fraction | float
_JSON_INT_LIMIT = 10 ** 4000


# ---------------------------------------------------------------- numbers

def is_number(v: Value) -> bool:
    return isinstance(v, (IntVal, RationalVal, FloatVal))


def to_number(v: Value) -> Number:
    if not is_number(v):
        raise ExecutionError(f"arithmetic on non-numeric value {show(v)}")
    return v.value


def from_number(x: Number) -> Value:
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers")
    if isinstance(x, float):
        return FloatVal(x)
    if isinstance(x, Fraction):
        return IntVal(x.numerator) if x.denominator == 1 else RationalVal(x)
    return IntVal(x)


def arith(op: str, a: Value, b: Value) -> Value:
    """Integer and rational arithmetic is exact; a float operand makes the result a float."""
    x, y = to_number(a), to_number(b)
    if isinstance(x, float) or isinstance(y, float):
        try:
            x, y = float(x), float(y)
        except OverflowError:
            raise ExecutionError("number too large for float arithmetic") from None
    if op == '+':
        return from_number(x + y)
    if op == '-':
        return from_number(x - y)
    if op == '*':
        return from_number(x * y)
    if op == '/':
        if y == 0:
            raise ExecutionError("division by zero")
        if isinstance(x, float):
            return FloatVal(x / y)
        return from_number(Fraction(x) / Fraction(y))
    if op == 'mod':
        if not (isinstance(a, IntVal) and isinstance(b, IntVal)):
            raise ExecutionError("mod needs integer operands")
        if y == 0:
            raise ExecutionError("division by zero")
        return IntVal(x % y)
    raise ExecutionError(f"unknown operator '{op}'")


def negate(v: Value) -> Value:
    return from_number(-to_number(v))


def compare(op: str, a: Value, b: Value) -> bool:
    if not (is_number(a) and is_number(b)):
        raise ExecutionError(f"comparison of non-numeric values {show(a)} and {show(b)}")
    x, y = a.value, b.value
    if op == '<':
        return x < y
    if op == '<=':
        return x <= y
    if op == '>':
        return x > y
    if op == '>=':
        return x >= y
    raise ExecutionError(f"unknown comparison '{op}'")


def values_equal(a: Value, b: Value) -> bool:
    """Structural equality; numbers compare by value across kinds."""
    if is_number(a) and is_number(b):
        return a.value == b.value
    if type(a) is not type(b):
        return False
    if isinstance(a, (ListVal, SetVal, RecordVal)):
        return len(a.items) == len(b.items) and all(values_equal(x, y) for x, y in zip(a.items, b.items))
    if isinstance(a, TaggedVal):
        return a.name == b.name and values_equal(ListVal(a.items), ListVal(b.items))
    if isinstance(a, ProcVal):
        return a is b
    return a == b


_KIND_ORDER = (IntVal, RationalVal, FloatVal, BoolVal, StringVal, SymbolVal,
               ListVal, SetVal, RecordVal, TaggedVal, ProcVal, UnevalVal, VoidVal)


def _set_key(v: Value):
    if is_number(v):
        return (0, v.value, show(v))
    return (_KIND_ORDER.index(type(v)), 0.0, show(v))


def make_set(items) -> SetVal:
    unique: list[Value] = []
    for item in items:
        if not any(values_equal(item, u) for u in unique):
            unique.append(item)
    return SetVal(tuple(sorted(unique, key=_set_key)))


def truth(v: Value, what: str = "guard") -> bool:
    if not isinstance(v, BoolVal):
        raise ExecutionError(f"non-boolean {what}: {show(v)}")
    return v.value


def elements(v: Value) -> tuple[Value, ...]:
    if isinstance(v, (ListVal, SetVal, RecordVal, TaggedVal)):
        return v.items
    raise ExecutionError(f"{show(v)} has no elements")


def index(base: Value, idx: Value) -> Value:
    items = elements(base) if not isinstance(base, SetVal) else None
    if items is None:
        raise ExecutionError(f"cannot index {show(base)}")
    if not isinstance(idx, IntVal):
        raise ExecutionError(f"index must be an integer, found {show(idx)}")
    if not 1 <= idx.value <= len(items):
        raise ExecutionError("index out of bounds")
    return items[idx.value - 1]


# ---------------------------------------------------------------- runtime types

def conforms(v: Value, t: Type) -> bool:
    """Runtime membership of a value in a resolved type."""
    if t == ANYTHING:
        return True
    if isinstance(t, Union):
        return any(conforms(v, m) for m in t.members)
    if t == INTEGER:
        return isinstance(v, IntVal)
    if t == RATIONAL:
        return isinstance(v, (IntVal, RationalVal))
    if t == FLOAT:
        return isinstance(v, FloatVal)
    if t == BOOLEAN:
        return isinstance(v, BoolVal)
    if t == STRING:
        return isinstance(v, StringVal)
    if t == SYMBOL:
        return isinstance(v, SymbolVal)
    if t == UNEVAL:
        return isinstance(v, UnevalVal)
    if t == VOID:
        return isinstance(v, VoidVal)
    if isinstance(t, ListOf):
        return isinstance(v, ListVal) and all(conforms(i, t.elem) for i in v.items)
    if isinstance(t, SetOf):
        return isinstance(v, SetVal) and all(conforms(i, t.elem) for i in v.items)
    if isinstance(t, Record):
        return (isinstance(v, (RecordVal, ListVal)) and len(v.items) == len(t.fields)
                and all(conforms(i, f) for i, f in zip(v.items, t.fields)))
    if isinstance(t, Procedure):
        return isinstance(v, ProcVal)
    if isinstance(t, Tagged):
        return (isinstance(v, TaggedVal) and v.name == t.name and len(v.items) == len(t.args)
                and all(conforms(i, a) for i, a in zip(v.items, t.args)))
    return False


# ---------------------------------------------------------------- display

def show_float(x: float) -> str:
    text = format(x, '.10g')
    if not any(c in text for c in '.eni'):
        text += '.0'
    return text


def show(v: Value) -> str:
    """Maple-like rendering used by traces and reports."""
    if isinstance(v, IntVal):
        return int_text(v.value)
    if isinstance(v, RationalVal):
        return f"{int_text(v.value.numerator)}/{int_text(v.value.denominator)}"
    if isinstance(v, FloatVal):
        return show_float(v.value)
    if isinstance(v, BoolVal):
        return 'true' if v.value else 'false'
    if isinstance(v, StringVal):
        return '"' + v.value.replace('\\', '\\\\').replace('"', '\\"') + '"'
    if isinstance(v, SymbolVal):
        return v.name
    if isinstance(v, (ListVal, RecordVal)):
        return '[' + ', '.join(show(i) for i in v.items) + ']'
    if isinstance(v, SetVal):
        return '{' + ', '.join(show(i) for i in v.items) + '}'
    if isinstance(v, TaggedVal):
        return f"{v.name}(" + ', '.join(show(i) for i in v.items) + ')'
    if isinstance(v, ProcVal):
        return f"proc {v.name}" if v.name else 'proc'
    if isinstance(v, UnevalVal):
        return f"'{pretty_print(v.expr)}'"
    if isinstance(v, VoidVal):
        return 'NULL'
    raise TypeError(f"not a value: {v!r}")


def to_json(v: Value):
    if isinstance(v, IntVal):
        # json cannot encode integers past the digit limit
        return v.value if abs(v.value) < _JSON_INT_LIMIT else int_text(v.value)
    if isinstance(v, FloatVal):
        return v.value
    if isinstance(v, BoolVal):
        return v.value
    if isinstance(v, StringVal):
        return v.value
    if isinstance(v, (ListVal, RecordVal, SetVal)):
        return [to_json(i) for i in v.items]
    return show(v)
