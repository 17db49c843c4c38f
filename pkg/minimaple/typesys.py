"""Semantic types, the subtype lattice and the type-environment algebra."""
from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from typing import Optional

from minimaple import nodes as ast
from minimaple.errors import CheckerFault, TypeResolutionError


class Type:
    """Base class of all type terms."""

    def __str__(self) -> str:       # pragma: no cover - every subclass overrides
        raise NotImplementedError


@dataclass(frozen=True, slots=True)
class Prim(Type):
    name: str

    def __str__(self) -> str:
        return self.name


INTEGER = Prim('integer')
RATIONAL = Prim('rational')
FLOAT = Prim('float')
BOOLEAN = Prim('boolean')
STRING = Prim('string')
SYMBOL = Prim('symbol')
UNEVAL = Prim('uneval')
VOID = Prim('void')
ANYTHING = Prim('anything')

PRIMITIVES = {p.name: p for p in (INTEGER, RATIONAL, FLOAT, BOOLEAN, STRING, SYMBOL, UNEVAL, VOID, ANYTHING)}
_PRIM_RANK = {name: i for i, name in enumerate(PRIMITIVES)}


@dataclass(frozen=True, slots=True)
class SetOf(Type):
    elem: Type

    def __str__(self) -> str:
        return f"{{{self.elem}}}"


@dataclass(frozen=True, slots=True)
class ListOf(Type):
    elem: Type

    def __str__(self) -> str:
        return f"list({self.elem})"


@dataclass(frozen=True, slots=True)
class Record(Type):
    fields: tuple[Type, ...]

    def __str__(self) -> str:
        return '[' + ','.join(str(f) for f in self.fields) + ']'


@dataclass(frozen=True, slots=True)
class Procedure(Type):
    ret: Type
    args: tuple[Type, ...]

    def __str__(self) -> str:
        return f"procedure[{self.ret}](" + ','.join(str(a) for a in self.args) + ')'


@dataclass(frozen=True, slots=True)
class Tagged(Type):
    name: str
    args: tuple[Type, ...]

    def __str__(self) -> str:
        return f"{self.name}(" + ','.join(str(a) for a in self.args) + ')'


@dataclass(frozen=True, slots=True)
class Union(Type):
    """Normalized alternatives; build through `make_union`/`normalize`."""
    members: tuple[Type, ...]

    def __str__(self) -> str:
        return 'Or(' + ','.join(str(m) for m in self.members) + ')'


@dataclass(frozen=True, slots=True)
class Abstract(Type):
    name: str

    def __str__(self) -> str:
        return self.name


_KIND_RANK = {Prim: 0, ListOf: 1, SetOf: 2, Record: 3, Procedure: 4, Tagged: 5, Abstract: 6}


def sort_key(t: Type):
    if isinstance(t, Prim):
        return (0, _PRIM_RANK[t.name], '')
    return (_KIND_RANK[type(t)], 0, str(t))


# ---------------------------------------------------------------- subtyping

def is_subtype(a: Type, b: Type) -> bool:
    """Decide a <= b on normalized terms."""
    if a == b or b == ANYTHING:
        return True
    if isinstance(a, Union):
        return all(is_subtype(m, b) for m in a.members)
    if isinstance(b, Union):
        return any(is_subtype(a, m) for m in b.members)
    if a == INTEGER and b == RATIONAL:
        return True
    if isinstance(a, ListOf) and isinstance(b, ListOf):
        return is_subtype(a.elem, b.elem)
    if isinstance(a, SetOf) and isinstance(b, SetOf):
        return is_subtype(a.elem, b.elem)
    if isinstance(a, Record) and isinstance(b, Record):
        return (len(a.fields) == len(b.fields)
                and all(is_subtype(x, y) for x, y in zip(a.fields, b.fields)))
    if isinstance(a, Procedure) and isinstance(b, Procedure):
        return (len(a.args) == len(b.args)
                and all(is_subtype(y, x) for x, y in zip(a.args, b.args))
                and is_subtype(a.ret, b.ret))
    if isinstance(a, Tagged) and isinstance(b, Tagged):
        return (a.name == b.name and len(a.args) == len(b.args)
                and all(is_subtype(x, y) for x, y in zip(a.args, b.args)))
    return False


def _atoms(t: Type) -> Iterator[Type]:
    if isinstance(t, Union):
        for m in t.members:
            yield from _atoms(m)
    else:
        yield t


def make_union(members: Iterable[Type]) -> Type:
    """Union of already-normalized members: flat, deduplicated, maximal members only."""
    kept: list[Type] = []
    for m in sorted(set(a for t in members for a in _atoms(t)), key=sort_key):
        if m == ANYTHING:
            return ANYTHING
        if any(is_subtype(m, k) for k in kept):
            continue
        kept = [k for k in kept if not is_subtype(k, m)]
        kept.append(m)
    if not kept:
        raise CheckerFault("empty union")
    if len(kept) == 1:
        return kept[0]
    return Union(tuple(sorted(kept, key=sort_key)))


def normalize(t: Type) -> Type:
    if isinstance(t, Union):
        return make_union(normalize(m) for m in t.members)
    if isinstance(t, ListOf):
        return ListOf(normalize(t.elem))
    if isinstance(t, SetOf):
        return SetOf(normalize(t.elem))
    if isinstance(t, Record):
        return Record(tuple(normalize(f) for f in t.fields))
    if isinstance(t, Procedure):
        return Procedure(normalize(t.ret), tuple(normalize(a) for a in t.args))
    if isinstance(t, Tagged):
        return Tagged(t.name, tuple(normalize(a) for a in t.args))
    return t


def super_type(a: Type, b: Type) -> Type:
    if is_subtype(a, b):
        return b
    if is_subtype(b, a):
        return a
    return make_union((a, b))


def super_type_of(types: Iterable[Type], default: Type = ANYTHING) -> Type:
    result: Optional[Type] = None
    for t in types:
        result = t if result is None else super_type(result, t)
    return default if result is None else result


def super_type_pred(a: Type, b: Type) -> bool:
    """True when `a` is a super type of `b`."""
    return is_subtype(b, a)


def subtract(t: Type, tested: Type) -> Optional[Type]:
    """What is left of `t` once a `type(x, tested)` test failed; None means nothing."""
    if t == tested:
        return None
    if isinstance(t, Union):
        removed = set(_atoms(tested))
        if removed <= set(t.members):
            rest = [m for m in t.members if m not in removed]
            if not rest:
                return None
            return make_union(rest)
    return t


NUMERIC = make_union((RATIONAL, FLOAT))


def is_numeric(t: Type) -> bool:
    return is_subtype(t, NUMERIC)


def element_type(t: Type) -> Optional[Type]:
    """Element type of a list or set type, else None."""
    if isinstance(t, (ListOf, SetOf)):
        return t.elem
    if isinstance(t, Union):
        elems = [element_type(m) for m in t.members]
        if all(e is not None for e in elems):
            return super_type_of(elems)
    return None


# ---------------------------------------------------------------- environments

class TypeEnv(Mapping):
    """Immutable identifier -> type map kept in first-binding order."""

    __slots__ = ('_bindings',)

    def __init__(self, bindings: Optional[Mapping[str, Type] | Iterable[tuple[str, Type]]] = None):
        self._bindings: dict[str, Type] = dict(bindings or {})

    def __getitem__(self, name: str) -> Type:
        return self._bindings[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._bindings)

    def __len__(self) -> int:
        return len(self._bindings)

    def __hash__(self):
        return hash(frozenset(self._bindings.items()))

    def __repr__(self) -> str:
        inner = ', '.join(f"{k}:{v}" for k, v in self._bindings.items())
        return f"{{{inner}}}"

    def bind(self, name: str, t: Type) -> 'TypeEnv':
        updated = dict(self._bindings)
        updated[name] = t
        return TypeEnv(updated)

    def without(self, name: str) -> 'TypeEnv':
        return TypeEnv((k, v) for k, v in self._bindings.items() if k != name)

    def restrict(self, names: Iterable[str]) -> 'TypeEnv':
        keep = set(names)
        return TypeEnv((k, v) for k, v in self._bindings.items() if k in keep)


EMPTY_ENV = TypeEnv()


def can_specialize(pi: Mapping[str, Type], pi2: Mapping[str, Type]) -> bool:
    for name, t2 in pi2.items():
        if name in pi:
            t1 = pi[name]
            if not (super_type_pred(t1, t2) or super_type_pred(t2, t1)):
                return False
    return True


def specialize(pi: TypeEnv, pi2: Mapping[str, Type]) -> TypeEnv:
    if not can_specialize(pi, pi2):
        raise CheckerFault("specialize called on incompatible environments")
    updated = []
    for name, t1 in pi.items():
        if name in pi2 and is_subtype(pi2[name], t1):
            updated.append((name, pi2[name]))
        else:
            updated.append((name, t1))
    return TypeEnv(updated)


def combine(pi1: Mapping[str, Type], pi2: Mapping[str, Type]) -> TypeEnv:
    merged = dict(pi1)
    for name, t2 in pi2.items():
        merged[name] = super_type(merged[name], t2) if name in merged else t2
    return TypeEnv(merged)


# ---------------------------------------------------------------- named types

class NamedTypeTable:
    """`type/I`:=T and `type/I`; declarations of one program."""

    def __init__(self):
        self.named: dict[str, ast.TypeAst] = {}
        self.abstract: set[str] = set()
        self._resolved: dict[str, Type] = {}

    def define(self, name: str, type_ast: ast.TypeAst) -> None:
        if name in self.named or name in self.abstract:
            raise TypeResolutionError(f"type '{name}' is declared twice")
        self.named[name] = type_ast

    def declare_abstract(self, name: str) -> None:
        if name in self.named or name in self.abstract:
            raise TypeResolutionError(f"type '{name}' is declared twice")
        self.abstract.add(name)

    def lookup(self, name: str, resolving: tuple[str, ...]) -> Type:
        if name in self.abstract:
            return Abstract(name)
        if name not in self.named:
            raise TypeResolutionError(f"unknown type name '{name}'")
        if name in resolving:
            cycle = ' -> '.join(resolving + (name,))
            raise TypeResolutionError(f"recursive type definition {cycle}")
        if name not in self._resolved:
            self._resolved[name] = resolve(self.named[name], self, resolving + (name,))
        return self._resolved[name]


def resolve(t: ast.TypeAst, table: Optional[NamedTypeTable] = None,
            resolving: tuple[str, ...] = ()) -> Type:
    """Turn a type annotation into a normalized type term."""
    table = table or NamedTypeTable()
    if isinstance(t, ast.TypeName):
        return PRIMITIVES[t.name]
    if isinstance(t, ast.ListType):
        return ListOf(resolve(t.elem, table, resolving))
    if isinstance(t, ast.SetType):
        return SetOf(resolve(t.elem, table, resolving))
    if isinstance(t, ast.RecordType):
        return Record(tuple(resolve(i, table, resolving) for i in t.items))
    if isinstance(t, ast.ProcType):
        return Procedure(resolve(t.ret, table, resolving),
                         tuple(resolve(a, table, resolving) for a in t.args))
    if isinstance(t, ast.OrType):
        return make_union(resolve(m, table, resolving) for m in t.members)
    if isinstance(t, ast.TaggedType):
        return Tagged(t.name, tuple(resolve(a, table, resolving) for a in t.args))
    if isinstance(t, ast.NamedTypeRef):
        return table.lookup(t.name, resolving)
    raise TypeResolutionError(f"not a type annotation: {t!r}")
