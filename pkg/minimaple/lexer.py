"""Tokenizer for MiniMaple source text and the `(*@ ... @*)` spec comments inside it."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum, auto

from minimaple.errors import LexError, SourceSpan


class TokenKind(Enum):
    IDENT = auto()
    INT = auto()
    FLOAT = auto()
    STRING = auto()
    KEYWORD = auto()
    TYPENAME = auto()      # `type/I`
    SPEC = auto()          # (*@ ... @*), value holds the inner tokens
    ASSIGN = auto()
    DCOLON = auto()
    DOTDOT = auto()
    SEMI = auto()
    COMMA = auto()
    LPAREN = auto()
    RPAREN = auto()
    LBRACKET = auto()
    RBRACKET = auto()
    LBRACE = auto()
    RBRACE = auto()
    PLUS = auto()
    MINUS = auto()
    STAR = auto()
    SLASH = auto()
    EQ = auto()
    NE = auto()
    LT = auto()
    LE = auto()
    GT = auto()
    GE = auto()
    QUOTE = auto()
    EOF = auto()


KEYWORDS = frozenset({
    'proc', 'end', 'if', 'then', 'elif', 'else', 'for', 'from', 'by', 'to',
    'while', 'do', 'return', 'error', 'global', 'local', 'type',
    'and', 'or', 'not', 'mod', 'true', 'false',
    'requires', 'ensures', 'exception', 'invariant', 'decreases', 'ASSERT',
    'define', 'assume', 'implies', 'equivalent', 'forall', 'exists',
    'add', 'mul', 'min', 'max', 'seq', 'in', 'RESULT', 'OLD',
    # type heads
    'integer', 'boolean', 'string', 'float', 'rational', 'anything',
    'symbol', 'void', 'uneval', 'list', 'procedure', 'Or',
})

PUNCTUATION = [
    (':=', TokenKind.ASSIGN),
    ('::', TokenKind.DCOLON),
    ('..', TokenKind.DOTDOT),
    ('<>', TokenKind.NE),
    ('<=', TokenKind.LE),
    ('>=', TokenKind.GE),
    (';', TokenKind.SEMI),
    (',', TokenKind.COMMA),
    ('(', TokenKind.LPAREN),
    (')', TokenKind.RPAREN),
    ('[', TokenKind.LBRACKET),
    (']', TokenKind.RBRACKET),
    ('{', TokenKind.LBRACE),
    ('}', TokenKind.RBRACE),
    ('+', TokenKind.PLUS),
    ('-', TokenKind.MINUS),
    ('*', TokenKind.STAR),
    ('/', TokenKind.SLASH),
    ('=', TokenKind.EQ),
    ('<', TokenKind.LT),
    ('>', TokenKind.GT),
]

_NUMBER = re.compile(r'[0-9]+\.[0-9]+(?:[eE][+-]?[0-9]+)?|[0-9]+[eE][+-]?[0-9]+|[0-9]+')
_IDENT = re.compile(r'[A-Za-z_][A-Za-z_0-9]*')
_TYPENAME = re.compile(r'`type/([A-Za-z_][A-Za-z_0-9]*)`')
_BACKTICK_NAME = re.compile(r'`([^`\n]*)`')

# int()/str() refuse decimal text past the interpreter's digit limit, so long
# integers are converted in chunks.
_DIGIT_CHUNK = 1000
_CHUNK_BASE = 10 ** _DIGIT_CHUNK


def int_value(digits: str) -> int:
    """The integer spelled by a string of decimal digits, of any length."""
    n = 0
    for i in range(0, len(digits), _DIGIT_CHUNK):
        chunk = digits[i:i + _DIGIT_CHUNK]
        n = n * 10 ** len(chunk) + int(chunk)
    return n


def int_text(n: int) -> str:
    """Exact decimal text of an integer of any magnitude."""
    if n < 0:
        return '-' + int_text(-n)
    if n < _CHUNK_BASE:
        return str(n)
    parts = []
    while n >= _CHUNK_BASE:
        n, low = divmod(n, _CHUNK_BASE)
        parts.append(str(low).zfill(_DIGIT_CHUNK))
    parts.append(str(n))
    return ''.join(reversed(parts))


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    value: object
    span: SourceSpan = field(compare=False)

    def is_keyword(self, *words: str) -> bool:
        return self.kind is TokenKind.KEYWORD and self.value in words

    def __repr__(self) -> str:
        return f"Token({self.kind.name}, {self.value!r})"


class Lexer:
    """Splits text into tokens, keeping line and column for every token."""

    def __init__(self, source: str, path: str = '<input>'):
        self.source = source
        self.path = path
        self.pos = 0
        self.line = 1
        self.col = 1

    def span(self, line: int, col: int, length: int) -> SourceSpan:
        return SourceSpan(self.path, line, col, length)

    def advance(self, count: int) -> None:
        for ch in self.source[self.pos:self.pos + count]:
            if ch == '\n':
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.pos += count

    def tokenize(self) -> list[Token]:
        tokens = self._scan(in_spec=False)
        tokens.append(Token(TokenKind.EOF, None, self.span(self.line, self.col, 0)))
        return tokens

    def _scan(self, in_spec: bool) -> list[Token]:
        tokens: list[Token] = []
        src = self.source
        while self.pos < len(src):
            ch = src[self.pos]
            if ch in ' \t\r\n':
                self.advance(1)
                continue
            if ch == '#':
                end = src.find('\n', self.pos)
                self.advance((len(src) if end < 0 else end) - self.pos)
                continue
            line, col, start = self.line, self.col, self.pos
            if src.startswith('@*)', self.pos):
                if in_spec:
                    self.advance(3)
                    return tokens
                raise LexError("'@*)' without an opening spec comment", self.span(line, col, 3))
            if src.startswith('(*@', self.pos):
                if in_spec:
                    raise LexError("nested spec comment", self.span(line, col, 3))
                self.advance(3)
                try:
                    inner = self._scan(in_spec=True)
                except LexError as e:
                    if e.message == "unterminated spec comment":
                        raise LexError(e.message, self.span(line, col, 3)) from None
                    raise
                tokens.append(Token(TokenKind.SPEC, tuple(inner), self.span(line, col, self.pos - start)))
                continue
            tokens.append(self._token(line, col))
        if in_spec:
            raise LexError("unterminated spec comment", self.span(self.line, self.col, 0))
        return tokens

    def _token(self, line: int, col: int) -> Token:
        src = self.source
        ch = src[self.pos]

        m = _NUMBER.match(src, self.pos)
        if m:
            text = m.group(0)
            if text.isdigit():
                self.advance(len(text))
                return Token(TokenKind.INT, int_value(text), self.span(line, col, len(text)))
            value = float(text)
            if math.isinf(value):
                raise LexError(f"float literal out of range: {text}", self.span(line, col, len(text)))
            self.advance(len(text))
            return Token(TokenKind.FLOAT, value, self.span(line, col, len(text)))

        m = _IDENT.match(src, self.pos)
        if m:
            text = m.group(0)
            self.advance(len(text))
            kind = TokenKind.KEYWORD if text in KEYWORDS else TokenKind.IDENT
            return Token(kind, text, self.span(line, col, len(text)))

        if ch == '"':
            return self._string(line, col)

        if ch == '`':
            m = _TYPENAME.match(src, self.pos)
            if m:
                self.advance(len(m.group(0)))
                return Token(TokenKind.TYPENAME, m.group(1), self.span(line, col, len(m.group(0))))
            m = _BACKTICK_NAME.match(src, self.pos)
            if m and m.group(1):
                self.advance(len(m.group(0)))
                return Token(TokenKind.IDENT, m.group(1), self.span(line, col, len(m.group(0))))
            raise LexError("unterminated backquoted name", self.span(line, col, 1))

        if ch == "'":
            # ''label`` is the backquoted spelling of a string label
            if src.startswith("''", self.pos):
                end = src.find('``', self.pos + 2)
                if end < 0 or '\n' in src[self.pos:end]:
                    raise LexError("unterminated label", self.span(line, col, 2))
                text = src[self.pos + 2:end]
                length = end + 2 - self.pos
                self.advance(length)
                return Token(TokenKind.STRING, text, self.span(line, col, length))
            self.advance(1)
            return Token(TokenKind.QUOTE, "'", self.span(line, col, 1))

        for text, kind in PUNCTUATION:
            if src.startswith(text, self.pos):
                self.advance(len(text))
                return Token(kind, text, self.span(line, col, len(text)))

        raise LexError(f"illegal character {ch!r}", self.span(line, col, 1))

    def _string(self, line: int, col: int) -> Token:
        src = self.source
        chars = []
        i = self.pos + 1
        while i < len(src):
            c = src[i]
            if c == '"':
                length = i + 1 - self.pos
                self.advance(length)
                return Token(TokenKind.STRING, ''.join(chars), self.span(line, col, length))
            if c == '\n':
                break
            if c == '\\' and i + 1 < len(src):
                nxt = src[i + 1]
                chars.append({'n': '\n', 't': '\t'}.get(nxt, nxt))
                i += 2
                continue
            chars.append(c)
            i += 1
        raise LexError("unterminated string literal", self.span(line, col, 1))


def tokenize(source: str, path: str = '<input>') -> list[Token]:
    """Tokenize MiniMaple source.

    Args:
        source: program text
        path: file name used in spans

    Returns:
        Token list ending with EOF; spec comments are single SPEC tokens
    """
    return Lexer(source, path).tokenize()
