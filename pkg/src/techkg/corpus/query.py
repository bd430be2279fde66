"""Boolean search queries: quoted phrases combined with AND/OR.

Grammar (AND binds tighter than OR, parentheses group):

    query  := or_expr
    or     := and_expr ("OR" and_expr)*
    and    := atom ("AND" atom)*
    atom   := '"' text '"' | "(" or_expr ")"
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

QueryNode = Union["Phrase", "And", "Or"]


class QuerySyntaxError(ValueError):
    """Raised for malformed query text.

    ``offset`` is the byte position (UTF-8) of the offending input,
    ``expected`` describes what would have been valid there.
    """

    def __init__(self, offset: int, expected: str, found: str = ""):
        self.offset = offset
        self.expected = expected
        self.found = found
        where = f"at byte {offset}" if found else "at end of input"
        detail = f", found {found}" if found else ""
        super().__init__(f"syntax error {where}: expected {expected}{detail}")


@dataclass(frozen=True)
class Phrase:
    text: str

    def __post_init__(self):
        if not self.text:
            raise ValueError("phrase text must be non-empty")


@dataclass(frozen=True)
class And:
    children: tuple

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("And requires at least two children")


@dataclass(frozen=True)
class Or:
    children: tuple

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("Or requires at least two children")


_PHRASE, _AND, _OR, _LPAREN, _RPAREN, _END = range(6)
_NAMES = {
    _PHRASE: "a quoted phrase",
    _AND: "'AND'",
    _OR: "'OR'",
    _LPAREN: "'('",
    _RPAREN: "')'",
    _END: "end of input",
}


@dataclass(frozen=True)
class _Token:
    kind: int
    offset: int  # byte offset into the UTF-8 encoding of the input
    text: str = ""


def _tokenize(text: str) -> list:
    tokens = []
    i = 0
    byte_pos = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            byte_pos += len(ch.encode("utf-8"))
            i += 1
            continue
        if ch == "(":
            tokens.append(_Token(_LPAREN, byte_pos))
            byte_pos += 1
            i += 1
        elif ch == ")":
            tokens.append(_Token(_RPAREN, byte_pos))
            byte_pos += 1
            i += 1
        elif ch == '"':
            start_byte = byte_pos
            j = i + 1
            while j < n and text[j] != '"':
                j += 1
            if j >= n:
                raise QuerySyntaxError(
                    len(text.encode("utf-8")), "closing '\"'"
                )
            body = text[i + 1 : j]
            if not body.strip():
                raise QuerySyntaxError(
                    start_byte, "non-empty phrase text", repr(text[i : j + 1])
                )
            tokens.append(_Token(_PHRASE, start_byte, body.strip()))
            byte_pos += len(text[i : j + 1].encode("utf-8"))
            i = j + 1
        elif ch.isalpha():
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            upper = word.upper()
            if upper == "AND":
                tokens.append(_Token(_AND, byte_pos, word))
            elif upper == "OR":
                tokens.append(_Token(_OR, byte_pos, word))
            else:
                raise QuerySyntaxError(
                    byte_pos, "'AND', 'OR', or a quoted phrase", repr(word)
                )
            byte_pos += len(word.encode("utf-8"))
            i = j
        else:
            raise QuerySyntaxError(
                byte_pos, "a quoted phrase, '(', or an operator", repr(ch)
            )
    tokens.append(_Token(_END, len(text.encode("utf-8"))))
    return tokens


class _Parser:
    def __init__(self, tokens: list):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected: str):
        tok = self.peek()
        found = "" if tok.kind == _END else (tok.text and repr(tok.text)) or _NAMES[tok.kind]
        raise QuerySyntaxError(tok.offset, expected, found)

    def parse_or(self) -> QueryNode:
        children = [self.parse_and()]
        while self.peek().kind == _OR:
            self.advance()
            children.append(self.parse_and())
        if len(children) == 1:
            return children[0]
        return Or(tuple(children))

    def parse_and(self) -> QueryNode:
        children = [self.parse_atom()]
        while self.peek().kind == _AND:
            self.advance()
            children.append(self.parse_atom())
        if len(children) == 1:
            return children[0]
        return And(tuple(children))

    def parse_atom(self) -> QueryNode:
        tok = self.peek()
        if tok.kind == _PHRASE:
            self.advance()
            return Phrase(tok.text)
        if tok.kind == _LPAREN:
            self.advance()
            node = self.parse_or()
            if self.peek().kind != _RPAREN:
                self.fail("')'")
            self.advance()
            return node
        self.fail("a quoted phrase or '('")
        raise AssertionError("unreachable")


def parse_query(text: str) -> QueryNode:
    """Parse query text into an AST of Phrase/And/Or nodes."""
    if not text or not text.strip():
        raise QuerySyntaxError(0, "a non-empty query")
    parser = _Parser(_tokenize(text))
    node = parser.parse_or()
    if parser.peek().kind != _END:
        parser.fail("'AND', 'OR', or end of input")
    return node


def query_to_text(node: QueryNode) -> str:
    """Render an AST back to query text; parse(query_to_text(q)) == q.

    Nested operators of the same kind are parenthesized so the printed
    form reparses to the identical tree rather than a flattened one.
    """
    if isinstance(node, Phrase):
        return f'"{node.text}"'
    if isinstance(node, And):
        parts = []
        for child in node.children:
            rendered = query_to_text(child)
            if isinstance(child, (And, Or)):
                rendered = f"({rendered})"
            parts.append(rendered)
        return " AND ".join(parts)
    if isinstance(node, Or):
        parts = []
        for child in node.children:
            rendered = query_to_text(child)
            if isinstance(child, Or):
                rendered = f"({rendered})"
            parts.append(rendered)
        return " OR ".join(parts)
    raise TypeError(f"not a query node: {node!r}")
