"""Tokenizer and recursive-descent helpers shared by the file formats.

Terms are written ``f(t1,...,tn)`` with bare constants; ``s < t`` and
``s - t`` are accepted as infix applications of ``<`` and ``-`` (``-`` binds
tighter and associates to the left).  Whether an identifier denotes a
variable is decided by a predicate supplied by the enclosing format.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, MutableMapping

from ssgr.terms import Fun, Subst, Term, Var


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0, source: str | None = None):
        self.message = message
        self.line = line
        self.col = col
        self.source = source
        super().__init__(str(self))

    def __str__(self):
        where = self.source or "<input>"
        return f"{where}:{self.line}:{self.col}: {self.message}"


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "string", "punct" or "eof"
    text: str
    line: int
    col: int


IDENT = re.compile(r"[A-Za-z0-9_']+")
# Longest first so that "->" wins over "-".
PUNCT = ("->", "==", "/\\", "(", ")", "{", "}", "[", "]", ",", "|", ".", "<", ">", "-", "/", "&")


def tokenize(text: str, source: str | None = None) -> list[Token]:
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c.isspace():
            i, col = i + 1, col + 1
            continue
        if c == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == '"':
            j = text.find('"', i + 1)
            if j < 0 or "\n" in text[i:j]:
                raise ParseError("unterminated string", line, col, source)
            tokens.append(Token("string", text[i + 1 : j], line, col))
            col += j + 1 - i
            i = j + 1
            continue
        m = IDENT.match(text, i)
        if m:
            tokens.append(Token("ident", m.group(), line, col))
            col += m.end() - i
            i = m.end()
            continue
        for p in PUNCT:
            if text.startswith(p, i):
                tokens.append(Token("punct", p, line, col))
                i, col = i + len(p), col + len(p)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, col, source)
    tokens.append(Token("eof", "", line, col))
    return tokens


class TokenStream:
    def __init__(self, tokens: list[Token], source: str | None = None):
        self.tokens = tokens
        self.pos = 0
        self.source = source

    @classmethod
    def of(cls, text: str, source: str | None = None) -> TokenStream:
        return cls(tokenize(text, source), source)

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def at(self, text: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok.kind == "punct" and tok.text == text

    def at_eof(self) -> bool:
        return self.peek().kind == "eof"

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        return self.next()

    def ident(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            self.error(f"expected {what}")
        self.pos += 1
        return tok

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"{message}, found {found}", tok.line, tok.col, self.source)

    def skip_group(self) -> None:
        """Skip a balanced parenthesised block starting at '('."""
        depth = 0
        while True:
            tok = self.next()
            if tok.kind == "eof":
                self.error("unbalanced parentheses", tok)
            if tok.kind == "punct" and tok.text == "(":
                depth += 1
            elif tok.kind == "punct" and tok.text == ")":
                depth -= 1
                if depth == 0:
                    return


class TermParser:
    """Parses terms and substitution literals from a :class:`TokenStream`.

    ``arities`` is checked when a symbol is already known and extended
    otherwise, so one mapping can be threaded through a whole file.
    """

    def __init__(
        self,
        stream: TokenStream,
        is_var: Callable[[str], bool],
        arities: MutableMapping[str, int] | None = None,
        infix: bool = True,
    ):
        self.ts = stream
        self.is_var = is_var
        self.arities = arities if arities is not None else {}
        self.infix = infix

    def term(self) -> Term:
        left = self._difference()
        if self.infix and self.ts.at("<"):
            tok = self.ts.next()
            right = self._difference()
            left = self._make("<", [left, right], tok)
        return left

    def _difference(self) -> Term:
        left = self._atom()
        while self.infix and self.ts.at("-"):
            tok = self.ts.next()
            right = self._atom()
            left = self._make("-", [left, right], tok)
        return left

    def _atom(self) -> Term:
        if self.ts.accept("("):
            t = self.term()
            self.ts.expect(")")
            return t
        tok = self.ts.ident("term")
        name = tok.text
        if self.ts.at("("):
            self.ts.next()
            args = [self.term()]
            while self.ts.accept(","):
                args.append(self.term())
            self.ts.expect(")")
            if self.is_var(name):
                raise ParseError(f"variable {name} applied to arguments", tok.line, tok.col, self.ts.source)
            return self._make(name, args, tok)
        if self.is_var(name):
            return Var(name)
        return self._make(name, [], tok)

    def _make(self, name: str, args: list[Term], tok: Token) -> Fun:
        known = self.arities.get(name)
        if known is None:
            self.arities[name] = len(args)
        elif known != len(args):
            raise ParseError(
                f"symbol {name} used with {len(args)} arguments, expected {known}",
                tok.line,
                tok.col,
                self.ts.source,
            )
        return Fun(name, args)

    def substitution(self) -> Subst:
        self.ts.expect("{")
        bindings: dict[Var, Term] = {}
        if not self.ts.at("}"):
            while True:
                tok = self.ts.ident("variable")
                if not self.is_var(tok.text):
                    raise ParseError(f"{tok.text} is not a variable", tok.line, tok.col, self.ts.source)
                x = Var(tok.text)
                if x in bindings:
                    raise ParseError(f"variable {x} bound twice", tok.line, tok.col, self.ts.source)
                self.ts.expect("->")
                bindings[x] = self.term()
                if not self.ts.accept(","):
                    break
        self.ts.expect("}")
        return Subst(bindings)


def parse_term(
    text: str,
    is_var: Callable[[str], bool],
    arities: MutableMapping[str, int] | None = None,
) -> Term:
    ts = TokenStream.of(text)
    t = TermParser(ts, is_var, arities).term()
    if not ts.at_eof():
        ts.error("trailing input")
    return t


def parse_subst(
    text: str,
    is_var: Callable[[str], bool],
    arities: MutableMapping[str, int] | None = None,
) -> Subst:
    ts = TokenStream.of(text)
    s = TermParser(ts, is_var, arities).substitution()
    if not ts.at_eof():
        ts.error("trailing input")
    return s
