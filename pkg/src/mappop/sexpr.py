"""Minimal s-expression reader with source positions."""

from __future__ import annotations

from .errors import ParseError


class Symbol(str):
    """A string token that remembers where it came from."""

    line: int
    col: int

    def __new__(cls, text: str, line: int = 0, col: int = 0) -> "Symbol":
        obj = super().__new__(cls, text.lower())
        obj.line = line
        obj.col = col
        return obj


class SList(list):
    """A parenthesised list; ``line``/``col`` point at the opening paren."""

    def __init__(self, items=(), line: int = 0, col: int = 0):
        super().__init__(items)
        self.line = line
        self.col = col


def tokenize(text: str):
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in "()":
            yield ch, line, col
            i += 1
            col += 1
            continue
        start, start_col = i, col
        while i < n and not text[i].isspace() and text[i] not in "();":
            i += 1
            col += 1
        yield text[start:i], line, start_col


def parse_sexprs(text: str) -> list:
    """Parse every top-level expression in ``text``."""
    stack: list[SList] = [SList()]
    for tok, line, col in tokenize(text):
        if tok == "(":
            stack.append(SList(line=line, col=col))
        elif tok == ")":
            if len(stack) == 1:
                raise ParseError("unexpected ')'", line, col)
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(Symbol(tok, line, col))
    if len(stack) > 1:
        opened = stack[-1]
        raise ParseError("unclosed '('", opened.line, opened.col)
    return list(stack[0])


def parse_one(text: str):
    exprs = parse_sexprs(text)
    if len(exprs) != 1:
        raise ParseError(f"expected exactly one top-level expression, found {len(exprs)}", 1, 1)
    return exprs[0]
