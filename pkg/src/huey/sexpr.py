"""S-expression values: the tree format every stage of the pipeline speaks.

Parse results, privacy-filtered requests and compiler inputs are all
plain trees of ``Node``/``Atom``.  The canonical text form prints a
childless node as a bare atom, so ``print -> parse -> print`` is
idempotent on canonical text even though the bare form is ambiguous
structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class SexprSyntaxError(ValueError):
    def __init__(self, position: int, reason: str):
        self.position = position
        self.reason = reason
        super().__init__(f"{reason} at position {position}")


@dataclass(frozen=True)
class Atom:
    text: str


@dataclass(frozen=True)
class Node:
    head: str
    children: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if isinstance(self.children, list):
            object.__setattr__(self, "children", tuple(self.children))


SExpr = Atom | Node


def node(head: str, *children: SExpr) -> Node:
    return Node(head, tuple(children))


def print_canonical(x: SExpr) -> str:
    """Render with single spaces; empty nodes print as bare head atoms."""
    if isinstance(x, Atom):
        return x.text
    if not x.children:
        return x.head
    inner = " ".join(print_canonical(c) for c in x.children)
    return f"({x.head} {inner})"


def parse_sexpr(text: str) -> SExpr:
    """Parse canonical s-expression text; inverse of print on its image."""
    pos = 0
    n = len(text)

    def skip_ws():
        nonlocal pos
        while pos < n and text[pos].isspace():
            pos += 1

    def parse_one() -> SExpr:
        nonlocal pos
        skip_ws()
        if pos >= n:
            raise SexprSyntaxError(pos, "unexpected end of input")
        if text[pos] == ")":
            raise SexprSyntaxError(pos, "unexpected ')'")
        if text[pos] != "(":
            start = pos
            while pos < n and not text[pos].isspace() and text[pos] not in "()":
                pos += 1
            return Atom(text[start:pos])
        pos += 1  # consume '('
        skip_ws()
        start = pos
        while pos < n and not text[pos].isspace() and text[pos] not in "()":
            pos += 1
        head = text[start:pos]
        if not head:
            raise SexprSyntaxError(start, "empty node head")
        children: list[SExpr] = []
        while True:
            skip_ws()
            if pos >= n:
                raise SexprSyntaxError(pos, "unbalanced '('")
            if text[pos] == ")":
                pos += 1
                break
            children.append(parse_one())
        if not children:
            raise SexprSyntaxError(start, "node without children")
        return Node(head, tuple(children))

    result = parse_one()
    skip_ws()
    if pos != n:
        raise SexprSyntaxError(pos, "trailing content")
    return result


def leaves(x: SExpr) -> list[str]:
    """Atom texts in left-to-right order (rule-name heads excluded)."""
    if isinstance(x, Atom):
        return [x.text]
    out: list[str] = []
    for c in x.children:
        out.extend(leaves(c))
    return out


def leaves_text(x: SExpr) -> str:
    return " ".join(leaves(x))


def subtrees(x: SExpr, rule_name: str) -> list[Node]:
    """All subtrees whose head equals ``rule_name``, in pre-order."""
    out: list[Node] = []
    if isinstance(x, Node):
        if x.head == rule_name:
            out.append(x)
        for c in x.children:
            out.extend(subtrees(c, rule_name))
    return out
