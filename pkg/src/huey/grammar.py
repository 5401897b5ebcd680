"""Grammar sets and the matcher that turns token streams into parse trees.

Grammars ship as BNF text files (``<rule> ::= alt | alt`` with ``"..."``
literals, ``<ref>`` references, ``?``/``*``/``+`` postfix quantifiers,
``(...)`` groups and ``/* ... */`` comments).  Uppercase references name
token kinds from the lexer; everything else must resolve to a rule.

Matching semantics, fixed here so identical input always yields an
identical tree:

* alternatives are tried in declared order; the first derivation that
  consumes the whole input wins (ordered choice with backtracking),
* quantifiers and optionals are greedy, backing off token by token when
  a later required term cannot match,
* the multi-word ``item`` rule tries six words down to one but never
  absorbs a word that is a literal anywhere in the grammar set; without
  that reservation the catch-all phrase swallows trailing keywords such
  as "to shopping list",
* a rule that matches zero tokens renders as a childless node (printed
  as a bare atom), and one trailing sentence period or bang is consumed
  silently so punctuation does not poison otherwise-valid requests.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .lexer import HIDDEN_KINDS, Token, TokenKind, tokenize, visible
from .sexpr import Atom, Node, SExpr, subtrees

# ---------------------------------------------------------------------------
# Grammar model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Lit:
    words: tuple[str, ...]  # lowered token texts, one entry per token


@dataclass(frozen=True)
class TokRef:
    kind: TokenKind


@dataclass(frozen=True)
class RuleRef:
    name: str


@dataclass(frozen=True)
class Opt:
    term: "Term"


@dataclass(frozen=True)
class Star:
    term: "Term"


@dataclass(frozen=True)
class Plus:
    term: "Term"


@dataclass(frozen=True)
class Group:
    alts: tuple[tuple["Term", ...], ...]


Term = Lit | TokRef | RuleRef | Opt | Star | Plus | Group


@dataclass
class Rule:
    name: str
    alts: list[tuple[Term, ...]]
    source: str = ""  # file the rule came from


@dataclass
class GrammarSet:
    name: str
    rules: dict[str, Rule]
    keywords: frozenset[str]
    phrase_rules: frozenset[str] = frozenset({"item"})

    def rule(self, name: str) -> Rule:
        return self.rules[name]


@dataclass
class ParseResult:
    tree: SExpr
    consumed: int
    grammar: str
    matched_rule: int


class GrammarLoadError(ValueError):
    def __init__(self, rule: str, reason: str):
        self.rule = rule
        self.reason = reason
        super().__init__(f"rule {rule!r}: {reason}")


class NoMatch(ValueError):
    def __init__(self, position: int, expected: tuple[str, ...]):
        self.position = position
        self.expected = expected
        super().__init__(f"no parse at token {position}; expected one of {sorted(set(expected))}")


_TOKEN_KIND_NAMES = {k.name: k for k in TokenKind}

# Which grammar files make up each set, in precedence order (first file's
# definition of a rule wins).
SET_FILES = {
    "root_vns": ("RootVNS.bnf", "Switch.bnf", "CommonParser.bnf"),
    "root_shop": ("RootShop.bnf", "Switch.bnf", "ShoppingList.bnf", "CommonParser.bnf"),
    "root_expense": ("RootExpense.bnf", "Switch.bnf", "Sheet.bnf", "ExpenseSheet.bnf",
                     "CommonParser.bnf"),
    "shop_search": ("ShopSearch.bnf", "CommonParser.bnf"),
}

#: Punctuation a request may end with without the grammar providing for it.
_TRAILING_PUNCT = (TokenKind.DOT, TokenKind.BANG)


# ---------------------------------------------------------------------------
# BNF reader
# ---------------------------------------------------------------------------

_COMMENT_RE = re.compile(r"/\*.*?\*/", re.DOTALL)
_BNF_TOKEN_RE = re.compile(
    r"""
    (?P<ref>\<[A-Za-z_][A-Za-z0-9_|]*\>)
  | (?P<lit>"[^"]*")
  | (?P<punct>::=|[()?*+|])
    """,
    re.VERBOSE,
)


def _lex_literal(text: str) -> tuple[str, ...]:
    """Split a literal into the token texts the lexer would produce."""
    parts = tuple(t.lower for t in visible(tokenize(text)))
    if not parts:
        raise GrammarLoadError("?", f"empty literal {text!r}")
    return parts


def _parse_bnf(text: str, source: str) -> list[Rule]:
    text = _COMMENT_RE.sub(" ", text)
    chunks = re.split(r"(?m)^\s*(?=\<[A-Za-z_][A-Za-z0-9_]*\>\s*::=)", text)
    rules: list[Rule] = []
    for chunk in chunks:
        if not chunk.strip():
            continue
        head, sep, body = chunk.partition("::=")
        if not sep:
            raise GrammarLoadError(head.strip()[:40], "missing '::=' in rule definition")
        name = head.strip()
        if not (name.startswith("<") and name.endswith(">")):
            raise GrammarLoadError(name, "rule name must be <angle-bracketed>")
        name = name[1:-1]
        tokens = _tokenize_rhs(body, name)
        alts = _parse_alternatives(tokens, name)
        rules.append(Rule(name, alts, source))
    return rules


def _tokenize_rhs(body: str, rule: str) -> list[str]:
    tokens: list[str] = []
    pos = 0
    for m in _BNF_TOKEN_RE.finditer(body):
        between = body[pos:m.start()]
        if between.strip():
            raise GrammarLoadError(rule, f"unexpected text {between.strip()!r}")
        tokens.append(m.group(0))
        pos = m.end()
    if body[pos:].strip():
        raise GrammarLoadError(rule, f"unexpected text {body[pos:].strip()!r}")
    return tokens


def _parse_alternatives(tokens: list[str], rule: str) -> list[tuple[Term, ...]]:
    pos = 0

    def parse_alts(depth: int) -> list[tuple[Term, ...]]:
        nonlocal pos
        alts: list[list[Term]] = [[]]
        while pos < len(tokens):
            tok = tokens[pos]
            if tok == "|":
                pos += 1
                alts.append([])
                continue
            if tok == ")":
                if depth == 0:
                    raise GrammarLoadError(rule, "unbalanced ')'")
                break
            if tok == "(":
                pos += 1
                inner = parse_alts(depth + 1)
                if pos >= len(tokens) or tokens[pos] != ")":
                    raise GrammarLoadError(rule, "unbalanced '('")
                pos += 1
                term: Term = Group(tuple(tuple(a) for a in inner))
                alts[-1].append(_maybe_quantify(term))
                continue
            if tok in ("?", "*", "+"):
                raise GrammarLoadError(rule, f"dangling quantifier {tok!r}")
            if tok == "::=":
                raise GrammarLoadError(rule, "unexpected '::=' (missing rule separator?)")
            if tok.startswith("<"):
                name = tok[1:-1]
                if "|" in name:
                    # alternation written inside one bracket pair; read as a
                    # group of plain references
                    refs = tuple((_make_ref(part),) for part in name.split("|"))
                    term = Group(refs)
                else:
                    term = _make_ref(name)
                pos += 1
                alts[-1].append(_maybe_quantify(term))
                continue
            if tok.startswith('"'):
                term = Lit(_lex_literal(tok[1:-1]))
                pos += 1
                alts[-1].append(_maybe_quantify(term))
                continue
            raise GrammarLoadError(rule, f"unexpected token {tok!r}")
        return [tuple(a) for a in alts]

    def _maybe_quantify(term: Term) -> Term:
        nonlocal pos
        if pos < len(tokens) and tokens[pos] in ("?", "*", "+"):
            q = tokens[pos]
            pos += 1
            if q == "?":
                return Opt(term)
            if q == "*":
                return Star(term)
            return Plus(term)
        return term

    alts = parse_alts(0)
    if pos != len(tokens):
        raise GrammarLoadError(rule, "unbalanced ')'")
    if any(len(a) == 0 for a in alts):
        raise GrammarLoadError(rule, "empty alternative")
    return alts


def _make_ref(name: str) -> Term:
    if name in _TOKEN_KIND_NAMES:
        return TokRef(_TOKEN_KIND_NAMES[name])
    return RuleRef(name)


# ---------------------------------------------------------------------------
# Loading and validation
# ---------------------------------------------------------------------------


def load_name_overlay(path: Path) -> dict[str, list[str]]:
    """Read a literal overlay file: ``[rule]`` sections, one literal per line."""
    overlay: dict[str, list[str]] = {}
    current: str | None = None
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            overlay.setdefault(current, [])
            continue
        if current is None:
            raise GrammarLoadError("overlay", f"literal {line!r} before any [rule] section")
        overlay[current].append(line.lower())
    return overlay


def load_grammar_set(
    name: str,
    grammar_dir: str | Path,
    overlay: dict[str, list[str]] | None = None,
) -> GrammarSet:
    """Load and validate one grammar hierarchy by set name."""
    if name not in SET_FILES:
        raise GrammarLoadError(name, f"unknown grammar set (have {sorted(SET_FILES)})")
    grammar_dir = Path(grammar_dir)
    rules: dict[str, Rule] = {}
    for filename in SET_FILES[name]:
        path = grammar_dir / filename
        if not path.exists():
            raise GrammarLoadError(name, f"missing grammar file {path}")
        for rule in _parse_bnf(path.read_text(encoding="utf-8"), filename):
            # first definition wins across files
            rules.setdefault(rule.name, rule)
    if overlay:
        for rule_name, literals in overlay.items():
            if rule_name in rules:
                rules[rule_name] = Rule(
                    rule_name,
                    [(Lit(_lex_literal(lit)),) for lit in literals],
                    rules[rule_name].source,
                )
    grammar = GrammarSet(name=name, rules=rules, keywords=_collect_keywords(rules))
    _validate(grammar)
    return grammar


def _collect_keywords(rules: dict[str, Rule]) -> frozenset[str]:
    words: set[str] = set()

    def walk(term: Term):
        if isinstance(term, Lit):
            words.update(term.words)
        elif isinstance(term, (Opt, Star, Plus)):
            walk(term.term)
        elif isinstance(term, Group):
            for alt in term.alts:
                for t in alt:
                    walk(t)

    for rule in rules.values():
        for alt in rule.alts:
            for term in alt:
                walk(term)
    return frozenset(words)


def _validate(grammar: GrammarSet):
    def walk(term: Term, rule: str):
        if isinstance(term, RuleRef):
            if term.name not in grammar.rules:
                raise GrammarLoadError(rule, f"reference to undefined rule <{term.name}>")
        elif isinstance(term, (Opt, Star, Plus)):
            walk(term.term, rule)
        elif isinstance(term, Group):
            for alt in term.alts:
                for t in alt:
                    walk(t, rule)

    for rule in grammar.rules.values():
        for alt in rule.alts:
            for term in alt:
                walk(term, rule.name)
    if "input" not in grammar.rules:
        raise GrammarLoadError("input", "grammar set has no <input> rule")


# ---------------------------------------------------------------------------
# Matcher
# ---------------------------------------------------------------------------


class _Matcher:
    def __init__(self, grammar: GrammarSet, tokens: list[Token]):
        self.grammar = grammar
        self.tokens = tokens
        self.n = len(tokens)
        self.best_pos = 0
        self.best_expected: list[str] = []

    # positions index the full stream; hidden tokens are skipped on demand

    def skip_hidden(self, pos: int) -> int:
        while pos < self.n and self.tokens[pos].hidden:
            pos += 1
        return pos

    def _note_failure(self, pos: int, expected: str):
        pos = self.skip_hidden(pos)
        if pos > self.best_pos:
            self.best_pos = pos
            self.best_expected = [expected]
        elif pos == self.best_pos:
            self.best_expected.append(expected)

    def match_rule(self, name: str, pos: int, reserve: bool) -> Iterator[tuple[int, Node]]:
        rule = self.grammar.rules[name]
        reserve_here = reserve or name in self.grammar.phrase_rules
        for alt in rule.alts:
            for end, parts in self.match_seq(alt, pos, reserve_here):
                yield end, Node(name, tuple(parts))

    def match_seq(self, terms: tuple[Term, ...], pos: int, reserve: bool
                  ) -> Iterator[tuple[int, list[SExpr]]]:
        if not terms:
            yield pos, []
            return
        head, rest = terms[0], terms[1:]
        for mid, parts in self.match_term(head, pos, reserve):
            for end, more in self.match_seq(rest, mid, reserve):
                yield end, parts + more

    def match_term(self, term: Term, pos: int, reserve: bool
                   ) -> Iterator[tuple[int, list[SExpr]]]:
        if isinstance(term, Lit):
            yield from self.match_literal(term, pos)
        elif isinstance(term, TokRef):
            yield from self.match_tokref(term, pos, reserve)
        elif isinstance(term, RuleRef):
            for end, node_tree in self.match_rule(term.name, pos, False):
                yield end, [node_tree]
        elif isinstance(term, Opt):
            # greedy: present first, absent second
            yield from self.match_term(term.term, pos, reserve)
            yield pos, []
        elif isinstance(term, Star):
            yield from self.match_repeat(term.term, pos, reserve, minimum=0)
        elif isinstance(term, Plus):
            yield from self.match_repeat(term.term, pos, reserve, minimum=1)
        elif isinstance(term, Group):
            for alt in term.alts:
                yield from self.match_seq(alt, pos, reserve)

    def match_repeat(self, inner: Term, pos: int, reserve: bool, minimum: int
                     ) -> Iterator[tuple[int, list[SExpr]]]:
        def attempt(at: int, count: int) -> Iterator[tuple[int, list[SExpr]]]:
            for mid, parts in self.match_term(inner, at, reserve):
                if mid > at:
                    for end, more in attempt(mid, count + 1):
                        yield end, parts + more
                elif count + 1 >= minimum:
                    # zero-width iteration: take it once, do not recurse
                    yield mid, parts
                    continue
            if count >= minimum:
                yield at, []

        yield from attempt(pos, 0)

    def match_literal(self, term: Lit, pos: int) -> Iterator[tuple[int, list[SExpr]]]:
        parts: list[SExpr] = []
        at = pos
        for word in term.words:
            at = self.skip_hidden(at)
            if at >= self.n or self.tokens[at].lower != word:
                self._note_failure(at, f'"{word}"')
                return
            parts.append(Atom(self.tokens[at].lower))
            at += 1
        yield at, parts

    def match_tokref(self, term: TokRef, pos: int, reserve: bool
                     ) -> Iterator[tuple[int, list[SExpr]]]:
        if term.kind in HIDDEN_KINDS:
            # explicit hidden-token term (e.g. WS inside time strings):
            # match without emitting a leaf
            if pos < self.n and self.tokens[pos].kind == term.kind:
                yield pos + 1, []
            return
        at = self.skip_hidden(pos)
        if at >= self.n:
            self._note_failure(at, term.kind.name)
            return
        token = self.tokens[at]
        if term.kind not in token.kinds:
            self._note_failure(at, term.kind.name)
            return
        if reserve and term.kind == TokenKind.ID and token.lower in self.grammar.keywords:
            self._note_failure(at, f"{term.kind.name} (non-keyword)")
            return
        yield at + 1, [Atom(token.lower)]


def parse(tokens: list[Token], grammar: GrammarSet) -> ParseResult:
    """Match the whole token stream against the grammar's ``input`` rule."""
    matcher = _Matcher(grammar, tokens)
    total_visible = len(visible(tokens))
    input_rule = grammar.rules["input"]
    for alt_index, alt in enumerate(input_rule.alts):
        for end, parts in matcher.match_seq(alt, 0, False):
            rest = matcher.skip_hidden(end)
            trailing = 0
            if rest < matcher.n and matcher.tokens[rest].kind in _TRAILING_PUNCT:
                trailing = 1
                rest = matcher.skip_hidden(rest + 1)
            if rest == matcher.n:
                return ParseResult(
                    tree=Node("input", tuple(parts)),
                    consumed=total_visible - trailing,
                    grammar=grammar.name,
                    matched_rule=alt_index,
                )
    raise NoMatch(matcher.best_pos, tuple(matcher.best_expected[:12]))


def parse_text(text: str, grammar: GrammarSet) -> ParseResult:
    return parse(tokenize(text), grammar)


def extract(tree: SExpr, rule_name: str) -> list[Node]:
    """All subtrees headed ``rule_name`` in pre-order."""
    return subtrees(tree, rule_name)
