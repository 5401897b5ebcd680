"""Tokenizer for Huey request text.

Splits raw input into words, numbers, dates-in-digits and punctuation.
Matching elsewhere in the engine is case-insensitive, so every token
carries both the original slice and its lowercased form.  Whitespace and
comments are kept in the stream but flagged hidden; a few grammar rules
(time strings, phrases) look at them explicitly.

Numeric classification is deliberately ambiguous at this layer: "06" is
at once a generic number, a two-digit integer, a month and a day.  The
token records the full candidate set and the parser picks the kind its
rule context demands.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, auto


class TokenKind(Enum):
    ID = auto()
    NUMBER = auto()
    FLOAT = auto()
    INT2 = auto()
    INT4 = auto()
    MONTH_NUM = auto()
    DAY_NUM = auto()
    YEAR_NUM = auto()
    DOT = auto()
    SEMI = auto()
    COLON = auto()
    COMMA = auto()
    BANG = auto()
    DASH = auto()
    SLASH = auto()
    WS = auto()
    COMMENT = auto()
    LINE_COMMENT = auto()


#: Kinds that never take part in grammar matching directly.
HIDDEN_KINDS = frozenset({TokenKind.WS, TokenKind.COMMENT, TokenKind.LINE_COMMENT})

PUNCT_KINDS = {
    ".": TokenKind.DOT,
    ";": TokenKind.SEMI,
    ":": TokenKind.COLON,
    ",": TokenKind.COMMA,
    "!": TokenKind.BANG,
    "-": TokenKind.DASH,
    "/": TokenKind.SLASH,
}

_WS_CHARS = " \t\r\n\f\v"


class LexError(ValueError):
    """Raised when a byte starts no token rule."""

    def __init__(self, position: int, char: str):
        self.position = position
        self.char = char
        super().__init__(f"no token rule matches {char!r} at position {position}")


@dataclass(frozen=True)
class Token:
    """One lexical atom of the input.

    ``text`` preserves the original slice; ``lower`` is what grammar
    literals compare against.  ``kinds`` holds every numeric kind the
    text satisfies (a single kind for non-numeric tokens).
    """

    kind: TokenKind
    text: str
    span: tuple[int, int]
    kinds: frozenset[TokenKind] = field(default=frozenset())
    lower: str = ""

    def __post_init__(self):
        if not self.kinds:
            object.__setattr__(self, "kinds", frozenset({self.kind}))
        if not self.lower:
            object.__setattr__(self, "lower", self.text.lower())

    @property
    def hidden(self) -> bool:
        return self.kind in HIDDEN_KINDS


def classify_numeric(text: str) -> set[TokenKind]:
    """Return every numeric kind whose pattern fully matches ``text``.

    Patterns overlap on purpose ("12" is a number, a two-digit int, a
    month, a day and a year suffix); resolution is the parser's job.
    """
    kinds: set[TokenKind] = set()
    if not text:
        return kinds
    digits = text.replace(".", "", 1)
    if not digits.isdigit():
        return kinds
    if "." in text:
        head, _, tail = text.partition(".")
        # one or more integer digits, any number of fraction digits
        if head.isdigit():
            kinds.add(TokenKind.FLOAT)
            kinds.add(TokenKind.NUMBER)
        return kinds
    n = len(text)
    leading_zero = text[0] == "0"
    if n == 1 or not leading_zero:
        kinds.add(TokenKind.NUMBER)
    if n == 2 and leading_zero and text[1] != "0":
        kinds.add(TokenKind.NUMBER)  # 01..09
    if n == 2:
        kinds.add(TokenKind.INT2)
    if n == 4:
        kinds.add(TokenKind.INT4)
    # months: 1-9, 01-09, 10-12
    if (n == 1 and text != "0") or (n == 2 and (("01" <= text <= "09") or ("10" <= text <= "12"))):
        kinds.add(TokenKind.MONTH_NUM)
    # days: 1-9, 01-09, 10-29, 30, 31
    if (n == 1 and text != "0") or (
        n == 2 and (("01" <= text <= "09") or ("10" <= text <= "29") or text in ("30", "31"))
    ):
        kinds.add(TokenKind.DAY_NUM)
    # years: two digits, optionally prefixed by 19 or 20
    if n == 2 or (n == 4 and text[:2] in ("19", "20")):
        kinds.add(TokenKind.YEAR_NUM)
    return kinds


def _primary_numeric_kind(kinds: set[TokenKind]) -> TokenKind:
    for kind in (TokenKind.FLOAT, TokenKind.NUMBER, TokenKind.INT2, TokenKind.INT4,
                 TokenKind.MONTH_NUM, TokenKind.DAY_NUM, TokenKind.YEAR_NUM):
        if kind in kinds:
            return kind
    raise AssertionError("numeric token with no numeric kind")


def tokenize(text: str) -> list[Token]:
    """Tokenize ``text`` into the full stream, hidden tokens included.

    Raises :class:`LexError` on any character outside the ASCII
    letter/digit/punctuation/whitespace repertoire.
    """
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c in _WS_CHARS:
            j = i
            while j < n and text[j] in _WS_CHARS:
                j += 1
            tokens.append(Token(TokenKind.WS, text[i:j], (i, j)))
            i = j
            continue
        if text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end == -1:
                raise LexError(i, "/*")
            j = end + 2
            tokens.append(Token(TokenKind.COMMENT, text[i:j], (i, j)))
            i = j
            continue
        if text.startswith("//", i):
            end = text.find("\n", i)
            j = n if end == -1 else end + 1
            tokens.append(Token(TokenKind.LINE_COMMENT, text[i:j], (i, j)))
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            # a dot joins the number only when more digits may follow (FLOAT)
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            word = text[i:j]
            kinds = classify_numeric(word)
            tokens.append(Token(_primary_numeric_kind(kinds), word, (i, j), frozenset(kinds)))
            i = j
            continue
        if c in PUNCT_KINDS:
            tokens.append(Token(PUNCT_KINDS[c], c, (i, i + 1)))
            i += 1
            continue
        if ("a" <= c <= "z") or ("A" <= c <= "Z"):
            j = i + 1
            while j < n and (text[j].isascii() and (text[j].isalpha() or text[j].isdigit())):
                j += 1
            tokens.append(Token(TokenKind.ID, text[i:j], (i, j)))
            i = j
            continue
        raise LexError(i, c)
    return tokens


def visible(tokens: list[Token]) -> list[Token]:
    """Drop hidden tokens, keeping grammar-relevant ones only."""
    return [t for t in tokens if not t.hidden]
