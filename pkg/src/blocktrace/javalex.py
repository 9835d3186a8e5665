"""Tokenizer for Java source.

Produces a flat token stream with line/column positions. Comments are dropped
(their absence is what makes body hashes comment-insensitive); string and char
literals are kept verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError

KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while record sealed permits
    yield var non-sealed""".split()
)

# Longest-first so maximal munch works with a simple scan.
_OPERATORS = sorted(
    [
        ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "==", "!=", "<=", ">=",
        "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "&=", "|=", "^=", "%=",
        "<<", ">>", "+", "-", "*", "/", "%", "=", "<", ">", "!", "~", "&", "|",
        "^", "?", ":", ";", ",", ".", "(", ")", "{", "}", "[", "]", "@",
    ],
    key=len,
    reverse=True,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident | keyword | number | string | char | op
    text: str
    line: int  # 1-based
    col: int  # 1-based


def tokenize(text: str, path: str | None = None) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def err(msg: str) -> ParseError:
        return ParseError(msg, line, col, path)

    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r\f":
            i += 1
            col += 1
            continue
        if c == "/" and i + 1 < n:
            if text[i + 1] == "/":
                j = text.find("\n", i)
                if j == -1:
                    break
                col += j - i
                i = j
                continue
            if text[i + 1] == "*":
                j = text.find("*/", i + 2)
                if j == -1:
                    raise err("unterminated block comment")
                chunk = text[i : j + 2]
                newlines = chunk.count("\n")
                if newlines:
                    line += newlines
                    col = len(chunk) - chunk.rfind("\n")
                else:
                    col += len(chunk)
                i = j + 2
                continue
        if c == '"':
            if text.startswith('"""', i):
                j = text.find('"""', i + 3)
                if j == -1:
                    raise err("unterminated text block")
                chunk = text[i : j + 3]
                tokens.append(Token("string", chunk, line, col))
                newlines = chunk.count("\n")
                if newlines:
                    line += newlines
                    col = len(chunk) - chunk.rfind("\n")
                else:
                    col += len(chunk)
                i = j + 3
                continue
            j = i + 1
            while j < n:
                if text[j] == "\\":
                    j += 2
                    continue
                if text[j] == '"' or text[j] == "\n":
                    break
                j += 1
            if j >= n or text[j] != '"':
                raise err("unterminated string literal")
            tokens.append(Token("string", text[i : j + 1], line, col))
            col += j + 1 - i
            i = j + 1
            continue
        if c == "'":
            j = i + 1
            while j < n:
                if text[j] == "\\":
                    j += 2
                    continue
                if text[j] == "'" or text[j] == "\n":
                    break
                j += 1
            if j >= n or text[j] != "'":
                raise err("unterminated char literal")
            tokens.append(Token("char", text[i : j + 1], line, col))
            col += j + 1 - i
            i = j + 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            if text.startswith(("0x", "0X", "0b", "0B"), i):
                j = i + 2
                while j < n and (text[j] in "0123456789abcdefABCDEF_"):
                    j += 1
            else:
                seen_dot = c == "."
                j = i + 1
                while j < n:
                    ch = text[j]
                    if ch.isdigit() or ch == "_":
                        j += 1
                    elif ch == "." and not seen_dot:
                        seen_dot = True
                        j += 1
                    elif ch in "eE" and j + 1 < n and (text[j + 1].isdigit() or text[j + 1] in "+-"):
                        j += 2
                    else:
                        break
            if j < n and text[j] in "lLfFdD":
                j += 1
            tokens.append(Token("number", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_" or c == "$":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] in "_$"):
                j += 1
            word = text[i:j]
            kind = "keyword" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        for op in _OPERATORS:
            if text.startswith(op, i):
                tokens.append(Token("op", op, line, col))
                col += len(op)
                i += len(op)
                break
        else:
            raise err(f"unexpected character {c!r}")
    return tokens


def normalize(tokens: list[Token]) -> str:
    """Canonical single-space-joined token text (whitespace/comment insensitive)."""
    return " ".join(t.text for t in tokens)
