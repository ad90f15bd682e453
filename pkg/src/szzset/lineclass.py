"""Line classification: code, blank, or comment.

The comment-token table is keyed by file extension. Lines inside C-family
files that start with a preprocessor directive count as code, not comments;
that is deliberate (directives are semantically load-bearing even though
some diff tools lump them in with comments). Block comments are tracked by
a single forward scan per file; nesting is not supported and tokens inside
string literals are not recognized as such. That keeps the scan linear and
the misclassification risk is accepted.
"""

from __future__ import annotations

from enum import Enum


class LineClass(Enum):
    CODE = "code"
    BLANK = "blank"
    COMMENT = "comment"


_C_LINE = ("//",)
_C_BLOCK = (("/*", "*/"),)
_HASH = ("#",)
_MARKUP = (("<!--", "-->"),)

# extension -> (line tokens, block (open, close) pairs)
_TOKENS: dict[str, tuple[tuple[str, ...], tuple[tuple[str, str], ...]]] = {
    "c": (_C_LINE, _C_BLOCK),
    "h": (_C_LINE, _C_BLOCK),
    "cpp": (_C_LINE, _C_BLOCK),
    "hpp": (_C_LINE, _C_BLOCK),
    "cc": (_C_LINE, _C_BLOCK),
    "rs": (_C_LINE, _C_BLOCK),
    "java": (_C_LINE, _C_BLOCK),
    "js": (_C_LINE, _C_BLOCK),
    "ts": (_C_LINE, _C_BLOCK),
    "py": (_HASH, ()),
    "sh": (_HASH, ()),
    "toml": (_HASH, ()),
    "yml": (_HASH, ()),
    "ini": (("#", ";"), ()),
    "html": ((), _MARKUP),
    "xml": ((), _MARKUP),
    "xhtml": ((), _MARKUP),
}


def comment_tokens(path: str) -> tuple[tuple[str, ...], tuple[tuple[str, str], ...]]:
    """Tokens for a path; unknown extensions get none (every non-blank line is code)."""
    ext = path.rsplit(".", 1)[-1].lower() if "." in path else ""
    return _TOKENS.get(ext, ((), ()))


def classify_line(text: str, path: str) -> LineClass:
    """Single-line rule: blank, or starts with a comment token, else code."""
    stripped = text.strip()
    if not stripped:
        return LineClass.BLANK
    line_tokens, block_tokens = comment_tokens(path)
    for tok in line_tokens:
        if stripped.startswith(tok):
            return LineClass.COMMENT
    for opener, _ in block_tokens:
        if stripped.startswith(opener):
            return LineClass.COMMENT
    return LineClass.CODE


def classify_lines(lines, path: str) -> list[LineClass]:
    """Whole-file scan that also resolves lines inside block comments."""
    line_tokens, block_tokens = comment_tokens(path)
    out: list[LineClass] = []
    open_close: tuple[str, str] | None = None  # currently open block pair
    for text in lines:
        if open_close is not None:
            out.append(LineClass.COMMENT)
            if open_close[1] in text:
                open_close = None
            continue
        cls = classify_line(text, path)
        out.append(cls)
        if cls is LineClass.BLANK:
            continue
        stripped = text.strip()
        if cls is LineClass.COMMENT and not any(
            stripped.startswith(op) for op, _ in block_tokens
        ):
            # a pure line comment swallows the rest of the line, block
            # openers inside it do not count
            continue
        open_close = _unclosed_block(text, block_tokens)
    return out


def _unclosed_block(text: str, block_tokens) -> tuple[str, str] | None:
    # scan left to right so "/* a */ code /* b" leaves pair b open
    pos = 0
    current: tuple[str, str] | None = None
    while True:
        if current is None:
            best = None
            for pair in block_tokens:
                i = text.find(pair[0], pos)
                if i >= 0 and (best is None or i < best[0]):
                    best = (i, pair)
            if best is None:
                return None
            pos = best[0] + len(best[1][0])
            current = best[1]
        else:
            i = text.find(current[1], pos)
            if i < 0:
                return current
            pos = i + len(current[1])
            current = None
