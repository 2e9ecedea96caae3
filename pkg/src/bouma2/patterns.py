"""Patterns, traces and the occurrence/association functions.

A *trace* is any 2-byte substring of a pattern.  Patterns are plain byte
strings of length >= 3; the alphabet is fixed to the 256 byte values.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple

from .errors import EmptyPatternSet, PatternFileError, PatternTooShort

MIN_PATTERN_LENGTH = 3


@dataclass(frozen=True)
class Pattern:
    id: int
    data: bytes

    def __len__(self) -> int:
        return len(self.data)


class Occurrence(NamedTuple):
    pattern_id: int
    trace: bytes
    offset: int


@dataclass(frozen=True)
class PatternSet:
    """Validated, deduplicated collection of patterns.

    ``patterns`` holds one canonical :class:`Pattern` per distinct byte
    string; its id is the input index of the first occurrence.  ``duplicates``
    maps every byte string given more than once to all input ids sharing it.
    """

    patterns: tuple[Pattern, ...]
    duplicates: dict[bytes, tuple[int, ...]] = field(default_factory=dict)
    input_count: int = 0

    def __len__(self) -> int:
        return len(self.patterns)

    def __iter__(self) -> Iterator[Pattern]:
        return iter(self.patterns)

    @property
    def sz(self) -> int:
        """Total length of the distinct patterns."""
        return sum(len(p.data) for p in self.patterns)

    @property
    def max_length(self) -> int:
        return max(len(p.data) for p in self.patterns)

    def by_id(self, pattern_id: int) -> Pattern:
        return self._index[pattern_id]

    def fanout(self, pattern_id: int) -> tuple[int, ...]:
        """All input ids that report when the canonical pattern matches."""
        p = self._index[pattern_id]
        return self.duplicates.get(p.data, (pattern_id,))

    def canonical(self, input_id: int) -> int:
        """Id of the canonical pattern for any input id, duplicates included."""
        if input_id in self._index:
            return input_id
        for ids in self.duplicates.values():
            if input_id in ids:
                return ids[0]
        raise KeyError(input_id)

    @property
    def _index(self) -> dict[int, Pattern]:
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {p.id: p for p in self.patterns}
            object.__setattr__(self, "_idx", idx)
        return idx


def validate_patterns(raw: Iterable[bytes]) -> PatternSet:
    raw = [bytes(r) for r in raw]
    if not raw:
        raise EmptyPatternSet()
    first: dict[bytes, int] = {}
    ids: dict[bytes, list[int]] = {}
    for i, data in enumerate(raw):
        if len(data) < MIN_PATTERN_LENGTH:
            raise PatternTooShort(i, len(data))
        first.setdefault(data, i)
        ids.setdefault(data, []).append(i)
    patterns = tuple(Pattern(i, data) for data, i in first.items())
    duplicates = {data: tuple(v) for data, v in ids.items() if len(v) > 1}
    return PatternSet(patterns, duplicates, len(raw))


def is_trace(t: bytes) -> bool:
    return isinstance(t, (bytes, bytearray)) and len(t) == 2


def trace_code(t: bytes) -> int:
    """Big-endian 16-bit code of a trace, used as the dispatch index."""
    return (t[0] << 8) | t[1]


def code_trace(code: int) -> bytes:
    return bytes(((code >> 8) & 0xFF, code & 0xFF))


def word_traces(word: bytes) -> Iterator[tuple[int, bytes]]:
    for i in range(len(word) - 1):
        yield i, word[i:i + 2]


def extract_trace_set(ps: PatternSet) -> set[bytes]:
    return {t for p in ps for _, t in word_traces(p.data)}


def occurrences(ps: PatternSet) -> Iterator[Occurrence]:
    for p in ps:
        for i, t in word_traces(p.data):
            yield Occurrence(p.id, t, i)


def occ(word: bytes | Pattern, t: bytes, offset: int) -> int:
    """1 iff ``t`` occurs in ``word`` with exactly ``offset`` bytes before it."""
    if isinstance(word, Pattern):
        word = word.data
    if offset < 0 or offset + 2 > len(word):
        return 0
    return int(word[offset:offset + 2] == t)


def trace_offsets(word: bytes, t: bytes) -> list[int]:
    return [i for i, u in word_traces(word) if u == t]


def assoc(word: bytes | Pattern, t: bytes, parity: int) -> int:
    """1 iff ``t`` occurs in ``word`` at some offset of the given parity."""
    if parity not in (0, 1):
        raise ValueError(f"parity must be 0 or 1, got {parity}")
    if isinstance(word, Pattern):
        word = word.data
    return int(any(i % 2 == parity for i in trace_offsets(word, t)))


# -- pattern file format ----------------------------------------------------

_ESCAPE = re.compile(r"\\(x[0-9a-fA-F]{2}|.|$)")
_SIMPLE = {"\\": b"\\", "n": b"\n", "r": b"\r", "t": b"\t"}


def decode_pattern_line(line: str, line_no: int = 0) -> bytes:
    out = bytearray()
    pos = 0
    for m in _ESCAPE.finditer(line):
        out += line[pos:m.start()].encode("utf-8")
        esc = m.group(1)
        if esc.startswith("x") and len(esc) == 3:
            out.append(int(esc[1:], 16))
        elif esc in _SIMPLE:
            out += _SIMPLE[esc]
        else:
            raise PatternFileError(line_no, f"invalid escape sequence \\{esc}")
        pos = m.end()
    out += line[pos:].encode("utf-8")
    return bytes(out)


def encode_pattern_line(data: bytes) -> str:
    """Inverse of :func:`decode_pattern_line` for printable ASCII, escaping the rest."""
    parts = []
    for b in data:
        c = chr(b)
        if c == "\\":
            parts.append("\\\\")
        elif 0x20 <= b < 0x7F and not (not parts and c == "#"):
            parts.append(c)
        else:
            parts.append(f"\\x{b:02x}")
    return "".join(parts)


def parse_pattern_text(text: str) -> list[bytes]:
    raw = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        raw.append(decode_pattern_line(line, line_no))
    return raw


def read_pattern_file(path) -> list[bytes]:
    with open(path, encoding="utf-8") as fh:
        return parse_pattern_text(fh.read())
