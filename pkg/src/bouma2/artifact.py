"""Binary container for compiled matchers.

Layout (little-endian)::

    magic "B2C1" | version u16 | section count u16
    section table: (id u16, byte length u64) per section
    section payloads, in table order

Sections: PATTERNS, MOTIFS, MAPPINGS, TRIES and META.  Unknown section ids,
truncated payloads and trailing bytes are rejected.
"""

from __future__ import annotations

import struct

from .assignment import MotifMapping
from .errors import ArtifactError
from .matcher import CompiledMatcher, compile
from .patterns import Pattern, PatternSet, code_trace, trace_code
from .trie import MangledTrie, MTNode, NodeKind, iter_nodes

MAGIC = b"B2C1"
FORMAT_VERSION = 1

SEC_PATTERNS = 1
SEC_MOTIFS = 2
SEC_MAPPINGS = 3
SEC_TRIES = 4
SEC_META = 5
SECTION_NAMES = {
    SEC_PATTERNS: "PATTERNS",
    SEC_MOTIFS: "MOTIFS",
    SEC_MAPPINGS: "MAPPINGS",
    SEC_TRIES: "TRIES",
    SEC_META: "META",
}

NONE32 = 0xFFFFFFFF
NONE16 = 0xFFFF
_KINDS = [NodeKind.STATE, NodeKind.TRANSITIONAL, NodeKind.TERMINAL]
_KIND_CODE = {k: i for i, k in enumerate(_KINDS)}


class _Writer:
    def __init__(self) -> None:
        self.buf = bytearray()

    def pack(self, fmt: str, *values) -> None:
        self.buf += struct.pack("<" + fmt, *values)

    def raw(self, data: bytes) -> None:
        self.buf += data


class _Reader:
    def __init__(self, data: bytes, base: int = 0) -> None:
        self.data = data
        self.pos = 0
        self.base = base

    def unpack(self, fmt: str):
        size = struct.calcsize("<" + fmt)
        if self.pos + size > len(self.data):
            raise ArtifactError("truncated payload", self.base + self.pos)
        values = struct.unpack_from("<" + fmt, self.data, self.pos)
        self.pos += size
        return values

    def one(self, fmt: str):
        return self.unpack(fmt)[0]

    def raw(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ArtifactError("truncated payload", self.base + self.pos)
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return bytes(out)

    def done(self, name: str) -> None:
        if self.pos != len(self.data):
            raise ArtifactError(f"{name} section has trailing bytes", self.base + self.pos)


def _write_patterns(ps: PatternSet) -> bytes:
    w = _Writer()
    w.pack("II", ps.input_count, len(ps))
    for p in ps:
        w.pack("II", p.id, len(p.data))
        w.raw(p.data)
    dups = sorted(ps.duplicates.values())
    w.pack("I", len(dups))
    for ids in dups:
        w.pack("I", len(ids))
        w.pack(f"{len(ids)}I", *ids)
    return bytes(w.buf)


def _read_patterns(r: _Reader) -> PatternSet:
    input_count, n = r.unpack("II")
    pats = []
    for _ in range(n):
        pid, length = r.unpack("II")
        pats.append(Pattern(pid, r.raw(length)))
    by_id = {p.id: p for p in pats}
    dups = {}
    for _ in range(r.one("I")):
        k = r.one("I")
        ids = r.unpack(f"{k}I")
        if not ids or ids[0] not in by_id:
            raise ArtifactError("duplicate map references an unknown pattern", r.base + r.pos)
        dups[by_id[ids[0]].data] = tuple(ids)
    r.done("PATTERNS")
    return PatternSet(tuple(pats), dups, input_count)


def _write_trie(w: _Writer, trie: MangledTrie) -> None:
    nodes = list(iter_nodes(trie.root))
    index = {id(n): k for k, n in enumerate(nodes)}

    def ref(node):
        return NONE32 if node is None else index[id(node)]

    w.pack("HII", trace_code(trie.motif), trie.max_word_length, len(trie.entries))
    for pid, anchor in trie.entries:
        w.pack("IH", pid, anchor)
    w.pack("I", len(nodes))
    for n in nodes:
        pid, anchor = n.entry if n.entry is not None else (NONE32, NONE16)
        w.pack("BhIIIIH", _KIND_CODE[n.kind], n.offset, ref(n.fallback), ref(n.next),
               ref(n.pivot), pid, anchor)
        w.pack("H", len(n.edges))
        for b, child in sorted(n.edges.items()):
            w.pack("BI", b, ref(child))
        w.pack("H", len(n.fragments))
        for off, run in n.fragments:
            w.pack("hH", off, len(run))
            w.raw(run)


def _read_trie(r: _Reader) -> MangledTrie:
    code, longest, n_entries = r.unpack("HII")
    entries = tuple(tuple(r.unpack("IH")) for _ in range(n_entries))
    count = r.one("I")
    raw = []
    for _ in range(count):
        kind, offset, fb, nxt, piv, pid, anchor = r.unpack("BhIIIIH")
        if kind >= len(_KINDS):
            raise ArtifactError(f"unknown node kind {kind}", r.base + r.pos)
        edges = [r.unpack("BI") for _ in range(r.one("H"))]
        frags = []
        for _ in range(r.one("H")):
            off, length = r.unpack("hH")
            frags.append((off, r.raw(length)))
        raw.append((kind, offset, fb, nxt, piv, pid, anchor, edges, tuple(frags)))
    if count == 0:
        raise ArtifactError("trie without nodes", r.base + r.pos)
    nodes = [MTNode(_KINDS[x[0]], offset=x[1], fragments=x[8],
                    entry=None if x[5] == NONE32 else (x[5], x[6])) for x in raw]

    def get(k):
        if k == NONE32:
            return None
        if k >= count:
            raise ArtifactError(f"node reference {k} out of range", r.base + r.pos)
        return nodes[k]

    for node, x in zip(nodes, raw):
        node.fallback, node.next, node.pivot = get(x[2]), get(x[3]), get(x[4])
        node.edges = {b: get(c) for b, c in x[7]}
    return MangledTrie(code_trace(code), nodes[0], entries, longest)


def dumps(cm: CompiledMatcher) -> bytes:
    sections = []
    sections.append((SEC_PATTERNS, _write_patterns(cm.patterns)))

    w = _Writer()
    w.pack("I", len(cm.motifs))
    for t in cm.motifs:
        w.pack("H", trace_code(t))
    sections.append((SEC_MOTIFS, bytes(w.buf)))

    w = _Writer()
    w.pack("I", len(cm.mappings))
    for m in cm.mappings:
        if m.anchor > NONE16:
            raise ArtifactError(f"anchor {m.anchor} does not fit the u16 field")
        w.pack("IBHH", m.pattern_id, m.parity, trace_code(m.motif), m.anchor)
    sections.append((SEC_MAPPINGS, bytes(w.buf)))

    w = _Writer()
    w.pack("I", len(cm.tries))
    for t in cm.tries:
        _write_trie(w, t)
    sections.append((SEC_TRIES, bytes(w.buf)))

    w = _Writer()
    w.pack("I", len(cm.meta))
    for k, v in sorted(cm.meta.items()):
        kb, vb = k.encode("utf-8"), str(v).encode("utf-8")
        w.pack("H", len(kb))
        w.raw(kb)
        w.pack("I", len(vb))
        w.raw(vb)
    sections.append((SEC_META, bytes(w.buf)))

    out = _Writer()
    out.raw(MAGIC)
    out.pack("HH", FORMAT_VERSION, len(sections))
    for sid, payload in sections:
        out.pack("HQ", sid, len(payload))
    for _, payload in sections:
        out.raw(payload)
    return bytes(out.buf)


def loads(data: bytes) -> CompiledMatcher:
    data = bytes(data)
    if data[:4] != MAGIC:
        raise ArtifactError(f"bad magic {data[:4]!r}, expected {MAGIC!r}", 0)
    head = _Reader(data)
    head.pos = 4
    version, count = head.unpack("HH")
    if version != FORMAT_VERSION:
        raise ArtifactError(f"unsupported format version {version}", 4)
    table = []
    for _ in range(count):
        at = head.pos
        sid, length = head.unpack("HQ")
        if sid not in SECTION_NAMES:
            raise ArtifactError(f"unknown section id {sid}", at)
        table.append((sid, length))
    pos = head.pos
    payloads = {}
    for sid, length in table:
        if pos + length > len(data):
            raise ArtifactError(f"{SECTION_NAMES[sid]} section runs past end of file", pos)
        if sid in payloads:
            raise ArtifactError(f"duplicate {SECTION_NAMES[sid]} section", pos)
        payloads[sid] = (pos, data[pos:pos + length])
        pos += length
    if pos != len(data):
        raise ArtifactError("trailing bytes after last section", pos)
    for sid in (SEC_PATTERNS, SEC_MOTIFS, SEC_MAPPINGS, SEC_TRIES):
        if sid not in payloads:
            raise ArtifactError(f"missing {SECTION_NAMES[sid]} section")

    def reader(sid):
        base, payload = payloads[sid]
        return _Reader(payload, base)

    ps = _read_patterns(reader(SEC_PATTERNS))

    r = reader(SEC_MOTIFS)
    motifs = [code_trace(r.one("H")) for _ in range(r.one("I"))]
    r.done("MOTIFS")

    r = reader(SEC_MAPPINGS)
    mappings = []
    for _ in range(r.one("I")):
        pid, parity, code, anchor = r.unpack("IBHH")
        mappings.append(MotifMapping(pid, parity, code_trace(code), anchor))
    r.done("MAPPINGS")

    r = reader(SEC_TRIES)
    tries = [_read_trie(r) for _ in range(r.one("I"))]
    r.done("TRIES")

    meta = {}
    if SEC_META in payloads:
        r = reader(SEC_META)
        for _ in range(r.one("I")):
            k = r.raw(r.one("H")).decode("utf-8")
            meta[k] = r.raw(r.one("I")).decode("utf-8")
        r.done("META")

    if sorted(motifs) != sorted(t.motif for t in tries):
        raise ArtifactError("MOTIFS and TRIES sections disagree")
    return compile(ps, motifs, mappings, tries, meta)


def save(cm: CompiledMatcher, path) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(cm))


def load(path) -> CompiledMatcher:
    with open(path, "rb") as fh:
        return loads(fh.read())
