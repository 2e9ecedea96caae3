import random
import sys

import pytest

from bouma2.patterns import validate_patterns

EX1 = [b"herd", b"herbal", b"upper", b"deeper", b"error", b"ferrarri"]


@pytest.fixture
def ex1():
    return validate_patterns(EX1)


def brute_reports(patterns, data):
    """(input id, start) for every occurrence, by slicing at every offset."""
    out = []
    for pid, w in enumerate(patterns):
        for i in range(len(data) - len(w) + 1):
            if data[i:i + len(w)] == w:
                out.append((pid, i))
    return sorted(out, key=lambda x: (x[1], x[0]))


def random_patterns(rng: random.Random, count, alphabet=b"abcd", lo=3, hi=8):
    return [bytes(rng.choice(alphabet) for _ in range(rng.randint(lo, hi))) for _ in range(count)]


def planted_input(rng: random.Random, patterns, size, alphabet=b"abcd"):
    buf = bytearray(rng.choice(alphabet) for _ in range(size))
    for _ in range(max(1, size // 16)):
        w = rng.choice(patterns)
        if len(w) <= size:
            pos = rng.randint(0, size - len(w))
            buf[pos:pos + len(w)] = w
    return bytes(buf)


def random_resolve_set(rng: random.Random, motif=b"ab", k=None, max_len=10, alphabet=b"abc"):
    """Words containing ``motif``, each entered at one of its occurrences."""
    from bouma2.assignment import ResolveSet

    k = k or rng.randint(1, 8)
    words = []
    for _ in range(50 * k):  # small alphabets may not have k distinct words
        if len(words) == k:
            break
        n = rng.randint(3, max_len)
        a = rng.randint(0, n - 2)
        w = bytes(rng.choice(alphabet) for _ in range(a)) + motif + \
            bytes(rng.choice(alphabet) for _ in range(n - a - 2))
        if w not in words:
            words.append(w)
    ps = validate_patterns(words)
    entries = []
    for p in ps:
        anchors = [i for i in range(len(p.data) - 1) if p.data[i:i + 2] == motif]
        for a in rng.sample(anchors, rng.randint(1, min(2, len(anchors)))):
            entries.append((p.id, a))
    return ps, ResolveSet(motif, tuple(entries))


def window_oracle(ps, rs, window: dict):
    """Entries whose whole word agrees with ``window`` (rel offset -> byte)."""
    found = set()
    for pid, a in rs.entries:
        w = ps.by_id(pid).data
        if all(window.get(i - a) == w[i] for i in range(len(w))):
            found.add((pid, a))
    return found


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance lines after the run; output capture hides them otherwise."""
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "_results", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
