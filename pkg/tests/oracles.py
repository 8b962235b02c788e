"""Independent reference implementations used to check the real ones.

Everything here is deliberately naive: per-bit walks, full DP matrices,
whole-catalog sorts. None of it shares code with the package paths it
verifies.
"""

from __future__ import annotations

ORACLE_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
ORACLE_DIGITS = "0123456789"
ORACLE_SYMBOLS = ORACLE_LETTERS + ORACLE_DIGITS + "-/."
ORACLE_PAD = 63


def char_walk_normalize(raw: str) -> str:
    out = ""
    for ch in raw:
        up = ch.upper()
        for candidate in up:  # str.upper can expand one char to two
            if candidate in ORACLE_SYMBOLS:
                out += candidate
    return out


def slot_walk_encode(code: str) -> int:
    """Place every bit of every slot individually."""
    key = 0
    for slot in range(20):
        if slot < len(code):
            value = ORACLE_SYMBOLS.index(code[slot])
        else:
            value = ORACLE_PAD
        for bit in range(6):
            if (value >> bit) & 1:
                key |= 1 << (slot * 6 + bit)
    return key


def bit_walk_hamming(a: int, b: int) -> int:
    return sum(((a >> i) & 1) != ((b >> i) & 1) for i in range(120))


def matrix_levenshtein(a: str, b: str) -> int:
    """Full DP matrix, no banding, no row reuse."""
    rows = len(a) + 1
    cols = len(b) + 1
    d = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        d[i][0] = i
    for j in range(cols):
        d[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost)
    return d[rows - 1][cols - 1]


def naive_neighbors(keys: list[int], query: int) -> list[tuple[int, int]]:
    """All (ordinal, distance) pairs sorted by (distance, ordinal)."""
    scored = [(bin(key ^ query).count("1"), ordinal) for ordinal, key in enumerate(keys)]
    scored.sort()
    return [(ordinal, dist) for dist, ordinal in scored]


def naive_knn(keys: list[int], query: int, k: int) -> list[tuple[int, int]]:
    return naive_neighbors(keys, query)[:k]


def naive_radius(keys: list[int], query: int, r: int) -> set[tuple[int, int]]:
    return {(o, d) for o, d in naive_neighbors(keys, query) if d <= r}
