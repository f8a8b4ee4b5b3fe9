"""graph6 encoding for graphs on at most 62 vertices.

Bits of the upper triangle are taken column by column,
``(0,1), (0,2), (1,2), (0,3), ...``, packed six to a character with
offset 63, exactly as nauty's ``showg``/``geng`` expect.
"""

from __future__ import annotations

MAX_VERTICES = 62


def encode(n: int, adj) -> str:
    if not 0 <= n <= MAX_VERTICES:
        raise ValueError(f"graph6 supports 0..{MAX_VERTICES} vertices, got {n}")
    bits = []
    for j in range(1, n):
        row = adj[j]
        for i in range(j):
            bits.append((row >> i) & 1)
    while len(bits) % 6:
        bits.append(0)
    chars = [chr(n + 63)]
    for k in range(0, len(bits), 6):
        val = 0
        for b in bits[k:k + 6]:
            val = (val << 1) | b
        chars.append(chr(val + 63))
    return "".join(chars)


def decode(text: str) -> tuple[int, tuple[int, ...]]:
    """Return ``(n, adj)`` where ``adj`` holds per-vertex neighbour bitmasks."""
    s = text.strip()
    if s.startswith(">>graph6<<"):
        s = s[10:]
    if not s:
        raise ValueError("empty graph6 string")
    n = ord(s[0]) - 63
    if not 0 <= n <= MAX_VERTICES:
        raise ValueError(f"unsupported graph6 size byte {s[0]!r}")
    nbits = n * (n - 1) // 2
    body = s[1:]
    if len(body) != (nbits + 5) // 6:
        raise ValueError(f"graph6 body has {len(body)} chars, expected {(nbits + 5) // 6}")
    bits = []
    for ch in body:
        val = ord(ch) - 63
        if not 0 <= val < 64:
            raise ValueError(f"invalid graph6 character {ch!r}")
        bits.extend((val >> (5 - k)) & 1 for k in range(6))
    adj = [0] * n
    pos = 0
    for j in range(1, n):
        for i in range(j):
            if bits[pos]:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
            pos += 1
    return n, tuple(adj)
