"""Finite pair-colorings, realization, and identities.

A coloring assigns a natural-number color to every 2-element subset of
``{0, ..., n-1}``.  ``f`` *realizes* ``g`` when some injection of g's vertices
into f's vertices sends every pair of g-equal edges to a pair of f-equal
edges.  Identities are the classes of mutual realization; for colorings of
equal size that is exactly isomorphism of the edge partitions, so an
identity is stored as the lexicographically least edge partition over all
vertex relabelings.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

__all__ = [
    "ColoringParseError",
    "Coloring",
    "Identity",
    "BinaryWord",
    "pairs_of",
    "parse_coloring",
    "format_coloring",
    "realizes",
    "equivalent",
    "canonical_identity",
    "enumerate_identities",
    "meet_coloring",
    "j_identities",
    "realizes_identity",
    "parse_identity",
]


class ColoringParseError(ValueError):
    """Raised for malformed coloring text; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@lru_cache(maxsize=None)
def pairs_of(n: int) -> tuple[tuple[int, int], ...]:
    """All pairs ``(i, j)`` with ``0 <= i < j < n`` in lexicographic order."""
    return tuple(itertools.combinations(range(n), 2))


@lru_cache(maxsize=None)
def _pair_index(n: int) -> dict[tuple[int, int], int]:
    return {pair: k for k, pair in enumerate(pairs_of(n))}


def _pattern(colors: Sequence[int]) -> tuple[int, ...]:
    """Relabel colors by first occurrence (restricted growth string)."""
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(c, len(seen)) for c in colors)


@dataclass(frozen=True)
class Coloring:
    """A coloring of the pairs of ``{0..n-1}``.

    ``colors[k]`` is the color of ``pairs_of(n)[k]``.
    """

    n: int
    colors: tuple[int, ...]

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("vertex count must be non-negative")
        object.__setattr__(self, "colors", tuple(int(c) for c in self.colors))
        if len(self.colors) != len(pairs_of(self.n)):
            raise ValueError(
                f"expected {len(pairs_of(self.n))} pair colors for n={self.n}, "
                f"got {len(self.colors)}"
            )
        if any(c < 0 for c in self.colors):
            raise ValueError("colors must be natural numbers")

    @classmethod
    def from_mapping(cls, n: int, mapping: dict) -> "Coloring":
        index = _pair_index(n)
        colors = [None] * len(index)
        for pair, color in mapping.items():
            i, j = sorted(pair)
            colors[index[(i, j)]] = color
        if any(c is None for c in colors):
            raise ValueError("mapping does not cover every pair")
        return cls(n, tuple(colors))

    @classmethod
    def constant(cls, n: int, color: int = 0) -> "Coloring":
        return cls(n, (color,) * len(pairs_of(n)))

    @classmethod
    def distinct(cls, n: int) -> "Coloring":
        return cls(n, tuple(range(len(pairs_of(n)))))

    def color(self, i: int, j: int) -> int:
        if i == j:
            raise ValueError("a pair needs two distinct vertices")
        if i > j:
            i, j = j, i
        return self.colors[_pair_index(self.n)[(i, j)]]

    def pattern(self) -> tuple[int, ...]:
        return _pattern(self.colors)

    def permuted(self, perm: Sequence[int]) -> "Coloring":
        """The coloring ``g`` with ``g(perm[i], perm[j]) = self(i, j)``."""
        index = _pair_index(self.n)
        colors = [0] * len(self.colors)
        for (i, j), c in zip(pairs_of(self.n), self.colors):
            a, b = perm[i], perm[j]
            colors[index[(min(a, b), max(a, b))]] = c
        return Coloring(self.n, tuple(colors))

    def restrict(self, vertices: Sequence[int]) -> "Coloring":
        """Induced coloring on ``vertices``, relabelled ``0..len-1`` in the given order."""
        k = len(vertices)
        return Coloring(k, tuple(self.color(vertices[i], vertices[j]) for i, j in pairs_of(k)))


@dataclass(frozen=True)
class Identity:
    """Canonical edge partition of the pairs of ``{0..r-1}``.

    ``pattern[k]`` is the block id of ``pairs_of(r)[k]``; it is the least
    restricted growth string over all vertex permutations.
    """

    r: int
    pattern: tuple[int, ...]

    @property
    def blocks(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        out: dict[int, list] = {}
        for pair, b in zip(pairs_of(self.r), self.pattern):
            out.setdefault(b, []).append(pair)
        return tuple(tuple(out[b]) for b in sorted(out))

    @property
    def block_count(self) -> int:
        return len(set(self.pattern))

    def representative(self) -> Coloring:
        return Coloring(self.r, self.pattern)

    def __str__(self) -> str:
        blocks = "|".join(",".join(f"{i}-{j}" for i, j in block) for block in self.blocks)
        return f"{self.r}; {blocks}"

    def __lt__(self, other: "Identity") -> bool:
        return (self.r, self.pattern) < (other.r, other.pattern)


def parse_identity(text: str) -> Identity:
    """Parse ``"r; block|block"``; the result is re-canonicalized."""
    try:
        head, _, body = text.partition(";")
        r = int(head.strip())
        mapping = {}
        body = body.strip()
        for b, block in enumerate(body.split("|") if body else []):
            for item in block.split(","):
                i, j = (int(v) for v in item.strip().split("-"))
                if (i, j) in mapping or (j, i) in mapping:
                    raise ValueError(f"pair {i}-{j} listed twice")
                mapping[(i, j)] = b
        return canonical_identity(Coloring.from_mapping(r, mapping))
    except (ValueError, KeyError, IndexError) as exc:
        raise ValueError(f"bad identity {text!r}: {exc}") from None


def parse_coloring(text: str) -> Coloring:
    """Parse lines ``"i j c"``; blank lines and ``#`` comments are skipped.

    ``n`` is one more than the largest vertex mentioned.  Every pair must be
    listed exactly once.
    """
    seen: dict[tuple[int, int], tuple[int, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ColoringParseError(f"expected 'i j c', got {raw.strip()!r}", lineno)
        try:
            i, j, c = (int(p) for p in parts)
        except ValueError:
            raise ColoringParseError(f"non-integer field in {raw.strip()!r}", lineno) from None
        if not 0 <= i < j or c < 0:
            raise ColoringParseError("need 0 <= i < j and c >= 0", lineno)
        if (i, j) in seen:
            raise ColoringParseError(
                f"duplicate pair {{{i},{j}}} (first on line {seen[(i, j)][1]})", lineno
            )
        seen[(i, j)] = (c, lineno)
    if not seen:
        raise ColoringParseError("no pairs given")
    n = 1 + max(j for _, j in seen)
    for pair in pairs_of(n):
        if pair not in seen:
            raise ColoringParseError(f"pair {{{pair[0]},{pair[1]}}} missing")
    return Coloring(n, tuple(seen[pair][0] for pair in pairs_of(n)))


def format_coloring(c: Coloring) -> str:
    return "".join(f"{i} {j} {col}\n" for (i, j), col in zip(pairs_of(c.n), c.colors))


def realizes(f: Coloring, g: Coloring) -> bool:
    """True iff f realizes g.

    Backtracks over injections ``k: range(g.n) -> range(f.n)`` one vertex at a
    time.  Since g-equal pairs must land on f-equal pairs, each g color class
    is pinned to a single f color; the partial class map prunes the search.
    """
    m, n = g.n, f.n
    if m > n:
        return False
    if m < 2:
        return True
    gidx = _pair_index(m)
    fcol = [[-1] * n for _ in range(n)]
    for (i, j), c in zip(pairs_of(n), f.colors):
        fcol[i][j] = fcol[j][i] = c
    gpat = g.pattern()

    image = [-1] * m
    used = [False] * n
    class_map = [-1] * (max(gpat) + 1)

    def extend(v: int) -> bool:
        if v == m:
            return True
        for a in range(n):
            if used[a]:
                continue
            pinned = []
            ok = True
            for u in range(v):
                cls = gpat[gidx[(u, v)]]
                col = fcol[image[u]][a]
                if class_map[cls] == -1:
                    class_map[cls] = col
                    pinned.append(cls)
                elif class_map[cls] != col:
                    ok = False
                    break
            if ok:
                image[v] = a
                used[a] = True
                if extend(v + 1):
                    return True
                used[a] = False
            for cls in pinned:
                class_map[cls] = -1
        return False

    return extend(0)


def equivalent(f: Coloring, g: Coloring) -> bool:
    return realizes(f, g) and realizes(g, f)


@lru_cache(maxsize=None)
def _pair_permutations(r: int) -> tuple[tuple[int, ...], ...]:
    """For each vertex permutation, the induced permutation of pair indices.

    Entry ``k`` of a result tells which original pair lands at position ``k``.
    """
    index = _pair_index(r)
    pairs = pairs_of(r)
    out = []
    for perm in itertools.permutations(range(r)):
        inverse = [0] * r
        for i, p in enumerate(perm):
            inverse[p] = i
        row = []
        for a, b in pairs:
            i, j = inverse[a], inverse[b]
            row.append(index[(min(i, j), max(i, j))])
        out.append(tuple(row))
    return tuple(out)


def _canonical_pattern(r: int, pattern: Sequence[int]) -> tuple[int, ...]:
    best: list[int] | None = None
    for source in _pair_permutations(r):
        relabel: dict[int, int] = {}
        candidate: list[int] = []
        tied = best is not None
        for pos, k in enumerate(source):
            v = relabel.setdefault(pattern[k], len(relabel))
            if tied:
                if v > best[pos]:
                    break
                if v < best[pos]:
                    tied = False
            candidate.append(v)
        else:
            if best is None or candidate < best:
                best = candidate
    return tuple(best) if best is not None else ()


def canonical_identity(c: Coloring) -> Identity:
    """The identity of ``c``: invariant under vertex relabeling and recoloring."""
    return Identity(c.n, _canonical_pattern(c.n, c.pattern()))


def _restricted_growth_strings(length: int) -> Iterable[tuple[int, ...]]:
    if length == 0:
        yield ()
        return
    seq = [0] * length

    def rec(pos: int, top: int):
        if pos == length:
            yield tuple(seq)
            return
        for v in range(top + 2):
            seq[pos] = v
            yield from rec(pos + 1, max(top, v))

    seq[0] = 0
    yield from rec(1, 0)


@lru_cache(maxsize=None)
def enumerate_identities(r: int) -> tuple[Identity, ...]:
    """Every identity of size ``r``, sorted by canonical pattern."""
    if r < 0:
        raise ValueError("size must be non-negative")
    found = set()
    for pattern in _restricted_growth_strings(len(pairs_of(r))):
        if _canonical_pattern(r, pattern) == pattern:
            found.add(Identity(r, pattern))
    return tuple(sorted(found))


@dataclass(frozen=True, order=True)
class BinaryWord:
    """A finite 0/1 string, i.e. a node of the full binary tree."""

    bits: str

    def __post_init__(self):
        if any(b not in "01" for b in self.bits):
            raise ValueError(f"not a binary word: {self.bits!r}")

    def __len__(self) -> int:
        return len(self.bits)

    def meet(self, other: "BinaryWord") -> "BinaryWord":
        """Longest common prefix."""
        k = 0
        for a, b in zip(self.bits, other.bits):
            if a != b:
                break
            k += 1
        return BinaryWord(self.bits[:k])

    def is_prefix_of(self, other: "BinaryWord") -> bool:
        return other.bits.startswith(self.bits)

    def code(self) -> int:
        """Injective natural-number code of the node (binary with a leading 1)."""
        return int("1" + self.bits, 2)


def _as_word(w) -> BinaryWord:
    return w if isinstance(w, BinaryWord) else BinaryWord(str(w))


def meet_coloring(words: Sequence) -> Coloring:
    """Color each pair of branches by the code of their longest common prefix."""
    ws = [_as_word(w) for w in words]
    if len(set(ws)) != len(ws):
        raise ValueError("words must be pairwise distinct")
    for a, b in itertools.permutations(ws, 2):
        if a.is_prefix_of(b):
            raise ValueError(f"{a.bits!r} is a prefix of {b.bits!r}; words must form an antichain")
    n = len(ws)
    return Coloring(n, tuple(ws[i].meet(ws[j]).code() for i, j in pairs_of(n)))


@lru_cache(maxsize=None)
def _meet_patterns(r: int, depth: int) -> frozenset[Identity]:
    words = ["".join(bits) for bits in itertools.product("01", repeat=depth)]
    found = set()
    for combo in itertools.combinations(words, r):
        found.add(canonical_identity(meet_coloring(combo)))
    return frozenset(found)


def j_identities(r: int, depth: int | None = None) -> tuple[Identity, ...]:
    """Size-``r`` identities realized by the meet coloring of the binary tree.

    Branches are represented by words of length exactly ``depth`` (default
    ``r``); every antichain of ``r`` nodes has the same meet pattern as some
    choice of full-depth extensions.
    """
    if r < 2:
        raise ValueError("size must be at least 2")
    depth = r if depth is None else depth
    if 2**depth < r:
        raise ValueError(f"depth {depth} has fewer than {r} branches")
    patterns = [p.representative() for p in _meet_patterns(r, depth)]
    return tuple(
        ident
        for ident in enumerate_identities(r)
        if any(realizes(meet, ident.representative()) for meet in patterns)
    )


def realizes_identity(c: Coloring, identity: Identity) -> bool:
    return realizes(c, identity.representative())
