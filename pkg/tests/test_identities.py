import itertools
import math
import os
import random

import pytest
from hypothesis import given, settings, strategies as st

from idforge.identities import (
    BinaryWord,
    Coloring,
    ColoringParseError,
    Identity,
    canonical_identity,
    enumerate_identities,
    equivalent,
    format_coloring,
    j_identities,
    meet_coloring,
    pairs_of,
    parse_coloring,
    parse_identity,
    realizes,
    realizes_identity,
)

from conftest import brute_realizes, random_coloring

MONO = Coloring(3, (0, 0, 0))
TWO_ONE = Coloring(3, (0, 0, 1))
DISTINCT = Coloring(3, (0, 1, 2))


def colorings(max_n=6, max_colors=4):
    return st.integers(0, max_n).flatmap(
        lambda n: st.lists(st.integers(0, max_colors - 1), min_size=n * (n - 1) // 2,
                           max_size=n * (n - 1) // 2).map(lambda cs: Coloring(n, tuple(cs)))
    )


# -- parsing --------------------------------------------------------------


def test_parse_single_edge():
    c = parse_coloring("0 1 5")
    assert c.n == 2 and c.color(0, 1) == 5


def test_parse_triangle_with_comments():
    c = parse_coloring("# mono\n0 1 0\n0 2 0  # trailing\n\n1 2 0\n")
    assert c == MONO


def test_parse_missing_pair():
    with pytest.raises(ColoringParseError, match=r"\{1,2\} missing"):
        parse_coloring("0 1 0\n0 2 1\n")


def test_parse_duplicate_pair_names_line():
    with pytest.raises(ColoringParseError, match="line 3"):
        parse_coloring("0 1 0\n0 2 1\n0 1 4\n1 2 0\n")


@pytest.mark.parametrize("text", ["0 1", "0 x 1", "1 0 3", "0 1 -2"])
def test_parse_malformed(text):
    with pytest.raises(ColoringParseError, match="line 1"):
        parse_coloring(text)


@given(colorings(max_n=6))
def test_format_parse_round_trip(c):
    if c.n >= 2:
        assert parse_coloring(format_coloring(c)) == c


# -- realization ----------------------------------------------------------


def test_realizes_examples():
    assert realizes(TWO_ONE, TWO_ONE)
    assert not realizes(DISTINCT, MONO)
    assert realizes(MONO, DISTINCT)


def test_larger_field_never_realized():
    assert not realizes(MONO, Coloring.constant(4))


def test_equivalent_examples():
    assert equivalent(MONO, MONO)
    assert not equivalent(MONO, DISTINCT)
    relabeled = TWO_ONE.permuted((2, 0, 1))
    assert relabeled != TWO_ONE
    # oracle: every injection, both directions
    assert brute_realizes(TWO_ONE, relabeled) and brute_realizes(relabeled, TWO_ONE)
    assert equivalent(TWO_ONE, relabeled)


def test_realizes_matches_brute_force():
    rng = random.Random(11)
    for _ in range(400):
        f = random_coloring(rng, rng.randint(1, 5))
        g = random_coloring(rng, rng.randint(1, 4))
        assert realizes(f, g) == brute_realizes(f, g), (f, g)


@settings(max_examples=200, deadline=None)
@given(colorings(), colorings(), colorings())
def test_realizes_is_a_quasi_order(f, g, h):
    assert realizes(f, f)
    if realizes(f, g) and realizes(g, h):
        assert realizes(f, h)


# -- canonical forms ------------------------------------------------------


def test_label_invariance():
    assert canonical_identity(Coloring(3, (7, 7, 7))) == canonical_identity(MONO)


def test_two_one_orbit_collapses():
    images = {TWO_ONE.permuted(p) for p in itertools.permutations(range(3))}
    assert len(images) == 3
    assert len({canonical_identity(c) for c in images}) == 1


def test_all_distinct_has_singleton_blocks():
    ident = canonical_identity(DISTINCT)
    assert ident.blocks == (((0, 1),), ((0, 2),), ((1, 2),))
    assert str(ident) == "3; 0-1|0-2|1-2"


@settings(max_examples=150, deadline=None)
@given(colorings(max_n=5), st.randoms(use_true_random=False))
def test_canonical_invariance(c, rnd):
    perm = list(range(c.n))
    rnd.shuffle(perm)
    palette = rnd.sample(range(100), 10)
    recolored = Coloring(c.n, tuple(palette[x] for x in c.colors))
    assert canonical_identity(c.permuted(perm)) == canonical_identity(c)
    assert canonical_identity(recolored) == canonical_identity(c)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 5).flatmap(lambda n: st.tuples(colorings_of(n), colorings_of(n))))
def test_canonical_equality_iff_equivalent(pair):
    f, g = pair
    assert (canonical_identity(f) == canonical_identity(g)) == equivalent(f, g)


def colorings_of(n, max_colors=3):
    m = n * (n - 1) // 2
    return st.lists(st.integers(0, max_colors - 1), min_size=m, max_size=m).map(
        lambda cs: Coloring(n, tuple(cs))
    )


def test_identity_serialization_round_trip():
    for r in range(2, 5):
        for ident in enumerate_identities(r):
            assert parse_identity(str(ident)) == ident


def test_parse_identity_recanonicalizes():
    assert parse_identity("3; 0-2|0-1,1-2") == canonical_identity(TWO_ONE)


# -- enumeration ----------------------------------------------------------


def _set_partitions(items):
    """Independent generator: insert the first item into each block of partitions of the rest."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for k in range(len(part)):
            yield part[:k] + [[first] + part[k]] + part[k + 1:]


def burnside_orbit_count(r):
    """Orbits of edge partitions of K_r under S_r, by Burnside's lemma."""
    edges = list(itertools.combinations(range(r), 2))
    parts = [frozenset(frozenset(b) for b in p) for p in _set_partitions(edges)]
    fixed = 0
    perms = list(itertools.permutations(range(r)))
    for perm in perms:
        def image(e):
            a, b = perm[e[0]], perm[e[1]]
            return (min(a, b), max(a, b))
        for p in parts:
            if frozenset(frozenset(image(e) for e in b) for b in p) == p:
                fixed += 1
    assert fixed % len(perms) == 0
    return fixed // len(perms), len(parts)


def test_partition_oracle_sizes():
    assert burnside_orbit_count(3) == (3, 5)  # Bell(3) = 5 partitions of K3's edges


def test_enumerate_small():
    assert len(enumerate_identities(2)) == 1
    ids = enumerate_identities(3)
    assert len(ids) == 3
    assert {i.block_count for i in ids} == {1, 2, 3}


def test_enumerate_r4_matches_burnside():
    count, partitions = burnside_orbit_count(4)
    assert partitions == 203
    assert len(enumerate_identities(4)) == count == 25


def test_enumerated_identities_pairwise_inequivalent():
    ids = enumerate_identities(4)
    for a, b in itertools.combinations(ids, 2):
        assert not equivalent(a.representative(), b.representative())


# -- meet colorings and J ---------------------------------------------------


def test_meet_coloring_two_one():
    c = meet_coloring(["00", "01", "10"])
    assert c.color(1, 2) == c.color(0, 2) != c.color(0, 1)
    assert canonical_identity(c) == canonical_identity(TWO_ONE)


def test_meet_coloring_single_pair():
    assert meet_coloring(["00", "01"]).n == 2


def test_meet_coloring_four_words():
    words = ["000", "001", "010", "100"]
    c = meet_coloring(words)
    # oracle: longest-common-prefix table
    meets = {(i, j): os.path.commonprefix([words[i], words[j]]) for i, j in pairs_of(4)}
    assert meets == {(0, 1): "00", (0, 2): "0", (0, 3): "", (1, 2): "0", (1, 3): "", (2, 3): ""}
    for a, b in itertools.combinations(pairs_of(4), 2):
        assert (c.color(*a) == c.color(*b)) == (meets[a] == meets[b])
    assert sorted(len(b) for b in canonical_identity(c).blocks) == [1, 2, 3]


def test_meet_coloring_rejects_duplicates_and_prefixes():
    with pytest.raises(ValueError, match="distinct"):
        meet_coloring(["01", "01"])
    with pytest.raises(ValueError, match="prefix"):
        meet_coloring(["0", "01"])
    with pytest.raises(ValueError):
        BinaryWord("012")


def j3_oracle(max_len=4):
    """Identities realized by meet colorings of antichains of words of length <= max_len."""
    words = ["".join(b) for n in range(1, max_len + 1) for b in itertools.product("01", repeat=n)]
    found = set()
    for trio in itertools.combinations(words, 3):
        if any(a.startswith(b) or b.startswith(a) for a, b in itertools.combinations(trio, 2)):
            continue
        lcp = [os.path.commonprefix([trio[i], trio[j]]) for i, j in pairs_of(3)]
        meet = Coloring(3, tuple(hash(x) & 0xFFFF for x in lcp))
        for ident in enumerate_identities(3):
            if brute_realizes(meet, ident.representative()):
                found.add(ident)
    return found


def test_j3_excludes_monochromatic():
    expected = {canonical_identity(TWO_ONE), canonical_identity(DISTINCT)}
    assert j3_oracle() == expected
    for depth in (3, 4, 5):
        assert set(j_identities(3, depth)) == expected


def test_j2_single_identity():
    assert j_identities(2) == enumerate_identities(2)


def test_j4_stable_and_downward_closed():
    base = set(j_identities(4, 4))
    assert base == set(j_identities(4, 6))
    for ident in base:
        for other in enumerate_identities(4):
            # other refines ident (ident realizes other) => other is realized too
            if realizes(ident.representative(), other.representative()):
                assert other in base


def test_realizes_identity_examples():
    for r in (2, 3, 4):
        for ident in enumerate_identities(r):
            assert realizes_identity(Coloring.constant(r + 1), ident)
            assert realizes_identity(Coloring.constant(r), ident)
    mono = canonical_identity(MONO)
    assert not realizes_identity(DISTINCT, mono)


def test_realizes_identity_brute_force():
    rng = random.Random(5)
    for _ in range(150):
        c = random_coloring(rng, rng.randint(2, 6), 3)
        r = rng.randint(2, 4)
        ident = rng.choice(enumerate_identities(r))
        assert realizes_identity(c, ident) == brute_realizes(c, ident.representative())
