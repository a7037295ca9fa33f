import itertools
import random

import pytest

from idforge.identities import Coloring, enumerate_identities, pairs_of
from idforge.statement import Slot, StatementParams, Witness

# truth tables of arity-1 terms: 0, ~x1, x1, 1
ZERO, NOT_X, X, ONE = 0, 1, 2, 3


def random_coloring(rng: random.Random, n: int | None = None, max_colors: int = 4) -> Coloring:
    n = rng.randint(1, 6) if n is None else n
    k = rng.randint(1, max_colors)
    return Coloring(n, tuple(rng.randrange(k) for _ in pairs_of(n)))


def brute_realizes(f: Coloring, g: Coloring) -> bool:
    """Try every injection; check the defining implication on every pair of g-pairs."""
    gp = pairs_of(g.n)
    for k in itertools.permutations(range(f.n), g.n):
        ok = True
        for (x, y), (u, v) in itertools.product(gp, repeat=2):
            if f.color(k[x], k[y]) != f.color(k[u], k[v]) and g.color(x, y) == g.color(u, v):
                ok = False
                break
        if ok:
            return True
    return False


@pytest.fixture(scope="session")
def triangle_ids():
    """(monochromatic, 2+1, all-distinct) identities of size 3."""
    return enumerate_identities(3)


def uniform_witness(params: StatementParams, assign) -> Witness:
    """Witness whose slot at (w, L) is ``assign(w, L)`` -> (gens, terms)."""
    return Witness({(w, L): Slot(*map(tuple, assign(w, L))) for w, L in params.slots()})


def independent_mono_witness(identity, lam: int = 2):
    """kappa=3, g=2, f=1: pair k reads its own generator k at every level.

    The three pair colors are independent fair coins, so the level coloring
    is constant with probability exactly 1/4.
    """
    params = StatementParams(identity, 3, lam, (2,) * lam, (1,) * lam)
    index = {w: k for k, w in enumerate(params.pairs)}
    return params, uniform_witness(params, lambda w, L: ([index[w]], [X, NOT_X]))
