"""Synthetic witnesses that approximate a fixed reference partition level by level.

Each pair ``w`` owns 16 generators.  Its reference partition is
``p1 = (B ^ E) - T``, ``p2 = ~(B ^ E) - T`` and the tail ``p3 = T``, where
``B`` is a non-trivial function of the first two generators and ``E`` and
``T`` are long conjunctions of literals among the other fourteen.  Level
``L`` reads the first ``k_L`` generators and takes the best approximation of
``p1`` as color 1 and its complement as color 2, so the cells form a
partition sequence whose errors shrink as ``L`` grows.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

from idforge.algebra import AlgebraElement, best_approximation, eval_table
from idforge.identities import enumerate_identities
from idforge.statement import Slot, StatementParams, Witness

GENS_PER_PAIR = 16
ARITIES = (8, 12, 16)


@dataclass
class Synthetic:
    params: StatementParams
    witness: Witness
    reference: dict  # w -> (p1, p2, p3)


def _literal_conjunction(rng: random.Random, gens, size):
    chosen = rng.sample(gens, size)
    lits = [AlgebraElement.generator(g) if rng.random() < 0.5 else ~AlgebraElement.generator(g)
            for g in chosen]
    return reduce(lambda a, b: a & b, lits)


def build(seed: int, kappa: int = 2) -> Synthetic:
    rng = random.Random(seed)
    identity = enumerate_identities(2)[0]
    lam = len(ARITIES)
    params = StatementParams(identity, kappa, lam, (2,) * lam, ARITIES)
    entries, reference = {}, {}
    for k, w in enumerate(params.pairs):
        ys = list(range(k * GENS_PER_PAIR, (k + 1) * GENS_PER_PAIR))
        support = tuple(ys)
        base = eval_table(rng.randint(1, 14), 2, ys[:2]).extend(support)
        flip = _literal_conjunction(rng, ys[2:], rng.randint(12, 14)).extend(support)
        tail = _literal_conjunction(rng, ys[2:], rng.randint(13, 14)).extend(support)
        p1 = (base ^ flip) - tail
        p2 = ~(base ^ flip) - tail
        reference[w] = (p1, p2, tail)
        rest = ys[2:]
        rng.shuffle(rest)
        for L, arity in zip(params.levels, ARITIES):
            gens = tuple(ys[:2] + rest[: arity - 2])
            table, _ = best_approximation(p1, gens)
            complement = ((1 << (1 << arity)) - 1) & ~table
            entries[(w, L)] = Slot(gens, (table, complement))
    return Synthetic(params, Witness(entries), reference)


def bound_violations(syn: Synthetic) -> list[str]:
    """Which of the reference bounds fail (empty when the instance qualifies)."""
    params, r = syn.params, syn.params.r
    out = []
    for w, (p1, p2, tail) in syn.reference.items():
        if not ((p1 & p2).is_empty() and (p1 & tail).is_empty() and (p1 | p2 | tail).is_full()):
            out.append(f"{w}: reference is not a partition")
        for L in params.levels:
            g, f = params.g_at(L), params.f_at(L)
            s = syn.witness.slot(w, L)
            cells = [eval_table(t, f, s.gens) for t in s.terms]
            if len(s.gens) != f or len(set(s.gens)) != f:
                out.append(f"{w} L={L}: generator tuple")
            joined = reduce(lambda a, b: a | b, cells)
            if not ((cells[0] & cells[1]).is_empty() and joined.is_full()):
                out.append(f"{w} L={L}: cells are not a partition sequence")
            if not (p1 ^ cells[0]).measure() < Fraction(1, 2 ** (L + 3) * L * g ** (r * r)):
                out.append(f"{w} L={L}: first cell error")
            if not (p2 ^ cells[1]).measure() < Fraction(1, L * 2 ** (L + 3)):
                out.append(f"{w} L={L}: last cell error")
            if not tail.measure() < Fraction(1, 2 ** (L + 5) * L):
                out.append(f"{w} L={L}: tail")
    return out
