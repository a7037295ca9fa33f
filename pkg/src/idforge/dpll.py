"""A small DPLL solver (two watched literals, chronological backtracking).

Meant for the guard-box instances produced by the encoder; not a
production solver.
"""

from __future__ import annotations

from collections import Counter
from typing import Sequence

__all__ = ["solve", "satisfies"]


def satisfies(model: Sequence[int], clauses: Sequence[Sequence[int]]) -> bool:
    true = set(model)
    return all(any(lit in true for lit in clause) for clause in clauses)


def solve(clauses: Sequence[Sequence[int]], num_vars: int) -> list[int] | None:
    """A satisfying assignment as signed literals ``1..num_vars``, or None."""
    value = [0] * (num_vars + 1)
    watches: dict[int, list[list[int]]] = {}
    units: list[int] = []
    for raw in clauses:
        lits = list(dict.fromkeys(raw))
        if any(-lit in lits for lit in lits):
            continue
        if not lits:
            return None
        if len(lits) == 1:
            units.append(lits[0])
            continue
        watches.setdefault(lits[0], []).append(lits)
        watches.setdefault(lits[1], []).append(lits)

    trail: list[int] = []
    levels: list[tuple[int, int, bool]] = []  # (trail index, decision literal, flipped)

    def lit_value(lit: int) -> int:
        v = value[abs(lit)]
        return v if lit > 0 else -v

    def assign(lit: int) -> bool:
        cur = lit_value(lit)
        if cur == 1:
            return True
        if cur == -1:
            return False
        value[abs(lit)] = 1 if lit > 0 else -1
        trail.append(lit)
        return True

    def propagate(head: int) -> bool:
        while head < len(trail):
            false_lit = -trail[head]
            head += 1
            watching = watches.get(false_lit, [])
            keep = []
            conflict = False
            for k, clause in enumerate(watching):
                if conflict:
                    keep.append(clause)
                    continue
                if clause[0] == false_lit:
                    clause[0], clause[1] = clause[1], clause[0]
                if lit_value(clause[0]) == 1:
                    keep.append(clause)
                    continue
                for j in range(2, len(clause)):
                    if lit_value(clause[j]) != -1:
                        clause[1], clause[j] = clause[j], clause[1]
                        watches.setdefault(clause[1], []).append(clause)
                        break
                else:
                    keep.append(clause)
                    if not assign(clause[0]):
                        conflict = True
            watches[false_lit] = keep
            if conflict:
                return False
        return True

    for lit in units:
        if not assign(lit):
            return None
    if not propagate(0):
        return None

    counts = Counter(abs(lit) for c in clauses for lit in c)
    order = sorted(range(1, num_vars + 1), key=lambda v: (-counts[v], v))
    cursor = 0

    while True:
        while cursor < len(order) and value[order[cursor]] != 0:
            cursor += 1
        if cursor == len(order):
            return [v if value[v] > 0 else -v for v in range(1, num_vars + 1)]
        var = order[cursor]
        levels.append((len(trail), var, False))
        assign(var)
        ok = propagate(len(trail) - 1)
        while not ok:
            # undo to the most recent unflipped decision and try its negation
            while levels and levels[-1][2]:
                start, _, _ = levels.pop()
                for lit in trail[start:]:
                    value[abs(lit)] = 0
                del trail[start:]
            if not levels:
                return None
            start, dvar, _ = levels.pop()
            for lit in trail[start:]:
                value[abs(lit)] = 0
            del trail[start:]
            levels.append((start, dvar, True))
            assign(-dvar)
            ok = propagate(len(trail) - 1)
        cursor = 0
