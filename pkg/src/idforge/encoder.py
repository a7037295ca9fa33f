"""Propositional encoding of ``[I, kappa, lambda, g, f]`` at a generator budget.

Variables:

* ``p(a, b)`` for each pair of pool variables: "variables a and b denote the
  same generator".  The pool holds one variable tuple of length ``f(L)``
  per slot ``(w, L)`` (``pool="slot"``), or one per slot and term tuple
  (``pool="term-tuple"``).
* ``q(w, L, m, i)``: "the m-th term at ``(w, L)`` is the term with truth table i".

Base axioms make ``p`` an equivalence relation with at most ``budget``
classes and make each ``q(w, L, m, .)`` pick exactly one term.  Every C3, C4
and C5 instance is then compiled by brute force: for each partition of the
instance's variables and each choice of terms the exact measure condition
is evaluated, and each failing combination becomes one blocking clause.
Measures only depend on the partition (any renaming of generators
preserves measure), so the clauses mention nothing but ``p`` and ``q``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .algebra import ResourceLimitError
from .dpll import satisfies, solve
from .identities import pairs_of
from .statement import (
    Pair,
    Slot,
    StatementParams,
    Witness,
    c4_holds,
    c5_holds,
    cell_bits,
    check_search_limits,
    partition_tuples,
    realizing_colorings,
)

__all__ = [
    "ModelError",
    "PoolVar",
    "CnfInstance",
    "encode",
    "decode",
    "valuation_from_witness",
    "export_dimacs",
    "format_dimacs",
    "parse_dimacs",
    "load_cnf",
    "parse_model",
    "solve_instance",
    "POOLS",
]

POOLS = ("slot", "term-tuple")


class ModelError(ValueError):
    """A valuation violates the instance it is decoded against."""


@dataclass(frozen=True)
class PoolVar:
    """Variable ``pos`` (0-based) of slot ``(w, L)``; ``terms`` is set in term-tuple pools."""

    w: Pair
    level: int
    pos: int
    terms: tuple[int, ...] | None = None


@dataclass
class CnfInstance:
    params: StatementParams
    budget: int
    pool_kind: str
    pool: list[PoolVar]
    p_vars: dict[tuple[int, int], int]
    q_vars: dict[tuple[Pair, int, int, int], int]
    clauses: list[list[int]] = field(default_factory=list)

    @property
    def num_vars(self) -> int:
        return len(self.p_vars) + len(self.q_vars)

    def p(self, a: int, b: int) -> int:
        return self.p_vars[(min(a, b), max(a, b))]

    def slot_vars(self, w: Pair, level: int, terms: tuple[int, ...] | None = None) -> list[int]:
        key = terms if self.pool_kind == "term-tuple" else None
        return self._slot_index.get((w, level, key), [])

    def __post_init__(self):
        self._slot_index: dict = {}
        for k, v in enumerate(self.pool):
            self._slot_index.setdefault((v.w, v.level, v.terms), []).append(k)

    def legend(self) -> list[str]:
        lines = []
        for k, v in enumerate(self.pool):
            extra = "" if v.terms is None else f" t={','.join(map(str, v.terms))}"
            lines.append(f"x id={k} w={v.w[0]},{v.w[1]} L={v.level} pos={v.pos}{extra}")
        for (a, b), n in self.p_vars.items():
            lines.append(f"p w={a},{b} var={n}")
        for (w, L, m, i), n in self.q_vars.items():
            lines.append(f"q w={w[0]},{w[1]} L={L} m={m} i={i} var={n}")
        return lines


def _term_tuples(params: StatementParams, level: int) -> list[tuple[int, ...]]:
    size = 1 << (1 << params.f_at(level))
    return list(itertools.product(range(size), repeat=params.g_at(level)))


def _build_pool(params: StatementParams, kind: str) -> list[PoolVar]:
    pool = []
    for w, L in params.slots():
        tuples = [None] if kind == "slot" else _term_tuples(params, L)
        for t in tuples:
            for i in range(params.f_at(L)):
                pool.append(PoolVar(w, L, i, t))
    return pool


def _partitions(n: int, max_blocks: int) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings of length ``n`` with at most ``max_blocks`` blocks."""
    if n == 0:
        yield ()
        return
    if max_blocks == 0:
        return
    seq = [0] * n

    def rec(pos: int, top: int):
        if pos == n:
            yield tuple(seq)
            return
        for v in range(min(top + 2, max_blocks)):
            seq[pos] = v
            yield from rec(pos + 1, max(top, v))

    yield from rec(1, 0)


def _pattern_negation(cnf: CnfInstance, ids: Sequence[int], blocks: Sequence[int]) -> list[int]:
    """Literals of a clause that is false exactly on partitions equal to ``blocks`` on ``ids``."""
    out = []
    for (a, ba), (b, bb) in itertools.combinations(zip(ids, blocks), 2):
        var = cnf.p(a, b)
        out.append(-var if ba == bb else var)
    return out


class _Group:
    """One C3/C4/C5 instance: its slots and the measure test on frame bitsets."""

    def __init__(self, kind: str, slots: list[tuple[Pair, int]], test):
        self.kind = kind
        self.slots = slots
        self.test = test


def _groups(params: StatementParams) -> list[_Group]:
    groups = []
    for w, L in params.slots():
        def c3(cells, frame):
            full = (1 << (1 << frame)) - 1
            seen = 0
            for c in cells[0]:
                if seen & c:
                    return False
                seen |= c
            return seen == full
        groups.append(_Group("C3", [(w, L)], c3))
    for w in params.pairs:
        for L in params.levels:
            for N in range(1, L):
                def c4(cells, frame, N=N):
                    lo, hi = cells
                    union = 0
                    for m in range(min(len(lo), len(hi))):
                        union |= lo[m] & hi[m]
                    return c4_holds(union.bit_count(), frame, N)
                groups.append(_Group("C4", [(w, N), (w, L)], c4))
    for P in params.subsets():
        zs = [(P[i], P[j]) for i, j in pairs_of(params.r)]
        for L in params.levels:
            colorings = realizing_colorings(params.identity, params.g_at(L))

            def c5(cells, frame, L=L, colorings=colorings):
                full = (1 << (1 << frame)) - 1
                union = 0
                for c in colorings:
                    meet = full
                    for per_pair, color in zip(cells, c):
                        meet &= per_pair[color - 1]
                    union |= meet
                return c5_holds(union.bit_count(), frame, L)
            groups.append(_Group("C5", [(z, L) for z in zs], c5))
    return groups


def _q_literals(cnf: CnfInstance, slot: tuple[Pair, int], terms: Sequence[int]) -> list[int]:
    w, L = slot
    return [-cnf.q_vars[(w, L, m, t)] for m, t in enumerate(terms, 1)]


def _encode_group(cnf: CnfInstance, group: _Group) -> None:
    params = cnf.params
    shapes = [(params.f_at(L), params.g_at(L)) for _, L in group.slots]

    def candidates(k: int, local: tuple[int, ...]):
        f, g = shapes[k]
        if group.kind == "C3":
            return itertools.product(range(1 << (1 << f)), repeat=g)
        # combinations failing C3 are already blocked by the C3 clauses
        return partition_tuples(f, g, local)

    if cnf.pool_kind == "slot":
        ids = [i for w, L in group.slots for i in cnf.slot_vars(w, L)]
        offsets = list(itertools.accumulate([0] + [f for f, _ in shapes]))
        for blocks in _partitions(len(ids), cnf.budget):
            frame = max(blocks) + 1 if blocks else 0
            per_slot = []
            for k in range(len(group.slots)):
                local = blocks[offsets[k]:offsets[k + 1]]
                per_slot.append([(t, local) for t in candidates(k, _relabel(local))])
            failing = []
            total = 0
            for combo in itertools.product(*per_slot):
                total += 1
                cells = [
                    [cell_bits(shapes[k][0], t, local, frame) for t in terms]
                    for k, (terms, local) in enumerate(combo)
                ]
                if not group.test(cells, frame):
                    failing.append(combo)
            neg = _pattern_negation(cnf, ids, blocks)
            if failing and len(failing) == total:
                cnf.clauses.append(neg)
                continue
            for combo in failing:
                lits = []
                for slot, (terms, _) in zip(group.slots, combo):
                    lits.extend(_q_literals(cnf, slot, terms))
                cnf.clauses.append(lits + neg)
        return

    # term-tuple pool: the variables read depend on the chosen terms
    options = [_term_tuples(params, L) for _, L in group.slots]
    for choice in itertools.product(*options):
        id_lists = [cnf.slot_vars(w, L, t) for (w, L), t in zip(group.slots, choice)]
        ids = [i for lst in id_lists for i in lst]
        offsets = list(itertools.accumulate([0] + [len(lst) for lst in id_lists]))
        q_lits = []
        for slot, t in zip(group.slots, choice):
            q_lits.extend(_q_literals(cnf, slot, t))
        for blocks in _partitions(len(ids), cnf.budget):
            frame = max(blocks) + 1 if blocks else 0
            cells = []
            skip = False
            for k, t in enumerate(choice):
                local = blocks[offsets[k]:offsets[k + 1]]
                if group.kind != "C3" and t not in partition_tuples(*shapes[k], _relabel(local)):
                    skip = True
                    break
                cells.append([cell_bits(shapes[k][0], x, local, frame) for x in t])
            if skip or group.test(cells, frame):
                continue
            cnf.clauses.append(q_lits + _pattern_negation(cnf, ids, blocks))


def _relabel(seq: Sequence[int]) -> tuple[int, ...]:
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(x, len(seen)) for x in seq)


def encode(params: StatementParams, budget: int, pool: str = "slot") -> CnfInstance:
    """CNF that is satisfiable iff a witness with at most ``budget`` generators exists."""
    check_search_limits(params, budget)
    if pool not in POOLS:
        raise ValueError(f"pool must be one of {POOLS}")
    xs = _build_pool(params, pool)
    if pool == "term-tuple" and len(xs) > 64:
        raise ResourceLimitError(f"term-tuple pool has {len(xs)} variables; limit is 64")
    counter = itertools.count(1)
    p_vars = {pair: next(counter) for pair in itertools.combinations(range(len(xs)), 2)}
    q_vars = {}
    for w, L in params.slots():
        for m in range(1, params.g_at(L) + 1):
            for i in range(1 << (1 << params.f_at(L))):
                q_vars[(w, L, m, i)] = next(counter)
    cnf = CnfInstance(params, budget, pool, xs, p_vars, q_vars)

    for a, b, c in itertools.combinations(range(len(xs)), 3):
        ab, ac, bc = cnf.p(a, b), cnf.p(a, c), cnf.p(b, c)
        cnf.clauses += [[-ab, -bc, ac], [-ab, -ac, bc], [-ac, -bc, ab]]
    if len(xs) > budget:
        for subset in itertools.combinations(range(len(xs)), budget + 1):
            cnf.clauses.append([cnf.p(a, b) for a, b in itertools.combinations(subset, 2)])
    for w, L in params.slots():
        for m in range(1, params.g_at(L) + 1):
            group = [q_vars[(w, L, m, i)] for i in range(1 << (1 << params.f_at(L)))]
            cnf.clauses.append(list(group))
            cnf.clauses += [[-a, -b] for a, b in itertools.combinations(group, 2)]

    for group in _groups(params):
        _encode_group(cnf, group)
    return cnf


def _blocks_from_model(cnf: CnfInstance, true: set[int]) -> list[int]:
    n = len(cnf.pool)
    block = [-1] * n
    count = 0
    for a in range(n):
        if block[a] != -1:
            continue
        block[a] = count
        for b in range(a + 1, n):
            if cnf.p(a, b) in true:
                if block[b] not in (-1, count):
                    raise ModelError("p-relation is not an equivalence relation")
                block[b] = count
        count += 1
    for a, b in itertools.combinations(range(n), 2):
        if (cnf.p(a, b) in true) != (block[a] == block[b]):
            raise ModelError("p-relation is not an equivalence relation")
    return block


def decode(model: Iterable[int], cnf: CnfInstance) -> Witness:
    """The witness described by a satisfying valuation.

    Each block of the p-partition becomes a fresh generator, numbered in
    order of first appearance in the pool.
    """
    model = [int(x) for x in model]
    for lit in model:
        if not 1 <= abs(lit) <= cnf.num_vars:
            raise ModelError(f"literal {lit} names no variable of the instance")
    true = {lit for lit in model if lit > 0}
    if not satisfies(model, cnf.clauses):
        bad = next(c for c in cnf.clauses if not any(lit in set(model) for lit in c))
        raise ModelError(f"model violates clause {bad}")
    block = _blocks_from_model(cnf, true)
    params = cnf.params
    entries = {}
    for w, L in params.slots():
        terms = []
        for m in range(1, params.g_at(L) + 1):
            chosen = [i for i in range(1 << (1 << params.f_at(L))) if cnf.q_vars[(w, L, m, i)] in true]
            if len(chosen) != 1:
                raise ModelError(f"q(w={w}, L={L}, m={m}) selects {len(chosen)} terms")
            terms.append(chosen[0])
        ids = cnf.slot_vars(w, L, tuple(terms))
        entries[(w, L)] = Slot(tuple(block[i] for i in ids), tuple(terms))
    return Witness(entries)


def valuation_from_witness(cnf: CnfInstance, witness: Witness) -> list[int]:
    """The valuation induced by a witness (unused pool variables join its first generator)."""
    params = cnf.params
    gen_of: dict[int, int] = {}
    for w, L in params.slots():
        s = witness.slot(w, L)
        for i, g in zip(cnf.slot_vars(w, L, s.terms), s.gens):
            gen_of[i] = g
    used = witness.generators()
    for i in range(len(cnf.pool)):
        gen_of.setdefault(i, used[0] if used else 0)
    model = []
    for (a, b), var in cnf.p_vars.items():
        model.append(var if gen_of[a] == gen_of[b] else -var)
    for (w, L, m, i), var in cnf.q_vars.items():
        model.append(var if witness.slot(w, L).terms[m - 1] == i else -var)
    return sorted(model, key=abs)


def solve_instance(cnf: CnfInstance) -> list[int] | None:
    return solve(cnf.clauses, cnf.num_vars)


def format_dimacs(num_vars: int, clauses: Sequence[Sequence[int]], comments: Sequence[str] = ()) -> str:
    lines = ["c " + line for line in comments]
    lines.append(f"p cnf {num_vars} {len(clauses)}")
    lines += [" ".join(map(str, list(clause) + [0])) for clause in clauses]
    return "\n".join(lines) + "\n"


def export_dimacs(cnf: CnfInstance) -> str:
    """DIMACS text whose comments carry the parameters and the variable legend."""
    header = {"params": cnf.params.to_json(), "budget": cnf.budget, "pool": cnf.pool_kind}
    comments = ["idforge " + json.dumps(header, sort_keys=True)] + cnf.legend()
    return format_dimacs(cnf.num_vars, cnf.clauses, comments)


def parse_dimacs(text: str) -> tuple[int, list[list[int]], list[str]]:
    """``(num_vars, clauses, comment lines)`` from DIMACS CNF text."""
    comments, clauses, current = [], [], []
    num_vars = declared = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            comments.append(line[1:].strip())
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad problem line {line!r}")
            num_vars, declared = int(parts[2]), int(parts[3])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                current.append(lit)
    if current:
        clauses.append(current)
    if num_vars is None:
        raise ValueError("missing 'p cnf' line")
    if declared != len(clauses):
        raise ValueError(f"header declares {declared} clauses, found {len(clauses)}")
    return num_vars, clauses, comments


def load_cnf(text: str) -> CnfInstance:
    """Rebuild an instance (variable map included) from exported DIMACS."""
    num_vars, clauses, comments = parse_dimacs(text)
    header = next((c for c in comments if c.startswith("idforge ")), None)
    if header is None:
        raise ValueError("not an idforge DIMACS file (no legend header)")
    meta = json.loads(header[len("idforge "):])
    params = StatementParams.from_json(meta["params"])
    pool, p_vars, q_vars = [], {}, {}
    for c in comments:
        kind, _, rest = c.partition(" ")
        if kind not in ("x", "p", "q"):
            continue
        fields = dict(item.split("=", 1) for item in rest.split())
        w = tuple(int(v) for v in fields["w"].split(","))
        if kind == "x":
            terms = tuple(int(v) for v in fields["t"].split(",")) if "t" in fields else None
            if int(fields["id"]) != len(pool):
                raise ValueError("pool legend out of order")
            pool.append(PoolVar(w, int(fields["L"]), int(fields["pos"]), terms))
        elif kind == "p":
            p_vars[w] = int(fields["var"])
        else:
            q_vars[(w, int(fields["L"]), int(fields["m"]), int(fields["i"]))] = int(fields["var"])
    cnf = CnfInstance(params, int(meta["budget"]), meta["pool"], pool, p_vars, q_vars, clauses)
    if cnf.num_vars != num_vars:
        raise ValueError("legend does not cover every variable")
    return cnf


def parse_model(text: str) -> list[int]:
    """Literals from a solver's output: bare literal lines or SAT-competition ``v`` lines."""
    lits = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line[0] in "cs":
            if line.startswith("s") and "UNSAT" in line.upper():
                raise ModelError("solver reported UNSATISFIABLE")
            continue
        if line.startswith("v"):
            line = line[1:]
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                return lits
            lits.append(lit)
    return lits
