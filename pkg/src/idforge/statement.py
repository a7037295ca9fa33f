"""The finite statement ``[I, kappa, lambda, g, f]`` and its witnesses.

A witness assigns to every pair ``w`` of ``{0..kappa-1}`` and every level
``L = 1..lambda`` a generator tuple of length ``f(L)`` and ``g(L)`` terms
(given by truth-table index into the complete term set of arity ``f(L)``).
The cells ``term_m(gens)`` at ``(w, L)`` are the candidate events
"pair ``w`` gets color ``m`` at level ``L``".  Conditions:

* C1/C2 -- shapes and index ranges;
* C3 -- the cells at each ``(w, L)`` partition the space;
* C4 -- for ``N <= L`` the colors at levels ``N`` and ``L`` agree with
  measure at least ``1 - 1/2**N``;
* C5 -- for every ``r``-set ``P`` and level ``L`` the event "the level-L
  coloring of P realizes I" has measure strictly below ``1/L``.
"""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .algebra import AlgebraElement, ResourceLimitError, compose_table, eval_table
from .dyadic import DyadicMeasure
from .identities import Coloring, Identity, pairs_of, parse_identity, realizes

__all__ = [
    "MAX_WITNESS_ARITY",
    "SEARCH_LIMITS",
    "StatementParams",
    "Slot",
    "Witness",
    "CheckItem",
    "VerificationReport",
    "realizing_colorings",
    "witness_cells",
    "c4_measure",
    "c5_union_measure",
    "verify_witness",
    "search_witness",
    "check_search_limits",
    "load_witness",
    "dump_witness",
]

# Terms are referenced by truth table, so verification never materializes a
# complete term set; the cap only bounds the atom tables.
MAX_WITNESS_ARITY = 16

SEARCH_LIMITS = {"kappa": 3, "lambda": 3, "f": 2, "g": 2, "budget": 4}

Pair = tuple[int, int]


@dataclass(frozen=True)
class StatementParams:
    identity: Identity
    kappa: int
    lam: int
    g: tuple[int, ...]
    f: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "g", tuple(int(x) for x in self.g))
        object.__setattr__(self, "f", tuple(int(x) for x in self.f))
        if self.kappa < 0 or self.lam < 0:
            raise ValueError("kappa and lambda must be non-negative")
        if len(self.g) != self.lam or len(self.f) != self.lam:
            raise ValueError("g and f need one entry per level 1..lambda")
        if any(x < 1 for x in self.g):
            raise ValueError("g(L) must be at least 1")
        if any(not 0 <= x <= MAX_WITNESS_ARITY for x in self.f):
            raise ValueError(f"f(L) must lie in 0..{MAX_WITNESS_ARITY}")

    @classmethod
    def square(cls, identity: Identity, m: int, g: Sequence[int], f: Sequence[int]):
        """The instance ``[I, m, m, g, f]``."""
        return cls(identity, m, m, tuple(g), tuple(f))

    @property
    def r(self) -> int:
        return self.identity.r

    @property
    def levels(self) -> range:
        return range(1, self.lam + 1)

    def g_at(self, level: int) -> int:
        return self.g[level - 1]

    def f_at(self, level: int) -> int:
        return self.f[level - 1]

    @property
    def pairs(self) -> tuple[Pair, ...]:
        return pairs_of(self.kappa)

    def subsets(self) -> Iterable[tuple[int, ...]]:
        return itertools.combinations(range(self.kappa), self.r)

    def slots(self) -> list[tuple[Pair, int]]:
        """All ``(w, L)`` in level-major order."""
        return [(w, L) for L in self.levels for w in self.pairs]

    def truncated(self, lam: int) -> "StatementParams":
        return StatementParams(self.identity, self.kappa, lam, self.g[:lam], self.f[:lam])

    def to_json(self) -> dict:
        return {
            "identity": str(self.identity),
            "kappa": self.kappa,
            "lambda": self.lam,
            "g": list(self.g),
            "f": list(self.f),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "StatementParams":
        lam = int(data["lambda"])
        g, f = data["g"], data["f"]
        # scalars mean "constant over all levels"
        g = [g] * lam if isinstance(g, int) else g
        f = [f] * lam if isinstance(f, int) else f
        return cls(parse_identity(data["identity"]), int(data["kappa"]), lam, tuple(g), tuple(f))


@dataclass(frozen=True)
class Slot:
    gens: tuple[int, ...]
    terms: tuple[int, ...]


@dataclass(frozen=True)
class Witness:
    """Generators and term indices for every ``(w, L)``."""

    entries: Mapping[tuple[Pair, int], Slot] = field(default_factory=dict)

    def slot(self, w: Pair, level: int) -> Slot:
        return self.entries[(tuple(w), level)]

    def generators(self) -> list[int]:
        return sorted({g for s in self.entries.values() for g in s.gens})

    def renamed(self, mapping: Mapping[int, int]) -> "Witness":
        return Witness(
            {k: Slot(tuple(mapping[g] for g in s.gens), s.terms) for k, s in self.entries.items()}
        )

    def canonical(self) -> "Witness":
        """Rename generators by first appearance in level-major slot order."""
        order: dict[int, int] = {}
        for key in sorted(self.entries, key=lambda k: (k[1], k[0])):
            for g in self.entries[key].gens:
                order.setdefault(g, len(order))
        return self.renamed(order)

    def to_json(self) -> list[dict]:
        return [
            {"w": list(w), "L": L, "gens": list(s.gens), "terms": list(s.terms)}
            for (w, L), s in sorted(self.entries.items(), key=lambda kv: (kv[0][1], kv[0][0]))
        ]

    @classmethod
    def from_json(cls, entries: Iterable[Mapping]) -> "Witness":
        out = {}
        for e in entries:
            w = tuple(sorted(int(v) for v in e["w"]))
            out[(w, int(e["L"]))] = Slot(
                tuple(int(g) for g in e["gens"]), tuple(int(t) for t in e["terms"])
            )
        return cls(out)


def dump_witness(params: StatementParams, witness: Witness) -> str:
    data = params.to_json()
    data["entries"] = witness.to_json()
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def load_witness(text: str) -> tuple[StatementParams, Witness]:
    data = json.loads(text)
    return StatementParams.from_json(data), Witness.from_json(data.get("entries", []))


# -- realization of identities by small colorings ---------------------------


@lru_cache(maxsize=None)
def realizing_colorings(identity: Identity, colors: int) -> tuple[tuple[int, ...], ...]:
    """All maps from the pairs of ``{0..r-1}`` into ``1..colors`` that realize ``identity``."""
    r = identity.r
    target = identity.representative()
    verdict: dict[tuple[int, ...], bool] = {}
    out = []
    for c in itertools.product(range(1, colors + 1), repeat=len(pairs_of(r))):
        col = Coloring(r, c)
        pat = col.pattern()
        if pat not in verdict:
            verdict[pat] = realizes(col, target)
        if verdict[pat]:
            out.append(c)
    return tuple(out)


# -- exact measures via AlgebraElement --------------------------------------


def witness_cells(params: StatementParams, witness: Witness, w: Pair, level: int) -> list[AlgebraElement]:
    s = witness.slot(w, level)
    return [eval_table(t, params.f_at(level), s.gens) for t in s.terms]


def _frame(elements: Sequence[AlgebraElement]) -> tuple[list[int], int]:
    support = tuple(sorted(set().union(*(e.support for e in elements)))) if elements else ()
    return [e.extend(support).atoms for e in elements], len(support)


def c4_measure(params: StatementParams, witness: Witness, w: Pair, low: int, high: int) -> DyadicMeasure:
    """Measure of the event "color at level ``low`` equals color at level ``high``"."""
    lo = witness_cells(params, witness, w, low)
    hi = witness_cells(params, witness, w, high)
    atoms, n = _frame(lo + hi)
    lo_atoms, hi_atoms = atoms[: len(lo)], atoms[len(lo):]
    union = 0
    for m in range(len(lo)):
        if m < len(hi_atoms):
            union |= lo_atoms[m] & hi_atoms[m]
    return DyadicMeasure.from_count(union.bit_count(), n)


def c5_union_measure(
    params: StatementParams, witness: Witness, subset: Sequence[int], level: int
) -> DyadicMeasure:
    """Measure of the union over realizing colorings ``c`` of the meet of the ``c``-cells."""
    subset = tuple(sorted(subset))
    if len(subset) != params.r:
        raise ValueError(f"subset must have {params.r} elements")
    zs = [(subset[i], subset[j]) for i, j in pairs_of(params.r)]
    per_pair = [witness_cells(params, witness, z, level) for z in zs]
    flat = [e for cells in per_pair for e in cells]
    atoms, n = _frame(flat)
    full = (1 << (1 << n)) - 1
    offsets = list(itertools.accumulate([0] + [len(c) for c in per_pair]))
    union = 0
    for c in realizing_colorings(params.identity, params.g_at(level)):
        meet = full
        for k, color in enumerate(c):
            meet &= atoms[offsets[k] + color - 1]
            if not meet:
                break
        union |= meet
    return DyadicMeasure.from_count(union.bit_count(), n)


@dataclass(frozen=True)
class CheckItem:
    condition: str
    where: dict
    passed: bool
    measure: DyadicMeasure | None = None
    threshold: Fraction | None = None
    detail: str = ""

    def to_json(self) -> dict:
        out = {"condition": self.condition, "where": self.where, "passed": self.passed}
        if self.measure is not None:
            out["measure"] = str(self.measure)
        if self.threshold is not None:
            out["threshold"] = str(self.threshold)
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class VerificationReport:
    items: list[CheckItem]
    structural_ok: bool = True

    @property
    def passed(self) -> bool:
        return self.structural_ok and all(i.passed for i in self.items)

    @property
    def first_failure(self) -> CheckItem | None:
        return next((i for i in self.items if not i.passed), None)

    def condition_passed(self, name: str) -> bool:
        return all(i.passed for i in self.items if i.condition == name)

    def of(self, name: str) -> list[CheckItem]:
        return [i for i in self.items if i.condition == name]

    def summary(self) -> dict[str, str]:
        out = {}
        for name in ("C1", "C2", "C3", "C4", "C5"):
            items = self.of(name)
            if not items:
                out[name] = "vacuous" if self.structural_ok else "not checked"
            else:
                out[name] = "pass" if all(i.passed for i in items) else "FAIL"
        return out

    def to_json(self) -> dict:
        first = self.first_failure
        return {
            "passed": self.passed,
            "conditions": self.summary(),
            "firstFailure": first.to_json() if first else None,
            "items": [i.to_json() for i in self.items],
        }

    def to_table(self) -> str:
        lines = [f"overall: {'PASS' if self.passed else 'FAIL'}"]
        for name, verdict in self.summary().items():
            lines.append(f"  {name}: {verdict} ({len(self.of(name))} instances)")
        rows = [i for i in self.items if i.condition in ("C4", "C5")]
        if rows:
            lines.append("")
            lines.append(f"{'cond':<5}{'where':<28}{'measure':>14}  {'bound':>10}  ok")
            for i in rows:
                where = " ".join(f"{k}={v}" for k, v in i.where.items())
                op = ">=" if i.condition == "C4" else "<"
                lines.append(
                    f"{i.condition:<5}{where:<28}{str(i.measure):>14}  {op}{str(i.threshold):>8}  "
                    f"{'yes' if i.passed else 'NO'}"
                )
        first = self.first_failure
        if first is not None:
            lines.append("")
            lines.append(f"first failure: {first.condition} {first.where} {first.detail}".rstrip())
        return "\n".join(lines)


def _structural_items(params: StatementParams, witness: Witness) -> list[CheckItem]:
    items = []
    expected = set(params.slots())
    for key in sorted(set(witness.entries) - expected, key=lambda k: (k[1], k[0])):
        items.append(CheckItem("C1", {"w": list(key[0]), "L": key[1]}, False, detail="unexpected entry"))
    for w, L in params.slots():
        where = {"w": list(w), "L": L}
        s = witness.entries.get((w, L))
        if s is None:
            items.append(CheckItem("C1", where, False, detail="missing entry"))
            continue
        ok1 = len(s.gens) == params.f_at(L) and all(isinstance(g, int) and g >= 0 for g in s.gens)
        items.append(
            CheckItem("C1", where, ok1, detail="" if ok1 else f"need {params.f_at(L)} generators")
        )
        bound = 1 << (1 << params.f_at(L))
        ok2 = len(s.terms) == params.g_at(L) and all(0 <= t < bound for t in s.terms)
        items.append(
            CheckItem(
                "C2", where, ok2,
                detail="" if ok2 else f"need {params.g_at(L)} term indices below {bound}",
            )
        )
    return items


def verify_witness(params: StatementParams, witness: Witness) -> VerificationReport:
    """Check C1-C5 with exact arithmetic.

    Shape errors are reported as C1/C2 failures; the measure conditions are
    then skipped.
    """
    items = _structural_items(params, witness)
    if not all(i.passed for i in items):
        return VerificationReport(items, structural_ok=False)

    for w, L in params.slots():
        cells = witness_cells(params, witness, w, L)
        atoms, n = _frame(cells)
        full = (1 << (1 << n)) - 1
        seen, ok = 0, True
        for a in atoms:
            if seen & a:
                ok = False
            seen |= a
        ok = ok and seen == full
        items.append(
            CheckItem("C3", {"w": list(w), "L": L}, ok, detail="" if ok else "cells overlap or miss")
        )

    for w in params.pairs:
        for L in params.levels:
            for N in range(1, L + 1):
                mu = c4_measure(params, witness, w, N, L)
                bound = 1 - Fraction(1, 2**N)
                items.append(CheckItem("C4", {"w": list(w), "N": N, "L": L}, mu >= bound, mu, bound))

    for P in params.subsets():
        for L in params.levels:
            mu = c5_union_measure(params, witness, P, L)
            bound = Fraction(1, L)
            items.append(CheckItem("C5", {"P": list(P), "L": L}, mu < bound, mu, bound))
    return VerificationReport(items)


# -- exhaustive search --------------------------------------------------------


def check_search_limits(params: StatementParams, budget: int) -> None:
    lim = SEARCH_LIMITS
    problems = []
    if params.kappa > lim["kappa"]:
        problems.append(f"kappa={params.kappa} > {lim['kappa']}")
    if params.lam > lim["lambda"]:
        problems.append(f"lambda={params.lam} > {lim['lambda']}")
    if params.f and max(params.f) > lim["f"]:
        problems.append(f"max f={max(params.f)} > {lim['f']}")
    if params.g and max(params.g) > lim["g"]:
        problems.append(f"max g={max(params.g)} > {lim['g']}")
    if not 0 <= budget <= lim["budget"]:
        problems.append(f"budget={budget} outside 0..{lim['budget']}")
    if problems:
        raise ResourceLimitError("search refused: " + ", ".join(problems))


@lru_cache(maxsize=None)
def cell_bits(arity: int, table: int, positions: tuple[int, ...], frame: int) -> int:
    """Atoms over a frame of ``frame`` generators of ``table`` read at ``positions``."""
    return compose_table(table, arity, positions, frame)


def _local_pattern(gens: Sequence[int]) -> tuple[int, ...]:
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(g, len(seen)) for g in gens)


@lru_cache(maxsize=None)
def partition_tuples(arity: int, colors: int, pattern: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
    """Term-index tuples forming a partition sequence when variables are identified by ``pattern``."""
    k = max(pattern) + 1 if pattern else 0
    full = (1 << (1 << k)) - 1
    cells = [cell_bits(arity, t, pattern, k) for t in range(1 << (1 << arity))]
    out = []
    for combo in itertools.product(range(len(cells)), repeat=colors):
        seen = 0
        for t in combo:
            if seen & cells[t]:
                break
            seen |= cells[t]
        else:
            if seen == full:
                out.append(combo)
    return tuple(out)


def c4_holds(count: int, frame: int, low: int) -> bool:
    """``count / 2**frame >= 1 - 1/2**low``, in integers."""
    return count << low >= ((1 << low) - 1) << frame


def c5_holds(count: int, frame: int, level: int) -> bool:
    """``count / 2**frame < 1/level``, in integers."""
    return count * level < 1 << frame


class _Searcher:
    """Level-major backtracking over slots with symmetry-broken generator choice."""

    def __init__(self, params: StatementParams, budget: int):
        self.p = params
        self.budget = budget
        self.frame = budget
        self.full = (1 << (1 << budget)) - 1
        self.slots = params.slots()
        self.index = {s: k for k, s in enumerate(self.slots)}
        self.subsets = list(params.subsets())
        # C5 groups completed by each slot: subsets whose last pair is w
        self.c5_at: dict[Pair, list[list[Pair]]] = {}
        for P in self.subsets:
            zs = [(P[i], P[j]) for i, j in pairs_of(params.r)]
            self.c5_at.setdefault(max(zs), []).append(zs)
        self.cells: list[list[int] | None] = [None] * len(self.slots)
        self.choice: list[Slot | None] = [None] * len(self.slots)

    def gen_tuples(self, length: int, used: int):
        """Generator tuples extending a prefix that used generators ``0..used-1``."""
        def rec(prefix, top):
            if len(prefix) == length:
                yield tuple(prefix), top
                return
            for g in range(min(top + 1, self.budget)):
                yield from rec(prefix + [g], max(top, g + 1))
        yield from rec([], used)

    def candidates(self, k: int, used: int):
        w, L = self.slots[k]
        f, g = self.p.f_at(L), self.p.g_at(L)
        for gens, top in self.gen_tuples(f, used):
            for terms in partition_tuples(f, g, _local_pattern(gens)):
                yield Slot(gens, terms), top

    def consistent(self, k: int) -> bool:
        w, L = self.slots[k]
        mine = self.cells[k]
        for N in range(1, L):
            lo = self.cells[self.index[(w, N)]]
            union = 0
            for m in range(min(len(lo), len(mine))):
                union |= lo[m] & mine[m]
            if not c4_holds(union.bit_count(), self.frame, N):
                return False
        colorings = realizing_colorings(self.p.identity, self.p.g_at(L))
        for zs in self.c5_at.get(w, []):
            per_pair = [self.cells[self.index[(z, L)]] for z in zs]
            union = 0
            for c in colorings:
                meet = self.full
                for cells, color in zip(per_pair, c):
                    meet &= cells[color - 1]
                    if not meet:
                        break
                union |= meet
                if not c5_holds(union.bit_count(), self.frame, L):
                    return False
        return True

    def place(self, k: int, slot: Slot) -> None:
        f = self.p.f_at(self.slots[k][1])
        self.choice[k] = slot
        self.cells[k] = [cell_bits(f, t, slot.gens, self.frame) for t in slot.terms]

    def run(self, start: int = 0, used: int = 0) -> Witness | None:
        if start == len(self.slots):
            return Witness({s: c for s, c in zip(self.slots, self.choice)})
        for slot, top in self.candidates(start, used):
            self.place(start, slot)
            if self.consistent(start):
                found = self.run(start + 1, top)
                if found is not None:
                    return found
        self.choice[start] = self.cells[start] = None
        return None


def _search_subtree(args) -> Witness | None:
    params, budget, first, top = args
    s = _Searcher(params, budget)
    s.place(0, first)
    if not s.consistent(0):
        return None
    return s.run(1, top)


def search_witness(params: StatementParams, budget: int, workers: int = 1) -> Witness | None:
    """Lexicographically first witness using at most ``budget`` generators, or None.

    Generators are introduced in order of first use, so every witness is
    found up to renaming.  With ``workers > 1`` the first slot's choices are
    explored in separate processes; the result is the same.
    """
    check_search_limits(params, budget)
    searcher = _Searcher(params, budget)
    if not searcher.slots:
        return Witness({})
    if workers <= 1:
        return searcher.run()
    jobs = [(params, budget, slot, top) for slot, top in searcher.candidates(0, 0)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for found in pool.map(_search_subtree, jobs):
            if found is not None:
                return found
    return None
