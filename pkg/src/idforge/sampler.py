"""Monte-Carlo stand-in for a generic filter: one uniformly random point.

A point assigns a fair, independent bit to every generator a witness
touches (bit 1 means the point lies in the generator).  At each level the
point falls in exactly one cell per pair when C3 holds, which gives the
level colorings; their eventual value along the levels is the limit
coloring.

Trial ``t`` under seed ``s`` draws from a Philox stream keyed by
``SeedSequence([s, t])``, so results never depend on how trials are batched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .identities import Coloring, pairs_of
from .statement import Pair, StatementParams, Witness, c5_union_measure, realizing_colorings

__all__ = [
    "CellConflictError",
    "SamplePoint",
    "PairTrajectory",
    "TrajectoryReport",
    "sample_point",
    "sample_bits",
    "coloring_at",
    "limit_coloring",
    "stable_after",
    "stabilization_frequency",
    "estimate_cell_frequency",
    "estimate_realization_probability",
    "binomial_band",
    "sampler_report",
]


class CellConflictError(ValueError):
    """The point lies in no cell, or in several, of some ``(w, L)``."""


def _stream(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial])))


@dataclass(frozen=True)
class SamplePoint:
    assignment: Mapping[int, int]
    seed: int
    trial: int = 0

    def bit(self, g: int) -> int:
        return self.assignment[g]


def sample_point(seed: int, gens: Sequence[int], trial: int = 0) -> SamplePoint:
    """Fair independent bits for ``gens`` (drawn in sorted generator order)."""
    order = sorted(set(gens))
    bits = _stream(seed, trial).integers(0, 2, size=len(order))
    return SamplePoint({g: int(b) for g, b in zip(order, bits)}, seed, trial)


def sample_bits(seed: int, gens: Sequence[int], trials: int) -> np.ndarray:
    """``trials x len(sorted gens)`` bit matrix; row ``t`` equals ``sample_point(seed, gens, t)``."""
    order = sorted(set(gens))
    out = np.empty((trials, len(order)), dtype=np.uint8)
    for t in range(trials):
        out[t] = _stream(seed, t).integers(0, 2, size=len(order))
    return out


def _cell_values(table: int, gens: Sequence[int], bits: np.ndarray, column: Mapping[int, int]) -> np.ndarray:
    """Truth value of ``table(gens)`` at each sampled row."""
    idx = np.zeros(bits.shape[0], dtype=np.int64)
    for i, g in enumerate(gens):
        idx |= bits[:, column[g]].astype(np.int64) << i
    width = 1 << len(gens)
    lookup = np.array([(table >> b) & 1 for b in range(width)], dtype=bool)
    return lookup[idx]


def _colors(params: StatementParams, witness: Witness, w: Pair, level: int,
            bits: np.ndarray, column: Mapping[int, int]) -> np.ndarray:
    slot = witness.slot(w, level)
    hits = np.stack([_cell_values(t, slot.gens, bits, column) for t in slot.terms])
    counts = hits.sum(axis=0)
    if not np.all(counts == 1):
        bad = int(np.argmax(counts != 1))
        raise CellConflictError(
            f"point {bad} lies in {int(counts[bad])} cells at w={w}, L={level}"
        )
    return hits.argmax(axis=0) + 1


def coloring_at(point: SamplePoint, params: StatementParams, witness: Witness, level: int) -> Coloring:
    """The level coloring: pair ``w`` gets the unique ``m`` whose cell holds the point."""
    gens = witness.generators()
    column = {g: k for k, g in enumerate(gens)}
    bits = np.array([[point.assignment[g] for g in gens]], dtype=np.uint8)
    colors = [int(_colors(params, witness, w, level, bits, column)[0]) for w in params.pairs]
    return Coloring(params.kappa, tuple(colors))


@dataclass(frozen=True)
class PairTrajectory:
    w: Pair
    colors: tuple[int, ...]
    stabilized_at: int | None

    def to_json(self) -> dict:
        return {"w": list(self.w), "colors": list(self.colors), "stabilizedAt": self.stabilized_at}


@dataclass(frozen=True)
class TrajectoryReport:
    pairs: tuple[PairTrajectory, ...]
    frequencies: Mapping[tuple[tuple[int, ...], int], float]

    def limit(self) -> dict[Pair, int | None]:
        return {p.w: (p.colors[-1] if p.stabilized_at is not None else None) for p in self.pairs}


def _stabilization(colors: Sequence[int]) -> int | None:
    """Least level from which the colors are constant, if the last two levels agree.

    With one level the sequence is trivially stable at 1.  A change at the
    final level leaves stabilization unwitnessed, reported as None.
    """
    lam = len(colors)
    if lam == 0:
        return None
    if lam >= 2 and colors[-1] != colors[-2]:
        return None
    n = lam
    while n > 1 and colors[n - 2] == colors[-1]:
        n -= 1
    return n


def stable_after(colors: Sequence[int], n: int) -> bool:
    """Colors at all levels ``L > n`` coincide."""
    return len(set(colors[n:])) <= 1


def limit_coloring(point: SamplePoint, params: StatementParams, witness: Witness,
                   frequencies: Mapping | None = None) -> TrajectoryReport:
    gens = witness.generators()
    column = {g: k for k, g in enumerate(gens)}
    bits = np.array([[point.assignment[g] for g in gens]], dtype=np.uint8)
    out = []
    for w in params.pairs:
        colors = tuple(int(_colors(params, witness, w, L, bits, column)[0]) for L in params.levels)
        out.append(PairTrajectory(w, colors, _stabilization(colors)))
    return TrajectoryReport(tuple(out), dict(frequencies or {}))


def stabilization_frequency(params: StatementParams, witness: Witness, n: int,
                            trials: int, seed: int) -> dict[Pair, float]:
    """Per pair, the fraction of sampled points whose colors agree at all levels ``L > n``."""
    gens = witness.generators()
    column = {g: k for k, g in enumerate(gens)}
    bits = sample_bits(seed, gens, trials)
    out = {}
    for w in params.pairs:
        traj = np.stack([_colors(params, witness, w, L, bits, column) for L in params.levels], axis=1)
        tail = traj[:, n:]
        out[w] = float(np.mean(np.all(tail == tail[:, :1], axis=1))) if tail.shape[1] else 1.0
    return out


def estimate_cell_frequency(params: StatementParams, witness: Witness, w: Pair, level: int,
                            trials: int, seed: int) -> list[float]:
    """Empirical frequency of each color ``1..g(L)`` at ``(w, L)``."""
    gens = witness.generators()
    column = {g: k for k, g in enumerate(gens)}
    colors = _colors(params, witness, w, level, sample_bits(seed, gens, trials), column)
    return [float(np.mean(colors == m)) for m in range(1, params.g_at(level) + 1)]


def estimate_realization_probability(params: StatementParams, witness: Witness,
                                     subset: Sequence[int], level: int,
                                     trials: int, seed: int) -> tuple[float, float]:
    """Fraction of sampled points whose level coloring realizes I on ``subset``.

    Returns ``(frequency, exact)`` where ``exact`` is the C5 union measure.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    subset = tuple(sorted(subset))
    if len(subset) != params.r:
        raise ValueError(f"subset must have {params.r} elements")
    gens = witness.generators()
    column = {g: k for k, g in enumerate(gens)}
    bits = sample_bits(seed, gens, trials)
    zs = [(subset[i], subset[j]) for i, j in pairs_of(params.r)]
    if zs:
        colors = np.stack([_colors(params, witness, z, level, bits, column) for z in zs], axis=1)
    else:
        colors = np.zeros((trials, 0), dtype=np.int64)
    good = set(realizing_colorings(params.identity, params.g_at(level)))
    hits = sum(1 for row in colors if tuple(int(c) for c in row) in good)
    exact = float(c5_union_measure(params, witness, subset, level))
    return hits / trials, exact


def binomial_band(q: float, trials: int, sigmas: float = 3.0) -> float:
    return sigmas * math.sqrt(q * (1 - q) / trials)


def sampler_report(params: StatementParams, witness: Witness, trials: int, seed: int,
                   subset: Sequence[int] | None = None, level: int | None = None) -> dict:
    """JSON-ready summary: first trial's trajectories plus one realization estimate."""
    first = limit_coloring(sample_point(seed, witness.generators(), 0), params, witness)
    out: dict = {"schemaVersion": 1, "pairs": [p.to_json() for p in first.pairs]}
    if subset is None and params.kappa >= params.r:
        subset = tuple(range(params.r))
    if level is None and params.lam:
        level = params.lam
    if subset is not None and level is not None:
        freq, exact = estimate_realization_probability(params, witness, subset, level, trials, seed)
        out["realization"] = {
            "P": list(subset), "L": level, "freq": freq, "exact": exact,
            "trials": trials, "seed": seed,
        }
    else:
        out["realization"] = None
    return out
