"""The free boolean algebra over countably many fair, independent generators.

Every element mentions finitely many generators, so it is modelled exactly
as a set of atoms over its sorted support: atom ``a`` is the assignment
giving generator ``support[j]`` the truth value ``(a >> j) & 1``.  The
product measure of an element is then its atom count over ``2**len(support)``,
and in this finite model "measure 0" and "empty" coincide.

Boolean terms have variables ``x1 .. xk``.  A term's truth table is the
integer whose bit ``b`` is the value of the term under the assignment
``x_i = (b >> (i-1)) & 1``; the complete term set of arity ``k`` lists the
full-DNF term of every table in increasing table order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence, Union

import numpy as np

from .dyadic import DyadicMeasure

__all__ = [
    "TermSyntaxError",
    "ResourceLimitError",
    "Var",
    "Const",
    "Not",
    "And",
    "Or",
    "Term",
    "parse_term",
    "dnf_term",
    "AlgebraElement",
    "compose_table",
    "eval_term",
    "eval_table",
    "measure",
    "is_partition_sequence",
    "CompleteTermSet",
    "complete_term_set",
    "best_approximation",
    "approximate",
    "disjointify",
    "MAX_TERM_SET_ARITY",
]

MAX_TERM_SET_ARITY = 4


class TermSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} at position {position}")


class ResourceLimitError(ValueError):
    """A request would enumerate more objects than the guard allows."""


# -- expression trees -------------------------------------------------------


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    arg: "Expr"


@dataclass(frozen=True)
class And:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Or:
    left: "Expr"
    right: "Expr"


Expr = Union[Var, Const, Not, And, Or]


def _max_var(e: Expr) -> int:
    if isinstance(e, Var):
        return e.index
    if isinstance(e, Const):
        return 0
    if isinstance(e, Not):
        return _max_var(e.arg)
    return max(_max_var(e.left), _max_var(e.right))


def _render(e: Expr, prec: int = 0) -> str:
    # precedence: | = 1, & = 2, ~ and atoms = 3
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Const):
        return "1" if e.value else "0"
    if isinstance(e, Not):
        return "~" + _render(e.arg, 3)
    op, mine = (" & ", 2) if isinstance(e, And) else (" | ", 1)
    text = _render(e.left, mine) + op + _render(e.right, mine)
    return f"({text})" if mine < prec else text


def _fold(op, items: Sequence[Expr], empty: Expr) -> Expr:
    if not items:
        return empty
    out = items[0]
    for item in items[1:]:
        out = op(out, item)
    return out


@dataclass(frozen=True)
class Term:
    """A boolean expression together with its declared arity."""

    expr: Expr
    arity: int

    def __post_init__(self):
        if _max_var(self.expr) > self.arity:
            raise ValueError("expression mentions a variable beyond its arity")

    def __str__(self) -> str:
        return _render(self.expr)

    @property
    def table(self) -> int:
        return _table_of(self.expr, self.arity)


@lru_cache(maxsize=None)
def _var_masks(arity: int) -> tuple[int, ...]:
    size = 1 << arity
    masks = []
    for i in range(arity):
        m = 0
        for a in range(size):
            if (a >> i) & 1:
                m |= 1 << a
        masks.append(m)
    return tuple(masks)


def _eval_masks(e: Expr, masks: Sequence[int], full: int) -> int:
    if isinstance(e, Var):
        return masks[e.index - 1]
    if isinstance(e, Const):
        return full if e.value else 0
    if isinstance(e, Not):
        return full & ~_eval_masks(e.arg, masks, full)
    left = _eval_masks(e.left, masks, full)
    right = _eval_masks(e.right, masks, full)
    return left & right if isinstance(e, And) else left | right


def _table_of(e: Expr, arity: int) -> int:
    return _eval_masks(e, _var_masks(arity), (1 << (1 << arity)) - 1)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        self._skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self) -> Expr:
        e = self._disj()
        if self._peek():
            raise TermSyntaxError(f"unexpected {self._peek()!r}", self.pos)
        return e

    def _disj(self) -> Expr:
        e = self._conj()
        while self._peek() == "|":
            self.pos += 1
            e = Or(e, self._conj())
        return e

    def _conj(self) -> Expr:
        e = self._unary()
        while self._peek() == "&":
            self.pos += 1
            e = And(e, self._unary())
        return e

    def _unary(self) -> Expr:
        ch = self._peek()
        if ch == "~":
            self.pos += 1
            return Not(self._unary())
        if ch == "(":
            self.pos += 1
            e = self._disj()
            if self._peek() != ")":
                raise TermSyntaxError("expected ')'", self.pos)
            self.pos += 1
            return e
        if ch in ("0", "1"):
            self.pos += 1
            return Const(ch == "1")
        if ch == "x":
            start = self.pos
            self.pos += 1
            digits = ""
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                digits += self.text[self.pos]
                self.pos += 1
            if not digits or int(digits) < 1:
                raise TermSyntaxError("variables are x1, x2, ...", start)
            return Var(int(digits))
        if not ch:
            raise TermSyntaxError("unexpected end of input", self.pos)
        raise TermSyntaxError(f"unexpected {ch!r}", self.pos)


def parse_term(text: str) -> Term:
    """Parse ``x1 & ~(x2 | 0)`` style terms; arity is the largest variable index."""
    expr = _Parser(text).parse()
    return Term(expr, _max_var(expr))


def dnf_term(arity: int, table: int) -> Term:
    """Full disjunctive normal form of the given truth table."""
    if not 0 <= table < 1 << (1 << arity):
        raise ValueError(f"table {table} out of range for arity {arity}")
    minterms = []
    for a in range(1 << arity):
        if (table >> a) & 1:
            lits = [Var(i + 1) if (a >> i) & 1 else Not(Var(i + 1)) for i in range(arity)]
            minterms.append(_fold(And, lits, Const(True)))
    return Term(_fold(Or, minterms, Const(False)), arity)


# -- algebra elements -------------------------------------------------------


def compose_table(table: int, arity: int, positions: Sequence[int], n: int) -> int:
    """Atoms over ``n`` generators of a table whose variable ``i`` reads bit ``positions[i]``.

    Returns the set of atoms ``a`` (as an int bitset of width ``2**n``) such
    that bit ``sum(((a >> positions[i]) & 1) << i)`` of ``table`` is set.
    """
    if arity != len(positions):
        raise ValueError("one position per variable required")
    size = 1 << n
    if size <= 64:
        out = 0
        for a in range(size):
            b = 0
            for i, p in enumerate(positions):
                b |= ((a >> p) & 1) << i
            if (table >> b) & 1:
                out |= 1 << a
        return out
    atoms = np.arange(size, dtype=np.int64)
    index = np.zeros(size, dtype=np.int64)
    for i, p in enumerate(positions):
        index |= ((atoms >> p) & 1) << i
    width = 1 << arity
    raw = table.to_bytes((width + 7) // 8, "little")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")[:width]
    picked = bits[index]
    return int.from_bytes(np.packbits(picked, bitorder="little").tobytes(), "little")


@dataclass(frozen=True)
class AlgebraElement:
    """A set of atoms over a sorted tuple of distinct generator ids."""

    support: tuple[int, ...]
    atoms: int

    def __post_init__(self):
        support = tuple(int(g) for g in self.support)
        if len(set(support)) != len(support):
            raise ValueError("support has duplicate generators")
        if list(support) != sorted(support) or any(g < 0 for g in support):
            raise ValueError("support must be sorted natural numbers")
        if self.atoms < 0 or self.atoms >> (1 << len(support)):
            raise ValueError("atoms outside 2^k")
        object.__setattr__(self, "support", support)

    @classmethod
    def generator(cls, g: int) -> "AlgebraElement":
        return cls((g,), 0b10)

    @classmethod
    def constant(cls, value: bool, support: Sequence[int] = ()) -> "AlgebraElement":
        support = tuple(sorted(support))
        return cls(support, (1 << (1 << len(support))) - 1 if value else 0)

    @property
    def full(self) -> int:
        return (1 << (1 << len(self.support))) - 1

    def extend(self, support: Sequence[int]) -> "AlgebraElement":
        """The same element over a larger (sorted) support."""
        support = tuple(sorted(set(support)))
        if support == self.support:
            return self
        where = {g: k for k, g in enumerate(support)}
        try:
            positions = [where[g] for g in self.support]
        except KeyError:
            raise ValueError("new support must contain the old one") from None
        return AlgebraElement(
            support, compose_table(self.atoms, len(self.support), positions, len(support))
        )

    def _common(self, other: "AlgebraElement"):
        support = tuple(sorted(set(self.support) | set(other.support)))
        return self.extend(support), other.extend(support), support

    def __and__(self, other: "AlgebraElement") -> "AlgebraElement":
        a, b, s = self._common(other)
        return AlgebraElement(s, a.atoms & b.atoms)

    def __or__(self, other: "AlgebraElement") -> "AlgebraElement":
        a, b, s = self._common(other)
        return AlgebraElement(s, a.atoms | b.atoms)

    def __xor__(self, other: "AlgebraElement") -> "AlgebraElement":
        a, b, s = self._common(other)
        return AlgebraElement(s, a.atoms ^ b.atoms)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        a, b, s = self._common(other)
        return AlgebraElement(s, a.atoms & ~b.atoms)

    def __invert__(self) -> "AlgebraElement":
        return AlgebraElement(self.support, self.full & ~self.atoms)

    def is_empty(self) -> bool:
        return self.atoms == 0

    def is_full(self) -> bool:
        return self.atoms == self.full

    def issubset(self, other: "AlgebraElement") -> bool:
        return (self - other).is_empty()

    def same_set(self, other: "AlgebraElement") -> bool:
        """Equality as subsets of the product space (supports may differ)."""
        return (self ^ other).is_empty()

    def measure(self) -> DyadicMeasure:
        return DyadicMeasure.from_count(self.atoms.bit_count(), len(self.support))

    def __str__(self) -> str:
        width = max(1, (1 << len(self.support)) // 4)
        return f"support=[{','.join(map(str, self.support))}]; atoms={self.atoms:0{width}x}"

    @classmethod
    def parse(cls, text: str) -> "AlgebraElement":
        fields = dict(part.strip().split("=", 1) for part in text.split(";"))
        inner = fields["support"].strip().strip("[]")
        support = tuple(int(g) for g in inner.split(",")) if inner.strip() else ()
        return cls(support, int(fields["atoms"], 16))


def eval_table(table: int, arity: int, gens: Sequence[int]) -> AlgebraElement:
    """Evaluate a truth table at a generator tuple (repeats allowed)."""
    if len(gens) != arity:
        raise ValueError(f"arity {arity} term applied to {len(gens)} generators")
    support = tuple(sorted(set(gens)))
    where = {g: k for k, g in enumerate(support)}
    return AlgebraElement(
        support, compose_table(table, arity, [where[g] for g in gens], len(support))
    )


def eval_term(term: Term, gens: Sequence[int]) -> AlgebraElement:
    """The element ``term(gens)``; repeated generators identify variables."""
    if len(gens) != term.arity:
        raise ValueError(f"arity {term.arity} term applied to {len(gens)} generators")
    support = tuple(sorted(set(gens)))
    where = {g: k for k, g in enumerate(support)}
    gmasks = _var_masks(len(support))
    masks = [gmasks[where[g]] for g in gens]
    return AlgebraElement(support, _eval_masks(term.expr, masks, (1 << (1 << len(support))) - 1))


def measure(e: AlgebraElement) -> DyadicMeasure:
    return e.measure()


def _partition_check(elements: Sequence[AlgebraElement]) -> bool:
    if not elements:
        return False
    support = tuple(sorted(set().union(*(e.support for e in elements))))
    seen = 0
    for e in elements:
        atoms = e.extend(support).atoms
        if seen & atoms:
            return False
        seen |= atoms
    return seen == (1 << (1 << len(support))) - 1


def is_partition_sequence(terms: Sequence[Term], gens: Sequence[Sequence[int]]) -> bool:
    """Pairwise meets empty and join full (measure 0 / 1 in the exact model)."""
    if len(terms) != len(gens):
        raise ValueError("one generator tuple per term required")
    return _partition_check([eval_term(t, g) for t, g in zip(terms, gens)])


class CompleteTermSet:
    """One full-DNF term per boolean function of ``arity`` variables.

    ``terms[i]`` has truth table ``i``; indices run ``0 .. h`` with
    ``h = 2**(2**arity) - 1``.  Terms are built on access.
    """

    def __init__(self, arity: int):
        if arity < 0:
            raise ValueError("arity must be non-negative")
        if arity > MAX_TERM_SET_ARITY:
            raise ResourceLimitError(
                f"complete term set of arity {arity} has 2^{1 << arity} terms; "
                f"limit is arity {MAX_TERM_SET_ARITY}"
            )
        self.arity = arity

    @property
    def h(self) -> int:
        return len(self) - 1

    def __len__(self) -> int:
        return 1 << (1 << self.arity)

    def __getitem__(self, i: int) -> Term:
        if not 0 <= i < len(self):
            raise IndexError(i)
        return dnf_term(self.arity, i)

    def __iter__(self) -> Iterator[Term]:
        return (self[i] for i in range(len(self)))

    def index_of(self, term: Term) -> int:
        """Index of the member equivalent to ``term`` (padded to this arity)."""
        if term.arity > self.arity:
            raise ValueError("term has more variables than the set")
        return _table_of(term.expr, self.arity)


def complete_term_set(arity: int) -> CompleteTermSet:
    return CompleteTermSet(arity)


def best_approximation(target: AlgebraElement, gens: Sequence[int]) -> tuple[int, int]:
    """Best table over ``gens`` (a subset of the target's support) and its error count.

    Each cell of the ``gens`` atoms is included iff the target fills more
    than half of it.  The error is counted in atoms of the target's support.
    """
    gens = tuple(gens)
    where = {g: k for k, g in enumerate(target.support)}
    try:
        positions = [where[g] for g in gens]
    except KeyError:
        raise ValueError("approximating generators must lie in the target's support") from None
    cell_size = 1 << (len(target.support) - len(gens))
    counts = [0] * (1 << len(gens))
    atoms = target.atoms
    while atoms:
        low = atoms & -atoms
        a = low.bit_length() - 1
        b = 0
        for i, p in enumerate(positions):
            b |= ((a >> p) & 1) << i
        counts[b] += 1
        atoms ^= low
    table = 0
    error = 0
    for b, c in enumerate(counts):
        if 2 * c > cell_size:
            table |= 1 << b
            error += cell_size - c
        else:
            error += c
    return table, error


def approximate(
    target: AlgebraElement, budget: int
) -> tuple[Term, tuple[int, ...], DyadicMeasure]:
    """A term over at most ``budget`` generators closest to ``target`` in measure.

    Generators outside the target's support never help, so only subsets of
    the support are tried.  Ties go to the smaller arity, then the smaller
    truth table, then the lexicographically smaller generator tuple.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    k = len(target.support)
    best = None
    for size in range(min(budget, k) + 1):
        for gens in itertools.combinations(target.support, size):
            table, error = best_approximation(target, gens)
            key = (error, size, table, gens)
            if best is None or key < best:
                best = key
    error, size, table, gens = best
    return dnf_term(size, table), gens, DyadicMeasure.from_count(error, k)


def _shift(e: Expr, offset: int) -> Expr:
    if isinstance(e, Var):
        return Var(e.index + offset)
    if isinstance(e, Const):
        return e
    if isinstance(e, Not):
        return Not(_shift(e.arg, offset))
    return type(e)(_shift(e.left, offset), _shift(e.right, offset))


def disjointify(
    sigma: Sequence[tuple[Term, Sequence[int]]]
) -> list[tuple[Term, tuple[int, ...]]]:
    """Turn a sequence of elements into a partition sequence of length ``len + 1``.

    Entry ``m`` is ``sigma[m]`` minus the union of the earlier entries; the
    last entry is the complement of the union of all of them.  All outputs
    share one generator tuple, the concatenation of the inputs' tuples.
    """
    if not sigma:
        raise ValueError("need at least one element")
    gens: list[int] = []
    shifted: list[Expr] = []
    for term, tup in sigma:
        if len(tup) != term.arity:
            raise ValueError("generator tuple does not match term arity")
        shifted.append(_shift(term.expr, len(gens)))
        gens.extend(tup)
    arity = len(gens)
    out = []
    for m, e in enumerate(shifted):
        expr = e if m == 0 else And(e, Not(_fold(Or, shifted[:m], Const(False))))
        out.append((Term(expr, arity), tuple(gens)))
    out.append((Term(Not(_fold(Or, shifted, Const(False))), arity), tuple(gens)))
    return out
