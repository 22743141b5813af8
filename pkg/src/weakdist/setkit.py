"""Finite sets, rational distributions and convex sets of distributions.

Everything here is exact: probabilities are :class:`fractions.Fraction` and
no floating point is ever involved.  Finite sets are plain ``frozenset``
objects; a *family* is a frozenset of frozensets.  Canonical orderings for
display and for deterministic iteration come from :func:`sort_key`.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Hashable, Iterable, Iterator, Mapping, Optional, Sequence

FinSet = frozenset
Family = frozenset

_DIGITS = re.compile(r"(\d+)")


def _natural(text: str) -> tuple:
    return tuple((0, int(p)) if p.isdigit() else (1, p) for p in _DIGITS.split(text) if p)


@lru_cache(maxsize=1 << 18)
def sort_key(obj: Hashable) -> tuple:
    """Total, deterministic ordering key for every value the library builds.

    Sets order by size first, then lexicographically on their sorted members,
    so "smallest" counterexamples are also the simplest ones.
    """
    if isinstance(obj, (bool, int)):
        return (0, int(obj))
    if isinstance(obj, Fraction):
        return (1, obj)
    if isinstance(obj, str):
        return (2, _natural(obj))
    if isinstance(obj, frozenset):
        return (3, len(obj), tuple(sorted(sort_key(e) for e in obj)))
    if isinstance(obj, tuple):
        return (4, tuple(sort_key(e) for e in obj))
    key = getattr(obj, "_sort_key", None)
    if key is not None:
        return key()
    raise TypeError(f"no canonical ordering for {type(obj).__name__}")


def sorted_canon(items: Iterable) -> list:
    return sorted(items, key=sort_key)


def render(obj: Any) -> str:
    """Compact text rendering: ``{x1,x2}``, ``{{x1},{}}``, ``[1/2 x + 1/2 y]``."""
    if isinstance(obj, frozenset):
        return "{" + ",".join(render(e) for e in sorted_canon(obj)) + "}"
    if isinstance(obj, tuple):
        return "(" + ",".join(render(e) for e in obj) + ")"
    return str(obj)


def finset(items: Iterable = ()) -> frozenset:
    return frozenset(items)


def family(sets: Iterable[Iterable] = ()) -> frozenset:
    return frozenset(frozenset(s) for s in sets)


def subsets(s: Iterable) -> Iterator[frozenset]:
    """All subsets of ``s``, smallest first, in canonical order."""
    elems = sorted_canon(s)
    for k in range(len(elems) + 1):
        for combo in itertools.combinations(elems, k):
            yield frozenset(combo)


def _as_function(f: Callable | Mapping) -> Callable:
    if isinstance(f, Mapping):
        return f.__getitem__
    return f


# ---------------------------------------------------------------------------
# The powerset monad

def powerset_unit(x: Hashable, universe: Optional[Iterable] = None) -> frozenset:
    if universe is not None and x not in set(universe):
        raise KeyError(f"unknown element {x!r}")
    return frozenset((x,))


def powerset_mult(fam: Iterable[frozenset]) -> frozenset:
    out: set = set()
    for s in fam:
        out |= s
    return frozenset(out)


def direct_image(f: Callable | Mapping, s: Iterable) -> frozenset:
    g = _as_function(f)
    return frozenset(g(x) for x in s)


def family_image(f: Callable | Mapping, fam: Iterable[Iterable]) -> frozenset:
    g = _as_function(f)
    return frozenset(frozenset(g(x) for x in s) for s in fam)


# ---------------------------------------------------------------------------
# The distribution monad

class Dist:
    """A finitely supported probability distribution with rational weights.

    Only strictly positive weights are stored and they must sum to exactly 1.
    Instances are immutable and hashable, so distributions can themselves be
    the points of other distributions or sets.
    """

    __slots__ = ("_weights", "_items", "_hash")

    def __init__(self, weights: Mapping | Iterable[tuple[Hashable, Any]]):
        pairs = weights.items() if isinstance(weights, Mapping) else weights
        acc: dict = {}
        for x, w in pairs:
            w = Fraction(w)
            if w < 0:
                raise ValueError(f"negative weight {w} on {render(x)}")
            acc[x] = acc.get(x, Fraction(0)) + w
        acc = {x: w for x, w in acc.items() if w != 0}
        mass = sum(acc.values(), Fraction(0))
        if mass != 1:
            raise ValueError(f"mass {mass} ≠ 1")
        self._weights = acc
        self._items = tuple(sorted(acc.items(), key=lambda xw: sort_key(xw[0])))
        self._hash = hash(frozenset(self._items))

    @classmethod
    def dirac(cls, x: Hashable) -> "Dist":
        return cls({x: 1})

    @classmethod
    def uniform(cls, xs: Iterable[Hashable]) -> "Dist":
        xs = list(dict.fromkeys(xs))
        if not xs:
            raise ValueError("uniform distribution on an empty set")
        return cls({x: Fraction(1, len(xs)) for x in xs})

    def __getitem__(self, x: Hashable) -> Fraction:
        return self._weights.get(x, Fraction(0))

    def items(self) -> tuple:
        return self._items

    def support_set(self) -> frozenset:
        return frozenset(self._weights)

    def __iter__(self):
        return (x for x, _ in self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Dist) and self._weights == other._weights

    def __hash__(self) -> int:
        return self._hash

    def _sort_key(self) -> tuple:
        return (5, tuple((sort_key(x), w) for x, w in self._items))

    def __str__(self) -> str:
        return " + ".join(f"{w} {render(x)}" for x, w in self._items)

    def __repr__(self) -> str:
        return f"Dist[{self}]"


# A formal sum of distinct sets with positive weights is simply a Dist whose
# points are frozensets.
FormalSum = Dist


def formal_sum(terms: Iterable[tuple[Any, Iterable]]) -> Dist:
    terms = [(Fraction(p), frozenset(a)) for p, a in terms]
    sets = [a for _, a in terms]
    if len(set(sets)) != len(sets):
        raise ValueError("formal sum terms must carry distinct sets")
    if any(p <= 0 for p, _ in terms):
        raise ValueError("formal sum weights must be positive")
    return Dist((a, p) for p, a in terms)


def dist_unit(x: Hashable) -> Dist:
    return Dist.dirac(x)


def dist_pushforward(f: Callable | Mapping, phi: Dist) -> Dist:
    g = _as_function(f)
    return Dist((g(x), w) for x, w in phi.items())


def dist_mult(big: Dist) -> Dist:
    """Flatten a distribution over distributions."""
    acc: dict = {}
    for inner, p in big.items():
        for x, q in inner.items():
            acc[x] = acc.get(x, Fraction(0)) + p * q
    return Dist(acc)


def support(phi: Dist) -> frozenset:
    return phi.support_set()


def mix(terms: Iterable[tuple[Any, Dist]]) -> Dist:
    """Convex combination ``sum_i p_i * phi_i`` of distributions."""
    acc: dict = {}
    for p, phi in terms:
        p = Fraction(p)
        for x, q in phi.items():
            acc[x] = acc.get(x, Fraction(0)) + p * q
    return Dist(acc)


# ---------------------------------------------------------------------------
# Exact non-negative linear systems

_ONE = "__sum__"


def nonneg_solution(cols: Sequence[Mapping], target: Mapping) -> Optional[list]:
    """Find ``x >= 0`` with ``sum_j x_j cols[j] == target``, or None.

    Vectors are sparse mappings.  Exact phase-one simplex with Bland's rule,
    so it terminates and any solution returned is basic: at most as many
    non-zero entries as there are coordinates.
    """
    n = len(cols)
    rows = sorted_canon({r for c in cols for r, v in c.items() if v != 0}
                        | {r for r, v in target.items() if v != 0})
    if all(target.get(r, 0) == 0 for r in rows):
        return [Fraction(0)] * n
    covered = {r for c in cols for r, v in c.items() if v != 0}
    if any(v != 0 and r not in covered for r, v in target.items()):
        return None
    m = len(rows)
    # tableau rows: n structural columns, m artificial ones, right-hand side
    tab = []
    for i, r in enumerate(rows):
        sign = -1 if Fraction(target.get(r, 0)) < 0 else 1
        row = [sign * Fraction(c.get(r, 0)) for c in cols]
        row += [Fraction(int(k == i)) for k in range(m)]
        row.append(sign * Fraction(target.get(r, 0)))
        tab.append(row)
    basis = list(range(n, n + m))
    cost = [-sum(tab[i][j] for i in range(m)) for j in range(n)] + [Fraction(0)] * m
    cost.append(-sum(tab[i][-1] for i in range(m)))
    while True:
        enter = next((j for j in range(n + m) if cost[j] < 0), None)
        if enter is None:
            break
        leave, best = None, None
        for i in range(m):
            a = tab[i][enter]
            if a > 0:
                ratio = tab[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave is None:  # unbounded direction, impossible in phase one
            break
        pivot = tab[leave][enter]
        prow = tab[leave] = [v / pivot for v in tab[leave]]
        for i in range(m):
            if i != leave and tab[i][enter] != 0:
                f = tab[i][enter]
                tab[i] = [a - f * b for a, b in zip(tab[i], prow)]
        f = cost[enter]
        cost = [a - f * b for a, b in zip(cost, prow)]
        basis[leave] = enter
    if cost[-1] != 0:
        return None
    full = [Fraction(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            full[j] = tab[i][-1]
        elif tab[i][-1] != 0:
            return None
    return full


def convex_weights(point: Mapping, gens: Sequence[Mapping]) -> Optional[list]:
    """Barycentric weights of ``point`` over ``gens``.

    Both sides are non-negative vectors (distributions or pairs of them), so a
    generator with mass outside the point's support can never take part.
    """
    supp = {k for k, v in point.items() if v != 0}
    keep = [j for j, g in enumerate(gens) if all(k in supp for k, v in g.items() if v != 0)]
    cols = [{**gens[j], _ONE: 1} for j in keep]
    sol = nonneg_solution(cols, {**point, _ONE: 1})
    if sol is None:
        return None
    full = [Fraction(0)] * len(gens)
    for j, v in zip(keep, sol):
        full[j] = v
    return full


# ---------------------------------------------------------------------------
# Convex sets of distributions

def _as_vector(phi: Dist) -> dict:
    return dict(phi.items())


@dataclass(frozen=True)
class ConvexSet:
    """Convex hull of a finite list of distributions.

    The generator tuple is deduplicated and canonically sorted; equal
    generator tuples mean equal sets, but equal sets may have different
    generators (use :func:`convex_equal`).  No generators means the empty set.
    """

    generators: tuple = ()

    def __init__(self, generators: Iterable[Dist] = ()):
        gens = tuple(sorted_canon(set(generators)))
        for g in gens:
            if not isinstance(g, Dist):
                raise TypeError(f"convex set generator must be a Dist, got {g!r}")
        object.__setattr__(self, "generators", gens)

    def __iter__(self):
        return iter(self.generators)

    def __len__(self) -> int:
        return len(self.generators)

    def __bool__(self) -> bool:
        return bool(self.generators)

    def map(self, f: Callable[[Dist], Dist]) -> "ConvexSet":
        """Image under an affine map, given its action on generators."""
        return ConvexSet(f(g) for g in self.generators)

    def _sort_key(self) -> tuple:
        return (7, len(self.generators), tuple(sort_key(g) for g in self.generators))

    def __str__(self) -> str:
        return "conv{" + ", ".join(f"[{g}]" for g in self.generators) + "}"


def hull_member(phi: Dist, cset: ConvexSet | Iterable[Dist]) -> bool:
    gens = list(cset)
    if not gens:
        return False
    if phi in gens:
        return True
    return convex_weights(_as_vector(phi), [_as_vector(g) for g in gens]) is not None


@lru_cache(maxsize=1 << 14)
def extreme_points(cset: ConvexSet) -> ConvexSet:
    """Drop generators lying in the hull of the remaining ones."""
    gens = list(cset.generators)
    i = 0
    while i < len(gens):
        rest = gens[:i] + gens[i + 1:]
        if rest and hull_member(gens[i], rest):
            gens = rest
        else:
            i += 1
    return ConvexSet(gens)


def convex_equal(c1: ConvexSet, c2: ConvexSet) -> bool:
    if c1.generators == c2.generators:
        return True
    e1, e2 = extreme_points(c1), extreme_points(c2)
    return all(hull_member(g, e2) for g in e1) and all(hull_member(g, e1) for g in e2)


def support_image(cset: ConvexSet) -> frozenset:
    """Supports of all points of the hull.

    A convex combination with positive weights on a generator subset J has
    support equal to the union of the supports in J.
    """
    supps = sorted_canon({support(g) for g in cset.generators})
    out = set()
    for k in range(1, len(supps) + 1):
        for combo in itertools.combinations(supps, k):
            out.add(powerset_mult(combo))
    return frozenset(out)


# ---------------------------------------------------------------------------
# The machine functor 2 x X^A

@dataclass(frozen=True)
class MachineValue:
    """A pair (output bit, successor per letter)."""

    out: int
    next: tuple  # ((letter, target), ...) sorted by letter

    def __init__(self, out: int, next: Mapping | Iterable[tuple]):
        pairs = next.items() if isinstance(next, Mapping) else next
        object.__setattr__(self, "out", int(bool(out)))
        object.__setattr__(self, "next", tuple(sorted(pairs, key=lambda p: sort_key(p[0]))))

    def step(self, letter: Hashable):
        for a, t in self.next:
            if a == letter:
                return t
        raise KeyError(f"unknown letter {letter!r}")

    @property
    def letters(self) -> tuple:
        return tuple(a for a, _ in self.next)

    def map(self, f: Callable | Mapping) -> "MachineValue":
        g = _as_function(f)
        return MachineValue(self.out, ((a, g(t)) for a, t in self.next))

    def _sort_key(self) -> tuple:
        return (6, self.out, tuple((sort_key(a), sort_key(t)) for a, t in self.next))

    def __str__(self) -> str:
        succ = ",".join(f"{a}:{render(t)}" for a, t in self.next)
        return f"({self.out},{succ})"


def machine_values(states: Sequence, alphabet: Sequence) -> list:
    """Every element of 2 x X^A, canonically ordered."""
    out = []
    for o in (0, 1):
        for targets in itertools.product(states, repeat=len(alphabet)):
            out.append(MachineValue(o, zip(alphabet, targets)))
    return sorted_canon(out)
