"""Concrete weak distributive laws between powerset and distribution.

All functions are pure and work on any hashable point type, so the same
code runs at the base carrier X and at composite carriers such as PX or MX.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Hashable, Iterable

from .setkit import (
    ConvexSet,
    Dist,
    MachineValue,
    powerset_mult,
    sorted_canon,
    subsets,
)


@lru_cache(maxsize=1 << 17)
def delta_pp(fam: frozenset) -> frozenset:
    """Transpose a family: the B inside its union that meet every member.

    Read as logic, this turns a CNF into an equivalent DNF.
    """
    fam = frozenset(fam)
    universe = powerset_mult(fam)
    return frozenset(b for b in subsets(universe) if all(a & b for a in fam))


@lru_cache(maxsize=1 << 16)
def unions_closure(fam: frozenset) -> frozenset:
    """Close a family under non-empty unions."""
    closed = set(frozenset(s) for s in fam)
    frontier = list(closed)
    while frontier:
        new = []
        for s in frontier:
            for t in list(closed):
                u = s | t
                if u not in closed:
                    closed.add(u)
                    new.append(u)
        frontier = new
    return frozenset(closed)


def is_union_closed(fam: Iterable[frozenset]) -> bool:
    fam = frozenset(fam)
    return all((s | t) in fam for s, t in itertools.combinations(fam, 2))


def iota_pp(closed: frozenset) -> frozenset:
    """Forget that a family is union-closed."""
    closed = frozenset(closed)
    if not is_union_closed(closed):
        raise ValueError("family is not closed under non-empty unions")
    return closed


def sigma(machines: Iterable[MachineValue], alphabet: Iterable | None = None) -> MachineValue:
    """Conjunctive law: output is the meet, successors are collected."""
    return _collect(machines, alphabet, all)


def tau(machines: Iterable[MachineValue], alphabet: Iterable | None = None) -> MachineValue:
    """Disjunctive law: output is the join, successors are collected."""
    return _collect(machines, alphabet, any)


def _collect(machines, alphabet, combine) -> MachineValue:
    machines = list(machines)
    letters = _letters(machines, alphabet)
    out = combine(m.out for m in machines)
    nxt = {a: frozenset(m.step(a) for m in machines) for a in letters}
    return MachineValue(out, nxt)


def _letters(machines, alphabet) -> list:
    if alphabet is not None:
        return sorted_canon(alphabet)
    if not machines:
        raise ValueError("alphabet required for an empty set of machine values")
    return list(machines[0].letters)


def lambda_composite(closed: frozenset, alphabet: Iterable | None = None) -> MachineValue:
    """Composite law on union-closed families of sets of machine values."""
    closed = iota_pp(closed)
    sets = [list(s) for s in closed]
    letters = _letters([m for s in sets for m in s], alphabet)
    out = any(all(m.out for m in s) for s in sets)
    nxt = {
        a: unions_closure(frozenset(frozenset(m.step(a) for m in s) for s in sets))
        for a in letters
    }
    return MachineValue(out, nxt)


def delta_dp(fsum: Dist) -> ConvexSet:
    """Distributions splitting each weight over the corresponding set.

    The result is the hull of the "vertex" choices sum_i p_i * delta(x_i) with
    x_i taken from A_i.  Any empty A_i yields the empty convex set.
    """
    terms = [(p, sorted_canon(a)) for a, p in fsum.items()]
    if any(not a for _, a in terms):
        return ConvexSet()
    gens = []
    for choice in itertools.product(*(a for _, a in terms)):
        gens.append(Dist(zip(choice, (p for p, _ in terms))))
    return ConvexSet(gens)


def lambda_prime_da(big: Dist, letter: Hashable) -> Dist:
    """Marginal at one letter of a distribution over letter-indexed maps.

    Maps are given as MachineValue-free tuples ``((letter, target), ...)`` or
    as MachineValue instances (the output bit is ignored).
    """
    def at(f):
        pairs = f.next if isinstance(f, MachineValue) else f
        for a, x in pairs:
            if a == letter:
                return x
        raise KeyError(f"map undefined at letter {letter!r}")

    acc: dict = {}
    for f, p in big.items():
        x = at(f)
        acc[x] = acc.get(x, 0) + p
    return Dist(acc)

