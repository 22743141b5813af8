"""Bisimulation, bisimulation up to congruence, and equivalence search.

Two settings share the same shape:

* subset states of a determinized alternating automaton, where the algebraic
  context is union (:func:`cgr_member_union`), and
* belief states of a probabilistic automaton, where the context is convex
  combination (:func:`cgr_member_convex`).

Convex congruence membership is only semi-decided; functions in that part
return ``True`` (certified), ``False`` (refuted) or ``None`` (unknown).
"""

from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Optional, Sequence

from .automata import (
    NDA,
    AltAutomaton,
    ParseError,
    ProbAutomaton,
    belief_successors,
    determinize_once,
    parse_dist,
    support_automaton,
)
from .setkit import (
    ConvexSet,
    Dist,
    nonneg_solution,
    convex_weights,
    render,
    sort_key,
    sorted_canon,
    subsets,
    support,
)


# ---------------------------------------------------------------------------
# Relations

def relation(pairs: Iterable[tuple]) -> list:
    """Duplicate-free list of pairs in canonical order."""
    return sorted_canon(set((a, b) for a, b in pairs))


def _format_state(s) -> str:
    if isinstance(s, Dist):
        return f"[{s}]"
    return "{" + " ".join(str(x) for x in sorted_canon(s)) + "}"


def format_relation(rel: Iterable[tuple]) -> str:
    return "".join(f"{_format_state(a)} ~ {_format_state(b)}\n" for a, b in rel)


_SIDE = re.compile(r"^\s*(\{[^{}]*\}|\[[^\[\]]*\])\s*~\s*(\{[^{}]*\}|\[[^\[\]]*\])\s*$")


def _parse_side(text: str, states, line):
    if text.startswith("{"):
        members = text[1:-1].split()
        if states is not None:
            for x in members:
                if x not in states:
                    raise ParseError(f"undeclared state {x}", line)
        return frozenset(members)
    return parse_dist(text, states, line)


def parse_relation(text: str, states: Optional[Iterable] = None) -> list:
    """Read ``{x1 x2} ~ {y1}`` or ``[1/2 x + 1/2 y] ~ [1 z]`` lines."""
    known = set(states) if states is not None else None
    pairs = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SIDE.match(line)
        if not m:
            raise ParseError(f"expected '<state> ~ <state>', got {line!r}", no)
        left, right = (_parse_side(g, known, no) for g in m.groups())
        if isinstance(left, Dist) != isinstance(right, Dist):
            raise ParseError("both sides must be sets or both distributions", no)
        pairs.append((left, right))
    return relation(pairs)


# ---------------------------------------------------------------------------
# Milner-Park bisimulation on subset states

def milner_park_step(nda: NDA, rel: Iterable[tuple], u: Iterable, v: Iterable, related=None) -> bool:
    """Outputs agree and successors match both ways, up to ``related``."""
    u, v = frozenset(u), frozenset(v)
    if related is None:
        pairs = set(rel)

        def related(p, q):
            return (p, q) in pairs

    if nda.out(u) != nda.out(v):
        return False
    for a in nda.alphabet:
        su, sv = nda.succ(u, a), nda.succ(v, a)
        if not all(any(related(p, q) for q in sv) for p in su):
            return False
        if not all(any(related(p, q) for p in su) for q in sv):
            return False
    return True


def is_bisimulation(nda: NDA, rel: Iterable[tuple]) -> bool:
    rel = list(rel)
    return all(milner_park_step(nda, rel, u, v) for u, v in rel)


def union_normal_form(rel: Iterable[tuple], s: Iterable) -> frozenset:
    """Saturate ``s`` with the rewriting rules U -> U + V for U ~ V in R or R^-1."""
    rules = [(frozenset(a), frozenset(b)) for a, b in rel]
    rules += [(b, a) for a, b in rules]
    cur = frozenset(s)
    changed = True
    while changed:
        changed = False
        for lhs, rhs in rules:
            if lhs <= cur and not rhs <= cur:
                cur = cur | rhs
                changed = True
    return cur


def cgr_member_union(rel: Iterable[tuple], u: Iterable, v: Iterable) -> bool:
    """Membership in the congruence generated by ``rel`` w.r.t. union."""
    rel = list(rel)
    return union_normal_form(rel, u) == union_normal_form(rel, v)


def check_upto_congruence(nda: NDA, rel: Iterable[tuple]) -> bool:
    """Is ``rel`` a Milner-Park bisimulation up to union congruence?"""
    rel = list(rel)
    cache: dict = {}

    def nf(s):
        if s not in cache:
            cache[s] = union_normal_form(rel, s)
        return cache[s]

    def related(p, q):
        return nf(p) == nf(q)

    return all(milner_park_step(nda, rel, u, v, related) for u, v in rel)


class Refinement:
    """Largest Milner-Park bisimulation on the states reachable from a pool.

    Keeps the block of every state after each refinement round, so the round
    at which two states separate is available for building traces.
    """

    def __init__(self, nda: NDA, seeds: Iterable[Iterable] = ()):
        self.nda = nda
        self.states: list = []
        self._known: set = set()
        self.rounds: list = []
        self.ensure(seeds)

    def ensure(self, seeds: Iterable[Iterable]) -> None:
        fresh = [frozenset(s) for s in seeds if frozenset(s) not in self._known]
        if not fresh:
            return
        for u in self.nda.materialize(fresh):
            if u not in self._known:
                self._known.add(u)
                self.states.append(u)
        self._refine()

    def _refine(self) -> None:
        nda = self.nda
        block = {u: nda.out(u) for u in self.states}
        rounds = [block]
        while True:
            sig = {
                u: (block[u],) + tuple(
                    frozenset(block[w] for w in nda.succ(u, a)) for a in nda.alphabet
                )
                for u in self.states
            }
            ids: dict = {}
            new = {u: ids.setdefault(sig[u], len(ids)) for u in self.states}
            if len(ids) == len(set(block.values())):
                break
            rounds.append(new)
            block = new
        self.rounds = rounds

    def bisimilar(self, u: Iterable, v: Iterable) -> bool:
        u, v = frozenset(u), frozenset(v)
        self.ensure([u, v])
        last = self.rounds[-1]
        return last[u] == last[v]

    def split_round(self, u: frozenset, v: frozenset) -> Optional[int]:
        self.ensure([u, v])
        for r, block in enumerate(self.rounds):
            if block[u] != block[v]:
                return r
        return None


@dataclass
class Verdict:
    """Outcome of an equivalence query.

    ``result`` is "equivalent", "inequivalent" or "unknown".  Equivalent
    verdicts carry the witness relation; inequivalent ones a separating word
    when the languages differ and a spoiler trace otherwise.
    """

    result: str
    relation: list = field(default_factory=list)
    word: Optional[tuple] = None
    trace: list = field(default_factory=list)
    upto: str = "congruence"
    depth: Optional[int] = None
    note: str = ""

    @property
    def equivalent(self) -> bool:
        return self.result == "equivalent"


def separating_word(nda: NDA, u: Iterable, v: Iterable, max_states: int = 100000) -> Optional[tuple]:
    """Shortest word on which the languages of ``u`` and ``v`` differ, if any."""
    start = (frozenset([frozenset(u)]), frozenset([frozenset(v)]))

    def out(s):
        return int(any(nda.out(w) for w in s))

    seen = {start}
    queue = deque([(start, ())])
    while queue:
        (s, t), w = queue.popleft()
        if out(s) != out(t):
            return w
        for a in nda.alphabet:
            nxt = (frozenset(x for p in s for x in nda.succ(p, a)),
                   frozenset(x for q in t for x in nda.succ(q, a)))
            if nxt not in seen:
                if len(seen) >= max_states:
                    return None
                seen.add(nxt)
                queue.append((nxt, w + (a,)))
    return None


def spoiler_trace(ref: Refinement, u: frozenset, v: frozenset) -> list:
    """Attacker moves driving a non-bisimilar pair to an immediate mismatch.

    Each step is ``(u, v, letter, side, moved_to, answer)``; the answer is the
    defender's canonical reply, or None when no reply exists.  The final pair
    reached has different outputs (or the last answer is None).
    """
    nda = ref.nda
    trace = []
    while True:
        r = ref.split_round(u, v)
        if r is None or r == 0:
            return trace
        step = None
        for a in nda.alphabet:
            su, sv = sorted_canon(nda.succ(u, a)), sorted_canon(nda.succ(v, a))
            for side, mine, theirs in (("left", su, sv), ("right", sv, su)):
                for p in mine:
                    rounds = [ref.split_round(p, q) if side == "left" else ref.split_round(q, p)
                              for q in theirs]
                    if all(x is not None and x < r for x in rounds):
                        step = (a, side, p, theirs[0] if theirs else None)
                        break
                if step:
                    break
            if step:
                break
        a, side, p, q = step
        trace.append((u, v, a, side, p, q))
        if q is None:
            return trace
        u, v = (p, q) if side == "left" else (q, p)


def replay_trace(nda: NDA, start: tuple, trace: list) -> bool:
    """Check that a spoiler trace is made of real moves and ends in a mismatch."""
    u, v = start
    for (tu, tv, a, side, p, q) in trace:
        if (tu, tv) != (u, v):
            return False
        mine, theirs = (nda.succ(u, a), nda.succ(v, a)) if side == "left" else (nda.succ(v, a), nda.succ(u, a))
        if p not in mine:
            return False
        if q is None:
            return not theirs
        if q not in theirs:
            return False
        u, v = (p, q) if side == "left" else (q, p)
    return nda.out(u) != nda.out(v)


def equiv_alt(aut: AltAutomaton, x: Hashable, y: Hashable, upto: str = "congruence",
              max_states: Optional[int] = 4096) -> Verdict:
    """Decide Milner-Park bisimilarity of {x} and {y} after determinizing once.

    Bisimilarity on the reachable fragment is computed first by partition
    refinement; the witness is then grown from the root pair, preferring
    matches that are already congruent and relating single states whenever
    that is enough to close a pair under union.
    """
    if upto not in ("none", "congruence"):
        raise ValueError(f"unknown up-to technique {upto!r}")
    aut.out(x), aut.out(y)
    nda = determinize_once(aut)
    root = (frozenset([x]), frozenset([y]))
    try:
        ref = Refinement(nda, root)
    except RuntimeError as exc:
        return Verdict("unknown", upto=upto, note=str(exc))
    if max_states is not None and len(ref.states) > max_states:
        return Verdict("unknown", upto=upto, note=f"more than {max_states} subset states")
    if not ref.bisimilar(*root):
        word = separating_word(nda, *root)
        trace = [] if word is not None else spoiler_trace(ref, *root)
        return Verdict("inequivalent", word=word, trace=trace, upto=upto)

    congruence = upto == "congruence"
    witness: list = []
    todo: deque = deque([root])

    def known():
        return witness + list(todo)

    def covered(p, q):
        if congruence:
            return cgr_member_union(known(), p, q)
        return (p, q) in set(known())

    def orient(mine, other, flip):
        return (other, mine) if flip else (mine, other)

    def decompose(p, candidates, flip):
        """Relate single states of ``p`` to subsets of one candidate."""
        best = None
        for c in candidates:
            if not _bisim(p, c, flip):
                continue
            proposals: list = []
            for z in sorted_canon(p):
                single = frozenset([z])
                rel = known() + proposals
                options = list(subsets(c))
                done = next((vv for vv in options if cgr_member_union(rel, *orient(single, vv, flip))), None)
                if done is not None:
                    continue
                pick = next((vv for vv in options if _bisim(single, vv, flip)), None)
                if pick is None:
                    proposals = None
                    break
                proposals.append(orient(single, pick, flip))
            if proposals is None:
                continue
            if cgr_member_union(known() + proposals, *orient(p, c, flip)):
                if best is None or len(proposals) < len(best):
                    best = proposals
        return best

    def _bisim(p, q, flip):
        return ref.bisimilar(*orient(p, q, flip))

    while todo:
        u, v = todo.popleft()
        if covered(u, v):
            continue
        witness.append((u, v))
        for a in nda.alphabet:
            su, sv = sorted_canon(nda.succ(u, a)), sorted_canon(nda.succ(v, a))
            for mine, theirs, flip in ((su, sv, False), (sv, su, True)):
                for p in mine:
                    if any(covered(*orient(p, q, flip)) for q in theirs):
                        continue
                    direct = next(q for q in theirs if _bisim(p, q, flip))
                    choice = [orient(p, direct, flip)]
                    if congruence and len(p) > 1:
                        dec = decompose(p, theirs, flip)
                        if dec is not None and len(dec) <= len(choice):
                            choice = dec
                    todo.extend(choice)

    ok = check_upto_congruence(nda, witness) if congruence else is_bisimulation(nda, witness)
    if not ok:
        return Verdict("unknown", relation=relation(witness), upto=upto, note="witness failed re-check")
    return Verdict("equivalent", relation=witness, upto=upto)


# ---------------------------------------------------------------------------
# Convex congruence on belief states

def _pair_vector(phi: Dist, psi: Dist) -> dict:
    vec = {(0, x): w for x, w in phi.items()}
    vec.update({(1, y): w for y, w in psi.items()})
    return vec


def _universe(rel, extra=()) -> set:
    pts = set()
    for a, b in rel:
        pts |= support(a) | support(b)
    for d in extra:
        pts |= support(d)
    return pts


def convex_generators(rel: Iterable[tuple], depth: int, universe: Iterable = ()) -> list:
    """Pairs whose convex hull under-approximates the convex congruence.

    Level 0 is R, its converse and the Dirac diagonal; each further level
    adds composites (a, c) of pairs (a, b), (b, c) from the previous one.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    rel = list(rel)
    pts = _universe(rel) | set(universe)
    level = set(rel) | {(b, a) for a, b in rel} | {(Dist.dirac(z), Dist.dirac(z)) for z in pts}
    for _ in range(depth - 1):
        by_left: dict = {}
        for a, b in level:
            by_left.setdefault(a, []).append(b)
        nxt = set(level)
        for a, b in level:
            for c in by_left.get(b, ()):
                nxt.add((a, c))
        if nxt == level:
            break
        level = nxt
    return sorted_canon(level)


def _in_convex_hull(pairs: Sequence[tuple], phi: Dist, psi: Dist) -> bool:
    if (phi, psi) in pairs:
        return True
    return convex_weights(_pair_vector(phi, psi), [_pair_vector(a, b) for a, b in pairs]) is not None


def cgr_member_convex(rel: Iterable[tuple], phi: Dist, psi: Dist, depth: int = 2,
                      universe: Iterable = ()) -> Optional[bool]:
    """``True`` if (phi, psi) is certified in the convex congruence, else None."""
    rel = list(rel)
    pts = _universe(rel, (phi, psi)) | set(universe)
    if phi == psi:
        return True
    for k in range(1, depth + 1):
        if _in_convex_hull(convex_generators(rel, k, pts), phi, psi):
            return True
    return None


def _convex_match(pairs: Sequence[tuple], g: Dist, others: ConvexSet, flip: bool) -> bool:
    """Is (g, h) in the hull of ``pairs`` for some h in the hull of ``others``?"""
    side_g, side_h = (1, 0) if flip else (0, 1)
    supp = support(g)
    cols = []
    for a, b in pairs:
        left, right = (b, a) if flip else (a, b)
        if not support(left) <= supp:
            continue
        col = {(side_g, x): w for x, w in left.items()}
        col.update({(side_h, y): w for y, w in right.items()})
        col["lam"] = 1
        cols.append(col)
    if not cols:
        return False
    for h in others:
        col = {(side_h, y): -w for y, w in h.items()}
        col["mu"] = 1
        cols.append(col)
    target = {(side_g, x): w for x, w in g.items()}
    target.update({"lam": 1, "mu": 1})
    return nonneg_solution(cols, target) is not None


class SupportCheck:
    """Bisimilarity of supports, a necessary condition for belief bisimilarity.

    Taking supports maps the convex determinization onto the union one, so
    non-bisimilar supports refute equivalence outright.
    """

    def __init__(self, pa: ProbAutomaton):
        self.nda = determinize_once(support_automaton(pa))
        self.ref = Refinement(self.nda)

    def bisimilar(self, phi: Dist, psi: Dist) -> bool:
        return self.ref.bisimilar(support(phi), support(psi))


def check_pa_upto_convex(pa: ProbAutomaton, rel: Iterable[tuple], depth: int = 2,
                         supports: Optional[SupportCheck] = None) -> Optional[bool]:
    """Is ``rel`` a bisimulation up to convex congruence on belief states?

    ``True`` certifies it.  ``False`` means some related pair is provably not
    bisimilar (one side can move and the other cannot, or their supports are
    not bisimilar).  ``None`` means a successor could not be matched.
    """
    rel = list(rel)
    if not rel:
        return True
    supports = supports or SupportCheck(pa)
    pts = _universe(rel) | set(pa.states)
    pairs = convex_generators(rel, depth, pts)
    result: Optional[bool] = True
    for phi, psi in rel:
        if not supports.bisimilar(phi, psi):
            return False
        for a in pa.alphabet:
            b1, b2 = belief_successors(pa, phi, a), belief_successors(pa, psi, a)
            if bool(b1) != bool(b2):
                return False
            for mine, theirs, flip in ((b1, b2, False), (b2, b1, True)):
                for g in mine:
                    if not _matched(pairs, g, theirs, flip):
                        result = None
    return result


def _matched(pairs, g, theirs, flip) -> bool:
    for h in theirs:
        p, q = (h, g) if flip else (g, h)
        if _in_convex_hull(pairs, p, q):
            return True
    return _convex_match(pairs, g, theirs, flip)


def equiv_pa(pa: ProbAutomaton, phi: Dist, psi: Dist, depth: int = 2, max_pairs: int = 64) -> Verdict:
    """Search for a bisimulation up to convex congruence relating two beliefs.

    Candidates are filtered by support bisimilarity.  When a successor pair
    is not yet congruent, the search first tries to relate a single Dirac
    belief so that the pair follows by convexity, and otherwise relates the
    pair itself.  The final relation is re-checked; the verdict is "unknown"
    when the search gives up.
    """
    supports = SupportCheck(pa)
    if not supports.bisimilar(phi, psi):
        return Verdict("inequivalent", upto="convex", depth=depth,
                       note="supports are not bisimilar")
    witness: list = []
    todo: deque = deque([(phi, psi)])
    pts = set(pa.states)

    def known():
        return witness + list(todo)

    def covered(p, q):
        return cgr_member_convex(known(), p, q, depth, pts) is True

    def orient(g, h, flip):
        return (h, g) if flip else (g, h)

    def residual(g, h, flip):
        """Relate one unmatched Dirac of ``g``'s support so that (g, h) follows."""
        partners: dict = {}
        for a, b in known():
            left, right = (b, a) if flip else (a, b)
            if len(left) == 1:
                partners.setdefault(next(iter(left)), right)
        rest = dict(h.items())
        missing = []
        for x, w in g.items():
            if x in partners:
                for y, q in partners[x].items():
                    rest[y] = rest.get(y, Fraction(0)) - w * q
            else:
                missing.append((x, w))
        if len(missing) != 1:
            return None
        z, w = missing[0]
        if any(v < 0 for v in rest.values()):
            return None
        try:
            rho = Dist({y: v / w for y, v in rest.items()})
        except ValueError:
            return None
        dz = Dist.dirac(z)
        if not supports.bisimilar(*orient(dz, rho, flip)):
            return None
        return orient(dz, rho, flip)

    while todo:
        if len(witness) >= max_pairs:
            return Verdict("unknown", relation=relation(witness), upto="convex", depth=depth,
                           note=f"gave up after {max_pairs} pairs")
        u, v = todo.popleft()
        if covered(u, v):
            continue
        witness.append((u, v))
        for a in pa.alphabet:
            b1, b2 = belief_successors(pa, u, a), belief_successors(pa, v, a)
            if bool(b1) != bool(b2):
                return Verdict("inequivalent", relation=relation(witness), upto="convex", depth=depth,
                               note=f"letter {a} enabled on one side only")
            for mine, theirs, flip in ((b1, b2, False), (b2, b1, True)):
                for g in mine:
                    if any(covered(*orient(g, h, flip)) for h in theirs):
                        continue
                    cands = [h for h in theirs if supports.bisimilar(*orient(g, h, flip))]
                    if not cands:
                        return Verdict("unknown", relation=relation(witness), upto="convex",
                                       depth=depth, note=f"no candidate match for [{g}]")
                    choice = None
                    for h in cands:
                        choice = residual(g, h, flip)
                        if choice is not None:
                            break
                    todo.append(choice if choice is not None else orient(g, cands[0], flip))
    outcome = check_pa_upto_convex(pa, witness, depth, supports)
    if outcome is True:
        return Verdict("equivalent", relation=witness, upto="convex", depth=depth)
    if outcome is False:
        return Verdict("inequivalent", relation=relation(witness), upto="convex", depth=depth,
                       note="a related pair is refuted")
    return Verdict("unknown", relation=relation(witness), upto="convex", depth=depth,
                   note="witness could not be certified")
