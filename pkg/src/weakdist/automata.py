"""Alternating and probabilistic automata, their determinizations and languages."""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Hashable, Iterable, Optional, Sequence

from . import laws
from .setkit import (
    ConvexSet,
    Dist,
    MachineValue,
    powerset_mult,
    render,
    sort_key,
    sorted_canon,
    support,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


# ---------------------------------------------------------------------------
# Alternating automata

@dataclass(frozen=True, eq=False)
class AltAutomaton:
    """Coalgebra X -> 2 x (PPX)^A.

    ``trans`` maps (state, letter) to a family; a missing key means the empty
    family (no existential choice), which differs from the family {{}}.
    """

    states: tuple
    alphabet: tuple
    final: frozenset = frozenset()
    trans: dict = field(default_factory=dict)

    def __post_init__(self):
        known = frozenset(self.states)
        object.__setattr__(self, "_state_set", known)
        if len(known) != len(self.states):
            raise ValueError("duplicate state names")
        if not self.final <= known:
            raise ValueError(f"final states not declared: {render(self.final - known)}")
        for (x, a), fam in self.trans.items():
            if x not in known:
                raise ValueError(f"undeclared state {x}")
            if a not in self.alphabet:
                raise ValueError(f"unknown letter {a}")
            bad = powerset_mult(fam) - known
            if bad:
                raise ValueError(f"undeclared state {render(bad)}")

    def out(self, x: Hashable) -> int:
        self._check_state(x)
        return int(x in self.final)

    def t(self, x: Hashable, a: Hashable) -> frozenset:
        self._check_state(x)
        if a not in self.alphabet:
            raise KeyError(f"unknown letter {a!r}")
        return self.trans.get((x, a), frozenset())

    def coalgebra(self, x: Hashable) -> MachineValue:
        return MachineValue(self.out(x), {a: self.t(x, a) for a in self.alphabet})

    def _check_state(self, x):
        if x not in self._state_set:
            raise KeyError(f"unknown state {x!r}")

    def to_text(self) -> str:
        lines = [
            "alphabet: " + " ".join(self.alphabet),
            "states: " + " ".join(self.states),
            "final: " + " ".join(sorted_canon(self.final)),
        ]
        for x in self.states:
            for a in self.alphabet:
                if (x, a) not in self.trans:
                    continue
                blocks = " ".join(
                    "{ " + " ".join(sorted_canon(u)) + " }" if u else "{}"
                    for u in sorted_canon(self.trans[(x, a)])
                )
                lines.append(f"trans: {x} {a} {blocks}".rstrip())
        return "\n".join(lines) + "\n"


_BRACE = re.compile(r"\{([^{}]*)\}")
_BRACKET = re.compile(r"\[([^\[\]]*)\]")


def _header_lines(text: str):
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ParseError(f"expected 'key: value', got {line!r}", no)
        key, _, rest = line.partition(":")
        yield no, key.strip(), rest.strip()


def parse_alt(text: str) -> AltAutomaton:
    alphabet: list = []
    states: list = []
    final: list = []
    trans: dict = {}
    pending = []
    for no, key, rest in _header_lines(text):
        if key == "alphabet":
            alphabet = rest.split()
        elif key == "states":
            states = rest.split()
        elif key == "final":
            final = rest.split()
        elif key == "trans":
            pending.append((no, rest))
        else:
            raise ParseError(f"unknown key {key!r}", no)
    if not alphabet:
        raise ParseError("missing alphabet")
    known = set(states)
    for no, rest in pending:
        head = rest.split("{", 1)[0]
        body = rest[len(head):]
        parts = head.split()
        if len(parts) != 2:
            raise ParseError("expected 'trans: <state> <letter> {...} ...'", no)
        x, a = parts
        if x not in known:
            raise ParseError(f"undeclared state {x}", no)
        if a not in alphabet:
            raise ParseError(f"unknown letter {a}", no)
        leftover = _BRACE.sub("", body).strip()
        if leftover:
            raise ParseError(f"unexpected text {leftover!r}", no)
        sets = []
        for m in _BRACE.finditer(body):
            members = m.group(1).split()
            for y in members:
                if y not in known:
                    raise ParseError(f"undeclared state {y}", no)
            sets.append(frozenset(members))
        trans[(x, a)] = trans.get((x, a), frozenset()) | frozenset(sets)
    for y in final:
        if y not in known:
            raise ParseError(f"undeclared final state {y}")
    return AltAutomaton(tuple(states), tuple(alphabet), frozenset(final), trans)


def alt_language(aut: AltAutomaton, x: Hashable, word: Sequence) -> int:
    """Acceptance of ``word`` from state ``x``: exists a set, all of it accepts."""
    word = tuple(word)
    for a in word:
        if a not in aut.alphabet:
            raise KeyError(f"unknown letter {a!r}")
    aut.out(x)

    @lru_cache(maxsize=None)
    def sem(state, i):
        if i == len(word):
            return aut.out(state)
        return int(any(all(sem(y, i + 1) for y in u) for u in aut.t(state, word[i])))

    return sem(x, 0)


# ---------------------------------------------------------------------------
# Determinizing once: the non-deterministic automaton over subsets

class NDA:
    """Lazily materialized determinization of an alternating automaton.

    States are frozensets of base states.  Each materialization stores the
    output and the successor family per letter; the memo table is the only
    mutable state (single writer).
    """

    def __init__(self, aut: AltAutomaton):
        self.aut = aut
        self.alphabet = aut.alphabet
        self._memo: dict = {}

    def _compute(self, u: frozenset):
        for x in u:
            self.aut.out(x)
        out = int(all(self.aut.out(x) for x in u))
        succ = {}
        for a in self.alphabet:
            result = {frozenset()}
            for x in sorted_canon(u):
                choices = laws.unions_closure(self.aut.t(x, a))
                result = {k | c for k in result for c in choices}
            succ[a] = frozenset(result)
        return out, succ

    def entry(self, u: Iterable) -> tuple:
        u = frozenset(u)
        hit = self._memo.get(u)
        if hit is None:
            hit = self._memo[u] = self._compute(u)
        return hit

    def out(self, u: Iterable) -> int:
        return self.entry(u)[0]

    def succ(self, u: Iterable, a: Hashable) -> frozenset:
        if a not in self.alphabet:
            raise KeyError(f"unknown letter {a!r}")
        return self.entry(u)[1][a]

    def materialize(self, seeds: Iterable[Iterable], max_states: Optional[int] = None) -> list:
        """Breadth-first reachable states from ``seeds`` in discovery order."""
        order = []
        seen = set()
        queue = deque()
        for s in seeds:
            s = frozenset(s)
            if s not in seen:
                seen.add(s)
                queue.append(s)
        while queue:
            u = queue.popleft()
            order.append(u)
            if max_states is not None and len(order) > max_states:
                raise RuntimeError(f"more than {max_states} states reachable")
            for a in self.alphabet:
                for v in sorted_canon(self.succ(u, a)):
                    if v not in seen:
                        seen.add(v)
                        queue.append(v)
        return order

    @property
    def materialized(self) -> list:
        return sorted_canon(self._memo)

    def edges(self, states: Iterable) -> list:
        out = []
        for u in states:
            for a in self.alphabet:
                for v in sorted_canon(self.succ(u, a)):
                    out.append((u, a, v))
        return out


def determinize_once(aut: AltAutomaton) -> NDA:
    return NDA(aut)


def composite_step(aut: AltAutomaton, u: Iterable) -> MachineValue:
    """One step of the determinized automaton built from the laws themselves.

    P c, then the conjunctive machine law, then the transposition at PX per
    letter, then union of each resulting set of sets.
    """
    u = frozenset(u)
    pc = frozenset(aut.coalgebra(x) for x in u)
    m = laws.sigma(pc, aut.alphabet)
    return MachineValue(
        m.out,
        {a: frozenset(powerset_mult(b) for b in laws.delta_pp(m.step(a))) for a in aut.alphabet},
    )


def nda_language(nda: NDA, u: Iterable, word: Sequence) -> int:
    """Existential acceptance over subset states."""
    word = tuple(word)
    for a in word:
        if a not in nda.alphabet:
            raise KeyError(f"unknown letter {a!r}")
    # forward subset simulation: the set of subset-states reachable on a prefix
    current = {frozenset(u)}
    for a in word:
        current = {v for w in current for v in nda.succ(w, a)}
        if not current:
            return 0
    return int(any(nda.out(w) for w in current))


# ---------------------------------------------------------------------------
# Determinizing twice: a standard subset construction on top

@dataclass
class DFA:
    alphabet: tuple
    initial: frozenset
    states: list
    out: dict
    trans: dict

    def accepts(self, word: Sequence) -> int:
        s = self.initial
        for a in word:
            s = self.trans[(s, a)]
        return self.out[s]


def determinize_twice(aut: AltAutomaton, seeds: Iterable[Iterable] = (), nda: Optional[NDA] = None,
                      max_states: Optional[int] = None) -> DFA:
    """Subset construction over the determinized automaton.

    A DFA state is a set of subset-states; its output is the join of their
    outputs and its a-successor collects all their a-successors.
    """
    nda = nda or NDA(aut)
    init = frozenset(frozenset(s) for s in seeds)
    states, outs, trans = [], {}, {}
    seen = {init}
    queue = deque([init])
    while queue:
        s = queue.popleft()
        states.append(s)
        if max_states is not None and len(states) > max_states:
            raise RuntimeError(f"more than {max_states} DFA states")
        m = laws.tau((MachineValue(nda.out(u), {a: nda.succ(u, a) for a in aut.alphabet}) for u in s),
                     aut.alphabet)
        outs[s] = m.out
        for a in aut.alphabet:
            t = powerset_mult(m.step(a))
            trans[(s, a)] = t
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return DFA(aut.alphabet, init, states, outs, trans)


# ---------------------------------------------------------------------------
# Export

def _dot_id(obj) -> str:
    return '"' + render(obj).replace('"', '\\"') + '"'


def to_dot(states: Sequence, outputs: dict, edges: Iterable[tuple], name: str = "automaton") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for s in states:
        shape = "doublecircle" if outputs[s] else "circle"
        lines.append(f"  {_dot_id(s)} [shape={shape}];")
    for src, a, dst in edges:
        lines.append(f'  {_dot_id(src)} -> {_dot_id(dst)} [label="{a}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def nda_to_dot(nda: NDA, seeds: Iterable[Iterable]) -> str:
    states = nda.materialize(seeds)
    return to_dot(states, {u: nda.out(u) for u in states}, nda.edges(states), "nda")


def dfa_to_dot(dfa: DFA) -> str:
    edges = [(s, a, dfa.trans[(s, a)]) for s in dfa.states for a in dfa.alphabet]
    return to_dot(dfa.states, dfa.out, edges, "dfa")


def _json_state(u) -> list:
    if isinstance(u, frozenset):
        return [_json_state(e) for e in sorted_canon(u)]
    return u


def nda_to_json(nda: NDA, seeds: Iterable[Iterable]) -> str:
    states = nda.materialize(seeds)
    doc = {
        "alphabet": list(nda.alphabet),
        "states": [{"state": _json_state(u), "out": nda.out(u)} for u in states],
        "edges": [{"from": _json_state(u), "letter": a, "to": _json_state(v)}
                  for u, a, v in nda.edges(states)],
    }
    return json.dumps(doc, indent=2) + "\n"


def dfa_to_json(dfa: DFA) -> str:
    doc = {
        "alphabet": list(dfa.alphabet),
        "initial": _json_state(dfa.initial),
        "states": [{"state": _json_state(s), "out": dfa.out[s]} for s in dfa.states],
        "edges": [{"from": _json_state(s), "letter": a, "to": _json_state(dfa.trans[(s, a)])}
                  for s in dfa.states for a in dfa.alphabet],
    }
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Probabilistic automata

@dataclass(frozen=True, eq=False)
class ProbAutomaton:
    """Coalgebra X -> (P D X)^A; no outputs.

    ``trans`` maps (state, letter) to a tuple of distributions (a finite set
    whose hull is taken by the determinization).
    """

    states: tuple
    alphabet: tuple
    trans: dict = field(default_factory=dict)

    def __post_init__(self):
        known = set(self.states)
        for (x, a), dists in self.trans.items():
            if x not in known or a not in self.alphabet:
                raise ValueError(f"bad transition key {(x, a)}")
            for d in dists:
                bad = support(d) - known
                if bad:
                    raise ValueError(f"undeclared state {render(bad)}")

    def t(self, x: Hashable, a: Hashable) -> tuple:
        if x not in self.states:
            raise KeyError(f"unknown state {x!r}")
        if a not in self.alphabet:
            raise KeyError(f"unknown letter {a!r}")
        return self.trans.get((x, a), ())

    def to_text(self) -> str:
        lines = ["alphabet: " + " ".join(self.alphabet), "states: " + " ".join(self.states)]
        for x in self.states:
            for a in self.alphabet:
                if (x, a) in self.trans:
                    blocks = " ".join(f"[ {d} ]" for d in sorted_canon(self.trans[(x, a)]))
                    lines.append(f"trans: {x} {a} {blocks}")
        return "\n".join(lines) + "\n"


def parse_dist(text: str, states: Optional[Iterable] = None, line: Optional[int] = None) -> Dist:
    """Parse ``1/2 x1 + 1/2 x2`` (optionally bracketed) or a bare state name."""
    body = text.strip()
    if body.startswith("[") and body.endswith("]"):
        body = body[1:-1].strip()
    known = set(states) if states is not None else None
    terms = [t.strip() for t in body.split("+")]
    if len(terms) == 1 and len(terms[0].split()) == 1:
        terms = ["1 " + terms[0]]
    acc = []
    for term in terms:
        parts = term.split()
        if len(parts) != 2:
            raise ParseError(f"expected '<weight> <state>', got {term!r}", line)
        w, x = parts
        try:
            p = Fraction(w)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad weight {w!r}", line) from None
        if p < 0:
            raise ParseError(f"negative weight {w}", line)
        if known is not None and x not in known:
            raise ParseError(f"undeclared state {x}", line)
        acc.append((x, p))
    try:
        return Dist(acc)
    except ValueError as exc:
        raise ParseError(str(exc), line) from None


def parse_pa(text: str) -> ProbAutomaton:
    alphabet: list = []
    states: list = []
    pending = []
    for no, key, rest in _header_lines(text):
        if key == "alphabet":
            alphabet = rest.split()
        elif key == "states":
            states = rest.split()
        elif key == "trans":
            pending.append((no, rest))
        elif key == "final":
            raise ParseError("probabilistic automata carry no outputs", no)
        else:
            raise ParseError(f"unknown key {key!r}", no)
    if not alphabet:
        raise ParseError("missing alphabet")
    known = set(states)
    trans: dict = {}
    for no, rest in pending:
        head = rest.split("[", 1)[0]
        body = rest[len(head):]
        parts = head.split()
        if len(parts) != 2:
            raise ParseError("expected 'trans: <state> <letter> [...] ...'", no)
        x, a = parts
        if x not in known:
            raise ParseError(f"undeclared state {x}", no)
        if a not in alphabet:
            raise ParseError(f"unknown letter {a}", no)
        if _BRACKET.sub("", body).strip():
            raise ParseError("unexpected text outside [ ... ] blocks", no)
        dists = [parse_dist(m.group(1), known, no) for m in _BRACKET.finditer(body)]
        old = trans.get((x, a), ())
        trans[(x, a)] = tuple(sorted_canon(set(old) | set(dists)))
    return ProbAutomaton(tuple(states), tuple(alphabet), trans)


def belief_successors(pa: ProbAutomaton, phi: Dist, a: Hashable) -> ConvexSet:
    """Convex set of next beliefs: each state in the support picks one listed
    distribution, weighted by its belief mass."""
    terms = [(x, p, pa.t(x, a)) for x, p in phi.items()]
    if any(not opts for _, _, opts in terms):
        return ConvexSet()
    gens = [{}]
    for _, p, opts in terms:
        gens = [_add(g, p, d) for g in gens for d in opts]
    return ConvexSet(Dist(g) for g in gens)


def _add(acc: dict, p: Fraction, d: Dist) -> dict:
    out = dict(acc)
    for y, q in d.items():
        out[y] = out.get(y, Fraction(0)) + p * q
    return out


def support_automaton(pa: ProbAutomaton) -> AltAutomaton:
    """Alternating automaton of supports: t_a(x) = {supp(d) : d in trans(x,a)}."""
    trans = {k: frozenset(support(d) for d in ds) for k, ds in pa.trans.items()}
    return AltAutomaton(pa.states, pa.alphabet, frozenset(), trans)


def seeded_random_automaton(rng, n_states: int, n_letters: int, p_final: float = 0.3,
                            max_sets: int = 3) -> AltAutomaton:
    """Random alternating automaton for property sweeps."""
    states = tuple(f"q{i}" for i in range(n_states))
    alphabet = tuple("ab"[:n_letters]) if n_letters <= 2 else tuple(f"l{i}" for i in range(n_letters))
    final = frozenset(s for s in states if rng.random() < p_final)
    trans = {}
    for x in states:
        for a in alphabet:
            k = rng.randint(0, max_sets)
            if k == 0 and rng.random() < 0.5:
                continue
            sets = set()
            for _ in range(k):
                size = rng.randint(0, min(2, n_states))
                sets.add(frozenset(rng.sample(states, size)))
            trans[(x, a)] = frozenset(sets)
    return AltAutomaton(states, alphabet, final, trans)


def words(alphabet: Sequence, max_len: int):
    """All words up to ``max_len``, shortest first."""
    layer = [()]
    for _ in range(max_len + 1):
        yield from layer
        layer = [w + (a,) for w in layer for a in alphabet]
