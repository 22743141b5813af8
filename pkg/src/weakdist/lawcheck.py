"""Pointwise checks of the law axioms, Yang-Baxter, supp and naturality squares.

A diagram is data: two composite paths and an equality on their values.
Input spaces are enumerated exhaustively when small enough and sampled
with a recorded seed otherwise.  Failures report the smallest failing input
(in canonical order) together with both path values, so every report can be
replayed.
"""

from __future__ import annotations

import itertools
import operator
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Optional, Sequence

from . import laws
from .setkit import (
    ConvexSet,
    Dist,
    MachineValue,
    convex_equal,
    direct_image,
    dist_mult,
    dist_pushforward,
    extreme_points,
    family_image,
    machine_values,
    powerset_mult,
    render,
    sort_key,
    sorted_canon,
    subsets,
    support,
    support_image,
)

EXHAUSTIVE_LIMIT = 1 << 16


@dataclass(frozen=True)
class LawCheckConfig:
    max_size: int = 2
    samples: int = 1000
    seed: int = 0
    sample_size: int = 3
    max_denominator: int = 8
    exhaustive_limit: int = EXHAUSTIVE_LIMIT


@dataclass(frozen=True)
class Counterexample:
    input: Any
    path_a: Any
    path_b: Any

    def render(self) -> str:
        return f"{_show(self.input)} ↦ {_show(self.path_a)} ≠ {_show(self.path_b)}"


@dataclass(frozen=True)
class DiagramReport:
    diagram_id: str
    carrier_size: int
    mode: str  # "exhaustive" or "sampled(n)"
    verdict: str  # "pass" or "fail"
    counterexample: Optional[Counterexample] = None
    expected: str = "pass"
    seed: Optional[int] = None
    checked: int = 0

    def __post_init__(self):
        if self.verdict == "fail" and self.counterexample is None:
            raise ValueError("failing report needs a counterexample")

    @property
    def as_expected(self) -> bool:
        return self.verdict == self.expected

    def to_line(self) -> str:
        parts = [self.diagram_id, f"|X|={self.carrier_size}", self.mode]
        verdict = "pass" if self.verdict == "pass" else "FAIL"
        if self.verdict != self.expected:
            verdict += " (unexpected)"
        elif self.verdict == "fail":
            verdict += " (expected)"
        parts.append(verdict)
        if self.seed is not None:
            parts.append(f"seed={self.seed}")
        line = "\t".join(parts)
        if self.counterexample is not None:
            line += "\twitness: " + self.counterexample.render()
        return line


def _show(obj) -> str:
    if isinstance(obj, Dist):
        return f"[{obj}]"
    if isinstance(obj, (ConvexSet, MachineValue)):
        return str(obj)
    if isinstance(obj, frozenset) and any(isinstance(e, (Dist, ConvexSet, MachineValue)) for e in obj):
        return "{" + ", ".join(_show(e) for e in sorted_canon(obj)) + "}"
    return render(obj)


@dataclass(frozen=True)
class Diagram:
    diagram_id: str
    path_a: Callable
    path_b: Callable
    equal: Callable = operator.eq
    fails_from: Optional[int] = None  # carrier size from which failure is expected

    def expected(self, n: int) -> str:
        return "fail" if self.fails_from is not None and n >= self.fails_from else "pass"

    def evaluate(self, x) -> tuple:
        return self.path_a(x), self.path_b(x)

    def replay(self, cex: Counterexample) -> bool:
        """True when the recorded input still separates the two paths."""
        a, b = self.evaluate(cex.input)
        return not self.equal(a, b)


@dataclass(frozen=True)
class InputSpace:
    """Inputs at carrier size n: a count, an optional enumeration, a sampler."""

    count: Callable[[int], int]
    enumerate: Optional[Callable[[int], Iterable]] = None
    sample: Optional[Callable[[random.Random, int], Any]] = None


def run_diagram(diagram: Diagram, space: InputSpace, n: int, cfg: LawCheckConfig = LawCheckConfig()) -> DiagramReport:
    exhaustive = space.enumerate is not None and space.count(n) <= cfg.exhaustive_limit
    if exhaustive:
        inputs: Iterable = space.enumerate(n)
        mode, seed = "exhaustive", None
    else:
        if space.sample is None:
            raise ValueError(f"{diagram.diagram_id}: space too large and no sampler")
        rng = random.Random(f"{cfg.seed}:{diagram.diagram_id}:{n}")
        inputs = (space.sample(rng, n) for _ in range(cfg.samples))
        mode, seed = f"sampled({cfg.samples})", cfg.seed
    worst = None
    checked = 0
    for x in inputs:
        checked += 1
        a, b = diagram.evaluate(x)
        if not diagram.equal(a, b):
            if worst is None or sort_key(_key(x)) < sort_key(_key(worst.input)):
                worst = Counterexample(x, a, b)
    return DiagramReport(
        diagram.diagram_id, n, mode, "fail" if worst else "pass", worst,
        diagram.expected(n), seed, checked,
    )


def _key(x):
    return x if not isinstance(x, list) else tuple(x)


# ---------------------------------------------------------------------------
# Carriers and samplers

def carrier(n: int) -> list:
    return list(range(1, n + 1))


def _all_subsets(items: Sequence) -> list:
    return list(subsets(items))


def _powerset_tower(n: int, depth: int) -> list:
    """All elements of P^depth X in canonical order."""
    level = carrier(n)
    for _ in range(depth):
        level = _all_subsets(level)
    return level


def _random_subset(rng: random.Random, items: Sequence, max_members: Optional[int] = None) -> frozenset:
    items = list(items)
    if max_members is None:
        return frozenset(x for x in items if rng.random() < 0.5)
    k = rng.randint(0, min(max_members, len(items)))
    return frozenset(rng.sample(items, k))


def _random_nested(rng: random.Random, n: int, depth: int, width: int = 3) -> frozenset:
    """Element of P^depth X with at most ``width`` members at each outer level.

    The innermost level is a uniform subset of X; outer levels are small so
    that law evaluation stays cheap at |X| = 3.
    """
    if depth == 1:
        return _random_subset(rng, carrier(n))
    k = rng.randint(0, width)
    return frozenset(_random_nested(rng, n, depth - 1, width) for _ in range(k))


def random_weights(rng: random.Random, k: int, max_denominator: int = 8) -> list:
    """k positive fractions summing to 1, with common denominator <= bound."""
    if k < 1:
        raise ValueError("need at least one weight")
    d = rng.randint(k, max(k, max_denominator))
    cuts = sorted(rng.sample(range(1, d), k - 1)) if k > 1 else []
    bounds = [0] + cuts + [d]
    return [Fraction(bounds[i + 1] - bounds[i], d) for i in range(k)]


def random_dist(rng: random.Random, items: Sequence, max_terms: int = 3, max_denominator: int = 8) -> Dist:
    items = list(items)
    k = rng.randint(1, min(max_terms, len(items)))
    chosen = rng.sample(items, k)
    return Dist(zip(chosen, random_weights(rng, k, max_denominator)))


def random_formal_sum(rng: random.Random, n: int, max_terms: int = 3, max_denominator: int = 8,
                      allow_empty: bool = True) -> Dist:
    sets = _all_subsets(carrier(n))
    if not allow_empty:
        sets = [s for s in sets if s]
    return random_dist(rng, sets, max_terms, max_denominator)


# ---------------------------------------------------------------------------
# PP => PP

def _pp_mu_t_a(big):
    return frozenset(powerset_mult(b) for b in laws.delta_pp(frozenset(laws.delta_pp(f) for f in big)))


def _pp_mu_t_b(big):
    return laws.delta_pp(powerset_mult(big))


def _pp_mu_s_a(big):
    return powerset_mult(laws.delta_pp(b) for b in laws.delta_pp(big))


def _pp_mu_s_b(big):
    return laws.delta_pp(frozenset(powerset_mult(f) for f in big))


def _singletons(a):
    return frozenset(frozenset([x]) for x in a)


PP_DIAGRAMS = {
    "(μT)": Diagram("(μT)", _pp_mu_t_a, _pp_mu_t_b),
    "(μS)": Diagram("(μS)", _pp_mu_s_a, _pp_mu_s_b),
    "(ηS)": Diagram("(ηS)", lambda a: laws.delta_pp(_singletons(a)), lambda a: frozenset([a])),
    "(ηT)": Diagram("(ηT)", lambda a: laws.delta_pp(frozenset([a])), _singletons, fails_from=2),
}


def _tower_space(depth: int) -> InputSpace:
    return InputSpace(
        count=lambda n: _tower_count(n, depth),
        enumerate=lambda n: _powerset_tower(n, depth),
        sample=lambda rng, n: _random_nested(rng, n, depth),
    )


def _tower_count(n: int, depth: int) -> int:
    c = n
    for _ in range(depth):
        if c > 64:
            return 1 << 65
        c = 1 << c
    return c


PP_SPACES = {
    "(μT)": _tower_space(3),
    "(μS)": _tower_space(3),
    "(ηS)": _tower_space(1),
    "(ηT)": _tower_space(1),
}


# ---------------------------------------------------------------------------
# DP => PD (convex)

def _dp_mu_t_a(big: Dist) -> ConvexSet:
    # only extreme points of each inner set matter for the hull of the result
    outer = dist_pushforward(lambda s: frozenset(extreme_points(laws.delta_dp(s)).generators), big)
    return laws.delta_dp(outer).map(dist_mult)


def _dp_mu_t_b(big: Dist) -> ConvexSet:
    return laws.delta_dp(dist_mult(big))


def _dp_mu_s_a(fsum: Dist) -> ConvexSet:
    gens = []
    for g in laws.delta_dp(fsum):
        gens.extend(laws.delta_dp(g).generators)
    return ConvexSet(gens)


def _dp_mu_s_b(fsum: Dist) -> ConvexSet:
    return laws.delta_dp(dist_pushforward(powerset_mult, fsum))


def _finite_equals_convex(cset: ConvexSet, points: frozenset) -> bool:
    """A finite set equals a convex hull only if the hull has those points and no others."""
    ext = extreme_points(cset).generators
    if len(ext) > 1:
        return False
    return frozenset(ext) == frozenset(points)


DP_DIAGRAMS = {
    "(μT)": Diagram("(μT)", _dp_mu_t_a, _dp_mu_t_b, convex_equal),
    "(μS)": Diagram("(μS)", _dp_mu_s_a, _dp_mu_s_b, convex_equal),
    "(ηS)": Diagram(
        "(ηS)",
        lambda phi: laws.delta_dp(dist_pushforward(lambda x: frozenset([x]), phi)),
        lambda phi: ConvexSet([phi]),
        convex_equal,
    ),
    "(ηT)": Diagram(
        "(ηT)",
        lambda a: laws.delta_dp(Dist.dirac(a)),
        lambda a: frozenset(Dist.dirac(x) for x in a),
        _finite_equals_convex,
        fails_from=2,
    ),
}


def _dp_spaces(cfg: LawCheckConfig) -> dict:
    big = 1 << 65
    d = cfg.max_denominator
    return {
        "(μT)": InputSpace(
            count=lambda n: big,
            sample=lambda rng, n: random_dist(
                rng, [random_formal_sum(rng, n, max_denominator=d) for _ in range(3)], 3, d),
        ),
        "(μS)": InputSpace(
            count=lambda n: big,
            sample=lambda rng, n: random_dist(
                rng, list({_random_nested(rng, n, 2) for _ in range(4)}), 3, d),
        ),
        "(ηS)": InputSpace(count=lambda n: big, sample=lambda rng, n: random_dist(rng, carrier(n), 3, d)),
        "(ηT)": _tower_space(1),
    }


def check_weak_law_axioms(law: str, max_size: int = 2, samples: int = 1000, seed: int = 0,
                          cfg: Optional[LawCheckConfig] = None) -> list:
    """One report per axiom diagram and carrier size 1..max_size.

    For the convex law only sampling is possible at every size; (ηT) on it
    runs over the finite space PX. A given ``cfg`` overrides the other arguments.
    """
    cfg = cfg or LawCheckConfig(max_size=max_size, samples=samples, seed=seed)
    max_size = cfg.max_size
    if max_size < 1:
        raise ValueError("max_size must be at least 1")
    if law in ("pp", "delta_pp"):
        diagrams, spaces = PP_DIAGRAMS, PP_SPACES
    elif law in ("dp", "delta_dp"):
        diagrams, spaces = DP_DIAGRAMS, _dp_spaces(cfg)
    else:
        raise ValueError(f"unknown law {law!r}")
    reports = []
    for did, diag in diagrams.items():
        for n in range(1, max_size + 1):
            reports.append(run_diagram(diag, spaces[did], n, cfg))
    return reports


# ---------------------------------------------------------------------------
# Yang-Baxter hexagon on PP(MX)

def yang_baxter_paths(alphabet: Sequence) -> Diagram:
    """Mδ ∘ σ_P ∘ Pτ against τ_P ∘ Pσ ∘ δ_M on families of sets of machine values."""
    alphabet = list(alphabet)

    def path_a(fam):
        mids = [laws.tau(s, alphabet) for s in fam]
        return laws.sigma(mids, alphabet).map(laws.delta_pp)

    def path_b(fam):
        mids = [laws.sigma(s, alphabet) for s in laws.delta_pp(fam)]
        return laws.tau(mids, alphabet)

    return Diagram("(YB)", path_a, path_b)


def _yb_space(alphabet: Sequence) -> InputSpace:
    def values(n):
        return machine_values(carrier(n), list(alphabet))

    def count(n):
        m = len(values(n))
        return 1 << (1 << m) if m <= 5 else 1 << 65

    def enum(n):
        sets = _all_subsets(values(n))
        return _all_subsets(sets) if len(sets) <= 16 else iter(())

    def sample(rng, n):
        vals = values(n)
        k = rng.randint(0, 3)
        return frozenset(_random_subset(rng, vals, 3) for _ in range(k))

    return InputSpace(count, enum, sample)


def check_yang_baxter(max_state_size: int = 2, alphabet_size: int = 1, samples: int = 1000,
                      seed: int = 0, cfg: Optional[LawCheckConfig] = None) -> list:
    """Reports for carrier sizes 1..max_state_size."""
    if max_state_size < 1 or alphabet_size < 1:
        raise ValueError("sizes must be at least 1")
    cfg = cfg or LawCheckConfig(samples=samples, seed=seed)
    alphabet = [chr(ord("a") + i) for i in range(alphabet_size)]
    diag = yang_baxter_paths(alphabet)
    space = _yb_space(alphabet)
    return [run_diagram(diag, space, n, cfg) for n in range(1, max_state_size + 1)]


# ---------------------------------------------------------------------------
# supp : D => P is a morphism of laws

def supp_paths() -> Diagram:
    return Diagram(
        "(supp)",
        lambda s: laws.delta_pp(frozenset(a for a, _ in s.items())),
        lambda s: support_image(laws.delta_dp(s)),
    )


def check_supp_morphism(max_size: int = 3, samples: int = 500, seed: int = 0,
                        cfg: Optional[LawCheckConfig] = None) -> list:
    cfg = cfg or LawCheckConfig(samples=samples, seed=seed)
    d = cfg.max_denominator
    space = InputSpace(count=lambda n: 1 << 65,
                       sample=lambda rng, n: random_formal_sum(rng, n, max_denominator=d))
    diag = supp_paths()
    return [run_diagram(diag, space, n, cfg) for n in range(1, max_size + 1)]


# ---------------------------------------------------------------------------
# Naturality squares

def _random_map(rng: random.Random, src: Sequence, dst: Sequence) -> dict:
    return {x: rng.choice(list(dst)) for x in src}


def naturality_diagram(law: str, f: dict, alphabet: Sequence = ("a",)) -> Diagram:
    """law_Y ∘ (its input functor applied to f) against (output functor of f) ∘ law_X."""
    g = f.__getitem__
    if law in ("pp", "delta_pp"):
        return Diagram(
            "(nat)",
            lambda fam: laws.delta_pp(family_image(g, fam)),
            lambda fam: family_image(g, laws.delta_pp(fam)),
        )
    if law in ("dp", "delta_dp"):
        return Diagram(
            "(nat)",
            lambda s: laws.delta_dp(dist_pushforward(lambda a: direct_image(g, a), s)),
            lambda s: laws.delta_dp(s).map(lambda phi: dist_pushforward(g, phi)),
            convex_equal,
        )
    if law in ("sigma", "tau"):
        op = laws.sigma if law == "sigma" else laws.tau
        alphabet = list(alphabet)
        return Diagram(
            "(nat)",
            lambda s: op([m.map(g) for m in s], alphabet),
            lambda s: op(s, alphabet).map(lambda t: direct_image(g, t)),
        )
    raise ValueError(f"unknown law {law!r}")


def check_naturality(law: str, max_size: int = 3, samples: int = 200, seed: int = 0) -> DiagramReport:
    """Sampled naturality square with random maps X -> Y, |X|, |Y| <= max_size."""
    rng = random.Random(f"{seed}:nat:{law}")
    worst = None
    for _ in range(samples):
        n, m = rng.randint(1, max_size), rng.randint(1, max_size)
        f = _random_map(rng, carrier(n), carrier(m))
        diag = naturality_diagram(law, f)
        if law in ("pp", "delta_pp"):
            x = _random_nested(rng, n, 2)
        elif law in ("dp", "delta_dp"):
            x = random_formal_sum(rng, n)
        else:
            vals = machine_values(carrier(n), ["a"])
            x = _random_subset(rng, vals, 3)
        a, b = diag.evaluate(x)
        if not diag.equal(a, b):
            cand = Counterexample((tuple(sorted(f.items())), x), a, b)
            if worst is None or sort_key(cand.input) < sort_key(worst.input):
                worst = cand
    return DiagramReport(f"(nat:{law})", max_size, f"sampled({samples})",
                         "fail" if worst else "pass", worst, "pass", seed, samples)


# ---------------------------------------------------------------------------
# CNF / DNF

def cnf(fam: frozenset, alpha: dict) -> bool:
    return all(any(alpha[x] for x in u) for u in fam)


def dnf(fam: frozenset, alpha: dict) -> bool:
    return any(all(alpha[x] for x in v) for v in fam)


def check_cnf_dnf(max_vars: int = 3) -> list:
    """Truth-table check that a CNF over a family equals the DNF over its transpose."""
    if max_vars > 4:
        raise ValueError("max_vars must be at most 4")
    reports = []
    for n in range(0, max_vars + 1):
        xs = carrier(n)
        assignments = [dict(zip(xs, bits)) for bits in itertools.product((False, True), repeat=n)]
        worst = None
        checked = 0
        for fam in _all_subsets(_all_subsets(xs)):
            dual = laws.delta_pp(fam)
            for alpha in assignments:
                checked += 1
                if cnf(fam, alpha) != dnf(dual, alpha):
                    key = (fam, tuple(sorted(alpha.items())))
                    if worst is None or sort_key(key) < sort_key(worst.input):
                        worst = Counterexample(key, cnf(fam, alpha), dnf(dual, alpha))
        reports.append(DiagramReport("(cnf=dnf)", n, "exhaustive", "fail" if worst else "pass",
                                     worst, "pass", None, checked))
    return reports
