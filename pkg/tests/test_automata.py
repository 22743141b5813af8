import json
import random
from fractions import Fraction as F
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

import oracles
from weakdist.automata import (
    ParseError,
    alt_language,
    belief_successors,
    composite_step,
    determinize_once,
    determinize_twice,
    nda_language,
    nda_to_dot,
    nda_to_json,
    parse_alt,
    parse_dist,
    parse_pa,
    seeded_random_automaton,
    support_automaton,
    words,
)
from weakdist.setkit import ConvexSet, Dist, convex_equal, hull_member, mix, subsets

GOLDEN = Path(__file__).parent / "golden"


def S(*xs):
    return frozenset(xs)


# Every arrow of the once-determinized c0 from {x0} and {y0}.
C0_ARROWS = {
    (S("x0"), S("x1")), (S("x0"), S("x3")), (S("x0"), S("x1", "x3")),
    (S("x1"), S("x1", "x2")), (S("x1"), S("x2", "x3")), (S("x1"), S("x1", "x2", "x3")),
    (S("x1", "x2"), S("x1", "x2")), (S("x1", "x2"), S("x2", "x3")), (S("x1", "x2"), S("x1", "x2", "x3")),
    (S("y0"), S("y3")), (S("y0"), S("y1", "y2")), (S("y0"), S("y1", "y2", "y3")),
    (S("y1", "y2"), S("y1", "y2")), (S("y1", "y2"), S("y2", "y3")), (S("y1", "y2"), S("y1", "y2", "y3")),
}


# -- parsing ----------------------------------------------------------------

def test_c0_parses_with_no_final_states(c0):
    assert all(c0.out(s) == 0 for s in c0.states)
    assert c0.t("x1", "a") == S(S("x1", "x2"), S("x2", "x3"))
    assert c0.t("x3", "a") == frozenset()


def test_explicit_empty_set_differs_from_absent_line():
    aut = parse_alt("alphabet: a\nstates: z w\ntrans: z a {}\n")
    assert aut.t("z", "a") == S(frozenset())
    assert aut.t("w", "a") == frozenset()


def test_duplicate_lines_accumulate():
    aut = parse_alt("alphabet: a\nstates: p q\ntrans: p a {q}\ntrans: p a {p q}\n")
    assert aut.t("p", "a") == S(S("q"), S("p", "q"))


@pytest.mark.parametrize("text, fragment", [
    ("alphabet: a\nstates: p\ntrans: p a {q}\n", "undeclared state q"),
    ("alphabet: a\nstates: p\ntrans: p b {p}\n", "unknown letter b"),
    ("alphabet: a\nstates: p\ntrans: p a {p} junk\n", "unexpected text"),
    ("alphabet: a\nstates: p\nnonsense\n", "line 3"),
    ("states: p\n", "missing alphabet"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_alt(text)


def test_text_round_trip(c0):
    again = parse_alt(c0.to_text())
    assert again.states == c0.states and again.trans == c0.trans


# -- determinizing once -------------------------------------------------------

def test_c0_arrows_exactly(c0_nda):
    states = c0_nda.materialize([S("x0"), S("y0")])
    edges = {(u, v) for u, _, v in c0_nda.edges(states)}
    assert edges == C0_ARROWS
    assert set(states) == {s for e in C0_ARROWS for s in e}


def test_c0_dot_is_byte_stable(c0):
    text = nda_to_dot(determinize_once(c0), [S("x0"), S("y0")])
    assert text == (GOLDEN / "c0_determinized.dot").read_text()
    assert '"{x0}" -> "{x1,x3}" [label="a"];' in text


def test_json_export(c0_nda):
    doc = json.loads(nda_to_json(c0_nda, [S("x0")]))
    assert {"from": ["x0"], "letter": "a", "to": ["x1", "x3"]} in doc["edges"]


@pytest.mark.parametrize("u, succ", [
    (S("x0"), {S("x1"), S("x3"), S("x1", "x3")}),
    (S("x2"), {S("x2")}),
    (S("y1", "y2"), {S("y1", "y2"), S("y2", "y3"), S("y1", "y2", "y3")}),
    (S(), {S()}),
])
def test_cplus_examples(c0_nda, u, succ):
    assert c0_nda.succ(u, "a") == frozenset(succ)
    assert c0_nda.out(u) == (1 if not u else 0)


def test_cplus_matches_composite_and_product_formula(c0):
    nda = determinize_once(c0)
    for u in subsets(c0.states):
        if len(u) > 4:
            continue
        m = composite_step(c0, u)
        assert m.step("a") == nda.succ(u, "a") == oracles.cplus_successors(c0, u, "a")
        assert m.out == nda.out(u)


def random_automata(count=100, seed=2024):
    rng = random.Random(seed)
    return [seeded_random_automaton(rng, rng.randint(1, 4), rng.randint(1, 2)) for _ in range(count)]


def test_cplus_matches_product_formula_random():
    for aut in random_automata(40, seed=5):
        nda = determinize_once(aut)
        for u in subsets(aut.states):
            for a in aut.alphabet:
                assert nda.succ(u, a) == oracles.cplus_successors(aut, u, a)


def test_materialized_states_bounded_by_powerset():
    for aut in random_automata(50, seed=9):
        nda = determinize_once(aut)
        reach = nda.materialize([S(s) for s in aut.states])
        assert len(reach) <= 2 ** len(aut.states)


def test_materialize_budget():
    aut = parse_alt("alphabet: a\nstates: p q r\ntrans: p a {q} {r}\ntrans: q a {p}\ntrans: r a {p q}\n")
    with pytest.raises(RuntimeError):
        determinize_once(aut).materialize([S("p")], max_states=1)


# -- languages --------------------------------------------------------------

def test_c0_language_examples(c0, c0_nda):
    assert all(alt_language(c0, s, ()) == 0 for s in c0.states)
    assert alt_language(c0, "x3", ("a",)) == 0
    assert nda_language(c0_nda, S("x0"), "aa") == 0
    assert nda_language(c0_nda, S(), ()) == 1
    for w in words(c0.alphabet, 5):
        assert nda_language(c0_nda, S("x1", "x3"), w) == alt_language(c0, "x1", w) & alt_language(c0, "x3", w)


def test_empty_universal_set_accepts():
    aut = parse_alt("alphabet: a\nstates: z\ntrans: z a {}\n")
    assert alt_language(aut, "z", "a") == 1
    assert alt_language(aut, "z", "") == 0
    dfa = determinize_twice(aut, [S("z")])
    for w in words("a", 5):
        assert dfa.accepts(w) == int(len(w) > 0)


def test_unknown_letter_raises(c0, c0_nda):
    with pytest.raises(KeyError):
        alt_language(c0, "x0", "b")
    with pytest.raises(KeyError):
        nda_language(c0_nda, S("x0"), "b")


def test_alt_language_matches_backward_oracle():
    for aut in random_automata(60, seed=11):
        for w in words(aut.alphabet, 4):
            good = oracles.accepting_after(aut, w)
            for s in aut.states:
                assert alt_language(aut, s, w) == int(s in good)


def test_determinized_language_is_conjunction(c0):
    # the once-determinized language of U is the meet over its members
    for aut in [c0] + random_automata(30, seed=13):
        nda = determinize_once(aut)
        for u in list(subsets(aut.states))[:20]:
            for w in words(aut.alphabet, 4):
                assert nda_language(nda, u, w) == int(all(alt_language(aut, s, w) for s in u))


def test_determinize_twice_agrees_with_nda(c0):
    for aut in [c0] + random_automata(30, seed=17):
        nda = determinize_once(aut)
        for s in aut.states:
            dfa = determinize_twice(aut, [S(s)], nda)
            for w in words(aut.alphabet, 5):
                assert dfa.accepts(w) == nda_language(nda, S(s), w)


def test_c0_twice_is_finite_and_empty(c0):
    dfa = determinize_twice(c0, [S("x0"), S("y0")])
    assert all(v == 0 for v in dfa.out.values())
    assert len(dfa.states) < 2 ** 2 ** 8


def test_empty_seed_dfa():
    aut = parse_alt("alphabet: a\nstates: p\n")
    dfa = determinize_twice(aut, [])
    assert dfa.initial == frozenset()
    assert dfa.out[dfa.initial] == 0
    # seeding with the empty subset-state: output is its empty conjunction
    dfa = determinize_twice(aut, [S()])
    assert dfa.initial == frozenset({S()})
    assert dfa.out[dfa.initial] == 1


# -- probabilistic automata ---------------------------------------------------

def test_parse_pa_examples():
    pa = parse_pa("alphabet: a\nstates: x0 x1 x2 x3\ntrans: x0 a [ 1/2 x1 + 1/2 x2 ] [ 1 x3 ]\n")
    assert set(pa.t("x0", "a")) == {Dist({"x1": F(1, 2), "x2": F(1, 2)}), Dist.dirac("x3")}
    assert pa.t("x1", "a") == ()
    with pytest.raises(ParseError, match="mass 2/3 ≠ 1"):
        parse_pa("alphabet: a\nstates: p q\ntrans: p a [ 1/3 p + 1/3 q ]\n")
    with pytest.raises(ParseError):
        parse_pa("alphabet: a\nstates: p q\ntrans: p a [ -1/2 p + 3/2 q ]\n")
    with pytest.raises(ParseError):
        parse_pa("alphabet: a\nstates: p\nfinal: p\n")


def test_parse_dist_forms():
    assert parse_dist("x1") == Dist.dirac("x1")
    assert parse_dist("1/2 x + 1/2 y") == Dist({"x": F(1, 2), "y": F(1, 2)})


def test_pa_round_trip(c0_pa):
    again = parse_pa(c0_pa.to_text())
    assert again.trans == c0_pa.trans


def test_pa_analogue_supports_reproduce_c0(c0, c0_pa):
    supp = support_automaton(c0_pa)
    for s in c0.states:
        assert supp.t(s, "a") == c0.t(s, "a")


def test_belief_successor_examples():
    u, v = Dist.dirac("u"), Dist.dirac("v")
    pa = parse_pa("alphabet: a\nstates: x y u v\ntrans: x a [1 u]\ntrans: y a [1 u] [1 v]\n")
    assert belief_successors(pa, Dist.dirac("y"), "a") == ConvexSet([u, v])
    got = belief_successors(pa, Dist({"x": F(1, 2), "y": F(1, 2)}), "a")
    assert convex_equal(got, ConvexSet([u, Dist({"u": F(1, 2), "v": F(1, 2)})]))
    assert belief_successors(pa, Dist({"x": F(1, 2), "u": F(1, 2)}), "a") == ConvexSet()


def test_belief_successors_match_product(c0_pa):
    rng = random.Random(4)
    for _ in range(100):
        pts = rng.sample(c0_pa.states, rng.randint(1, 3))
        w = [F(rng.randint(1, 4)) for _ in pts]
        phi = Dist({p: q / sum(w) for p, q in zip(pts, w)})
        got = {frozenset(g.items()) for g in belief_successors(c0_pa, phi, "a")}
        assert got == oracles.belief_generators(c0_pa, phi, "a")


@given(st.integers(0, 6), st.integers(0, 2), st.integers(0, 2))
def test_belief_successors_affine(k, i, j):
    pa = parse_pa("alphabet: a\nstates: p q r\ntrans: p a [1 q] [1/2 p + 1/2 r]\n"
                  "trans: q a [1 r] [1 p]\ntrans: r a [1/3 p + 2/3 q]\n")
    phis = [Dist({s: F(1, 3) for s in pa.states}), Dist.dirac("r"), Dist({"p": F(1, 2), "q": F(1, 2)})]
    lam = F(k, 6)
    combo = mix([(lam, phis[i]), (1 - lam, phis[j])])
    gi, gj = belief_successors(pa, phis[i], "a"), belief_successors(pa, phis[j], "a")
    pointwise = ConvexSet(mix([(lam, g), (1 - lam, h)]) for g in gi for h in gj)
    for g in belief_successors(pa, combo, "a"):
        assert hull_member(g, pointwise)
