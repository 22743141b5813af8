import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

import oracles
from strategies import dists, families, finsets, maps
from weakdist.setkit import (
    ConvexSet,
    Dist,
    MachineValue,
    convex_equal,
    direct_image,
    dist_mult,
    dist_pushforward,
    extreme_points,
    family_image,
    formal_sum,
    hull_member,
    machine_values,
    mix,
    nonneg_solution,
    powerset_mult,
    powerset_unit,
    render,
    sort_key,
    sorted_canon,
    subsets,
    support,
    support_image,
)

x, y, z = Dist.dirac("x"), Dist.dirac("y"), Dist.dirac("z")


def half(a, b):
    return Dist({a: F(1, 2), b: F(1, 2)})


# -- canonical order and rendering ------------------------------------------

def test_sets_order_by_size_then_members():
    items = [frozenset({"x2"}), frozenset(), frozenset({"x1", "x3"}), frozenset({"x10"}), frozenset({"x1"})]
    assert [render(s) for s in sorted_canon(items)] == ["{}", "{x1}", "{x2}", "{x10}", "{x1,x3}"]


def test_render_nested_and_dist():
    assert render(frozenset({frozenset({1}), frozenset()})) == "{{},{1}}"
    assert str(Dist({"x": F(1, 2), "y": F(1, 2)})) == "1/2 x + 1/2 y"


def test_sort_key_rejects_unknown_types():
    with pytest.raises(TypeError):
        sort_key(3.5)


# -- powerset monad ---------------------------------------------------------

def test_powerset_unit():
    assert powerset_unit("x1") == frozenset({"x1"})
    assert len(powerset_unit("a")) == 1
    with pytest.raises(KeyError):
        powerset_unit("q", universe=["x"])


@pytest.mark.parametrize("fam, expected", [
    ({frozenset({1}), frozenset({2, 3})}, {1, 2, 3}),
    (set(), set()),
    ({frozenset({1, 2}), frozenset({2, 3}), frozenset({1, 2, 3})}, {1, 2, 3}),
])
def test_powerset_mult(fam, expected):
    assert powerset_mult(frozenset(fam)) == frozenset(expected)


def test_direct_image_examples():
    f = {1: "a", 2: "a"}
    assert direct_image(f, {1, 2}) == frozenset({"a"})
    assert direct_image(lambda v: v, {1, 2}) == frozenset({1, 2})
    assert family_image(f, {frozenset({1}), frozenset({2})}) == frozenset({frozenset({"a"})})


@pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
def test_powerset_monad_laws_exhaustive(n):
    xs = list(range(n))
    px = list(subsets(xs))
    for s in px:
        assert powerset_mult(frozenset(powerset_unit(v) for v in s)) == s  # mu . P eta
        assert powerset_mult(powerset_unit(s)) == s  # mu . eta P
    ppx = list(subsets(px)) if n <= 2 else [frozenset(random.Random(n * 7 + i).sample(px, 3)) for i in range(200)]
    rng = random.Random(n)
    for _ in range(200):
        big = frozenset(rng.sample(ppx, min(3, len(ppx))))
        assert powerset_mult(frozenset(powerset_mult(f) for f in big)) == powerset_mult(powerset_mult(big))


# -- distributions ----------------------------------------------------------

def test_dist_validation():
    with pytest.raises(ValueError, match="mass 2/3 ≠ 1"):
        Dist({"x": F(1, 3), "y": F(1, 3)})
    with pytest.raises(ValueError):
        Dist({"x": F(3, 2), "y": F(-1, 2)})
    assert Dist({"x": 1, "y": 0}) == x
    assert x["y"] == 0


def test_formal_sum_requires_distinct_sets():
    with pytest.raises(ValueError):
        formal_sum([(F(1, 2), {"x"}), (F(1, 2), {"x"})])


def test_pushforward_examples():
    f = {1: "a", 2: "a"}
    assert dist_pushforward(f, Dist({1: F(1, 2), 2: F(1, 2)})) == Dist.dirac("a")
    phi = half("x", "y")
    assert dist_pushforward(lambda v: v, phi) == phi
    assert dist_pushforward({"x": "q"}, x) == Dist.dirac("q")


def test_dist_mult_examples():
    big = Dist({x: F(1, 2), half("x", "y"): F(1, 2)})
    assert dist_mult(big) == Dist({"x": F(3, 4), "y": F(1, 4)})
    phi = half("x", "z")
    assert dist_mult(Dist.dirac(phi)) == phi


@given(st.lists(dists(), min_size=1, max_size=4, unique=True), st.data())
def test_dist_mult_preserves_mass(inner, data):
    from strategies import weights
    w = data.draw(weights(len(inner)))
    flat = dist_mult(Dist(zip(inner, w)))
    assert sum(p for _, p in flat.items()) == 1


def test_support_examples():
    assert support(half("x", "y")) == frozenset({"x", "y"})
    assert support(x) == frozenset({"x"})


@given(dists(), maps())
def test_support_is_natural(phi, f):
    assert support(dist_pushforward(f, phi)) == direct_image(f, support(phi))


def test_mix():
    assert mix([(F(1, 2), x), (F(1, 2), y)]) == half("x", "y")


# -- linear feasibility -----------------------------------------------------

def test_nonneg_solution_small_systems():
    cols = [{"a": 1}, {"a": 1, "b": 1}]
    sol = nonneg_solution(cols, {"a": 2, "b": 1})
    assert sol == [1, 1]
    assert nonneg_solution(cols, {"a": 1, "b": 2}) is None
    assert nonneg_solution([{"a": -1}], {"a": 1}) is None
    assert nonneg_solution([{"a": 1}], {"b": 1}) is None
    assert nonneg_solution([], {}) == []


@given(st.lists(st.dictionaries(st.sampled_from("abc"), st.integers(-3, 3), max_size=3), min_size=1, max_size=5),
       st.lists(st.integers(0, 3), min_size=5, max_size=5))
def test_nonneg_solution_finds_constructed_points(cols, coeffs):
    target = {}
    for c, k in zip(cols, coeffs):
        for r, v in c.items():
            target[r] = target.get(r, 0) + k * v
    sol = nonneg_solution(cols, target)
    assert sol is not None and all(v >= 0 for v in sol)
    for r in set(target) | {r for c in cols for r in c}:
        assert sum(s * c.get(r, 0) for s, c in zip(sol, cols)) == target.get(r, 0)


# -- convex sets ------------------------------------------------------------

def test_hull_member_examples():
    assert hull_member(half("x", "y"), ConvexSet([x, y]))
    third = Dist({"x": F(1, 3), "y": F(2, 3)})
    assert not hull_member(third, ConvexSet([x, half("x", "y")]))
    c = ConvexSet([x, half("y", "z")])
    assert all(hull_member(g, c) for g in c)
    assert not hull_member(x, ConvexSet())


def test_convex_set_canonical_and_typed():
    assert ConvexSet([y, x, x]).generators == (x, y)
    with pytest.raises(TypeError):
        ConvexSet([{"x": 1}])
    assert not ConvexSet()
    assert ConvexSet() != ConvexSet([x])


def test_convex_equal_examples():
    assert convex_equal(ConvexSet([x]), ConvexSet([x, x]))
    assert convex_equal(ConvexSet([x, y, half("x", "y")]), ConvexSet([x, y]))
    assert not convex_equal(ConvexSet([x]), ConvexSet([y]))
    assert extreme_points(ConvexSet([x, y, half("x", "y")])).generators == (x, y)


def test_support_image_examples():
    assert support_image(ConvexSet([x])) == frozenset({frozenset({"x"})})
    assert support_image(ConvexSet([x, half("x", "y")])) == frozenset({frozenset({"x"}), frozenset({"x", "y"})})
    assert support_image(ConvexSet([x, y])) == frozenset({frozenset({"x"}), frozenset({"y"}), frozenset({"x", "y"})})
    assert support_image(ConvexSet()) == frozenset()


COORDS = ("x", "y", "z")


@given(dists(COORDS), st.lists(dists(COORDS), min_size=1, max_size=3))
def test_hull_member_agrees_with_dense_oracle(phi, gens):
    assert hull_member(phi, ConvexSet(gens)) == oracles.hull_member_dense(phi, gens, COORDS)


@given(st.lists(dists(COORDS), min_size=1, max_size=3, unique=True), st.data())
def test_grid_combinations_are_members(gens, data):
    from strategies import weights
    w = data.draw(weights(len(gens)))
    point = Dist(oracles.vector_of(w, gens, COORDS))
    assert hull_member(point, ConvexSet(gens))


@given(st.lists(st.lists(dists(COORDS, 4), min_size=1, max_size=3), min_size=3, max_size=3))
def test_convex_equal_is_an_equivalence(sets):
    a, b, c = (ConvexSet(s) for s in sets)
    assert convex_equal(a, a)
    assert convex_equal(a, b) == convex_equal(b, a)
    if convex_equal(a, b) and convex_equal(b, c):
        assert convex_equal(a, c)


@given(st.lists(dists(COORDS), min_size=1, max_size=4))
def test_extreme_points_preserve_the_hull(gens):
    c = ConvexSet(gens)
    e = extreme_points(c)
    assert convex_equal(c, e)
    assert set(e.generators) <= set(c.generators)


# -- machine functor --------------------------------------------------------

def test_machine_values():
    vals = machine_values([1, 2], ["a"])
    assert len(vals) == 4
    m = MachineValue(1, {"a": 2})
    assert m.step("a") == 2 and m.letters == ("a",)
    assert m.map({2: 5}).step("a") == 5
    with pytest.raises(KeyError):
        m.step("b")
    assert len(machine_values([1, 2, 3], ["a", "b"])) == 2 * 9
