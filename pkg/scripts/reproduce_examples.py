#!/usr/bin/env python3
"""Rebuild the worked c0 examples and print them.

Writes the once-determinized graph as DOT next to the console output when
``--out`` is given.
"""
import argparse
from importlib.resources import files
from pathlib import Path

from weakdist.automata import determinize_once, nda_to_dot, parse_alt, parse_pa
from weakdist.equiv import (
    check_pa_upto_convex,
    check_upto_congruence,
    equiv_alt,
    equiv_pa,
    format_relation,
    is_bisimulation,
    parse_relation,
)
from weakdist.setkit import Dist

CORPUS = files("weakdist") / "corpus"


def load(name):
    return (CORPUS / name).read_text()


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, help="directory for the DOT file")
    args = ap.parse_args()

    aut = parse_alt(load("c0.alt"))
    nda = determinize_once(aut)
    seeds = [frozenset({"x0"}), frozenset({"y0"})]
    dot = nda_to_dot(nda, seeds)
    states = nda.materialize(seeds)
    print(f"determinized c0: {len(states)} reachable subset-states, "
          f"{sum(1 for _ in nda.edges(states))} arrows")
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "c0_determinized.dot").write_text(dot)

    r0, r7 = parse_relation(load("r0.rel")), parse_relation(load("r7.rel"))
    print(f"R7 is a bisimulation: {is_bisimulation(nda, r7)}")
    print(f"R0 is a bisimulation: {is_bisimulation(nda, r0)}")
    print(f"R0 is a bisimulation up to congruence: {check_upto_congruence(nda, r0)}")

    for mode in ("congruence", "none"):
        v = equiv_alt(aut, "x0", "y0", upto=mode)
        print(f"\nequiv x0 y0 (up to {mode}): {v.result}, {len(v.relation)} pairs")
        print(format_relation(v.relation), end="")

    pa = parse_pa(load("c0.pa"))
    rc = parse_relation(load("r0_convex.rel"))
    print(f"\nconvex R0 on the probabilistic analogue: {check_pa_upto_convex(pa, rc, 2)}")
    v = equiv_pa(pa, Dist.dirac("x0"), Dist.dirac("y0"))
    print(f"pa-equiv x0 y0: {v.result}, {len(v.relation)} pairs")


if __name__ == "__main__":
    main()
