#!/usr/bin/env python3
"""Run every law check at acceptance-gate sizes and print the report lines."""
import argparse
import sys
import time

from weakdist import lawcheck


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--samples", type=int, default=1000)
    args = ap.parse_args()

    runs = [
        ("powerset law", lambda: lawcheck.check_weak_law_axioms("pp", 3, args.samples, args.seed)),
        ("convex law", lambda: lawcheck.check_weak_law_axioms("dp", 3, args.samples // 2, args.seed)),
        ("supp square", lambda: lawcheck.check_supp_morphism(3, args.samples // 2, args.seed)),
        ("Yang-Baxter", lambda: lawcheck.check_yang_baxter(3, 1, args.samples, args.seed)),
        ("CNF/DNF", lambda: lawcheck.check_cnf_dnf(3)),
        ("naturality", lambda: [lawcheck.check_naturality(law, 3, 200, args.seed)
                                for law in ("pp", "dp", "sigma", "tau")]),
    ]
    surprises = 0
    for title, run in runs:
        t0 = time.perf_counter()
        reports = run()
        print(f"# {title} ({time.perf_counter() - t0:.1f}s)")
        for r in reports:
            print(r.to_line())
            surprises += not r.as_expected
    sys.exit(1 if surprises else 0)


if __name__ == "__main__":
    main()
