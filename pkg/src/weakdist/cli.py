"""Command-line interface.

Exit status: 0 success / equivalent / all diagrams as expected, 1 inequivalent
or an unexpected diagram verdict, 2 usage or parse error, 3 unknown.
"""

from __future__ import annotations

import argparse
import sys
from importlib.resources import files
from pathlib import Path
from typing import Optional, Sequence

from . import automata, equiv, lawcheck
from .automata import ParseError
from .setkit import Dist, render

EXIT_OK, EXIT_NO, EXIT_USAGE, EXIT_UNKNOWN = 0, 1, 2, 3

CORPUS = ("c0.alt", "c0.pa", "r0.rel", "r7.rel", "r0_convex.rel")


class UsageError(Exception):
    pass


_MODE = {"none": "plain bisimulation", "congruence": "bisimulation up to congruence"}


def corpus_text(name: str) -> str:
    if name not in CORPUS:
        raise UsageError(f"no corpus file {name!r}; known: {', '.join(CORPUS)}")
    return (files("weakdist") / "corpus" / name).read_text()


def _read(path: str) -> str:
    p = Path(path)
    if not p.exists():
        # shipped corpus files may be named directly
        if p.name in CORPUS and len(p.parts) == 1:
            return corpus_text(p.name)
        raise UsageError(f"no such file: {path}")
    return p.read_text()


def _subset(text: str, aut) -> frozenset:
    """``x1+x2`` names the subset-state {x1, x2}; ``{}`` the empty one."""
    if text in ("{}", ""):
        return frozenset()
    members = text.split("+")
    for x in members:
        if x not in aut.states:
            raise UsageError(f"unknown state {x!r}")
    return frozenset(members)


def _word(text: str, alphabet) -> tuple:
    if text in ("", "ε", "eps"):
        return ()
    if "," in text or " " in text:
        word = tuple(w for w in text.replace(",", " ").split() if w)
    elif text in alphabet:
        word = (text,)
    else:
        word = tuple(text)
    for a in word:
        if a not in alphabet:
            raise UsageError(f"unknown letter {a!r}")
    return word


# ---------------------------------------------------------------------------
# subcommands

def cmd_determinize(args, out) -> int:
    aut = automata.parse_alt(_read(args.file))
    seeds = [_subset(s, aut) for s in args.seeds.split(",")]
    nda = automata.determinize_once(aut)
    if args.steps == 1:
        if args.dot:
            out.write(automata.nda_to_dot(nda, seeds))
        elif args.json:
            out.write(automata.nda_to_json(nda, seeds))
        else:
            states = nda.materialize(seeds)
            for u in states:
                out.write(f"{render(u)}\tout={nda.out(u)}\n")
            for u, a, v in nda.edges(states):
                out.write(f"{render(u)} -{a}-> {render(v)}\n")
        return EXIT_OK
    if len(seeds) != 1:
        raise UsageError("--steps 2 takes a single --from seed (use x1+x2 for a subset)")
    dfa = automata.determinize_twice(aut, seeds, nda)
    if args.dot:
        out.write(automata.dfa_to_dot(dfa))
    elif args.json:
        out.write(automata.dfa_to_json(dfa))
    else:
        for s in dfa.states:
            out.write(f"{render(s)}\tout={dfa.out[s]}\n")
        for s in dfa.states:
            for a in dfa.alphabet:
                out.write(f"{render(s)} -{a}-> {render(dfa.trans[(s, a)])}\n")
    return EXIT_OK


def cmd_lang(args, out) -> int:
    aut = automata.parse_alt(_read(args.file))
    word = _word(args.word, aut.alphabet)
    u = _subset(args.state, aut)
    if len(u) == 1:
        value = automata.alt_language(aut, next(iter(u)), word)
    else:
        value = automata.nda_language(automata.determinize_once(aut), u, word)
    out.write(f"{value}\n")
    return EXIT_OK


def _language_mismatch(aut, x, y, max_len: int) -> Optional[tuple]:
    for w in automata.words(aut.alphabet, max_len):
        if automata.alt_language(aut, x, w) != automata.alt_language(aut, y, w):
            return w
    return None


def _show_step(step) -> str:
    u, v, a, side, p, q = step
    reply = render(q) if q is not None else "none"
    return f"({render(u)}, {render(v)}) {side} plays {a} to {render(p)}; reply {reply}"


def cmd_equiv(args, out, err) -> int:
    aut = automata.parse_alt(_read(args.file))
    for s in (args.s1, args.s2):
        if s not in aut.states:
            raise UsageError(f"unknown state {s!r}")
    nda = automata.determinize_once(aut)
    root = (frozenset([args.s1]), frozenset([args.s2]))
    if args.check_witness:
        rel = equiv.parse_relation(_read(args.check_witness), aut.states)
        if any(isinstance(a, Dist) for a, _ in rel):
            raise UsageError("witness relation must relate subsets")
        ok = equiv.check_upto_congruence(nda, rel) if args.upto == "congruence" else equiv.is_bisimulation(nda, rel)
        contains = root in rel
        if ok and contains:
            out.write(f"witness ok ({len(rel)} pairs, {_MODE[args.upto]})\n")
            return EXIT_OK
        reason = "does not relate the two states" if not contains else f"is not a {_MODE[args.upto]}"
        out.write(f"witness rejected: relation {reason}\n")
        return EXIT_NO
    verdict = equiv.equiv_alt(aut, args.s1, args.s2, upto=args.upto, max_states=args.max_states)
    out.write(verdict.result + "\n")
    if verdict.result == "equivalent":
        out.write(equiv.format_relation(verdict.relation))
        if args.witness_out:
            Path(args.witness_out).write_text(equiv.format_relation(verdict.relation))
        w = _language_mismatch(aut, args.s1, args.s2, args.max_len)
        if w is not None:
            err.write(f"warning: languages differ on {' '.join(w)}\n")
        return EXIT_OK
    if verdict.result == "inequivalent":
        if verdict.word is not None:
            shown = " ".join(verdict.word) if verdict.word else "ε"
            out.write(f"word: {shown}\n")
        for step in verdict.trace:
            out.write("trace: " + _show_step(step) + "\n")
        return EXIT_NO
    if verdict.note:
        err.write(verdict.note + "\n")
    return EXIT_UNKNOWN


def cmd_pa_equiv(args, out, err) -> int:
    pa = automata.parse_pa(_read(args.file))
    phi = automata.parse_dist(args.d1, pa.states)
    psi = automata.parse_dist(args.d2, pa.states)
    if args.relation:
        rel = equiv.parse_relation(_read(args.relation), pa.states)
        if any(not isinstance(a, Dist) for a, _ in rel):
            raise UsageError("relation must relate distributions")
        outcome = equiv.check_pa_upto_convex(pa, rel, args.depth)
        contains = (phi, psi) in rel
        if outcome is True and contains:
            out.write(f"equivalent\nwitness ok ({len(rel)} pairs, depth {args.depth})\n")
            return EXIT_OK
        if outcome is False:
            out.write("inequivalent\nwitness refuted\n")
            return EXIT_NO
        out.write("unknown\n")
        err.write("relation does not contain the pair\n" if outcome is True else "some successor could not be matched\n")
        return EXIT_UNKNOWN
    verdict = equiv.equiv_pa(pa, phi, psi, depth=args.depth)
    out.write(verdict.result + "\n")
    if verdict.result == "equivalent":
        out.write(equiv.format_relation(verdict.relation))
        return EXIT_OK
    if verdict.note:
        (out if verdict.result == "inequivalent" else err).write(verdict.note + "\n")
    return EXIT_NO if verdict.result == "inequivalent" else EXIT_UNKNOWN


def cmd_check_laws(args, out) -> int:
    n, k, seed = args.max_size, args.samples, args.seed
    if n < 1:
        raise UsageError("--max-size must be at least 1")
    if args.law in ("pp", "dp"):
        reports = lawcheck.check_weak_law_axioms(args.law, n, k, seed)
    elif args.law == "yb":
        reports = lawcheck.check_yang_baxter(n, args.alphabet_size, k, seed)
    elif args.law == "supp":
        reports = lawcheck.check_supp_morphism(n, k, seed)
    elif args.law == "cnf":
        if n > 4:
            raise UsageError("cnf takes --max-size at most 4")
        reports = lawcheck.check_cnf_dnf(n)
    else:
        reports = [lawcheck.check_naturality(law, n, k, seed) for law in ("pp", "dp", "sigma", "tau")]
    bad = 0
    for r in reports:
        out.write(r.to_line() + "\n")
        if not r.as_expected or (args.strict and r.verdict == "fail"):
            bad += 1
    return EXIT_NO if bad else EXIT_OK


def cmd_export(args, out) -> int:
    names = [args.name] if args.name else list(CORPUS)
    if args.dir:
        d = Path(args.dir)
        d.mkdir(parents=True, exist_ok=True)
        for name in names:
            (d / name).write_text(corpus_text(name))
            out.write(f"wrote {d / name}\n")
        return EXIT_OK
    if len(names) != 1:
        raise UsageError("give a corpus file name or --dir")
    out.write(corpus_text(names[0]))
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="weakdist", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("determinize", help="determinize an alternating automaton once or twice")
    d.add_argument("file")
    d.add_argument("--from", dest="seeds", required=True,
                   help="comma-separated seeds; x1+x2 denotes the subset {x1,x2}")
    d.add_argument("--steps", type=int, choices=(1, 2), default=1)
    fmt = d.add_mutually_exclusive_group()
    fmt.add_argument("--dot", action="store_true")
    fmt.add_argument("--json", action="store_true")

    lg = sub.add_parser("lang", help="membership of a word in the language of a state")
    lg.add_argument("file")
    lg.add_argument("--state", required=True)
    lg.add_argument("--word", required=True, help="letters, optionally comma separated")

    e = sub.add_parser("equiv", help="bisimilarity of {s1} and {s2} after determinizing once")
    e.add_argument("file")
    e.add_argument("s1")
    e.add_argument("s2")
    e.add_argument("--upto", choices=("none", "congruence"), default="congruence")
    e.add_argument("--check-witness", metavar="RELFILE")
    e.add_argument("--witness-out", metavar="RELFILE")
    e.add_argument("--max-len", type=int, default=6, help="word length for the language cross-check")
    e.add_argument("--max-states", type=int, default=4096)

    pe = sub.add_parser("pa-equiv", help="belief-state equivalence up to convex congruence")
    pe.add_argument("file")
    pe.add_argument("d1", help="distribution, e.g. '1/2 x1 + 1/2 x2' or a state name")
    pe.add_argument("d2")
    pe.add_argument("--depth", type=int, default=2)
    pe.add_argument("--relation", metavar="RELFILE", help="check this relation instead of searching")

    c = sub.add_parser("check-laws", help="check law axioms and coherence diagrams")
    c.add_argument("--law", choices=("pp", "dp", "yb", "supp", "cnf", "nat"), required=True)
    c.add_argument("--max-size", type=int, default=2)
    c.add_argument("--samples", type=int, default=1000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--alphabet-size", type=int, default=1)
    c.add_argument("--strict", action="store_true", help="count expected failures as failures")

    x = sub.add_parser("export", help="write the shipped corpus files")
    x.add_argument("name", nargs="?", choices=CORPUS)
    x.add_argument("--dir")
    return p


def run(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if getattr(args, "depth", 1) < 1:
        err.write("error: --depth must be at least 1\n")
        return EXIT_USAGE
    try:
        if args.command == "determinize":
            return cmd_determinize(args, out)
        if args.command == "lang":
            return cmd_lang(args, out)
        if args.command == "equiv":
            return cmd_equiv(args, out, err)
        if args.command == "pa-equiv":
            return cmd_pa_equiv(args, out, err)
        if args.command == "check-laws":
            return cmd_check_laws(args, out)
        return cmd_export(args, out)
    except (ParseError, UsageError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
