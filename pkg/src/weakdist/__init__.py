"""Weak distributive laws, determinization and bisimulation up-to.

Submodules:

* ``setkit``: finite sets, families, distributions and convex sets.
* ``laws``: the concrete laws and their congruence-relevant composites.
* ``lawcheck``: exhaustive and sampled checks of the law axioms.
* ``automata``: alternating and probabilistic automata, determinization.
* ``equiv``: bisimulation (up to congruence) and equivalence search.
"""

from .automata import AltAutomaton, NDA, ProbAutomaton, ParseError, determinize_once, parse_alt, parse_pa
from .setkit import ConvexSet, Dist, MachineValue

__all__ = [
    "AltAutomaton",
    "ConvexSet",
    "Dist",
    "MachineValue",
    "NDA",
    "ParseError",
    "ProbAutomaton",
    "determinize_once",
    "parse_alt",
    "parse_pa",
]
