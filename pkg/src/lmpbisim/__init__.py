"""Bisimulation workbench for finite labelled Markov processes and their nondeterministic variant."""

from .errors import LmpError, TooLarge, ValidationError
from .measurable import FinSpace, Measure, PairFamily, Rel, SubAlgebra
from .lmp import Lmp, Morphism, Verdict, direct_sum, quotient, smallest_stable
from .nlmp import Nlmp
from .modelio import dump, dumps, load, loads

__all__ = [
    "LmpError", "TooLarge", "ValidationError",
    "FinSpace", "Measure", "PairFamily", "Rel", "SubAlgebra",
    "Lmp", "Morphism", "Verdict", "direct_sum", "quotient", "smallest_stable",
    "Nlmp", "dump", "dumps", "load", "loads",
]
