"""Search for a pair of processes whose states one notion relates and another does not."""

from fractions import Fraction
from itertools import product
import random

from .errors import TooLarge
from .generate import gen_random
from .lmp import Lmp
from .measurable import FinSpace, Measure, set_partitions
from .modelio import dumps, loads, model_to_dict
from .notions import notion, relate


def _small_spaces(max_states, prefix):
    for n in range(1, max_states + 1):
        states = [f"{prefix}{i}" for i in range(n)]
        for blocks in set_partitions(states):
            yield FinSpace(states, blocks)


def _measures(space, den):
    k = len(space.atoms)
    for w in product(range(den + 1), repeat=k):
        if sum(w) <= den:
            yield Measure(space, [Fraction(x, den) for x in w])


def small_lmps(max_states=2, den=2, prefix="s"):
    """Every one-label LMP on at most ``max_states`` states with weights in multiples of 1/den."""
    for space in _small_spaces(max_states, prefix):
        ms = list(_measures(space, den))
        for kernel in product(ms, repeat=len(space.atoms)):
            yield Lmp(space, ("a",), {"a": list(kernel)})


def _separates(a, b, S, S2):
    ra, rb = relate(a, S, S2), relate(b, S, S2)
    if ra is None or rb is None:
        return None
    extra = sorted(ra.pairs - rb.pairs)
    return extra[0] if extra else False


def search_separation(notion_a, notion_b, max_states=3, seed=0, budget=200, coarse=None,
                      exhaustive_states=2, denominator=4):
    """Random then small exhaustive search for states related by A and not by B.

    Any hit is re-derived from the JSON round trip of both processes before it is
    reported.  Pairs on which a notion cannot be decided (too large for the
    bounded search) are counted as skipped.
    """
    a, b = notion(notion_a), notion(notion_b)
    rng = random.Random(seed)
    report = {"notions": [a, b], "found": False, "tried": 0, "skipped": 0,
              "random_budget": budget, "exhaustive_states": exhaustive_states}

    def attempt(S, S2, phase):
        report["tried"] += 1
        try:
            hit = _separates(a, b, S, S2)
        except TooLarge:
            hit = None
        if hit is None:
            report["skipped"] += 1
            return False
        if not hit:
            return False
        S_, S2_ = loads(dumps(S)), loads(dumps(S2))
        again = _separates(a, b, S_, S2_)
        assert again == hit, "separation did not survive re-verification"
        report.update(found=True, phase=phase, pair=list(hit),
                      left=model_to_dict(S), right=model_to_dict(S2))
        return True

    for _ in range(budget):
        labels = ("a",) if rng.random() < 0.6 else ("a", "b")
        s1, s2 = rng.randrange(2 ** 32), rng.randrange(2 ** 32)
        S = gen_random(max_states, denominator=denominator, labels=labels, seed=s1, coarse=coarse)
        S2 = gen_random(max_states, denominator=denominator, labels=labels, seed=s2, coarse=coarse,
                        prefix="t")
        if attempt(S, S2, "random"):
            report["outcome"] = "separated"
            return report
    left = list(small_lmps(exhaustive_states, 2, "s"))
    right = list(small_lmps(exhaustive_states, 2, "t"))
    for S in left:
        for S2 in right:
            if coarse is True and S.space.is_powerset and S2.space.is_powerset:
                continue
            if coarse is False and not (S.space.is_powerset and S2.space.is_powerset):
                continue
            if attempt(S, S2, "exhaustive"):
                report["outcome"] = "separated"
                return report
    report["outcome"] = "exhausted"
    return report
