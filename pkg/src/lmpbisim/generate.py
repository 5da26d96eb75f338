"""Seeded random processes.  Kernels are drawn per atom, so every sample validates."""

from fractions import Fraction
import random

from .lmp import Lmp
from .measurable import FinSpace, Measure
from .nlmp import Nlmp


def _space(rng, n, max_atoms, coarse, prefix):
    states = [f"{prefix}{i}" for i in range(n)]
    if coarse is None:
        coarse = n >= 2 and rng.random() < 0.5
    if not coarse or n < 2:
        return FinSpace(states)
    k = rng.randint(1, min(max_atoms, n - 1))
    order = states[:]
    rng.shuffle(order)
    # k atoms over n states with at least one of size >= 2 (k < n guarantees it)
    cuts = sorted(rng.sample(range(1, n), k - 1))
    atoms = [order[i:j] for i, j in zip([0] + cuts, cuts + [n])]
    return FinSpace(states, atoms)


def _measure(rng, space, den):
    units = rng.randint(0, den)
    w = [0] * len(space.atoms)
    for _ in range(units):
        w[rng.randrange(len(w))] += 1
    return Measure(space, [Fraction(x, den) for x in w])


def _draw(rng, space, den, pool):
    """Reuse a measure already drawn half of the time, so equal kernels are common."""
    if pool and rng.random() < 0.5:
        return rng.choice(pool)
    m = _measure(rng, space, den)
    pool.append(m)
    return m


def gen_random(max_states=4, max_atoms=None, denominator=4, labels=("a",), seed=0,
               kind="lmp", coarse=None, max_measures=2, prefix="s", min_states=1):
    """A random LMP or image-finite NLMP; ``coarse`` None mixes powerset and coarse spaces.

    With ``coarse=True`` at least two states are drawn and some atom has two or
    more states.
    """
    if max_states < 1 or denominator < 1 or not labels:
        raise ValueError("bounds must be positive and labels nonempty")
    rng = random.Random(seed)
    low = max(min_states, 2 if coarse else 1)
    n = rng.randint(low, max(max_states, low))
    max_atoms = n if max_atoms is None else max_atoms
    space = _space(rng, n, max_atoms, coarse, prefix)
    labels = tuple(sorted(set(labels)))
    if kind == "lmp":
        kernel = {}
        for a in labels:
            pool = []
            kernel[a] = [_draw(rng, space, denominator, pool) for _ in space.atoms]
        return Lmp(space, labels, kernel)
    if kind != "nlmp":
        raise ValueError(f"unknown kind {kind!r}")
    transitions = {}
    for a in labels:
        pool = []
        transitions[a] = [[_draw(rng, space, denominator, pool)
                           for _ in range(rng.randint(0, max_measures))] for _ in space.atoms]
    return Nlmp(space, labels, transitions)
