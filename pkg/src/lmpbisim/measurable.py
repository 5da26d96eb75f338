"""Finite measurable spaces, measures, relations and the closure operators on them.

A sigma-algebra on a finite set is always atomic, so a space is stored as a
partition of its states into atoms and a measurable set as a set of atom
indices.  Every probability value is a :class:`fractions.Fraction`.
"""

from fractions import Fraction
from functools import cached_property
from itertools import combinations
import operator

from .errors import (
    NotMeasurable,
    TooLarge,
    UnknownLabelOrState,
    ValidationError,
    MassExceedsOne,
)


def as_fraction(value):
    """Coerce ints, Fractions and "p/q" strings to a Fraction; floats are refused."""
    if isinstance(value, bool):
        raise ValidationError(f"not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"not a rational: {value!r}") from None
    raise ValidationError(f"expected an exact rational, got {type(value).__name__} {value!r}")


def fmt_fraction(q):
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def fmt_set(items):
    items = sorted(items)
    if not items:
        return "∅"
    return "{" + ", ".join(str(x) for x in items) + "}"


def set_key(items):
    """Canonical order on finite sets: smaller first, then lexicographic."""
    return (len(items), tuple(sorted(items)))


def pair_key(pair):
    a, b = pair
    return (len(a) + len(b), tuple(sorted(a)), tuple(sorted(b)))


def _components(n, edges):
    """Connected components of a graph on 0..n-1, each listed in increasing order."""
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            if ri < rj:
                parent[rj] = ri
            else:
                parent[ri] = rj
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


class FinSpace:
    """A finite set of string states with a sigma-algebra given by its atoms."""

    def __init__(self, states, atoms=None):
        states = list(states)
        if not states:
            raise ValidationError("a space needs at least one state")
        for s in states:
            if not isinstance(s, str):
                raise ValidationError(f"state identifiers must be strings, got {s!r}")
        if len(set(states)) != len(states):
            raise ValidationError("duplicate state identifiers")
        ordered = tuple(sorted(states))
        index = {s: i for i, s in enumerate(ordered)}
        if atoms is None:
            blocks = [frozenset([s]) for s in ordered]
        else:
            blocks = [frozenset(a) for a in atoms]
            seen = set()
            for b in blocks:
                if not b:
                    raise ValidationError("atoms must be nonempty")
                unknown = b - index.keys()
                if unknown:
                    raise UnknownLabelOrState(f"atom mentions unknown states {sorted(unknown)}")
                if seen & b:
                    raise ValidationError(f"atoms overlap on {sorted(seen & b)}")
                seen |= b
            if len(seen) != len(ordered):
                raise ValidationError(f"atoms do not cover {sorted(index.keys() - seen)}")
            blocks.sort(key=lambda b: min(index[s] for s in b))
        self.states = ordered
        self.atoms = tuple(blocks)
        self.index = index
        self.atom_of = {s: k for k, b in enumerate(self.atoms) for s in b}
        self._key = (self.states, self.atoms)
        self._hash = hash(self._key)
        self._atom_lookup = {b: k for k, b in enumerate(self.atoms)}

    @classmethod
    def powerset(cls, states):
        return cls(states)

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, FinSpace) and self._key == other._key

    def __hash__(self):
        return self._hash

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __contains__(self, state):
        return state in self.index

    def __repr__(self):
        if self.is_powerset:
            return f"FinSpace({list(self.states)})"
        return f"FinSpace({list(self.states)}, atoms={[sorted(a) for a in self.atoms]})"

    @property
    def is_powerset(self):
        return len(self.atoms) == len(self.states)

    def atom_label(self, k):
        atom = self.atoms[k]
        if len(atom) == 1:
            return next(iter(atom))
        return "+".join(sorted(atom))

    def resolve_atom(self, key):
        """Atom index named by a state of a singleton atom or by "a+b" for a coarse atom."""
        if key in self.index:
            k = self.atom_of[key]
            if len(self.atoms[k]) > 1:
                raise ValidationError(
                    f"state {key!r} lies in the atom {self.atom_label(k)!r}; "
                    "weights must name the whole atom"
                )
            return k
        k = self._atom_lookup.get(frozenset(key.split("+")))
        if k is None:
            raise UnknownLabelOrState(f"{key!r} is neither a state nor an atom")
        return k

    def check_state(self, s):
        if s not in self.index:
            raise UnknownLabelOrState(f"unknown state {s!r}")
        return s

    def from_atoms(self, indices):
        return MeasurableSet(self, indices)

    def measurable(self, states):
        if isinstance(states, MeasurableSet) and states.space == self:
            return states
        members = frozenset(states)
        unknown = members - self.index.keys()
        if unknown:
            raise UnknownLabelOrState(f"unknown states {sorted(unknown)}")
        idx = {self.atom_of[s] for s in members}
        if sum(len(self.atoms[k]) for k in idx) != len(members):
            raise NotMeasurable(f"{fmt_set(members)} is not a union of atoms")
        return MeasurableSet(self, idx)

    def is_measurable(self, states):
        try:
            self.measurable(states)
        except NotMeasurable:
            return False
        return True

    @cached_property
    def empty(self):
        return MeasurableSet(self, ())

    @cached_property
    def full(self):
        return MeasurableSet(self, range(len(self.atoms)))

    def measurable_sets(self, limit=16):
        """Every measurable set, in canonical order."""
        n = len(self.atoms)
        if n > limit:
            raise TooLarge(f"{n} atoms give 2^{n} measurable sets")
        out = [MeasurableSet(self, c) for r in range(n + 1) for c in combinations(range(n), r)]
        out.sort(key=set_key)
        return out

    def restrict(self, subset):
        sub = self.measurable(subset)
        return FinSpace(sorted(sub), [self.atoms[k] for k in sorted(sub.atoms)])


class MeasurableSet(frozenset):
    """A union of atoms; behaves as the frozenset of its states."""

    __slots__ = ("space", "atoms")

    def __new__(cls, space, atom_indices):
        atom_indices = frozenset(atom_indices)
        members = frozenset().union(*(space.atoms[k] for k in atom_indices))
        obj = super().__new__(cls, members)
        obj.space = space
        obj.atoms = atom_indices
        return obj

    def __repr__(self):
        return fmt_set(self)

    def complement(self):
        return MeasurableSet(self.space, set(range(len(self.space.atoms))) - self.atoms)


_OPS = {
    "<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge,
    "≤": operator.le, "≥": operator.ge,
}


class Measure:
    """Subprobability measure given by a weight on each atom."""

    __slots__ = ("space", "weights", "_hash")

    def __init__(self, space, weights):
        weights = tuple(as_fraction(w) for w in weights)
        if len(weights) != len(space.atoms):
            raise ValidationError(f"expected {len(space.atoms)} atom weights, got {len(weights)}")
        if any(w < 0 for w in weights):
            raise ValidationError("negative weight")
        if sum(weights) > 1:
            raise MassExceedsOne(f"total mass {fmt_fraction(sum(weights))} exceeds 1")
        self.space = space
        self.weights = weights
        self._hash = hash(weights)

    @classmethod
    def from_mapping(cls, space, mapping):
        weights = [Fraction(0)] * len(space.atoms)
        for key, w in mapping.items():
            weights[space.resolve_atom(key)] += as_fraction(w)
        return cls(space, weights)

    @classmethod
    def zero(cls, space):
        return cls(space, [0] * len(space.atoms))

    @classmethod
    def dirac(cls, space, state):
        w = [0] * len(space.atoms)
        w[space.atom_of[space.check_state(state)]] = 1
        return cls(space, w)

    @property
    def total(self):
        return sum(self.weights, Fraction(0))

    def on_atoms(self, indices):
        w = self.weights
        return sum((w[k] for k in indices), Fraction(0))

    def __call__(self, subset):
        if isinstance(subset, MeasurableSet) and (subset.space is self.space or subset.space == self.space):
            return self.on_atoms(subset.atoms)
        return self.on_atoms(self.space.measurable(subset).atoms)

    def __eq__(self, other):
        if not isinstance(other, Measure):
            return NotImplemented
        return self.weights == other.weights and self.space == other.space

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.weights < other.weights

    def as_mapping(self):
        return {self.space.atom_label(k): w for k, w in enumerate(self.weights) if w}

    def __repr__(self):
        items = self.as_mapping()
        if not items:
            return "0"
        return "{" + ", ".join(f"{k}: {fmt_fraction(v)}" for k, v in items.items()) + "}"


class Rel:
    """A binary relation between the states of two spaces (possibly the same one)."""

    __slots__ = ("left", "right", "pairs")

    def __init__(self, left, right, pairs=()):
        pairs = frozenset((a, b) for a, b in pairs)
        for a, b in pairs:
            if a not in left.index or b not in right.index:
                raise UnknownLabelOrState(f"pair ({a}, {b}) is outside the spaces")
        self.left = left
        self.right = right
        self.pairs = pairs

    @classmethod
    def identity(cls, space):
        return cls(space, space, ((s, s) for s in space.states))

    @classmethod
    def total(cls, left, right=None):
        right = left if right is None else right
        return cls(left, right, ((a, b) for a in left.states for b in right.states))

    @classmethod
    def graph(cls, mapping, left, right):
        return cls(left, right, ((s, mapping[s]) for s in left.states))

    @classmethod
    def from_classes(cls, space, classes):
        return cls(space, space, ((a, b) for c in classes for a in c for b in c))

    def __contains__(self, pair):
        return tuple(pair) in self.pairs

    def __iter__(self):
        return iter(sorted(self.pairs))

    def __len__(self):
        return len(self.pairs)

    def __eq__(self, other):
        if not isinstance(other, Rel):
            return NotImplemented
        return self.pairs == other.pairs and self.left == other.left and self.right == other.right

    def __hash__(self):
        return hash(self.pairs)

    def __le__(self, other):
        return self.pairs <= other.pairs

    def __or__(self, other):
        return Rel(self.left, self.right, self.pairs | other.pairs)

    def __and__(self, other):
        return Rel(self.left, self.right, self.pairs & other.pairs)

    def __sub__(self, other):
        return Rel(self.left, self.right, self.pairs - other.pairs)

    def __repr__(self):
        return "Rel{" + ", ".join(f"({a},{b})" for a, b in self) + "}"

    def inverse(self):
        return Rel(self.right, self.left, ((b, a) for a, b in self.pairs))

    def image(self, subset):
        subset = set(subset)
        return frozenset(b for a, b in self.pairs if a in subset)

    def preimage(self, subset):
        subset = set(subset)
        return frozenset(a for a, b in self.pairs if b in subset)

    def domain(self):
        return frozenset(a for a, _ in self.pairs)

    def codomain(self):
        return frozenset(b for _, b in self.pairs)

    def is_symmetric(self):
        return all((b, a) in self.pairs for a, b in self.pairs)

    def is_reflexive(self):
        return all((s, s) in self.pairs for s in self.left.states)

    def is_transitive(self):
        succ = {}
        for a, b in self.pairs:
            succ.setdefault(a, set()).add(b)
        return all(c in succ.get(a, ()) for a, b in self.pairs for c in succ.get(b, ()))

    def is_equivalence(self):
        return (self.left == self.right and self.is_reflexive()
                and self.is_symmetric() and self.is_transitive())

    def equivalence_closure(self):
        space = self.left
        idx = space.index
        comps = _components(len(space.states), ((idx[a], idx[b]) for a, b in self.pairs))
        return Rel.from_classes(space, [[space.states[i] for i in c] for c in comps])

    def classes(self):
        """Classes of an equivalence relation, ordered by least member."""
        space = self.left
        idx = space.index
        comps = _components(len(space.states), ((idx[a], idx[b]) for a, b in self.pairs))
        return [frozenset(space.states[i] for i in c) for c in comps]


class SubAlgebra:
    """A sub-sigma-algebra of a space: a partition of its atoms into coarser blocks."""

    def __init__(self, space, blocks):
        blocks = [frozenset(b) for b in blocks]
        seen = set()
        for b in blocks:
            if not b or seen & b:
                raise ValidationError("sub-algebra blocks must be nonempty and disjoint")
            seen |= b
        if seen != set(range(len(space.atoms))):
            raise ValidationError("sub-algebra blocks must cover every atom")
        blocks.sort(key=min)
        self.space = space
        self.blocks = tuple(blocks)
        self.block_of_atom = {k: i for i, b in enumerate(self.blocks) for k in b}

    @classmethod
    def whole(cls, space):
        return cls(space, [[k] for k in range(len(space.atoms))])

    @classmethod
    def trivial(cls, space):
        return cls(space, [range(len(space.atoms))])

    @classmethod
    def from_state_blocks(cls, space, blocks):
        return cls(space, [space.measurable(b).atoms for b in blocks])

    @classmethod
    def generated(cls, space, family):
        """sigma(family), computed from the membership pattern of each atom."""
        sets = [space.measurable(A).atoms for A in family]
        groups = {}
        for k in range(len(space.atoms)):
            groups.setdefault(tuple(k in A for A in sets), []).append(k)
        return cls(space, groups.values())

    @classmethod
    def coerce(cls, space, family):
        if isinstance(family, SubAlgebra):
            return family
        return cls.generated(space, family)

    @cached_property
    def atoms(self):
        return tuple(MeasurableSet(self.space, b) for b in self.blocks)

    def block_of(self, state):
        return self.block_of_atom[self.space.atom_of[state]]

    def sets(self, limit=16):
        n = len(self.blocks)
        if n > limit:
            raise TooLarge(f"{n} blocks give 2^{n} sets")
        out = []
        for r in range(n + 1):
            for c in combinations(self.blocks, r):
                out.append(MeasurableSet(self.space, frozenset().union(*c)))
        out.sort(key=set_key)
        return out

    def __iter__(self):
        return iter(self.sets())

    def __len__(self):
        return 2 ** len(self.blocks)

    def __contains__(self, subset):
        if not self.space.is_measurable(subset):
            return False
        idx = self.space.measurable(subset).atoms
        return all(b <= idx or not (b & idx) for b in self.blocks)

    def __le__(self, other):
        """Inclusion of algebras: every atom of ``other`` lies inside an atom of ``self``."""
        return all(any(c <= b for b in self.blocks) for c in other.blocks)

    def refines(self, other):
        return other <= self

    def __eq__(self, other):
        return (isinstance(other, SubAlgebra) and self.space == other.space
                and set(self.blocks) == set(other.blocks))

    def __hash__(self):
        return hash(frozenset(self.blocks))

    def __repr__(self):
        return "SubAlgebra[" + " | ".join(fmt_set(a) for a in self.atoms) + "]"

    def relation(self):
        return Rel.from_classes(self.space, self.atoms)

    def state_blocks(self):
        return [frozenset(a) for a in self.atoms]


def sigma_generate(states, generators):
    """The space on ``states`` whose sigma-algebra is generated by ``generators``."""
    states = list(states)
    known = set(states)
    gens = [frozenset(g) for g in generators]
    for g in gens:
        if not g <= known:
            raise UnknownLabelOrState(f"generator mentions unknown states {sorted(g - known)}")
    groups = {}
    for s in sorted(states):
        groups.setdefault(tuple(s in g for g in gens), []).append(s)
    return FinSpace(states, groups.values())


def r_closed_sets(space, R):
    """Sigma(R): the measurable sets that R never crosses, as a sub-algebra."""
    idx = space.index
    edges = [(idx[a], idx[b]) for a, b in R.pairs]
    for atom in space.atoms:
        first, *rest = sorted(atom)
        edges.extend((idx[first], idx[s]) for s in rest)
    comps = _components(len(space.states), edges)
    return SubAlgebra(space, [{space.atom_of[space.states[i]] for i in c} for c in comps])


def relation_of(space, family):
    """R(Lambda): states that no member of the family tells apart."""
    sets = [frozenset(A) for A in family]
    sig = {s: tuple(s in A for A in sets) for s in space.states}
    return Rel(space, space, ((a, b) for a in space.states for b in space.states if sig[a] == sig[b]))


def is_r_closed_pair(R, A, A2):
    return all((s in A) == (t in A2) for s, t in R.pairs)


class PairFamily:
    """A family of pairs of subsets of two universes.

    A universe is either a :class:`FinSpace` (pairs of measurable sets) or a
    sequence of elements such as measures.  Families closed under coordinatewise
    complement and union are stored through their joint atoms: each member is the
    coordinatewise union of a subset of the atoms.
    """

    def __init__(self, left, right, pairs=None, atoms=None):
        self.left = left
        self.right = right
        if atoms is not None:
            self.atoms = tuple(sorted(((self._wrap(left, a), self._wrap(right, b)) for a, b in atoms),
                                      key=pair_key))
            self.closed = True
            self._pairs = None
        else:
            self.atoms = None
            self.closed = False
            self._pairs = frozenset((self._wrap(left, a), self._wrap(right, b)) for a, b in (pairs or ()))

    @staticmethod
    def _wrap(universe, items):
        if isinstance(universe, FinSpace):
            return universe.measurable(items)
        return frozenset(items)

    @staticmethod
    def universe_elements(universe):
        return universe.states if isinstance(universe, FinSpace) else tuple(universe)

    @property
    def pairs(self):
        if self._pairs is None:
            n = len(self.atoms)
            if n > 20:
                raise TooLarge(f"{n} joint atoms give 2^{n} pairs")
            out = set()
            for r in range(n + 1):
                for c in combinations(self.atoms, r):
                    a = frozenset().union(*(p[0] for p in c))
                    b = frozenset().union(*(p[1] for p in c))
                    out.add((self._wrap(self.left, a), self._wrap(self.right, b)))
            self._pairs = frozenset(out)
        return self._pairs

    def __iter__(self):
        return iter(sorted(self.pairs, key=pair_key))

    def __len__(self):
        return 2 ** len(self.atoms) if self.closed else len(self._pairs)

    def __contains__(self, pair):
        a, b = frozenset(pair[0]), frozenset(pair[1])
        if not self.closed:
            return (a, b) in self._pairs
        chosen_a, chosen_b = set(), set()
        for x, y in self.atoms:
            in_a = bool(x) and x <= a
            in_b = bool(y) and y <= b
            if (x & a and not in_a) or (y & b and not in_b):
                return False
            if x and y and in_a != in_b:
                return False
            if in_a or in_b:
                chosen_a |= x
                chosen_b |= y
        return chosen_a == a and chosen_b == b

    def __eq__(self, other):
        return isinstance(other, PairFamily) and self.pairs == other.pairs

    def __hash__(self):
        return hash(self.pairs)

    def __repr__(self):
        if self.closed:
            return f"PairFamily(closed, {len(self.atoms)} joint atoms)"
        return f"PairFamily({len(self._pairs)} pairs)"

    def projections(self):
        return {a for a, _ in self.pairs}, {b for _, b in self.pairs}

    def relation(self):
        """R^x(D): the pairs (s, s') that every member treats alike."""
        left, right = self.left, self.right
        if self.closed:
            pairs = [(s, t) for x, y in self.atoms for s in x for t in y]
        else:
            members = list(self._pairs)
            pairs = [(s, t) for s in left.states for t in right.states
                     if all((s in x) == (t in y) for x, y in members)]
        return Rel(left, right, pairs)


def closed_pairs(left, right, R):
    """Sigma^x(R): all measurable pairs (Q, Q') that R never crosses."""
    nl = len(left.atoms)
    edges = [(left.atom_of[a], nl + right.atom_of[b]) for a, b in R.pairs]
    comps = _components(nl + len(right.atoms), edges)
    atoms = []
    for c in comps:
        la = [k for k in c if k < nl]
        ra = [k - nl for k in c if k >= nl]
        atoms.append((MeasurableSet(left, la), MeasurableSet(right, ra)))
    return PairFamily(left, right, atoms=atoms)


def bi_sigma_close(left, right, family):
    """Least family containing ``family`` and closed under coordinatewise complement and union.

    The closure of the empty family is the empty family (not flagged closed).
    """
    gens = [(frozenset(a), frozenset(b)) for a, b in family]
    if not gens:
        return PairFamily(left, right, pairs=())
    groups = {}
    for x in PairFamily.universe_elements(left):
        groups.setdefault(tuple(x in a for a, _ in gens), [set(), set()])[0].add(x)
    for y in PairFamily.universe_elements(right):
        groups.setdefault(tuple(y in b for _, b in gens), [set(), set()])[1].add(y)
    return PairFamily(left, right, atoms=[(a, b) for a, b in groups.values()])


class TaggedSpace(FinSpace):
    """The direct sum of two spaces; left states are tagged ``L:`` and right ones ``R:``."""

    def __init__(self, left, right):
        states = [self.inl(s) for s in left.states] + [self.inr(s) for s in right.states]
        atoms = ([frozenset(self.inl(s) for s in a) for a in left.atoms]
                 + [frozenset(self.inr(s) for s in a) for a in right.atoms])
        super().__init__(states, atoms)
        self.left = left
        self.right = right

    @staticmethod
    def inl(s):
        return "L:" + s

    @staticmethod
    def inr(s):
        return "R:" + s

    @staticmethod
    def untag(t):
        if t.startswith("L:"):
            return "left", t[2:]
        if t.startswith("R:"):
            return "right", t[2:]
        raise ValidationError(f"{t!r} is not a tagged state")

    def combine(self, a, b):
        """A (+) A' for measurable A on the left and A' on the right."""
        return self.measurable([self.inl(s) for s in a] + [self.inr(s) for s in b])

    def left_part(self, subset):
        return frozenset(t[2:] for t in subset if t.startswith("L:"))

    def right_part(self, subset):
        return frozenset(t[2:] for t in subset if t.startswith("R:"))

    def restrict_rel(self, R, side="left"):
        """R restricted to one summand: pairs of that side with both tags removed."""
        tag = "L:" if side == "left" else "R:"
        space = self.left if side == "left" else self.right
        return Rel(space, space, ((a[2:], b[2:]) for a, b in R.pairs
                                  if a.startswith(tag) and b.startswith(tag)))

    def restrict_family(self, family, side="left"):
        part = self.left_part if side == "left" else self.right_part
        space = self.left if side == "left" else self.right
        return {space.measurable(part(A)) for A in family}


def sum_space(left, right):
    return TaggedSpace(left, right)


def descend(R):
    space = R.left
    if not isinstance(space, TaggedSpace):
        raise ValidationError("descend expects a relation on a direct sum")
    return Rel(space.left, space.right,
               ((a[2:], b[2:]) for a, b in R.pairs if a.startswith("L:") and b.startswith("R:")))


def lift_cross(R):
    space = sum_space(R.left, R.right)
    return Rel(space, space, ((space.inl(a), space.inr(b)) for a, b in R.pairs))


def lift_complete(R):
    """R+ on S (+) S: both coordinates may independently sit in either copy."""
    if R.left != R.right:
        raise ValidationError("the complete lift needs a relation on a single space")
    space = sum_space(R.left, R.left)
    tags = (space.inl, space.inr)
    return Rel(space, space, ((f(a), g(b)) for a, b in R.pairs for f in tags for g in tags))


def lift_side(R, side, other):
    """R_l on S (+) other (side="left") or R_r on other (+) S (side="right")."""
    if side == "left":
        space = sum_space(R.left, other)
        tag = space.inl
    elif side == "right":
        space = sum_space(other, R.left)
        tag = space.inr
    else:
        raise ValidationError(f"side must be left or right, got {side!r}")
    return Rel(space, space, ((tag(a), tag(b)) for a, b in R.pairs))


def lift_measures_int(space, R, mu, nu):
    """mu and nu agree on every R-closed measurable set."""
    return all(mu.on_atoms(b) == nu.on_atoms(b) for b in r_closed_sets(space, R).blocks)


def lift_measures_ext(left, right, R, mu, nu):
    """mu(Q) = nu(Q') for every closed pair (Q, Q') of R."""
    return all(mu(a) == nu(b) for a, b in closed_pairs(left, right, R).atoms)


def measure_classes(universe, family):
    """Partition of ``universe`` by agreement on every set of ``family``."""
    if isinstance(family, SubAlgebra):
        def signature(mu):
            return tuple(mu.on_atoms(b) for b in family.blocks)
    else:
        sets = list(family)

        def signature(mu):
            return tuple(mu(A) for A in sets)
    groups = {}
    for mu in universe:
        groups.setdefault(signature(mu), []).append(mu)
    return [list(dict.fromkeys(g)) for g in groups.values()]


def delta_bowtie(universe, subset, op, q):
    cmp = _OPS[op]
    q = as_fraction(q)
    return [mu for mu in universe if cmp(mu(subset), q)]


def critical_thresholds(values):
    """Every attained value together with 0 and 1, plus one point strictly between neighbours."""
    vs = sorted(set(values) | {Fraction(0), Fraction(1)})
    out = list(vs)
    out.extend((a + b) / 2 for a, b in zip(vs, vs[1:]))
    return sorted(out)


def delta_times_trace(universe_left, universe_right, family):
    """Trace of the bi-sigma-algebra generated by threshold pairs of ``family``.

    Generators are (D^{<q}(Q), D^{<q}(Q')) restricted to the universes, with q
    ranging over the critical thresholds of the values the universes attain.
    """
    ul = tuple(dict.fromkeys(universe_left))
    ur = tuple(dict.fromkeys(universe_right))
    if isinstance(family, PairFamily) and family.closed:
        source = family.atoms
    else:
        source = list(family)
    gens = []
    for q_left, q_right in source:
        vl = {mu: mu(q_left) for mu in ul}
        vr = {nu: nu(q_right) for nu in ur}
        for q in critical_thresholds(list(vl.values()) + list(vr.values())):
            gens.append((frozenset(m for m in ul if vl[m] < q), frozenset(n for n in ur if vr[n] < q)))
    return bi_sigma_close(ul, ur, gens)


def set_partitions(items):
    """Every partition of ``items`` into nonempty blocks (Bell-number many)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for p in set_partitions(rest):
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1:]
        yield [[first]] + p
