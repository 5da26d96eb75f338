"""Labelled Markov processes on finite spaces, zigzag maps, sums, stability and quotients."""

from dataclasses import dataclass, field

from .errors import (
    LabelMismatch,
    LeakageOutsideB,
    NonMeasurableKernel,
    NotStable,
    UnknownLabelOrState,
    ValidationError,
)
from .measurable import (
    FinSpace,
    Measure,
    SubAlgebra,
    critical_thresholds,
    fmt_set,
    sum_space,
)


@dataclass
class Verdict:
    """Outcome of a check: a violating witness when false, a certificate when available."""

    holds: bool
    witness: object = None
    certificate: object = None
    notes: dict = field(default_factory=dict)

    def __bool__(self):
        return self.holds


class Lmp:
    """Finite LMP.  ``kernel[a][k]`` is the measure of every state in atom ``k`` under ``a``."""

    def __init__(self, space, labels, kernel):
        self.space = space
        self.labels = tuple(labels)
        self.kernel = {a: tuple(kernel[a]) for a in self.labels}
        for a in self.labels:
            if len(self.kernel[a]) != len(space.atoms):
                raise ValidationError(f"label {a!r}: one measure per atom expected")
            for m in self.kernel[a]:
                if m.space != space:
                    raise ValidationError("kernel measure lives on another space")

    @classmethod
    def build(cls, states, labels, kernels, atoms=None):
        """Validate per-state weights ``{label: {state: {state-or-atom: weight}}}``."""
        return validate_lmp(FinSpace(states, atoms), labels, kernels)

    @property
    def states(self):
        return self.space.states

    def measure(self, a, s):
        return self.kernel[a][self.space.atom_of[s]]

    def tau(self, a, s, subset):
        return self.measure(a, s)(subset)

    def check_label(self, a):
        if a not in self.kernel:
            raise UnknownLabelOrState(f"unknown label {a!r}")
        return a

    def __eq__(self, other):
        return (isinstance(other, Lmp) and self.space == other.space
                and self.labels == other.labels and self.kernel == other.kernel)

    def __hash__(self):
        return hash((self.space, self.labels))

    def __repr__(self):
        rows = []
        for a in self.labels:
            for k, m in enumerate(self.kernel[a]):
                if m.total:
                    rows.append(f"{self.space.atom_label(k)} -{a}-> {m}")
        return f"Lmp({list(self.states)}; " + "; ".join(rows) + ")"


@dataclass(frozen=True)
class PointedLmp:
    lmp: Lmp
    initial: str

    def __post_init__(self):
        self.lmp.space.check_state(self.initial)


def validate_lmp(space, labels, weights):
    """Check per-state kernel rows and return the per-atom representation."""
    labels = tuple(sorted(set(labels)))
    for a in weights:
        if a not in labels:
            raise UnknownLabelOrState(f"kernel for unknown label {a!r}")
    kernel = {}
    for a in labels:
        rows = weights.get(a, {})
        for s in rows:
            space.check_state(s)
        per_atom = []
        for k, atom in enumerate(space.atoms):
            ordered = sorted(atom)
            first = Measure.from_mapping(space, rows.get(ordered[0], {}))
            for s in ordered[1:]:
                other = Measure.from_mapping(space, rows.get(s, {}))
                if other != first:
                    raise NonMeasurableKernel(
                        f"label {a!r}: states {ordered[0]!r} and {s!r} share the atom "
                        f"{space.atom_label(k)!r} but have kernels {first} and {other}"
                    )
            per_atom.append(first)
        kernel[a] = per_atom
    return Lmp(space, labels, kernel)


class Morphism:
    """A total map between the state sets of two processes."""

    def __init__(self, source, target, mapping):
        mapping = dict(mapping)
        for s in source.states:
            if s not in mapping:
                raise UnknownLabelOrState(f"map undefined on {s!r}")
            target.space.check_state(mapping[s])
        extra = set(mapping) - set(source.states)
        if extra:
            raise UnknownLabelOrState(f"map defined on unknown states {sorted(extra)}")
        self.source = source
        self.target = target
        self.mapping = {s: mapping[s] for s in source.states}

    def __call__(self, s):
        return self.mapping[s]

    def __repr__(self):
        return "Morphism{" + ", ".join(f"{s}->{t}" for s, t in self.mapping.items()) + "}"

    def preimage(self, subset):
        subset = set(subset)
        return frozenset(s for s, t in self.mapping.items() if t in subset)

    def image(self):
        return frozenset(self.mapping.values())

    def is_surjective(self):
        return self.image() == frozenset(self.target.states)

    def then(self, other):
        """other after self."""
        return Morphism(self.source, other.target, {s: other(t) for s, t in self.mapping.items()})


def check_zigzag(f):
    """Zigzag test; the witness is (label, state, target set) or ("measurability", set)."""
    src, tgt = f.source, f.target
    if set(src.labels) != set(tgt.labels):
        return Verdict(False, witness=("labels", src.labels, tgt.labels))
    pre = []
    for k, atom in enumerate(tgt.space.atoms):
        p = f.preimage(atom)
        if not src.space.is_measurable(p):
            return Verdict(False, witness=("measurability", tgt.space.from_atoms([k])))
        pre.append(src.space.measurable(p))
    for a in src.labels:
        for s in src.states:
            mu = src.measure(a, s)
            nu = tgt.measure(a, f(s))
            for k, p in enumerate(pre):
                if mu(p) != nu.weights[k]:
                    return Verdict(False, witness=(a, s, tgt.space.from_atoms([k])))
    return Verdict(True)


def identity_morphism(S):
    return Morphism(S, S, {s: s for s in S.states})


def direct_sum(left, right):
    if set(left.labels) != set(right.labels):
        raise LabelMismatch(f"labels {list(left.labels)} and {list(right.labels)} differ")
    space = sum_space(left.space, right.space)
    nl = len(left.space.atoms)
    nr = len(right.space.atoms)
    kernel = {}
    for a in left.labels:
        kernel[a] = ([Measure(space, m.weights + (0,) * nr) for m in left.kernel[a]]
                     + [Measure(space, (0,) * nl + m.weights) for m in right.kernel[a]])
    return Lmp(space, left.labels, kernel)


def inclusion(summand_lmp, total, side):
    space = total.space
    tag = space.inl if side == "left" else space.inr
    return Morphism(summand_lmp, total, {s: tag(s) for s in summand_lmp.states})


def threshold_set(S, a, subset, r):
    return frozenset(s for s in S.states if S.tau(a, s, subset) > r)


def stability_violation(S, family):
    """First (set, label, threshold) whose threshold set falls outside the family."""
    if isinstance(family, SubAlgebra):
        members = family.sets()
    else:
        members = sorted((S.space.measurable(A) for A in family), key=lambda A: (len(A), sorted(A)))
    present = {frozenset(A) for A in members}
    for A in members:
        for a in S.labels:
            values = [m(A) for m in S.kernel[a]]
            for r in critical_thresholds(values):
                if not 0 <= r <= 1:
                    continue
                if threshold_set(S, a, A, r) not in present:
                    return (A, a, r)
    return None


def is_stable(S, family):
    return stability_violation(S, family) is None


def smallest_stable(S):
    """Least stable sub-algebra, by refining {S} until every block has constant mass on blocks."""
    space = S.space
    blocks = [frozenset(range(len(space.atoms)))]
    while True:
        groups = {}
        for i, b in enumerate(blocks):
            for k in sorted(b):
                sig = tuple(S.kernel[a][k].on_atoms(c) for a in S.labels for c in blocks)
                groups.setdefault((i, sig), []).append(k)
        refined = [frozenset(g) for g in groups.values()]
        if len(refined) == len(blocks):
            return SubAlgebra(space, refined)
        blocks = refined


def class_name(members):
    return "+".join(sorted(members))


def quotient(S, family):
    """S / Lambda together with the projection onto the classes of R(Lambda)."""
    lam = SubAlgebra.coerce(S.space, family)
    bad = stability_violation(S, lam)
    if bad is not None:
        A, a, r = bad
        raise NotStable(f"threshold set of {fmt_set(A)} under {a!r} at {r} is not in the family")
    classes = lam.state_blocks()
    names = [class_name(c) for c in classes]
    qspace = FinSpace(names)
    weights = {}
    for a in S.labels:
        rows = {}
        for name, block in zip(names, lam.blocks):
            mu = S.kernel[a][min(block)]
            rows[name] = {n: mu.on_atoms(b) for n, b in zip(names, lam.blocks)}
        weights[a] = rows
    Q = validate_lmp(qspace, S.labels, weights)
    pi = Morphism(S, Q, {s: names[lam.block_of(s)] for s in S.states})
    return Q, pi


def event_companion(S):
    """Same states and kernels, sigma-algebra replaced by the smallest stable one."""
    lam = smallest_stable(S)
    space = FinSpace(S.states, lam.state_blocks())
    kernel = {}
    for a in S.labels:
        kernel[a] = [Measure(space, [S.kernel[a][min(b)].on_atoms(c) for c in lam.blocks])
                     for b in lam.blocks]
    return Lmp(space, S.labels, kernel)


def restrict_sublmp(S, subset):
    """The process on a measurable subset from which no state leaks mass."""
    B = S.space.measurable(subset)
    outside = B.complement()
    for r in sorted(B):
        for a in S.labels:
            if S.tau(a, r, outside) != 0:
                raise LeakageOutsideB(r, a)
    space = S.space.restrict(B)
    kernel = {}
    for a in S.labels:
        kernel[a] = [Measure(space, [S.kernel[a][S.space.atom_of[min(atom)]].on_atoms(
                        [S.space.atom_of[min(atom2)]]) for atom2 in space.atoms])
                     for atom in space.atoms]
    return Lmp(space, S.labels, kernel)


def zero_lmp(states, labels, atoms=None):
    return validate_lmp(FinSpace(states, atoms), labels, {})
