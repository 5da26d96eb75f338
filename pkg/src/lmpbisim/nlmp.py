"""Image-finite nondeterministic LMPs and their internal and external bisimulations.

Transition sets are finite, so every hit test only ever looks at the measures
that occur in some transition set.  Those measures form the universe on which
traces of measure sigma-algebras are computed.
"""

from .errors import (
    LabelMismatch,
    NonMeasurableTransition,
    NotHitBisim,
    NotSymmetric,
    PairNotSeparable,
    TooLarge,
    UnknownLabel,
    UnknownLabelOrState,
    ValidationError,
)
from .lmp import Verdict
from .logic import COMPARATORS, And, Top
from .measurable import (
    FinSpace,
    Measure,
    PairFamily,
    Rel,
    SubAlgebra,
    closed_pairs,
    delta_times_trace,
    fmt_set,
    measure_classes,
    r_closed_sets,
    set_partitions,
)


class Nlmp:
    """``transitions[a][k]`` is the sorted tuple of measures of every state in atom ``k``."""

    def __init__(self, space, labels, transitions):
        self.space = space
        self.labels = tuple(labels)
        self.transitions = {a: tuple(tuple(sorted(set(ms))) for ms in transitions[a]) for a in self.labels}
        for a in self.labels:
            if len(self.transitions[a]) != len(space.atoms):
                raise ValidationError(f"label {a!r}: one transition set per atom expected")

    @classmethod
    def build(cls, states, labels, transitions, atoms=None):
        return validate_nlmp(FinSpace(states, atoms), labels, transitions)

    @property
    def states(self):
        return self.space.states

    def T(self, a, s):
        return self.transitions[a][self.space.atom_of[s]]

    def universe(self):
        """Every measure occurring in some transition set, in canonical order."""
        return tuple(sorted({m for a in self.labels for ms in self.transitions[a] for m in ms}))

    def __eq__(self, other):
        return (isinstance(other, Nlmp) and self.space == other.space
                and self.labels == other.labels and self.transitions == other.transitions)

    def __hash__(self):
        return hash((self.space, self.labels))

    def __repr__(self):
        rows = []
        for a in self.labels:
            for k, ms in enumerate(self.transitions[a]):
                if ms:
                    rows.append(f"{self.space.atom_label(k)} -{a}-> {list(ms)}")
        return f"Nlmp({list(self.states)}; " + "; ".join(rows) + ")"


def validate_nlmp(space, labels, data):
    """Per-state transition lists ``{label: {state: [weights, ...]}}`` to the per-atom form.

    States sharing an atom must hit the same measures, otherwise some hit set
    would have a non-measurable preimage.
    """
    labels = tuple(sorted(set(labels)))
    for a in data:
        if a not in labels:
            raise UnknownLabelOrState(f"transitions for unknown label {a!r}")
    transitions = {}
    for a in labels:
        rows = data.get(a, {})
        for s in rows:
            space.check_state(s)
        per_atom = []
        for k, atom in enumerate(space.atoms):
            sets = {s: frozenset(Measure.from_mapping(space, m) for m in rows.get(s, []))
                    for s in sorted(atom)}
            ordered = sorted(atom)
            first = sets[ordered[0]]
            for s in ordered[1:]:
                if sets[s] != first:
                    diff = sorted(first ^ sets[s])[0]
                    raise NonMeasurableTransition(
                        f"label {a!r}: states {ordered[0]!r} and {s!r} of atom "
                        f"{space.atom_label(k)!r} disagree on hitting {diff}")
            per_atom.append(first)
        transitions[a] = per_atom
    return Nlmp(space, labels, transitions)


def embed_lmp(S):
    return Nlmp(S.space, S.labels, {a: [(m,) for m in S.kernel[a]] for a in S.labels})


def nlmp_semantics(N, phi):
    if isinstance(phi, Top):
        return N.space.full
    if isinstance(phi, And):
        return N.space.measurable(nlmp_semantics(N, phi.left) & nlmp_semantics(N, phi.right))
    if phi.label not in N.transitions:
        raise UnknownLabel(f"formula uses label {phi.label!r} unknown to the process")
    inner = nlmp_semantics(N, phi.body)
    cmp = COMPARATORS[phi.cmp]
    return N.space.measurable(
        s for s in N.states if any(cmp(m(inner), phi.q) for m in N.T(phi.label, s)))


def _same_labels(N, N2):
    if set(N.labels) != set(N2.labels):
        raise LabelMismatch(f"labels {list(N.labels)} and {list(N2.labels)} differ")


def _hits(ms, theta):
    return any(m in theta for m in ms)


# ---------------------------------------------------------------- internal

def is_int_state_bisim(N, R):
    if not R.is_symmetric():
        raise NotSymmetric("internal bisimulations are symmetric relations")
    blocks = r_closed_sets(N.space, R).blocks
    for s, t in sorted(R.pairs):
        for a in N.labels:
            for mu in N.T(a, s):
                if not any(all(mu.on_atoms(b) == nu.on_atoms(b) for b in blocks) for nu in N.T(a, t)):
                    return Verdict(False, witness=(a, (s, t), mu))
    return Verdict(True, certificate=R)


def int_state_bisimilarity(N):
    space = N.space
    R = Rel.total(space)
    while True:
        blocks = r_closed_sets(space, R).blocks
        sig = {s: tuple(frozenset(tuple(m.on_atoms(b) for b in blocks) for m in N.T(a, s))
                        for a in N.labels) for s in space.states}
        refined = Rel(space, space, ((s, t) for s, t in R.pairs if sig[s] == sig[t]))
        if refined == R:
            return R
        R = refined


def _diagonal_trace(N, R):
    sigma = r_closed_sets(N.space, R)
    diagonal = PairFamily(N.space, N.space, atoms=[(b, b) for b in sigma.atoms])
    U = N.universe()
    return delta_times_trace(U, U, diagonal), sigma, U


def is_int_hit_bisim(N, R):
    """Hit test over the trace of Delta(Sigma(R)), cross-checked by class matching."""
    if not R.is_symmetric():
        raise NotSymmetric("internal bisimulations are symmetric relations")
    trace, sigma, U = _diagonal_trace(N, R)
    witness = None
    for s, t in sorted(R.pairs):
        for a in N.labels:
            for theta, theta2 in trace.atoms:
                assert theta == theta2, "trace of a diagonal family must be diagonal"
                if _hits(N.T(a, s), theta) != _hits(N.T(a, t), theta):
                    witness = (a, (s, t), theta)
                    break
            if witness:
                break
        if witness:
            break
    classes = measure_classes(U, sigma)
    index = {m: i for i, c in enumerate(classes) for m in c}
    matching = all(frozenset(index[m] for m in N.T(a, s)) == frozenset(index[m] for m in N.T(a, t))
                   for s, t in R.pairs for a in N.labels)
    assert matching == (witness is None), "trace and class criteria disagree"
    return Verdict(witness is None, witness=witness, certificate=R if witness is None else None)


def int_hit_bisimilarity(N):
    space = N.space
    R = Rel.total(space)
    while True:
        trace, _, _ = _diagonal_trace(N, R)
        sig = {s: tuple(tuple(_hits(N.T(a, s), th) for th, _ in trace.atoms) for a in N.labels)
               for s in space.states}
        refined = Rel(space, space, ((s, t) for s, t in R.pairs if sig[s] == sig[t]))
        if refined == R:
            return R
        R = refined


def _hit_preimages(N, lam, U):
    classes = measure_classes(U, lam)
    for a in N.labels:
        for c in classes:
            yield a, c, frozenset(s for s in N.states if any(m in c for m in N.T(a, s)))


def is_int_event(N, family):
    """T_a is measurable from (S, Lambda) into the hit algebra over Delta(Lambda)."""
    lam = SubAlgebra.coerce(N.space, family)
    return all(pre in lam for _, _, pre in _hit_preimages(N, lam, N.universe()))


def is_int_event_bisim(N, R):
    """Is R the relation of an event-stable sub-algebra (its own classes, necessarily)?"""
    if not R.is_equivalence():
        return Verdict(False, witness=("not an equivalence",))
    classes = R.classes()
    for c in classes:
        if not N.space.is_measurable(c):
            return Verdict(False, witness=("class is not measurable", c))
    lam = SubAlgebra.from_state_blocks(N.space, classes)
    for a, cls, pre in _hit_preimages(N, lam, N.universe()):
        if pre not in lam:
            return Verdict(False, witness=(a, frozenset(cls), pre))
    return Verdict(True, certificate=lam)


def int_event_smallest(N):
    space = N.space
    U = N.universe()
    blocks = [frozenset(range(len(space.atoms)))]
    while True:
        lam = SubAlgebra(space, blocks)
        classes = measure_classes(U, lam)
        index = {m: i for i, c in enumerate(classes) for m in c}
        groups = {}
        for i, b in enumerate(blocks):
            for k in sorted(b):
                sig = tuple(frozenset(index[m] for m in N.transitions[a][k]) for a in N.labels)
                groups.setdefault((i, sig), []).append(k)
        refined = [frozenset(g) for g in groups.values()]
        if len(refined) == len(blocks):
            return SubAlgebra(space, refined)
        blocks = refined


def int_event_bisimilarity(N):
    return int_event_smallest(N).relation()


# ---------------------------------------------------------------- external

def _agree(mu, nu, atoms):
    return all(mu(x) == nu(y) for x, y in atoms)


def is_ext_state_bisim(N, N2, R):
    _same_labels(N, N2)
    atoms = closed_pairs(N.space, N2.space, R).atoms
    for s, t in sorted(R.pairs):
        for a in N.labels:
            for mu in N.T(a, s):
                if not any(_agree(mu, nu, atoms) for nu in N2.T(a, t)):
                    return Verdict(False, witness=("zig", a, (s, t), mu))
            for nu in N2.T(a, t):
                if not any(_agree(mu, nu, atoms) for mu in N.T(a, s)):
                    return Verdict(False, witness=("zag", a, (s, t), nu))
    return Verdict(True, certificate=R)


def ext_state_bisimilarity(N, N2):
    _same_labels(N, N2)
    R = Rel.total(N.space, N2.space)
    while True:
        atoms = closed_pairs(N.space, N2.space, R).atoms

        def ok(s, t):
            for a in N.labels:
                ms, ns = N.T(a, s), N2.T(a, t)
                if not all(any(_agree(m, n, atoms) for n in ns) for m in ms):
                    return False
                if not all(any(_agree(m, n, atoms) for m in ms) for n in ns):
                    return False
            return True

        refined = Rel(N.space, N2.space, ((s, t) for s, t in R.pairs if ok(s, t)))
        if refined == R:
            return R
        R = refined


def _ext_trace(N, N2, R):
    return delta_times_trace(N.universe(), N2.universe(), closed_pairs(N.space, N2.space, R))


def is_ext_hit_bisim(N, N2, R):
    """Related states hit the two sides of every pair of the external trace alike.

    Checking the joint atoms suffices: a state hits a union iff it hits a part.
    """
    _same_labels(N, N2)
    trace = _ext_trace(N, N2, R)
    for s, t in sorted(R.pairs):
        for a in N.labels:
            for theta, theta2 in trace.atoms:
                if _hits(N.T(a, s), theta) != _hits(N2.T(a, t), theta2):
                    return Verdict(False, witness=(a, (s, t), (theta, theta2)))
    return Verdict(True, certificate=R)


def ext_hit_bisimilarity(N, N2):
    _same_labels(N, N2)
    R = Rel.total(N.space, N2.space)
    while True:
        trace = _ext_trace(N, N2, R)
        refined = Rel(N.space, N2.space, (
            (s, t) for s, t in R.pairs
            if all(_hits(N.T(a, s), th) == _hits(N2.T(a, t), th2)
                   for a in N.labels for th, th2 in trace.atoms)))
        if refined == R:
            return R
        R = refined


def _separating_pairs(N, N2, R):
    cp = closed_pairs(N.space, N2.space, R)
    seen = []
    for p in [(N.space.full, N2.space.full)] + list(cp.atoms) + list(cp):
        if p not in seen:
            seen.append(p)
    return seen


def separating_theta(N, N2, R, s, t):
    """Threshold sets telling s from t when they fail the zig or zag under R.

    Returns a dict with the label, the side whose measure is isolated, the
    conjuncts (Q, Q', comparator, q), the traces theta/theta2 and the pair
    (C, C') of hit preimages with s in C and t not in C' (or the reverse).
    """
    _same_labels(N, N2)
    candidates = _separating_pairs(N, N2, R)
    U, U2 = N.universe(), N2.universe()
    for a in N.labels:
        for side, mine, theirs in ((0, N.T(a, s), N2.T(a, t)), (1, N2.T(a, t), N.T(a, s))):
            for mu in mine:
                conjuncts = []
                for nu in theirs:
                    for q_l, q_r in candidates:
                        x, y = (q_l, q_r) if side == 0 else (q_r, q_l)
                        vm, vn = mu(x), nu(y)
                        if vm != vn:
                            conjuncts.append((q_l, q_r, "<" if vm < vn else ">", (vm + vn) / 2))
                            break
                    else:
                        break
                else:
                    def inside(m, which):
                        return all(COMPARATORS[op](m(c[which]), q) for *c, op, q in conjuncts)
                    theta = frozenset(m for m in U if inside(m, 0))
                    theta2 = frozenset(m for m in U2 if inside(m, 1))
                    C = N.space.measurable(x for x in N.states if _hits(N.T(a, x), theta))
                    C2 = N2.space.measurable(y for y in N2.states if _hits(N2.T(a, y), theta2))
                    return {"label": a, "side": side, "measure": mu, "conjuncts": conjuncts,
                            "theta": theta, "theta2": theta2, "pair": (C, C2)}
    raise PairNotSeparable(f"({s}, {t}) passes both zig and zag under the relation")


def times_stability_violation(N, N2, family):
    """First (label, (theta, theta2)) whose hit-preimage pair is missing from the family."""
    _same_labels(N, N2)
    trace = delta_times_trace(N.universe(), N2.universe(), family)
    if not trace.closed:
        return None
    checks = trace.atoms if family.closed else list(trace)
    for a in N.labels:
        for theta, theta2 in checks:
            pre = (frozenset(x for x in N.states if _hits(N.T(a, x), theta)),
                   frozenset(y for y in N2.states if _hits(N2.T(a, y), theta2)))
            if pre not in family:
                return a, (theta, theta2), pre
    return None


def is_times_stable(N, N2, family):
    return times_stability_violation(N, N2, family) is None


def ext_event_from_hit(N, N2, R):
    """R^x(Sigma^x(R)) for an external hit bisimulation R, with its certifying family."""
    if not is_ext_hit_bisim(N, N2, R):
        raise NotHitBisim("the relation is not an external hit bisimulation")
    family = closed_pairs(N.space, N2.space, R)
    rel = family.relation()
    assert R <= rel
    again = closed_pairs(N.space, N2.space, rel)
    assert set(again.atoms) == set(family.atoms)
    assert is_times_stable(N, N2, family)
    return rel, family


def is_ext_event_bisim(N, N2, R, limit=10):
    """Search for an x-stable bi-sigma-algebra D with R^x(D) = R.

    Any such D consists of closed pairs of R, so its joint atoms are unions of
    the joint atoms of Sigma^x(R).  Merging two atoms that both carry states on
    each side, or an atom with one of the other side, would relate states that R
    does not; only atoms with states on a single side can be merged, with atoms
    of the same side.  Enumerating those merges is therefore exhaustive.
    """
    _same_labels(N, N2)
    cp = closed_pairs(N.space, N2.space, R)
    induced = cp.relation()
    if induced != R:
        extra = sorted(induced.pairs - R.pairs)[0]
        return Verdict(False, witness=("every family of closed pairs also relates", extra),
                       notes={"complete": True})
    both = [p for p in cp.atoms if p[0] and p[1]]
    lefts = [p for p in cp.atoms if p[0] and not p[1]]
    rights = [p for p in cp.atoms if p[1] and not p[0]]
    if len(lefts) > limit or len(rights) > limit:
        raise TooLarge("too many one-sided atoms to enumerate their merges")
    tried = 0
    for pl in set_partitions(range(len(lefts))):
        for pr in set_partitions(range(len(rights))):
            tried += 1
            atoms = list(both)
            atoms += [(frozenset().union(*(lefts[i][0] for i in b)), frozenset()) for b in pl]
            atoms += [(frozenset(), frozenset().union(*(rights[i][1] for i in b))) for b in pr]
            D = PairFamily(N.space, N2.space, atoms=atoms)
            if is_times_stable(N, N2, D):
                return Verdict(True, certificate=D, notes={"candidates": tried, "complete": True})
    return Verdict(False, witness=("no x-stable bi-sigma-algebra induces the relation",),
                   notes={"candidates": tried, "complete": True})


def describe_theta(theta):
    return fmt_set(repr(m) for m in theta)


__all__ = [
    "Nlmp", "validate_nlmp", "embed_lmp", "nlmp_semantics",
    "is_int_state_bisim", "int_state_bisimilarity", "is_int_hit_bisim", "int_hit_bisimilarity",
    "is_int_event", "is_int_event_bisim", "int_event_smallest", "int_event_bisimilarity",
    "is_ext_state_bisim", "ext_state_bisimilarity", "is_ext_hit_bisim", "ext_hit_bisimilarity",
    "separating_theta", "is_times_stable", "times_stability_violation",
    "ext_event_from_hit", "is_ext_event_bisim",
]

