"""Bisimulation checkers and bisimilarities for LMPs.

Internal (state, event), external (x), spans and couplings (Delta), cospans
(vee), the sum-based notions (+ and +_P), and the V-finality test for
quotient maps.  Every greatest fixpoint starts from the total relation and
refines; checkers first test agreement on the atoms of the relevant closed
family (enough, by additivity) and only enumerate the whole family to name a
canonical witness.
"""

from .errors import LabelMismatch, NotEquivalence, NotInjective, NotSurjective, NotZigzag, TooLarge
from .lmp import (
    Lmp,
    Morphism,
    Verdict,
    check_zigzag,
    direct_sum,
    event_companion,
    quotient,
    smallest_stable,
    stability_violation,
)
from .lp import LinSystem, feasible
from .measurable import (
    FinSpace,
    Measure,
    Rel,
    SubAlgebra,
    closed_pairs,
    descend,
    r_closed_sets,
    set_partitions,
    _components,
)

BisimVerdict = Verdict


def _same_labels(S, S2):
    if set(S.labels) != set(S2.labels):
        raise LabelMismatch(f"labels {list(S.labels)} and {list(S2.labels)} differ")


# ---------------------------------------------------------------- internal

def is_state_bisim(S, R):
    """Related states give equal mass to every R-closed measurable set."""
    sigma = r_closed_sets(S.space, R)
    for s, t in sorted(R.pairs):
        for a in S.labels:
            mu, nu = S.measure(a, s), S.measure(a, t)
            if all(mu.on_atoms(b) == nu.on_atoms(b) for b in sigma.blocks):
                continue
            for C in sigma.sets():
                if mu(C) != nu(C):
                    return Verdict(False, witness=(a, (s, t), C))
    return Verdict(True, certificate=R)


def state_bisimilarity(S):
    space = S.space
    R = Rel.total(space)
    while True:
        blocks = r_closed_sets(space, R).blocks
        sig = {s: tuple(S.measure(a, s).on_atoms(b) for a in S.labels for b in blocks)
               for s in space.states}
        refined = Rel(space, space, ((s, t) for s, t in R.pairs if sig[s] == sig[t]))
        if refined == R:
            return R
        R = refined


def brute_oracle_state_bisimilarity(S):
    """Union of all equivalence relations that are state bisimulations.

    Written from the definition alone: R-closed sets are found by testing every
    measurable set, and every pair is tested on every such set.
    """
    space = S.space
    if len(space.states) > 6:
        raise TooLarge("the brute-force oracle is limited to 6 states")
    every = space.measurable_sets()
    union = set()
    for blocks in set_partitions(space.states):
        block_of = {s: i for i, b in enumerate(blocks) for s in b}
        closed = [A for A in every
                  if all(block_of[x] != block_of[y] or ((x in A) == (y in A))
                         for x in space.states for y in space.states)]
        ok = all(S.tau(a, s, C) == S.tau(a, t, C)
                 for b in blocks for s in b for t in b for a in S.labels for C in closed)
        if ok:
            union.update((s, t) for b in blocks for s in b for t in b)
    return Rel(space, space, union)


def event_bisimilarity(S):
    return smallest_stable(S).relation()


def is_event_bisim(S, R):
    """Is R = R(Lambda) for a stable sub-sigma-algebra Lambda?

    On a finite space the classes of R(Lambda) are exactly the atoms of Lambda,
    so the only candidate is the algebra whose atoms are the classes of R.
    """
    if not R.is_equivalence():
        return Verdict(False, witness=("not an equivalence relation", R))
    classes = R.classes()
    for c in classes:
        if not S.space.is_measurable(c):
            return Verdict(False, witness=("class is not measurable", c))
    lam = SubAlgebra.from_state_blocks(S.space, classes)
    bad = stability_violation(S, lam)
    if bad is not None:
        return Verdict(False, witness=("threshold set outside the algebra", bad))
    return Verdict(True, certificate=lam)


# ---------------------------------------------------------------- external

def is_ext_bisim(S, S2, R):
    _same_labels(S, S2)
    cp = closed_pairs(S.space, S2.space, R)
    for s, t in sorted(R.pairs):
        for a in S.labels:
            mu, nu = S.measure(a, s), S2.measure(a, t)
            if all(mu(x) == nu(y) for x, y in cp.atoms):
                continue
            for A, A2 in cp:
                if mu(A) != nu(A2):
                    return Verdict(False, witness=(a, (s, t), (A, A2)))
    return Verdict(True, certificate=R)


def ext_bisimilarity(S, S2):
    _same_labels(S, S2)
    R = Rel.total(S.space, S2.space)
    while True:
        atoms = closed_pairs(S.space, S2.space, R).atoms
        refined = Rel(S.space, S2.space, (
            (s, t) for s, t in R.pairs
            if all(S.measure(a, s)(x) == S2.measure(a, t)(y) for a in S.labels for x, y in atoms)))
        if refined == R:
            return R
        R = refined


def z_closure(R):
    """Least relation containing R with (x,x'), (y,x'), (y,y') forcing (x,y')."""
    left, right = R.left, R.right
    nl = len(left.states)
    edges = [(left.index[a], nl + right.index[b]) for a, b in R.pairs]
    pairs = []
    for comp in _components(nl + len(right.states), edges):
        ls = [left.states[i] for i in comp if i < nl]
        rs = [right.states[i - nl] for i in comp if i >= nl]
        pairs.extend((a, b) for a in ls for b in rs)
    return Rel(left, right, pairs)


def state_bisim_descent(S, S2):
    """(~s)_x: the cross part of state bisimilarity on the direct sum."""
    return descend(state_bisimilarity(direct_sum(S, S2)))


# ---------------------------------------------------------------- sums

def _cross_pairs(R):
    return sorted((u, v) for u, v in R.pairs if u.startswith("L:") and v.startswith("R:"))


def is_oplus_bisim(S, S2, R):
    """An equivalence on the sum whose cross-related states agree on its closed sets."""
    if not R.is_equivalence():
        raise NotEquivalence("a +-bisimulation must be an equivalence relation")
    return _oplus_check(direct_sum(S, S2), R)


def _oplus_check(T, R):
    sigma = r_closed_sets(T.space, R)
    for u, v in _cross_pairs(R):
        for a in T.labels:
            mu, nu = T.measure(a, u), T.measure(a, v)
            if all(mu.on_atoms(b) == nu.on_atoms(b) for b in sigma.blocks):
                continue
            for C in sigma.sets():
                if mu(C) != nu(C):
                    return Verdict(False, witness=(a, (u, v), C))
    return Verdict(True, certificate=R)


def _oplus_candidates(T, u, v):
    """Partitions of the sum with u and v together, up to a harmless normal form.

    Merging two blocks that contain only left states (or only right ones) adds
    no cross pair and removes closed sets, so a +-bisimulation stays one.  Hence
    it suffices to search partitions with at most one single-sided block per
    side; every other block must contain states of both sides, and cross states
    sharing a block must at least have equal total masses.
    """
    states = [u, v] + [s for s in T.states if s not in (u, v)]
    totals = {s: tuple(T.measure(a, s).total for a in T.labels) for s in T.states}
    side = {s: s[0] for s in T.states}
    blocks = [[u, v]]
    pure = {"L": None, "R": None}

    def compatible(block, s):
        return all(totals[x] == totals[s] for x in block if side[x] != side[s])

    def rec(i):
        if i == len(states):
            for k, b in enumerate(blocks):
                if k not in pure.values() and len({side[x] for x in b}) < 2:
                    return
            yield [list(b) for b in blocks]
            return
        s = states[i]
        for k, b in enumerate(blocks):
            if k in pure.values():
                continue
            if compatible(b, s):
                b.append(s)
                yield from rec(i + 1)
                b.pop()
        tag = side[s]
        if pure[tag] is None:
            blocks.append([s])
            pure[tag] = len(blocks) - 1
            yield from rec(i + 1)
            pure[tag] = None
            blocks.pop()
        else:
            blocks[pure[tag]].append(s)
            yield from rec(i + 1)
            blocks[pure[tag]].pop()
        blocks.append([s])
        yield from rec(i + 1)
        blocks.pop()

    if totals[u] != totals[v]:
        return
    yield from rec(2)


def oplus_bisimilar(S, S2, s, s2, limit=12):
    """Search for a +-bisimulation relating inl(s) and inr(s2)."""
    _same_labels(S, S2)
    T = direct_sum(S, S2)
    if len(T.states) > limit:
        raise TooLarge(f"the +-search is limited to {limit} states in the sum")
    u, v = T.space.inl(s), T.space.inr(s2)
    seed = state_bisimilarity(T)
    if (u, v) in seed and _oplus_check(T, seed):
        return Verdict(True, certificate=seed, notes={"found_by": "state bisimilarity of the sum"})
    tried = 0
    for blocks in _oplus_candidates(T, u, v):
        tried += 1
        R = Rel.from_classes(T.space, blocks)
        if _oplus_check(T, R):
            return Verdict(True, certificate=R, notes={"found_by": "search", "candidates": tried})
    return Verdict(False, witness=("no +-bisimulation relates the pair", (u, v)),
                   notes={"candidates": tried})


def oplus_bisimilarity(S, S2, limit=12):
    """All cross pairs related by some +-bisimulation."""
    found = set()
    for s in S.states:
        for s2 in S2.states:
            if (s, s2) in found:
                continue
            v = oplus_bisimilar(S, S2, s, s2, limit)
            if v:
                found |= set(descend(v.certificate).pairs)
    return Rel(S.space, S2.space, found)


def vee_bisimilarity(S, S2):
    _same_labels(S, S2)
    return descend(event_bisimilarity(direct_sum(S, S2)))


def make_cospan_witness(S, S2, s, s2):
    """A cospan of zigzags through the quotient of the sum, or None."""
    _same_labels(S, S2)
    T = direct_sum(S, S2)
    lam = smallest_stable(T)
    u, v = T.space.inl(s), T.space.inr(s2)
    if lam.block_of(u) != lam.block_of(v):
        return None
    Q, pi = quotient(T, lam)
    f = Morphism(S, Q, {x: pi(T.space.inl(x)) for x in S.states})
    g = Morphism(S2, Q, {x: pi(T.space.inr(x)) for x in S2.states})
    return Q, f, g


def is_cospan(S, S2, T, f, g, s, s2):
    notes = {"f_surjective": f.is_surjective(), "g_surjective": g.is_surjective(),
             "jointly_surjective": (f.image() | g.image()) == frozenset(T.states)}
    for name, h in (("f", f), ("g", g)):
        v = check_zigzag(h)
        if not v:
            return Verdict(False, witness=(name, v.witness), notes=notes)
    if f(s) != g(s2):
        return Verdict(False, witness=("apex", f(s), g(s2)), notes=notes)
    return Verdict(True, certificate=(T, f, g), notes=notes)


def cospan_family(S, S2, T, f, g):
    """F = { f^-1 A (+) g^-1 A : A measurable in the apex }, as sets of the sum."""
    space = direct_sum(S, S2).space
    return [space.combine(f.preimage(A), g.preimage(A)) for A in T.space.measurable_sets()]


# ---------------------------------------------------------------- spans and couplings

def is_span(S, S2, W, f, g):
    """Both legs zigzag; the certificate is the image relation of W in S x S2."""
    rel = Rel(S.space, S2.space, ((f(w), g(w)) for w in W.states))
    for name, h in (("f", f), ("g", g)):
        v = check_zigzag(h)
        if not v:
            return Verdict(False, witness=(name, v.witness), certificate=rel)
    ext = is_ext_bisim(S, S2, rel)
    return Verdict(True, certificate=rel, notes={"image_is_ext_bisim": ext.holds})


def _trace_atoms(S, S2, R):
    groups = {}
    for s, t in sorted(R.pairs):
        groups.setdefault((S.space.atom_of[s], S2.space.atom_of[t]), []).append((s, t))
    return list(groups.items())


def _coupling(S, S2, atoms, a, s, t):
    mu, nu = S.measure(a, s), S2.measure(a, t)
    n = len(atoms)
    rows = []
    for k, w in enumerate(mu.weights):
        rows.append(([1 if key[0] == k else 0 for key, _ in atoms], w))
    for k, w in enumerate(nu.weights):
        rows.append(([1 if key[1] == k else 0 for key, _ in atoms], w))
    return feasible(LinSystem.of(n, rows))


def is_delta_bisim(S, S2, R):
    """Couplings on R (trace of the product sigma-algebra) with the kernels as marginals.

    One coupling per trace atom and label; all pairs of a trace atom share their
    kernels, so one linear system per (atom, label) decides it.
    """
    _same_labels(S, S2)
    atoms = _trace_atoms(S, S2, R)
    couplings = {}
    for i, (_, members) in enumerate(atoms):
        s, t = members[0]
        for a in S.labels:
            x = _coupling(S, S2, atoms, a, s, t)
            if x is None:
                return Verdict(False, witness=(a, (s, t)))
            couplings[(i, a)] = x
    cert = {"atoms": [frozenset(m) for _, m in atoms], "couplings": couplings}
    return Verdict(True, certificate=cert,
                   notes={"sigma_algebra": "trace of the product sigma-algebra on R"})


def delta_bisimilarity(S, S2):
    """Greatest relation admitting couplings: drop pairs without one and repeat."""
    _same_labels(S, S2)
    R = Rel.total(S.space, S2.space)
    while True:
        atoms = _trace_atoms(S, S2, R)
        keep = []
        for _, members in atoms:
            s, t = members[0]
            if all(_coupling(S, S2, atoms, a, s, t) is not None for a in S.labels):
                keep.extend(members)
        refined = Rel(S.space, S2.space, keep)
        if refined == R:
            return R
        R = refined


def pair_name(s, t):
    return f"({s},{t})"


def delta_span(S, S2, R, certificate):
    """The span carried by a Delta-bisimulation: apex R, legs the two projections."""
    atoms = certificate["atoms"]
    names = [[pair_name(s, t) for s, t in sorted(m)] for m in atoms]
    space = FinSpace([n for ns in names for n in ns], names)
    order = [space.atom_of[ns[0]] for ns in names]
    kernel = {}
    for a in S.labels:
        per_atom = [None] * len(atoms)
        for i in range(len(atoms)):
            w = [0] * len(atoms)
            for j, x in enumerate(certificate["couplings"][(i, a)]):
                w[order[j]] = x
            per_atom[order[i]] = Measure(space, w)
        kernel[a] = per_atom
    W = Lmp(space, S.labels, kernel)
    f = Morphism(W, S, {pair_name(s, t): s for m in atoms for s, t in m})
    g = Morphism(W, S2, {pair_name(s, t): t for m in atoms for s, t in m})
    return W, f, g


def monic_span(W, f, g):
    """The LMP on (f x g)[W] with the final sigma-algebra, and its two projections."""
    for name, h in (("f", f), ("g", g)):
        v = check_zigzag(h)
        if not v:
            raise NotZigzag(f"leg {name} is not a zigzag: {v.witness}")
    image = {}
    for w in W.states:
        key = (f(w), g(w))
        if key in image:
            raise NotInjective(f"{image[key]} and {w} have the same image {key}")
        image[key] = w
    name_of = {w: pair_name(*key) for key, w in image.items()}
    atoms = [[name_of[w] for w in atom] for atom in W.space.atoms]
    space = FinSpace(list(name_of.values()), atoms)
    kernel = {}
    for a in W.labels:
        per_atom = [None] * len(atoms)
        for k, m in enumerate(W.kernel[a]):
            w = [0] * len(atoms)
            for j, x in enumerate(m.weights):
                w[space.atom_of[atoms[j][0]]] = x
            per_atom[space.atom_of[atoms[k][0]]] = Measure(space, w)
        kernel[a] = per_atom
    P = Lmp(space, W.labels, kernel)
    p1 = Morphism(P, f.target, {name_of[w]: f(w) for w in W.states})
    p2 = Morphism(P, g.target, {name_of[w]: g(w) for w in W.states})
    return P, p1, p2


def monic_span_lmp(W, f, g):
    return monic_span(W, f, g)[0]


# ---------------------------------------------------------------- finality

def _stable_blocks(S, blocks):
    """Every kernel gives constant mass to each block across the atoms of each block."""
    for a in S.labels:
        ker = S.kernel[a]
        for b in blocks:
            for c in blocks:
                values = {ker[k].on_atoms(c) for k in b}
                if len(values) > 1:
                    return False
    return True


def greatest_stable_within(S, sigma0, limit=10):
    """Inclusion-maximal stable coarsenings of ``sigma0`` and the greatest one if unique."""
    sigma0 = SubAlgebra.coerce(S.space, sigma0)
    if len(sigma0.blocks) > limit:
        raise TooLarge(f"{len(sigma0.blocks)} atoms exceed the bound of {limit}")
    stable = []
    for part in set_partitions(range(len(sigma0.blocks))):
        blocks = [frozenset().union(*(sigma0.blocks[i] for i in p)) for p in part]
        if _stable_blocks(S, blocks):
            stable.append(SubAlgebra(S.space, blocks))
    maximal = [x for x in stable if not any(x != y and x <= y for y in stable)]
    maximal.sort(key=lambda x: [sorted(b) for b in x.blocks])
    return maximal, (maximal[0] if len(maximal) == 1 else None)


def v_final_check(pi):
    """Is the pulled-back algebra the greatest stable sub-algebra of Sigma(ker pi)?"""
    if not pi.is_surjective():
        raise NotSurjective("the map is not surjective")
    z = check_zigzag(pi)
    if not z:
        raise NotZigzag(f"the map is not a zigzag: {z.witness}")
    S = pi.source
    kernel = Rel(S.space, S.space, ((s, t) for s in S.states for t in S.states if pi(s) == pi(t)))
    lam = SubAlgebra.generated(S.space, [pi.preimage(atom) for atom in pi.target.space.atoms])
    _, greatest = greatest_stable_within(S, r_closed_sets(S.space, kernel))
    return greatest == lam


# ---------------------------------------------------------------- +_P

def oplus_P_bisimilar(S, S2, s, s2):
    """Decide +_P through vee, and build the witness on (S + S2) + W explicitly.

    W is the event companion of the sum.  The relation pairs each class C of
    event bisimilarity with its copy in W: its classes are inl[C] u inr[C].
    """
    T = direct_sum(S, S2)
    lam = smallest_stable(T)
    u, v = T.space.inl(s), T.space.inr(s2)
    if lam.block_of(u) != lam.block_of(v):
        cu = frozenset(lam.atoms[lam.block_of(u)])
        cv = frozenset(lam.atoms[lam.block_of(v)])
        return Verdict(False, witness=("different event classes of the sum", cu, cv))
    W = event_companion(T)
    TW = direct_sum(T, W)
    sp = TW.space
    classes = [[sp.inl(x) for x in c] + [sp.inr(x) for x in c] for c in lam.state_blocks()]
    R = Rel.from_classes(sp, classes)
    check = is_state_bisim(TW, R)
    related = (sp.inl(u), sp.inl(v)) in R
    return Verdict(check.holds and related, witness=None if check.holds else check.witness,
                   certificate={"companion": W, "sum": TW, "relation": R},
                   notes={"recheck": check.holds})

