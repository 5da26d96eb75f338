from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from lmpbisim.errors import MassExceedsOne, NotMeasurable, UnknownLabelOrState, ValidationError
from lmpbisim.measurable import (
    FinSpace,
    Measure,
    PairFamily,
    Rel,
    SubAlgebra,
    bi_sigma_close,
    closed_pairs,
    critical_thresholds,
    delta_bowtie,
    delta_times_trace,
    descend,
    is_r_closed_pair,
    lift_complete,
    lift_cross,
    lift_measures_ext,
    lift_measures_int,
    lift_side,
    measure_classes,
    r_closed_sets,
    relation_of,
    sigma_generate,
    sum_space,
)
from lmpbisim.modelio import load_fixture


def blocks(space):
    return {frozenset(a) for a in space.atoms}


# ---------------------------------------------------------------- spaces

def test_space_rejects_bad_input():
    with pytest.raises(ValidationError):
        FinSpace([])
    with pytest.raises(ValidationError):
        FinSpace(["a", "a"])
    with pytest.raises(ValidationError):
        FinSpace(["a", "b"], [["a"], ["a", "b"]])
    with pytest.raises(ValidationError):
        FinSpace(["a", "b"], [["a"]])
    with pytest.raises(UnknownLabelOrState):
        FinSpace(["a"], [["a", "z"]])


def test_non_measurable_query_is_an_error():
    space = FinSpace(["a", "b", "c"], [["a", "b"], ["c"]])
    with pytest.raises(NotMeasurable):
        space.measurable({"a"})
    mu = Measure(space, [Fraction(1, 2), Fraction(1, 4)])
    with pytest.raises(NotMeasurable):
        mu({"a"})
    assert mu({"a", "b"}) == Fraction(1, 2)


def test_measure_mass_bound():
    space = FinSpace(["a", "b"])
    with pytest.raises(MassExceedsOne):
        Measure(space, [Fraction(5, 8), Fraction(1, 2)])


@pytest.mark.parametrize("states,gens,expected", [
    (["1", "2", "3"], [{"1", "2"}], [{"1", "2"}, {"3"}]),
    (["1", "2"], [], [{"1", "2"}]),
    (["1", "2", "3"], [{"1", "2"}, {"2", "3"}], [{"1"}, {"2"}, {"3"}]),
])
def test_sigma_generate(states, gens, expected):
    assert blocks(sigma_generate(states, gens)) == {frozenset(e) for e in expected}


def _all_sigma_algebras(states):
    return [frozenset(frozenset(b) for b in part) for part in oracles.partitions(states)]


@given(st.lists(st.sets(st.sampled_from("abcd")), max_size=3))
def test_sigma_generate_is_least(gens):
    """The generated algebra contains the generators and is coarser than any algebra that does."""
    states = list("abcd")
    got = frozenset(blocks(sigma_generate(states, gens)))

    def contains(part, A):
        return all(b <= A or not (b & A) for b in part)

    assert all(contains(got, frozenset(g)) for g in gens)
    for part in _all_sigma_algebras(states):
        if all(contains(part, frozenset(g)) for g in gens):
            assert all(any(b <= c for c in got) for b in part)


# ---------------------------------------------------------------- closed sets

def test_r_closed_sets_examples():
    space = FinSpace(["a", "b", "c"])
    assert len(r_closed_sets(space, Rel(space, space)).sets()) == 8
    assert {frozenset(A) for A in r_closed_sets(space, Rel.total(space)).sets()} == {frozenset(), frozenset("abc")}
    sigma = r_closed_sets(space, Rel(space, space, [("a", "b")]))
    assert set(sigma.state_blocks()) == {frozenset("ab"), frozenset("c")}
    classes = {frozenset(c) for c in relation_of(space, sigma.sets()).classes()}
    assert classes == {frozenset("ab"), frozenset("c")}


def test_relation_of_examples():
    space = FinSpace(["1", "2", "3"])
    assert relation_of(space, []) == Rel.total(space)
    R = relation_of(space, [{"1", "2"}, {"3"}])
    assert {frozenset(c) for c in R.classes()} == {frozenset({"1", "2"}), frozenset({"3"})}


def _fixture_spaces():
    return load_fixture("two-chain").space, load_fixture("three-sink").space


def test_closed_pair_examples():
    left, right = _fixture_spaces()
    R = Rel(left, right, [("x", "x'"), ("y", "z'")])
    assert is_r_closed_pair(R, set(), {"y'"})
    assert not is_r_closed_pair(R, {"y"}, {"y'"})
    assert is_r_closed_pair(R, left.states, right.states)


def test_closed_pairs_fixture_count_matches_brute_force():
    left, right = _fixture_spaces()
    pairs = [("x", "x'"), ("y", "z'")]
    fam = closed_pairs(left, right, Rel(left, right, pairs))
    want = oracles.closed_pairs_brute(left, right, pairs)
    assert {(frozenset(a), frozenset(b)) for a, b in fam.pairs} == want
    # y' is unconstrained and {x},{y} fix x' and z': 4 * 2 pairs
    assert len(want) == 8
    assert (frozenset(), frozenset({"y'"})) in want
    assert (frozenset({"x"}), frozenset({"x'"})) in want


def test_closed_pairs_empty_and_identity():
    left, right = _fixture_spaces()
    assert len(closed_pairs(left, right, Rel(left, right)).pairs) == 4 * 8
    ident = closed_pairs(right, right, Rel.identity(right))
    assert all(a == b for a, b in ident.pairs)
    assert len(ident.pairs) == 8


def _space(draw_atoms, prefix):
    states = [f"{prefix}{i}" for i in range(len(draw_atoms))]
    groups = {}
    for s, g in zip(states, draw_atoms):
        groups.setdefault(g, []).append(s)
    return FinSpace(states, groups.values())


spaces = st.lists(st.integers(0, 2), min_size=1, max_size=4)


@settings(max_examples=60)
@given(spaces, spaces, st.data())
def test_closed_pairs_agree_with_brute_force(la, ra, data):
    left, right = _space(la, "l"), _space(ra, "r")
    all_pairs = [(s, t) for s in left.states for t in right.states]
    pairs = data.draw(st.sets(st.sampled_from(all_pairs)))
    fam = closed_pairs(left, right, Rel(left, right, pairs))
    got = {(frozenset(a), frozenset(b)) for a, b in fam.pairs}
    assert got == oracles.closed_pairs_brute(left, right, pairs)
    for a, b in got:
        assert (a, b) in fam
    assert len(fam) == len(got)


@settings(max_examples=60)
@given(spaces, st.data())
def test_r_closed_sets_invariants(la, data):
    space = _space(la, "s")
    all_pairs = [(s, t) for s in space.states for t in space.states]
    small = data.draw(st.sets(st.sampled_from(all_pairs)))
    big = small | data.draw(st.sets(st.sampled_from(all_pairs)))
    s_small = r_closed_sets(space, Rel(space, space, small))
    s_big = r_closed_sets(space, Rel(space, space, big))
    assert {frozenset(A) for A in s_small.sets()} == set(oracles.r_closed_brute(space, small))
    # a sub-algebra: closed under complement and union
    members = {frozenset(A) for A in s_small.sets()}
    assert all(frozenset(space.states) - A in members for A in members)
    assert all(A | B in members for A in members for B in members)
    # antimonotone
    assert s_big <= s_small
    cp_small = closed_pairs(space, space, Rel(space, space, small)).pairs
    cp_big = closed_pairs(space, space, Rel(space, space, big)).pairs
    assert cp_big <= cp_small
    # the relation of any family is an equivalence
    assert relation_of(space, members).is_equivalence()


@settings(max_examples=40)
@given(spaces, st.data())
def test_reflexive_relation_closed_pairs_are_diagonal(la, data):
    space = _space(la, "s")
    all_pairs = [(s, t) for s in space.states for t in space.states]
    extra = data.draw(st.sets(st.sampled_from(all_pairs)))
    R = Rel(space, space, extra | {(s, s) for s in space.states})
    assert all(a == b for a, b in closed_pairs(space, space, R).pairs)


# ---------------------------------------------------------------- sums and lifts

def test_sum_space_examples():
    a, b = FinSpace(["1"]), FinSpace(["2"])
    sp = sum_space(a, b)
    assert len(sp.states) == 2 and len(sp.atoms) == 2
    coarse = FinSpace(["a", "b"], [["a", "b"]])
    sp = sum_space(coarse, FinSpace(["c"]))
    assert blocks(sp) == {frozenset({"L:a", "L:b"}), frozenset({"R:c"})}


def test_descend_and_lifts():
    left, right = _fixture_spaces()
    sp = sum_space(left, right)
    R = Rel(sp, sp, [(sp.inl("x"), sp.inr("x'")), (sp.inl("y"), sp.inr("z'")), (sp.inr("y'"), sp.inr("z'"))])
    assert set(descend(R).pairs) == {("x", "x'"), ("y", "z'")}
    same_side = Rel(sp, sp, [(sp.inl("x"), sp.inl("y"))])
    assert not descend(same_side).pairs
    assert not lift_cross(Rel(left, right)).pairs
    assert set(lift_cross(Rel(left, right, [("x", "x'")])).pairs) == {("L:x", "R:x'")}


def test_lift_complete_examples():
    one = FinSpace(["a"])
    lifted = lift_complete(Rel.identity(one))
    assert lifted == Rel.total(lifted.left)
    two = FinSpace(["a", "b"])
    assert set(lift_complete(Rel(two, two, [("a", "b")])).pairs) == {
        ("L:a", "L:b"), ("L:a", "R:b"), ("R:a", "L:b"), ("R:a", "R:b")}


def test_lift_side():
    space, other = FinSpace(["a", "b"]), FinSpace(["c"])
    Rl = lift_side(Rel.identity(space), "left", other)
    assert set(Rl.pairs) == {("L:a", "L:a"), ("L:b", "L:b")}
    Rr = lift_side(Rel(space, space), "right", other)
    assert not Rr.pairs
    with pytest.raises(ValidationError):
        lift_side(Rel.identity(space), "middle", other)


@settings(max_examples=40)
@given(spaces, spaces, st.data())
def test_descend_inverts_lift_cross(la, ra, data):
    left, right = _space(la, "l"), _space(ra, "r")
    pairs = data.draw(st.sets(st.sampled_from([(s, t) for s in left.states for t in right.states])))
    R = Rel(left, right, pairs)
    assert descend(lift_cross(R)) == R


@settings(max_examples=30)
@given(spaces, st.data())
def test_restriction_of_sum_closed_sets(la, data):
    """Closed sets of a one-side relation on the sum, restricted to that side, are its own closed sets."""
    space, other = _space(la, "s"), _space(data.draw(spaces), "o")
    pairs = data.draw(st.sets(st.sampled_from([(s, t) for s in space.states for t in space.states])))
    R = Rel(space, space, pairs)
    sp = sum_space(space, other)
    on_sum = r_closed_sets(sp, lift_side(R, "left", other))
    restricted = {frozenset(sp.left_part(A)) for A in on_sum.sets()}
    assert restricted == {frozenset(A) for A in r_closed_sets(space, R).sets()}


# ---------------------------------------------------------------- lifted measures

def test_lift_measures_int_examples():
    space = FinSpace(["a", "b", "c"])
    mu = Measure(space, [Fraction(1, 2), 0, Fraction(1, 2)])
    nu = Measure(space, [Fraction(1, 4), Fraction(1, 4), Fraction(1, 2)])
    assert lift_measures_int(space, Rel(space, space, [("a", "b")]), mu, nu)
    assert lift_measures_int(space, Rel.total(space), mu, nu)
    assert not lift_measures_int(space, Rel.identity(space), mu, nu)
    assert lift_measures_int(space, Rel.identity(space), mu, mu)


def test_lift_measures_ext_examples():
    left, right = _fixture_spaces()
    assert lift_measures_ext(left, right, Rel(left, right, [("x", "x'"), ("y", "y'")]),
                             Measure.dirac(left, "y"), Measure.dirac(right, "y'"))
    assert lift_measures_ext(left, right, Rel(left, right), Measure.zero(left), Measure.zero(right))
    assert not lift_measures_ext(left, right, Rel(left, right), Measure.dirac(left, "y"), Measure.zero(right))


@settings(max_examples=60)
@given(spaces, st.data())
def test_ext_lift_agrees_with_int_lift_for_reflexive_relations(la, data):
    space = _space(la, "s")
    pairs = data.draw(st.sets(st.sampled_from([(s, t) for s in space.states for t in space.states])))
    R = Rel(space, space, pairs | {(s, s) for s in space.states})
    k = len(space.atoms)

    def measure():
        w = data.draw(st.lists(st.integers(0, 3), min_size=k, max_size=k))
        total = max(sum(w), 1)
        return Measure(space, [Fraction(x, total) for x in w])

    mu, nu = measure(), measure()
    assert lift_measures_ext(space, space, R, mu, nu) == lift_measures_int(space, R, mu, nu)


# ---------------------------------------------------------------- bi-sigma families and traces

def test_bi_sigma_close_empty_is_degenerate():
    left, right = _fixture_spaces()
    fam = bi_sigma_close(left, right, [])
    assert not fam.closed and len(fam) == 0


def test_bi_sigma_close_single_pair():
    left, right = _fixture_spaces()
    fam = bi_sigma_close(left, right, [({"x"}, {"x'", "y'"})])
    assert {(frozenset(a), frozenset(b)) for a, b in fam.pairs} == {
        (frozenset({"x"}), frozenset({"x'", "y'"})), (frozenset({"y"}), frozenset({"z'"})),
        (frozenset({"x", "y"}), frozenset({"x'", "y'", "z'"})), (frozenset(), frozenset())}


@settings(max_examples=60)
@given(st.lists(st.tuples(st.sets(st.sampled_from("abc")), st.sets(st.sampled_from("pq"))), max_size=3))
def test_bi_sigma_close_agrees_with_brute_force(gens):
    left, right = FinSpace(list("abc")), FinSpace(list("pq"))
    got = {(frozenset(a), frozenset(b)) for a, b in bi_sigma_close(left, right, gens).pairs} if gens else set()
    assert got == oracles.bi_sigma_closure_brute("abc", "pq", gens)


def test_bi_sigma_close_diagonal():
    space = FinSpace(list("abc"))
    gens = [({"a"}, {"a"}), ({"a", "b"}, {"a", "b"})]
    fam = bi_sigma_close(space, space, gens)
    sigma = {frozenset(A) for A in SubAlgebra.generated(space, [g[0] for g in gens]).sets()}
    assert {(frozenset(a), frozenset(b)) for a, b in fam.pairs} == {(A, A) for A in sigma}


def test_measure_classes_examples():
    space = FinSpace(["p", "q"])
    m1 = Measure(space, [Fraction(1, 2), Fraction(1, 2)])
    m2 = Measure(space, [Fraction(1, 2), Fraction(1, 4)])
    m3 = Measure(space, [Fraction(1, 4), Fraction(3, 4)])
    assert measure_classes([m1], [{"p"}]) == [[m1]]
    got = {frozenset(c) for c in measure_classes([m1, m2, m3], [{"p"}])}
    assert got == {frozenset({m1, m2}), frozenset({m3})}


def test_delta_bowtie_examples():
    space = FinSpace(["e", "f"])
    low = Measure(space, [Fraction(1, 4), 0])
    high = Measure(space, [Fraction(1, 2), 0])
    U = [low, high]
    assert delta_bowtie(U, space.full, ">=", 0) == U
    assert delta_bowtie(U, space.full, ">", 1) == []
    assert delta_bowtie(U, {"e"}, ">", Fraction(1, 3)) == [high]


def test_critical_thresholds_cover_midpoints():
    got = critical_thresholds([Fraction(1, 4), Fraction(1, 2)])
    assert got == [0, Fraction(1, 8), Fraction(1, 4), Fraction(3, 8), Fraction(1, 2), Fraction(3, 4), 1]


def test_diagonal_trace_is_diagonal():
    space = FinSpace(["p", "q"])
    U = [Measure(space, [Fraction(a, 4), Fraction(b, 4)]) for a in range(3) for b in range(3 - a)]
    diag = PairFamily(space, space, atoms=[(frozenset({"p"}), frozenset({"p"})), (frozenset({"q"}), frozenset({"q"}))])
    trace = delta_times_trace(U, U, diag)
    assert all(a == b for a, b in trace.pairs)
