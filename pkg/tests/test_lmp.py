from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from lmpbisim.errors import (
    FormulaSyntaxError,
    LabelMismatch,
    LeakageOutsideB,
    MassExceedsOne,
    NonMeasurableKernel,
    NotStable,
    UnknownLabel,
    ValidationError,
)
from lmpbisim.generate import gen_random
from lmpbisim.lmp import (
    Lmp,
    Morphism,
    check_zigzag,
    direct_sum,
    event_companion,
    identity_morphism,
    is_stable,
    quotient,
    restrict_sublmp,
    smallest_stable,
    zero_lmp,
)
from lmpbisim.logic import TT, And, Diamond, depth, parse_formula, semantics
from lmpbisim.measurable import SubAlgebra
from lmpbisim.modelio import load_fixture

F = Fraction
seeds = st.integers(0, 2 ** 32 - 1)


def random_lmp(seed, max_states=4, labels=("a", "b")):
    return gen_random(max_states, labels=labels, denominator=4, seed=seed)


# ---------------------------------------------------------------- validation

def test_two_chain_validates():
    S = load_fixture("two-chain")
    assert S.tau("a", "x", {"y"}) == 1
    assert S.measure("a", "y").total == 0


def test_atom_constancy_enforced():
    with pytest.raises(NonMeasurableKernel):
        Lmp.build(["a", "b"], ["l"], {"l": {"a": {"a+b": "1/2"}}}, atoms=[["a", "b"]])
    S = Lmp.build(["a", "b"], ["l"], {"l": {"a": {"a+b": "1/2"}, "b": {"a+b": "1/2"}}}, atoms=[["a", "b"]])
    assert S.tau("l", "b", {"a", "b"}) == F(1, 2)


def test_mass_above_one_rejected():
    with pytest.raises(MassExceedsOne):
        Lmp.build(["x", "y"], ["a"], {"a": {"x": {"x": "5/8", "y": "1/2"}}})


def test_unknown_label_in_kernel_rejected():
    with pytest.raises(ValidationError):
        Lmp.build(["x"], ["a"], {"b": {"x": {"x": "1"}}})


# ---------------------------------------------------------------- zigzags and sums

def test_zigzag_examples():
    S, S2 = load_fixture("two-chain"), load_fixture("three-sink")
    assert check_zigzag(identity_morphism(S)).holds
    assert check_zigzag(Morphism(S, S2, {"x": "x'", "y": "y'"})).holds
    v = check_zigzag(Morphism(S, S2, {"x": "x'", "y": "z'"}))
    assert not v.holds
    a, s, B = v.witness
    assert (a, s, set(B)) == ("a", "x", {"y'"})


def test_zigzag_measurability_failure():
    coarse = Lmp.build(["u", "v"], ["a"], {}, atoms=[["u", "v"]])
    fine = zero_lmp(["p", "q"], ["a"])
    v = check_zigzag(Morphism(coarse, fine, {"u": "p", "v": "q"}))
    assert not v.holds and v.witness[0] == "measurability"


def test_direct_sum_examples():
    S, S2 = load_fixture("two-chain"), load_fixture("three-sink")
    T = direct_sum(S, S2)
    assert len(T.states) == 5
    assert T.tau("a", "L:x", {"L:y"}) == 1
    single = zero_lmp(["o"], ["a"])
    assert len(direct_sum(S, single).states) == 1 + len(S.states)
    with pytest.raises(LabelMismatch):
        direct_sum(S, zero_lmp(["o"], ["b"]))


# ---------------------------------------------------------------- logic

def test_parse_examples():
    assert parse_formula("tt") == TT
    assert parse_formula("<a>{>1/2} tt") == Diamond("a", ">", F(1, 2), TT)
    phi = parse_formula("(<a>{>0} tt & <b>{>1/4} tt)")
    assert isinstance(phi, And) and phi.right == Diamond("b", ">", F(1, 4), TT)
    assert parse_formula(str(phi)) == phi
    assert depth(parse_formula("<a>{>0} <a>{>0} tt")) == 2


@pytest.mark.parametrize("bad", ["", "t", "<a>{>1/2}", "(tt & tt", "<a>{=1} tt", "tt tt", "<a>{>1/0} tt"])
def test_parse_errors(bad):
    with pytest.raises(FormulaSyntaxError):
        parse_formula(bad)


def test_semantics_examples():
    S = load_fixture("two-chain")
    assert set(semantics(S, TT)) == {"x", "y"}
    assert set(semantics(S, parse_formula("<a>{>1/2} tt"))) == {"x"}
    loop = load_fixture("fan-loop")
    assert set(semantics(loop, parse_formula("<a>{>0} <a>{>0} tt"))) == {"s4'"}
    with pytest.raises(UnknownLabel):
        semantics(S, parse_formula("<b>{>0} tt"))
    with pytest.raises(ValidationError):
        semantics(S, parse_formula("<a>{>=1} tt"))
    assert set(semantics(S, parse_formula("<a>{>=1} tt"), extended=True)) == {"x"}


def formulas(labels, max_depth=3):
    leaf = st.just(TT)
    q = st.sampled_from([F(0), F(1, 4), F(1, 3), F(1, 2), F(3, 4)])

    def extend(children):
        return st.one_of(
            st.builds(And, children, children),
            st.builds(Diamond, st.sampled_from(labels), st.just(">"), q, children))
    return st.recursive(leaf, extend, max_leaves=4).filter(lambda phi: depth(phi) <= max_depth)


@settings(max_examples=80)
@given(seeds, st.data())
def test_zigzag_preserves_semantics(seed, data):
    S = random_lmp(seed)
    Q, pi = quotient(S, smallest_stable(S))
    phi = data.draw(formulas(list(S.labels)))
    assert set(semantics(S, phi)) == set(pi.preimage(semantics(Q, phi)))


# ---------------------------------------------------------------- stability

def test_stability_examples():
    S = load_fixture("two-chain")
    assert is_stable(S, SubAlgebra.whole(S.space))
    assert not is_stable(S, SubAlgebra.trivial(S.space))
    sink = load_fixture("dirac-pair")
    assert is_stable(sink, SubAlgebra.whole(sink.space))
    zero = zero_lmp(["p", "q"], ["a"])
    assert is_stable(zero, SubAlgebra.trivial(zero.space))
    T = direct_sum(load_fixture("fan"), load_fixture("fan-loop"))
    lam = SubAlgebra.from_state_blocks(T.space, [{"L:s1", "L:s2", "R:s1'"}, {"L:s3", "R:s3'"}, {"R:s4'"}])
    assert is_stable(T, lam)


def test_smallest_stable_examples():
    zero = zero_lmp(["p", "q", "r"], ["a"])
    assert smallest_stable(zero) == SubAlgebra.trivial(zero.space)
    S = load_fixture("two-chain")
    assert smallest_stable(S) == SubAlgebra.whole(S.space)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_smallest_stable_is_least(seed):
    S = gen_random(5, labels=("a", "b"), denominator=3, seed=seed)
    lam = smallest_stable(S)
    assert is_stable(S, lam)
    assert frozenset(frozenset(b) for b in lam.state_blocks()) == oracles.smallest_stable_brute(S)


@settings(max_examples=40)
@given(seeds)
def test_stable_families_closed_under_meet_and_join(seed):
    S = random_lmp(seed)
    lam = smallest_stable(S)
    whole = SubAlgebra.whole(S.space)
    # meet of the least stable algebra with the whole one, and their join
    assert is_stable(S, list(lam.sets()) + list(whole.sets()))
    common = [A for A in whole.sets() if A in lam]
    assert is_stable(S, common)


# ---------------------------------------------------------------- quotients and companions

def test_quotient_examples():
    S = load_fixture("two-chain")
    Q, pi = quotient(S, SubAlgebra.whole(S.space))
    assert len(Q.states) == 2 and check_zigzag(pi).holds
    T = direct_sum(load_fixture("fan"), load_fixture("fan-loop"))
    Q, pi = quotient(T, smallest_stable(T))
    assert set(Q.states) == {"L:s1+L:s2+R:s1'", "L:s3+R:s3'", "R:s4'"}
    assert Q.measure("a", "L:s3+R:s3'").total == 0
    assert Q.tau("a", "R:s4'", {"R:s4'"}) == 1
    with pytest.raises(NotStable):
        quotient(S, SubAlgebra.trivial(S.space))


@settings(max_examples=60)
@given(seeds)
def test_quotient_projection_is_surjective_zigzag(seed):
    S = random_lmp(seed)
    Q, pi = quotient(S, smallest_stable(S))
    assert pi.is_surjective()
    assert check_zigzag(pi).holds


def test_event_companion():
    T = direct_sum(load_fixture("fan"), load_fixture("fan-loop"))
    W = event_companion(T)
    assert len(W.space.atoms) == 3 and W.states == T.states
    S = load_fixture("two-chain")
    assert event_companion(S) == S


def test_restrict_sublmp():
    S = load_fixture("three-sink")
    assert restrict_sublmp(S, S.states) == S
    R = restrict_sublmp(S, {"x'", "y'"})
    assert R.states == ("x'", "y'") and R.tau("a", "x'", {"y'"}) == 1
    with pytest.raises(LeakageOutsideB) as err:
        restrict_sublmp(load_fixture("two-chain"), {"x"})
    assert "x" in str(err.value)
