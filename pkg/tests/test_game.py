import json
import random

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from lmpbisim.errors import LabelMismatch, UnknownLabelOrState
from lmpbisim.game import (
    DuplicatorMove,
    Game,
    Position,
    SpoilerMove,
    cutoff,
    legal_duplicator_moves,
    legal_spoiler_moves,
    parse_duplicator_input,
    parse_spoiler_input,
    play,
    play_interactive,
    random_plays,
    random_spoiler_move,
    referee_step,
    replay,
    solve,
    spoiler_move_error,
)
from lmpbisim.generate import gen_random
from lmpbisim.modelio import load_fixture
from lmpbisim.nlmp import Nlmp, embed_lmp, ext_state_bisimilarity

seeds = st.integers(0, 2 ** 32 - 1)


def chain_game():
    return Game(embed_lmp(load_fixture("two-chain")), embed_lmp(load_fixture("three-sink")))


def dirac_vs_zero():
    N = Nlmp.build(["x"], ["a"], {"a": {"x": [{"x": "1"}]}})
    N2 = Nlmp.build(["x'"], ["a"], {"a": {"x'": [{}]}})
    return N, N2


def random_pair(seed, max_states=3):
    rng = random.Random(seed)
    labels = ("a",) if rng.random() < 0.5 else ("a", "b")
    kw = dict(kind="nlmp", max_measures=2, labels=labels, denominator=rng.randint(1, 4))
    return (gen_random(max_states, seed=rng.randrange(2 ** 32), **kw),
            gen_random(max_states, seed=rng.randrange(2 ** 32), prefix="t", **kw))


# ---------------------------------------------------------------- solving

def test_chain_winners():
    sol = solve(chain_game())
    assert sol.winner(("x", "x'")) == "duplicator"
    assert sol.winner(("x", "z'")) == "spoiler"
    assert sol.rank[("x", "z'")] == 0
    assert sol.notes["agrees_with_bisimilarity"]


def test_empty_transitions_duplicator_wins():
    N = Nlmp.build(["p"], ["a"], {})
    N2 = Nlmp.build(["q"], ["a"], {})
    sol = solve(N, N2)
    assert sol.winner(("p", "q")) == "duplicator"
    assert legal_spoiler_moves(sol.game, Position("p", "q")) == []
    t = play(sol.game, ("p", "q"), sol.spoiler_move, sol.duplicator_move)
    assert t["verdict"] == "duplicator" and len(t["rounds"]) == 1


def test_one_sided_transition_is_a_spoiler_win():
    N = Nlmp.build(["p"], ["a"], {"a": {"p": [{"p": "1/2"}]}})
    N2 = Nlmp.build(["q"], ["a"], {})
    sol = solve(N, N2)
    mv = sol.spoiler_move(Position("p", "q"))
    assert mv.pairs == () and legal_duplicator_moves(sol.game, Position("p", "q"), mv) == []
    assert referee_step(sol.game, Position("p", "q"), mv, None).kind == "duplicator_loses"


def test_dirac_vs_zero_moves_use_full_pairs():
    game = Game(*dirac_vs_zero())
    moves = legal_spoiler_moves(game, Position("x", "x'"))
    assert sorted(m.side for m in moves) == [0, 1]
    for m in moves:
        mine, other = (({"x"}, {"x'"}) if m.side == 0 else ({"x'"}, {"x"}))
        assert m.pairs == ((frozenset(mine), frozenset(other)),)
    assert solve(game).winner(("x", "x'")) == "spoiler"


def test_label_mismatch():
    with pytest.raises(LabelMismatch):
        Game(Nlmp.build(["p"], ["a"], {}), Nlmp.build(["q"], ["b"], {}))


# ---------------------------------------------------------------- moves and referee

def test_duplicator_has_no_reply_to_full_pair():
    game = chain_game()
    pos = Position("x", "x'")
    S, S2 = game.procs[0].space, game.procs[1].space
    mu = game.procs[0].T("a", "x")[0]
    smove = SpoilerMove("a", 0, mu, game.procs[1].T("a", "x'"), ((S.full, S2.full),))
    assert legal_duplicator_moves(game, pos, smove) == []


def test_duplicator_replies_cross_the_pair():
    game = chain_game()
    pos = Position("x", "x'")
    mu = game.procs[0].T("a", "x")[0]
    opposing = game.procs[1].T("a", "x'")
    smove = SpoilerMove("a", 0, mu, opposing, ((frozenset(), frozenset({"y'"})),))
    assert spoiler_move_error(game, pos, smove) is None
    replies = legal_duplicator_moves(game, pos, smove)
    assert replies and all(d.x1 == "y'" for d in replies)
    assert {d.x0 for d in replies} == {"x", "y"}


def test_referee_judgements():
    game = chain_game()
    pos = Position("x", "x'")
    mu = game.procs[0].T("a", "x")[0]
    opposing = game.procs[1].T("a", "x'")
    # equal masses: the claim is false and Spoiler loses
    bogus = SpoilerMove("a", 0, mu, opposing, ((frozenset({"y"}), frozenset({"y'"})),))
    assert referee_step(game, pos, bogus, DuplicatorMove("y", "y'", 0)).kind == "spoiler_loses"
    good = SpoilerMove("a", 0, mu, opposing, ((frozenset(), frozenset({"y'"})),))
    # both states outside their sets breaks the exclusive-or
    assert referee_step(game, pos, good, DuplicatorMove("y", "z'", 0)).kind == "duplicator_loses"
    assert referee_step(game, pos, good, DuplicatorMove("y", "y'", 3)).kind == "duplicator_loses"
    assert referee_step(game, pos, good, DuplicatorMove("y", "nope", 0)).kind == "duplicator_loses"
    assert referee_step(game, pos, good, None).kind == "duplicator_loses"
    step = referee_step(game, pos, good, DuplicatorMove("y", "y'", 0))
    assert step.kind == "next" and step.position == Position("y", "y'", 1)
    assert referee_step(game, pos, None, None).kind == "spoiler_loses"
    wrong_label = SpoilerMove("b", 0, mu, opposing, good.pairs)
    assert spoiler_move_error(game, pos, wrong_label)


def test_check_position_rejects_unknown_states():
    with pytest.raises(UnknownLabelOrState):
        chain_game().check_position(Position("x", "q"))


# ---------------------------------------------------------------- strategies

@settings(max_examples=40, deadline=None)
@given(seeds)
def test_region_matches_oracle_and_is_determined(seed):
    N, N2 = random_pair(seed)
    sol = solve(N, N2)
    assert set(sol.region) == oracles.ext_state_bisimilarity_brute(N, N2)
    assert set(sol.region) == set(ext_state_bisimilarity(N, N2).pairs)
    for p in sol.game.positions():
        # exactly one player wins each position
        assert (p in sol.region) != (p in sol.rank)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_strategies_are_sound_one_round_deep(seed):
    N, N2 = random_pair(seed)
    sol = solve(N, N2)
    game = sol.game
    rng = random.Random(seed)
    for p in game.positions():
        pos = Position(*p)
        if p in sol.region:
            tries = legal_spoiler_moves(game, pos) + [random_spoiler_move(game, pos, rng) for _ in range(10)]
            for smove in tries:
                if smove is None:
                    continue
                d = sol.duplicator_move(pos, smove)
                step = referee_step(game, pos, smove, d)
                assert step.kind == "next" and step.position.pair in sol.region
        else:
            smove = sol.spoiler_move(pos)
            assert spoiler_move_error(game, pos, smove) is None
            for d in legal_duplicator_moves(game, pos, smove):
                # every reply falls to a position Spoiler wins sooner
                assert sol.rank.get((d.x0, d.x1), float("inf")) < sol.rank[p]


def test_spoiler_wins_within_rank_rounds():
    sol = solve(chain_game())
    for t in random_plays(sol, ("x", "z'"), 20, seed=3):
        assert t["verdict"] == "spoiler"
        assert len(t["rounds"]) <= sol.rank[("x", "z'")] + 1


def test_cutoff_counts_positions():
    assert cutoff(chain_game()) == 2 * 3 + 1


# ---------------------------------------------------------------- transcripts

def test_replay_round_trip():
    sol = solve(chain_game())
    for start in [("x", "x'"), ("x", "z'"), ("y", "z'")]:
        for t in random_plays(sol, start, 5, seed=1):
            assert replay(sol.game, json.loads(json.dumps(t))) == t["verdict"] == sol.winner(start)


def test_replay_detects_tampering():
    sol = solve(chain_game())
    t = random_plays(sol, ("x", "z'"), 1)[0]
    t["rounds"][0]["position"] = ["y", "y'"]
    with pytest.raises(ValueError):
        replay(sol.game, t)
    assert replay(sol.game, {"verdict": "abandoned", "start": ["x", "x'"], "rounds": []}) == "abandoned"


# ---------------------------------------------------------------- text protocol

def test_parse_spoiler_input():
    game = chain_game()
    pos = Position("x", "x'")
    mv = parse_spoiler_input(game, pos, "label=a side=0 mu=#0 pair#0={}/{y'}")
    assert mv.pairs == ((frozenset(), frozenset({"y'"})),)
    assert spoiler_move_error(game, pos, mv) is None
    menu = legal_spoiler_moves(game, pos)
    assert parse_spoiler_input(game, pos, "#0", menu) == menu[0]
    for bad in ["#9", "label=a side=2 mu=#0", "label=a mu=#0", "label=a side=0 mu=#0 pair#1={}/{}",
                "label=a side=0 mu=#0 pair#0={x}", "oops"]:
        with pytest.raises(ValueError):
            parse_spoiler_input(game, pos, bad, menu)


def test_parse_duplicator_input():
    assert parse_duplicator_input("x0=y x1=y' k=0") == DuplicatorMove("y", "y'", 0)
    assert parse_duplicator_input("#1", ["a", "b"]) == "b"
    for bad in ["x0=y k=0", "x0=y x1=y' k=z", "#2"]:
        with pytest.raises(ValueError):
            parse_duplicator_input(bad, ["a"])


def scripted(lines):
    it = iter(lines)
    return lambda prompt="": next(it)


def test_interactive_quit_abandons():
    sol = solve(chain_game())
    out = []
    t = play_interactive("spoiler", sol, ("x", "x'"), scripted(["quit"]), out.append)
    assert t["verdict"] == "abandoned"
    assert replay(sol.game, t) == "abandoned"


def test_interactive_spoiler_loses_a_bisimilar_start():
    sol = solve(chain_game())
    out = []
    lines = ["garbage", "label=a side=0 mu=#0 pair#0={}/{y'}"] + ["#0"] * 10
    t = play_interactive("spoiler", sol, ("x", "x'"), scripted(lines), out.append)
    assert t["verdict"] == "duplicator"
    assert any("not understood" in line for line in out)
    assert replay(sol.game, t) == "duplicator"


def test_interactive_duplicator_loses_a_separated_start():
    sol = solve(chain_game())
    # the engine's move leaves no crossing reply, so nothing is asked of the player
    t = play_interactive("duplicator", sol, ("x", "z'"), scripted([]), lambda s: None)
    assert t["verdict"] == "spoiler"
    assert len(t["rounds"]) <= sol.rank[("x", "z'")] + 1


def test_interactive_role_checked():
    with pytest.raises(ValueError):
        play_interactive("referee", solve(chain_game()), ("x", "x'"), scripted([]), print)
