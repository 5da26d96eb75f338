"""Spoiler/Duplicator game for external state bisimilarity of two NLMPs.

Positions are pairs (x0, x1).  Spoiler picks a label, a side i, a measure mu
from the side-i transition set and, for each measure of the opposing set in
canonical order, a pair (C_k, C'_k) with C_k on side i and unequal masses.
Duplicator answers with a new position and an index k whose pair it crosses.
"""

from dataclasses import dataclass, field
from itertools import product
import random
import re

from .errors import LabelMismatch, UnknownLabelOrState
from .measurable import Rel, closed_pairs, fmt_set
from .nlmp import ext_state_bisimilarity


@dataclass(frozen=True)
class Position:
    x0: str
    x1: str
    j: int = 0

    @property
    def pair(self):
        return (self.x0, self.x1)

    def state(self, side):
        return self.x0 if side == 0 else self.x1


@dataclass(frozen=True)
class SpoilerMove:
    label: str
    side: int
    mu: object
    opposing: tuple
    pairs: tuple  # (C_k, C'_k): C_k on side ``side``, C'_k on the other side

    def describe(self, game, pos):
        ms = game.procs[self.side].T(self.label, pos.state(self.side)) if self.label in game.labels else ()
        idx = ms.index(self.mu) if self.mu in ms else "?"
        parts = [f"label={self.label}", f"side={self.side}", f"mu=#{idx}"]
        parts += [f"pair#{k}={_fmt(c)}/{_fmt(c2)}" for k, (c, c2) in enumerate(self.pairs)]
        return " ".join(parts)


@dataclass(frozen=True)
class DuplicatorMove:
    x0: str
    x1: str
    k: int

    def describe(self):
        return f"x0={self.x0} x1={self.x1} k={self.k}"


@dataclass(frozen=True)
class Step:
    kind: str  # "next", "spoiler_loses" or "duplicator_loses"
    position: Position = None
    reason: str = ""


def _fmt(states):
    return "{" + ",".join(sorted(states)) + "}"


class Game:
    def __init__(self, n0, n1):
        if set(n0.labels) != set(n1.labels):
            raise LabelMismatch(f"labels {list(n0.labels)} and {list(n1.labels)} differ")
        self.procs = (n0, n1)
        self.labels = tuple(n0.labels)
        self._pairs = {}

    def positions(self):
        return [(x0, x1) for x0 in self.procs[0].states for x1 in self.procs[1].states]

    def check_position(self, pos):
        self.procs[0].space.check_state(pos.x0)
        self.procs[1].space.check_state(pos.x1)

    def measurable_pairs(self, side):
        """All measurable pairs (C, C') with C on ``side``, lexicographically by membership, full first."""
        if side not in self._pairs:
            mine, other = self.procs[side].space, self.procs[1 - side].space
            out = []
            for bits in product((1, 0), repeat=len(mine.atoms) + len(other.atoms)):
                left = [k for k, b in enumerate(bits[:len(mine.atoms)]) if b]
                right = [k for k, b in enumerate(bits[len(mine.atoms):]) if b]
                out.append((mine.from_atoms(left), other.from_atoms(right)))
            self._pairs[side] = out
        return self._pairs[side]

    def choices(self, pos):
        """Every (label, side, mu) Spoiler may open with, in canonical order."""
        for a in self.labels:
            for i in (0, 1):
                for mu in self.procs[i].T(a, pos.state(i)):
                    yield a, i, mu, self.procs[1 - i].T(a, pos.state(1 - i))


def _unequal(pairs, mu, nu):
    return [(c, c2) for c, c2 in pairs if mu(c) != nu(c2)]


def legal_spoiler_moves(game, pos, exhaustive=False):
    """Representative Spoiler moves: the least unequal pair per opposing measure.

    With ``exhaustive`` every combination of unequal pairs is listed, which grows quickly.
    """
    out = []
    for a, i, mu, opposing in game.choices(pos):
        options = [_unequal(game.measurable_pairs(i), mu, nu) for nu in opposing]
        if any(not o for o in options):
            continue
        if exhaustive:
            for combo in product(*options):
                out.append(SpoilerMove(a, i, mu, opposing, tuple(combo)))
        else:
            out.append(SpoilerMove(a, i, mu, opposing, tuple(o[0] for o in options)))
    return out


def legal_duplicator_moves(game, pos, smove):
    i = smove.side
    mine, other = game.procs[i].states, game.procs[1 - i].states
    out = []
    for k, (c, c2) in enumerate(smove.pairs):
        for y in mine:
            for z in other:
                if (y in c) != (z in c2):
                    x0, x1 = (y, z) if i == 0 else (z, y)
                    out.append(DuplicatorMove(x0, x1, k))
    return sorted(out, key=lambda d: (d.k, d.x0, d.x1))


def spoiler_move_error(game, pos, smove):
    """Why the Spoiler move is illegal at ``pos``, or None."""
    if smove.label not in game.labels:
        return f"unknown label {smove.label!r}"
    if smove.side not in (0, 1):
        return f"side must be 0 or 1, got {smove.side!r}"
    i = smove.side
    if smove.mu not in game.procs[i].T(smove.label, pos.state(i)):
        return "chosen measure is not in the transition set"
    expected = game.procs[1 - i].T(smove.label, pos.state(1 - i))
    if tuple(smove.opposing) != tuple(expected):
        return "opposing enumeration does not match the opposing transition set"
    if len(smove.pairs) != len(expected):
        return f"{len(expected)} pairs expected, got {len(smove.pairs)}"
    mine, other = game.procs[i].space, game.procs[1 - i].space
    for k, ((c, c2), nu) in enumerate(zip(smove.pairs, expected)):
        if not (mine.is_measurable(c) and other.is_measurable(c2)):
            return f"pair #{k} is not measurable"
        if smove.mu(mine.measurable(c)) == nu(other.measurable(c2)):
            return f"pair #{k} does not separate the measures"
    return None


def referee_step(game, pos, smove, dmove):
    """Judge one exchange.  ``smove`` None means Spoiler had no move; ``dmove`` None, Duplicator had none."""
    if smove is None:
        if legal_spoiler_moves(game, pos):
            return Step("spoiler_loses", reason="Spoiler passed although a move was available")
        return Step("spoiler_loses", reason="Spoiler has no legal move")
    err = spoiler_move_error(game, pos, smove)
    if err:
        return Step("spoiler_loses", reason=err)
    if dmove is None:
        return Step("duplicator_loses", reason="Duplicator has no reply")
    i = smove.side
    try:
        game.check_position(Position(dmove.x0, dmove.x1))
    except UnknownLabelOrState as exc:
        return Step("duplicator_loses", reason=str(exc))
    if not 0 <= dmove.k < len(smove.pairs):
        return Step("duplicator_loses", reason=f"index {dmove.k} out of range")
    c, c2 = smove.pairs[dmove.k]
    y, z = (dmove.x0, dmove.x1) if i == 0 else (dmove.x1, dmove.x0)
    if (y in c) == (z in c2):
        return Step("duplicator_loses", reason=f"reply does not cross pair #{dmove.k}")
    return Step("next", Position(dmove.x0, dmove.x1, pos.j + 1))


@dataclass
class Solution:
    game: Game
    region: frozenset
    rank: dict
    spoiler_strategy: dict
    notes: dict = field(default_factory=dict)

    def relation(self):
        n0, n1 = self.game.procs
        return Rel(n0.space, n1.space, self.region)

    def winner(self, start):
        return "duplicator" if tuple(start) in self.region else "spoiler"

    def spoiler_move(self, pos):
        if pos.pair in self.spoiler_strategy:
            return self.spoiler_strategy[pos.pair]
        moves = legal_spoiler_moves(self.game, pos)
        return moves[0] if moves else None

    def duplicator_move(self, pos, smove):
        replies = legal_duplicator_moves(self.game, pos, smove)
        for d in replies:
            if (d.x0, d.x1) in self.region:
                return d
        return replies[0] if replies else None


def _attack(game, pos, region):
    """A Spoiler move whose pairs are all closed under ``region``, if there is one."""
    for a, i, mu, opposing in game.choices(pos):
        mine, other = game.procs[i].space, game.procs[1 - i].space
        oriented = Rel(mine, other, ((p[i], p[1 - i]) for p in region))
        cp = closed_pairs(mine, other, oriented)
        candidates = [(mine.full, other.full)] + list(cp.atoms)
        chosen = []
        for nu in opposing:
            hit = next((p for p in candidates if mu(p[0]) != nu(p[1])), None)
            if hit is None:
                break
            chosen.append(hit)
        else:
            return SpoilerMove(a, i, mu, opposing, tuple(chosen))
    return None


def solve(n0, n1=None):
    """Duplicator's winning region with a rank and a ranked Spoiler strategy outside it.

    A position leaves the region in round n when Spoiler can attack it with
    pairs that the current region never crosses; every reply then lands on a
    position removed in an earlier round.
    """
    game = n0 if isinstance(n0, Game) else Game(n0, n1)
    region = set(game.positions())
    rank, strategy = {}, {}
    n = 0
    while True:
        removed = {}
        for p in sorted(region):
            mv = _attack(game, Position(*p), region)
            if mv is not None:
                removed[p] = mv
        if not removed:
            break
        for p, mv in removed.items():
            region.discard(p)
            rank[p] = n
            strategy[p] = mv
        n += 1
    sol = Solution(game, frozenset(region), rank, strategy)
    bisim = ext_state_bisimilarity(*game.procs)
    sol.notes["agrees_with_bisimilarity"] = set(bisim.pairs) == set(region)
    sol.notes["rounds"] = n
    return sol


def random_spoiler_move(game, pos, rng):
    """A uniformly chosen opening and, per opposing measure, a random unequal pair."""
    opts = []
    for a, i, mu, opposing in game.choices(pos):
        options = [_unequal(game.measurable_pairs(i), mu, nu) for nu in opposing]
        if all(options):
            opts.append((a, i, mu, opposing, options))
    if not opts:
        return None
    a, i, mu, opposing, options = rng.choice(opts)
    return SpoilerMove(a, i, mu, opposing, tuple(rng.choice(o) for o in options))


def random_duplicator_move(game, pos, smove, rng):
    replies = legal_duplicator_moves(game, pos, smove)
    return rng.choice(replies) if replies else None


def cutoff(game):
    return len(game.positions()) + 1


def play(game, start, spoiler, duplicator, max_rounds=None):
    """Run a play between two move functions; returns a transcript dict."""
    pos = Position(*start)
    game.check_position(pos)
    limit = cutoff(game) if max_rounds is None else max_rounds
    rounds = []
    while True:
        if len(rounds) >= limit:
            return _transcript(game, start, rounds, "duplicator", "play reached the cutoff")
        smove = spoiler(pos)
        dmove = duplicator(pos, smove) if smove is not None else None
        step = referee_step(game, pos, smove, dmove)
        rounds.append((pos, smove, dmove))
        if step.kind == "spoiler_loses":
            return _transcript(game, start, rounds, "duplicator", step.reason)
        if step.kind == "duplicator_loses":
            return _transcript(game, start, rounds, "spoiler", step.reason)
        pos = step.position


def encode_spoiler(game, pos, smove):
    if smove is None:
        return None
    ms = game.procs[smove.side].T(smove.label, pos.state(smove.side))
    return {"label": smove.label, "side": smove.side, "mu": ms.index(smove.mu),
            "pairs": [[sorted(c), sorted(c2)] for c, c2 in smove.pairs]}


def decode_spoiler(game, pos, data):
    if data is None:
        return None
    a, i = data["label"], int(data["side"])
    if a not in game.labels or i not in (0, 1):
        return SpoilerMove(a, i, None, (), ())
    ms = game.procs[i].T(a, pos.state(i))
    idx = int(data["mu"])
    mu = ms[idx] if 0 <= idx < len(ms) else None
    opposing = game.procs[1 - i].T(a, pos.state(1 - i))
    pairs = tuple((frozenset(c), frozenset(c2)) for c, c2 in data["pairs"])
    return SpoilerMove(a, i, mu, opposing, pairs)


def _transcript(game, start, rounds, verdict, reason):
    out = []
    for pos, smove, dmove in rounds:
        out.append({"position": [pos.x0, pos.x1],
                    "spoiler": encode_spoiler(game, pos, smove),
                    "duplicator": None if dmove is None else
                    {"x0": dmove.x0, "x1": dmove.x1, "k": dmove.k}})
    return {"start": list(start), "rounds": out, "verdict": verdict, "reason": reason}


def replay(game, transcript):
    """Re-judge a transcript; returns the verdict the referee reaches."""
    if transcript.get("verdict") == "abandoned":
        return "abandoned"
    pos = Position(*transcript["start"])
    for r in transcript["rounds"]:
        if [pos.x0, pos.x1] != r["position"]:
            raise ValueError("transcript positions are inconsistent")
        smove = decode_spoiler(game, pos, r["spoiler"])
        d = r["duplicator"]
        dmove = None if d is None else DuplicatorMove(d["x0"], d["x1"], int(d["k"]))
        step = referee_step(game, pos, smove, dmove)
        if step.kind == "spoiler_loses":
            return "duplicator"
        if step.kind == "duplicator_loses":
            return "spoiler"
        pos = step.position
    return "duplicator"


# ---------------------------------------------------------------- text protocol

_SET = re.compile(r"^\{([^{}]*)\}$")


def _parse_set(text):
    m = _SET.match(text)
    if not m:
        raise ValueError(f"expected a set like {{x,y}}, got {text!r}")
    return frozenset(p.strip() for p in m.group(1).split(",") if p.strip())


def parse_spoiler_input(game, pos, line, menu=()):
    """``#n`` picks from the menu; otherwise ``label=a side=0 mu=#2 pair#0={x}/{y'} ...``."""
    line = line.strip()
    if re.fullmatch(r"#\d+", line):
        n = int(line[1:])
        if not 0 <= n < len(menu):
            raise ValueError(f"menu has no entry {line}")
        return menu[n]
    fields, pairs = {}, {}
    for tok in line.split():
        key, sep, value = tok.partition("=")
        if not sep:
            raise ValueError(f"malformed token {tok!r}")
        m = re.fullmatch(r"pair#(\d+)", key)
        if m:
            left, slash, right = value.partition("/")
            if not slash:
                raise ValueError(f"pair needs the form {{..}}/{{..}}, got {value!r}")
            pairs[int(m.group(1))] = (_parse_set(left), _parse_set(right))
        elif key in ("label", "side", "mu"):
            fields[key] = value
        else:
            raise ValueError(f"unknown key {key!r}")
    missing = {"label", "side", "mu"} - set(fields)
    if missing:
        raise ValueError(f"missing {', '.join(sorted(missing))}")
    if not re.fullmatch(r"#\d+", fields["mu"]) or fields["side"] not in ("0", "1"):
        raise ValueError("side must be 0 or 1 and mu must look like #2")
    if sorted(pairs) != list(range(len(pairs))):
        raise ValueError("pairs must be numbered #0, #1, ... without gaps")
    data = {"label": fields["label"], "side": int(fields["side"]), "mu": int(fields["mu"][1:]),
            "pairs": [pairs[k] for k in range(len(pairs))]}
    return decode_spoiler(game, pos, data)


def parse_duplicator_input(line, menu=()):
    line = line.strip()
    if re.fullmatch(r"#\d+", line):
        n = int(line[1:])
        if not 0 <= n < len(menu):
            raise ValueError(f"menu has no entry {line}")
        return menu[n]
    fields = dict(tok.partition("=")[::2] for tok in line.split())
    if set(fields) != {"x0", "x1", "k"} or not fields["k"].isdigit():
        raise ValueError("expected x0=<state> x1=<state> k=<idx>")
    return DuplicatorMove(fields["x0"], fields["x1"], int(fields["k"]))


def play_interactive(role, solution, start, input_fn=input, output_fn=print):
    """A human plays ``role``; the engine follows the solved strategies.

    Malformed input is re-prompted; ``quit`` abandons the play.
    """
    if role not in ("spoiler", "duplicator"):
        raise ValueError("role must be spoiler or duplicator")
    game = solution.game
    pos = Position(*start)
    game.check_position(pos)
    rounds = []
    output_fn(f"you play {role}; engine predicts a win for {solution.winner(start)}")
    while True:
        if len(rounds) >= cutoff(game):
            return _transcript(game, start, rounds, "duplicator", "play reached the cutoff")
        output_fn(f"position {pos.j}: ({pos.x0}, {pos.x1})")
        if role == "spoiler":
            menu = legal_spoiler_moves(game, pos)
            for n, mv in enumerate(menu):
                output_fn(f"  #{n}: {mv.describe(game, pos)}")
            smove = None
            while menu:
                line = input_fn("spoiler> ").strip()
                if line == "quit":
                    return _transcript(game, start, rounds, "abandoned", "quit by the player")
                if line == "pass":
                    break
                try:
                    smove = parse_spoiler_input(game, pos, line, menu)
                except (ValueError, KeyError) as exc:
                    output_fn(f"  not understood: {exc}")
                    continue
                break
            if not menu:
                output_fn("  no move with unequal masses is available")
            dmove = solution.duplicator_move(pos, smove) if smove is not None and \
                spoiler_move_error(game, pos, smove) is None else None
            if dmove is not None:
                output_fn(f"  engine replies {dmove.describe()}")
        else:
            smove = solution.spoiler_move(pos)
            if smove is None:
                dmove = None
                output_fn("  engine has no move")
            else:
                output_fn(f"  engine plays {smove.describe(game, pos)}")
                menu = legal_duplicator_moves(game, pos, smove)
                for n, d in enumerate(menu):
                    output_fn(f"  #{n}: {d.describe()}")
                dmove = None
                if not menu:
                    output_fn("  no reply crosses any of the pairs")
                while menu:
                    line = input_fn("duplicator> ").strip()
                    if line == "quit":
                        return _transcript(game, start, rounds, "abandoned", "quit by the player")
                    if line == "pass":
                        dmove = None
                        break
                    try:
                        dmove = parse_duplicator_input(line, menu)
                    except ValueError as exc:
                        output_fn(f"  not understood: {exc}")
                        continue
                    break
        step = referee_step(game, pos, smove, dmove)
        rounds.append((pos, smove, dmove))
        if step.kind != "next":
            winner = "duplicator" if step.kind == "spoiler_loses" else "spoiler"
            output_fn(f"{winner} wins: {step.reason}")
            return _transcript(game, start, rounds, winner, step.reason)
        pos = step.position


def random_plays(solution, start, count, seed=0):
    """Strategy-vs-random plays from ``start``; the winner's side follows its strategy."""
    game = solution.game
    rng = random.Random(seed)
    out = []
    winning = tuple(start) in solution.region
    for _ in range(count):
        if winning:
            t = play(game, start, lambda p: random_spoiler_move(game, p, rng), solution.duplicator_move)
        else:
            t = play(game, start, solution.spoiler_move,
                     lambda p, s: random_duplicator_move(game, p, s, rng))
        out.append(t)
    return out


def describe_pair(pair):
    return f"({fmt_set(pair[0])}, {fmt_set(pair[1])})"


__all__ = [
    "Position", "SpoilerMove", "DuplicatorMove", "Step", "Game", "Solution",
    "solve", "legal_spoiler_moves", "legal_duplicator_moves", "referee_step",
    "spoiler_move_error", "play", "replay", "play_interactive", "random_plays",
    "random_spoiler_move", "random_duplicator_move", "parse_spoiler_input",
    "parse_duplicator_input", "cutoff",
]
