"""Command-line workbench.

Exit codes: 0 when the asked property holds (or a computation finished), 1 when
it fails, 2 on usage errors, 3 on invalid input and 4 when an instance exceeds
the bounded searches.
"""

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import bisim, game, lmp, nlmp
from .errors import LmpError, TooLarge, ValidationError
from .generate import gen_random
from .logic import parse_formula, semantics
from .measurable import (
    Measure,
    MeasurableSet,
    PairFamily,
    Rel,
    SubAlgebra,
    descend,
    fmt_fraction,
    fmt_set,
)
from .modelio import as_nlmp, dumps, load, load_relation, model_to_dict, relation_to_data
from .report import report_table
from .search import search_separation


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- rendering

def to_json(obj):
    if isinstance(obj, lmp.Verdict):
        out = {"holds": obj.holds}
        if obj.witness is not None:
            out["witness"] = to_json(obj.witness)
        if obj.certificate is not None:
            out["certificate"] = to_json(obj.certificate)
        if obj.notes:
            out["notes"] = to_json(obj.notes)
        return out
    if isinstance(obj, Rel):
        return relation_to_data(obj)
    if isinstance(obj, (lmp.Lmp, nlmp.Nlmp)):
        return model_to_dict(obj)
    if isinstance(obj, Measure):
        return {k: fmt_fraction(v) for k, v in obj.as_mapping().items()}
    if isinstance(obj, Fraction):
        return fmt_fraction(obj)
    if isinstance(obj, SubAlgebra):
        return [sorted(b) for b in obj.state_blocks()]
    if isinstance(obj, PairFamily):
        return {"atoms": [[to_json(a), to_json(b)] for a, b in obj.atoms]} if obj.closed \
            else {"pairs": [[to_json(a), to_json(b)] for a, b in obj]}
    if isinstance(obj, lmp.Morphism):
        return dict(obj.mapping)
    if isinstance(obj, (frozenset, set)):
        items = [to_json(x) for x in obj]
        try:
            return sorted(items)
        except TypeError:
            return sorted(items, key=json.dumps)
    if isinstance(obj, dict):
        return {k if isinstance(k, str) else str(to_json(k)): to_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_json(x) for x in obj]
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return obj
    return str(obj)


def to_text(obj):
    if isinstance(obj, (frozenset, set, MeasurableSet)):
        if all(isinstance(x, str) for x in obj):
            return fmt_set(obj)
        return "{" + ", ".join(sorted(to_text(x) for x in obj)) + "}"
    if isinstance(obj, tuple):
        return "(" + ", ".join(to_text(x) for x in obj) + ")"
    if isinstance(obj, list):
        return "[" + ", ".join(to_text(x) for x in obj) + "]"
    if isinstance(obj, Fraction):
        return fmt_fraction(obj)
    if isinstance(obj, Rel):
        return "{" + ", ".join(f"({s},{t})" for s, t in sorted(obj.pairs)) + "}"
    return str(obj)


class Out:
    def __init__(self, fmt, stream):
        self.fmt = fmt
        self.stream = stream

    def emit(self, payload, lines):
        if self.fmt == "json":
            print(json.dumps(to_json(payload), ensure_ascii=False, indent=2), file=self.stream)
        else:
            for line in lines:
                print(line, file=self.stream)

    def verdict(self, v, what):
        lines = [f"{what}: {'holds' if v.holds else 'fails'}"]
        if v.witness is not None:
            lines.append(f"witness: {to_text(v.witness)}")
        for k, val in v.notes.items():
            lines.append(f"{k}: {to_text(val)}")
        self.emit(v, lines)
        return 0 if v.holds else 1

    def relation(self, R, what, extra=None):
        payload = {"relation": R}
        lines = [f"{what}: {to_text(R)}"]
        if extra:
            payload.update(extra)
            for k, val in extra.items():
                lines.append(f"{k}: {to_text(val)}")
        self.emit(payload, lines)
        return 0


# ---------------------------------------------------------------- helpers

def _model(path):
    p = Path(path)
    if not p.exists():
        raise UsageError(f"no such file: {path}")
    return load(p)


def _lmp(path):
    m = _model(path)
    if not isinstance(m, lmp.Lmp):
        raise ValidationError(f"{path} is not an LMP model")
    return m


def _json(path):
    p = Path(path)
    if not p.exists():
        raise UsageError(f"no such file: {path}")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from None


def _pair(text):
    if text is None:
        return None
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"expected s,t but got {text!r}")
    return parts[0].strip(), parts[1].strip()


def _relation(args, left, right=None):
    if not args.relation:
        return None
    if not Path(args.relation).exists():
        raise UsageError(f"no such file: {args.relation}")
    return load_relation(args.relation, left, right)


def _map(path, source, target):
    data = _json(path)
    if not isinstance(data, dict):
        raise ValidationError("a map file is a JSON object from states to states")
    return lmp.Morphism(source, target, data)


def _sum_classes(T, classes):
    """Class names without tags when the two sides use disjoint state names."""
    plain = not (T.space.left_part(T.states) & T.space.right_part(T.states))
    return [sorted(T.space.untag(s)[1] if plain else s for s in c) for c in classes]


# ---------------------------------------------------------------- commands

def cmd_validate(args, out):
    payload, lines = [], []
    for path in args.files:
        m = _model(path)
        kind = "lmp" if isinstance(m, lmp.Lmp) else "nlmp"
        payload.append({"file": path, "kind": kind, "states": len(m.states),
                        "atoms": len(m.space.atoms), "labels": list(m.labels)})
        lines.append(f"{path}: valid {kind}, {len(m.states)} states, "
                     f"{len(m.space.atoms)} atoms, labels {', '.join(m.labels)}")
    out.emit(payload, lines)
    return 0


def cmd_bisim(args, out):
    n = args.notion
    if n in ("state", "event"):
        if len(args.files) != 1:
            raise UsageError(f"bisim {n} takes one model file")
        S = _lmp(args.files[0])
        R = _relation(args, S.space)
        if R is not None:
            check = bisim.is_state_bisim if n == "state" else bisim.is_event_bisim
            return out.verdict(check(S, R), f"{n} bisimulation")
        rel = bisim.state_bisimilarity(S) if n == "state" else bisim.event_bisimilarity(S)
        return out.relation(rel, f"{n} bisimilarity", {"classes": [sorted(c) for c in rel.classes()]})
    if len(args.files) != 2:
        raise UsageError(f"bisim {n} takes two model files")
    S, S2 = _lmp(args.files[0]), _lmp(args.files[1])
    pair = _pair(args.pair)
    if n == "external":
        R = _relation(args, S.space, S2.space)
        if R is not None:
            return out.verdict(bisim.is_ext_bisim(S, S2, R), "external bisimulation")
        return _pair_or_relation(out, bisim.ext_bisimilarity(S, S2), pair, "external bisimilarity")
    if n == "delta":
        R = _relation(args, S.space, S2.space)
        if R is not None:
            return out.verdict(bisim.is_delta_bisim(S, S2, R), "Delta bisimulation")
        return _pair_or_relation(out, bisim.delta_bisimilarity(S, S2), pair, "Delta bisimilarity")
    if n == "oplus":
        if args.relation:
            T = lmp.direct_sum(S, S2)
            R = load_relation(args.relation, T.space)
            return out.verdict(bisim.is_oplus_bisim(S, S2, R), "plus bisimulation")
        if pair:
            return out.verdict(bisim.oplus_bisimilar(S, S2, *pair), f"plus bisimilar {pair}")
        return out.relation(bisim.oplus_bisimilarity(S, S2), "plus bisimilarity")
    if n == "vee":
        T = lmp.direct_sum(S, S2)
        ev = bisim.event_bisimilarity(T)
        classes = _sum_classes(T, ev.classes())
        if pair:
            v = lmp.Verdict(pair in descend(ev), notes={"classes": classes})
            return out.verdict(v, f"vee bisimilar {pair}")
        return out.relation(descend(ev), "vee bisimilarity", {"classes": classes})
    if n == "oplusP":
        if not pair:
            raise UsageError("bisim oplusP needs --pair s,t")
        v = bisim.oplus_P_bisimilar(S, S2, *pair)
        shown = lmp.Verdict(v.holds, v.witness, None, dict(v.notes))
        if v.holds:
            shown.notes["witness_relation_classes"] = [sorted(c) for c in v.certificate["relation"].classes()]
        return out.verdict(shown, f"plus_P bisimilar {pair}")
    raise UsageError(f"unknown notion {n!r}")


def _pair_or_relation(out, rel, pair, what):
    if pair:
        return out.verdict(lmp.Verdict(pair in rel), f"{what} relates {pair}")
    return out.relation(rel, what)


def cmd_check(args, out):
    c = args.what
    if c == "zigzag" or c == "vfinal":
        S, T = _lmp(args.files[0]), _lmp(args.files[1])
        f = _map(args.map, S, T)
        if c == "zigzag":
            return out.verdict(lmp.check_zigzag(f), "zigzag")
        return out.verdict(lmp.Verdict(bisim.v_final_check(f)), "V-final")
    if c == "stable":
        S = _lmp(args.files[0])
        fam = _json(args.family)
        if not isinstance(fam, list):
            raise ValidationError("a family file is a JSON list of state lists")
        bad = lmp.stability_violation(S, [S.space.measurable(A) for A in fam])
        return out.verdict(lmp.Verdict(bad is None, witness=bad), "stable")
    if c == "span":
        S, S2, W = (_lmp(p) for p in args.files[:3])
        f, g = _map(args.f, W, S), _map(args.g, W, S2)
        return out.verdict(bisim.is_span(S, S2, W, f, g), "span")
    if c == "cospan":
        S, S2, T = (_lmp(p) for p in args.files[:3])
        f, g = _map(args.f, S, T), _map(args.g, S2, T)
        pair = _pair(args.pair)
        if not pair:
            raise UsageError("check cospan needs --pair s,t")
        return out.verdict(bisim.is_cospan(S, S2, T, f, g, *pair), "cospan")
    raise UsageError(f"unknown check {c!r}")


def cmd_logic(args, out):
    m = _model(args.file)
    phi = parse_formula(args.formula)
    if isinstance(m, lmp.Lmp):
        sat = semantics(m, phi, extended=args.extended)
    else:
        sat = nlmp.nlmp_semantics(m, phi)
    out.emit({"formula": str(phi), "satisfied_by": sat}, [f"{phi}: {to_text(sat)}"])
    return 0


def cmd_quotient(args, out):
    S = _lmp(args.file)
    if args.family:
        fam = _json(args.family)
        lam = SubAlgebra.generated(S.space, [S.space.measurable(A) for A in fam])
    else:
        lam = lmp.smallest_stable(S)
    Q, pi = lmp.quotient(S, lam)
    out.emit({"quotient": Q, "projection": pi}, [dumps(Q).rstrip(), f"projection: {pi}"])
    return 0


def cmd_sum(args, out):
    T = lmp.direct_sum(_lmp(args.files[0]), _lmp(args.files[1]))
    out.emit(T, [dumps(T).rstrip()])
    return 0


NLMP_INTERNAL = {"int-state": (nlmp.is_int_state_bisim, nlmp.int_state_bisimilarity),
                 "int-hit": (nlmp.is_int_hit_bisim, nlmp.int_hit_bisimilarity),
                 "int-event": (nlmp.is_int_event_bisim, nlmp.int_event_bisimilarity)}
NLMP_EXTERNAL = {"ext-state": (nlmp.is_ext_state_bisim, nlmp.ext_state_bisimilarity),
                 "ext-hit": (nlmp.is_ext_hit_bisim, nlmp.ext_hit_bisimilarity),
                 "ext-event": (nlmp.is_ext_event_bisim, None)}


def cmd_nlmp(args, out):
    n = args.notion
    if n in NLMP_INTERNAL:
        if len(args.files) != 1:
            raise UsageError(f"nlmp bisim {n} takes one model file")
        N = as_nlmp(_model(args.files[0]))
        R = _relation(args, N.space)
        check, compute = NLMP_INTERNAL[n]
        if R is not None:
            return out.verdict(check(N, R), f"{n} bisimulation")
        return out.relation(compute(N), f"{n} bisimilarity")
    if n in NLMP_EXTERNAL:
        if len(args.files) != 2:
            raise UsageError(f"nlmp bisim {n} takes two model files")
        N, N2 = as_nlmp(_model(args.files[0])), as_nlmp(_model(args.files[1]))
        R = _relation(args, N.space, N2.space)
        check, compute = NLMP_EXTERNAL[n]
        if R is not None:
            return out.verdict(check(N, N2, R), f"{n} bisimulation")
        if compute is None:
            rel, _ = nlmp.ext_event_from_hit(N, N2, nlmp.ext_hit_bisimilarity(N, N2))
            return out.relation(rel, "ext-event bisimilarity (through the hit bisimilarity)")
        return out.relation(compute(N, N2), f"{n} bisimilarity")
    raise UsageError(f"unknown NLMP notion {n!r}")


def cmd_game(args, out):
    N, N2 = as_nlmp(_model(args.files[0])), as_nlmp(_model(args.files[1]))
    sol = game.solve(N, N2)
    start = _pair(args.start)
    if args.action == "solve":
        payload = {"duplicator_region": sorted(sol.region),
                   "rank": {f"{a},{b}": r for (a, b), r in sorted(sol.rank.items())}}
        lines = [f"duplicator wins from: {to_text(Rel(N.space, N2.space, sol.region))}"]
        if start:
            winner = sol.winner(start)
            payload["start"] = list(start)
            payload["winner"] = winner
            lines.append(f"from {start}: {winner}")
            if start in sol.rank:
                lines.append(f"spoiler wins within {sol.rank[start] + 1} rounds")
            out.emit(payload, lines)
            return 0 if winner == "duplicator" else 1
        out.emit(payload, lines)
        return 0
    if args.action == "replay":
        transcript = _json(args.transcript)
        verdict = game.replay(sol.game, transcript)
        same = verdict == transcript.get("verdict")
        out.emit({"verdict": verdict, "matches_recorded": same},
                 [f"replayed verdict: {verdict}", f"matches recorded: {same}"])
        return 0 if same else 1
    if not start:
        raise UsageError("game play needs --start s,t")
    lines_in = iter(sys.stdin.read().splitlines()) if args.script else None

    def ask(prompt):
        if lines_in is None:
            return input(prompt)
        line = next(lines_in, "quit")
        print(prompt + line, file=out.stream)
        return line

    transcript = game.play_interactive(args.role, sol, start, input_fn=ask,
                                       output_fn=lambda s: print(s, file=out.stream))
    if args.transcript:
        Path(args.transcript).write_text(json.dumps(transcript, indent=2) + "\n", encoding="utf-8")
    print(f"verdict: {transcript['verdict']}", file=out.stream)
    return 0


def cmd_report(args, out):
    d = Path(args.dir)
    if not d.is_dir():
        raise UsageError(f"no such directory: {args.dir}")
    table = report_table(d)
    if args.expected:
        expected = Path(args.expected).read_text(encoding="utf-8")
        same = expected == table
        out.emit({"table": table, "matches_expected": same},
                 [table.rstrip(), f"matches expected: {same}"])
        return 0 if same else 1
    out.emit({"table": table}, [table.rstrip()])
    return 0


def cmd_search(args, out):
    notions = args.notions.split(",")
    if len(notions) != 2:
        raise UsageError("--notions takes two names, e.g. oplus,vee")
    coarse = {"mixed": None, "coarse": True, "powerset": False}[args.spaces]
    try:
        rep = search_separation(notions[0], notions[1], max_states=args.max_states, seed=args.seed,
                                budget=args.budget, coarse=coarse)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    lines = [f"{rep['notions'][0]} vs {rep['notions'][1]}: {rep['outcome']} "
             f"after {rep['tried']} instances ({rep['skipped']} skipped)"]
    if rep["found"]:
        lines.append(f"pair {tuple(rep['pair'])} found in the {rep['phase']} phase")
        lines.append("left: " + json.dumps(rep["left"], ensure_ascii=False))
        lines.append("right: " + json.dumps(rep["right"], ensure_ascii=False))
    out.emit(rep, lines)
    return 0 if rep["found"] else 1


def cmd_gen(args, out):
    m = gen_random(args.max_states, args.max_atoms, args.den, tuple(args.labels.split(",")),
                   args.seed, kind=args.kind, coarse={"mixed": None, "coarse": True,
                                                      "powerset": False}[args.spaces],
                   max_measures=args.max_measures)
    text = dumps(m)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        out.stream.write(text)
    return 0


# ---------------------------------------------------------------- parser

def build_parser():
    p = argparse.ArgumentParser(prog="lmpbisim", description="Bisimulation workbench for finite LMPs and NLMPs.")
    p.add_argument("--format", choices=("text", "json"), default="text")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check model files")
    v.add_argument("files", nargs="+")

    b = sub.add_parser("bisim", help="LMP bisimulations and bisimilarities")
    b.add_argument("notion", choices=("state", "event", "external", "oplus", "vee", "oplusP", "delta"))
    b.add_argument("files", nargs="+")
    b.add_argument("--relation")
    b.add_argument("--pair")

    c = sub.add_parser("check", help="morphism, span, cospan, finality and stability checks")
    c.add_argument("what", choices=("zigzag", "span", "cospan", "vfinal", "stable"))
    c.add_argument("files", nargs="+")
    c.add_argument("--map")
    c.add_argument("--f")
    c.add_argument("--g")
    c.add_argument("--family")
    c.add_argument("--pair")

    lg = sub.add_parser("logic", help="model checking")
    lg.add_argument("action", choices=("eval",))
    lg.add_argument("file")
    lg.add_argument("formula")
    lg.add_argument("--extended", action="store_true", help="admit <, <= and >= in LMP formulas")

    q = sub.add_parser("quotient", help="quotient by a stable sub-algebra (default: the smallest)")
    q.add_argument("file")
    q.add_argument("--family")

    s = sub.add_parser("sum", help="direct sum of two LMPs")
    s.add_argument("files", nargs=2)

    nl = sub.add_parser("nlmp", help="NLMP bisimulations")
    nl.add_argument("action", choices=("bisim",))
    nl.add_argument("notion", choices=tuple(NLMP_INTERNAL) + tuple(NLMP_EXTERNAL))
    nl.add_argument("files", nargs="+")
    nl.add_argument("--relation")

    g = sub.add_parser("game", help="Spoiler/Duplicator game")
    g.add_argument("action", choices=("solve", "play", "replay"))
    g.add_argument("files", nargs=2)
    g.add_argument("--start")
    g.add_argument("--role", choices=("spoiler", "duplicator"), default="spoiler")
    g.add_argument("--transcript")
    g.add_argument("--script", action="store_true", help="read moves from stdin, one per line")

    r = sub.add_parser("report", help="inclusion table over a corpus")
    r.add_argument("action", choices=("table",))
    r.add_argument("dir")
    r.add_argument("--expected")

    se = sub.add_parser("search", help="look for separating instances")
    se.add_argument("action", choices=("separation",))
    se.add_argument("--notions", required=True)
    se.add_argument("--max-states", type=int, default=3)
    se.add_argument("--seed", type=int, default=0)
    se.add_argument("--budget", type=int, default=200)
    se.add_argument("--spaces", choices=("mixed", "coarse", "powerset"), default="mixed")

    ge = sub.add_parser("gen", help="random models")
    ge.add_argument("action", choices=("random",))
    ge.add_argument("--max-states", type=int, default=4)
    ge.add_argument("--max-atoms", type=int)
    ge.add_argument("--den", type=int, default=4)
    ge.add_argument("--labels", default="a")
    ge.add_argument("--seed", type=int, default=0)
    ge.add_argument("--kind", choices=("lmp", "nlmp"), default="lmp")
    ge.add_argument("--spaces", choices=("mixed", "coarse", "powerset"), default="mixed")
    ge.add_argument("--max-measures", type=int, default=2)
    ge.add_argument("--out")
    return p


COMMANDS = {"validate": cmd_validate, "bisim": cmd_bisim, "check": cmd_check, "logic": cmd_logic,
            "quotient": cmd_quotient, "sum": cmd_sum, "nlmp": cmd_nlmp, "game": cmd_game,
            "report": cmd_report, "search": cmd_search, "gen": cmd_gen}


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    out = Out(args.format, stdout)
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return 2
    except TooLarge as exc:
        print(f"too large: {exc}", file=stderr)
        return 4
    except (ValidationError, LmpError) as exc:
        print(f"invalid: {exc}", file=stderr)
        return 3
    except ValueError as exc:
        print(f"invalid: {exc}", file=stderr)
        return 3


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
