"""Inclusion table between bisimilarity notions, evaluated over a corpus of LMP pairs."""

import json
from pathlib import Path

from .errors import TooLarge
from .lmp import Lmp
from .modelio import load
from .notions import relate

ORDER = ("delta", "wedge", "x", "state", "vee", "oplus")
HEADERS = ("∼Δ", "∼∧", "∼×", "(∼s)×", "∼∨", "∼⊕")

# Cells (row, column), 1-based, whose known refutations rely on non-measurable
# subsets of the unit interval; no finite process can exhibit them.
NOT_FINITE = frozenset({(3, 1), (3, 2), (4, 1), (4, 2), (5, 1), (5, 2), (5, 3), (5, 4),
                        (6, 1), (6, 2), (6, 3), (6, 4), (6, 5)})

NA = "n/a — not refutable at finite scale"
NO_DATA = "no data"


def evaluate_pair(S, S2):
    """Relations for every notion; None where undecided at this size."""
    out = {}
    for n in ORDER:
        try:
            out[n] = relate(n, S, S2)
        except TooLarge:
            out[n] = None
    return out


def classification_report(pairs):
    """``pairs`` is a list of (name, S, S2).  Returns {(i, j): cell text} with 1-based indices."""
    evaluated = [(name, evaluate_pair(S, S2)) for name, S, S2 in pairs]
    cells = {}
    for i, a in enumerate(ORDER, 1):
        for j, b in enumerate(ORDER, 1):
            seen = 0
            refuted = None
            for name, rels in evaluated:
                ra, rb = rels[a], rels[b]
                if ra is None or rb is None:
                    continue
                seen += 1
                extra = sorted(ra.pairs - rb.pairs)
                if extra and refuted is None:
                    refuted = (name, extra[0])
            if refuted:
                name, (s, t) = refuted
                cells[(i, j)] = f"✗ {name} ({s},{t})"
            elif (i, j) in NOT_FINITE:
                cells[(i, j)] = NA
            elif seen == 0:
                cells[(i, j)] = NO_DATA
            else:
                cells[(i, j)] = "✓"
    return cells


def render_table(cells, count):
    lines = ["| ⊆ | " + " | ".join(HEADERS) + " |",
             "|---" * (len(HEADERS) + 1) + "|"]
    for i, h in enumerate(HEADERS, 1):
        lines.append(f"| {h} | " + " | ".join(cells[(i, j)] for j in range(1, len(HEADERS) + 1)) + " |")
    lines.append("")
    lines.append(f"corpus pairs: {count}")
    return "\n".join(lines) + "\n"


def load_corpus(directory):
    """Pairs listed in corpus.json, else every ordered pair of LMP files with equal labels."""
    d = Path(directory)
    index = d / "corpus.json"
    if index.exists():
        listed = json.loads(index.read_text(encoding="utf-8"))["pairs"]
        return [(f"{l.removesuffix('.json')}/{r.removesuffix('.json')}", load(d / l), load(d / r))
                for l, r in listed]
    models = []
    for p in sorted(d.glob("*.json")):
        m = load(p)
        if isinstance(m, Lmp):
            models.append((p.stem, m))
    return [(f"{n1}/{n2}", m1, m2) for n1, m1 in models for n2, m2 in models
            if set(m1.labels) == set(m2.labels)]


def report_table(directory):
    pairs = load_corpus(directory)
    if not pairs:
        cells = {(i, j): NO_DATA for i in range(1, 7) for j in range(1, 7)}
        return render_table(cells, 0)
    return render_table(classification_report(pairs), len(pairs))
