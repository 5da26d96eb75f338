"""Cross relations between two LMPs for every bisimilarity notion, by short name."""

from .bisim import (
    delta_bisimilarity,
    delta_span,
    event_bisimilarity,
    ext_bisimilarity,
    is_delta_bisim,
    is_span,
    oplus_bisimilarity,
    state_bisim_descent,
    vee_bisimilarity,
)
from .lmp import direct_sum
from .measurable import descend


def _event_descent(S, S2):
    return descend(event_bisimilarity(direct_sum(S, S2)))


def _wedge(S, S2):
    """Spans are verified, never searched, so the relation is known only when its bounds meet.

    The lower bound is carried by the span whose apex is the Delta relation; that
    span is built and checked on the way.
    """
    lower, upper = delta_bisimilarity(S, S2), ext_bisimilarity(S, S2)
    if lower != upper:
        return None
    if lower.pairs:
        cert = is_delta_bisim(S, S2, lower).certificate
        W, f, g = delta_span(S, S2, lower, cert)
        v = is_span(S, S2, W, f, g)
        assert v.holds and v.certificate == lower, "span carried by a Delta relation failed"
    return lower


NOTIONS = {
    "delta": delta_bisimilarity,
    "wedge": _wedge,
    "x": ext_bisimilarity,
    "state": state_bisim_descent,
    "event": _event_descent,
    "vee": vee_bisimilarity,
    "oplus": oplus_bisimilarity,
}

ALIASES = {"external": "x", "ext": "x", "sbq": "state", "span": "wedge", "cospan": "vee"}

SYMBOLS = {"delta": "∼Δ", "wedge": "∼∧", "x": "∼×", "state": "(∼s)×", "vee": "∼∨",
           "oplus": "∼⊕", "event": "(∼e)×"}


def notion(name):
    key = ALIASES.get(name, name)
    if key not in NOTIONS:
        raise KeyError(f"unknown notion {name!r}; known: {', '.join(sorted(NOTIONS))}")
    return key


def relate(name, S, S2):
    """The cross relation for ``name``, or None when it cannot be decided here."""
    return NOTIONS[notion(name)](S, S2)
