"""JSON model files for LMPs and NLMPs, plus relation files.

A model file looks like::

    {"kind": "lmp", "labels": ["a"], "states": ["x", "y"],
     "sigma": [["x"], ["y"]],
     "kernels": {"a": {"x": {"y": "1/2"}}}}

``sigma`` lists the atoms and may be omitted for the powerset.  Weights are
strings "p/q" (integers are accepted too) and are keyed by a state of a
singleton atom or by an atom name such as "u+v".  NLMP kernels map each state
to a list of such measures.
"""

import json
from pathlib import Path

from .errors import ValidationError
from .lmp import Lmp, validate_lmp
from .measurable import FinSpace, Rel, fmt_fraction
from .nlmp import Nlmp, validate_nlmp


def _require(data, key, kind):
    if key not in data:
        raise ValidationError(f"model file lacks {key!r}")
    if not isinstance(data[key], kind):
        raise ValidationError(f"{key!r} has the wrong type")
    return data[key]


def model_from_dict(data):
    if not isinstance(data, dict):
        raise ValidationError("model file must hold a JSON object")
    kind = data.get("kind", "lmp")
    if kind not in ("lmp", "nlmp"):
        raise ValidationError(f"unknown kind {kind!r}")
    states = _require(data, "states", list)
    labels = _require(data, "labels", list)
    if not all(isinstance(x, str) for x in states + labels):
        raise ValidationError("states and labels must be strings")
    sigma = data.get("sigma")
    space = FinSpace(states, sigma)
    kernels = data.get("kernels", {})
    if not isinstance(kernels, dict):
        raise ValidationError("'kernels' must be an object")
    if kind == "lmp":
        return validate_lmp(space, labels, kernels)
    return validate_nlmp(space, labels, kernels)


def _measure_dict(m):
    return {k: fmt_fraction(w) for k, w in m.as_mapping().items()}


def model_to_dict(model):
    """Canonical form: sorted keys, zero rows and zero weights dropped."""
    space = model.space
    out = {"kind": "lmp" if isinstance(model, Lmp) else "nlmp",
           "labels": list(model.labels), "states": list(space.states)}
    if not space.is_powerset:
        out["sigma"] = [sorted(a) for a in space.atoms]
    kernels = {}
    for a in model.labels:
        rows = {}
        for s in space.states:
            if isinstance(model, Lmp):
                m = model.measure(a, s)
                if m.total:
                    rows[s] = _measure_dict(m)
            else:
                ms = model.T(a, s)
                if ms:
                    rows[s] = [_measure_dict(m) for m in ms]
        if rows:
            kernels[a] = rows
    out["kernels"] = kernels
    return out


def loads(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}") from None
    return model_from_dict(data)


def dumps(model):
    return json.dumps(model_to_dict(model), indent=2, ensure_ascii=False, sort_keys=False) + "\n"


def load(path):
    return loads(Path(path).read_text(encoding="utf-8"))


def dump(model, path):
    Path(path).write_text(dumps(model), encoding="utf-8")


def as_nlmp(model):
    from .nlmp import embed_lmp
    return model if isinstance(model, Nlmp) else embed_lmp(model)


def relation_from_data(data, left, right=None):
    """A relation file is a JSON list of [s, t] pairs."""
    right = left if right is None else right
    if not isinstance(data, list) or not all(isinstance(p, list) and len(p) == 2 for p in data):
        raise ValidationError("relation file must be a list of [state, state] pairs")
    return Rel(left, right, (tuple(p) for p in data))


def load_relation(path, left, right=None):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}") from None
    return relation_from_data(data, left, right)


def relation_to_data(R):
    return [list(p) for p in sorted(R.pairs)]


def fixtures_dir():
    return Path(__file__).parent / "fixtures"


def load_fixture(name):
    """A bundled model by name, e.g. ``load_fixture("two-chain")``."""
    return load(fixtures_dir() / f"{name}.json")
