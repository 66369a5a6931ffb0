"""Interpretation files and a few standard interpretations.

An interpretation file is JSON::

    {"source": "path/or/bundled-name", "target": "...",
     "sorts": {"X": "G"},
     "symbols": {"pt": "[y:G] y = e", "P": "[x0:G] mul(x0, x0) = x0"}}

A path is resolved relative to the file; a bare name picks a bundled theory.
Omitting "symbols" for a symbol whose name exists in the target with the
same shape maps it to itself.
"""

from __future__ import annotations

import json
import os
from typing import Mapping

from .dsl import load_theory, parse_formula, parse_theory
from .logic import App, Context, Eq, Formula, Interpretation, Rel, Theory, Var


class InterpretationError(ValueError):
    pass


def _resolve_theory(ref, base_dir: str) -> Theory:
    from . import corpus
    if isinstance(ref, Mapping):
        return parse_theory(ref["text"])
    path = os.path.join(base_dir, ref)
    if os.path.exists(path):
        return load_theory(path)
    if ref in corpus.NAMES:
        return corpus.theory(ref)
    raise InterpretationError(f"cannot find theory {ref!r}")


def _same_symbol(source: Theory, target: Theory, sort_map, name):
    ssig, tsig = source.signature, target.signature
    if ssig.is_fn(name):
        args, res = ssig.fn(name)
        ctx = Context(tuple((f"x{i}", sort_map[a]) for i, a in enumerate(args)) + (("y", sort_map[res]),))
        return Formula(ctx, Eq(App(name, tuple(Var(f"x{i}") for i in range(len(args)))), Var("y")))
    args = ssig.rel(name)
    ctx = Context(tuple((f"x{i}", sort_map[a]) for i, a in enumerate(args)))
    return Formula(ctx, Rel(name, tuple(Var(f"x{i}") for i in range(len(args)))))


def build_interpretation(source: Theory, target: Theory, sorts: Mapping, symbols: Mapping,
                         name: str = "I") -> Interpretation:
    sort_map = dict(sorts)
    images = {}
    for sym in source.signature.function_names + source.signature.relation_names:
        if sym in symbols:
            images[sym] = parse_formula(symbols[sym], target.signature)
        else:
            images[sym] = _same_symbol(source, target, sort_map, sym)
    interp = Interpretation(source, target, sort_map, images, name)
    diags = interp.diagnostics()
    if diags:
        raise InterpretationError("; ".join(str(d) for d in diags))
    return interp


def load_interpretation(path: str) -> Interpretation:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return interpretation_from_json(data, os.path.dirname(os.path.abspath(path)))


def interpretation_from_json(data: Mapping, base_dir: str = ".") -> Interpretation:
    source = _resolve_theory(data["source"], base_dir)
    target = _resolve_theory(data["target"], base_dir)
    if data.get("identity"):
        return Interpretation.identity(source)
    return build_interpretation(source, target, data.get("sorts", {}), data.get("symbols", {}),
                                data.get("name", "I"))


# ---------------------------------------------------------------------------
# Standard examples

PREDICATE = """theory predicate
sort X
rel P : X
"""

PREDICATE_TOTAL = """theory predicate_total
sort X
rel P : X
axiom [x:X] true |- P(x)
"""

SORT_WITH_RELATION = """theory sort_with_relation
sort X
rel R : X
"""

EMPTY = """theory empty
"""

INHABITED = """theory inhabited
sort S
axiom [] true |- exists x:S. true
"""


def quotient_example() -> Interpretation:
    """The predicate theory into itself plus an axiom making the predicate total."""
    src, tgt = parse_theory(PREDICATE), parse_theory(PREDICATE_TOTAL)
    return build_interpretation(src, tgt, {"X": "X"}, {}, "quotient")


def new_relation_example() -> Interpretation:
    from . import corpus
    src, tgt = corpus.theory("bare_sort"), parse_theory(SORT_WITH_RELATION)
    return build_interpretation(src, tgt, {"X": "X"}, {}, "new_relation")


def new_sort_example() -> Interpretation:
    return build_interpretation(parse_theory(EMPTY), parse_theory(INHABITED), {}, {}, "new_sort")


def identity_example(name: str = "groups") -> Interpretation:
    from . import corpus
    return Interpretation.identity(corpus.theory(name))


def pointed_into_groups() -> Interpretation:
    from . import corpus
    src, tgt = corpus.theory("pointed_sets"), corpus.theory("groups")
    sort = src.signature.sorts[0]
    return build_interpretation(src, tgt, {sort: "G"}, {"pt": "[y:G] y = e"}, "point_to_identity")
