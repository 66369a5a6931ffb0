"""Equivariant families of tuple sets over a finite model class, and bounded definability search."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional

from .formulas import FormulaEnumerator, class_fingerprint
from .logic import ClassicalFormula, Context, Formula, Top, fresh_name
from .models import ModelClass, canonical_form, evaluate

FINITE_NOTE = "finite-scale: compactness automatic"


@dataclass(frozen=True)
class EquivariantFamily:
    models: ModelClass
    context: Context
    sets: tuple   # one frozenset of value tuples per model, aligned with models.models

    def __post_init__(self):
        sets = tuple(frozenset(tuple(t) for t in s) for s in self.sets)
        if len(sets) != len(self.models.models):
            raise ValueError("one tuple set per model is required")
        for M, s in zip(self.models.models, sets):
            for t in s:
                if len(t) != len(self.context) or any(
                        not 0 <= v < M.sizes[srt] for v, srt in zip(t, self.context.sorts)):
                    raise ValueError(f"tuple {t} is not sort-correct")
        object.__setattr__(self, "sets", sets)

    @classmethod
    def from_function(cls, models: ModelClass, context: Context, fn: Callable) -> "EquivariantFamily":
        return cls(models, context, tuple(fn(M) for M in models.models))

    @classmethod
    def from_formula(cls, models: ModelClass, formula: Formula) -> "EquivariantFamily":
        return cls(models, formula.context, tuple(evaluate(M, formula).tuples for M in models.models))

    def matches(self, formula: Formula) -> bool:
        return all(evaluate(M, formula).tuples == s for M, s in zip(self.models.models, self.sets))

    def to_json(self) -> dict:
        return {"context": [list(v) for v in self.context.vars],
                "sets": {canonical_form(M).decode(): sorted(list(t) for t in s)
                         for M, s in zip(self.models.models, self.sets)}}


def family_from_json(data: Mapping, models: ModelClass) -> EquivariantFamily:
    """Sets keyed by canonical form; a model absent from the mapping gets the empty set."""
    ctx = Context(tuple((n, s) for n, s in data["context"]))
    by_form = data.get("sets", {})
    known = {f.decode() for f in models.forms}
    for key in by_form:
        if key not in known:
            raise ValueError("family mentions a structure outside the model class")
    sets = tuple(frozenset(tuple(t) for t in by_form.get(f.decode(), ())) for f in models.forms)
    return EquivariantFamily(models, ctx, sets)


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""
    witness: object = None

    def __bool__(self):
        return self.ok


def is_equivariant(family: EquivariantFamily) -> Verdict:
    mc = family.models
    sorts = family.context.sorts
    for i in range(len(mc)):
        for j in range(len(mc)):
            for iso in mc.isos(i, j):
                image = frozenset(iso.map_tuple(sorts, t) for t in family.sets[i])
                if image != family.sets[j]:
                    return Verdict(False, "not equivariant", {"source": i, "target": j, "iso": iso})
    return Verdict(True)


@dataclass(frozen=True)
class DefinabilityResult:
    formula: Optional[Formula]
    depth: int
    reason: str
    witness: object = None

    @property
    def found(self) -> bool:
        return self.formula is not None


def _candidates(family: EquivariantFamily, d: int, classical: bool, dedup: bool = True):
    mc = family.models
    fp = class_fingerprint(mc.models) if dedup else None
    en = FormulaEnumerator(mc.theory.signature, classical, fp)
    for k in range(1, d + 1):
        for body in en.level(family.context, k):
            yield (ClassicalFormula if classical else Formula)(family.context, body)


def find_defining_formula(family: EquivariantFamily, d: int, classical: Optional[bool] = None) -> DefinabilityResult:
    """First formula of depth <= d, in enumeration order, whose extension is the family."""
    eq = is_equivariant(family)
    if not eq:
        return DefinabilityResult(None, d, eq.reason, eq.witness)
    classical = family.models.theory.classical if classical is None else classical
    for f in _candidates(family, d, classical):
        # the returned formula is re-checked from scratch, not trusted from the fingerprint
        if family.matches(f):
            return DefinabilityResult(f, d, FINITE_NOTE)
    return DefinabilityResult(None, d, f"none at depth {d} over {len(family.models)} models")


@dataclass(frozen=True)
class Pieces:
    formulas: tuple
    covers: bool
    reason: str = ""


def definable_pieces(family: EquivariantFamily, d: int, dedup: bool = False) -> Pieces:
    eq = is_equivariant(family)
    if not eq:
        return Pieces((), False, eq.reason)
    classical = family.models.theory.classical
    out = []
    union = [set() for _ in family.sets]
    for f in _candidates(family, d, classical, dedup):
        exts = [evaluate(M, f).tuples for M in family.models.models]
        if all(e <= s for e, s in zip(exts, family.sets)):
            out.append(f)
            for u, e in zip(union, exts):
                u |= e
    covers = all(u == s for u, s in zip(union, family.sets))
    return Pieces(tuple(out), covers, FINITE_NOTE)


@dataclass(frozen=True)
class FunctionFamily:
    models: ModelClass
    source: Formula
    target: Formula
    maps: tuple   # per model: dict from a source tuple to a target tuple

    def __post_init__(self):
        maps = tuple(dict(m) for m in self.maps)
        for M, m in zip(self.models.models, maps):
            dom = evaluate(M, self.source).tuples
            cod = evaluate(M, self.target).tuples
            if set(m) != set(dom):
                raise ValueError("map is not total on the source set")
            if not all(v in cod for v in m.values()):
                raise ValueError("map leaves the target set")
        object.__setattr__(self, "maps", maps)

    def graph_context(self) -> Context:
        taken = set(self.source.context.names)
        out = list(self.source.context.vars)
        for n, s in self.target.context.vars:
            name = fresh_name(n, taken) if n in taken else n
            taken.add(name)
            out.append((name, s))
        return Context(tuple(out))

    def graph(self) -> EquivariantFamily:
        return EquivariantFamily(self.models, self.graph_context(),
                                 tuple(frozenset(a + b for a, b in m.items()) for m in self.maps))


def find_defining_map(fam: FunctionFamily, d: int) -> DefinabilityResult:
    return find_defining_formula(fam.graph(), d)


class NotEquivariantSection(ValueError):
    pass


def equivariant_extension(formula: Formula, section: Callable, groupoid, target_sort: str,
                          param: str = "k0") -> FunctionFamily:
    """Extend a section over V_{formula(param)} to a family of maps formula^M -> target_sort^M.

    ``section`` maps a point of the groupoid lying in the open to an element of
    ``target_sort`` in that point's model.  The extension at (M, a) transports the
    value at a point labelling alpha(a) back along alpha, for every automorphism
    alpha; all choices must agree.
    """
    from .spectrum import BasicOpen, in_open, SpectrumPoint
    if len(formula.context) != 1:
        raise ValueError("sections are taken over one-variable formulas")
    (xname, xsort), = formula.context.vars
    U = BasicOpen(formula, (param,))
    inside = [p for p in groupoid.points if in_open(p, U)]
    values = {p: section(p) for p in inside}
    mc = _class_of(groupoid)
    # relative equivariance: isos carrying one labelled element to the other carry the values too
    for mu in inside:
        i = mc.index_of(mu.structure)
        a = mu.lookup(param)[1]
        for nu in inside:
            j = mc.index_of(nu.structure)
            b = nu.lookup(param)[1]
            for iso in mc.isos(i, j):
                if iso(xsort, a) == b and iso(target_sort, values[mu]) != values[nu]:
                    raise NotEquivariantSection(f"values at {mu.env} and {nu.env} disagree along an iso")
    maps = []
    for i, M in enumerate(mc.models):
        m = {}
        for (a,) in sorted(evaluate(M, formula).tuples):
            got = set()
            for alpha in mc.automorphisms(i):
                nu = SpectrumPoint.of(M, {param: (xsort, alpha(xsort, a))})
                got.add(alpha.inverse()(target_sort, values[nu]))
            if len(got) != 1:
                raise NotEquivariantSection("extension depends on the chosen isomorphism")
            m[(a,)] = (got.pop(),)
        maps.append(m)
    target = Formula(Context((("y", target_sort),)), Top())
    return FunctionFamily(mc, formula, target, tuple(maps))


def _class_of(groupoid) -> ModelClass:
    if isinstance(groupoid.models, ModelClass):
        return groupoid.models
    models = list(groupoid.models)
    return ModelClass(groupoid.theory, None, models, [canonical_form(M) for M in models])
