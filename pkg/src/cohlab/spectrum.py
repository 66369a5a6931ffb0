"""Labelled models: points, basic opens, specialization and the isomorphism groupoid.

A point is a model together with a finite partial environment sending
parameter names to elements.  Parameter names come from an unbounded
namespace, so a fresh label is always available; this stands in for the
infinite-to-one labellings of the infinite spectrum.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .logic import (
    And, App, Bot, Eq, Exists, Formula, Not, Or, Rel, Sequent, Theory, Top, Var,
    Context, exists_many, conj, substitute_node, rename_bound,
)
from .models import FiniteStructure, Homomorphism, _hom_search, canonical_form, evaluate


@dataclass(frozen=True)
class SpectrumPoint:
    structure: FiniteStructure
    env: tuple = ()   # sorted ((name, sort, element), ...)

    def __post_init__(self):
        env = tuple(sorted((str(n), str(s), int(e)) for n, s, e in self.env))
        names = [n for n, _, _ in env]
        if len(set(names)) != len(names):
            raise ValueError("parameter assigned twice")
        for n, s, e in env:
            if not 0 <= e < self.structure.sizes.get(s, 0):
                raise ValueError(f"parameter {n} of sort {s} outside the carrier")
        object.__setattr__(self, "env", env)

    @classmethod
    def of(cls, structure, assignment: Mapping = None) -> "SpectrumPoint":
        """``assignment`` maps name -> (sort, element)."""
        assignment = assignment or {}
        return cls(structure, tuple((n, s, e) for n, (s, e) in assignment.items()))

    def lookup(self, name: str):
        for n, s, e in self.env:
            if n == name:
                return s, e
        return None

    def defined(self, name: str) -> bool:
        return self.lookup(name) is not None

    @property
    def params(self) -> tuple:
        return tuple((n, s) for n, s, _ in self.env)

    def as_dict(self) -> dict:
        return {n: (s, e) for n, s, e in self.env}

    def to_json(self) -> dict:
        return {"model": canonical_form(self.structure).decode(),
                "env": {n: [s, e] for n, s, e in self.env}}


@dataclass(frozen=True)
class BasicOpen:
    formula: Formula
    params: tuple   # one parameter name per context variable

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        if len(self.params) != len(self.formula.context):
            raise ValueError("parameter tuple does not match the context")
        sorts = {}
        for p, s in zip(self.params, self.formula.context.sorts):
            if sorts.setdefault(p, s) != s:
                raise ValueError(f"parameter {p} used at two sorts")


def _env_update(env: dict, frozen, retarget, values) -> dict:
    if set(frozen) & set(retarget):
        raise ValueError("frozen and retargeted parameters must be disjoint")
    out = dict(env)
    for p in retarget:
        out.pop(p, None)
    for p, v in zip(retarget, values):
        out[p] = v
    return out


def reassign(point: SpectrumPoint, frozen, retarget, values) -> SpectrumPoint:
    """Same model; parameters in ``retarget`` now name ``values`` (each a (sort, element) pair)."""
    if len(retarget) != len(values):
        raise ValueError("retarget and values differ in length")
    for (s, e) in values:
        if not 0 <= e < point.structure.sizes.get(s, 0):
            raise ValueError(f"value {e} outside carrier {s}")
    for p in frozen:
        if not point.defined(p):
            raise ValueError(f"frozen parameter {p} is undefined")
    env = _env_update(point.as_dict(), frozen, retarget, values)
    return SpectrumPoint.of(point.structure, env)


# ---------------------------------------------------------------------------
# Membership in basic opens, by the recursion of the satisfaction lemma

def _fresh_label(env: dict, avoid) -> str:
    i = 0
    while f"_l{i}" in env or f"_l{i}" in avoid:
        i += 1
    return f"_l{i}"


def _term(M, t, labels, env):
    if isinstance(t, Var):
        return env[labels[t.name]][1]
    return M.functions[t.fn][tuple(_term(M, a, labels, env) for a in t.args)]


def _member(M: FiniteStructure, node, labels: dict, env: dict) -> bool:
    """Is the labelled model (M, env) in the open V_{node(labels)}?  All labels are defined here."""
    if isinstance(node, Top):
        return True
    if isinstance(node, Bot):
        return False
    if isinstance(node, Eq):
        return _term(M, node.left, labels, env) == _term(M, node.right, labels, env)
    if isinstance(node, Rel):
        return tuple(_term(M, a, labels, env) for a in node.args) in M.relations[node.name]
    if isinstance(node, And):
        return _member(M, node.left, labels, env) and _member(M, node.right, labels, env)
    if isinstance(node, Or):
        return _member(M, node.left, labels, env) or _member(M, node.right, labels, env)
    if isinstance(node, Not):
        return not _member(M, node.body, labels, env)
    if isinstance(node, Exists):
        # V_{∃y.φ(k)} is the union over fresh labels l of V_{φ(k,l)}; a fresh label can be
        # pointed at any element by reassignment while freezing k
        label = _fresh_label(env, labels.values())
        inner = {**labels, node.var: label}
        frozen = sorted(set(labels.values()))
        for b in range(M.sizes[node.sort]):
            nenv = _env_update(env, frozen, [label], [(node.sort, b)])
            if _member(M, node.body, inner, nenv):
                return True
        return False
    raise TypeError(node)


def in_open(point: SpectrumPoint, U: BasicOpen) -> bool:
    env = point.as_dict()
    for p, s in zip(U.params, U.formula.context.sorts):
        got = env.get(p)
        if got is None or got[0] != s:
            return False
    labels = dict(zip(U.formula.context.names, U.params))
    return _member(point.structure, U.formula.body, labels, env)


def in_open_by_eval(point: SpectrumPoint, U: BasicOpen) -> bool:
    """Reference: the parameter tuple lies in the definable set."""
    env = point.as_dict()
    vals = []
    for p, s in zip(U.params, U.formula.context.sorts):
        got = env.get(p)
        if got is None or got[0] != s:
            return False
        vals.append(got[1])
    return tuple(vals) in evaluate(point.structure, U.formula).tuples


# ---------------------------------------------------------------------------
# Specialization

def _label_constraints(mu: SpectrumPoint, nu: SpectrumPoint):
    fixed = {}
    target = nu.as_dict()
    for n, s, e in mu.env:
        got = target.get(n)
        if got is None or got[0] != s:
            return None
        if fixed.setdefault((s, e), got[1]) != got[1]:
            return None
    return fixed


def label_respecting_homs(mu: SpectrumPoint, nu: SpectrumPoint) -> list:
    fixed = _label_constraints(mu, nu)
    if fixed is None:
        return []
    return [Homomorphism.from_dict(mu.structure, nu.structure, m)
            for m in _hom_search(mu.structure, nu.structure, fixed)]


def closure_leq(mu: SpectrumPoint, nu: SpectrumPoint) -> Optional[Homomorphism]:
    """A homomorphism M_mu -> M_nu carrying mu's labels to nu's, if mu lies in the closure of nu."""
    fixed = _label_constraints(mu, nu)
    if fixed is None:
        return None
    for m in _hom_search(mu.structure, nu.structure, fixed):
        return Homomorphism.from_dict(mu.structure, nu.structure, m)
    return None


def indistinguishable(mu: SpectrumPoint, nu: SpectrumPoint) -> bool:
    return closure_leq(mu, nu) is not None and closure_leq(nu, mu) is not None


@dataclass(frozen=True)
class Arrow:
    source: SpectrumPoint
    target: SpectrumPoint
    iso: Homomorphism

    def compose(self, first: "Arrow") -> "Arrow":
        return Arrow(first.source, self.target, self.iso.compose(first.iso))

    def inverse(self) -> "Arrow":
        return Arrow(self.target, self.source, self.iso.inverse())


def identity_arrow(mu: SpectrumPoint) -> Arrow:
    from .models import identity_hom
    return Arrow(mu, mu, identity_hom(mu.structure))


def arrow_closure(alpha: Arrow, beta: Arrow) -> bool:
    """alpha in the closure of beta: label-respecting h0, h1 with beta.h0 = h1.alpha."""
    if closure_leq(alpha.source, beta.source) is None or closure_leq(alpha.target, beta.target) is None:
        return False
    inv = alpha.iso.inverse()
    fixed1 = _label_constraints(alpha.target, beta.target)
    for h0 in label_respecting_homs(alpha.source, beta.source):
        h1 = beta.iso.compose(h0).compose(inv)
        d = dict(h1.maps)
        if all(d[s][e] == v for (s, e), v in fixed1.items()):
            return True
    return False


# ---------------------------------------------------------------------------
# The groupoid over a model class

def default_parameters(theory: Theory, budget: int) -> list:
    sorts = theory.signature.sorts
    if len(sorts) == 1:
        return [(f"k{i}", sorts[0]) for i in range(budget)]
    return [(f"k{i}_{s}", s) for s in sorts for i in range(budget)]


def environments(M: FiniteStructure, params) -> Iterable[tuple]:
    choices = [[None] + list(range(M.sizes[s])) for _, s in params]
    for pick in itertools.product(*choices):
        yield tuple((n, s, e) for (n, s), e in zip(params, pick) if e is not None)


@dataclass
class SpectrumGroupoid:
    theory: Theory
    models: list
    params: list
    points: list = field(default_factory=list)

    @classmethod
    def build(cls, theory: Theory, models, budget: int = 3) -> "SpectrumGroupoid":
        params = default_parameters(theory, budget)
        models = list(models)
        points = [SpectrumPoint(M, env) for M in models for env in environments(M, params)]
        return cls(theory, models, params, points)

    def arrows(self, source: SpectrumPoint = None) -> Iterable[Arrow]:
        """Isomorphisms of underlying models between points (labels unconstrained)."""
        from .models import enumerate_isos
        sources = [source] if source is not None else self.points
        for mu in sources:
            for nu in self.points:
                if nu.structure == mu.structure or nu.structure.sizes == mu.structure.sizes:
                    for iso in enumerate_isos(mu.structure, nu.structure):
                        yield Arrow(mu, nu, iso)

    def closure_edges(self) -> list:
        out = []
        for i, mu in enumerate(self.points):
            for j, nu in enumerate(self.points):
                if i != j and closure_leq(mu, nu) is not None:
                    out.append((i, j))
        return out

    def to_json(self) -> dict:
        return {"params": [list(p) for p in self.params],
                "points": [p.to_json() for p in self.points],
                "closure_edges": [list(e) for e in self.closure_edges()]}

    def to_dot(self) -> str:
        lines = ["digraph specialization {"]
        for i, p in enumerate(self.points):
            label = f"M{self.models.index(p.structure)} " + ",".join(f"{n}={e}" for n, _, e in p.env)
            lines.append(f'  p{i} [label="{label}"];')
        for i, j in self.closure_edges():
            lines.append(f"  p{i} -> p{j};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def connected_components(groupoid: SpectrumGroupoid, sentences=()) -> list:
    """Components of the symmetric-transitive closure of specialization.

    Returns a list of dicts with the member point indices and, among the given
    closed formulas, those true in every member's model.
    """
    pts = groupoid.points
    parent = list(range(len(pts)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in itertools.combinations(range(len(pts)), 2):
        if find(i) == find(j):
            continue
        if closure_leq(pts[i], pts[j]) is not None or closure_leq(pts[j], pts[i]) is not None:
            parent[find(j)] = find(i)
    groups = {}
    for i in range(len(pts)):
        groups.setdefault(find(i), []).append(i)
    out = []
    for members in sorted(groups.values()):
        shared = [s for s in sentences if all(evaluate(pts[i].structure, s).tuples for i in members)]
        out.append({"points": members, "sentences": shared})
    return out


def open_inclusion_witness(U: BasicOpen, V: BasicOpen, points, theory: Theory, bounds=None):
    """If U is inside V on ``points``, the sequent exists(l). psi(k,l) |- phi(k) and its proof outcome."""
    from .prover import prove
    for p in points:
        if in_open(p, U) and not in_open(p, V):
            return None
    kparams = []
    for p, s in zip(V.params, V.formula.context.sorts):
        if (p, s) not in kparams:
            kparams.append((p, s))
    if not all(p in U.params for p, _ in kparams):
        return None
    ctx = Context(tuple(kparams))
    avoid = set(ctx.names)
    phi = rename_bound(substitute_node(V.formula.body, {v: Var(p) for v, p in zip(V.formula.context.names, V.params)},
                                       ctx.names), ctx.names)
    # parameters of U outside k are quantified; repeated parameters share one variable
    extra = []
    for p, s in zip(U.params, U.formula.context.sorts):
        if p not in ctx.names and (p, s) not in extra:
            extra.append((p, s))
    psi = substitute_node(U.formula.body, {v: Var(p) for v, p in zip(U.formula.context.names, U.params)},
                          list(avoid) + [p for p, _ in extra])
    lhs = rename_bound(exists_many(extra, psi), ctx.names)
    seq = Sequent.of(ctx, lhs, phi)
    return seq, prove(theory, seq, bounds)
