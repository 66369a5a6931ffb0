"""Syntax for multi-sorted coherent (and classical) first-order logic.

Formulas carry their context explicitly: ``Formula(context, body)`` pairs an
ordered list of sorted variables with an AST whose free variables must lie in
that context.  Bound variables are always fresh with respect to the context
and to enclosing binders, so evaluation never has to deal with shadowing;
substitution and weakening rename binders to keep that invariant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Optional, Sequence


class FormulaError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Terms

class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class App(Term):
    fn: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return self.fn
        return f"{self.fn}({', '.join(map(str, self.args))})"


def const(name: str) -> App:
    return App(name, ())


@lru_cache(maxsize=None)
def term_vars(t: Term) -> frozenset:
    if isinstance(t, Var):
        return frozenset((t.name,))
    out = frozenset()
    for a in t.args:
        out |= term_vars(a)
    return out


def term_depth(t: Term) -> int:
    if isinstance(t, Var) or not t.args:
        return 0
    return 1 + max(term_depth(a) for a in t.args)


def subst_term(t: Term, mapping: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    if not t.args:
        return t
    return App(t.fn, tuple(subst_term(a, mapping) for a in t.args))


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)


# ---------------------------------------------------------------------------
# Formula bodies

class Node:
    __slots__ = ()

    def __str__(self):
        return format_node(self)


@dataclass(frozen=True)
class Top(Node):
    pass


@dataclass(frozen=True)
class Bot(Node):
    pass


@dataclass(frozen=True)
class Eq(Node):
    left: Term
    right: Term


@dataclass(frozen=True)
class Rel(Node):
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class And(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Or(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Exists(Node):
    var: str
    sort: str
    body: Node


@dataclass(frozen=True)
class Not(Node):
    body: Node


TOP = Top()
BOT = Bot()


def conj(*parts: Node) -> Node:
    parts = [p for p in parts if not isinstance(p, Top)]
    if not parts:
        return TOP
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(*parts: Node) -> Node:
    parts = [p for p in parts if not isinstance(p, Bot)]
    if not parts:
        return BOT
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def exists_many(binders: Sequence[tuple], body: Node) -> Node:
    for name, sort in reversed(list(binders)):
        body = Exists(name, sort, body)
    return body


def conjuncts(node: Node) -> list:
    if isinstance(node, And):
        return conjuncts(node.left) + conjuncts(node.right)
    if isinstance(node, Top):
        return []
    return [node]


def disjuncts(node: Node) -> list:
    if isinstance(node, Or):
        return disjuncts(node.left) + disjuncts(node.right)
    if isinstance(node, Bot):
        return []
    return [node]


@lru_cache(maxsize=None)
def free_vars(node: Node) -> frozenset:
    if isinstance(node, (Top, Bot)):
        return frozenset()
    if isinstance(node, Eq):
        return term_vars(node.left) | term_vars(node.right)
    if isinstance(node, Rel):
        out = frozenset()
        for a in node.args:
            out |= term_vars(a)
        return out
    if isinstance(node, (And, Or)):
        return free_vars(node.left) | free_vars(node.right)
    if isinstance(node, Exists):
        return free_vars(node.body) - {node.var}
    if isinstance(node, Not):
        return free_vars(node.body)
    raise TypeError(node)


def all_names(node: Node) -> set:
    """Every variable name occurring in ``node``, free or bound."""
    out = set(free_vars(node))
    for sub in walk(node):
        if isinstance(sub, Exists):
            out.add(sub.var)
    return out


def walk(node: Node) -> Iterator[Node]:
    yield node
    if isinstance(node, (And, Or)):
        yield from walk(node.left)
        yield from walk(node.right)
    elif isinstance(node, (Exists, Not)):
        yield from walk(node.body)


def node_terms(node: Node) -> Iterator[Term]:
    for sub in walk(node):
        if isinstance(sub, Eq):
            yield sub.left
            yield sub.right
        elif isinstance(sub, Rel):
            yield from sub.args


@lru_cache(maxsize=None)
def depth(node: Node) -> int:
    """Connective nesting depth; atoms, true and false have depth 1."""
    if isinstance(node, (And, Or)):
        return 1 + max(depth(node.left), depth(node.right))
    if isinstance(node, (Exists, Not)):
        return 1 + depth(node.body)
    return 1


def is_coherent(node: Node) -> bool:
    return not any(isinstance(n, Not) for n in walk(node))


def fresh_name(base: str, avoid) -> str:
    base = base.rstrip("0123456789'") or "v"
    if base not in avoid:
        return base
    for i in itertools.count(1):
        cand = f"{base}{i}"
        if cand not in avoid:
            return cand


# ---------------------------------------------------------------------------
# Contexts and formulas in context

@dataclass(frozen=True)
class Context:
    vars: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple((str(n), str(s)) for n, s in self.vars))
        names = [n for n, _ in self.vars]
        if len(set(names)) != len(names):
            dup = next(n for n in names if names.count(n) > 1)
            raise FormulaError(f"variable clash: {dup!r} occurs twice in context")

    @classmethod
    def of(cls, *pairs) -> "Context":
        return cls(tuple(pairs))

    @property
    def names(self) -> tuple:
        return tuple(n for n, _ in self.vars)

    @property
    def sorts(self) -> tuple:
        return tuple(s for _, s in self.vars)

    def sort_of(self, name: str) -> str:
        for n, s in self.vars:
            if n == name:
                return s
        raise KeyError(name)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def __contains__(self, name) -> bool:
        return name in self.names

    def __len__(self):
        return len(self.vars)

    def __iter__(self):
        return iter(self.vars)

    def __add__(self, other: "Context") -> "Context":
        return Context(self.vars + tuple(other.vars))

    def extend(self, name: str, sort: str) -> "Context":
        return Context(self.vars + ((name, sort),))

    def __str__(self):
        return "[" + ", ".join(f"{n}:{s}" for n, s in self.vars) + "]"


def _check_binders(node: Node, bound: set):
    if isinstance(node, Exists):
        if node.var in bound:
            raise FormulaError(f"bound variable {node.var!r} is not fresh")
        _check_binders(node.body, bound | {node.var})
    elif isinstance(node, (And, Or)):
        _check_binders(node.left, bound)
        _check_binders(node.right, bound)
    elif isinstance(node, Not):
        _check_binders(node.body, bound)


@dataclass(frozen=True)
class Formula:
    context: Context
    body: Node

    classical = False

    def __post_init__(self):
        if not isinstance(self.context, Context):
            object.__setattr__(self, "context", Context(tuple(self.context)))
        missing = free_vars(self.body) - set(self.context.names)
        if missing:
            raise FormulaError(f"unbound variable {sorted(missing)[0]!r}")
        _check_binders(self.body, set(self.context.names))
        if not self.classical and not is_coherent(self.body):
            raise FormulaError("classical connective in coherent formula")

    @classmethod
    def unchecked(cls, context: Context, body: Node) -> "Formula":
        """Build without validation; used to carry malformed input to ``well_formed``."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "context", context)
        object.__setattr__(obj, "body", body)
        return obj

    @property
    def depth(self) -> int:
        return depth(self.body)

    def __str__(self):
        return f"{self.context} {format_node(self.body)}"


class ClassicalFormula(Formula):
    classical = True


def formula_in(context: Context, body: Node) -> Formula:
    """Formula or ClassicalFormula depending on whether ``body`` uses negation."""
    cls = Formula if is_coherent(body) else ClassicalFormula
    return cls(context, body)


@dataclass(frozen=True)
class Sequent:
    lhs: Formula
    rhs: Formula

    def __post_init__(self):
        if self.lhs.context != self.rhs.context:
            raise FormulaError("sequent sides have different contexts")

    @classmethod
    def of(cls, context: Context, lhs: Node, rhs: Node) -> "Sequent":
        return cls(formula_in(context, lhs), formula_in(context, rhs))

    @property
    def context(self) -> Context:
        return self.lhs.context

    @property
    def classical(self) -> bool:
        return self.lhs.classical or self.rhs.classical

    def __str__(self):
        return f"{self.context} {format_node(self.lhs.body)} |- {format_node(self.rhs.body)}"


# ---------------------------------------------------------------------------
# Signatures and theories

@dataclass(frozen=True)
class Signature:
    sorts: tuple = ()
    functions: tuple = ()   # (name, arg sorts, result sort)
    relations: tuple = ()   # (name, arg sorts)

    def __post_init__(self):
        object.__setattr__(self, "sorts", tuple(self.sorts))
        object.__setattr__(self, "functions",
                           tuple((n, tuple(a), r) for n, a, r in self.functions))
        object.__setattr__(self, "relations", tuple((n, tuple(a)) for n, a in self.relations))
        object.__setattr__(self, "_fn", {n: (a, r) for n, a, r in self.functions})
        object.__setattr__(self, "_rel", {n: a for n, a in self.relations})

    @classmethod
    def build(cls, sorts: Iterable[str], functions: Mapping = None, relations: Mapping = None):
        functions = functions or {}
        relations = relations or {}
        return cls(tuple(sorts),
                   tuple((n, tuple(a), r) for n, (a, r) in functions.items()),
                   tuple((n, tuple(a)) for n, a in relations.items()))

    def fn(self, name: str):
        return self._fn[name]

    def rel(self, name: str):
        return self._rel[name]

    def is_fn(self, name: str) -> bool:
        return name in self._fn

    def is_rel(self, name: str) -> bool:
        return name in self._rel

    @property
    def function_names(self) -> tuple:
        return tuple(n for n, _, _ in self.functions)

    @property
    def relation_names(self) -> tuple:
        return tuple(n for n, _ in self.relations)

    @property
    def constants(self) -> tuple:
        return tuple(n for n, a, _ in self.functions if not a)

    def symbols(self) -> set:
        return set(self._fn) | set(self._rel)

    def merge(self, other: "Signature") -> "Signature":
        clash = (self.symbols() & other.symbols()) | (set(self.sorts) & set(other.sorts))
        if clash:
            raise FormulaError(f"overlapping symbol names: {sorted(clash)}")
        return Signature(self.sorts + other.sorts, self.functions + other.functions,
                         self.relations + other.relations)

    def add(self, sorts=(), functions=(), relations=()) -> "Signature":
        return self.merge(Signature(tuple(sorts), tuple(functions), tuple(relations)))


@dataclass(frozen=True)
class Theory:
    name: str
    signature: Signature
    axioms: tuple = ()
    classical: bool = False

    def __post_init__(self):
        object.__setattr__(self, "axioms", tuple(self.axioms))

    def extend(self, name=None, signature=None, axioms=()) -> "Theory":
        return Theory(name or self.name, signature or self.signature,
                      self.axioms + tuple(axioms), self.classical)


# ---------------------------------------------------------------------------
# Well-formedness

@dataclass(frozen=True)
class Diagnostic:
    location: str
    message: str

    def __str__(self):
        return f"{self.location}: {self.message}"


def term_sort(sig: Signature, sorts: Mapping[str, str], t: Term) -> str:
    if isinstance(t, Var):
        if t.name not in sorts:
            raise FormulaError(f"unbound variable {t.name!r}")
        return sorts[t.name]
    if not sig.is_fn(t.fn):
        raise FormulaError(f"unknown function symbol {t.fn!r}")
    arg_sorts, result = sig.fn(t.fn)
    if len(arg_sorts) != len(t.args):
        raise FormulaError(f"arity mismatch: {t.fn} expects {len(arg_sorts)} arguments, got {len(t.args)}")
    for a, want in zip(t.args, arg_sorts):
        got = term_sort(sig, sorts, a)
        if got != want:
            raise FormulaError(f"sort mismatch: argument of {t.fn} has sort {got}, expected {want}")
    return result


def _node_errors(sig: Signature, node: Node, sorts: dict, classical: bool) -> list:
    errs = []

    def terms(ts):
        out = []
        for t in ts:
            try:
                out.append(term_sort(sig, sorts, t))
            except FormulaError as exc:
                errs.append(str(exc))
                out.append(None)
        return out

    if isinstance(node, Eq):
        a, b = terms([node.left, node.right])
        if a is not None and b is not None and a != b:
            errs.append(f"sort mismatch: equation between {a} and {b}")
    elif isinstance(node, Rel):
        if not sig.is_rel(node.name):
            errs.append(f"unknown relation symbol {node.name!r}")
            terms(node.args)
        else:
            want = sig.rel(node.name)
            if len(want) != len(node.args):
                errs.append(f"arity mismatch: {node.name} expects {len(want)} arguments, got {len(node.args)}")
                terms(node.args)
            else:
                for got, w in zip(terms(node.args), want):
                    if got is not None and got != w:
                        errs.append(f"sort mismatch: argument of {node.name} has sort {got}, expected {w}")
    elif isinstance(node, (And, Or)):
        errs += _node_errors(sig, node.left, sorts, classical)
        errs += _node_errors(sig, node.right, sorts, classical)
    elif isinstance(node, Exists):
        if node.sort not in sig.sorts:
            errs.append(f"unknown sort {node.sort!r}")
        if node.var in sorts:
            errs.append(f"bound variable {node.var!r} is not fresh")
        errs += _node_errors(sig, node.body, {**sorts, node.var: node.sort}, classical)
    elif isinstance(node, Not):
        if not classical:
            errs.append("classical connective in coherent theory")
        errs += _node_errors(sig, node.body, sorts, classical)
    return errs


def formula_errors(sig: Signature, formula: Formula, classical: Optional[bool] = None) -> list:
    classical = formula.classical if classical is None else classical
    errs = []
    names = formula.context.names
    if len(set(names)) != len(names):
        errs.append("variable clash in context")
    for _, s in formula.context.vars:
        if s not in sig.sorts:
            errs.append(f"unknown sort {s!r}")
    errs += _node_errors(sig, formula.body, dict(formula.context.vars), classical)
    return errs


def signature_errors(sig: Signature) -> list:
    errs = []
    if len(set(sig.sorts)) != len(sig.sorts):
        errs.append(Diagnostic("signature", "duplicate sort"))
    names = [n for n, _, _ in sig.functions] + [n for n, _ in sig.relations]
    seen = set()
    for n in names:
        if n in seen:
            errs.append(Diagnostic(f"symbol {n}", "duplicate symbol name"))
        seen.add(n)
    for n, args, res in sig.functions:
        for s in args + (res,):
            if s not in sig.sorts:
                errs.append(Diagnostic(f"symbol {n}", f"undeclared sort {s!r}"))
    for n, args in sig.relations:
        for s in args:
            if s not in sig.sorts:
                errs.append(Diagnostic(f"symbol {n}", f"undeclared sort {s!r}"))
    return errs


def well_formed(theory: Theory) -> list:
    """Return diagnostics; an empty list means the theory is well formed."""
    out = signature_errors(theory.signature)
    for i, ax in enumerate(theory.axioms):
        loc = f"axiom {i + 1}"
        if ax.lhs.context != ax.rhs.context:
            out.append(Diagnostic(loc, "sequent sides have different contexts"))
        for side, f in (("lhs", ax.lhs), ("rhs", ax.rhs)):
            missing = free_vars(f.body) - set(f.context.names)
            for v in sorted(missing):
                out.append(Diagnostic(f"{loc} {side}", f"unbound variable {v!r}"))
            errs = formula_errors(theory.signature, f, classical=theory.classical)
            for e in errs:
                if e.startswith("unbound variable"):
                    continue
                out.append(Diagnostic(f"{loc} {side}", e))
    return out


# ---------------------------------------------------------------------------
# Renaming, weakening and substitution

def _subst_node(node: Node, mapping: dict, avoid: set) -> Node:
    if isinstance(node, (Top, Bot)):
        return node
    if isinstance(node, Eq):
        return Eq(subst_term(node.left, mapping), subst_term(node.right, mapping))
    if isinstance(node, Rel):
        return Rel(node.name, tuple(subst_term(a, mapping) for a in node.args))
    if isinstance(node, And):
        return And(_subst_node(node.left, mapping, avoid), _subst_node(node.right, mapping, avoid))
    if isinstance(node, Or):
        return Or(_subst_node(node.left, mapping, avoid), _subst_node(node.right, mapping, avoid))
    if isinstance(node, Not):
        return Not(_subst_node(node.body, mapping, avoid))
    if isinstance(node, Exists):
        inner = dict(mapping)
        inner.pop(node.var, None)
        var = node.var
        if var in avoid:
            var = fresh_name(var, avoid | all_names(node.body))
            inner[node.var] = Var(var)
        return Exists(var, node.sort, _subst_node(node.body, inner, avoid | {var}))
    raise TypeError(node)


def substitute_node(node: Node, mapping: Mapping[str, Term], avoid=()) -> Node:
    """Capture-avoiding simultaneous substitution on a bare body.

    ``avoid`` lists names that binders must not use (typically the target
    context); variables of the substituted terms are added automatically.
    """
    avoid = set(avoid)
    for t in mapping.values():
        avoid |= term_vars(t)
    return _subst_node(node, dict(mapping), avoid)


def rename_bound(node: Node, avoid) -> Node:
    return _subst_node(node, {}, set(avoid))


def weaken(formula: Formula, extra: Context) -> Formula:
    """Move ``formula`` into the context ``formula.context + extra``."""
    clash = set(formula.context.names) & set(extra.names)
    if clash:
        raise FormulaError(f"variable clash: {sorted(clash)[0]!r}")
    ctx = formula.context + extra
    body = rename_bound(formula.body, ctx.names)
    return type(formula)(ctx, body)


def substitute(formula: Formula, assignment: Mapping[str, Term], context: Optional[Context] = None,
               signature: Optional[Signature] = None) -> Formula:
    """Substitute terms for context variables.

    The result lives in ``context`` when given; otherwise in the original
    context minus the substituted variables that no term still mentions.
    """
    for v in assignment:
        if v not in formula.context:
            raise FormulaError(f"{v!r} is not a context variable")
    if context is None:
        used = set()
        for t in assignment.values():
            used |= term_vars(t)
        keep = [(n, s) for n, s in formula.context.vars if n not in assignment or n in used]
        context = Context(tuple(keep))
    if signature is not None:
        sorts = dict(context.vars)
        for v, t in assignment.items():
            got = term_sort(signature, sorts, t)
            want = formula.context.sort_of(v)
            if got != want:
                raise FormulaError(f"sort mismatch: {v} has sort {want}, term {t} has sort {got}")
    body = substitute_node(formula.body, assignment, context.names)
    return type(formula)(context, body)


# ---------------------------------------------------------------------------
# Flattening: every atom becomes x = y, R(x..), or f(x..) = y

def _flatten_term(t: Term, sig: Signature, sorts: dict, avoid: set, binders: list, atoms: list) -> str:
    if isinstance(t, Var):
        return t.name
    args = [_flatten_term(a, sig, sorts, avoid, binders, atoms) for a in t.args]
    _, res = sig.fn(t.fn)
    y = fresh_name("w", avoid)
    avoid.add(y)
    sorts[y] = res
    binders.append((y, res))
    atoms.append(Eq(App(t.fn, tuple(Var(a) for a in args)), Var(y)))
    return y


def flatten_node(node: Node, sig: Signature, sorts: dict, avoid: set) -> Node:
    if isinstance(node, (Top, Bot)):
        return node
    if isinstance(node, (Eq, Rel)):
        binders, atoms = [], []
        if isinstance(node, Eq):
            l, r = node.left, node.right
            if isinstance(l, App) and isinstance(r, Var) and all(isinstance(a, Var) for a in l.args):
                return node
            if isinstance(r, App) and isinstance(l, Var) and all(isinstance(a, Var) for a in r.args):
                return Eq(r, l)
            if isinstance(l, Var) and isinstance(r, Var):
                return node
            if isinstance(l, App) and isinstance(r, App):
                lv = [_flatten_term(a, sig, sorts, avoid, binders, atoms) for a in l.args]
                rv = _flatten_term(r, sig, sorts, avoid, binders, atoms)
                core = Eq(App(l.fn, tuple(Var(a) for a in lv)), Var(rv))
            else:
                app, v = (l, r) if isinstance(l, App) else (r, l)
                av = [_flatten_term(a, sig, sorts, avoid, binders, atoms) for a in app.args]
                core = Eq(App(app.fn, tuple(Var(a) for a in av)), v)
        else:
            vs = [_flatten_term(a, sig, sorts, avoid, binders, atoms) for a in node.args]
            core = Rel(node.name, tuple(Var(a) for a in vs))
        return exists_many(binders, conj(*atoms, core))
    if isinstance(node, And):
        return And(flatten_node(node.left, sig, sorts, avoid), flatten_node(node.right, sig, sorts, avoid))
    if isinstance(node, Or):
        return Or(flatten_node(node.left, sig, sorts, avoid), flatten_node(node.right, sig, sorts, avoid))
    if isinstance(node, Not):
        return Not(flatten_node(node.body, sig, sorts, avoid))
    if isinstance(node, Exists):
        return Exists(node.var, node.sort,
                      flatten_node(node.body, sig, {**sorts, node.var: node.sort}, avoid))
    raise TypeError(node)


def flatten(formula: Formula, sig: Signature) -> Formula:
    avoid = set(formula.context.names) | all_names(formula.body)
    body = flatten_node(formula.body, sig, dict(formula.context.vars), avoid)
    return type(formula)(formula.context, body)


# ---------------------------------------------------------------------------
# Interpretations

@dataclass(frozen=True)
class Interpretation:
    """Sort map plus, for each source symbol, a target formula in context.

    Relation R : A1..An maps to a formula in context [x1:I(A1), ..., xn:I(An)];
    function f : A1..An -> B maps to a formula in context
    [x1:I(A1), ..., xn:I(An), y:I(B)] which should be provably functional.
    """
    source: Theory
    target: Theory
    sort_map: Mapping = field(default_factory=dict)
    symbol_map: Mapping = field(default_factory=dict)
    name: str = "I"

    def __post_init__(self):
        object.__setattr__(self, "sort_map", dict(self.sort_map))
        object.__setattr__(self, "symbol_map", dict(self.symbol_map))

    def __hash__(self):
        return hash((self.name, self.source.name, self.target.name))

    def __eq__(self, other):
        return self is other

    @classmethod
    def identity(cls, theory: Theory) -> "Interpretation":
        sig = theory.signature
        symbols = {}
        for n, args, res in sig.functions:
            ctx = Context(tuple((f"x{i}", s) for i, s in enumerate(args)) + (("y", res),))
            symbols[n] = Formula(ctx, Eq(App(n, tuple(Var(f"x{i}") for i in range(len(args)))), Var("y")))
        for n, args in sig.relations:
            ctx = Context(tuple((f"x{i}", s) for i, s in enumerate(args)))
            symbols[n] = Formula(ctx, Rel(n, tuple(Var(f"x{i}") for i in range(len(args)))))
        return cls(theory, theory, {s: s for s in sig.sorts}, symbols, name=f"id_{theory.name}")

    def map_sort(self, sort: str) -> str:
        return self.sort_map[sort]

    def map_context(self, ctx: Context) -> Context:
        return Context(tuple((n, self.sort_map[s]) for n, s in ctx.vars))

    def diagnostics(self) -> list:
        out = []
        src, tgt = self.source.signature, self.target.signature
        for s in src.sorts:
            if s not in self.sort_map:
                out.append(Diagnostic(f"sort {s}", "no image"))
            elif self.sort_map[s] not in tgt.sorts:
                out.append(Diagnostic(f"sort {s}", f"image {self.sort_map[s]!r} is not a target sort"))
        if out:
            return out
        for n, args, res in src.functions:
            want = tuple(self.sort_map[a] for a in args) + (self.sort_map[res],)
            out += self._check_image(n, want)
        for n, args in src.relations:
            out += self._check_image(n, tuple(self.sort_map[a] for a in args))
        return out

    def _check_image(self, name, want):
        f = self.symbol_map.get(name)
        if f is None:
            return [Diagnostic(f"symbol {name}", "no image")]
        if f.context.sorts != want:
            return [Diagnostic(f"symbol {name}", f"image context {f.context} does not match sorts {want}")]
        return [Diagnostic(f"symbol {name}", e) for e in formula_errors(self.target.signature, f)]

    def translate_node(self, node: Node, sorts: dict, avoid: set) -> Node:
        """Translate a flat source body into the target language."""
        if isinstance(node, (Top, Bot)):
            return node
        if isinstance(node, Eq):
            l, r = node.left, node.right
            if isinstance(l, Var) and isinstance(r, Var):
                return node
            app, y = (l, r) if isinstance(l, App) else (r, l)
            image = self.symbol_map[app.fn]
            names = image.context.names
            mapping = {names[i]: a for i, a in enumerate(app.args)}
            mapping[names[-1]] = y
            return substitute_node(image.body, mapping, avoid)
        if isinstance(node, Rel):
            image = self.symbol_map[node.name]
            mapping = dict(zip(image.context.names, node.args))
            return substitute_node(image.body, mapping, avoid)
        if isinstance(node, And):
            return And(self.translate_node(node.left, sorts, avoid), self.translate_node(node.right, sorts, avoid))
        if isinstance(node, Or):
            return Or(self.translate_node(node.left, sorts, avoid), self.translate_node(node.right, sorts, avoid))
        if isinstance(node, Not):
            return Not(self.translate_node(node.body, sorts, avoid))
        if isinstance(node, Exists):
            return Exists(node.var, self.sort_map[node.sort],
                          self.translate_node(node.body, {**sorts, node.var: node.sort}, avoid | {node.var}))
        raise TypeError(node)

    def translate(self, formula: Formula) -> Formula:
        flat = flatten(formula, self.source.signature)
        ctx = self.map_context(flat.context)
        avoid = set(ctx.names) | all_names(flat.body)
        body = self.translate_node(flat.body, dict(flat.context.vars), avoid)
        return formula_in(ctx, body)

    def translate_sequent(self, seq: Sequent) -> Sequent:
        return Sequent(self.translate(seq.lhs), self.translate(seq.rhs))


# ---------------------------------------------------------------------------
# Printing

_PREC = {Or: 1, And: 2}


def format_term(t: Term) -> str:
    return str(t)


def format_node(node: Node, prec: int = 0) -> str:
    if isinstance(node, Top):
        return "true"
    if isinstance(node, Bot):
        return "false"
    if isinstance(node, Eq):
        return f"{node.left} = {node.right}"
    if isinstance(node, Rel):
        if not node.args:
            return node.name
        return f"{node.name}({', '.join(map(str, node.args))})"
    if isinstance(node, (And, Or)):
        p = _PREC[type(node)]
        op = "/\\" if isinstance(node, And) else "\\/"
        s = f"{format_node(node.left, p)} {op} {format_node(node.right, p + 1)}"
        return f"({s})" if prec > p else s
    if isinstance(node, Not):
        return f"not {format_node(node.body, 3)}"
    if isinstance(node, Exists):
        s = f"exists {node.var}:{node.sort}. {format_node(node.body, 0)}"
        return f"({s})" if prec > 0 else s
    raise TypeError(node)
