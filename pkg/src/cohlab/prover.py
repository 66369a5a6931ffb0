"""Bounded proof search for coherent sequents.

``prove`` tries, in order:

1. a fair restricted chase from the generic tuple satisfying the left side,
   with union-find congruence closure and branching on disjunctions;
2. Knuth-Bendix completion of the theory's equational axioms plus the
   sequent's equational hypotheses, for goals built from equations, where
   existential goals are tried against small closed witness terms;
3. a finite countermodel search through the model finder.

Proved verdicts only come from (1) and (2), both of which are sound.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Optional

from .logic import (
    And, App, Bot, Context, Eq, Exists, Formula, Node, Not, Or, Rel, Sequent,
    Signature, TOP, Theory, Top, Var, conj, conjuncts, disjuncts, fresh_name,
    substitute_node, subterms, term_vars, walk,
)
from .models import BoundExceeded, FiniteStructure, evaluate, is_model, satisfies


@dataclass(frozen=True)
class Bounds:
    max_elements: int = 8
    max_firings: int = 500
    max_branches: int = 64
    countermodel_size: int = 3
    max_rules: int = 200

    def to_json(self):
        return {"max_elements": self.max_elements, "max_firings": self.max_firings,
                "max_branches": self.max_branches, "countermodel_size": self.countermodel_size}


class ProofOutcome:
    status = "unknown"

    @property
    def proved(self):
        return self.status == "proved"


@dataclass(frozen=True)
class Proved(ProofOutcome):
    method: str
    trace: tuple = ()
    status = "proved"

    def to_json(self):
        return {"status": self.status, "method": self.method, "trace": list(self.trace)}


@dataclass(frozen=True)
class Countermodel(ProofOutcome):
    structure: FiniteStructure
    witness: tuple
    method: str = "chase"
    trace: tuple = ()
    status = "countermodel"

    def to_json(self):
        return {"status": self.status, "method": self.method, "model": self.structure.to_json(),
                "witness": list(self.witness), "trace": list(self.trace)}


@dataclass(frozen=True)
class Unknown(ProofOutcome):
    reason: str
    trace: tuple = ()
    status = "unknown"

    def to_json(self):
        return {"status": self.status, "reason": self.reason, "trace": list(self.trace)}


class _Limit(Exception):
    def __init__(self, reason):
        super().__init__(reason)
        self.reason = reason


# ---------------------------------------------------------------------------
# Chase state: elements with union-find, partial function graph, relation facts

class _State:
    def __init__(self, sig: Signature):
        self.sig = sig
        self.sort = []
        self.parent = []
        self.funcs = {}
        self.rels = set()
        self.bot = False

    def copy(self):
        s = _State.__new__(_State)
        s.sig = self.sig
        s.sort = list(self.sort)
        s.parent = list(self.parent)
        s.funcs = dict(self.funcs)
        s.rels = set(self.rels)
        s.bot = self.bot
        return s

    def find(self, a):
        p = self.parent
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a

    def new(self, sort):
        i = len(self.sort)
        self.sort.append(sort)
        self.parent.append(i)
        return i

    def elements(self, sort=None):
        return [i for i in range(len(self.sort))
                if self.parent[i] == i and (sort is None or self.sort[i] == sort)]

    def size(self):
        return sum(1 for i in range(len(self.sort)) if self.parent[i] == i)

    def union(self, a, b):
        pending = [(a, b)]
        changed = False
        while pending:
            a, b = pending.pop()
            a, b = self.find(a), self.find(b)
            if a == b:
                continue
            if b < a:
                a, b = b, a
            self.parent[b] = a
            changed = True
            if not pending:
                funcs = {}
                for (f, args), v in self.funcs.items():
                    k = (f, tuple(self.find(x) for x in args))
                    v = self.find(v)
                    old = funcs.get(k)
                    if old is not None and old != v:
                        pending.append((old, v))
                    else:
                        funcs[k] = v
                self.funcs = funcs
        if changed:
            self.rels = {(r, tuple(self.find(x) for x in args)) for r, args in self.rels}

    def term(self, t, env, create=False):
        if isinstance(t, Var):
            return self.find(env[t.name])
        args = []
        for a in t.args:
            v = self.term(a, env, create)
            if v is None:
                return None
            args.append(v)
        key = (t.fn, tuple(args))
        v = self.funcs.get(key)
        if v is None and create:
            v = self.new(self.sig.fn(t.fn)[1])
            self.funcs[key] = v
        return None if v is None else self.find(v)

    def holds(self, node, env) -> bool:
        if isinstance(node, Top):
            return True
        if isinstance(node, Bot):
            return False
        if isinstance(node, Eq):
            a = self.term(node.left, env)
            if a is None:
                return False
            b = self.term(node.right, env)
            return b is not None and a == b
        if isinstance(node, Rel):
            args = []
            for t in node.args:
                v = self.term(t, env)
                if v is None:
                    return False
                args.append(v)
            return (node.name, tuple(args)) in self.rels
        if isinstance(node, And):
            return self.holds(node.left, env) and self.holds(node.right, env)
        if isinstance(node, Or):
            return self.holds(node.left, env) or self.holds(node.right, env)
        if isinstance(node, Exists):
            inner = dict(env)
            for e in self.elements(node.sort):
                inner[node.var] = e
                if self.holds(node.body, inner):
                    return True
            return False
        raise TypeError(node)

    def missing_entries(self):
        out = []
        for n, args, _ in self.sig.functions:
            for a in itertools.product(*[self.elements(s) for s in args]):
                if (n, a) not in self.funcs:
                    out.append((n, a))
        return out

    def describe(self, e):
        return f"{self.sort[e]}#{self.find(e)}"


def _assert(state: _State, node: Node, env: dict) -> list:
    """Make ``node`` true; returns the surviving branch states (empty if all hit false)."""
    if isinstance(node, Top):
        return [state]
    if isinstance(node, Bot):
        return []
    if isinstance(node, Eq):
        a = state.term(node.left, env, create=True)
        b = state.term(node.right, env, create=True)
        state.union(a, b)
        return [state]
    if isinstance(node, Rel):
        args = tuple(state.term(t, env, create=True) for t in node.args)
        state.rels.add((node.name, args))
        return [state]
    if isinstance(node, And):
        out = []
        for s in _assert(state, node.left, env):
            out.extend(_assert(s, node.right, env))
        return out
    if isinstance(node, Or):
        return _assert(state.copy(), node.left, env) + _assert(state, node.right, env)
    if isinstance(node, Exists):
        e = state.new(node.sort)
        return _assert(state, node.body, {**env, node.var: e})
    raise TypeError(node)


def _seed(state: _State, node: Node, env: dict, bound: frozenset):
    """Name the goal's subterms over context variables so the goal can see them."""
    if isinstance(node, (Eq, Rel)):
        terms = (node.left, node.right) if isinstance(node, Eq) else node.args
        for t in terms:
            for sub in subterms(t):
                if isinstance(sub, App) and not (term_vars(sub) & bound):
                    state.term(sub, env, create=True)
    elif isinstance(node, (And, Or)):
        _seed(state, node.left, env, bound)
        _seed(state, node.right, env, bound)
    elif isinstance(node, Exists):
        _seed(state, node.body, env, bound | {node.var})


class _Chase:
    def __init__(self, theory: Theory, sequent: Sequent, bounds: Bounds):
        self.theory = theory
        self.sequent = sequent
        self.bounds = bounds
        self.firings = 0
        self.branches = 1
        self.trace = []

    def matches(self, state, ax):
        ctx = ax.context
        pools = [state.elements(s) for s in ctx.sorts]
        for vals in itertools.product(*pools):
            env = dict(zip(ctx.names, vals))
            if state.holds(ax.lhs.body, env) and not state.holds(ax.rhs.body, env):
                yield env

    def run(self):
        sig = self.theory.signature
        state = _State(sig)
        env = {n: state.new(s) for n, s in self.sequent.context.vars}
        self.goal_env = env
        starts = _assert(state, self.sequent.lhs.body, dict(env))
        for st in starts:
            _seed(st, self.sequent.rhs.body, env, frozenset())
        self.trace.append({"event": "assume", "branches": len(starts)})
        results = []
        for i, s in enumerate(starts):
            r = self.branch(s, f"{i}")
            if r[0] == "countermodel":
                return r
            results.append(r)
        if all(r[0] == "closed" for r in results):
            return ("closed",)
        return next(r for r in results if r[0] == "unknown")

    def closed(self, state):
        return state.bot or state.holds(self.sequent.rhs.body, self.goal_env)

    def branch(self, state, path):
        while True:
            if self.closed(state):
                self.trace.append({"event": "close", "branch": path})
                return ("closed",)
            progress = False
            # round robin: at most one firing per axiom per round
            for i, ax in enumerate(self.theory.axioms):
                for env in itertools.islice(self.matches(state, ax), 1):
                    self.firings += 1
                    if self.firings > self.bounds.max_firings:
                        return ("unknown", f"max_firings={self.bounds.max_firings} reached")
                    self.trace.append({"event": "fire", "branch": path, "axiom": i + 1,
                                       "match": {k: state.describe(v) for k, v in env.items()}})
                    outs = _assert(state, ax.rhs.body, env)
                    if not outs:
                        self.trace.append({"event": "close", "branch": path, "by": "false"})
                        return ("closed",)
                    if len(outs) > 1:
                        self.branches += len(outs) - 1
                        if self.branches > self.bounds.max_branches:
                            return ("unknown", f"max_branches={self.bounds.max_branches} reached")
                        results = []
                        for k, s in enumerate(outs):
                            r = self.branch(s, f"{path}.{k}")
                            if r[0] == "countermodel":
                                return r
                            results.append(r)
                        if all(r[0] == "closed" for r in results):
                            return ("closed",)
                        return next(r for r in results if r[0] == "unknown")
                    state = outs[0]
                    progress = True
                    if state.size() > self.bounds.max_elements:
                        return ("unknown", f"max_elements={self.bounds.max_elements} reached")
                    if self.closed(state):
                        self.trace.append({"event": "close", "branch": path})
                        return ("closed",)
            if progress:
                continue
            missing = state.missing_entries()
            if missing:
                # saturated but partial: name every undefined application
                if state.size() + len(missing) > self.bounds.max_elements:
                    return ("unknown", f"max_elements={self.bounds.max_elements} reached")
                self.trace.append({"event": "expand", "branch": path, "new": len(missing)})
                for n, a in missing:
                    state.funcs[(n, a)] = state.new(self.theory.signature.fn(n)[1])
                continue
            return ("countermodel", state)


def _state_structure(state: _State, sig: Signature):
    index = {}
    sizes = {}
    for s in sig.sorts:
        elems = state.elements(s)
        sizes[s] = len(elems)
        for k, e in enumerate(elems):
            index[e] = k
    funcs = {n: {} for n in sig.function_names}
    for (f, args), v in state.funcs.items():
        funcs[f][tuple(index[state.find(a)] for a in args)] = index[state.find(v)]
    rels = {n: set() for n in sig.relation_names}
    for r, args in state.rels:
        rels[r].add(tuple(index[state.find(a)] for a in args))
    return FiniteStructure(sig, sizes, funcs, rels), index


# ---------------------------------------------------------------------------
# Equational reasoning by completion

def _equational_axioms(theory: Theory):
    eqs = []
    for ax in theory.axioms:
        if conjuncts(ax.lhs.body):
            continue
        parts = conjuncts(ax.rhs.body)
        if parts and all(isinstance(p, Eq) for p in parts):
            eqs.extend((p.left, p.right) for p in parts)
    return eqs


def _ground(node, consts):
    return substitute_node(node, {n: App(c, ()) for n, c in consts.items()})


def _hypothesis_cases(node, consts, sig, used):
    """Split a left side into cases of ground equations; existentials become constants."""
    if isinstance(node, Top):
        return [[]]
    if isinstance(node, Bot):
        return []
    if isinstance(node, Eq):
        return [[(_ground(node, consts).left, _ground(node, consts).right)]]
    if isinstance(node, Rel):
        return [[]]
    if isinstance(node, And):
        return [a + b for a in _hypothesis_cases(node.left, consts, sig, used)
                for b in _hypothesis_cases(node.right, consts, sig, used)]
    if isinstance(node, Or):
        return _hypothesis_cases(node.left, consts, sig, used) + _hypothesis_cases(node.right, consts, sig, used)
    if isinstance(node, Exists):
        c = fresh_name("_c_" + node.var, used)
        used.add(c)
        return _hypothesis_cases(node.body, {**consts, node.var: c}, sig, used)
    return None


def _witness_terms(sig: Signature, constants, rules, normalize, depth: int = 3, limit: int = 3000) -> dict:
    """Distinct normal forms of closed terms up to ``depth``, by sort."""
    by_sort = {s: [] for s in sig.sorts}
    seen = set()
    levels = []
    first = []
    for c, srt in constants:
        t = normalize(App(c, ()), rules)
        if t not in seen:
            seen.add(t)
            first.append((t, srt))
    levels.append(first)
    for _ in range(depth - 1):
        known = [x for lv in levels for x in lv]
        new = []
        for n, args, res in sig.functions:
            if not args:
                continue
            pools = [[t for t, s in known if s == a] for a in args]
            for combo in itertools.product(*pools):
                t = normalize(App(n, tuple(combo)), rules)
                if t not in seen:
                    seen.add(t)
                    new.append((t, res))
                    if len(seen) > limit:
                        break
        levels.append(new)
    for lv in levels:
        for t, srt in lv:
            by_sort[srt].append(t)
    return by_sort


def _goal_holds(node, consts, rules, normalize, witnesses=None):
    if isinstance(node, Top):
        return True
    if isinstance(node, Exists):
        for t in (witnesses or {}).get(node.sort, ()):
            if _goal_holds(substitute_node(node.body, {node.var: t}), consts, rules, normalize, witnesses):
                return True
        return False
    if isinstance(node, Eq):
        g = _ground(node, consts)
        return normalize(g.left, rules) == normalize(g.right, rules)
    if isinstance(node, And):
        return _goal_holds(node.left, consts, rules, normalize, witnesses) and \
            _goal_holds(node.right, consts, rules, normalize, witnesses)
    if isinstance(node, Or):
        return _goal_holds(node.left, consts, rules, normalize, witnesses) or \
            _goal_holds(node.right, consts, rules, normalize, witnesses)
    return False


def _subst_const(t, name, value):
    if isinstance(t, App):
        if t.fn == name and not t.args:
            return value
        return App(t.fn, tuple(_subst_const(a, name, value) for a in t.args))
    return t


def _mentions(t, name):
    return isinstance(t, App) and (t.fn == name and not t.args or any(_mentions(a, name) for a in t.args))


def _prove_by_completion(theory: Theory, sequent: Sequent, bounds: Bounds):
    from .kb import CompletionFailed, complete, normalize, precedence
    axioms = _equational_axioms(theory)
    if not _goal_shape(sequent.rhs.body):
        return None
    used = set(theory.signature.symbols())
    consts = {}
    for n in sequent.context.names:
        c = fresh_name("_c_" + n, used)
        used.add(c)
        consts[n] = c
    cases = _hypothesis_cases(sequent.lhs.body, consts, theory.signature, used)
    if cases is None:
        return None
    extra = sorted(used - set(theory.signature.symbols()))
    trace = []
    for k, hyps in enumerate(cases):
        # eliminate hypotheses that define a constant outright
        goal_sub = {}
        hyps = list(hyps)
        changed = True
        while changed:
            changed = False
            for i, (s, t) in enumerate(hyps):
                for a, b in ((s, t), (t, s)):
                    if isinstance(a, App) and not a.args and a.fn in extra and not _mentions(b, a.fn):
                        hyps.pop(i)
                        hyps = [(_subst_const(x, a.fn, b), _subst_const(y, a.fn, b)) for x, y in hyps]
                        goal_sub = {n: _subst_const(v, a.fn, b) for n, v in goal_sub.items()}
                        goal_sub[a.fn] = b
                        changed = True
                        break
                if changed:
                    break
        prec = precedence(theory.signature, extra)
        try:
            rules = complete(axioms + hyps, prec, max_rules=bounds.max_rules)
        except CompletionFailed as exc:
            return None
        goal = sequent.rhs.body
        values = {}
        for n, c in consts.items():
            values[n] = goal_sub.get(c, App(c, ()))
        g = substitute_node(goal, values)
        witnesses = None
        if any(isinstance(x, Exists) for x in walk(g)):
            sig = theory.signature
            cs = [(n, res) for n, args, res in sig.functions if not args]
            cs += [(c, srt) for (name, srt), c in zip(sequent.context.vars, consts.values())
                   if c not in goal_sub]
            witnesses = _witness_terms(sig, cs, rules, normalize)
        if not _goal_holds(g, {}, rules, normalize, witnesses):
            return None
        trace.append({"event": "completion", "case": k, "rules": [str(r) for r in rules],
                      "hypotheses": [f"{s} = {t}" for s, t in hyps]})
    return Proved("completion", tuple(trace))


def _goal_shape(node):
    if isinstance(node, (Top, Eq)):
        return True
    if isinstance(node, Exists):
        return _goal_shape(node.body)
    if isinstance(node, (And, Or)):
        return _goal_shape(node.left) and _goal_shape(node.right)
    return False


# ---------------------------------------------------------------------------
# Countermodels through the model finder

def countermodel_theory(theory: Theory, sequent: Sequent):
    """Theory + fresh constants c_x + (true |- lhs(c)) + (rhs(c) |- false)."""
    used = set(theory.signature.symbols()) | set(theory.signature.sorts)
    consts = {}
    for n, s in sequent.context.vars:
        c = fresh_name(f"c_{n}", used)
        used.add(c)
        consts[n] = (c, s)
    sig = theory.signature.add(functions=[(c, (), s) for c, s in consts.values()])
    mapping = {n: App(c, ()) for n, (c, _) in consts.items()}
    lhs = substitute_node(sequent.lhs.body, mapping)
    rhs = substitute_node(sequent.rhs.body, mapping)
    empty = Context(())
    extra = [Sequent(Formula(empty, TOP), Formula(empty, lhs)),
             Sequent(Formula(empty, rhs), Formula(empty, Bot()))]
    return Theory(theory.name + "_cm", sig, theory.axioms + tuple(extra), theory.classical), consts


def find_countermodel(theory: Theory, sequent: Sequent, size: int, max_nodes: int = 500_000):
    from .mace import search_models
    ext, consts = countermodel_theory(theory, sequent)
    try:
        for M in search_models(ext, {s: size for s in ext.signature.sorts}, max_nodes=max_nodes):
            witness = tuple(M.apply(c) for c, _ in consts.values())
            base = M.restrict_signature(theory.signature)
            return base, witness
    except BoundExceeded:
        return None
    return None


def check_countermodel(theory, sequent, M, witness) -> bool:
    return is_model(M, theory) and witness in evaluate(M, sequent.lhs).tuples \
        and witness not in evaluate(M, sequent.rhs).tuples


def prove(theory: Theory, sequent: Sequent, bounds: Optional[Bounds] = None) -> ProofOutcome:
    bounds = bounds or Bounds()
    if sequent.classical or theory.classical and any(ax.classical for ax in theory.axioms):
        return Unknown("classical input: morleyize first")
    chase = _Chase(theory, sequent, bounds)
    result = chase.run()
    trace = tuple(chase.trace)
    if result[0] == "closed":
        return Proved("chase", trace)
    if result[0] == "countermodel":
        M, index = _state_structure(result[1], theory.signature)
        witness = tuple(index[result[1].find(chase.goal_env[n])] for n in sequent.context.names)
        if check_countermodel(theory, sequent, M, witness):
            return Countermodel(M, witness, "chase", trace)
        reason = "chase saturated but the candidate countermodel failed re-validation"
    else:
        reason = result[1]
    outcome = _prove_by_completion(theory, sequent, bounds)
    if outcome is not None:
        return Proved(outcome.method, trace[-50:] + outcome.trace)
    found = find_countermodel(theory, sequent, bounds.countermodel_size)
    if found is not None:
        M, witness = found
        if check_countermodel(theory, sequent, M, witness):
            return Countermodel(M, witness, "model search", ())
    return Unknown(f"{reason}; completion inconclusive; no countermodel with carriers <= {bounds.countermodel_size}",
                   trace[-50:])


def entails_on_class(model_class, sequent: Sequent) -> bool:
    """Necessary condition only: every enumerated model satisfies the sequent."""
    return all(satisfies(M, sequent) for M in model_class)


def refute_on_class(model_class, sequent: Sequent):
    for i, M in enumerate(model_class):
        if not satisfies(M, sequent):
            return i, M
    return None


def trace_json(outcome: ProofOutcome) -> str:
    return json.dumps(outcome.to_json(), sort_keys=True, indent=2)
