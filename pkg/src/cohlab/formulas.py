"""Depth-bounded enumeration of formulas in a fixed context.

Atoms are flat: ``x = y``, ``R(t..)`` and ``f(t..) = t`` where every t is a
variable or a constant.  Atoms built from variables alone are listed first.
Depth counts connectives: atoms, true and false have depth 1; each
conjunction, disjunction, quantifier or negation adds one.  Conjunctions and
disjunctions are generated once per unordered pair of distinct arguments, and
a quantifier is only placed over a body that uses the bound variable.

With a model class attached, formulas are deduplicated by their extensions
across the class.  Because every connective acts on extensions alone, keeping
one representative per extension loses no extension at any depth.
"""

from __future__ import annotations

import itertools
from typing import Callable, Optional

from .logic import (
    And, App, BOT, Context, Eq, Exists, Formula, ClassicalFormula, Not, Or, Rel,
    Signature, TOP, Var, depth, free_vars, fresh_name,
)


def _terms(sig: Signature, ctx: Context, sort: str) -> list:
    out = [Var(n) for n, s in ctx.vars if s == sort]
    out += [App(c, ()) for c, args, res in sig.functions if not args and res == sort]
    return out


def atoms(sig: Signature, ctx: Context) -> list:
    out = [TOP, BOT]
    for (i, (a, s)), (j, (b, t)) in itertools.combinations(enumerate(ctx.vars), 2):
        if s == t:
            out.append(Eq(Var(a), Var(b)))
    for n, args in sig.relations:
        for ts in itertools.product(*[_terms(sig, ctx, s) for s in args]):
            out.append(Rel(n, tuple(ts)))
    for n, args, res in sig.functions:
        if not args:
            # constant equations c = t
            for t in _terms(sig, ctx, res):
                if not (isinstance(t, App) and t.fn == n):
                    out.append(Eq(App(n, ()), t))
            continue
        for ts in itertools.product(*[_terms(sig, ctx, s) for s in args]):
            for r in _terms(sig, ctx, res):
                out.append(Eq(App(n, tuple(ts)), r))
    # drop constant equations that repeat with swapped sides
    seen, uniq = set(), []
    for a in out:
        key = a
        if isinstance(a, Eq) and isinstance(a.left, App) and not a.left.args and isinstance(a.right, App) \
                and not a.right.args:
            key = Eq(*sorted((a.left, a.right), key=lambda t: t.fn))
        if key not in seen:
            seen.add(key)
            uniq.append(a)
    # atoms over the context variables alone come before those mentioning constants
    return sorted(uniq, key=lambda a: _mentions_constant(a))


def _mentions_constant(node) -> bool:
    from .logic import node_terms, subterms
    return any(isinstance(t, App) and not t.args for top in node_terms(node) for t in subterms(top))


class FormulaEnumerator:
    """Canonical-order enumeration, optionally deduplicated by a fingerprint."""

    def __init__(self, sig: Signature, classical: bool = False,
                 fingerprint: Optional[Callable] = None, max_per_level: int = 200_000):
        self.sig = sig
        self.classical = classical
        self.fingerprint = fingerprint
        self.max_per_level = max_per_level
        self._levels = {}   # (ctx, d) -> list of bodies of depth exactly d
        self._seen = {}     # ctx -> set of fingerprints

    def _make(self, ctx, body):
        cls = ClassicalFormula if self.classical else Formula
        return cls(ctx, body)

    def _admit(self, ctx, body, out):
        if self.fingerprint is not None:
            fp = self.fingerprint(self._make(ctx, body))
            seen = self._seen.setdefault(ctx, set())
            if fp in seen:
                return
            seen.add(fp)
        out.append(body)
        if len(out) > self.max_per_level:
            raise OverflowError("formula enumeration exceeded its per-level cap")

    def level(self, ctx: Context, d: int) -> list:
        key = (ctx, d)
        if key in self._levels:
            return self._levels[key]
        if d <= 0:
            return []
        # make sure shallower levels are registered first so dedup keeps the shallowest
        for k in range(1, d):
            self.level(ctx, k)
        out = []
        if d == 1:
            for a in atoms(self.sig, ctx):
                self._admit(ctx, a, out)
        else:
            lower = [b for k in range(1, d) for b in self.level(ctx, k)]
            top = set(range(len(lower) - len(self.level(ctx, d - 1)), len(lower)))
            for ctor in (And, Or):
                for i, j in itertools.combinations(range(len(lower)), 2):
                    if i in top or j in top:
                        self._admit(ctx, ctor(lower[i], lower[j]), out)
            for s in self.sig.sorts:
                y = fresh_name("y", set(ctx.names))
                inner = ctx.extend(y, s)
                for b in self.level(inner, d - 1):
                    if y in free_vars(b):
                        self._admit(ctx, Exists(y, s, b), out)
            if self.classical:
                for b in self.level(ctx, d - 1):
                    self._admit(ctx, Not(b), out)
        self._levels[key] = out
        return out

    def upto(self, ctx: Context, d: int) -> list:
        return [self._make(ctx, b) for k in range(1, d + 1) for b in self.level(ctx, k)]


def class_fingerprint(models) -> Callable:
    from .models import evaluate

    def fp(formula):
        return tuple(evaluate(M, formula).tuples for M in models)
    return fp


def standard_contexts(sig: Signature, max_vars: int = 2) -> list:
    """Contexts with up to ``max_vars`` variables, sorts in signature order (non-decreasing)."""
    out = [Context(())]
    for k in range(1, max_vars + 1):
        for combo in itertools.combinations_with_replacement(sig.sorts, k):
            out.append(Context(tuple((f"x{i}", s) for i, s in enumerate(combo))))
    return out


def formula_corpus(sig: Signature, models, d: int = 3, max_vars: int = 2, classical: bool = False) -> list:
    """Extension-distinct formulas of depth <= d over the standard contexts."""
    en = FormulaEnumerator(sig, classical, class_fingerprint(models))
    out = []
    for ctx in standard_contexts(sig, max_vars):
        out.extend(en.upto(ctx, d))
    return out
