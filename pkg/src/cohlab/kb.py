"""Knuth-Bendix completion with a lexicographic path order.

Used by the prover for problems whose axioms are universally quantified
equations: if completion succeeds, equality of normal forms decides the
equational consequences.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .logic import App, Term, Var, subterms, term_vars


class CompletionFailed(Exception):
    pass


def lpo_gt(s: Term, t: Term, prec: dict, memo: Optional[dict] = None) -> bool:
    if memo is None:
        memo = {}
    key = (s, t)
    got = memo.get(key)
    if got is None:
        got = memo[key] = _lpo(s, t, prec, memo)
    return got


def _lpo(s: Term, t: Term, prec: dict, memo: dict) -> bool:
    if s == t:
        return False
    if isinstance(s, Var):
        return False
    if isinstance(t, Var):
        return t.name in term_vars(s)
    if any(a == t or lpo_gt(a, t, prec, memo) for a in s.args):
        return True
    ps, pt = prec[s.fn], prec[t.fn]
    if ps > pt:
        return all(lpo_gt(s, b, prec, memo) for b in t.args)
    if s.fn == t.fn:
        if not all(lpo_gt(s, b, prec, memo) for b in t.args):
            return False
        for a, b in zip(s.args, t.args):
            if a != b:
                return lpo_gt(a, b, prec, memo)
    return False


def match(pattern: Term, term: Term, sub: Optional[dict] = None) -> Optional[dict]:
    sub = {} if sub is None else sub
    if isinstance(pattern, Var):
        bound = sub.get(pattern.name)
        if bound is None:
            sub[pattern.name] = term
            return sub
        return sub if bound == term else None
    if not isinstance(term, App) or term.fn != pattern.fn or len(term.args) != len(pattern.args):
        return None
    for p, t in zip(pattern.args, term.args):
        if match(p, t, sub) is None:
            return None
    return sub


def apply(t: Term, sub: dict) -> Term:
    if isinstance(t, Var):
        v = sub.get(t.name)
        return t if v is None else v
    if not t.args:
        return t
    return App(t.fn, tuple(apply(a, sub) for a in t.args))


def unify(s: Term, t: Term, sub: Optional[dict] = None) -> Optional[dict]:
    sub = {} if sub is None else dict(sub)
    stack = [(s, t)]
    while stack:
        a, b = stack.pop()
        a, b = apply(a, sub), apply(b, sub)
        if a == b:
            continue
        if isinstance(a, Var) or isinstance(b, Var):
            v, other = (a, b) if isinstance(a, Var) else (b, a)
            if v.name in term_vars(other):
                return None
            sub = {k: apply(x, {v.name: other}) for k, x in sub.items()}
            sub[v.name] = other
            continue
        if a.fn != b.fn or len(a.args) != len(b.args):
            return None
        stack.extend(zip(a.args, b.args))
    return sub


@dataclass(frozen=True)
class Rule:
    lhs: Term
    rhs: Term

    def __str__(self):
        return f"{self.lhs} -> {self.rhs}"


def rewrite_once(t: Term, rules) -> Optional[Term]:
    if isinstance(t, App):
        for i, a in enumerate(t.args):
            r = rewrite_once(a, rules)
            if r is not None:
                return App(t.fn, t.args[:i] + (r,) + t.args[i + 1:])
    for rule in rules:
        sub = match(rule.lhs, t)
        if sub is not None:
            return apply(rule.rhs, sub)
    return None


def normalize(t: Term, rules, limit: int = 10_000) -> Term:
    for _ in range(limit):
        r = rewrite_once(t, rules)
        if r is None:
            return t
        t = r
    raise CompletionFailed("normalisation did not terminate")


def _rename(rule: Rule, suffix: str) -> Rule:
    names = term_vars(rule.lhs) | term_vars(rule.rhs)
    sub = {n: Var(n + suffix) for n in names}
    return Rule(apply(rule.lhs, sub), apply(rule.rhs, sub))


def _positions(t: Term, path=()):
    if isinstance(t, App):
        yield path, t
        for i, a in enumerate(t.args):
            yield from _positions(a, path + (i,))


def _replace(t: Term, path, new: Term) -> Term:
    if not path:
        return new
    i = path[0]
    return App(t.fn, t.args[:i] + (_replace(t.args[i], path[1:], new),) + t.args[i + 1:])


def critical_pairs(r1: Rule, r2: Rule) -> list:
    a = _rename(r1, "'1")
    b = _rename(r2, "'2")
    out = []
    for path, sub in _positions(a.lhs):
        if r1 is r2 and not path:
            continue
        s = unify(sub, b.lhs)
        if s is None:
            continue
        left = apply(a.rhs, s)
        right = apply(_replace(a.lhs, path, b.rhs), s)
        out.append((left, right))
    return out


def _canon_vars(s: Term, t: Term):
    names = []
    for x in itertools.chain(subterms(s), subterms(t)):
        if isinstance(x, Var) and x.name not in names:
            names.append(x.name)
    sub = {n: Var(f"v{i}") for i, n in enumerate(names)}
    return apply(s, sub), apply(t, sub)


def complete(equations, prec: dict, max_rules: int = 200, max_steps: int = 5000) -> list:
    """Huet-style completion; returns a convergent rule list or raises CompletionFailed."""
    pending = list(equations)
    rules = []
    steps = 0
    while pending:
        steps += 1
        if steps > max_steps:
            raise CompletionFailed("step bound reached")
        s, t = pending.pop(0)
        s, t = normalize(s, rules), normalize(t, rules)
        if s == t:
            continue
        if lpo_gt(s, t, prec):
            new = Rule(*_canon_vars(s, t))
        elif lpo_gt(t, s, prec):
            new = Rule(*_canon_vars(t, s))
        else:
            raise CompletionFailed(f"cannot orient {s} = {t}")
        kept = []
        for r in rules:
            if rewrite_once(r.lhs, [new]) is not None:
                pending.append((r.lhs, r.rhs))
            else:
                kept.append(Rule(r.lhs, normalize(r.rhs, kept + [new] + rules)))
        rules = kept + [new]
        if len(rules) > max_rules:
            raise CompletionFailed("rule bound reached")
        for r in rules:
            pending.extend(critical_pairs(new, r))
            if r is not new:
                pending.extend(critical_pairs(r, new))
    # final interreduction of right-hand sides
    return [Rule(r.lhs, normalize(r.rhs, rules)) for r in rules]


def precedence(signature, extra_constants=()) -> dict:
    """Unary symbols above higher arities above constants above the extra constants."""
    def cls(arity):
        return 3 if arity == 1 else 2 if arity >= 2 else 1
    order = []
    for idx, (n, args, _) in enumerate(signature.functions):
        order.append(((cls(len(args)), -idx), n))
    order.sort()
    prec = {n: i + len(extra_constants) + 1 for i, (_, n) in enumerate(order)}
    for i, c in enumerate(extra_constants):
        prec[c] = i + 1
    return prec

