"""Backtracking search for finite models of a theory at fixed carrier sizes.

Cells are the entries of function and relation tables.  Each ground instance
of an axiom is evaluated in three-valued (Kleene) logic over the partial
tables; an undecided instance watches one unassigned cell that blocks it and
is re-examined only when that cell is filled.  Simple unit propagation fills
cells forced by instances whose left side is already true.  Symmetry is cut
with the least-number heuristic: a branching cell only tries values up to one
past the largest element mentioned so far in the result sort.
"""

from __future__ import annotations

import itertools
from typing import Iterator, Mapping, Optional

from .logic import And, App, Bot, Eq, Exists, Not, Or, Rel, Theory, Top, Var
from .models import BoundExceeded, FiniteStructure


class _Blocked(Exception):
    pass


class _Engine:
    def __init__(self, theory: Theory, sizes: Mapping, max_nodes: int):
        self.theory = theory
        self.sig = sig = theory.signature
        self.sizes = dict(sizes)
        self.max_nodes = max_nodes
        self.nodes = 0
        cells = []          # (kind, symbol, args, arg sorts, result sort or None)
        sym_index = {}
        for i, (n, args, res) in enumerate(sig.functions):
            sym_index[n] = i
            for a in itertools.product(*[range(self.sizes[s]) for s in args]):
                cells.append(("f", n, a, args, res))
        base = len(sig.functions)
        for i, (n, args) in enumerate(sig.relations):
            sym_index[n] = base + i
            for a in itertools.product(*[range(self.sizes[s]) for s in args]):
                cells.append(("r", n, a, args, None))
        cells.sort(key=lambda c: (max(c[2], default=-1), sym_index[c[1]], c[2]))
        self.cells = cells
        self.cell_of = {n: {} for n in sym_index}
        for i, c in enumerate(cells):
            self.cell_of[c[1]][c[2]] = i
        self.val = [None] * len(cells)
        self.watch = {}
        self.trail = []
        self.mdn = {s: -1 for s in sig.sorts}
        self.queue = []
        self.blocker = None
        self._compile()

    # -- compilation of terms and formulas into closures over an env list --

    def _compile(self):
        self.instances = []
        self.compiled = []
        for ax in self.theory.axioms:
            slots = {n: i for i, n in enumerate(ax.context.names)}
            width = [len(slots)]
            lhs = self._node(ax.lhs.body, dict(slots), width)
            rhs = self._node(ax.rhs.body, dict(slots), width)
            ft = self._forcer(ax.rhs.body, dict(slots), width, True)
            ff = self._forcer(ax.lhs.body, dict(slots), width, False)
            k = len(self.compiled)
            self.compiled.append((lhs, rhs, ft, ff, width[0]))
            for env in itertools.product(*[range(self.sizes[s]) for s in ax.context.sorts]):
                self.instances.append((k, env))

    def _term(self, t, slots):
        if isinstance(t, Var):
            i = slots[t.name]
            return lambda env: env[i]
        table = self.cell_of[t.fn]
        val = self.val
        argfs = [self._term(a, slots) for a in t.args]
        eng = self

        if not argfs:
            c = table[()]

            def const(env):
                v = val[c]
                if v is None and eng.blocker is None:
                    eng.blocker = c
                return v
            return const

        def app(env):
            args = []
            for g in argfs:
                x = g(env)
                if x is None:
                    return None
                args.append(x)
            c = table[tuple(args)]
            v = val[c]
            if v is None and eng.blocker is None:
                eng.blocker = c
            return v
        return app

    def _term_cell(self, t, slots):
        """For an application term: env -> cell index once its arguments are known, else None."""
        table = self.cell_of[t.fn]
        argfs = [self._term(a, slots) for a in t.args]

        def cell(env):
            args = []
            for g in argfs:
                x = g(env)
                if x is None:
                    return None
                args.append(x)
            return table[tuple(args)]
        return cell

    def _node(self, node, slots, width):
        if isinstance(node, Top):
            return lambda env: True
        if isinstance(node, Bot):
            return lambda env: False
        if isinstance(node, Eq):
            l, r = self._term(node.left, slots), self._term(node.right, slots)

            def eq(env):
                a = l(env)
                b = r(env)
                if a is None or b is None:
                    return None
                return a == b
            return eq
        if isinstance(node, Rel):
            table = self.cell_of[node.name]
            argfs = [self._term(a, slots) for a in node.args]
            val = self.val
            eng = self

            def rel(env):
                args = []
                for g in argfs:
                    x = g(env)
                    if x is None:
                        return None
                    args.append(x)
                c = table[tuple(args)]
                v = val[c]
                if v is None:
                    if eng.blocker is None:
                        eng.blocker = c
                    return None
                return bool(v)
            return rel
        if isinstance(node, And):
            l, r = self._node(node.left, slots, width), self._node(node.right, slots, width)

            def conj(env):
                a = l(env)
                if a is False:
                    return False
                b = r(env)
                if b is False:
                    return False
                if a and b:
                    return True
                return None
            return conj
        if isinstance(node, Or):
            l, r = self._node(node.left, slots, width), self._node(node.right, slots, width)

            def disj(env):
                a = l(env)
                if a is True:
                    return True
                b = r(env)
                if b is True:
                    return True
                if a is False and b is False:
                    return False
                return None
            return disj
        if isinstance(node, Not):
            b = self._node(node.body, slots, width)

            def neg(env):
                v = b(env)
                return None if v is None else not v
            return neg
        if isinstance(node, Exists):
            slot = width[0]
            width[0] += 1
            inner = dict(slots)
            inner[node.var] = slot
            body = self._node(node.body, inner, width)
            size = self.sizes[node.sort]

            def ex(env):
                unknown = False
                for v in range(size):
                    env[slot] = v
                    r = body(env)
                    if r is True:
                        return True
                    if r is None:
                        unknown = True
                return None if unknown else False
            return ex
        raise TypeError(node)

    def _forcer(self, node, slots, width, polarity):
        """env -> list of (cell, value) that must hold for ``node`` to have ``polarity``."""
        if isinstance(node, Rel):
            table = self.cell_of[node.name]
            argfs = [self._term(a, slots) for a in node.args]
            val = self.val
            want = 1 if polarity else 0

            def f(env):
                args = []
                for g in argfs:
                    x = g(env)
                    if x is None:
                        return ()
                    args.append(x)
                c = table[tuple(args)]
                return ((c, want),) if val[c] is None else ()
            return f
        if isinstance(node, Eq) and polarity:
            sides = []
            for a, b in ((node.left, node.right), (node.right, node.left)):
                if isinstance(a, App):
                    sides.append((self._term_cell(a, slots), self._term(b, slots)))
            val = self.val

            def f(env):
                for cellf, other in sides:
                    c = cellf(env)
                    if c is None or val[c] is not None:
                        continue
                    v = other(env)
                    if v is not None:
                        return ((c, v),)
                return ()
            return f
        if isinstance(node, And) and polarity or isinstance(node, Or) and not polarity:
            l = self._forcer(node.left, slots, width, polarity)
            r = self._forcer(node.right, slots, width, polarity)
            return lambda env: tuple(l(env)) + tuple(r(env))
        if isinstance(node, (Or, And)):
            # one side decided against the polarity forces the other
            le, re_ = self._node(node.left, slots, width), self._node(node.right, slots, width)
            lf = self._forcer(node.left, slots, width, polarity)
            rf = self._forcer(node.right, slots, width, polarity)
            against = not polarity
            eng = self

            def f(env):
                saved = eng.blocker
                a = le(env)
                if a is against:
                    eng.blocker = saved
                    return rf(env)
                b = re_(env)
                eng.blocker = saved
                if b is against:
                    return lf(env)
                return ()
            return f
        if isinstance(node, Not):
            return self._forcer(node.body, slots, width, not polarity)
        return lambda env: ()

    # -- search state --

    def _examine(self, inst) -> bool:
        k, env0 = inst
        lhs, rhs, ft, ff, width = self.compiled[k]
        env = list(env0) + [0] * (width - len(env0))
        self.blocker = None
        l = lhs(env)
        if l is False:
            return True
        lb = self.blocker
        self.blocker = None
        r = rhs(env)
        if r is True:
            return True
        if l is True and r is False:
            return False
        w = lb if l is None else self.blocker
        if w is None:
            w = self.blocker if self.blocker is not None else lb
        self.watch.setdefault(w, []).append(inst)
        self.trail.append(("w", w))
        if l is True:
            self.queue.extend(ft(env))
        elif r is False:
            self.queue.extend(ff(env))
        return True

    def _designate(self, c, value):
        kind, _, args, arg_sorts, res = self.cells[c]
        changes = []
        for s, x in zip(arg_sorts, args):
            if x > self.mdn[s]:
                changes.append((s, self.mdn[s]))
                self.mdn[s] = x
        if kind == "f" and value > self.mdn[res]:
            changes.append((res, self.mdn[res]))
            self.mdn[res] = value
        if changes:
            self.trail.append(("m", changes))

    def _assign(self, c, value) -> bool:
        queue = self.queue
        queue.append((c, value))
        ok = True
        while queue:
            c, value = queue.pop()
            cur = self.val[c]
            if cur is not None:
                if cur != value:
                    ok = False
                    break
                continue
            self.val[c] = value
            self.trail.append(("v", c))
            self._designate(c, value)
            watchers = self.watch.pop(c, None)
            if watchers:
                self.trail.append(("p", c, watchers))
                for inst in watchers:
                    if not self._examine(inst):
                        ok = False
                        break
                if not ok:
                    break
        queue.clear()
        return ok

    def _undo(self, mark):
        trail = self.trail
        while len(trail) > mark:
            e = trail.pop()
            tag = e[0]
            if tag == "v":
                self.val[e[1]] = None
            elif tag == "w":
                lst = self.watch[e[1]]
                lst.pop()
                if not lst:
                    del self.watch[e[1]]
            elif tag == "p":
                self.watch[e[1]] = e[2]
            else:
                for s, old in reversed(e[1]):
                    self.mdn[s] = old

    def _structure(self) -> FiniteStructure:
        funcs = {n: {} for n in self.sig.function_names}
        rels = {n: [] for n in self.sig.relation_names}
        for (kind, n, args, _, _), v in zip(self.cells, self.val):
            if kind == "f":
                funcs[n][args] = v
            elif v:
                rels[n].append(args)
        return FiniteStructure(self.sig, self.sizes, funcs, rels)

    def run(self) -> Iterator[FiniteStructure]:
        for c in self.cells:
            if c[0] == "f" and self.sizes[c[4]] == 0:
                return
        for inst in self.instances:
            if not self._examine(inst):
                return
        queue, self.queue = self.queue, []
        for c, v in queue:
            if not self._assign(c, v):
                return
        yield from self._search(0)

    def _search(self, start) -> Iterator[FiniteStructure]:
        n = len(self.cells)
        c = start
        while c < n and self.val[c] is not None:
            c += 1
        if c == n:
            yield self._structure()
            return
        self.nodes += 1
        if self.nodes > self.max_nodes:
            raise BoundExceeded(f"model search exceeded {self.max_nodes} decisions at sizes {self.sizes}")
        kind, _, args, arg_sorts, res = self.cells[c]
        if kind == "r":
            values = (0, 1)
        else:
            top = self.mdn[res]
            for s, x in zip(arg_sorts, args):
                if s == res and x > top:
                    top = x
            values = range(min(self.sizes[res], top + 2))
        for v in values:
            mark = len(self.trail)
            if self._assign(c, v):
                yield from self._search(c + 1)
            self._undo(mark)


def search_sizes(theory: Theory, sizes: Mapping, max_nodes: int = 20_000_000) -> Iterator[FiniteStructure]:
    """Models with exactly the given carrier sizes (at least one per isomorphism class)."""
    yield from _Engine(theory, sizes, max_nodes).run()


def size_vectors(theory: Theory, bounds: Mapping) -> list:
    sorts = theory.signature.sorts
    vecs = list(itertools.product(*[range(bounds[s] + 1) for s in sorts]))
    vecs.sort(key=lambda v: (sum(v), v))
    return [dict(zip(sorts, v)) for v in vecs]


def search_models(theory: Theory, bounds: Mapping, max_nodes: int = 20_000_000) -> Iterator[FiniteStructure]:
    for sizes in size_vectors(theory, bounds):
        yield from search_sizes(theory, sizes, max_nodes)


def find_model(theory: Theory, bounds: Mapping, max_nodes: int = 2_000_000) -> Optional[FiniteStructure]:
    for M in search_models(theory, bounds, max_nodes):
        return M
    return None
