"""Finite structures, definable sets, homomorphisms and model classes.

Elements of a sort ``S`` in a structure are the integers ``0 .. size(S)-1``.
Carriers may be empty.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
import tempfile
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional

from .logic import (
    And, App, Bot, Context, Eq, Exists, Formula, Node, Not, Or, Rel, Sequent,
    Signature, Theory, Top, Var, free_vars,
)


class StructureError(ValueError):
    pass


class BoundExceeded(RuntimeError):
    """Raised when a search hits its resource limit; results would be incomplete."""


def _product(ranges):
    return itertools.product(*[range(r) for r in ranges])


@dataclass(frozen=True, eq=False)
class FiniteStructure:
    signature: Signature
    sizes: Mapping
    functions: Mapping = field(default_factory=dict)
    relations: Mapping = field(default_factory=dict)

    def __post_init__(self):
        sig = self.signature
        sizes = {s: int(self.sizes.get(s, 0)) for s in sig.sorts}
        extra = set(self.sizes) - set(sig.sorts)
        if extra:
            raise StructureError(f"unknown sorts {sorted(extra)}")
        funcs = {}
        for name, args, res in sig.functions:
            table = self.functions.get(name)
            if table is None:
                table = {}
            elif callable(table) and not isinstance(table, Mapping):
                table = {a: table(*a) for a in _product([sizes[s] for s in args])}
            table = {tuple(k) if isinstance(k, (tuple, list)) else (k,): int(v) for k, v in dict(table).items()}
            for a in _product([sizes[s] for s in args]):
                if a not in table:
                    raise StructureError(f"function {name} undefined at {a}")
                if not 0 <= table[a] < sizes[res]:
                    raise StructureError(f"function {name} value {table[a]} outside carrier {res}")
            if len(table) != _count([sizes[s] for s in args]):
                raise StructureError(f"function {name} table has entries outside the carriers")
            funcs[name] = table
        rels = {}
        for name, args in sig.relations:
            rows = frozenset(tuple(t) if isinstance(t, (tuple, list)) else (t,)
                             for t in self.relations.get(name, ()))
            for t in rows:
                if len(t) != len(args) or any(not 0 <= x < sizes[s] for x, s in zip(t, args)):
                    raise StructureError(f"relation {name} tuple {t} not over its carriers")
            rels[name] = rows
        missing = (set(self.functions) - set(sig.function_names)) | (set(self.relations) - set(sig.relation_names))
        if missing:
            raise StructureError(f"unknown symbols {sorted(missing)}")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "functions", funcs)
        object.__setattr__(self, "relations", rels)
        object.__setattr__(self, "_memo", {})
        object.__setattr__(self, "_key", None)

    def key(self):
        if self._key is None:
            sig = self.signature
            k = (tuple(self.sizes[s] for s in sig.sorts),
                 tuple(tuple(self.functions[n][a] for a in _product([self.sizes[s] for s in args]))
                       for n, args, _ in sig.functions),
                 tuple(tuple(sorted(self.relations[n])) for n, _ in sig.relations))
            object.__setattr__(self, "_key", k)
        return self._key

    def __eq__(self, other):
        return isinstance(other, FiniteStructure) and self.signature == other.signature and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"FiniteStructure({dict(self.sizes)})"

    def carrier(self, sort: str) -> range:
        return range(self.sizes[sort])

    def elements(self) -> list:
        return [(s, a) for s in self.signature.sorts for a in range(self.sizes[s])]

    @property
    def total_size(self) -> int:
        return sum(self.sizes.values())

    def apply(self, fn: str, *args) -> int:
        return self.functions[fn][tuple(args)]

    def term_value(self, t, env: Mapping) -> int:
        if isinstance(t, Var):
            return env[t.name]
        return self.functions[t.fn][tuple(self.term_value(a, env) for a in t.args)]

    def relabel(self, perms: Mapping) -> "FiniteStructure":
        """Image of this structure under per-sort bijections ``perms[sort][old] = new``."""
        sig = self.signature
        p = {s: perms.get(s, tuple(range(self.sizes[s]))) for s in sig.sorts}
        funcs = {}
        for n, args, res in sig.functions:
            funcs[n] = {tuple(p[s][x] for s, x in zip(args, a)): p[res][v]
                        for a, v in self.functions[n].items()}
        rels = {n: {tuple(p[s][x] for s, x in zip(args, t)) for t in self.relations[n]}
                for n, args in sig.relations}
        return FiniteStructure(sig, dict(self.sizes), funcs, rels)

    def restrict_signature(self, sig: Signature) -> "FiniteStructure":
        return FiniteStructure(sig, {s: self.sizes[s] for s in sig.sorts},
                               {n: self.functions[n] for n in sig.function_names},
                               {n: self.relations[n] for n in sig.relation_names})

    def to_json(self) -> dict:
        sig = self.signature
        return {
            "sizes": {s: self.sizes[s] for s in sig.sorts},
            "functions": {n: [list(a) + [v] for a, v in sorted(self.functions[n].items())]
                          for n in sig.function_names},
            "relations": {n: [list(t) for t in sorted(self.relations[n])] for n in sig.relation_names},
        }

    @classmethod
    def from_json(cls, sig: Signature, data: Mapping) -> "FiniteStructure":
        funcs = {n: {tuple(row[:-1]): row[-1] for row in rows} for n, rows in data.get("functions", {}).items()}
        rels = {n: [tuple(r) for r in rows] for n, rows in data.get("relations", {}).items()}
        return cls(sig, data["sizes"], funcs, rels)


def _count(ranges) -> int:
    out = 1
    for r in ranges:
        out *= r
    return out


def empty_structure(sig: Signature) -> FiniteStructure:
    """All carriers empty; fails if the signature has constants."""
    return FiniteStructure(sig, {s: 0 for s in sig.sorts})


# ---------------------------------------------------------------------------
# Evaluation

@dataclass(frozen=True)
class DefinableSet:
    context: Context
    structure: FiniteStructure
    tuples: frozenset

    def __contains__(self, t):
        return tuple(t) in self.tuples

    def __len__(self):
        return len(self.tuples)

    def __iter__(self):
        return iter(sorted(self.tuples))

    def __le__(self, other):
        return self.tuples <= other.tuples


class SignatureMismatch(ValueError):
    pass


def _atom_rows(M: FiniteStructure, node: Node, fv: tuple, sorts: Mapping) -> frozenset:
    rows = set()
    ranges = [M.sizes[sorts[v]] for v in fv]
    for vals in _product(ranges):
        env = dict(zip(fv, vals))
        if isinstance(node, Eq):
            ok = M.term_value(node.left, env) == M.term_value(node.right, env)
        else:
            ok = tuple(M.term_value(a, env) for a in node.args) in M.relations[node.name]
        if ok:
            rows.add(vals)
    return frozenset(rows)


def _extend(M, vs, rows, target, sorts):
    """Re-express rows over variables ``vs`` as rows over the superset ``target``."""
    if vs == target:
        return rows
    missing = [v for v in target if v not in vs]
    pos = {v: i for i, v in enumerate(vs)}
    out = set()
    for extra in _product([M.sizes[sorts[v]] for v in missing]):
        env_extra = dict(zip(missing, extra))
        for r in rows:
            out.add(tuple(r[pos[v]] if v in pos else env_extra[v] for v in target))
    return frozenset(out)


def _join(lv, lrows, rv, rrows, target):
    shared = [v for v in lv if v in rv]
    lpos = {v: i for i, v in enumerate(lv)}
    rpos = {v: i for i, v in enumerate(rv)}
    index = {}
    for r in rrows:
        index.setdefault(tuple(r[rpos[v]] for v in shared), []).append(r)
    out = set()
    for l in lrows:
        for r in index.get(tuple(l[lpos[v]] for v in shared), ()):
            out.add(tuple(l[lpos[v]] if v in lpos else r[rpos[v]] for v in target))
    return frozenset(out)


def _ev(M: FiniteStructure, node: Node, sorts: Mapping) -> tuple:
    fv = tuple(sorted(free_vars(node)))
    key = (node, tuple(sorts[v] for v in fv))
    hit = M._memo.get(key)
    if hit is not None:
        return fv, hit
    if isinstance(node, Top):
        rows = frozenset({()})
    elif isinstance(node, Bot):
        rows = frozenset()
    elif isinstance(node, (Eq, Rel)):
        rows = _atom_rows(M, node, fv, sorts)
    elif isinstance(node, And):
        lv, lr = _ev(M, node.left, sorts)
        rv, rr = _ev(M, node.right, sorts)
        rows = _join(lv, lr, rv, rr, fv)
    elif isinstance(node, Or):
        lv, lr = _ev(M, node.left, sorts)
        rv, rr = _ev(M, node.right, sorts)
        rows = _extend(M, lv, lr, fv, sorts) | _extend(M, rv, rr, fv, sorts)
    elif isinstance(node, Exists):
        inner = {**sorts, node.var: node.sort}
        bv, br = _ev(M, node.body, inner)
        if node.var in bv:
            keep = [i for i, v in enumerate(bv) if v != node.var]
            rows = frozenset(tuple(r[i] for i in keep) for r in br)
        else:
            rows = br if M.sizes[node.sort] > 0 else frozenset()
    elif isinstance(node, Not):
        bv, br = _ev(M, node.body, sorts)
        rows = frozenset(_product([M.sizes[sorts[v]] for v in fv])) - br
    else:
        raise TypeError(node)
    M._memo[key] = rows
    return fv, rows


def evaluate(M: FiniteStructure, formula: Formula) -> DefinableSet:
    """The definable set of ``formula`` in ``M`` (tuples ordered as the context)."""
    for s in formula.context.sorts:
        if s not in M.sizes:
            raise SignatureMismatch(f"sort {s!r} not in structure")
    sorts = dict(formula.context.vars)
    try:
        vs, rows = _ev(M, formula.body, sorts)
    except KeyError as exc:
        raise SignatureMismatch(f"symbol or sort {exc} not in structure") from None
    rows = _extend(M, vs, rows, formula.context.names, sorts)
    return DefinableSet(formula.context, M, rows)


def holds(M: FiniteStructure, formula: Formula, values) -> bool:
    return tuple(values) in evaluate(M, formula).tuples


def satisfies(M: FiniteStructure, sequent: Sequent) -> bool:
    return evaluate(M, sequent.lhs).tuples <= evaluate(M, sequent.rhs).tuples


def violations(M: FiniteStructure, sequent: Sequent) -> list:
    return sorted(evaluate(M, sequent.lhs).tuples - evaluate(M, sequent.rhs).tuples)


def is_model(M: FiniteStructure, theory: Theory) -> bool:
    if M.signature != theory.signature:
        return False
    return all(satisfies(M, ax) for ax in theory.axioms)


# ---------------------------------------------------------------------------
# Homomorphisms

@dataclass(frozen=True)
class Homomorphism:
    source: FiniteStructure
    target: FiniteStructure
    maps: tuple  # ((sort, images), ...) in signature sort order

    @classmethod
    def from_dict(cls, source, target, maps: Mapping) -> "Homomorphism":
        sig = source.signature
        return cls(source, target, tuple((s, tuple(maps[s])) for s in sig.sorts))

    def __call__(self, sort: str, element: int) -> int:
        return dict(self.maps)[sort][element]

    def as_dict(self) -> dict:
        return {s: list(m) for s, m in self.maps}

    def map_tuple(self, sorts, values) -> tuple:
        d = dict(self.maps)
        return tuple(d[s][v] for s, v in zip(sorts, values))

    def compose(self, first: "Homomorphism") -> "Homomorphism":
        """self ∘ first."""
        d = dict(self.maps)
        return Homomorphism(first.source, self.target,
                            tuple((s, tuple(d[s][x] for x in m)) for s, m in first.maps))

    def inverse(self) -> "Homomorphism":
        out = []
        for s, m in self.maps:
            inv = [0] * len(m)
            for i, x in enumerate(m):
                inv[x] = i
            out.append((s, tuple(inv)))
        return Homomorphism(self.target, self.source, tuple(out))

    def is_identity(self) -> bool:
        return self.source == self.target and all(m == tuple(range(len(m))) for _, m in self.maps)

    def is_bijective(self) -> bool:
        return all(sorted(m) == list(range(self.target.sizes[s])) for s, m in self.maps)

    def to_json(self) -> dict:
        return self.as_dict()


def identity_hom(M: FiniteStructure) -> Homomorphism:
    return Homomorphism(M, M, tuple((s, tuple(range(M.sizes[s]))) for s in M.signature.sorts))


def is_homomorphism(M: FiniteStructure, N: FiniteStructure, maps: Mapping) -> bool:
    sig = M.signature
    for s in sig.sorts:
        m = maps[s]
        if len(m) != M.sizes[s] or any(not 0 <= x < N.sizes[s] for x in m):
            return False
    for n, args, res in sig.functions:
        for a, v in M.functions[n].items():
            if N.functions[n][tuple(maps[s][x] for s, x in zip(args, a))] != maps[res][v]:
                return False
    for n, args in sig.relations:
        rel = N.relations[n]
        for t in M.relations[n]:
            if tuple(maps[s][x] for s, x in zip(args, t)) not in rel:
                return False
    return True


def _hom_search(M: FiniteStructure, N: FiniteStructure, fixed: Optional[Mapping] = None,
                injective: bool = False) -> Iterator[dict]:
    sig = M.signature
    order = M.elements()
    pos = {e: i for i, e in enumerate(order)}
    checks = [[] for _ in order]    # constraints verified when position p is assigned
    definer = [None] * len(order)   # (fn, arg positions) forcing the image at p
    for n, args, res in sig.functions:
        for a, v in M.functions[n].items():
            ps = [pos[(s, x)] for s, x in zip(args, a)]
            vp = pos[(res, v)]
            last = max(ps + [vp])
            checks[last].append(("f", n, ps, vp))
            if definer[vp] is None and all(p < vp for p in ps):
                definer[vp] = (n, ps)
    for n, args in sig.relations:
        for t in M.relations[n]:
            ps = [pos[(s, x)] for s, x in zip(args, t)]
            if ps:
                checks[max(ps)].append(("r", n, ps, None))
            elif t not in N.relations[n]:
                return
    fixed = fixed or {}
    img = [None] * len(order)
    used = {s: set() for s in sig.sorts}

    def candidates(p):
        s, x = order[p]
        if (s, x) in fixed:
            return [fixed[(s, x)]]
        d = definer[p]
        if d is not None:
            n, ps = d
            return [N.functions[n][tuple(img[q] for q in ps)]]
        return range(N.sizes[s])

    def ok(p):
        for kind, n, ps, vp in checks[p]:
            if kind == "f":
                if N.functions[n][tuple(img[q] for q in ps)] != img[vp]:
                    return False
            elif tuple(img[q] for q in ps) not in N.relations[n]:
                return False
        return True

    def rec(p):
        if p == len(order):
            out = {s: [] for s in sig.sorts}
            for (s, _), v in zip(order, img):
                out[s].append(v)
            yield {s: tuple(v) for s, v in out.items()}
            return
        s = order[p][0]
        for v in candidates(p):
            if injective and v in used[s]:
                continue
            img[p] = v
            if ok(p):
                if injective:
                    used[s].add(v)
                yield from rec(p + 1)
                if injective:
                    used[s].discard(v)
        img[p] = None

    yield from rec(0)


def enumerate_homs(M: FiniteStructure, N: FiniteStructure, fixed: Optional[Mapping] = None) -> list:
    """All homomorphisms M -> N (optionally with some element images fixed)."""
    if M.signature != N.signature:
        raise SignatureMismatch("structures over different signatures")
    return [Homomorphism.from_dict(M, N, m) for m in _hom_search(M, N, fixed)]


def enumerate_isos(M: FiniteStructure, N: FiniteStructure) -> list:
    if M.signature != N.signature:
        raise SignatureMismatch("structures over different signatures")
    if M.sizes != N.sizes:
        return []
    if any(len(M.relations[n]) != len(N.relations[n]) for n in M.signature.relation_names):
        return []
    return [Homomorphism.from_dict(M, N, m) for m in _hom_search(M, N, injective=True)]


def automorphisms(M: FiniteStructure) -> list:
    return enumerate_isos(M, M)


def count_homs(M, N) -> int:
    return sum(1 for _ in _hom_search(M, N))


# ---------------------------------------------------------------------------
# Canonical forms: colour refinement, then individualisation over the
# remaining ambiguity, keeping the least serialisation.

def _refine(M: FiniteStructure, colors: dict) -> dict:
    sig = M.signature
    edges = []
    for n, args, res in sig.functions:
        for a, v in M.functions[n].items():
            edges.append((n, tuple(zip(args, a)) + ((res, v),)))
    for n, args in sig.relations:
        for t in M.relations[n]:
            edges.append((n, tuple(zip(args, t))))
    while True:
        sigs = {e: [] for e in colors}
        for n, parts in edges:
            pc = tuple(colors[p] for p in parts)
            for i, p in enumerate(parts):
                sigs[p].append((n, i, pc))
        new_keys = {e: (colors[e], tuple(sorted(sigs[e]))) for e in colors}
        ranking = {k: i for i, k in enumerate(sorted(set(new_keys.values())))}
        new = {e: ranking[new_keys[e]] for e in colors}
        if len(set(new.values())) == len(set(colors.values())):
            return new
        colors = new


def _serialize(M: FiniteStructure, perm: dict) -> tuple:
    sig = M.signature
    inv = {s: [0] * M.sizes[s] for s in sig.sorts}
    for s in sig.sorts:
        for old, new in enumerate(perm[s]):
            inv[s][new] = old
    fpart = []
    for n, args, res in sig.functions:
        table = M.functions[n]
        fpart.append(tuple(perm[res][table[tuple(inv[s][x] for s, x in zip(args, a))]]
                           for a in _product([M.sizes[s] for s in args])))
    rpart = []
    for n, args in sig.relations:
        rpart.append(tuple(sorted(tuple(perm[s][x] for s, x in zip(args, t)) for t in M.relations[n])))
    return (tuple(M.sizes[s] for s in sig.sorts), tuple(fpart), tuple(rpart))


def _canonical(M: FiniteStructure):
    sig = M.signature
    sort_index = {s: i for i, s in enumerate(sig.sorts)}
    colors = {e: sort_index[e[0]] for e in M.elements()}
    best = [None, None]

    def leaf(colors):
        perm = {s: [0] * M.sizes[s] for s in sig.sorts}
        for s in sig.sorts:
            elems = sorted(range(M.sizes[s]), key=lambda x: colors[(s, x)])
            for new, old in enumerate(elems):
                perm[s][old] = new
        ser = _serialize(M, perm)
        if best[0] is None or ser < best[0]:
            best[0], best[1] = ser, perm

    def search(colors):
        colors = _refine(M, colors)
        cells = {}
        for e, c in colors.items():
            cells.setdefault(c, []).append(e)
        target = None
        for c in sorted(cells):
            if len(cells[c]) > 1:
                target = c
                break
        if target is None:
            leaf(colors)
            return
        # individualise: the chosen element gets a colour just below its cell
        for e in sorted(cells[target]):
            nc = {k: 2 * v + (1 if v >= target else 0) for k, v in colors.items()}
            nc[e] = 2 * target
            search(nc)

    search(colors)
    return best[0], best[1]


def canonical_form(M: FiniteStructure) -> bytes:
    ser, _ = _canonical(M)
    return repr(ser).encode()


def canonical_structure(M: FiniteStructure) -> FiniteStructure:
    """The isomorphic copy of M whose labelling realises its canonical form."""
    _, perm = _canonical(M)
    return M.relabel({s: tuple(p) for s, p in perm.items()})


def canonical_relabelling(M: FiniteStructure) -> dict:
    _, perm = _canonical(M)
    return {s: tuple(p) for s, p in perm.items()}


# ---------------------------------------------------------------------------
# Model classes

CACHE_VERSION = 1


def theory_digest(theory: Theory) -> str:
    from .dsl import format_theory
    return hashlib.sha256(format_theory(theory).encode()).hexdigest()


@dataclass(eq=False)
class ModelClass:
    theory: Theory
    n: object
    models: list
    forms: list

    def __post_init__(self):
        self._homs = {}
        self._isos = {}
        self._index = {f: i for i, f in enumerate(self.forms)}

    def __len__(self):
        return len(self.models)

    def __iter__(self):
        return iter(self.models)

    def __getitem__(self, i):
        return self.models[i]

    def homs(self, i: int, j: int) -> list:
        if (i, j) not in self._homs:
            self._homs[(i, j)] = enumerate_homs(self.models[i], self.models[j])
        return self._homs[(i, j)]

    def isos(self, i: int, j: int) -> list:
        if (i, j) not in self._isos:
            self._isos[(i, j)] = enumerate_isos(self.models[i], self.models[j])
        return self._isos[(i, j)]

    def automorphisms(self, i: int) -> list:
        return self.isos(i, i)

    def index_of(self, M: FiniteStructure) -> Optional[int]:
        return self._index.get(canonical_form(M))

    def to_json(self) -> dict:
        from .dsl import format_theory
        return {
            "version": CACHE_VERSION,
            "theory": format_theory(self.theory),
            "n": self.n,
            "models": [m.to_json() for m in self.models],
            "canonical_forms": [f.decode() for f in self.forms],
        }


def _size_bounds(theory: Theory, n) -> dict:
    if isinstance(n, Mapping):
        return {s: int(n.get(s, 0)) for s in theory.signature.sorts}
    return {s: int(n) for s in theory.signature.sorts}


def _cache_path(cache_dir, theory, n) -> str:
    key = json.dumps(n, sort_keys=True) if isinstance(n, Mapping) else str(n)
    digest = hashlib.sha256((theory_digest(theory) + "|" + key).encode()).hexdigest()
    return os.path.join(cache_dir, f"models-{digest[:32]}.json")


def _atomic_write(path: str, text: str):
    d = os.path.dirname(path) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def classify(structures: Iterable[FiniteStructure]) -> tuple:
    """Deduplicate up to isomorphism; return (models, forms) in canonical order."""
    seen = {}
    for M in structures:
        form, perm = _canonical(M)
        key = repr(form).encode()
        if key not in seen:
            seen[key] = M.relabel({s: tuple(p) for s, p in perm.items()})
    order = sorted(seen, key=lambda f: (seen[f].total_size, f))
    return [seen[f] for f in order], order


def enumerate_models(theory: Theory, n, cache_dir: Optional[str] = None,
                     max_nodes: int = 20_000_000) -> ModelClass:
    """All models with every carrier at most ``n`` (an int or per-sort mapping), up to isomorphism.

    Raises BoundExceeded when the search exceeds ``max_nodes`` decisions.
    """
    from .mace import search_models
    if cache_dir:
        path = _cache_path(cache_dir, theory, n)
        if os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
            if data.get("version") == CACHE_VERSION:
                models = [FiniteStructure.from_json(theory.signature, m) for m in data["models"]]
                forms = [f.encode() for f in data["canonical_forms"]]
                return ModelClass(theory, n, models, forms)
    bounds = _size_bounds(theory, n)
    models, forms = classify(search_models(theory, bounds, max_nodes=max_nodes))
    mc = ModelClass(theory, n, models, forms)
    if cache_dir:
        _atomic_write(path, json.dumps(mc.to_json(), sort_keys=True))
    return mc
