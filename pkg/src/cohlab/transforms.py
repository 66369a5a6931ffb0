"""Theory-to-theory passes: Morleyization, diagrams, slices, pushouts, copowers, reducts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .logic import (
    And, App, Bot, ClassicalFormula, Context, Eq, Exists, Formula, FormulaError, Interpretation,
    Node, Not, Or, Rel, Sequent, Signature, TOP, Theory, Top, Var, conj, free_vars,
    is_coherent, rename_bound, substitute_node,
)
from .models import FiniteStructure, Homomorphism, StructureError, evaluate, is_model


def _unique(base: str, taken: set) -> str:
    if base not in taken:
        return base
    i = 1
    while f"{base}_{i}" in taken:
        i += 1
    return f"{base}_{i}"


# ---------------------------------------------------------------------------
# Renaming symbols and sorts

def rename_node(node: Node, sorts: Mapping, symbols: Mapping) -> Node:
    def term(t):
        if isinstance(t, Var):
            return t
        return App(symbols.get(t.fn, t.fn), tuple(term(a) for a in t.args))
    if isinstance(node, (Top, Bot)):
        return node
    if isinstance(node, Eq):
        return Eq(term(node.left), term(node.right))
    if isinstance(node, Rel):
        return Rel(symbols.get(node.name, node.name), tuple(term(a) for a in node.args))
    if isinstance(node, And):
        return And(rename_node(node.left, sorts, symbols), rename_node(node.right, sorts, symbols))
    if isinstance(node, Or):
        return Or(rename_node(node.left, sorts, symbols), rename_node(node.right, sorts, symbols))
    if isinstance(node, Not):
        return Not(rename_node(node.body, sorts, symbols))
    if isinstance(node, Exists):
        return Exists(node.var, sorts.get(node.sort, node.sort), rename_node(node.body, sorts, symbols))
    raise TypeError(node)


def rename_formula(f: Formula, sorts: Mapping, symbols: Mapping) -> Formula:
    ctx = Context(tuple((n, sorts.get(s, s)) for n, s in f.context.vars))
    return type(f)(ctx, rename_node(f.body, sorts, symbols))


def rename_sequent(seq: Sequent, sorts, symbols) -> Sequent:
    return Sequent(rename_formula(seq.lhs, sorts, symbols), rename_formula(seq.rhs, sorts, symbols))


def rename_signature(sig: Signature, sorts: Mapping, symbols: Mapping) -> Signature:
    return Signature(
        tuple(sorts.get(s, s) for s in sig.sorts),
        tuple((symbols.get(n, n), tuple(sorts.get(s, s) for s in a), sorts.get(r, r)) for n, a, r in sig.functions),
        tuple((symbols.get(n, n), tuple(sorts.get(s, s) for s in a)) for n, a in sig.relations),
    )


def rename_theory(theory: Theory, sorts: Mapping, symbols: Mapping, name: Optional[str] = None) -> Theory:
    return Theory(name or theory.name, rename_signature(theory.signature, sorts, symbols),
                  tuple(rename_sequent(a, sorts, symbols) for a in theory.axioms), theory.classical)


def suffix_maps(theory: Theory, suffix: str):
    sig = theory.signature
    return ({s: s + suffix for s in sig.sorts}, {n: n + suffix for n in sig.symbols()})


def rename_structure(M: FiniteStructure, sig: Signature, sorts: Mapping, symbols: Mapping) -> FiniteStructure:
    return FiniteStructure(sig, {sorts.get(s, s): n for s, n in M.sizes.items()},
                           {symbols.get(n, n): t for n, t in M.functions.items()},
                           {symbols.get(n, n): r for n, r in M.relations.items()})


# ---------------------------------------------------------------------------
# Morleyization

@dataclass
class MorleyizationResult:
    source: Theory
    theory: Theory
    symbols: dict = field(default_factory=dict)      # N name -> defining coherent Formula
    translation: dict = field(default_factory=dict)  # classical Formula -> coherent Formula
    _keys: dict = field(default_factory=dict, repr=False)

    def translate(self, formula: Formula) -> Formula:
        if formula in self.translation:
            return self.translation[formula]
        body = _translate(formula.body, dict(formula.context.vars), list(formula.context.names), self, create=False)
        out = Formula(formula.context, body)
        self.translation[formula] = out
        return out

    def translate_sequent(self, seq: Sequent) -> Sequent:
        return Sequent(self.translate(seq.lhs), self.translate(seq.rhs))

    def expand(self, M: FiniteStructure) -> FiniteStructure:
        """The unique expansion of an L-structure to a model of the Morleyized theory."""
        sig = self.theory.signature
        rels = dict(M.relations)
        for name, defn in self.symbols.items():
            rels[name] = frozenset()
        partial = FiniteStructure(sig, M.sizes, M.functions, rels)
        for name, defn in self.symbols.items():
            inside = evaluate(partial, defn).tuples
            everything = {t for t in _tuples(M, defn.context.sorts)}
            rels[name] = frozenset(everything - inside)
            partial = FiniteStructure(sig, M.sizes, M.functions, rels)
        return partial

    def reduct(self, M: FiniteStructure) -> FiniteStructure:
        return M.restrict_signature(self.source.signature)


def _tuples(M, sorts):
    import itertools
    return itertools.product(*[range(M.sizes[s]) for s in sorts])


def _symbol_for(node: Node, sorts: dict, order: list, result: MorleyizationResult, create: bool):
    """Relation symbol standing for the negation of the coherent ``node``; returns the atom."""
    if isinstance(node, Rel) and node.name in result.source.signature.relation_names:
        key = ("rel", node.name)
        if key not in result._keys:
            if not create:
                raise FormulaError(f"no complement symbol for {node.name}")
            arg_sorts = result.source.signature.rel(node.name)
            ctx = Context(tuple((f"x{i}", s) for i, s in enumerate(arg_sorts)))
            defn = Formula(ctx, Rel(node.name, tuple(Var(n) for n in ctx.names)))
            result._keys[key] = _register(result, f"N_{node.name}", defn)
        return Rel(result._keys[key], node.args)
    fv = [v for v in order if v in free_vars(node)]
    canon = {v: Var(f"x{i}") for i, v in enumerate(fv)}
    cbody = rename_bound(substitute_node(node, canon, [f"x{i}" for i in range(len(fv))]),
                         [f"x{i}" for i in range(len(fv))])
    ctx = Context(tuple((f"x{i}", sorts[v]) for i, v in enumerate(fv)))
    key = ("phi", ctx, cbody)
    if key not in result._keys:
        if not create:
            raise FormulaError(f"no complement symbol for {cbody}")
        idx = sum(1 for k in result._keys if k[0] == "phi")
        result._keys[key] = _register(result, f"N_phi{idx}", Formula(ctx, cbody))
    return Rel(result._keys[key], tuple(Var(v) for v in fv))


def _register(result: MorleyizationResult, base: str, defn: Formula) -> str:
    taken = result.theory.signature.symbols() | set(result.theory.signature.sorts)
    name = _unique(base, taken)
    sig = result.theory.signature.add(relations=[(name, defn.context.sorts)])
    ctx = defn.context
    atom = Rel(name, tuple(Var(n) for n in ctx.names))
    axioms = (Sequent(Formula(ctx, TOP), Formula(ctx, Or(defn.body, atom))),
              Sequent(Formula(ctx, And(defn.body, atom)), Formula(ctx, Bot())))
    result.theory = Theory(result.theory.name, sig, result.theory.axioms + axioms, False)
    result.symbols[name] = defn
    return name


def _translate(node: Node, sorts: dict, order: list, result, create: bool) -> Node:
    if isinstance(node, (Top, Bot, Eq, Rel)):
        return node
    if isinstance(node, And):
        return And(_translate(node.left, sorts, order, result, create),
                   _translate(node.right, sorts, order, result, create))
    if isinstance(node, Or):
        return Or(_translate(node.left, sorts, order, result, create),
                  _translate(node.right, sorts, order, result, create))
    if isinstance(node, Exists):
        return Exists(node.var, node.sort,
                      _translate(node.body, {**sorts, node.var: node.sort}, order + [node.var], result, create))
    if isinstance(node, Not):
        inner = _translate(node.body, sorts, order, result, create)
        return _symbol_for(inner, sorts, order, result, create)
    raise TypeError(node)


def morleyize(theory: Theory, formulas=()) -> MorleyizationResult:
    """Coherent theory with a complement symbol for each negated subformula that occurs.

    ``formulas`` lists further classical formulas whose negations should get symbols,
    so that ``translate`` can handle them afterwards.
    """
    out = Theory(theory.name + ("_morley" if theory.classical else ""), theory.signature, (), False)
    result = MorleyizationResult(theory, out)
    translated = []
    for ax in theory.axioms:
        lhs = _translate(ax.lhs.body, dict(ax.context.vars), list(ax.context.names), result, True)
        rhs = _translate(ax.rhs.body, dict(ax.context.vars), list(ax.context.names), result, True)
        translated.append(Sequent(Formula(ax.context, lhs), Formula(ax.context, rhs)))
    for f in formulas:
        body = _translate(f.body, dict(f.context.vars), list(f.context.names), result, True)
        result.translation[f] = Formula(f.context, body)
    result.theory = Theory(result.theory.name, result.theory.signature,
                           tuple(translated) + result.theory.axioms, False)
    return result


# ---------------------------------------------------------------------------
# Diagram

@dataclass
class DiagramTheory:
    base: Theory
    model: FiniteStructure
    theory: Theory
    constants: dict  # (sort, element) -> constant name

    def constant(self, sort, element) -> str:
        return self.constants[(sort, element)]

    def homomorphism(self, N: FiniteStructure) -> Homomorphism:
        """For a model of the diagram theory: the induced map from the base model."""
        base = N.restrict_signature(self.base.signature)
        maps = {s: [] for s in self.base.signature.sorts}
        for s in self.base.signature.sorts:
            for a in range(self.model.sizes[s]):
                maps[s].append(N.apply(self.constants[(s, a)]))
        return Homomorphism.from_dict(self.model, base, maps)


class NotAModel(ValueError):
    pass


def diagram_theory(theory: Theory, model: FiniteStructure) -> DiagramTheory:
    if not is_model(model, theory):
        raise NotAModel("structure is not a model of the theory")
    sig = theory.signature
    taken = sig.symbols() | set(sig.sorts)
    consts = {}
    for s in sig.sorts:
        for a in range(model.sizes[s]):
            base = f"c_{a}" if len(sig.sorts) == 1 else f"c_{s}_{a}"
            name = _unique(base, taken)
            taken.add(name)
            consts[(s, a)] = name
    new_sig = sig.add(functions=[(n, (), s) for (s, _), n in consts.items()])
    empty = Context(())
    axioms = []

    def c(s, a):
        return App(consts[(s, a)], ())

    for n, args, res in sig.functions:
        for a, v in sorted(model.functions[n].items()):
            lhs = App(n, tuple(c(s, x) for s, x in zip(args, a)))
            axioms.append(Sequent(Formula(empty, TOP), Formula(empty, Eq(lhs, c(res, v)))))
    for n, args in sig.relations:
        for t in sorted(model.relations[n]):
            axioms.append(Sequent(Formula(empty, TOP),
                                  Formula(empty, Rel(n, tuple(c(s, x) for s, x in zip(args, t))))))
    out = Theory(theory.name if not consts else theory.name + "_diag", new_sig,
                 theory.axioms + tuple(axioms), theory.classical)
    return DiagramTheory(theory, model, out, consts)


# ---------------------------------------------------------------------------
# Slice

@dataclass
class SliceTheory:
    base: Theory
    formula: Formula
    theory: Theory
    constants: tuple  # one constant name per context variable

    def element(self, N: FiniteStructure) -> tuple:
        return tuple(N.apply(c) for c in self.constants)


def slice_theory(theory: Theory, formula: Formula) -> SliceTheory:
    sig = theory.signature
    taken = sig.symbols() | set(sig.sorts)
    names = []
    for v, s in formula.context.vars:
        n = _unique(f"k_{v}", taken)
        taken.add(n)
        names.append(n)
    new_sig = sig.add(functions=[(n, (), s) for n, s in zip(names, formula.context.sorts)])
    body = substitute_node(formula.body, {v: App(n, ()) for v, n in zip(formula.context.names, names)})
    empty = Context(())
    ax = Sequent(Formula(empty, TOP), type(formula)(empty, body))
    return SliceTheory(theory, formula, Theory(theory.name + "_slice", new_sig, theory.axioms + (ax,),
                                               theory.classical), tuple(names))


# ---------------------------------------------------------------------------
# Pushout of interpretations

@dataclass
class PushoutTheory:
    theory: Theory
    left: Interpretation      # I : E -> F
    right: Interpretation     # J : E -> G (after renaming)
    right_renaming: tuple     # (sort map, symbol map) applied to G
    iso_symbols: dict         # E sort -> (i name, j name)

    def split(self, P: FiniteStructure):
        """Return (M, N, iso maps) from a model of the pushout theory."""
        F = self.left.target.signature
        G = self.right.target.signature
        M = P.restrict_signature(F)
        N = P.restrict_signature(G)
        iso = {a: tuple(P.apply(i, x) for x in range(P.sizes[self.left.sort_map[a]]))
               for a, (i, _) in self.iso_symbols.items()}
        return M, N, iso


class OverlapError(ValueError):
    pass


def _rename_interp_target(J: Interpretation, sorts, symbols, target: Theory) -> Interpretation:
    return Interpretation(J.source, target, {a: sorts.get(b, b) for a, b in J.sort_map.items()},
                          {n: rename_formula(f, sorts, symbols) for n, f in J.symbol_map.items()},
                          name=J.name)


def pushout(I: Interpretation, J: Interpretation, rename: bool = True) -> PushoutTheory:
    if I.source is not J.source and I.source != J.source:
        raise ValueError("interpretations must share their source theory")
    F, G = I.target, J.target
    fs, gs = F.signature, G.signature
    clash = (fs.symbols() | set(fs.sorts)) & (gs.symbols() | set(gs.sorts))
    sorts_map, sym_map = {}, {}
    if clash:
        if not rename:
            raise OverlapError(f"overlapping names: {sorted(clash)}")
        taken = fs.symbols() | set(fs.sorts) | gs.symbols() | set(gs.sorts)
        for s in gs.sorts:
            sorts_map[s] = _unique(s + "__2", taken) if s in clash or s in fs.symbols() else s
            taken.add(sorts_map[s])
        for n in sorted(gs.symbols()):
            sym_map[n] = _unique(n + "__2", taken) if n in clash else n
            taken.add(sym_map[n])
        G = rename_theory(G, sorts_map, sym_map, G.name + "__2")
        J = _rename_interp_target(J, sorts_map, sym_map, G)
    sig = F.signature.merge(G.signature)
    taken = sig.symbols() | set(sig.sorts)
    E = I.source
    iso = {}
    funcs = []
    for a in E.signature.sorts:
        i_name = _unique(f"i_{a}", taken)
        taken.add(i_name)
        j_name = _unique(f"j_{a}", taken)
        taken.add(j_name)
        iso[a] = (i_name, j_name)
        funcs.append((i_name, (I.sort_map[a],), J.sort_map[a]))
        funcs.append((j_name, (J.sort_map[a],), I.sort_map[a]))
    sig = sig.add(functions=funcs)
    axioms = list(F.axioms) + list(G.axioms)
    for a in E.signature.sorts:
        i_name, j_name = iso[a]
        cx = Context((("x", I.sort_map[a]),))
        cy = Context((("y", J.sort_map[a]),))
        axioms.append(Sequent(Formula(cx, TOP),
                              Formula(cx, Eq(App(j_name, (App(i_name, (Var("x"),)),)), Var("x")))))
        axioms.append(Sequent(Formula(cy, TOP),
                              Formula(cy, Eq(App(i_name, (App(j_name, (Var("y"),)),)), Var("y")))))

    def transport(src_img: Formula, dst_img: Formula, sorts, via):
        # src_img(x) |- dst_img(via(x)), in src_img's context
        ctx = src_img.context
        mapping = {d: App(iso[s][via], (Var(v),)) for d, v, s in zip(dst_img.context.names, ctx.names, sorts)}
        body = substitute_node(dst_img.body, mapping, ctx.names)
        body = rename_bound(body, ctx.names)
        return Sequent(src_img, type(dst_img)(ctx, body))

    for n, args, res in E.signature.functions:
        sorts = tuple(args) + (res,)
        fi, gj = I.symbol_map[n], J.symbol_map[n]
        axioms.append(transport(fi, gj, sorts, 0))
        axioms.append(transport(gj, fi, sorts, 1))
    for n, args in E.signature.relations:
        fi, gj = I.symbol_map[n], J.symbol_map[n]
        axioms.append(transport(fi, gj, tuple(args), 0))
        axioms.append(transport(gj, fi, tuple(args), 1))
    out = Theory(f"{F.name}_{G.name}_pushout", sig, tuple(axioms), F.classical or G.classical)
    return PushoutTheory(out, I, J, (sorts_map, sym_map), iso)


# ---------------------------------------------------------------------------
# Copower: pairs of models with a homomorphism between them

@dataclass
class CopowerTheory:
    base: Theory
    theory: Theory
    copies: tuple       # ((sort map, symbol map) for copy 0, same for copy 1)
    hom_symbols: dict   # sort -> h symbol

    def split(self, P: FiniteStructure):
        out = []
        for sorts, syms in self.copies:
            inv_s = {v: k for k, v in sorts.items()}
            inv_f = {v: k for k, v in syms.items()}
            part = P.restrict_signature(rename_signature(self.base.signature, sorts, syms))
            out.append(rename_structure(part, self.base.signature, inv_s, inv_f))
        M0, M1 = out
        maps = {s: tuple(P.apply(h, x) for x in range(M0.sizes[s])) for s, h in self.hom_symbols.items()}
        return M0, M1, Homomorphism.from_dict(M0, M1, maps)


def copower(theory: Theory) -> CopowerTheory:
    sig = theory.signature
    copies = []
    parts = []
    for k in (0, 1):
        sorts = {s: f"{s}__{k}" for s in sig.sorts}
        syms = {n: f"{n}__{k}" for n in sig.symbols()}
        copies.append((sorts, syms))
        parts.append(rename_theory(theory, sorts, syms))
    new_sig = parts[0].signature.merge(parts[1].signature)
    taken = new_sig.symbols() | set(new_sig.sorts)
    hom = {}
    for s in sig.sorts:
        hom[s] = _unique(f"h_{s}", taken)
        taken.add(hom[s])
    s0, s1 = copies[0][0], copies[1][0]
    new_sig = new_sig.add(functions=[(hom[s], (s0[s],), s1[s]) for s in sig.sorts])
    f0, f1 = copies[0][1], copies[1][1]
    axioms = list(parts[0].axioms) + list(parts[1].axioms)
    for n, args, res in sig.functions:
        ctx = Context(tuple((f"x{i}", s0[a]) for i, a in enumerate(args)))
        xs = tuple(Var(f"x{i}") for i in range(len(args)))
        lhs = App(hom[res], (App(f0[n], xs),))
        rhs = App(f1[n], tuple(App(hom[a], (x,)) for a, x in zip(args, xs)))
        axioms.append(Sequent(Formula(ctx, TOP), Formula(ctx, Eq(lhs, rhs))))
    for n, args in sig.relations:
        ctx = Context(tuple((f"x{i}", s0[a]) for i, a in enumerate(args)))
        xs = tuple(Var(f"x{i}") for i in range(len(args)))
        axioms.append(Sequent(Formula(ctx, Rel(f0[n], xs)),
                              Formula(ctx, Rel(f1[n], tuple(App(hom[a], (x,)) for a, x in zip(args, xs))))))
    out = Theory(theory.name + "_copower", new_sig, tuple(axioms), theory.classical)
    return CopowerTheory(theory, out, tuple(copies), hom)


# ---------------------------------------------------------------------------
# Reducts

class NotFunctional(StructureError):
    pass


def reduct(N: FiniteStructure, I: Interpretation) -> FiniteStructure:
    """Source-theory structure read off from a target model along ``I``."""
    src = I.source.signature
    sizes = {a: N.sizes[I.sort_map[a]] for a in src.sorts}
    funcs = {}
    for n, args, res in src.functions:
        graph = evaluate(N, I.symbol_map[n]).tuples
        table = {}
        for t in graph:
            key = t[:-1]
            if key in table and table[key] != t[-1]:
                raise NotFunctional(f"image of {n} is not single-valued at {key}")
            table[key] = t[-1]
        for key in _tuples(N, [I.sort_map[a] for a in args]):
            if key not in table:
                raise NotFunctional(f"image of {n} is not total at {key}")
        funcs[n] = table
    rels = {n: evaluate(N, I.symbol_map[n]).tuples for n, _ in src.relations}
    return FiniteStructure(src, sizes, funcs, rels)


def reduct_hom(h: Homomorphism, I: Interpretation, source: FiniteStructure = None,
               target: FiniteStructure = None) -> Homomorphism:
    src = source if source is not None else reduct(h.source, I)
    tgt = target if target is not None else reduct(h.target, I)
    d = dict(h.maps)
    return Homomorphism.from_dict(src, tgt, {a: d[I.sort_map[a]] for a in I.source.signature.sorts})
