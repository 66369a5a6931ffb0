"""Definable automorphisms and interpretation diagnostics over finite model classes.

Every obligation is first handed to the prover.  When the prover gives up, the
obligation is checked on the enumerated class instead and tagged
``bound-validated only``: a necessary condition, not a proof.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .formulas import FormulaEnumerator, class_fingerprint, standard_contexts
from .logic import (
    And, App, Context, Eq, Exists, Formula, Interpretation, Or, Rel, Sequent, Theory, TOP, BOT, Var,
    conj, fresh_name, rename_bound, substitute_node,
)
from .models import (
    FiniteStructure, Homomorphism, ModelClass, automorphisms, canonical_form, enumerate_homs,
    enumerate_models, evaluate, holds, satisfies,
)
from .prover import Bounds, entails_on_class, prove, refute_on_class

PROVED = "proved"
BOUND = "bound-validated only"
FAILED = "fail"


@dataclass(frozen=True)
class Obligation:
    schema: str
    symbol: str
    sequent: Sequent
    status: str          # proved | bound-validated only | fail
    method: str = ""
    witness: object = None

    def to_json(self) -> dict:
        from .dsl import format_sequent
        out = {"schema": self.schema, "symbol": self.symbol, "sequent": format_sequent(self.sequent),
               "status": self.status, "method": self.method}
        if self.witness is not None:
            out["witness"] = _jsonable(self.witness)
        return out


def _jsonable(obj):
    if isinstance(obj, FiniteStructure):
        return obj.to_json()
    if isinstance(obj, Homomorphism):
        return obj.to_json()
    if isinstance(obj, Formula):
        return str(obj)
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def discharge(theory: Theory, sequent: Sequent, bounds: Bounds, model_class=None,
              schema: str = "", symbol: str = "") -> Obligation:
    outcome = prove(theory, sequent, bounds)
    if outcome.status == "proved":
        return Obligation(schema, symbol, sequent, PROVED, outcome.method)
    if outcome.status == "countermodel":
        return Obligation(schema, symbol, sequent, FAILED, outcome.method,
                          {"model": outcome.structure, "values": outcome.witness})
    if model_class is not None:
        bad = refute_on_class(model_class, sequent)
        if bad is None:
            return Obligation(schema, symbol, sequent, BOUND, "class")
        return Obligation(schema, symbol, sequent, FAILED, "class", {"model": bad[1]})
    return Obligation(schema, symbol, sequent, "unknown", outcome.reason)


# ---------------------------------------------------------------------------
# Definable automorphisms

@dataclass(frozen=True)
class DefinableAutomorphismCandidate:
    """sigma[B] is a formula in context [y:B, y2:B] followed by the parameters."""
    params: Context
    sigma: Mapping
    anchor: Optional[tuple] = None   # (model, parameter values)

    def __post_init__(self):
        object.__setattr__(self, "sigma", dict(self.sigma))
        for s, f in self.sigma.items():
            if f.context.sorts[:2] != (s, s) or f.context.vars[2:] != self.params.vars:
                raise ValueError(f"formula for sort {s} must have context [y:{s}, y2:{s}] + parameters")

    def instance(self, sort: str, left, right, params=None) -> "object":
        """sigma_sort(left, right, params) as a body; the arguments are terms."""
        f = self.sigma[sort]
        names = f.context.names
        args = [left, right] + list(params if params is not None else [Var(n) for n in self.params.names])
        return substitute_node(f.body, dict(zip(names, args)), set())

    def graph(self, M: FiniteStructure, sort: str, values) -> set:
        ext = evaluate(M, self.sigma[sort]).tuples
        values = tuple(values)
        return {(b, c) for (b, c, *rest) in ext if tuple(rest) == values}


def _sequent(ctx_vars, lhs, rhs) -> Sequent:
    ctx = Context(tuple(ctx_vars))
    lhs = rename_bound(lhs, ctx.names)
    rhs = rename_bound(rhs, ctx.names)
    return Sequent.of(ctx, lhs, rhs)


def automorphism_sequents(theory: Theory, cand: DefinableAutomorphismCandidate) -> list:
    """The six schemas, instantiated per sort and symbol: (schema, symbol, sequent)."""
    sig = theory.signature
    P = list(cand.params.vars)
    taken = set(cand.params.names)

    def fresh(base):
        n = fresh_name(base, taken)
        taken.add(n)
        return n

    out = []
    for s in sig.sorts:
        if s not in cand.sigma:
            continue
        y, y1, y2 = fresh("y"), fresh("u"), fresh("v")
        out.append(("total", s, _sequent(P + [(y, s)], TOP, Exists(y1, s, cand.instance(s, Var(y), Var(y1))))))
        out.append(("surjective", s, _sequent(P + [(y, s)], TOP, Exists(y1, s, cand.instance(s, Var(y1), Var(y))))))
        out.append(("single-valued", s, _sequent(
            P + [(y, s), (y1, s), (y2, s)],
            And(cand.instance(s, Var(y), Var(y1)), cand.instance(s, Var(y), Var(y2))), Eq(Var(y1), Var(y2)))))
        out.append(("injective", s, _sequent(
            P + [(y, s), (y1, s), (y2, s)],
            And(cand.instance(s, Var(y1), Var(y)), cand.instance(s, Var(y2), Var(y))), Eq(Var(y1), Var(y2)))))
        for v in (y, y1, y2):
            taken.discard(v)
    for n, args in sig.relations:
        xs = [fresh("a") for _ in args]
        ys = [fresh("b") for _ in args]
        link = conj(*[cand.instance(s, Var(a), Var(b)) for a, b, s in zip(xs, ys, args)])
        ctx = P + list(zip(xs, args)) + list(zip(ys, args))
        R = Rel(n, tuple(Var(a) for a in xs))
        R2 = Rel(n, tuple(Var(b) for b in ys))
        out.append(("preserves", n, _sequent(ctx, And(R, link) if args else R, R2)))
        out.append(("reflects", n, _sequent(ctx, And(R2, link) if args else R2, R)))
        for v in xs + ys:
            taken.discard(v)
    for n, args, res in sig.functions:
        xs = [fresh("a") for _ in args]
        ys = [fresh("b") for _ in args]
        link = conj(*[cand.instance(s, Var(a), Var(b)) for a, b, s in zip(xs, ys, args)])
        ctx = P + list(zip(xs, args)) + list(zip(ys, args))
        rhs = cand.instance(res, App(n, tuple(Var(a) for a in xs)), App(n, tuple(Var(b) for b in ys)))
        out.append(("natural", n, _sequent(ctx, link, rhs)))
        for v in xs + ys:
            taken.discard(v)
    return out


@dataclass(frozen=True)
class AutomorphismReport:
    obligations: tuple

    @property
    def ok(self) -> bool:
        return all(o.status in (PROVED, BOUND) for o in self.obligations)

    @property
    def provenance(self) -> str:
        if not self.ok:
            return FAILED
        return PROVED if all(o.status == PROVED for o in self.obligations) else BOUND

    def to_json(self) -> dict:
        return {"ok": self.ok, "provenance": self.provenance,
                "obligations": [o.to_json() for o in self.obligations]}


def check_definable_automorphism(theory: Theory, cand: DefinableAutomorphismCandidate,
                                 bounds: Optional[Bounds] = None, model_class=None) -> AutomorphismReport:
    bounds = bounds or Bounds()
    obs = [discharge(theory, seq, bounds, model_class, schema, sym)
           for schema, sym, seq in automorphism_sequents(theory, cand)]
    return AutomorphismReport(tuple(obs))


def candidate_from_text(theory: Theory, params: str, sigma: Mapping) -> DefinableAutomorphismCandidate:
    """``params`` like "x:G"; ``sigma`` maps each sort to a body over y, y2 and the parameters."""
    from .dsl import parse_context, parse_formula
    pctx = parse_context(params, theory.signature) if params.strip() else Context(())
    forms = {}
    for s, body in sigma.items():
        ctx = Context((("y", s), ("y2", s)) + pctx.vars)
        forms[s] = parse_formula(body, theory.signature, ctx)
    return DefinableAutomorphismCandidate(pctx, forms)


# ---------------------------------------------------------------------------
# Isotropy at a model

@dataclass(frozen=True)
class StalkEntry:
    automorphism: Homomorphism
    status: str                 # M-definable | parameter-definable only | not found at bound
    candidate: Optional[DefinableAutomorphismCandidate] = None
    parameter: tuple = ()

    def to_json(self) -> dict:
        out = {"automorphism": self.automorphism.to_json(), "status": self.status,
               "parameter": list(self.parameter)}
        if self.candidate is not None:
            out["sigma"] = {s: str(f) for s, f in sorted(self.candidate.sigma.items())}
        return out


def _permutation_graph(alpha: Homomorphism, sort: str) -> set:
    return {(b, alpha(sort, b)) for b in range(alpha.source.sizes[sort])}


def _defines_on(cand, N: FiniteStructure, values) -> Optional[Homomorphism]:
    """The automorphism of N defined by cand at the parameter values, if any."""
    maps = {}
    for s in N.signature.sorts:
        g = cand.graph(N, s, values)
        img = dict(g)
        if len(img) != len(g) or set(img) != set(range(N.sizes[s])) or set(img.values()) != set(img):
            return None
        maps[s] = tuple(img[b] for b in range(N.sizes[s]))
    from .models import is_homomorphism
    if not is_homomorphism(N, N, maps):
        return None
    h = Homomorphism.from_dict(N, N, maps)
    inv = h.inverse()
    return h if is_homomorphism(N, N, dict(inv.maps)) else None


def is_m_definable(cand, M: FiniteStructure, values, alpha: Homomorphism, model_class) -> bool:
    """For every hom h: M -> N in the class, sigma at h(a) is an automorphism of N commuting with h."""
    for N in model_class:
        for h in enumerate_homs(M, N):
            hv = h.map_tuple(cand.params.sorts, values)
            beta = _defines_on(cand, N, hv)
            if beta is None:
                return False
            if any(beta(s, h(s, b)) != h(s, alpha(s, b)) for s in M.signature.sorts for b in range(M.sizes[s])):
                return False
    return True


def isotropy_at_model(theory: Theory, M: FiniteStructure, depth: int = 2, budget: int = 1,
                      model_class=None) -> list:
    if model_class is None:
        model_class = enumerate_models(theory, max(M.sizes.values(), default=0))
    sig = theory.signature
    sorts = [s for s in sig.sorts]
    # per parameter context: per sort, candidate sigma formulas with their extensions on M
    param_contexts = [Context(())]
    for k in range(1, budget + 1):
        for combo in itertools.combinations_with_replacement(sorts, k):
            param_contexts.append(Context(tuple((f"z{i}", s) for i, s in enumerate(combo))))
    fp = class_fingerprint(list(model_class) + [M])
    pools = {}
    for pctx in param_contexts:
        for s in sorts:
            ctx = Context((("y", s), ("y2", s)) + pctx.vars)
            en = FormulaEnumerator(sig, False, fp)
            pools[(pctx, s)] = [Formula(ctx, b) for d in range(1, depth + 1) for b in en.level(ctx, d)]
    out = []
    for alpha in automorphisms(M):
        graphs = {s: _permutation_graph(alpha, s) for s in sorts}
        found = None
        param_only = None
        for pctx in param_contexts:
            for values in itertools.product(*[range(M.sizes[s]) for s in pctx.sorts]):
                per_sort = {}
                for s in sorts:
                    hits = [f for f in pools[(pctx, s)]
                            if {(b, c) for (b, c, *r) in evaluate(M, f).tuples if tuple(r) == values} == graphs[s]]
                    if not hits:
                        break
                    per_sort[s] = hits
                else:
                    for choice in itertools.product(*[per_sort[s] for s in sorts]):
                        cand = DefinableAutomorphismCandidate(pctx, dict(zip(sorts, choice)), (M, values))
                        if is_m_definable(cand, M, values, alpha, model_class):
                            found = (cand, values)
                            break
                        if param_only is None:
                            param_only = (cand, values)
                if found:
                    break
            if found:
                break
        if found:
            out.append(StalkEntry(alpha, "M-definable", found[0], tuple(found[1])))
        elif param_only:
            out.append(StalkEntry(alpha, "parameter-definable only", param_only[0], tuple(param_only[1])))
        else:
            out.append(StalkEntry(alpha, "not found at bound"))
    return out


def check_normality(M: FiniteStructure, entries) -> tuple:
    """Conjugating an M-definable automorphism by any beta is defined by the same formula at beta(a).

    The formula at beta(a) defines beta . alpha . beta^-1.  Returns (ok, failures).
    """
    defined = [e for e in entries if e.status == "M-definable"]
    perms = {e.automorphism.maps for e in defined}
    failures = []
    for beta in automorphisms(M):
        for e in defined:
            moved = beta.map_tuple(e.candidate.params.sorts, e.parameter)
            gamma = _defines_on(e.candidate, M, moved)
            expect = beta.compose(e.automorphism).compose(beta.inverse())
            if gamma is None or gamma.maps != expect.maps or gamma.maps not in perms:
                failures.append({"beta": beta, "alpha": e.automorphism})
    return not failures, failures


def check_group_closure(M: FiniteStructure, entries) -> bool:
    perms = {e.automorphism.maps: e.automorphism for e in entries if e.status == "M-definable"}
    for a in perms.values():
        if a.inverse().maps not in perms:
            return False
        for b in perms.values():
            if a.compose(b).maps not in perms:
                return False
    return True


# ---------------------------------------------------------------------------
# Interpretation diagnostics

@dataclass(frozen=True)
class RowVerdict:
    row: str
    verdict: str                 # pass | fail
    witness: object = None
    checked: int = 0

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> dict:
        out = {"row": self.row, "verdict": self.verdict, "checked": self.checked}
        if self.witness is not None:
            out["witness"] = _jsonable(self.witness)
        return out


@dataclass
class Setting:
    """Shared enumeration for one interpretation at fixed bounds."""
    interp: Interpretation
    n: int = 3
    depth: int = 2
    source_class: ModelClass = None
    target_class: ModelClass = None
    reducts: list = None

    def __post_init__(self):
        from .transforms import reduct
        if self.source_class is None:
            self.source_class = enumerate_models(self.interp.source, self.n)
        if self.target_class is None:
            self.target_class = enumerate_models(self.interp.target, self.n)
        if self.reducts is None:
            self.reducts = [reduct(N, self.interp) for N in self.target_class]


def _one_var_formulas(sig, sort, depth, models):
    ctx = Context((("x", sort),))
    en = FormulaEnumerator(sig, False, class_fingerprint(models) if models else None)
    return [Formula(ctx, b) for d in range(1, depth + 1) for b in en.level(ctx, d)]


def _source_formulas(st: Setting) -> dict:
    sig = st.interp.source.signature
    models = list(st.source_class) + st.reducts
    return {s: _one_var_formulas(sig, s, st.depth, models) for s in sig.sorts}


def _target_formulas(st: Setting) -> list:
    """Target formulas in contexts of length <= 1 over sorts in the image of I."""
    sig = st.interp.target.signature
    models = list(st.target_class)
    out = []
    en = FormulaEnumerator(sig, False, class_fingerprint(models) if models else None)
    out += [Formula(Context(()), b) for d in range(1, st.depth + 1) for b in en.level(Context(()), d)]
    for a in st.interp.source.signature.sorts:
        out += [(a, f) for f in _one_var_formulas(sig, st.interp.sort_map[a], st.depth, models)]
    return [(None, f) if isinstance(f, Formula) else f for f in out]


def check_supercovering(st: Setting) -> RowVerdict:
    forms = _source_formulas(st)
    checked = 0
    for M in st.source_class:
        for a_sort in st.interp.source.signature.sorts:
            for a in range(M.sizes[a_sort]):
                for R in forms[a_sort]:
                    if (a,) in evaluate(M, R).tuples:
                        continue
                    checked += 1
                    if not _escape_exists(M, a_sort, a, R, st):
                        return RowVerdict("supercovering", "fail",
                                          {"model": M, "sort": a_sort, "element": a, "formula": R,
                                           "syntactic": _collapse_proof(st, R)}, checked)
    return RowVerdict("supercovering", "pass", None, checked)


def _escape_exists(M, a_sort, a, R, st) -> bool:
    for IN in st.reducts:
        ext = evaluate(IN, R).tuples
        for h in enumerate_homs(M, IN):
            if (h(a_sort, a),) not in ext:
                return True
    return False


def _collapse_proof(st: Setting, R: Formula):
    """Try to prove I(x = x |- R(x)) in the target: the syntactic face of a supercovering failure."""
    I = st.interp
    seq = Sequent.of(R.context, TOP, R.body)
    try:
        tseq = I.translate_sequent(seq)
    except Exception:   # noqa: BLE001 - untranslatable images only lose the extra evidence
        return None
    outcome = prove(I.target, tseq, Bounds())
    return outcome.status


def check_stabilizes_subobjects(st: Setting) -> RowVerdict:
    forms = _target_formulas(st)
    checked = 0
    for i, N0 in enumerate(st.target_class):
        for j, N1 in enumerate(st.target_class):
            for h in enumerate_homs(st.reducts[i], st.reducts[j]):
                for a_sort, S in forms:
                    e0 = evaluate(N0, S).tuples
                    e1 = evaluate(N1, S).tuples
                    checked += 1
                    if a_sort is None:
                        bad = [()] if e0 and not e1 else []
                    else:
                        bad = [t for t in sorted(e0) if (h(a_sort, t[0]),) not in e1]
                    if bad:
                        return RowVerdict("stabilizes-subobjects", "fail",
                                          {"source": N0, "target": N1, "hom": h, "formula": S,
                                           "element": list(bad[0])}, checked)
    return RowVerdict("stabilizes-subobjects", "pass", None, checked)


def check_faithful_reduct(st: Setting) -> RowVerdict:
    from .transforms import reduct_hom
    checked = 0
    for i, N0 in enumerate(st.target_class):
        for j, N1 in enumerate(st.target_class):
            seen = {}
            for g in enumerate_homs(N0, N1):
                checked += 1
                key = reduct_hom(g, st.interp, st.reducts[i], st.reducts[j]).maps
                if key in seen:
                    return RowVerdict("faithful-reduct", "fail",
                                      {"source": N0, "target": N1, "homs": [seen[key], g]}, checked)
                seen[key] = g
    return RowVerdict("faithful-reduct", "pass", None, checked)


# spectral formulations over labelled points

def _reduct_point(st, idx, env):
    from .spectrum import SpectrumPoint
    return SpectrumPoint(st.reducts[idx], env)


def check_superdense(st: Setting) -> RowVerdict:
    """Every source point outside a basic open V_R(k) specializes to a reduct point outside it."""
    from .spectrum import BasicOpen, SpectrumPoint, closure_leq, in_open
    forms = _source_formulas(st)
    checked = 0
    for M in st.source_class:
        for a_sort in st.interp.source.signature.sorts:
            for a in range(M.sizes[a_sort]):
                mu = SpectrumPoint(M, (("k", a_sort, a),))
                for R in forms[a_sort]:
                    U = BasicOpen(R, ("k",))
                    if in_open(mu, U):
                        continue
                    checked += 1
                    ok = False
                    for idx, IN in enumerate(st.reducts):
                        for b in range(IN.sizes[a_sort]):
                            nu = _reduct_point(st, idx, (("k", a_sort, b),))
                            if not in_open(nu, U) and closure_leq(mu, nu) is not None:
                                ok = True
                                break
                        if ok:
                            break
                    if not ok:
                        return RowVerdict("superdense", "fail",
                                          {"model": M, "sort": a_sort, "element": a, "formula": R}, checked)
    return RowVerdict("superdense", "pass", None, checked)


def check_separates_subgroupoids(st: Setting) -> RowVerdict:
    """Reduct specialization between labelled target points never leaves a basic open."""
    from .spectrum import BasicOpen, SpectrumPoint, closure_leq, in_open
    forms = _target_formulas(st)
    checked = 0
    T = st.target_class
    for i, N0 in enumerate(T):
        for j, N1 in enumerate(T):
            for a_sort, S in forms:
                if a_sort is None:
                    pairs = [((), ())]
                else:
                    pairs = [((("k", a_sort, a),), (("k", a_sort, b),))
                             for a in range(st.reducts[i].sizes[a_sort])
                             for b in range(st.reducts[j].sizes[a_sort])]
                for e0, e1 in pairs:
                    if closure_leq(_reduct_point(st, i, e0), _reduct_point(st, j, e1)) is None:
                        continue
                    checked += 1
                    tsort = st.interp.sort_map.get(a_sort)
                    n0 = SpectrumPoint(N0, tuple((k, tsort, v) for k, _, v in e0))
                    n1 = SpectrumPoint(N1, tuple((k, tsort, v) for k, _, v in e1))
                    U = BasicOpen(S, ("k",) if a_sort else ())
                    if in_open(n0, U) and not in_open(n1, U):
                        return RowVerdict("separates-subgroupoids", "fail",
                                          {"source": N0, "target": N1, "formula": S,
                                           "labels": [list(e0), list(e1)]}, checked)
    return RowVerdict("separates-subgroupoids", "pass", None, checked)


def _full_labelling(N: FiniteStructure):
    return tuple((f"k_{s}_{e}", s, e) for s in N.signature.sorts for e in range(N.sizes[s]))


def check_non_folding(st: Setting) -> RowVerdict:
    """Distinct specializations out of a fully labelled point stay distinct on source sorts."""
    from .spectrum import SpectrumPoint, closure_leq
    src_sorts = {st.interp.sort_map[a] for a in st.interp.source.signature.sorts}
    checked = 0
    T = st.target_class
    for N0 in T:
        full = _full_labelling(N0)
        nu0 = SpectrumPoint(N0, full)
        for N1 in T:
            seen = {}
            choices = [range(N1.sizes[s]) for _, s, _ in full]
            for pick in itertools.product(*choices):
                env = tuple((k, s, v) for (k, s, _), v in zip(full, pick))
                nu1 = SpectrumPoint(N1, env)
                if closure_leq(nu0, nu1) is None:
                    continue
                checked += 1
                key = tuple(x for x in env if x[1] in src_sorts)
                if key in seen:
                    return RowVerdict("non-folding", "fail",
                                      {"source": N0, "target": N1, "labels": [list(seen[key]), list(env)]},
                                      checked)
                seen[key] = env
    return RowVerdict("non-folding", "pass", None, checked)


@dataclass(frozen=True)
class InterpretationReport:
    rows: tuple          # semantic rows
    spectral: tuple      # matching spectral rows
    bounds: dict

    @property
    def fullness_evidence(self) -> bool:
        return self.rows[0].passed and self.rows[1].passed

    @property
    def equivalence_evidence(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def agreement(self) -> bool:
        return all(a.verdict == b.verdict for a, b in zip(self.rows, self.spectral))

    def failing_rows(self) -> list:
        return [r.row for r in self.rows if not r.passed]

    def to_json(self) -> dict:
        return {
            "rows": [r.to_json() for r in self.rows],
            "spectral": [r.to_json() for r in self.spectral],
            "agreement": self.agreement,
            "evidence": {"full": self.fullness_evidence, "essentially_surjective": self.equivalence_evidence,
                         "kind": "evidence at bound"},
            "bounds": self.bounds,
        }


ROWS = {
    "conservative": "supercovering",
    "full on subobjects": "stabilizes-subobjects",
    "subcovering": "faithful-reduct",
}


def conceptual_completeness_report(interp: Interpretation, n: int = 3, depth: int = 2) -> InterpretationReport:
    st = Setting(interp, n, depth)
    rows = (check_supercovering(st), check_stabilizes_subobjects(st), check_faithful_reduct(st))
    spectral = (check_superdense(st), check_separates_subgroupoids(st), check_non_folding(st))
    return InterpretationReport(rows, spectral, {"n": n, "depth": depth})


def revalidate(interp: Interpretation, row: RowVerdict, n: int) -> bool:
    """Re-check a failure witness from models primitives alone."""
    from .transforms import reduct, reduct_hom
    from .models import is_model
    w = row.witness
    if row.row == "supercovering":
        M, a, R, s = w["model"], w["element"], w["formula"], w["sort"]
        if not is_model(M, interp.source) or (a,) in evaluate(M, R).tuples:
            return False
        for N in enumerate_models(interp.target, n):
            IN = reduct(N, interp)
            if any((h(s, a),) not in evaluate(IN, R).tuples for h in enumerate_homs(M, IN)):
                return False
        return True
    if row.row == "stabilizes-subobjects":
        N0, N1, h, S, el = w["source"], w["target"], w["hom"], w["formula"], w["element"]
        from .models import is_homomorphism
        if not (is_model(N0, interp.target) and is_model(N1, interp.target)):
            return False
        if not is_homomorphism(reduct(N0, interp), reduct(N1, interp), dict(h.maps)):
            return False
        if tuple(el) not in evaluate(N0, S).tuples:
            return False
        if not el:
            return () not in evaluate(N1, S).tuples
        sort = [a for a in interp.source.signature.sorts if interp.sort_map[a] == S.context.sorts[0]][0]
        return (h(sort, el[0]),) not in evaluate(N1, S).tuples
    if row.row == "faithful-reduct":
        g, h = w["homs"]
        from .models import is_homomorphism
        return (is_homomorphism(g.source, g.target, dict(g.maps)) and is_homomorphism(h.source, h.target, dict(h.maps))
                and g.maps != h.maps and reduct_hom(g, interp).maps == reduct_hom(h, interp).maps)
    return False


# ---------------------------------------------------------------------------
# Existence and disjunction properties of diagram theories

@dataclass(frozen=True)
class LocalReport:
    disjunctions: tuple    # (sentence, verdict)
    existentials: tuple
    unknowns: tuple

    @property
    def ok(self) -> bool:
        return all(v in ("pass", "not proved") for _, v in self.disjunctions + self.existentials)

    def to_json(self) -> dict:
        return {"ok": self.ok,
                "disjunctions": [[str(s), v] for s, v in self.disjunctions],
                "existentials": [[str(s), v] for s, v in self.existentials],
                "unknowns": [str(s) for s in self.unknowns]}


def _closed_terms(sig, sort):
    return [App(n, ()) for n, args, res in sig.functions if not args and res == sort]


def check_local_properties(theory: Theory, depth: int = 2, bounds: Optional[Bounds] = None,
                           sentences=None, limit: int = 200) -> LocalReport:
    bounds = bounds or Bounds(countermodel_size=2)
    sig = theory.signature
    if sentences is None:
        en = FormulaEnumerator(sig, False)
        pool = [b for d in range(1, depth + 1) for b in en.level(Context(()), d)]
        sentences = [b for b in pool if isinstance(b, Or)][:limit] + [b for b in pool if isinstance(b, Exists)][:limit]
    empty = Context(())
    disj, exis, unknown = [], [], []

    def status(body):
        return prove(theory, Sequent.of(empty, TOP, body), bounds).status

    for s in sentences:
        st = status(s)
        if st == "unknown":
            unknown.append(s)
            continue
        if st != "proved":
            (disj if isinstance(s, Or) else exis).append((s, "not proved"))
            continue
        if isinstance(s, Or):
            sides = [status(s.left), status(s.right)]
            if "proved" in sides:
                disj.append((s, "pass"))
            elif "unknown" in sides:
                unknown.append(s)
            else:
                disj.append((s, "fail"))
        else:
            verdict = "fail"
            for t in _closed_terms(sig, s.sort):
                inst = substitute_node(s.body, {s.var: t}, set())
                got = status(inst)
                if got == "proved":
                    verdict = "pass"
                    break
                if got == "unknown":
                    verdict = "unknown"
            if verdict == "unknown":
                unknown.append(s)
            else:
                exis.append((s, verdict))
    return LocalReport(tuple(disj), tuple(exis), tuple(unknown))
