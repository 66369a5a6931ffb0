"""The ten acceptance criteria as functions returning JSON-able records.

Run as a script to print one line per criterion and write the report:

    python tests/acceptance_suite.py --report out.json

Timings are printed but never written into the report, so two runs can be
compared byte for byte.
"""

import argparse
import itertools
import json
import os
import sys
import time

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import oracles  # noqa: E402
import prover_corpus  # noqa: E402

from cohlab import corpus  # noqa: E402
from cohlab.analysis import (  # noqa: E402
    PROVED, candidate_from_text, check_definable_automorphism, check_group_closure,
    check_normality, conceptual_completeness_report, isotropy_at_model, revalidate,
)
from cohlab.definability import EquivariantFamily, find_defining_formula  # noqa: E402
from cohlab.dsl import parse_formula  # noqa: E402
from cohlab.formulas import FormulaEnumerator, class_fingerprint, standard_contexts  # noqa: E402
from cohlab.interpretations import (  # noqa: E402
    build_interpretation, identity_example, new_relation_example, new_sort_example, quotient_example,
)
from cohlab.logic import Context  # noqa: E402
from cohlab.models import (  # noqa: E402
    FiniteStructure, automorphisms, canonical_form, enumerate_isos, enumerate_models, evaluate,
    is_homomorphism, is_model,
)
from cohlab.prover import check_countermodel, entails_on_class, prove  # noqa: E402
from cohlab.spectrum import (  # noqa: E402
    BasicOpen, SpectrumGroupoid, closure_leq, default_parameters, in_open, in_open_by_eval,
)
from cohlab.transforms import copower, diagram_theory, morleyize, pushout, slice_theory  # noqa: E402

THEORIES = ("groups", "abelian_groups", "pointed_sets", "posets", "unary_predicate")
SYNTACTIC_LIMIT = 20_000
N_SMALL = 3
DEPTH = 3
BUDGET = 2


def formula_pool(theory, models, depth=DEPTH, max_vars=2):
    """Every formula of depth <= depth when that stays under the limit, else one per extension."""
    sig = theory.signature
    contexts = standard_contexts(sig, max_vars)
    full = FormulaEnumerator(sig, theory.classical)
    try:
        out = [f for c in contexts for f in full.upto(c, depth)]
        if len(out) <= SYNTACTIC_LIMIT:
            return out, "syntactic"
    except OverflowError:
        pass
    dedup = FormulaEnumerator(sig, theory.classical, class_fingerprint(models))
    return [f for c in contexts for f in dedup.upto(c, depth)], "one per extension"


# ---------------------------------------------------------------------------

def criterion_1():
    rows = {}
    ok = True
    start = time.perf_counter()
    for name in THEORIES:
        T = corpus.theory(name)
        mc = enumerate_models(T, N_SMALL)
        forms, kind = formula_pool(T, mc.models)
        G = SpectrumGroupoid.build(T, mc.models, BUDGET)
        labels = [n for n, _ in default_parameters(T, BUDGET)]
        checks = bad = 0
        for f in forms:
            for params in itertools.product(labels, repeat=len(f.context)):
                U = BasicOpen(f, params)
                for p in G.points:
                    checks += 1
                    if in_open(p, U) != in_open_by_eval(p, U):
                        bad += 1
        rows[name] = {"formulas": len(forms), "pool": kind, "points": len(G.points),
                      "checks": checks, "disagreements": bad}
        ok = ok and bad == 0
    elapsed = time.perf_counter() - start
    return {"pass": ok and elapsed <= 60, "runtime_within_60s": elapsed <= 60, "theories": rows}, elapsed


def _reversal(M):
    return {s: tuple(reversed(range(M.sizes[s]))) for s in M.signature.sorts}


def criterion_2():
    rows = {}
    ok = True
    for name in THEORIES:
        T = corpus.theory(name)
        mc = enumerate_models(T, N_SMALL)
        forms, kind = formula_pool(T, mc.models)
        isos = bad = 0
        for M in mc.models:
            # automorphisms plus isomorphisms onto a relabelled copy
            for N in (M, M.relabel(_reversal(M))):
                for alpha in enumerate_isos(M, N):
                    isos += 1
                    for f in forms:
                        image = {alpha.map_tuple(f.context.sorts, t) for t in evaluate(M, f).tuples}
                        if image != set(evaluate(N, f).tuples):
                            bad += 1
        rows[name] = {"formulas": len(forms), "isos": isos, "violations": bad}
        ok = ok and bad == 0
    return {"pass": ok, "theories": rows}


def criterion_3():
    rows = {}
    ok = True
    for name in THEORIES:
        T = corpus.theory(name)
        mc = enumerate_models(T, N_SMALL)
        G = SpectrumGroupoid.build(T, mc.models, BUDGET)
        pairs = bad = related = 0
        for mu in G.points:
            for nu in G.points:
                pairs += 1
                h = closure_leq(mu, nu)
                brute = oracles.label_respecting(mu, nu)
                if h is not None:
                    related += 1
                    # the returned map must itself be a label-respecting hom
                    good = is_homomorphism(mu.structure, nu.structure, dict(h.maps)) and \
                        all(h(s, e) == nu.lookup(n)[1] for n, s, e in mu.env)
                    if not (good and brute):
                        bad += 1
                elif brute:
                    bad += 1
        rows[name] = {"points": len(G.points), "pairs": pairs, "related": related, "disagreements": bad}
        ok = ok and bad == 0
    return {"pass": ok, "theories": rows}


def criterion_4():
    rows = {}
    ok = True
    for name in THEORIES:
        T = corpus.theory(name)
        if not T.classical:
            continue
        R0 = morleyize(T)
        classical = enumerate_models(T, N_SMALL)
        coherent = enumerate_models(R0.theory, N_SMALL)
        expanded = {canonical_form(R0.expand(M)) for M in classical.models}
        reducts = [R0.reduct(P) for P in coherent.models]
        bijective = (expanded == set(coherent.forms) and len(classical) == len(coherent)
                     and all(is_model(M, T) for M in reducts)
                     and {canonical_form(M) for M in reducts} == set(classical.forms))
        # expansion is forced: each complement symbol is pinned down by its two axioms
        unique = all(len([Q for Q in coherent.models
                          if canonical_form(R0.reduct(Q)) == canonical_form(M)]) == 1
                     for M in classical.models)
        if name == "unary_predicate":
            oracle = oracles.unary_iso_classes(N_SMALL, keep=lambda k, p: len(p) < k)
            bijective = bijective and len(oracle) == len(classical)
        forms = [f for c in standard_contexts(T.signature, 2)
                 for f in FormulaEnumerator(T.signature, True).upto(c, DEPTH)]
        R = morleyize(T, forms)
        bad = checks = 0
        for M in classical.models:
            E = R.expand(M)
            if not is_model(E, R.theory):
                bad += 1
            for f in forms:
                checks += 1
                if evaluate(M, f).tuples != evaluate(E, R.translate(f)).tuples:
                    bad += 1
        rows[name] = {"classical_models": len(classical), "coherent_models": len(coherent),
                      "bijective": bijective, "unique_expansion": unique,
                      "formulas": len(forms), "checks": checks, "disagreements": bad}
        ok = ok and bijective and unique and bad == 0
    return {"pass": ok and bool(rows), "theories": rows}


def _z2(G):
    return FiniteStructure(G.signature, {"G": 2}, {"e": {(): 0}, "mul": lambda a, b: (a + b) % 2,
                                                   "inv": lambda a: a})


def _aut(M):
    return len(automorphisms(M))


def criterion_5():
    G = corpus.theory("groups")
    n = 4
    rows = {}
    D = diagram_theory(G, _z2(G))
    mc = enumerate_models(D.theory, n)
    raw, orbits = oracles.diagram_counts(oracles.cyclic(2))
    weighted = oracles.weighted_total([((_aut(D.homomorphism(P).target),), _aut(P)) for P in mc.models])
    rows["diagram(Z2)"] = {"models": len(mc), "orbits": orbits, "weighted": weighted, "raw": raw}

    S = slice_theory(G, parse_formula("[x:G] mul(x, x) = e", G.signature))
    mc = enumerate_models(S.theory, n)
    raw, orbits = oracles.involution_counts()
    weighted = oracles.weighted_total([((_aut(P.restrict_signature(G.signature)),), _aut(P)) for P in mc.models])
    rows["slice(groups, x*x=e)"] = {"models": len(mc), "orbits": orbits, "weighted": weighted, "raw": raw}

    C = copower(G)
    mc = enumerate_models(C.theory, n)
    raw, orbits = oracles.copower_counts()
    weighted = oracles.weighted_total([((_aut(C.split(P)[0]), _aut(C.split(P)[1])), _aut(P)) for P in mc.models])
    rows["copower(groups)"] = {"models": len(mc), "orbits": orbits, "weighted": weighted, "raw": raw}

    I = build_interpretation(corpus.theory("bare_sort"), G, {"X": "G"}, {})
    PO = pushout(I, I)
    mc = enumerate_models(PO.theory, n)
    raw, orbits = oracles.carrier_bijection_counts()
    weighted = oracles.weighted_total([((_aut(PO.split(P)[0]), _aut(PO.split(P)[1])), _aut(P))
                                       for P in mc.models])
    rows["pushout(groups <- set -> groups)"] = {"models": len(mc), "orbits": orbits, "weighted": weighted,
                                               "raw": raw}
    ok = all(r["models"] == r["orbits"] and r["weighted"] == r["raw"] for r in rows.values())
    return {"pass": ok, "counts": rows}


def criterion_6():
    classes = {}
    out = []
    violations = mismatched = 0
    for name, T, seq, expected in prover_corpus.cases():
        o = prove(T, seq)
        if o.status == "proved":
            if name not in classes:
                classes[name] = enumerate_models(T, 4)
            sound = entails_on_class(classes[name], seq)
        elif o.status == "countermodel":
            sound = check_countermodel(T, seq, o.structure, o.witness) and is_model(o.structure, T)
        else:
            sound = True
        violations += not sound
        mismatched += o.status != expected
        out.append({"theory": name, "sequent": str(seq), "expected": expected, "got": o.status, "sound": sound})
    return {"pass": violations == 0 and mismatched == 0 and len(out) == 50,
            "violations": violations, "unexpected_verdicts": mismatched, "sequents": out}


def _squares(M):
    return {(M.apply("mul", y, y),) for y in range(M.sizes["G"])}


def _idempotents(M):
    return {(x,) for x in range(M.sizes["G"]) if M.apply("mul", x, x) == x}


def _least_non_identity(M):
    e = M.apply("e")
    rest = [x for x in range(M.sizes["G"]) if x != e]
    return {(min(rest),)} if rest else set()


def criterion_7():
    G = corpus.theory("groups")
    mc = enumerate_models(G, 4)
    ctx = Context((("x0", "G"),))
    sq = EquivariantFamily.from_function(mc, ctx, _squares)
    d1 = find_defining_formula(sq, 1)
    d2 = find_defining_formula(sq, 2)
    ident = find_defining_formula(EquivariantFamily.from_function(mc, ctx, _idempotents), 1)
    bad = EquivariantFamily.from_function(mc, ctx, _least_non_identity)
    rej = find_defining_formula(bad, 3)
    witness_ok = False
    if rej.witness is not None:
        w = rej.witness
        iso = w["iso"]
        i, j = w["source"], w["target"]
        witness_ok = (is_homomorphism(mc[i], mc[j], dict(iso.maps)) and iso.is_bijective()
                      and {iso.map_tuple(("G",), t) for t in bad.sets[i]} != set(bad.sets[j]))
    result = {
        "squares_depth1": None if d1.formula is None else str(d1.formula),
        "squares_depth2": None if d2.formula is None else str(d2.formula),
        "identity": None if ident.formula is None else str(ident.formula),
        "non_equivariant_rejected": rej.formula is None and rej.witness is not None,
        "witness_revalidated": witness_ok,
        "witness_iso": None if rej.witness is None else rej.witness["iso"].to_json(),
    }
    result["pass"] = (d1.formula is None and d2.formula is not None and sq.matches(d2.formula)
                      and ident.formula is not None and str(ident.formula.body) == "mul(x0, x0) = x0"
                      and result["non_equivariant_rejected"] and witness_ok)
    return result


def criterion_8():
    G = corpus.theory("groups")
    A = corpus.theory("abelian_groups")
    conj = candidate_from_text(G, "x:G", {"G": "y2 = mul(mul(x, y), inv(x))"})
    rep_c = check_definable_automorphism(G, conj, model_class=enumerate_models(G, 4))
    inv = candidate_from_text(A, "", {"G": "y2 = neg(y)"})
    mcA = enumerate_models(A, 4)
    rep_i = check_definable_automorphism(A, inv, model_class=mcA)
    z3 = next(M for M in mcA.models if M.sizes["G"] == 3)
    entries = isotropy_at_model(A, z3, depth=2, budget=1, model_class=mcA)
    normal, _ = check_normality(z3, entries)
    closed = check_group_closure(z3, entries)
    stalk = sorted(tuple(e.automorphism.maps[0][1]) for e in entries if e.status == "M-definable")
    full = len(automorphisms(z3)) == 2 and len(stalk) == 2 and \
        all(e.status == "M-definable" for e in entries)
    result = {
        "conjugation": {"ok": rep_c.ok, "provenance": rep_c.provenance,
                        "statuses": [[o.schema, o.symbol, o.status] for o in rep_c.obligations]},
        "inversion": {"ok": rep_i.ok, "provenance": rep_i.provenance,
                      "statuses": [[o.schema, o.symbol, o.status] for o in rep_i.obligations]},
        "z3_stalk": [list(s) for s in stalk],
        "z3_normal": normal,
        "z3_group_closed": closed,
    }
    result["pass"] = (rep_c.ok and all(o.status == PROVED for o in rep_c.obligations)
                      and rep_i.ok and full and normal and closed)
    return result


EXPECTED_ROWS = {
    "identity": [],
    "quotient": ["supercovering"],
    "new_relation": ["stabilizes-subobjects"],
    "new_sort": ["faithful-reduct"],
}


def criterion_9():
    examples = {"identity": identity_example("groups"), "quotient": quotient_example(),
                "new_relation": new_relation_example(), "new_sort": new_sort_example()}
    rows = {}
    ok = True
    for name, I in examples.items():
        rep = conceptual_completeness_report(I, n=3, depth=2)
        failing = rep.failing_rows()
        witnessed = all(revalidate(I, r, 3) for r in rep.rows if not r.passed)
        rows[name] = {"failing": failing, "agreement": rep.agreement, "witnesses_revalidated": witnessed,
                      "semantic": [r.verdict for r in rep.rows], "spectral": [r.verdict for r in rep.spectral]}
        ok = ok and failing == EXPECTED_ROWS[name] and rep.agreement and witnessed
    return {"pass": ok, "interpretations": rows}


CRITERIA = {
    1: ("satisfaction lemma", criterion_1),
    2: ("iso-stability", criterion_2),
    3: ("closure oracle", criterion_3),
    4: ("Morleyization bijection", criterion_4),
    5: ("classification counts", criterion_5),
    6: ("prover soundness", criterion_6),
    7: ("definability", criterion_7),
    8: ("isotropy", criterion_8),
    9: ("conceptual-completeness diagnostics", criterion_9),
}


def run(which=None, echo=print):
    """Run criteria 1-9; returns (report dict, timings)."""
    report, timings = {}, {}
    for k, (title, fn) in CRITERIA.items():
        if which and k not in which:
            continue
        t = time.perf_counter()
        got = fn()
        if isinstance(got, tuple):
            got = got[0]
        timings[k] = time.perf_counter() - t
        report[str(k)] = {"title": title, **got}
        echo(f"criterion {k} ({title}): {'PASS' if got['pass'] else 'FAIL'} [{timings[k]:.1f}s]")
    return report, timings


def dumps(report) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--only", type=int, action="append", help="run just these criteria")
    args = p.parse_args(argv)
    report, _ = run(set(args.only or ()))
    text = dumps(report)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0 if all(r["pass"] for r in report.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
