from dataclasses import replace

import pytest

from cohlab import corpus
from cohlab.analysis import (
    BOUND, PROVED, Setting, automorphism_sequents, candidate_from_text, check_definable_automorphism,
    check_faithful_reduct, check_group_closure, check_local_properties, check_non_folding,
    check_normality, check_separates_subgroupoids, check_stabilizes_subobjects, check_superdense,
    check_supercovering, conceptual_completeness_report, isotropy_at_model, revalidate,
)
from cohlab.dsl import parse_formula, parse_theory
from cohlab.interpretations import (
    identity_example, new_relation_example, new_sort_example, pointed_into_groups, quotient_example,
)
from cohlab.logic import Or, Rel
from cohlab.models import automorphisms, enumerate_models
from cohlab.transforms import diagram_theory, morleyize

from structures import cyclic, klein

G = corpus.theory("groups")
A = corpus.theory("abelian_groups")


def test_sequent_schemas():
    cand = candidate_from_text(G, "x:G", {"G": "y2 = mul(mul(x, y), inv(x))"})
    names = [(s, sym) for s, sym, _ in automorphism_sequents(G, cand)]
    assert names == [("total", "G"), ("surjective", "G"), ("single-valued", "G"), ("injective", "G"),
                     ("natural", "e"), ("natural", "mul"), ("natural", "inv")]
    P = corpus.theory("posets")
    rel = candidate_from_text(P, "", {"P": "y = y2"})
    assert [s for s, _, _ in automorphism_sequents(P, rel)][-2:] == ["preserves", "reflects"]


def test_conjugation_is_proved_outright():
    cand = candidate_from_text(G, "x:G", {"G": "y2 = mul(mul(x, y), inv(x))"})
    rep = check_definable_automorphism(G, cand, model_class=enumerate_models(G, 4))
    assert rep.ok and rep.provenance == PROVED
    assert all(o.status == PROVED for o in rep.obligations)


def test_abelian_negation_passes():
    cand = candidate_from_text(A, "", {"G": "y2 = neg(y)"})
    rep = check_definable_automorphism(A, cand, model_class=enumerate_models(A, 4))
    assert rep.ok and rep.provenance in (PROVED, BOUND)
    assert {o.status for o in rep.obligations} <= {PROVED, BOUND}


def test_abelian_inverse_relation_up_to_five():
    mc = enumerate_models(A, 5)
    assert len(mc) == 6
    cand = candidate_from_text(A, "", {"G": "add(y, y2) = zero"})
    rep = check_definable_automorphism(A, cand, model_class=mc)
    assert rep.ok
    assert len(rep.obligations) == 7
    assert {o.status for o in rep.obligations} <= {PROVED, BOUND}


def test_negation_is_not_an_automorphism_of_all_groups():
    cand = candidate_from_text(G, "", {"G": "y2 = inv(y)"})
    rep = check_definable_automorphism(G, cand, model_class=enumerate_models(G, 4))
    bad = {o.symbol for o in rep.obligations if o.status not in (PROVED, BOUND)}
    # inversion reverses products, which only a non-abelian group can notice; order <= 4 cannot
    assert rep.ok or bad == {"mul"}


def test_a_non_bijection_fails():
    cand = candidate_from_text(G, "", {"G": "y2 = e"})
    rep = check_definable_automorphism(G, cand, model_class=enumerate_models(G, 3))
    assert not rep.ok
    failed = [o for o in rep.obligations if o.status not in (PROVED, BOUND)]
    assert failed and failed[0].witness is not None


def test_z3_stalk():
    mc = enumerate_models(A, 3)
    z3 = mc.models[-1]
    entries = isotropy_at_model(A, z3, depth=2, budget=1, model_class=mc)
    assert len(entries) == len(automorphisms(z3)) == 2
    assert all(e.status == "M-definable" for e in entries)
    assert check_normality(z3, entries)[0]
    assert check_group_closure(z3, entries)


def test_klein_stalk_is_trivial_at_small_depth():
    mc = enumerate_models(G, 4)
    V = mc.models[mc.index_of(klein())]
    entries = isotropy_at_model(G, V, depth=2, budget=1, model_class=mc)
    defined = [e for e in entries if e.status == "M-definable"]
    assert [e.automorphism.is_identity() for e in defined] == [True]
    assert check_normality(V, entries)[0] and check_group_closure(V, entries)


@pytest.mark.parametrize("make, failing", [
    (lambda: identity_example("groups"), []),
    (lambda: identity_example("posets"), []),
    (quotient_example, ["supercovering"]),
    (new_relation_example, ["stabilizes-subobjects"]),
    (new_sort_example, ["faithful-reduct"]),
    (pointed_into_groups, ["stabilizes-subobjects"]),
])
def test_interpretation_rows(make, failing):
    I = make()
    rep = conceptual_completeness_report(I, n=3, depth=2)
    assert rep.failing_rows() == failing
    assert rep.agreement
    for row in rep.rows:
        if not row.passed:
            assert revalidate(I, row, 3)
    assert rep.equivalence_evidence == (failing == [])


def test_quotient_failure_has_a_syntactic_face():
    st = Setting(quotient_example(), 3, 2)
    row = check_supercovering(st)
    assert row.verdict == "fail" and row.witness["syntactic"] == "proved"


def test_spectral_rows_match_individually():
    st = Setting(new_sort_example(), 3, 2)
    assert check_faithful_reduct(st).verdict == check_non_folding(st).verdict == "fail"
    st = Setting(new_relation_example(), 3, 2)
    assert check_stabilizes_subobjects(st).verdict == check_separates_subgroupoids(st).verdict == "fail"
    assert check_supercovering(st).verdict == check_superdense(st).verdict == "pass"


def test_tampered_witness_does_not_revalidate():
    I = new_relation_example()
    rep = conceptual_completeness_report(I, n=3, depth=2)
    (row,) = [r for r in rep.rows if r.row == "stabilizes-subobjects"]
    assert revalidate(I, row, 3)
    w = dict(row.witness)
    w["target"] = w["source"]
    assert not revalidate(I, replace(row, witness=w), 3)


def test_diagram_of_z2_is_local():
    D = diagram_theory(G, cyclic(2))
    rep = check_local_properties(D.theory, depth=2)
    assert rep.ok and not rep.unknowns
    assert any(v == "pass" for _, v in rep.existentials)


def test_negative_control_breaks_disjunction_property():
    prop = parse_theory("classical theory prop\nrel P :\n")
    R = morleyize(prop, [parse_formula("[] not P", prop.signature, classical=True)])
    (n,) = R.symbols
    rep = check_local_properties(R.theory, sentences=[Or(Rel("P", ()), Rel(n, ()))])
    assert not rep.ok
    assert rep.disjunctions[0][1] == "fail"
