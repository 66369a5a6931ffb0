import pytest
from hypothesis import given

from cohlab import corpus
from cohlab.dsl import parse_formula, parse_theory
from cohlab.interpretations import build_interpretation, pointed_into_groups
from cohlab.logic import And, Bot, Context, Or, Rel, Top, Var
from cohlab.models import (
    canonical_form, enumerate_homs, enumerate_models, evaluate, is_homomorphism, is_model,
)
from cohlab.transforms import (
    NotAModel, NotFunctional, OverlapError, copower, diagram_theory, morleyize, pushout,
    reduct, reduct_hom, rename_theory, slice_theory,
)

import oracles
import strategies
from structures import cyclic, klein, unary

G = corpus.theory("groups")
U = corpus.theory("unary_predicate")

PROP = parse_theory("classical theory prop\nrel P :\naxiom [] true |- P \\/ not P\n")


def test_morleyization_adds_totality_and_disjointness():
    R = morleyize(U)
    assert list(R.symbols) == ["N_P"]
    defn = R.symbols["N_P"]
    ax = R.theory.axioms[-2:]
    atom = Rel("N_P", (Var("x0"),))
    # true |- phi \/ N_phi  and  phi /\ N_phi |- false
    assert ax[0].lhs.body == Top() and ax[0].rhs.body == Or(defn.body, atom)
    assert ax[1].lhs.body == And(defn.body, atom) and ax[1].rhs.body == Bot()
    assert not R.theory.classical


def test_morleyized_axiom_uses_complement():
    R = morleyize(U)
    assert "N_P" in str(R.theory.axioms[0])


@given(strategies.formulas(U.signature, Context((("x", "X"),)), depth=3, classical=True))
def test_translation_agrees_on_expansions(f):
    R = morleyize(U, [f])
    for M in (unary(3, {0}), unary(2, set()), unary(3, {0, 2})):
        E = R.expand(M)
        assert is_model(E, R.theory)
        assert evaluate(E, R.translate(f)).tuples == evaluate(M, f).tuples


def test_expansion_reduct_round_trip():
    R = morleyize(U)
    M = unary(3, {1})
    assert R.reduct(R.expand(M)) == M


def test_untranslatable_formula_is_reported():
    R = morleyize(U)
    f = parse_formula("[x:X, y:X] not x = y", U.signature, classical=True)
    with pytest.raises(Exception, match="complement"):
        R.translate(f)


def test_diagram_models_are_homs_out_of_the_model():
    D = diagram_theory(G, cyclic(2))
    mc = enumerate_models(D.theory, 4)
    raw, orbits = oracles.diagram_counts(oracles.cyclic(2))
    assert len(mc) == orbits == 8
    for P in mc.models:
        h = D.homomorphism(P)
        assert is_homomorphism(h.source, h.target, dict(h.maps))


def test_diagram_needs_a_model():
    from cohlab.models import FiniteStructure
    broken = FiniteStructure(G.signature, {"G": 2}, {"e": {(): 0}, "mul": lambda a, b: 0, "inv": lambda a: a})
    with pytest.raises(NotAModel):
        diagram_theory(G, broken)


def test_slice_constants_pick_involutions():
    S = slice_theory(G, parse_formula("[x:G] mul(x, x) = e", G.signature))
    mc = enumerate_models(S.theory, 4)
    assert len(mc) == oracles.involution_counts()[1] == 8
    for P in mc.models:
        (a,) = S.element(P)
        assert P.apply("mul", a, a) == P.apply("e")


def test_copower_splits_into_a_hom():
    C = copower(G)
    mc = enumerate_models(C.theory, 3)
    sizes = {len(oracles.cyclic(k)) for k in (1, 2, 3)}
    small = {k: v for k, v in oracles.SMALL_GROUPS.items() if len(v) in sizes}
    assert len(mc) == oracles.copower_counts(small)[1]
    for P in mc.models:
        M0, M1, h = C.split(P)
        assert is_model(M0, G) and is_model(M1, G)
        assert is_homomorphism(M0, M1, dict(h.maps))


def test_pushout_split_is_an_iso_on_the_shared_sort():
    B = corpus.theory("bare_sort")
    I = build_interpretation(B, G, {"X": "G"}, {})
    PO = pushout(I, I)
    mc = enumerate_models(PO.theory, 3)
    for P in mc.models:
        M, N, iso = PO.split(P)
        assert sorted(iso["X"]) == list(range(M.sizes["G"]))
    small = {k: v for k, v in oracles.SMALL_GROUPS.items() if len(v) <= 3}
    assert len(mc) == oracles.carrier_bijection_counts(small)[1]


def test_pushout_without_renaming_refuses_overlap():
    B = corpus.theory("bare_sort")
    I = build_interpretation(B, G, {"X": "G"}, {})
    with pytest.raises(OverlapError):
        pushout(I, I, rename=False)


def test_reduct_along_point_to_identity():
    I = pointed_into_groups()
    R = reduct(klein(), I)
    assert R.apply("pt") == 0 and R.sizes == {"X": 4}
    h = enumerate_homs(cyclic(2), klein())[1]
    rh = reduct_hom(h, I)
    assert rh.as_dict() == {"X": list(h.as_dict()["G"])}


def test_reduct_rejects_non_functional_image():
    P = corpus.theory("pointed_sets")
    I = build_interpretation(P, G, {"X": "G"}, {"pt": "[y:G] mul(y, y) = e"})
    with pytest.raises(NotFunctional):
        reduct(klein(), I)


def test_rename_theory_keeps_models():
    T = rename_theory(G, {"G": "H"}, {"mul": "times"})
    assert "times" in T.signature.function_names
    assert len(enumerate_models(T, 4)) == 5
    assert {canonical_form(M) for M in enumerate_models(T, 3)} != set()


def test_propositional_morleyization():
    R = morleyize(PROP)
    assert R.symbols and all(not ax.classical for ax in R.theory.axioms)
