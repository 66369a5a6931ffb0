from cohlab import corpus
from cohlab.dsl import parse_theory
from cohlab.mace import find_model, search_models, search_sizes, size_vectors
from cohlab.models import canonical_form, is_model

import oracles

G = corpus.theory("groups")


def test_size_vectors_are_ordered_by_total():
    T = parse_theory("theory t\nsort A\nsort B\n")
    vecs = size_vectors(T, {"A": 1, "B": 2})
    assert vecs[0] == {"A": 0, "B": 0}
    assert [sum(v.values()) for v in vecs] == sorted(sum(v.values()) for v in vecs)
    assert len(vecs) == 6


def test_every_found_structure_is_a_model():
    for M in search_models(corpus.theory("posets"), {"P": 3}):
        assert is_model(M, corpus.theory("posets"))


def test_order_four_groups_cover_both_classes():
    forms = {canonical_form(M) for M in search_sizes(G, {"G": 4})}
    assert len(forms) == 2


def test_search_reaches_every_poset_class():
    forms = {canonical_form(M) for M in search_models(corpus.theory("posets"), {"P": 3})}
    assert len(forms) == oracles.poset_classes(3)


def test_inconsistent_theory_has_no_model():
    T = parse_theory("theory t\nsort X\nfunc c : -> X\nrel P : X\naxiom [] true |- P(c)\naxiom [x:X] P(x) |- false\n")
    assert find_model(T, {"X": 3}) is None


def test_existential_and_disjunctive_axioms():
    T = parse_theory("theory t\nsort X\nrel P : X\nrel Q : X\n"
                     "axiom [] true |- exists x:X. P(x)\n"
                     "axiom [x:X] true |- P(x) \\/ Q(x)\n"
                     "axiom [x:X] P(x) /\\ Q(x) |- false\n")
    models = list(search_models(T, {"X": 2}))
    assert models and all(is_model(M, T) for M in models)
    assert all(M.sizes["X"] >= 1 for M in models)


def test_empty_carrier_allowed_without_constants():
    T = corpus.theory("bare_sort")
    sizes = sorted(M.sizes["X"] for M in search_models(T, {"X": 2}))
    assert sizes[0] == 0
