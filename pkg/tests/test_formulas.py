import re

from hypothesis import given, strategies as st

from cohlab import corpus
from cohlab.formulas import (
    FormulaEnumerator, atoms, class_fingerprint, formula_corpus, standard_contexts,
)
from cohlab.logic import Context, Exists, format_node, free_vars
from cohlab.models import enumerate_models, evaluate

G = corpus.theory("groups")
P = corpus.theory("posets")
X1 = Context((("x0", "G"),))


def test_atoms_over_variables_come_first():
    shown = [format_node(a) for a in atoms(G.signature, X1)]
    assert shown[:5] == ["true", "false", "mul(x0, x0) = x0", "inv(x0) = x0", "e = x0"]
    mentions = [bool(re.search(r"\be\b", s)) for s in shown[2:]]
    assert mentions == sorted(mentions)


def test_constant_equations_are_not_repeated():
    T = corpus.theory("pointed_sets")
    shown = [format_node(a) for a in atoms(T.signature, Context(()))]
    assert shown == ["true", "false"]


def test_standard_contexts():
    ctxs = standard_contexts(P.signature, 2)
    assert [c.names for c in ctxs] == [(), ("x0",), ("x0", "x1")]


def test_levels_have_exact_depth_and_no_repeats():
    en = FormulaEnumerator(P.signature)
    ctx = Context((("x0", "P"),))
    for d in (1, 2, 3):
        level = en.level(ctx, d)
        assert len(set(level)) == len(level)
        from cohlab.logic import depth
        assert all(depth(b) == d for b in level)


def test_quantifiers_bind_used_variables():
    en = FormulaEnumerator(P.signature)
    for b in en.level(Context((("x0", "P"),)), 3):
        if isinstance(b, Exists):
            assert b.var in free_vars(b.body)


def test_classical_enumeration_includes_negation():
    U = corpus.theory("unary_predicate")
    en = FormulaEnumerator(U.signature, classical=True)
    assert any(type(b).__name__ == "Not" for b in en.level(Context((("x0", "X"),)), 2))


def test_dedup_keeps_every_extension():
    mc = enumerate_models(P, 3)
    fp = class_fingerprint(mc.models)
    ctx = Context((("x0", "P"), ("x1", "P")))
    full = FormulaEnumerator(P.signature).upto(ctx, 3)
    kept = FormulaEnumerator(P.signature, False, fp).upto(ctx, 3)
    assert {fp(f) for f in kept} == {fp(f) for f in full}
    assert len({fp(f) for f in kept}) == len(kept) < len(full)


def test_corpus_is_extension_distinct():
    mc = enumerate_models(G, 3)
    fs = formula_corpus(G.signature, mc.models, d=2)
    fp = class_fingerprint(mc.models)
    for ctx in standard_contexts(G.signature):
        sub = [f for f in fs if f.context == ctx]
        assert len({fp(f) for f in sub}) == len(sub)


@given(st.integers(1, 3))
def test_enumeration_is_deterministic(d):
    a = FormulaEnumerator(G.signature).upto(X1, d)
    b = FormulaEnumerator(G.signature).upto(X1, d)
    assert a == b


def test_every_formula_evaluates():
    mc = enumerate_models(P, 2)
    for f in FormulaEnumerator(P.signature).upto(Context((("x0", "P"),)), 2):
        for M in mc.models:
            assert evaluate(M, f).tuples <= {(a,) for a in range(M.sizes["P"])}
