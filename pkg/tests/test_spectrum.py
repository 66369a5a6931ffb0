import itertools

import pytest
from hypothesis import given, strategies as st

from cohlab import corpus
from cohlab.dsl import parse_formula
from cohlab.logic import Context
from cohlab.models import automorphisms, enumerate_models
from cohlab.spectrum import (
    Arrow, BasicOpen, SpectrumGroupoid, SpectrumPoint, arrow_closure, closure_leq,
    connected_components, default_parameters, identity_arrow, in_open, in_open_by_eval,
    indistinguishable, label_respecting_homs, open_inclusion_witness, reassign,
)

import oracles
import strategies
from structures import cyclic, klein, poset

G = corpus.theory("groups")
P = corpus.theory("posets")


def f(text, T=G):
    return parse_formula(text, T.signature)


def pt(M, **labels):
    (s,) = M.signature.sorts
    return SpectrumPoint.of(M, {k: (s, v) for k, v in labels.items()})


def test_point_validation():
    with pytest.raises(ValueError, match="outside"):
        pt(cyclic(2), k=2)
    p = pt(cyclic(3), b=1, a=2)
    assert p.env == (("a", "G", 2), ("b", "G", 1))
    assert p.params == (("a", "G"), ("b", "G"))


def test_basic_open_membership():
    p = pt(cyclic(2), k=1)
    assert in_open(p, BasicOpen(f("[x:G] x = x"), ("k",)))
    assert not in_open(p, BasicOpen(f("[x:G] mul(x, x) = x"), ("k",)))
    # undefined parameter: outside every open that mentions it
    assert not in_open(p, BasicOpen(f("[x:G] x = x"), ("j",)))
    assert in_open(p, BasicOpen(f("[] exists y:G. mul(y, y) = y"), ()))


def test_open_parameter_sorts_must_agree():
    with pytest.raises(ValueError):
        BasicOpen(f("[x:G, y:G] x = y"), ("k",))


def test_reassign():
    p = pt(cyclic(3), k=1, j=2)
    q = reassign(p, ["k"], ["j"], [("G", 0)])
    assert q.as_dict() == {"k": ("G", 1), "j": ("G", 0)}
    with pytest.raises(ValueError, match="disjoint"):
        reassign(p, ["k"], ["k"], [("G", 0)])
    with pytest.raises(ValueError, match="undefined"):
        reassign(p, ["z"], ["j"], [("G", 0)])


@given(st.data())
def test_satisfaction_recursion_matches_evaluation(data):
    ctx = data.draw(strategies.contexts(P.signature))
    phi = data.draw(strategies.formulas(P.signature, ctx, depth=3))
    M = data.draw(st.sampled_from(enumerate_models(P, 3).models))
    labels = ["k0", "k1", "k2"]
    params = data.draw(st.tuples(*[st.sampled_from(labels)] * len(ctx)))
    env = {k: ("P", data.draw(st.integers(0, max(M.sizes["P"] - 1, 0))))
           for k in labels if M.sizes["P"] and data.draw(st.booleans())}
    p = SpectrumPoint.of(M, env)
    U = BasicOpen(phi, params)
    assert in_open(p, U) == in_open_by_eval(p, U)


def test_closure_carries_labels():
    h = closure_leq(pt(cyclic(2), k=1), pt(cyclic(4), k=2))
    assert h is not None and h("G", 1) == 2
    assert closure_leq(pt(cyclic(2), k=1), pt(cyclic(4), k=1)) is None
    assert closure_leq(pt(cyclic(2), k=1), pt(cyclic(3), k=1)) is None
    # the unlabelled Z2 maps into Z3 trivially
    assert closure_leq(pt(cyclic(2)), pt(cyclic(3))) is not None


def test_closure_needs_every_label():
    assert closure_leq(pt(cyclic(2), k=0), pt(cyclic(2))) is None
    assert closure_leq(pt(cyclic(2)), pt(cyclic(2), k=0)) is not None


def test_closure_agrees_with_brute_force_on_posets():
    mc = enumerate_models(P, 3)
    G3 = SpectrumGroupoid.build(P, mc.models, 1)
    for mu, nu in itertools.product(G3.points, repeat=2):
        assert (closure_leq(mu, nu) is not None) == bool(oracles.label_respecting(mu, nu))
        assert len(label_respecting_homs(mu, nu)) == len(oracles.label_respecting(mu, nu))


def test_indistinguishable_points():
    assert indistinguishable(pt(klein(), k=1), pt(klein(), k=2))
    assert not indistinguishable(pt(cyclic(4), k=1), pt(cyclic(4), k=2))


def test_default_parameters():
    assert default_parameters(G, 2) == [("k0", "G"), ("k1", "G")]
    from cohlab.dsl import parse_theory
    two = parse_theory("theory t\nsort A\nsort B\n")
    assert default_parameters(two, 1) == [("k0_A", "A"), ("k0_B", "B")]


def test_groupoid_points_and_arrows():
    mc = enumerate_models(G, 3)
    S = SpectrumGroupoid.build(G, mc.models, 1)
    # every model contributes the unlabelled point plus one per element
    assert len(S.points) == sum(1 + M.sizes["G"] for M in mc.models)
    arrows = list(S.arrows())
    per_model = {M: len(automorphisms(M)) for M in mc.models}
    expect = sum(per_model[M] * (1 + M.sizes["G"]) ** 2 for M in mc.models)
    assert len(arrows) == expect


def test_arrow_closure():
    a = identity_arrow(pt(cyclic(2), k=1))
    b = identity_arrow(pt(cyclic(4), k=2))
    assert arrow_closure(a, a)
    assert arrow_closure(a, b)
    flip = [h for h in automorphisms(cyclic(4)) if not h.is_identity()][0]
    c = Arrow(pt(cyclic(4), k=1), pt(cyclic(4), k=3), flip)
    assert arrow_closure(c, c) and arrow_closure(c.inverse(), c.inverse())
    assert c.compose(c.inverse()).iso.is_identity()


def test_components_and_sentences():
    mc = enumerate_models(P, 2)
    S = SpectrumGroupoid.build(P, mc.models, 1)
    comps = connected_components(S, [f("[] exists x:P. x = x", P)])
    assert sum(len(c["points"]) for c in comps) == len(S.points)
    # the empty poset maps everywhere, so everything is connected
    assert len(comps) == 1 and comps[0]["sentences"] == []


def test_open_inclusion_witness_is_proved():
    U = BasicOpen(f("[x:G] mul(x, x) = x"), ("k0",))
    V = BasicOpen(f("[x:G] x = e"), ("k0",))
    S = SpectrumGroupoid.build(G, enumerate_models(G, 3).models, 1)
    seq, outcome = open_inclusion_witness(U, V, S.points, G)
    assert outcome.proved
    assert open_inclusion_witness(V, BasicOpen(f("[x:G] mul(x, x) = e"), ("k0",)), S.points, G)[1].proved
    assert open_inclusion_witness(BasicOpen(f("[x:G] x = x"), ("k0",)), V, S.points, G) is None


def test_outputs_are_deterministic():
    mc = enumerate_models(P, 2)
    a = SpectrumGroupoid.build(P, mc.models, 1)
    b = SpectrumGroupoid.build(P, mc.models, 1)
    assert a.to_json() == b.to_json() and a.to_dot() == b.to_dot()
    assert a.to_dot().startswith("digraph")
