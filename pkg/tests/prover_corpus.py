"""Fifty sequents with known answers: 25 derivable, 25 refutable by a small model."""

from cohlab import corpus
from cohlab.dsl import parse_sequent, parse_theory

SPLIT = parse_theory("""theory split
sort X
rel P : X
rel Q : X
axiom [x:X] true |- P(x) \\/ Q(x)
axiom [x:X] Q(x) |- false
""")

PREDICATE = parse_theory("""theory predicate
sort X
rel P : X
""")

CHAIN = parse_theory("""theory chain
sort X
rel A : X
rel B : X
rel C : X
rel D : X
axiom [x:X] A(x) |- B(x)
axiom [x:X] B(x) |- C(x) \\/ D(x)
axiom [x:X] C(x) |- false
""")

PROVED = [
    ("groups", "[x:G] true |- exists y:G. mul(x, y) = e"),
    ("groups", "[x:G] true |- mul(x, e) = x"),
    ("groups", "[] true |- inv(e) = e"),
    ("groups", "[x:G] true |- inv(inv(x)) = x"),
    ("groups", "[x:G, y:G] true |- inv(mul(x, y)) = mul(inv(y), inv(x))"),
    ("groups", "[x:G, y:G, z:G] mul(x, y) = mul(x, z) |- y = z"),
    ("groups", "[x:G] mul(x, x) = x |- x = e"),
    ("groups", "[x:G, y:G] mul(x, y) = e |- y = inv(x)"),
    ("groups", "[x:G] true |- exists y:G. mul(y, x) = x"),
    ("groups", "[x:G, y:G, z:G] x = y |- mul(x, z) = mul(y, z)"),
    ("abelian_groups", "[x:G] true |- add(x, zero) = x"),
    ("abelian_groups", "[x:G] true |- exists y:G. add(x, y) = zero"),
    ("abelian_groups", "[x:G, y:G] true |- add(x, y) = add(y, x)"),
    ("posets", "[x:P, y:P, z:P] le(x, y) /\\ le(y, z) |- le(x, z)"),
    ("posets", "[x:P] true |- le(x, x)"),
    ("posets", "[x:P, y:P] le(x, y) /\\ le(y, x) |- x = y"),
    ("posets", "[x:P, y:P, z:P] le(x, y) /\\ x = z |- le(z, y)"),
    ("pointed_sets", "[] true |- exists y:X. y = pt"),
    ("pointed_sets", "[x:X, y:X] x = pt /\\ y = pt |- x = y"),
    ("bare_sort", "[x:X, y:X] x = y |- y = x"),
    ("bare_sort", "[x:X] true |- exists y:X. x = y"),
    ("split", "[x:X] true |- P(x)"),
    ("split", "[x:X] P(x) \\/ Q(x) |- P(x)"),
    ("chain", "[x:X] A(x) |- D(x)"),
    ("chain", "[x:X] B(x) /\\ C(x) |- false"),
]

REFUTED = [
    ("groups", "[x:G] true |- x = e"),
    ("groups", "[x:G] true |- mul(x, x) = e"),
    ("groups", "[x:G] mul(x, x) = e |- x = e"),
    ("groups", "[x:G] true |- exists y:G. mul(y, y) = x"),
    ("groups", "[x:G] x = inv(x) |- x = e"),
    ("groups", "[] true |- false"),
    ("abelian_groups", "[x:G] true |- x = zero"),
    ("abelian_groups", "[x:G] true |- add(x, x) = zero"),
    ("abelian_groups", "[x:G] true |- exists y:G. add(y, y) = x"),
    ("posets", "[x:P, y:P] true |- le(x, y)"),
    ("posets", "[x:P, y:P] true |- x = y"),
    ("posets", "[x:P, y:P] le(x, y) |- x = y"),
    ("posets", "[x:P, y:P] true |- le(x, y) \\/ le(y, x)"),
    ("posets", "[x:P, y:P] le(x, y) |- le(y, x)"),
    ("posets", "[x:P, y:P] true |- exists z:P. le(x, z) /\\ le(y, z)"),
    ("pointed_sets", "[x:X] true |- x = pt"),
    ("pointed_sets", "[] true |- false"),
    ("bare_sort", "[x:X, y:X] true |- x = y"),
    ("bare_sort", "[] true |- exists y:X. true"),
    ("split", "[x:X] true |- Q(x)"),
    ("split", "[x:X, y:X] true |- x = y"),
    ("predicate", "[x:X] true |- P(x)"),
    ("predicate", "[x:X, y:X] P(x) |- P(y)"),
    ("chain", "[x:X] true |- B(x)"),
    ("chain", "[x:X] D(x) |- A(x)"),
]

LOCAL = {"split": SPLIT, "predicate": PREDICATE, "chain": CHAIN}


def theory(name):
    return LOCAL[name] if name in LOCAL else corpus.theory(name)


def cases():
    """(theory, sequent, expected status) for all fifty entries, in a fixed order."""
    out = []
    for items, status in ((PROVED, "proved"), (REFUTED, "countermodel")):
        for name, text in items:
            T = theory(name)
            out.append((name, T, parse_sequent(text, T.signature), status))
    return out
