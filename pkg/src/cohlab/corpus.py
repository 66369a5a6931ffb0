"""Bundled example theories."""

from functools import lru_cache
from importlib import resources

from .dsl import parse_theory

NAMES = ("groups", "abelian_groups", "pointed_sets", "posets", "unary_predicate", "bare_sort")


@lru_cache(maxsize=None)
def theory(name: str):
    if name not in NAMES:
        raise KeyError(f"no bundled theory named {name!r}")
    text = resources.files("cohlab").joinpath("theories", f"{name}.thy").read_text(encoding="utf-8")
    return parse_theory(text)


def theory_path(name: str) -> str:
    return str(resources.files("cohlab").joinpath("theories", f"{name}.thy"))
