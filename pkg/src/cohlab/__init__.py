"""Finite-scale tools for coherent theories, their models and spectra."""

from .logic import Context, Formula, ClassicalFormula, Sequent, Signature, Theory, Interpretation
from .dsl import parse_theory, parse_formula, parse_sequent, load_theory
from .models import FiniteStructure, Homomorphism, evaluate, enumerate_models, is_model
from .prover import Bounds, prove

__all__ = [
    "Context", "Formula", "ClassicalFormula", "Sequent", "Signature", "Theory", "Interpretation",
    "parse_theory", "parse_formula", "parse_sequent", "load_theory",
    "FiniteStructure", "Homomorphism", "evaluate", "enumerate_models", "is_model",
    "Bounds", "prove",
]
