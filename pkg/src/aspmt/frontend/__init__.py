"""Action description front end: parsing, printing and pre-translation passes."""

from .laws import ActionDescription, CausalLaw, IncrementLaw, Query, StepConstraint
from .parser import parse, parse_file, parse_formula
from .printer import show_description, show_law, show_query
from .transform import (
    check_definite,
    desugar,
    expand_increments,
    ground_constants,
    ground_laws,
    prepare,
)

__all__ = [
    "ActionDescription", "CausalLaw", "IncrementLaw", "Query", "StepConstraint",
    "parse", "parse_file", "parse_formula",
    "show_description", "show_law", "show_query",
    "desugar", "expand_increments", "ground_laws", "check_definite", "prepare", "ground_constants",
]
