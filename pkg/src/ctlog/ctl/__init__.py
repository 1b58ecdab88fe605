"""CTL formulas: syntax, normal forms and evaluation."""

from .checker import ModelCheckError, model_check, truth_mask
from .formula import (
    AU,
    AUt,
    AX,
    BOTTOM,
    EU,
    EUt,
    EX,
    TOP,
    And,
    Atom,
    Bottom,
    Formula,
    Not,
    Or,
    Top,
    atoms,
    depth,
    is_enf,
    is_pnf,
    size,
    subformulas,
)
from .normal import to_enf, to_pnf
from .oracle import OracleBoundError, truth_oracle
from .parser import FormulaSyntaxError, parse_formula, render_formula

__all__ = [
    "AU", "AUt", "AX", "BOTTOM", "EU", "EUt", "EX", "TOP", "And", "Atom", "Bottom",
    "Formula", "FormulaSyntaxError", "ModelCheckError", "Not", "Or", "OracleBoundError",
    "Top", "atoms", "depth", "is_enf", "is_pnf", "model_check", "parse_formula",
    "render_formula", "size", "subformulas", "to_enf", "to_pnf", "truth_mask",
    "truth_oracle",
]
