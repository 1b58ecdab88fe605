"""Existential and positive normal forms."""

from __future__ import annotations

from .formula import (
    AU,
    AUt,
    AX,
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
)


def _neg(f: Formula) -> Formula:
    # Only used for negations introduced by a rewrite; user-written
    # double negations are left alone.
    return f.arg if isinstance(f, Not) else Not(f)


def to_enf(f: Formula) -> Formula:
    """Rewrite into E-only form over true, atoms, not, and, EX, EU, EUt."""
    if isinstance(f, (Top, Atom)):
        return f
    if isinstance(f, Bottom):
        return Not(TOP)
    if isinstance(f, Not):
        return Not(to_enf(f.arg))
    if isinstance(f, EX):
        return EX(to_enf(f.arg))
    if isinstance(f, AX):
        return Not(EX(_neg(to_enf(f.arg))))
    a, b = to_enf(f.left), to_enf(f.right)
    if isinstance(f, And):
        return And(a, b)
    if isinstance(f, Or):
        return Not(And(_neg(a), _neg(b)))
    if isinstance(f, EU):
        return EU(a, b)
    if isinstance(f, EUt):
        return EUt(a, b)
    if isinstance(f, AU):
        return Not(EUt(_neg(a), _neg(b)))
    if isinstance(f, AUt):
        return Not(EU(_neg(a), _neg(b)))
    raise TypeError(f"not a formula: {f!r}")


# Dual of each connective under negation.
_DUAL = {And: Or, Or: And, EX: AX, AX: EX, EU: AUt, AUt: EU, AU: EUt, EUt: AU}


def to_pnf(f: Formula, negated: bool = False) -> Formula:
    """Push negations down to atoms and true."""
    if isinstance(f, Top):
        return Not(TOP) if negated else TOP
    if isinstance(f, Bottom):
        return TOP if negated else Not(TOP)
    if isinstance(f, Atom):
        return Not(f) if negated else f
    if isinstance(f, Not):
        return to_pnf(f.arg, not negated)
    kind = _DUAL[type(f)] if negated else type(f)
    if isinstance(f, (EX, AX)):
        return kind(to_pnf(f.arg, negated))
    return kind(to_pnf(f.left, negated), to_pnf(f.right, negated))
