"""Stratified Datalog and Datalog with bounded counters."""

from .analysis import (
    NotStratifiableError,
    ProgramError,
    SortError,
    Stratification,
    UnsafeRuleError,
    check_program,
    check_safety,
    dependency_graph,
    evaluation_order,
    stratify,
)
from .engine import EvaluationError, evaluate, evaluate_succ, goal_ids
from .naive import naive_evaluate
from .parser import DatalogSyntaxError, parse_program, render_program, render_rule
from .syntax import CMAX, Atom, Const, Int, Leq, Literal, Pred, Program, Rule, Var

__all__ = [
    "CMAX", "Atom", "Const", "DatalogSyntaxError", "EvaluationError", "Int", "Leq",
    "Literal", "NotStratifiableError", "Pred", "Program", "ProgramError", "Rule",
    "SortError", "Stratification", "UnsafeRuleError", "Var", "check_program",
    "check_safety", "dependency_graph", "evaluate", "evaluate_succ", "evaluation_order",
    "goal_ids", "naive_evaluate", "parse_program", "render_program", "render_rule", "stratify",
]
