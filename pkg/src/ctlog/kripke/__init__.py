"""Kripke structures, Kripke-schema databases and the maps between them."""

from .database import (
    RelationalDatabase,
    SchemaError,
    db_to_kripke,
    domain_of,
    kripke_to_db,
    lexicographic,
    parse_database,
    sibling_encoding,
    split_outdegree2,
    total_closure,
    unary_name,
)
from .structure import KripkeStructure, StructureError, disjoint_union
from .textio import KripkeSyntaxError, parse_kripke, render_kripke

__all__ = [
    "KripkeStructure",
    "KripkeSyntaxError",
    "RelationalDatabase",
    "SchemaError",
    "StructureError",
    "db_to_kripke",
    "disjoint_union",
    "domain_of",
    "kripke_to_db",
    "lexicographic",
    "parse_database",
    "parse_kripke",
    "render_kripke",
    "sibling_encoding",
    "split_outdegree2",
    "total_closure",
    "unary_name",
]
