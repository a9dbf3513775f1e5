"""Proof-generating BDD bucket elimination for SAT, with pigeonhole benchmarks."""

from .bdd import L0, L1, NodeStore, ResourceLimit
from .cnf import (
    Cnf,
    DimacsError,
    Permutation,
    PhpLayout,
    gen_php,
    gen_php_satisfiable,
    ordering,
    parse_dimacs,
    serialize_dimacs,
)
from .proof import Justifier, ProofLog, ProofStep, check_proof, clause_metric
from .solver import SolveOptions, SolveResult, Verdict, solve

__all__ = [
    "L0", "L1", "NodeStore", "ResourceLimit",
    "Cnf", "DimacsError", "Permutation", "PhpLayout",
    "gen_php", "gen_php_satisfiable", "ordering", "parse_dimacs", "serialize_dimacs",
    "Justifier", "ProofLog", "ProofStep", "check_proof", "clause_metric",
    "SolveOptions", "SolveResult", "Verdict", "solve",
]
