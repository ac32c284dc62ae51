"""Proof nets for nondeterministic MALL.

Formulas, weighted proof structures, the switching criterion, sequent
proofs in both directions, lazy cut elimination with branching, and a
one-step encoding of nondeterministic Turing machines.
"""

from .correctness import NetVerdict, is_proof_net
from .formula import dual, parse_formula, print_formula
from .reduction import isomorphic, normalize_all, reduce_step
from .sequent import check_proof, desequentialize, parse_proof, print_proof, sequentialize
from .structure import ProofStructure, parse_structure, serialize_structure, validate

__version__ = "0.1.0"

__all__ = [
    "NetVerdict",
    "ProofStructure",
    "check_proof",
    "desequentialize",
    "dual",
    "is_proof_net",
    "isomorphic",
    "normalize_all",
    "parse_formula",
    "parse_proof",
    "parse_structure",
    "print_formula",
    "print_proof",
    "reduce_step",
    "sequentialize",
    "serialize_structure",
    "validate",
]
