"""Flows, tables and moves for group-based models on claw trees."""

__version__ = "0.1.0"

from .group import GroupSpec, parse_group
from .tables import Table, column_signature, compatible, canonicalize, parse_table, parse_pair
from .moves import Move, QuadraticMoveSpec, apply_move, make_quadratic_move, find_zero_sum_subset
from .fibers import FiberKey, markov_width, phi_evidence, min_connecting_degree, enumerate_fiber
from .reducer import ReducerConfig, connect_tables
from .certify import Certificate, parse_certificate, verify_certificate

__all__ = [
    "GroupSpec", "parse_group", "Table", "column_signature", "compatible", "canonicalize",
    "parse_table", "parse_pair", "Move", "QuadraticMoveSpec", "apply_move", "make_quadratic_move",
    "find_zero_sum_subset", "FiberKey", "markov_width", "phi_evidence", "min_connecting_degree",
    "enumerate_fiber", "ReducerConfig", "connect_tables", "Certificate", "parse_certificate",
    "verify_certificate",
]
