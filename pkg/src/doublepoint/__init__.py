"""Invariants and normal forms of double points of immersed submanifolds in symplectic space."""
__version__ = "0.1.0"

from .errors import DoublePointError
from .hamiltonians import check_g7, intersection_chart, omega_q, sample_hamiltonians
from .ingest import GermPair, linear_germ_pair, load_file, load_germ_pair
from .invariants import (LinearTuple, analyze, analyze_linear, characteristic_numbers,
                         decide_equivalence, linearize, moduli_count, reduce, s_value)
from .linalg import DEFAULT_TOL, Subspace, ToleranceConfig
from .normal_forms import NormalFormSpec, roundtrip_verify, synthesize, synthesize_doc
