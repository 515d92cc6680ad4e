"""Numerical Weyl quantization with dimension-robust operator-norm bounds."""

from .bounds import HSpec, check_hypothesis_H, fit_hypothesis_H, theoretical_bound
from .dsl import SymbolContext, SymbolExpr, diff_symbol, eval_symbol, parse_symbol, sample_symbol
from .lattice import LatticeSpec, example_constants, gibbs_symbol, lattice_hamiltonian, mean_field_hamiltonian
from .phase import PhaseGrid, PhasePoint, SpatialGrid, SubsetE, reference_grids
from .quantize import anti_wick_quantize, operator_norm, weyl_quantize

__version__ = "0.1.0"
