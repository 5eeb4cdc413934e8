"""Schwarz-type preconditioners for structured matrix sequences and
spectral diagnostics against their reference symbols."""
from .assembly import Assembled, ProblemSpec, assemble
from .krylov import SolveReport, cg, gmres
from .partition import NotAdmissible, Partition, is_admissible, make_partition
from .schwarz import KINDS, SchwarzPreconditioner, setup
from .spectra import cluster_count, compare_to_symbol, eigenvalues_dense, spectrum_of
from .symbols import Symbol, eval_symbol, fourier_coeffs, symbol_eig_branches

__version__ = "0.1.0"

__all__ = [
    "Assembled",
    "ProblemSpec",
    "assemble",
    "SolveReport",
    "cg",
    "gmres",
    "NotAdmissible",
    "Partition",
    "is_admissible",
    "make_partition",
    "KINDS",
    "SchwarzPreconditioner",
    "setup",
    "cluster_count",
    "compare_to_symbol",
    "eigenvalues_dense",
    "spectrum_of",
    "Symbol",
    "eval_symbol",
    "fourier_coeffs",
    "symbol_eig_branches",
]
