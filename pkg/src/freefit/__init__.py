"""Free-fermion descriptions of interacting lattice ground states.

Exact diagonalisation of Hubbard chains, entanglement spectra, the
interaction distance, Kohn-Sham inversion and the optimal entanglement
model for the half-filled Hubbard dimer.
"""

__version__ = "0.1.0"

from .dimer import DimerSolution, df_dimer_asymptotic, df_dimer_closed, dimer_closed_form, dimer_entanglement_spectrum
from .entanglement import (
    DensityMatrixBlock,
    EntanglementSpectrum,
    entropy,
    local_densities,
    natural_metric,
    reduced_density_matrix,
    trace_distance_matrices,
    trace_distance_spectra,
)
from .errors import FreefitError
from .hamiltonians import AuxParams, HubbardParams, build_aux_dimer, build_free_spinful, build_hubbard
from .hilbert import build_sector_basis, build_spinless_basis
from .idistance import DfResult, FreeSpectrumParams, MinimizerOptions, df_four_level, df_numeric, free_spectrum_from_params
from .kohnsham import invert_dimer, invert_iterative, ks_reduced_density_matrix
from .optmodel import aux_ground_spectrum, mu_from_levels, optimal_state, verify_observable_bound, verify_triangle

__all__ = [
    "AuxParams",
    "DensityMatrixBlock",
    "DfResult",
    "DimerSolution",
    "EntanglementSpectrum",
    "FreeSpectrumParams",
    "FreefitError",
    "HubbardParams",
    "MinimizerOptions",
    "aux_ground_spectrum",
    "build_aux_dimer",
    "build_free_spinful",
    "build_hubbard",
    "build_sector_basis",
    "build_spinless_basis",
    "df_dimer_asymptotic",
    "df_dimer_closed",
    "df_four_level",
    "df_numeric",
    "dimer_closed_form",
    "dimer_entanglement_spectrum",
    "entropy",
    "free_spectrum_from_params",
    "invert_dimer",
    "invert_iterative",
    "ks_reduced_density_matrix",
    "local_densities",
    "mu_from_levels",
    "natural_metric",
    "optimal_state",
    "reduced_density_matrix",
    "trace_distance_matrices",
    "trace_distance_spectra",
    "verify_observable_bound",
    "verify_triangle",
]
