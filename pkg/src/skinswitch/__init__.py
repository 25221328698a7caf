"""Non-Hermitian lattice simulations: skin-effect metrics, spectral winding,
boundary interpolation, and non-unitary wavepacket dynamics."""

__version__ = "0.1.0"

from .models import (BoundarySpec, Geometry, HoppingModel, HoppingTerm,
                     benchmark_model, bloch_matrix, kagome_model,
                     one_band_model, real_space_matrix, size_model,
                     supercell_matrix, three_band_model)
from .spectral import (EigenSystem, SkinReport, SpectralLoop, classify_modes,
                       dominant_mode, eigendecompose, hausdorff_distance,
                       mean_x_ipr, pbc_loop, winding_number,
                       winding_skin_correspondence, x_ipr, x_ipr_spectrum,
                       y_marginal_density)
from .dynamics import Trajectory, WavepacketState, center_of_mass, evolve, initial_state

__all__ = [
    "__version__",
    "BoundarySpec", "Geometry", "HoppingModel", "HoppingTerm",
    "one_band_model", "size_model", "benchmark_model", "three_band_model",
    "kagome_model", "bloch_matrix", "real_space_matrix", "supercell_matrix",
    "EigenSystem", "SkinReport", "SpectralLoop", "eigendecompose",
    "x_ipr", "x_ipr_spectrum", "mean_x_ipr", "classify_modes",
    "dominant_mode", "y_marginal_density", "pbc_loop", "winding_number",
    "winding_skin_correspondence", "hausdorff_distance",
    "WavepacketState", "Trajectory", "initial_state", "center_of_mass",
    "evolve",
]
