"""Verbose persistence diagrams for (marked) point clouds.

Computes verbose diagrams by boundary-matrix reduction over F2 or an odd
prime field, extended persistent Betti numbers by two independent routes,
matching distances between diagrams, and seeded stochastic experiments
over growing windows.
"""

from .diagram import (BinnedMeasure, DiagramDistanceReport, bin_measure, d_inf,
                      matching_distance, mean_measure, measure_discrepancy,
                      total_mass, translate_diagram)
from .errors import BudgetExceededError, CloudFormatError, ConfigError
from .filtration import (CechFiltration, FilteredComplex, FiltrationFunction,
                         RipsFiltration, ShiftedFiltration,
                         build_filtered_complex, filtration_by_name, shift_kappa)
from .geometry import (MarkedPoint, MarkedPointCloud, hausdorff_distance,
                       min_enclosing_ball, min_enclosing_ball_radius,
                       min_separation, read_cloud_csv, write_cloud_csv)
from .homology import (BoundaryMatrix, ExtendedPBNQuery, Reduction,
                       VerboseDiagram, boundary_dim, boundary_matrix,
                       concise_diagram, cycle_dim, epbn_diagram, epbn_rank,
                       read_diagrams_csv, reduce, verbose_diagram,
                       write_diagrams_csv)
from .stochastic import (ExperimentConfig, ExperimentReport, WindowSpec,
                         config_from_dict, run_clt, run_experiment, run_slln,
                         run_stability, run_support_check, run_total_mass,
                         sample_marked_poisson, sample_perturbed_lattice,
                         sample_poisson_box, substream)

__version__ = "0.1.0"

__all__ = [
    "BinnedMeasure", "BoundaryMatrix", "BudgetExceededError", "CechFiltration",
    "CloudFormatError", "ConfigError", "DiagramDistanceReport",
    "ExperimentConfig", "ExperimentReport", "ExtendedPBNQuery",
    "FilteredComplex", "FiltrationFunction", "MarkedPoint", "MarkedPointCloud",
    "Reduction", "RipsFiltration", "ShiftedFiltration", "VerboseDiagram",
    "WindowSpec", "bin_measure", "boundary_dim", "boundary_matrix",
    "build_filtered_complex", "concise_diagram", "config_from_dict",
    "cycle_dim", "d_inf", "epbn_diagram", "epbn_rank", "filtration_by_name",
    "hausdorff_distance", "matching_distance", "mean_measure",
    "measure_discrepancy", "min_enclosing_ball", "min_enclosing_ball_radius",
    "min_separation", "read_cloud_csv", "read_diagrams_csv", "reduce",
    "run_clt", "run_experiment", "run_slln", "run_stability",
    "run_support_check", "run_total_mass", "sample_marked_poisson",
    "sample_perturbed_lattice", "sample_poisson_box", "shift_kappa",
    "substream", "total_mass", "translate_diagram", "verbose_diagram",
    "write_cloud_csv", "write_diagrams_csv",
]
