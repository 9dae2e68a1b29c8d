"""Airy kernel, Tracy-Widom determinants, the commuting Sturm-Liouville
operator and the GUE Hermite kernel at the soft edge."""
from .airy import airy, airy_error_bound, airy_kernel, airy_kernel_matrix, airy_pair
from .gue import (
    CommutingSearch,
    EdgeReport,
    airy_commuting_search,
    commuting_search,
    commuting_search_gue,
    commuting_search_matrix,
    edge_scaling_check,
    edge_scaling_sweep,
    gue_kernel,
    gue_kernel_matrix,
    hermite_phi,
    hermite_phi_table,
    question2_record,
)
from .nystrom import (
    DiscretizedKernel,
    TWValue,
    airy_nystrom,
    f2_record,
    hankel_matrix,
    hankel_square_residual,
    nystrom,
    tw_distribution,
    tw_table,
)
from .operators import CommutationReport, Grid, LTWEigensystem, commutation_check, ltw_eigensystem, ltw_matrix

__all__ = [
    "airy", "airy_error_bound", "airy_kernel", "airy_kernel_matrix", "airy_pair",
    "CommutingSearch", "EdgeReport", "airy_commuting_search", "commuting_search", "commuting_search_gue",
    "commuting_search_matrix",
    "edge_scaling_check", "edge_scaling_sweep", "gue_kernel", "gue_kernel_matrix", "hermite_phi",
    "hermite_phi_table", "question2_record", "DiscretizedKernel", "TWValue", "airy_nystrom", "f2_record",
    "hankel_matrix", "hankel_square_residual", "nystrom", "tw_distribution", "tw_table",
    "CommutationReport", "Grid", "LTWEigensystem", "commutation_check", "ltw_eigensystem", "ltw_matrix",
]
