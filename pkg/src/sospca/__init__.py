"""Degree-4 sum-of-squares pseudo-moment certificates for sparse PCA detection."""
from .certificate import (
    Certificate,
    CertificateParams,
    ErrorMatrices,
    build_degree2,
    build_exact_moment,
    build_P_gram,
    build_Q,
    compute_error_matrices,
    restrict_certificate,
)
from .datagen import (
    DataMatrix,
    ModelParams,
    SparseSpike,
    empirical_covariance,
    normalize_rows,
    sample_h0,
    sample_hv,
    sample_spike,
)
from .moments import MatrixForm, MomentTable, assemble_matrix_form, canonicalize, min_eigenvalue

__version__ = "0.1.0"
