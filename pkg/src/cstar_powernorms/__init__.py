"""Power-norms, multi-norms and summing norms on Hilbert C*-modules.

The algebra is a finite direct sum of matrix blocks, A = M_{k_1} + ... + M_{k_r},
and modules are free: E = A^m.  Closed-form quantities are reported as exact;
suprema without a closed form come back as certified lower bounds carrying
the witness that attains them.
"""
__version__ = "0.1.0"

from .algebra import (  # noqa: E402
    AlgebraDescriptor,
    AlgebraElement,
    alg_abs,
    alg_classify,
    alg_leq,
    alg_norm,
    alg_sample,
    alg_sqrt_psd,
)
from .errors import (  # noqa: E402
    ConstructionError,
    CStarError,
    DecompositionVerificationError,
    FrameError,
    NotHermitianError,
    NotPositiveError,
    RankError,
    ShapeError,
    UnsupportedAlgebraError,
    UnsupportedKindError,
)
from .hilbert_module import (  # noqa: E402
    ModuleOperator,
    ModuleVector,
    inner_product,
    op_abs,
    op_norm,
    polar_decompose,
    polar_power_identity_check,
    sample_operator,
    sample_vector,
    theta,
    vec_abs,
    vec_norm,
)
from .powernorms import (  # noqa: E402
    NormEstimate,
    PowerNormKind,
    amplification_norm,
    axiom_check,
    classical_mu2,
    dual_lattice_multinorm,
    hilbert_cstar_multinorm,
    l2_module_norm,
    lattice_multinorm,
    mb_norm,
    mu,
    mu_star,
    mu_star_min_lambda_check,
)
from .search import (  # noqa: E402
    ProjectionFamily,
    SearchBudget,
    local_ascent,
    projection_family_search,
    sphere_sample,
)
from .summing import (  # noqa: E402
    Frame,
    SummingReport,
    frame_verify,
    pi1,
    pi2_estimate,
    pi2_frame,
    pi_adjoint_symmetry_check,
    standard_frame,
    triangle_decomposition,
)
