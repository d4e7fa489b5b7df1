//! Numerical toolkit for output-entropy quantities of quantum channels:
//! the minimal output entropy, the constrained minimum of the average output
//! entropy over ensembles with a fixed average state, the depolarizing
//! channel over its full completely positive range, and executable verifiers
//! for the strong superadditivity inequality at small dimensions.
//!
//! Entropies are natural-log internally; conversion to base 2 happens only at
//! reporting time. See the `examples/` directory for one runnable example per
//! capability, and the `qsa` binary for the command-line front end.

pub mod channels;
pub mod cli;
pub mod entropy_opt;
pub mod error;
pub mod qstate;
pub mod superadd;

pub use channels::{
    apply_channel, apply_product_channel, choi_of_map, depolarizing_apply_affine,
    depolarizing_channel, is_bistochastic, product_channel, random_kraus_channel, weyl_operator,
    Channel, DepolarizingParams,
};
pub use entropy_opt::{
    decompositions_from_isometry, h_hat_dep_closed, h_hat_numeric, s_min_dep_closed,
    s_min_numeric, Argmin, Ensemble, OptResult, OptimizerConfig,
};
pub use error::{QsaError, Result};
pub use qstate::{
    balanced_basis, partial_trace, random_density, random_unitary, tensor_product,
    von_neumann_entropy, BipartiteDims, CMatrix, CVector, DensityMatrix, OrthonormalBasis,
    PureState, RngSeed, TraceSide,
};
pub use superadd::{
    king_bound, smin_additivity_check, strong_superadd_check, verify_lemma_instance,
    AdditivityReport, LemmaReport, SuperaddReport,
};
