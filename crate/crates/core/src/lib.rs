//! Approximation theory on the Boolean hypercube.
//!
//! Dense functions on `{0,1}^n`, their Walsh spectra, sensitivity, exact
//! minimax polynomial approximation, and the constructions used to bound
//! the best constant `J(n, d)` in `E_d^n(f) <= J(n, d) s(f)`.

pub mod binomial;
pub mod cube;
pub mod error;
pub mod harmonic;
pub mod kernel;
pub mod kravchuk;
pub mod minimax;
pub mod packing;
pub mod poly;
pub mod random;
pub mod symmetric;

pub use cube::{
    degree, laplacian, sensitivity, tail_inf_norm, truncate, walsh, wht_forward, wht_inverse,
    CubeFunction, SensitivityReport, Spectrum, MAX_DIM,
};
pub use error::{HcjError, Result};
pub use harmonic::{
    harmonic_defect, odd_harmonic_dimension, odd_harmonic_project, odd_harmonic_residual,
    HarmonicResult,
};
pub use kernel::{
    convolution_bound, explicit_h, jackson_bounds, jackson_bounds_with, kernel_apply,
    kernel_constant, quadrature_h, BoundReport,
};
pub use kravchuk::{
    gauss_binomial_quadrature, kravchuk, kravchuk_roots, smallest_positive_root, QuadratureRule,
};
pub use minimax::{
    approx_degree, ed_at_most, ed_at_most_with, ed_n, minimax_fit, minimax_fit_with,
    minimax_points, BasisSpec, EdDecision, LpMethod, LpOptions, MinimaxResult, SolveStatus,
};
pub use packing::{
    binary_entropy, family_member, greedy_packing, guarantee_check, guarantee_frontier, hat,
    packing_volume_bound, ptf_census, schlafli_regions, CensusReport, FrontierRow, GuaranteeReport,
    HatSpec, PackingFamily,
};
pub use poly::UnivariatePoly;
pub use random::{
    hoeffding_bound, random_boolean, random_boolean_stream, random_uniform_stream, ratio_probe,
    tail_experiment, uniform_values, RatioProbe, TrialStats, RNG_ID,
};
pub use symmetric::{
    lift_profile, lorenz_witness, profile_of, profile_sensitivity, profile_sensitivity_bounds,
    symmetric_ed, LorenzWitness, SymmetricProfile,
};
