//! The explicit horseshoe built near a saddle with a tangency.
//!
//! From homothety-prepared exponent data the construction derives the scales
//! `Λ_i`, `δ_i`, `δ` and the branch count `L`, assembles a piecewise-affine
//! return map (linear saddle blocks, two shears, the tangency transit and an
//! `L`-fold oscillation), and checks that the `L` stable slices of the
//! rectangle `R` cross it as a full Markov horseshoe with entropy
//! `log L/(ℓ+m+2n)`.

mod markov;
mod model;
mod profile;
mod scales;

pub use markov::{
    verify_markov_crossings, verify_markov_crossings_with, InequalityMargin, MarkovReport, RectangleFamily,
    VerificationMode, VerifyOptions,
};
pub use model::{assemble_model, AffineHorseshoeModel, AffinePieceDoc, BranchMap, LogReal, Piece};
pub use profile::{oscillation_profile, OscillationProfile, PHI_LIPSCHITZ, PHI_SUP};
pub use scales::{
    conformal_hausdorff_dimension, derive_scales, entropy_gap, iterate_containment, log_biguint, model_entropy,
    preparation_targets, ConstructionParams, DerivedScales, EntropyGap, IterateContainment, PreparationTargets,
};
