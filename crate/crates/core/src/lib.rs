//! Phase-controlled forward-backward/up-down (FBUD) photoemission asymmetry
//! of randomly oriented chiral molecules ionized by an ω field polarized
//! along y and a 2ω field polarized along x.
//!
//! The one-photon (2ω) and two-photon (ω+ω) routes interfere; after
//! orientation averaging the interference survives only in the `B_{2,±1}`
//! harmonics of the angular distribution, which scale as `sin(2φ - δ)`.
//!
//! - [`angular`]: 3j symbols, rotation matrices, spherical harmonics.
//! - [`amplitudes`]: molecular-frame transition tensors `d` and `t`.
//! - [`dynamics`]: field and fixed-orientation amplitude.
//! - [`averaging`]: quadrature orientation average and `B_LM` extraction.
//! - [`analytic`]: closed-form asymmetry coefficient and FBUD law.

pub mod amplitudes;
pub mod analytic;
pub mod angular;
pub mod averaging;
pub mod dynamics;
pub mod error;
pub mod table;

pub use amplitudes::{achiralize, enantiomer, load_amplitudes, random_amplitudes, save_amplitudes, AmplitudeSet};
pub use analytic::{analytic_a, b21_of_phi, bracket_constant, fbud_value, AsymmetryCoefficient};
pub use angular::EulerAngles;
pub use averaging::{extract_a_delta_numeric, orientation_averaged_blm, BlmExpansion, PhaseFit, QuadratureSpec};
pub use dynamics::{EmissionDirection, FieldConfig};
pub use error::{Error, Result};
pub use num_complex::Complex64;
