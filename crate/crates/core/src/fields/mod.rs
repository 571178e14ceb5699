//! Field representation: grids, analytic and sampled sources, differential
//! operators, norms and profile-level normalization.

pub mod analytic;
pub mod grid;
pub mod norms;
pub mod ops;
pub mod profile;
pub mod sampled;
pub mod source;
pub mod spectral;

pub use analytic::{Analytic, Envelope, Meridional, Quantity};
pub use grid::{Boundary, Grid2, Grid3};
pub use norms::{field_norm, NormEstimate, NormKind, NormRequest, Rule};
pub use ops::{curl_of, differential, DiffMethod, DiffOp, Nodal};
pub use profile::{decay_envelope, far_exponents, normalize_profile, r_flat, DecayEnvelope, Profile, Symmetry};
pub use sampled::{Interp, Rank, Sampled2, SampledField};
pub use source::FieldSource;
pub use spectral::{SpectralField, SpectralVelocity};
