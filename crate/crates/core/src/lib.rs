//! Margin preservation under random projection.
//!
//! Dense Gaussian (or sign) projection matrices, normalised binary and
//! multiclass margins with a max-margin optimizer, closed-form distortion
//! bounds, synthetic data generators, and seeded Monte Carlo estimators of
//! the probability that a projection distorts angles, inner products, norms
//! or margins beyond a relative tolerance.
//!
//! ```
//! use rpmargin::{bounds, datasets, margin::{binary_margin, MarginKind}, Vector};
//!
//! let square = datasets::counterexample_square(1.0).unwrap();
//! let u = Vector::new(vec![0.0, 1.0]).unwrap();
//! let gamma = binary_margin(&square, &u, MarginKind::Normalised).unwrap();
//! assert!((gamma - 0.5f64.sqrt()).abs() < 1e-12);
//! assert_eq!(bounds::min_dim_binary(0.1, 0.05, 100).unwrap(), 4026);
//! ```

pub mod bounds;
pub mod datasets;
pub mod error;
pub mod format;
pub mod margin;
pub mod montecarlo;
pub mod projection;
pub mod repro;
mod vector;

pub use error::{Error, Result};
pub use margin::{LabeledDataset, LinearWitness, MarginKind};
pub use montecarlo::{RejectionCurve, TrialConfig};
pub use projection::{BlockProjection, Family, MatrixSampler, ProjectionMatrix};
pub use vector::Vector;
