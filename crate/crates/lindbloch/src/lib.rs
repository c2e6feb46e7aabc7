//! GKSL (Lindblad) dynamics of a single open qubit.
//!
//! Two independent formulations of the same dynamics, built for
//! cross-validation:
//!
//! * the exact linear Bloch-vector evolution ȧ = T_d·a, solved by matrix
//!   exponential ([`propagator`]) with full spectral analysis of the
//!   generator ([`liouvillian`]);
//! * the nonlinear spherical-coordinate system (φ̇, θ̇, ṙ/r) that separates
//!   angular motion from radial dissipation ([`spherical_dynamics`]).
//!
//! On top of those sit fixed-point and stability analysis, exceptional-point
//! parameter sweeps and asymptotic decay fits ([`analysis`]), and a CLI front
//! end with CSV/JSON/SVG export ([`cli`]).
//!
//! ```
//! use lindbloch::liouvillian::{build_generator, eigendecompose};
//! use lindbloch::propagator::propagate;
//! use lindbloch::state_space::{BlochVector, DecayRates, QubitHamiltonian};
//!
//! // β = h/2ω₀ = 1: the Liouvillian exceptional point
//! let h = QubitHamiltonian::z_field(10.0);
//! let rates = DecayRates::new(20.0, 0.0, 0.0)?;
//! let generator = build_generator(&h, &rates);
//!
//! let spectral = eigendecompose(&generator)?;
//! assert!(spectral.defective && spectral.coalescence > 0.999);
//!
//! // the matrix exponential stays valid there
//! let a = propagate(&generator, &BlochVector::new(1.0, 0.0, 0.0)?, 0.05);
//! assert!(a.norm() <= 1.0 + 1e-9);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod analysis;
pub mod cli;
pub mod linalg;
pub mod liouvillian;
pub mod propagator;
pub mod spherical_dynamics;
pub mod state_space;

pub use state_space::{BlochVector, DecayRates, DensityMatrix, QubitHamiltonian, SphericalState};
