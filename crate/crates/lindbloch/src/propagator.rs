//! Exact time evolution a(t) = exp(T_d·t)·a(0) under constant (H, h) via
//! scaling-and-squaring matrix exponential, plus the catalog of printed
//! closed-form solutions used as golden references.
//!
//! The matrix exponential is the primary path on purpose: spectral
//! resolution breaks down at an exceptional point (defective generator)
//! while scaling-and-squaring stays uniformly valid.

use thiserror::Error;

use crate::linalg::{CMat3, Mat3, C_ZERO};
use crate::liouvillian::{eigendecompose, Liouvillian};
use crate::state_space::{BlochVector, DecayRates, QubitHamiltonian};

/// Above this eigenvector coalescence the spectral-resolution route is too
/// ill-conditioned to serve as a cross-check.
pub const SPECTRAL_PATH_COALESCENCE_LIMIT: f64 = 0.9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagatorError {
    #[error("bad sample range: need t1 > t0 and n ≥ 2 (got t0={t0}, t1={t1}, n={n})")]
    BadRange { t0: f64, t1: f64, n: usize },
    #[error("closed form {form} requires {requirement}")]
    RegimeMismatch {
        form: &'static str,
        requirement: &'static str,
    },
    #[error("trajectory times must be strictly increasing and match states")]
    MalformedTrajectory,
    #[error("spectral path unavailable: eigenvector coalescence {coalescence} (limit {SPECTRAL_PATH_COALESCENCE_LIMIT})")]
    SpectralPathUnavailable { coalescence: f64 },
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
}

/// How a trajectory was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    MatrixExponential,
    SphericalRk45,
    ClosedForm,
}

/// Time-ordered Bloch-vector samples with the configuration that produced
/// them.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<BlochVector>,
    method: Method,
    hamiltonian: QubitHamiltonian,
    rates: DecayRates,
}

impl Trajectory {
    pub fn new(
        times: Vec<f64>,
        states: Vec<BlochVector>,
        method: Method,
        hamiltonian: QubitHamiltonian,
        rates: DecayRates,
    ) -> Result<Self, PropagatorError> {
        if times.is_empty() || times.len() != states.len() {
            return Err(PropagatorError::MalformedTrajectory);
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(PropagatorError::MalformedTrajectory);
        }
        Ok(Trajectory {
            times,
            states,
            method,
            hamiltonian,
            rates,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[BlochVector] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn hamiltonian(&self) -> &QubitHamiltonian {
        &self.hamiltonian
    }

    pub fn rates(&self) -> &DecayRates {
        &self.rates
    }
}

/// Matrix exponential of a real 3×3 matrix: Padé [6/6] with scaling and
/// squaring, ‖A/2^s‖ kept below 1/4.
pub fn expm(m: &Mat3) -> Mat3 {
    const THETA: f64 = 0.25;
    // cheap upper bound on the ∞-norm
    let norm = 3.0 * m.max_abs();
    let s = if norm > THETA {
        (norm / THETA).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = m.scale(0.5f64.powi(s));

    // Padé [6/6] coefficients of exp
    const B: [f64; 7] = [
        1.0,
        0.5,
        5.0 / 44.0,
        1.0 / 66.0,
        1.0 / 792.0,
        1.0 / 15840.0,
        1.0 / 665280.0,
    ];
    let id = Mat3::identity();
    let a2 = a.mul(&a);
    let a4 = a2.mul(&a2);
    let a6 = a2.mul(&a4);
    let even = id
        .scale(B[0])
        .add(&a2.scale(B[2]))
        .add(&a4.scale(B[4]))
        .add(&a6.scale(B[6]));
    let odd = a.mul(&id.scale(B[1]).add(&a2.scale(B[3])).add(&a4.scale(B[5])));
    let p = even.add(&odd);
    let q = even.sub(&odd);

    let mut x = Mat3::zero();
    for col in 0..3 {
        let rhs = [p.0[0][col], p.0[1][col], p.0[2][col]];
        let sol = q
            .solve(&rhs)
            .expect("Padé denominator is nonsingular for ‖A‖ ≤ θ");
        for (row, value) in sol.iter().enumerate() {
            x.0[row][col] = *value;
        }
    }
    for _ in 0..s {
        x = x.mul(&x);
    }
    x
}

/// a(t) = exp(T_d·t)·a0.
pub fn propagate(l: &Liouvillian, a0: &BlochVector, t: f64) -> BlochVector {
    assert!(t >= 0.0, "propagate requires t ≥ 0");
    let e = expm(&l.matrix().scale(t));
    let a = e.mul_vec(&a0.components());
    BlochVector::from_array(&a).expect("propagation keeps the state inside the ball slack")
}

/// Spectral-resolution route a(t) = Σᵢ cᵢ e^{λᵢt} vᵢ with V·c = a0.
/// Kept as an independent cross-check of [`propagate`]; refuses to run where
/// eigenvector coalescence makes the resolution ill-conditioned (near an
/// exceptional point the eigenbasis degenerates and only the matrix
/// exponential remains valid).
pub fn propagate_spectral(
    l: &Liouvillian,
    a0: &BlochVector,
    t: f64,
) -> Result<BlochVector, PropagatorError> {
    assert!(t >= 0.0, "propagate_spectral requires t ≥ 0");
    let data = eigendecompose(l).map_err(|e| PropagatorError::Eigensolver(e.to_string()))?;
    if data.defective || data.coalescence >= SPECTRAL_PATH_COALESCENCE_LIMIT {
        return Err(PropagatorError::SpectralPathUnavailable {
            coalescence: data.coalescence,
        });
    }
    let mut columns = [[C_ZERO; 3]; 3];
    for (j, v) in data.eigenvectors.iter().enumerate() {
        for i in 0..3 {
            columns[i][j] = v[i];
        }
    }
    let a0c = a0.components().map(|x| num_complex::Complex64::new(x, 0.0));
    let coeffs = CMat3(columns)
        .solve(&a0c)
        .ok_or(PropagatorError::SpectralPathUnavailable {
            coalescence: data.coalescence,
        })?;
    let mut out = [0.0f64; 3];
    for (j, v) in data.eigenvectors.iter().enumerate() {
        let weight = coeffs[j] * (data.eigenvalues[j] * t).exp();
        for i in 0..3 {
            out[i] += (weight * v[i]).re;
        }
    }
    BlochVector::from_array(&out).map_err(|_| PropagatorError::SpectralPathUnavailable {
        coalescence: data.coalescence,
    })
}

/// n uniform samples on [t0, t1]: one step matrix exp(T·Δt) applied
/// repeatedly, re-anchored every 64 steps to exp(T·(t_k − t0)) so
/// accumulated rounding stays bounded.
pub fn sample_trajectory(
    l: &Liouvillian,
    a0: &BlochVector,
    t0: f64,
    t1: f64,
    n: usize,
) -> Result<Trajectory, PropagatorError> {
    if t0.is_nan() || t1.is_nan() || t1 <= t0 || t0 < 0.0 || n < 2 {
        return Err(PropagatorError::BadRange { t0, t1, n });
    }
    let dt = (t1 - t0) / (n - 1) as f64;
    let step = expm(&l.matrix().scale(dt));
    let mut times = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n);
    let mut a = a0.components();
    for k in 0..n {
        let t = t0 + k as f64 * dt;
        if k > 0 {
            if k % 64 == 0 {
                a = expm(&l.matrix().scale(t - t0)).mul_vec(&a0.components());
            } else {
                a = step.mul_vec(&a);
            }
        }
        times.push(t);
        states.push(
            BlochVector::from_array(&a).expect("propagation keeps the state inside the ball slack"),
        );
    }
    Trajectory::new(
        times,
        states,
        Method::MatrixExponential,
        *l.hamiltonian(),
        *l.rates(),
    )
}

/// The paper's printed solutions, each valid in its own regime, used as
/// golden references for the numerical paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormSolution {
    /// Isotropic rates h, H = ω₀σ₃, a(0) = (1,0,0)ᵀ:
    /// a(t) = e^{−4ht}(cos2ω₀t, sin2ω₀t, 0)ᵀ.
    IsotropicX { omega0: f64, h: f64 },
    /// Isotropic rates h, H = ω₀σ₃, a(0) = (1,0,1)ᵀ/√2:
    /// a(t) = e^{−4ht}/√2·(cos2ω₀t, sin2ω₀t, 1)ᵀ.
    IsotropicXz { omega0: f64, h: f64 },
    /// Anisotropic x-channel (h₁=h, h₂=h₃=0), β = h/2ω₀ > 1, a(0) = (1,0,0)ᵀ:
    /// the cosh/sinh solution with γ̃ = 1/√(β²−1).
    Overdamped { omega0: f64, h: f64 },
    /// Same channel with β < 1: the cos/sin form with γ = 1/√(1−β²);
    /// oscillation period τ = πγ/ω₀.
    Underdamped { omega0: f64, h: f64 },
    /// β = 1 exactly (h = 2ω₀): a(t) = e^{−2ω₀t}(1+2ω₀t, 2ω₀t, 0)ᵀ.
    CriticalPoint { omega0: f64 },
    /// z-channel (h₃=h, h₁=h₂=0), a(0) = (1,0,1)ᵀ/√2:
    /// a(t) = (e^{−2ht}cos2ω₀t, e^{−2ht}sin2ω₀t, 1)ᵀ/√2.
    ZChannel { omega0: f64, h: f64 },
}

impl ClosedFormSolution {
    pub fn validate(&self) -> Result<(), PropagatorError> {
        let positive = |x: f64| x > 0.0;
        match *self {
            ClosedFormSolution::IsotropicX { omega0, h }
            | ClosedFormSolution::IsotropicXz { omega0, h } => {
                if !positive(omega0) || h < 0.0 {
                    return Err(PropagatorError::RegimeMismatch {
                        form: "isotropic",
                        requirement: "ω₀ > 0 and h ≥ 0",
                    });
                }
            }
            ClosedFormSolution::Overdamped { omega0, h } => {
                if !positive(omega0) || h / (2.0 * omega0) <= 1.0 {
                    return Err(PropagatorError::RegimeMismatch {
                        form: "overdamped",
                        requirement: "β = h/2ω₀ > 1",
                    });
                }
            }
            ClosedFormSolution::Underdamped { omega0, h } => {
                if !positive(omega0) || h < 0.0 || h / (2.0 * omega0) >= 1.0 {
                    return Err(PropagatorError::RegimeMismatch {
                        form: "underdamped",
                        requirement: "β = h/2ω₀ < 1",
                    });
                }
            }
            ClosedFormSolution::CriticalPoint { omega0 } => {
                if !positive(omega0) {
                    return Err(PropagatorError::RegimeMismatch {
                        form: "critical",
                        requirement: "ω₀ > 0",
                    });
                }
            }
            ClosedFormSolution::ZChannel { omega0, h } => {
                if !positive(omega0) || h < 0.0 {
                    return Err(PropagatorError::RegimeMismatch {
                        form: "z-channel",
                        requirement: "ω₀ > 0 and h ≥ 0",
                    });
                }
            }
        }
        Ok(())
    }

    /// The (H, h) configuration this formula solves.
    pub fn configuration(&self) -> (QubitHamiltonian, DecayRates) {
        match *self {
            ClosedFormSolution::IsotropicX { omega0, h }
            | ClosedFormSolution::IsotropicXz { omega0, h } => (
                QubitHamiltonian::z_field(omega0),
                DecayRates::isotropic(h).expect("validated"),
            ),
            ClosedFormSolution::Overdamped { omega0, h }
            | ClosedFormSolution::Underdamped { omega0, h } => (
                QubitHamiltonian::z_field(omega0),
                DecayRates::new(h, 0.0, 0.0).expect("validated"),
            ),
            ClosedFormSolution::CriticalPoint { omega0 } => (
                QubitHamiltonian::z_field(omega0),
                DecayRates::new(2.0 * omega0, 0.0, 0.0).expect("validated"),
            ),
            ClosedFormSolution::ZChannel { omega0, h } => (
                QubitHamiltonian::z_field(omega0),
                DecayRates::new(0.0, 0.0, h).expect("validated"),
            ),
        }
    }

    /// The initial condition the printed solution assumes.
    pub fn initial(&self) -> BlochVector {
        let inv = 1.0 / 2.0f64.sqrt();
        match *self {
            ClosedFormSolution::IsotropicX { .. }
            | ClosedFormSolution::Overdamped { .. }
            | ClosedFormSolution::Underdamped { .. }
            | ClosedFormSolution::CriticalPoint { .. } => {
                BlochVector::new(1.0, 0.0, 0.0).expect("unit vector")
            }
            ClosedFormSolution::IsotropicXz { .. } | ClosedFormSolution::ZChannel { .. } => {
                BlochVector::new(inv, 0.0, inv).expect("unit vector")
            }
        }
    }

    pub fn eval(&self, t: f64) -> BlochVector {
        let a = match *self {
            ClosedFormSolution::IsotropicX { omega0, h } => {
                let damp = (-4.0 * h * t).exp();
                [
                    damp * (2.0 * omega0 * t).cos(),
                    damp * (2.0 * omega0 * t).sin(),
                    0.0,
                ]
            }
            ClosedFormSolution::IsotropicXz { omega0, h } => {
                let damp = (-4.0 * h * t).exp() / 2.0f64.sqrt();
                [
                    damp * (2.0 * omega0 * t).cos(),
                    damp * (2.0 * omega0 * t).sin(),
                    damp,
                ]
            }
            ClosedFormSolution::Overdamped { omega0, h } => {
                let beta = h / (2.0 * omega0);
                let root = (beta * beta - 1.0).sqrt();
                let gamma_tilde = 1.0 / root;
                let arg = 2.0 * omega0 * root * t;
                let damp = (-h * t).exp();
                [
                    damp * (arg.cosh() + gamma_tilde * beta * arg.sinh()),
                    gamma_tilde * damp * arg.sinh(),
                    0.0,
                ]
            }
            ClosedFormSolution::Underdamped { omega0, h } => {
                let beta = h / (2.0 * omega0);
                let root = (1.0 - beta * beta).sqrt();
                let gamma = 1.0 / root;
                let arg = 2.0 * omega0 * root * t;
                let damp = (-h * t).exp();
                [
                    damp * (arg.cos() + beta * gamma * arg.sin()),
                    gamma * damp * arg.sin(),
                    0.0,
                ]
            }
            ClosedFormSolution::CriticalPoint { omega0 } => {
                let damp = (-2.0 * omega0 * t).exp();
                [
                    damp * (1.0 + 2.0 * omega0 * t),
                    damp * 2.0 * omega0 * t,
                    0.0,
                ]
            }
            ClosedFormSolution::ZChannel { omega0, h } => {
                let inv = 1.0 / 2.0f64.sqrt();
                let damp = (-2.0 * h * t).exp();
                [
                    inv * damp * (2.0 * omega0 * t).cos(),
                    inv * damp * (2.0 * omega0 * t).sin(),
                    inv,
                ]
            }
        };
        BlochVector::from_array(&a).expect("closed forms stay inside the ball slack")
    }
}

/// Construct a validated closed-form solution.
pub fn closed_form(kind: ClosedFormSolution) -> Result<ClosedFormSolution, PropagatorError> {
    kind.validate()?;
    Ok(kind)
}
