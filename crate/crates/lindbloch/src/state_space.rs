//! Qubit state representations and lossless conversions between them:
//! density matrix, Cartesian Bloch vector, spherical Bloch-ball coordinates,
//! plus the purity/entropy functionals.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{Mat2c, Vec3, C_ZERO};

/// Construction slack outside the closed unit ball. Tiny numerical
/// excursions from integration are accepted; export paths renormalize.
pub const BALL_SLACK: f64 = 1e-9;

/// Below this angular distance from θ = 0 or π the azimuth is not
/// identifiable and is reported as 0.
pub const POLE_EPS: f64 = 1e-8;

/// Radius below which the direction of a Bloch vector is meaningless.
pub const RADIUS_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("Bloch vector norm {norm} exceeds the unit ball (slack {BALL_SLACK:e})")]
    BallViolation { norm: f64 },
    #[error("invalid density matrix: {reason}")]
    InvalidDensity { reason: String },
    #[error("decay rate h{index} = {value} is negative")]
    NegativeRate { index: usize, value: f64 },
    #[error("{what} = {value} outside domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },
}

/// Point in the closed unit ball ⊂ ℝ³ representing a qubit state,
/// ρ = ½(𝟙 + a·σ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    a1: f64,
    a2: f64,
    a3: f64,
}

impl BlochVector {
    pub fn new(a1: f64, a2: f64, a3: f64) -> Result<Self, StateError> {
        let norm = (a1 * a1 + a2 * a2 + a3 * a3).sqrt();
        if norm > 1.0 + BALL_SLACK {
            return Err(StateError::BallViolation { norm });
        }
        Ok(BlochVector { a1, a2, a3 })
    }

    pub fn from_array(a: &Vec3) -> Result<Self, StateError> {
        Self::new(a[0], a[1], a[2])
    }

    pub fn origin() -> Self {
        BlochVector {
            a1: 0.0,
            a2: 0.0,
            a3: 0.0,
        }
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn a3(&self) -> f64 {
        self.a3
    }

    pub fn components(&self) -> Vec3 {
        [self.a1, self.a2, self.a3]
    }

    pub fn norm(&self) -> f64 {
        (self.a1 * self.a1 + self.a2 * self.a2 + self.a3 * self.a3).sqrt()
    }

    /// Pull a vector sitting inside the slack band (1, 1+εball] back onto the
    /// sphere. Used on export; interior points are returned unchanged.
    pub fn normalized_to_ball(&self) -> Self {
        let n = self.norm();
        if n > 1.0 {
            BlochVector {
                a1: self.a1 / n,
                a2: self.a2 / n,
                a3: self.a3 / n,
            }
        } else {
            *self
        }
    }
}

/// 2×2 nonnegative Hermitian unit-trace operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    m: Mat2c,
}

impl DensityMatrix {
    pub fn from_entries(
        rho00: Complex64,
        rho01: Complex64,
        rho10: Complex64,
        rho11: Complex64,
    ) -> Result<Self, StateError> {
        let err = |reason: String| StateError::InvalidDensity { reason };
        if (rho10 - rho01.conj()).norm() > 1e-12 {
            return Err(err(format!(
                "not Hermitian: entry(1,0) = {rho10} but conj(entry(0,1)) = {}",
                rho01.conj()
            )));
        }
        if rho00.im.abs() > 1e-12 || rho11.im.abs() > 1e-12 {
            return Err(err("diagonal entries must be real".into()));
        }
        for (name, d) in [("entry(0,0)", rho00.re), ("entry(1,1)", rho11.re)] {
            if !(-BALL_SLACK..=1.0 + BALL_SLACK).contains(&d) {
                return Err(err(format!("{name} = {d} outside [0, 1]")));
            }
        }
        let trace = rho00.re + rho11.re;
        if (trace - 1.0).abs() > 1e-12 {
            return Err(err(format!("trace = {trace}, expected 1")));
        }
        let det = rho00.re * rho11.re - (rho01 * rho10).re;
        if det < -1e-12 {
            return Err(err(format!(
                "determinant = {det} < 0, not positive semidefinite"
            )));
        }
        Ok(DensityMatrix {
            m: Mat2c([[rho00, rho01], [rho10, rho11]]),
        })
    }

    pub fn matrix(&self) -> &Mat2c {
        &self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.m.0[i][j]
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix {
            m: Mat2c::identity().scale(Complex64::new(0.5, 0.0)),
        }
    }
}

/// Bloch-ball coordinates (r, θ, φ) with r ∈ \[0,1\], θ ∈ \[0,π\], φ ∈ \[0,2π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalState {
    r: f64,
    theta: f64,
    phi: f64,
}

impl SphericalState {
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self, StateError> {
        if !(0.0..=1.0 + BALL_SLACK).contains(&r) {
            return Err(StateError::Domain {
                what: "r",
                value: r,
                domain: "[0, 1]",
            });
        }
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(StateError::Domain {
                what: "theta",
                value: theta,
                domain: "[0, π]",
            });
        }
        if !phi.is_finite() {
            return Err(StateError::Domain {
                what: "phi",
                value: phi,
                domain: "finite reals",
            });
        }
        Ok(SphericalState {
            r,
            theta,
            phi: normalize_phi(phi),
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Wrap an angle into [0, 2π).
pub fn normalize_phi(phi: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut p = phi % two_pi;
    if p < 0.0 {
        p += two_pi;
    }
    if p >= two_pi {
        p = 0.0;
    }
    p
}

/// Which coordinate became non-identifiable in a Cartesian → spherical
/// conversion. Degeneracies are flagged, never thrown.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordDegeneracy {
    None,
    /// r < RADIUS_EPS: both angles reported as 0.
    Radius,
    /// θ within POLE_EPS of 0 or π: φ reported as 0.
    Pole,
}

/// Spectral decomposition ρ = p₁|u₁⟩⟨u₁| + p₂|u₂⟩⟨u₂| with p₁ ≥ p₂.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub p1: f64,
    pub p2: f64,
    pub u1: [Complex64; 2],
    pub u2: [Complex64; 2],
    /// r = 2p₁ − 1, the purity radius.
    pub r: f64,
    /// Set when p₁ − p₂ < RADIUS_EPS; eigenvectors are then the
    /// computational basis.
    pub degenerate: bool,
}

/// Pauli-basis Hamiltonian H = e₀𝟙 + e₁σ₁ + e₂σ₂ + e₃σ₃ (units 1/time, ħ=1),
/// with the 2×2 matrix-element view h₀₀ = e₀+e₃, h₁₁ = e₀−e₃, h₀₁ = e₁−i·e₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitHamiltonian {
    e0: f64,
    e1: f64,
    e2: f64,
    e3: f64,
}

impl QubitHamiltonian {
    pub fn new(e0: f64, e1: f64, e2: f64, e3: f64) -> Self {
        QubitHamiltonian { e0, e1, e2, e3 }
    }

    /// H = ω₀σ₃, the magnetic-field-along-z workhorse.
    pub fn z_field(omega0: f64) -> Self {
        Self::new(0.0, 0.0, 0.0, omega0)
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn e1(&self) -> f64 {
        self.e1
    }

    pub fn e2(&self) -> f64 {
        self.e2
    }

    pub fn e3(&self) -> f64 {
        self.e3
    }

    pub fn e_vector(&self) -> Vec3 {
        [self.e1, self.e2, self.e3]
    }

    pub fn h00(&self) -> f64 {
        self.e0 + self.e3
    }

    pub fn h11(&self) -> f64 {
        self.e0 - self.e3
    }

    pub fn h01(&self) -> Complex64 {
        Complex64::new(self.e1, -self.e2)
    }

    /// The Hermitian 2×2 matrix view.
    pub fn matrix(&self) -> Mat2c {
        Mat2c([
            [Complex64::new(self.h00(), 0.0), self.h01()],
            [self.h01().conj(), Complex64::new(self.h11(), 0.0)],
        ])
    }
}

/// Non-negative dissipation strengths of the three Pauli channels (1/time).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRates {
    h1: f64,
    h2: f64,
    h3: f64,
}

impl DecayRates {
    pub fn new(h1: f64, h2: f64, h3: f64) -> Result<Self, StateError> {
        for (index, value) in [(1usize, h1), (2, h2), (3, h3)] {
            if value.is_nan() || value < 0.0 {
                return Err(StateError::NegativeRate { index, value });
            }
        }
        Ok(DecayRates { h1, h2, h3 })
    }

    pub fn isotropic(h: f64) -> Result<Self, StateError> {
        Self::new(h, h, h)
    }

    pub fn zero() -> Self {
        DecayRates {
            h1: 0.0,
            h2: 0.0,
            h3: 0.0,
        }
    }

    pub fn h1(&self) -> f64 {
        self.h1
    }

    pub fn h2(&self) -> f64 {
        self.h2
    }

    pub fn h3(&self) -> f64 {
        self.h3
    }

    pub fn as_array(&self) -> Vec3 {
        [self.h1, self.h2, self.h3]
    }
}

/// ρ = ½(𝟙 + a₁σ₁ + a₂σ₂ + a₃σ₃).
pub fn bloch_to_density(a: &BlochVector) -> DensityMatrix {
    let rho00 = Complex64::new((1.0 + a.a3()) / 2.0, 0.0);
    let rho11 = Complex64::new((1.0 - a.a3()) / 2.0, 0.0);
    let rho01 = Complex64::new(a.a1() / 2.0, -a.a2() / 2.0);
    let rho10 = rho01.conj();
    DensityMatrix {
        m: Mat2c([[rho00, rho01], [rho10, rho11]]),
    }
}

/// Component extraction aᵢ = Tr(σᵢρ); exact inverse of [`bloch_to_density`].
pub fn density_to_bloch(rho: &DensityMatrix) -> BlochVector {
    let a1 = 2.0 * rho.entry(0, 1).re;
    let a2 = -2.0 * rho.entry(0, 1).im;
    let a3 = rho.entry(0, 0).re - rho.entry(1, 1).re;
    BlochVector { a1, a2, a3 }
}

/// r = ‖a‖, θ = arccos(a₃/r), φ = atan2(a₂, a₁) in [0, 2π). Degenerate loci
/// are flagged: r below RADIUS_EPS reports θ = φ = 0, θ within POLE_EPS of a
/// pole reports φ = 0.
pub fn cartesian_to_spherical(a: &BlochVector) -> (SphericalState, CoordDegeneracy) {
    let r = a.norm();
    if r < RADIUS_EPS {
        return (
            SphericalState {
                r,
                theta: 0.0,
                phi: 0.0,
            },
            CoordDegeneracy::Radius,
        );
    }
    let theta = (a.a3() / r).clamp(-1.0, 1.0).acos();
    if !(POLE_EPS..=std::f64::consts::PI - POLE_EPS).contains(&theta) {
        return (SphericalState { r, theta, phi: 0.0 }, CoordDegeneracy::Pole);
    }
    let phi = normalize_phi(a.a2().atan2(a.a1()));
    (SphericalState { r, theta, phi }, CoordDegeneracy::None)
}

/// a = r·(sinθ cosφ, sinθ sinφ, cosθ).
pub fn spherical_to_cartesian(s: &SphericalState) -> BlochVector {
    let (st, ct) = (s.theta().sin(), s.theta().cos());
    let (sp, cp) = (s.phi().sin(), s.phi().cos());
    BlochVector {
        a1: s.r() * st * cp,
        a2: s.r() * st * sp,
        a3: s.r() * ct,
    }
}

/// Purity radius r = 2p₁ − 1 = ‖a‖ from the spectral gap of ρ.
pub fn purity_radius(rho: &DensityMatrix) -> f64 {
    let diag_gap = rho.entry(0, 0).re - rho.entry(1, 1).re;
    let off = rho.entry(0, 1).norm_sqr();
    let r = (diag_gap * diag_gap + 4.0 * off).sqrt();
    r.min(1.0)
}

/// Von Neumann entropy in nats as a function of the purity radius:
/// S = −(1+r)/2·ln((1+r)/2) − (1−r)/2·ln((1−r)/2), with S(1) = 0 by
/// continuity and r in the slack band (1, 1+εball] clamped to 1.
pub fn von_neumann_entropy(r: f64) -> Result<f64, StateError> {
    if !(0.0..=1.0 + BALL_SLACK).contains(&r) {
        return Err(StateError::Domain {
            what: "r",
            value: r,
            domain: "[0, 1]",
        });
    }
    let r = r.min(1.0);
    let xlnx = |x: f64| if x <= 0.0 { 0.0 } else { x * x.ln() };
    Ok((-xlnx((1.0 + r) / 2.0) - xlnx((1.0 - r) / 2.0)).max(0.0))
}

/// Spectral decomposition of ρ through the spin-coherent-state form
/// u₁ = (cos(θ/2), sin(θ/2)e^{iφ})ᵀ, with the global phase fixed so the first
/// nonzero component is real positive.
pub fn density_spectral(rho: &DensityMatrix) -> SpectralDecomposition {
    let a = density_to_bloch(rho);
    let r = purity_radius(rho);
    let p1 = (1.0 + r) / 2.0;
    let p2 = (1.0 - r) / 2.0;
    if p1 - p2 < RADIUS_EPS {
        return SpectralDecomposition {
            p1,
            p2,
            u1: [Complex64::new(1.0, 0.0), C_ZERO],
            u2: [C_ZERO, Complex64::new(1.0, 0.0)],
            r,
            degenerate: true,
        };
    }
    let (s, _) = cartesian_to_spherical(&a);
    let half = s.theta() / 2.0;
    let phase = Complex64::from_polar(1.0, s.phi());
    let u1 = [
        Complex64::new(half.cos(), 0.0),
        Complex64::new(half.sin(), 0.0) * phase,
    ];
    let u2 = [
        Complex64::new(-half.sin(), 0.0) * phase.conj(),
        Complex64::new(half.cos(), 0.0),
    ];
    SpectralDecomposition {
        p1,
        p2,
        u1: fix_phase2(u1),
        u2: fix_phase2(u2),
        r,
        degenerate: false,
    }
}

/// Rotate the global phase so the first component above threshold is real
/// positive; deterministic representative of the U(1) orbit.
fn fix_phase2(u: [Complex64; 2]) -> [Complex64; 2] {
    for c in &u {
        if c.norm() > 1e-12 {
            let phase = c / c.norm();
            return [u[0] * phase.conj(), u[1] * phase.conj()];
        }
    }
    u
}
