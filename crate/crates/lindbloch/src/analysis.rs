//! Fixed-point enumeration and stability for the linear Bloch dynamics,
//! asymptotic decay-rate extraction, and the exceptional-point parameter
//! sweep.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{cross, norm, scale, Vec3};
use crate::liouvillian::{build_generator, eigendecompose, Liouvillian, EP_EPS};
use crate::propagator::Trajectory;
use crate::state_space::{DecayRates, QubitHamiltonian};

/// Null-space membership threshold, relative to ‖T_d‖_max: separates the
/// genuine zero eigenvalue from tiny negative reals.
pub const NULL_EPS: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("fit window [{t_a}, {t_b}] holds {found} usable samples, need at least 8")]
    InsufficientSamples { t_a: f64, t_b: f64, found: usize },
}

/// Shape of the steady-state set ker(T_d) ∩ ball. A two-dimensional kernel
/// cannot arise from non-negative rates (ker T_d = ker D_r ∩ ker e×, and
/// ker D_r never has dimension 2), but the variant keeps the classification
/// total.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPointKind {
    OriginOnly,
    Line,
    Plane,
    FullSpace,
}

impl FixedPointKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FixedPointKind::OriginOnly => "origin_only",
            FixedPointKind::Line => "line",
            FixedPointKind::Plane => "plane",
            FixedPointKind::FullSpace => "full_space",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FixedPointSet {
    pub kind: FixedPointKind,
    /// Orthonormal real basis of the kernel, deterministic sign (first
    /// nonzero component positive).
    pub basis: Vec<Vec3>,
}

/// Stability class of a Jacobian eigenvalue. For this linear system the
/// Jacobian at every fixed point is T_d itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityClass {
    Attracting,
    OscillatoryAttracting,
    Neutral,
}

impl StabilityClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            StabilityClass::Attracting => "attracting",
            StabilityClass::OscillatoryAttracting => "oscillatory_attracting",
            StabilityClass::Neutral => "neutral",
        }
    }
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub eigenvalues: [Complex64; 3],
    pub classes: [StabilityClass; 3],
}

/// Steady states: the null space of T_d, dimensioned by the eigenvalues
/// with |λ| below NULL_EPS·‖T_d‖ and spanned via the same row-space
/// machinery as the eigensolver.
pub fn fixed_points(l: &Liouvillian) -> FixedPointSet {
    let t = l.matrix();
    let tscale = t.max_abs();
    if tscale == 0.0 {
        return FixedPointSet {
            kind: FixedPointKind::FullSpace,
            basis: vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        };
    }
    let data = eigendecompose(l).expect("spectral data for fixed-point count");
    let thresh = NULL_EPS * tscale;
    let dim = data
        .eigenvalues
        .iter()
        .filter(|lam| lam.norm() < thresh)
        .count();
    let (kind, basis) = match dim {
        0 => (FixedPointKind::OriginOnly, Vec::new()),
        1 => (FixedPointKind::Line, null_basis(t, 1)),
        2 => (FixedPointKind::Plane, null_basis(t, 2)),
        _ => (
            FixedPointKind::FullSpace,
            vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        ),
    };
    FixedPointSet { kind, basis }
}

fn null_basis(t: &crate::linalg::Mat3, dim: usize) -> Vec<Vec3> {
    let rows = [t.0[0], t.0[1], t.0[2]];
    if dim == 1 {
        let crosses = [
            cross(&rows[0], &rows[1]),
            cross(&rows[1], &rows[2]),
            cross(&rows[2], &rows[0]),
        ];
        let best = crosses
            .iter()
            .max_by(|a, b| norm(a).total_cmp(&norm(b)))
            .unwrap();
        return vec![sign_fix(&scale(best, 1.0 / norm(best)))];
    }
    // dim == 2: the plane orthogonal to the dominant row
    let row = rows
        .iter()
        .max_by(|a, b| norm(a).total_cmp(&norm(b)))
        .unwrap();
    let seed = (0..3)
        .map(|k| {
            let mut e = [0.0; 3];
            e[k] = 1.0;
            cross(row, &e)
        })
        .max_by(|a, b| norm(a).total_cmp(&norm(b)))
        .unwrap();
    let w1 = scale(&seed, 1.0 / norm(&seed));
    let w2 = cross(row, &w1);
    vec![sign_fix(&w1), sign_fix(&scale(&w2, 1.0 / norm(&w2)))]
}

fn sign_fix(v: &Vec3) -> Vec3 {
    for x in v {
        if x.abs() > 1e-12 {
            return if *x < 0.0 { scale(v, -1.0) } else { *v };
        }
    }
    *v
}

/// Linear stability of the fixed set: classify every Jacobian eigenvalue.
/// `fps` must come from the same generator; its dimension equals the count
/// of neutral eigenvalues.
pub fn stability(l: &Liouvillian, fps: &FixedPointSet) -> StabilityReport {
    let data = eigendecompose(l).expect("spectral data for stability");
    let thresh = NULL_EPS * l.matrix().max_abs().max(f64::MIN_POSITIVE);
    let classes = data.eigenvalues.map(|lam| {
        if lam.re < -thresh {
            if lam.im.abs() > thresh {
                StabilityClass::OscillatoryAttracting
            } else {
                StabilityClass::Attracting
            }
        } else {
            StabilityClass::Neutral
        }
    });
    debug_assert_eq!(
        classes
            .iter()
            .filter(|c| **c == StabilityClass::Neutral)
            .count(),
        fps.basis.len(),
        "fixed-point dimension disagrees with neutral eigenvalue count"
    );
    StabilityReport {
        eigenvalues: data.eigenvalues,
        classes,
    }
}

/// Least-squares fit of ln‖a(t)‖ over a time window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// −slope of the fit: the asymptotic decay rate.
    pub rate: f64,
    /// Coefficient of determination of the linear fit.
    pub r_squared: f64,
}

/// Fit window for [`asymptotic_fit`]: [5τ_d, 10τ_d] clipped to the
/// trajectory when a characteristic decay time is known, the last half of
/// the trajectory otherwise.
pub fn default_fit_window(traj: &Trajectory, tau_d: Option<f64>) -> (f64, f64) {
    let t0 = traj.times()[0];
    let t1 = *traj.times().last().expect("trajectories are non-empty");
    match tau_d {
        Some(tau) if 5.0 * tau < t1 => (5.0 * tau, (10.0 * tau).min(t1)),
        _ => (t0 + (t1 - t0) / 2.0, t1),
    }
}

/// Extract the asymptotic decay rate ‖a(t)‖ ∝ e^{−rate·t} from trajectory
/// samples inside [t_a, t_b]. Samples with ‖a‖ ≤ 1e−300 are unusable and
/// skipped.
pub fn asymptotic_fit(traj: &Trajectory, window: (f64, f64)) -> Result<DecayFit, AnalysisError> {
    let (t_a, t_b) = window;
    let pts: Vec<(f64, f64)> = traj
        .times()
        .iter()
        .zip(traj.states())
        .filter(|(t, _)| **t >= t_a && **t <= t_b)
        .filter_map(|(t, a)| {
            let n = a.norm();
            (n > 1e-300).then(|| (*t, n.ln()))
        })
        .collect();
    if pts.len() < 8 {
        return Err(AnalysisError::InsufficientSamples {
            t_a,
            t_b,
            found: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|(t, _)| t).sum::<f64>() / n;
    let mean_y = pts.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (t, y) in &pts {
        sxx += (t - mean_t) * (t - mean_t);
        sxy += (t - mean_t) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (t, y) in &pts {
        let fit = mean_y + slope * (t - mean_t);
        ss_res += (y - fit) * (y - fit);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    let r_squared = if ss_tot <= 1e-30 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(DecayFit {
        rate: -slope,
        r_squared,
    })
}

/// One row of the exceptional-point sweep over β at fixed ω₀.
#[derive(Debug, Clone)]
pub struct EpSweepRow {
    pub beta: f64,
    pub eigenvalues: [Complex64; 3],
    pub coalescence: f64,
    /// Flagged from the parameter itself: |β − 1| ≤ εep.
    pub defective: bool,
}

/// Sweep the anisotropic family h = 2ω₀β, h₂ = h₃ = 0, H = ω₀σ₃ over the
/// given sorted β values.
pub fn ep_sweep(omega0: f64, betas: &[f64]) -> Vec<EpSweepRow> {
    assert!(omega0 > 0.0, "ep_sweep requires ω₀ > 0");
    assert!(
        betas.windows(2).all(|w| w[0] <= w[1]),
        "ep_sweep requires sorted β values"
    );
    betas
        .iter()
        .map(|&beta| {
            assert!(beta >= 0.0, "β must be non-negative");
            let l = build_generator(
                &QubitHamiltonian::z_field(omega0),
                &DecayRates::new(2.0 * omega0 * beta, 0.0, 0.0).expect("non-negative rate"),
            );
            let data = eigendecompose(&l).expect("anisotropic spectra are solvable");
            EpSweepRow {
                beta,
                eigenvalues: data.eigenvalues,
                coalescence: data.coalescence,
                defective: (beta - 1.0).abs() <= EP_EPS,
            }
        })
        .collect()
}
