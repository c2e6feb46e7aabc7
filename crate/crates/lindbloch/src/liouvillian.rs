//! The real 3×3 generator T_d of the Bloch-vector dynamics ȧ = T_d·a,
//! its complex spectral data, damping-regime classification, exceptional
//! point detection, and an independent density-matrix-level right-hand-side
//! oracle for cross-validation.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{
    cbasis, ccross, cdot, cnorm, cscale, csub, eigenvalues3, qr_eigenvalues3, CMat3, CVec3,
    CubicRoots, Mat2c, Mat3, C_I, C_ZERO,
};
use crate::state_space::{DecayRates, DensityMatrix, QubitHamiltonian};

/// Half-width of the critical band |β − 1| ≤ εep.
pub const EP_EPS: f64 = 1e-10;

/// Coalescence level above which spectral data carries a near-EP warning.
pub const NEAR_EP_COALESCENCE: f64 = 0.99;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LiouvillianError {
    #[error("eigensolver residual {residual:e} above tolerance {tolerance:e} after QR fallback")]
    SolverFailure { residual: f64, tolerance: f64 },
}

/// The generator T_d = −2(D_r − e×) with D_r = diag(h₂+h₃, h₁+h₃, h₁+h₂)
/// and e× the skew matrix of (e₁,e₂,e₃). Entries carry units 1/time.
#[derive(Debug, Clone, Copy)]
pub struct Liouvillian {
    t: Mat3,
    hamiltonian: QubitHamiltonian,
    rates: DecayRates,
}

impl Liouvillian {
    pub fn matrix(&self) -> &Mat3 {
        &self.t
    }

    pub fn hamiltonian(&self) -> &QubitHamiltonian {
        &self.hamiltonian
    }

    pub fn rates(&self) -> &DecayRates {
        &self.rates
    }

    /// ȧ = T_d·a for a Cartesian Bloch vector a.
    pub fn apply(&self, a: &[f64; 3]) -> [f64; 3] {
        self.t.mul_vec(a)
    }
}

/// Build T_d from the Hamiltonian and the decay rates. e₀ never enters
/// (global phase).
pub fn build_generator(h: &QubitHamiltonian, rates: &DecayRates) -> Liouvillian {
    let (e1, e2, e3) = (h.e1(), h.e2(), h.e3());
    let (h1, h2, h3) = (rates.h1(), rates.h2(), rates.h3());
    let t = Mat3([
        [-2.0 * (h2 + h3), -2.0 * e3, 2.0 * e2],
        [2.0 * e3, -2.0 * (h1 + h3), -2.0 * e1],
        [-2.0 * e2, 2.0 * e1, -2.0 * (h1 + h2)],
    ]);
    Liouvillian {
        t,
        hamiltonian: *h,
        rates: *rates,
    }
}

/// GKSL right-hand side dρ/dt = −i\[H,ρ\] + Σₖ hₖ(σₖρσₖ − ρ), evaluated by
/// literal 2×2 matrix arithmetic with no Bloch shortcut. The returned matrix
/// is traceless Hermitian; it is the module's independent oracle against
/// [`build_generator`].
pub fn gksl_rhs_oracle(rho: &DensityMatrix, h: &QubitHamiltonian, rates: &DecayRates) -> Mat2c {
    let r = rho.matrix();
    let mut out = h.matrix().commutator(r).scale(-C_I);
    for (k, hk) in rates.as_array().iter().enumerate() {
        let sigma = Mat2c::pauli(k + 1);
        let jump = sigma.mul(r).mul(&sigma).sub(r);
        out = out.add(&jump.scale(Complex64::new(*hk, 0.0)));
    }
    out
}

/// Complex spectral data of the generator.
#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Ordered: real eigenvalue first, then the conjugate pair by ascending
    /// imaginary part; all-real spectra ascend by real part.
    pub eigenvalues: [Complex64; 3],
    /// Unit-norm right eigenvectors, first nonzero component real positive,
    /// matching eigenvalue order. At a defective eigenvalue the single
    /// eigenvector is repeated.
    pub eigenvectors: [CVec3; 3],
    /// max over pairs i≠j of |⟨vᵢ,vⱼ⟩|: 0 for an orthogonal eigenbasis,
    /// → 1 as eigenvectors coalesce at an exceptional point.
    pub coalescence: f64,
    /// 2-norm condition number of the eigenvector matrix (≥ 1, ∞ when
    /// defective).
    pub condition: f64,
    /// Geometric eigenspace is deficient (Jordan block).
    pub defective: bool,
    /// Conditioning warning: coalescence exceeds 0.99.
    pub near_ep: bool,
}

/// Dissipative regime of the anisotropic configuration h₁=h>0, h₂=h₃=0,
/// H = ω₀σ₃.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    SubCritical,
    Critical,
    SuperCritical,
    NotApplicable,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::SubCritical => "sub_critical",
            Regime::Critical => "critical",
            Regime::SuperCritical => "super_critical",
            Regime::NotApplicable => "not_applicable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    /// β = h₁/(2|e₃|) when applicable.
    pub beta: Option<f64>,
    /// Lorentz companion γ = 1/√(1−β²), sub-critical only.
    pub gamma: Option<f64>,
    /// Pseudo-Lorentz companion γ̃ = 1/√(β²−1), super-critical only.
    pub gamma_tilde: Option<f64>,
    /// Oscillation period τ = πγ/ω₀, sub-critical only.
    pub period: Option<f64>,
    /// Characteristic decay time τ_d = (β+√(β²−1))/(2ω₀), super-critical only.
    pub tau_d: Option<f64>,
}

impl RegimeReport {
    fn not_applicable() -> Self {
        RegimeReport {
            regime: Regime::NotApplicable,
            beta: None,
            gamma: None,
            gamma_tilde: None,
            period: None,
            tau_d: None,
        }
    }
}

/// Classify the damping regime. Applies only when the configuration matches
/// (h₁>0, h₂=h₃=0, e₁=e₂=0, e₃≠0) up to 1e−12; otherwise NotApplicable.
pub fn classify_regime(h: &QubitHamiltonian, rates: &DecayRates) -> RegimeReport {
    let tol = 1e-12;
    let applicable = rates.h1() > tol
        && rates.h2() <= tol
        && rates.h3() <= tol
        && h.e1().abs() <= tol
        && h.e2().abs() <= tol
        && h.e3().abs() > tol;
    if !applicable {
        return RegimeReport::not_applicable();
    }
    let omega0 = h.e3().abs();
    let beta = rates.h1() / (2.0 * omega0);
    if beta < 1.0 - EP_EPS {
        let gamma = 1.0 / (1.0 - beta * beta).sqrt();
        RegimeReport {
            regime: Regime::SubCritical,
            beta: Some(beta),
            gamma: Some(gamma),
            gamma_tilde: None,
            period: Some(std::f64::consts::PI * gamma / omega0),
            tau_d: None,
        }
    } else if beta > 1.0 + EP_EPS {
        let root = (beta * beta - 1.0).sqrt();
        RegimeReport {
            regime: Regime::SuperCritical,
            beta: Some(beta),
            gamma: None,
            gamma_tilde: Some(1.0 / root),
            period: None,
            tau_d: Some((beta + root) / (2.0 * omega0)),
        }
    } else {
        RegimeReport {
            regime: Regime::Critical,
            beta: Some(beta),
            gamma: None,
            gamma_tilde: None,
            period: None,
            tau_d: None,
        }
    }
}

/// Full spectral data of the generator: closed-form characteristic cubic,
/// one inverse-iteration refinement per eigenvector, shifted-QR fallback if
/// residuals stay above tolerance.
pub fn eigendecompose(l: &Liouvillian) -> Result<SpectralData, LiouvillianError> {
    let scale = l.t.max_abs();
    if scale == 0.0 {
        return Ok(SpectralData {
            eigenvalues: [C_ZERO; 3],
            eigenvectors: [cbasis(0), cbasis(1), cbasis(2)],
            coalescence: 0.0,
            condition: 1.0,
            defective: false,
            near_ep: false,
        });
    }
    let tn = l.t.scale(1.0 / scale);
    let roots = eigenvalues3(&tn);
    let first = assemble(&tn, roots);
    let data = match check(&tn, first) {
        Ok(data) => data,
        Err((_, _)) => {
            // fallback: 50 shifted-QR iterations for the eigenvalues, then
            // rebuild the eigenvectors from scratch
            let qr = qr_eigenvalues3(&tn, 50);
            let retry = assemble(&tn, structure_from(qr));
            match check(&tn, retry) {
                Ok(data) => data,
                Err((residual, tolerance)) => {
                    return Err(LiouvillianError::SolverFailure {
                        residual: residual * scale,
                        tolerance: tolerance * scale,
                    })
                }
            }
        }
    };
    Ok(SpectralData {
        eigenvalues: data.eigenvalues.map(|x| x * scale),
        ..data
    })
}

/// Residual acceptance: 1e−10 away from coalescence, relaxed to 1e−7 close
/// to an exceptional point (the |β−1| ~ 1e−6 neighborhood corresponds to a
/// relative eigenvalue gap of order 1e−3).
fn check(tn: &Mat3, data: SpectralData) -> Result<SpectralData, (f64, f64)> {
    let mut max_res = 0.0f64;
    for i in 0..3 {
        max_res = max_res.max(residual(tn, data.eigenvalues[i], &data.eigenvectors[i]));
    }
    let min_gap = (0..3)
        .flat_map(|i| ((i + 1)..3).map(move |j| (i, j)))
        .map(|(i, j)| (data.eigenvalues[i] - data.eigenvalues[j]).norm())
        .fold(f64::INFINITY, f64::min);
    let relaxed = data.defective || data.near_ep || min_gap < 2e-3;
    let tol = if relaxed { 1e-7 } else { 1e-10 };
    if max_res > tol {
        Err((max_res, tol))
    } else {
        Ok(data)
    }
}

fn residual(tn: &Mat3, lambda: Complex64, v: &CVec3) -> f64 {
    cnorm(&csub(&tn.mul_cvec(v), &cscale(v, lambda)))
}

/// Order eigenvalues (real first, pair by ascending imaginary part; all-real
/// ascending), extract eigenvectors with multiplicity awareness, refine, and
/// derive the coalescence/condition metrics. Operates on the normalized
/// matrix; eigenvalues are rescaled by the caller.
fn assemble(tn: &Mat3, roots: CubicRoots) -> SpectralData {
    let mut eigenvalues = [C_ZERO; 3];
    let mut eigenvectors = [[C_ZERO; 3]; 3];
    let mut defective = false;

    match roots {
        CubicRoots::OneRealPair { real, re, im } => {
            let lam_r = Complex64::new(real, 0.0);
            let lam_p = Complex64::new(re, im);
            eigenvalues = [lam_r, lam_p.conj(), lam_p];
            eigenvectors[0] = refine(tn, lam_r, simple_vector(tn, lam_r));
            let v = refine(tn, lam_p, simple_vector(tn, lam_p));
            eigenvectors[2] = v;
            eigenvectors[1] = [v[0].conj(), v[1].conj(), v[2].conj()];
        }
        CubicRoots::ThreeReal(xs) => {
            for (i, x) in xs.iter().enumerate() {
                let lam = Complex64::new(*x, 0.0);
                eigenvalues[i] = lam;
                eigenvectors[i] = refine(tn, lam, simple_vector(tn, lam));
            }
        }
        CubicRoots::DoubleReal { single, double } => {
            let (vals, dbl_slots, sgl_slot) = if single <= double {
                ([single, double, double], [1usize, 2usize], 0usize)
            } else {
                ([double, double, single], [0usize, 1usize], 2usize)
            };
            for (i, v) in vals.iter().enumerate() {
                eigenvalues[i] = Complex64::new(*v, 0.0);
            }
            let lam_s = Complex64::new(single, 0.0);
            eigenvectors[sgl_slot] = refine(tn, lam_s, simple_vector(tn, lam_s));
            let lam_d = Complex64::new(double, 0.0);
            let pair = multiple_vectors(tn, lam_d, 2);
            defective = pair.len() < 2;
            eigenvectors[dbl_slots[0]] = refine(tn, lam_d, pair[0]);
            eigenvectors[dbl_slots[1]] = if defective {
                eigenvectors[dbl_slots[0]]
            } else {
                refine(tn, lam_d, pair[1])
            };
        }
        CubicRoots::TripleReal(x) => {
            let lam = Complex64::new(x, 0.0);
            eigenvalues = [lam; 3];
            let vecs = multiple_vectors(tn, lam, 3);
            defective = vecs.len() < 3;
            for i in 0..3 {
                eigenvectors[i] = vecs[i.min(vecs.len() - 1)];
            }
        }
    }

    for v in &mut eigenvectors {
        *v = fix_phase3(*v);
    }
    // keep the conjugate pair exactly conjugate after phase fixing
    if let CubicRoots::OneRealPair { .. } = roots {
        let v = eigenvectors[2];
        eigenvectors[1] = [v[0].conj(), v[1].conj(), v[2].conj()];
    }

    let mut coalescence = 0.0f64;
    for i in 0..3 {
        for j in (i + 1)..3 {
            coalescence = coalescence.max(cdot(&eigenvectors[i], &eigenvectors[j]).norm());
        }
    }
    let coalescence = coalescence.min(1.0);

    SpectralData {
        eigenvalues,
        eigenvectors,
        coalescence,
        condition: condition_number(&eigenvectors),
        defective,
        near_ep: coalescence > NEAR_EP_COALESCENCE,
    }
}

/// Null direction of (T − λI) for a simple eigenvalue: the largest pairwise
/// cross product of its rows.
fn simple_vector(tn: &Mat3, lambda: Complex64) -> CVec3 {
    let m = CMat3::from_real(tn).shift(lambda);
    best_row_cross(&m).unwrap_or_else(|| plane_vectors(&m)[0])
}

/// Up to `count` independent null directions of (T − λI) for a repeated real
/// eigenvalue. Returns fewer when the eigenspace is deficient (defective
/// matrix): rank 2 leaves a single direction.
fn multiple_vectors(tn: &Mat3, lambda: Complex64, count: usize) -> Vec<CVec3> {
    let m = CMat3::from_real(tn).shift(lambda);
    // rank 2 ⟺ some row cross product stays O(1) on the normalized matrix
    if let Some(single) = best_row_cross(&m) {
        return vec![single];
    }
    let planes = plane_vectors(&m);
    planes.into_iter().take(count).collect()
}

fn best_row_cross(m: &CMat3) -> Option<CVec3> {
    let crosses = [
        ccross(&m.row(0), &m.row(1)),
        ccross(&m.row(1), &m.row(2)),
        ccross(&m.row(2), &m.row(0)),
    ];
    let best = crosses
        .iter()
        .max_by(|a, b| cnorm(a).total_cmp(&cnorm(b)))
        .unwrap();
    let n = cnorm(best);
    if n > 1e-8 {
        Some(cscale(best, Complex64::new(1.0 / n, 0.0)))
    } else {
        None
    }
}

/// Basis of the null plane when (T − λI) has rank ≤ 1: everything
/// (unconjugated-)orthogonal to its largest row, or the full basis at rank 0.
fn plane_vectors(m: &CMat3) -> Vec<CVec3> {
    let row = (0..3)
        .map(|i| m.row(i))
        .max_by(|a, b| cnorm(a).total_cmp(&cnorm(b)))
        .unwrap();
    if cnorm(&row) <= 1e-12 {
        return vec![cbasis(0), cbasis(1), cbasis(2)];
    }
    // repeated real eigenvalue of a real matrix: the row is real, so the
    // complex cross products below stay real and never become isotropic
    let w1 = (0..3)
        .map(|k| ccross(&row, &cbasis(k)))
        .max_by(|a, b| cnorm(a).total_cmp(&cnorm(b)))
        .unwrap();
    let w1 = cscale(&w1, Complex64::new(1.0 / cnorm(&w1), 0.0));
    let mut w2 = ccross(&row, &w1);
    let overlap = cdot(&w1, &w2);
    w2 = csub(&w2, &cscale(&w1, overlap));
    let n = cnorm(&w2);
    if n > 1e-12 {
        vec![w1, cscale(&w2, Complex64::new(1.0 / n, 0.0))]
    } else {
        vec![w1]
    }
}

/// One inverse-iteration step; kept only when it does not worsen the
/// residual.
fn refine(tn: &Mat3, lambda: Complex64, v: CVec3) -> CVec3 {
    let m = CMat3::from_real(tn).shift(lambda);
    let solved = m
        .solve(&v)
        .or_else(|| m.shift(Complex64::new(1e-13, 0.0)).solve(&v));
    match solved {
        Some(w) => {
            let n = cnorm(&w);
            if !n.is_finite() || n == 0.0 {
                return v;
            }
            let w = cscale(&w, Complex64::new(1.0 / n, 0.0));
            if residual(tn, lambda, &w) <= residual(tn, lambda, &v) {
                w
            } else {
                v
            }
        }
        None => v,
    }
}

/// Unit norm and first component above threshold rotated real positive.
fn fix_phase3(v: CVec3) -> CVec3 {
    let n = cnorm(&v);
    if n == 0.0 {
        return v;
    }
    let v = cscale(&v, Complex64::new(1.0 / n, 0.0));
    for c in &v {
        if c.norm() > 1e-12 {
            let phase = c / c.norm();
            return cscale(&v, phase.conj());
        }
    }
    v
}

/// κ₂ of the eigenvector matrix via the Hermitian Gram matrix: its real
/// characteristic cubic gives the squared singular values.
fn condition_number(vectors: &[CVec3; 3]) -> f64 {
    let mut g = [[C_ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = cdot(&vectors[i], &vectors[j]);
        }
    }
    let trace = (g[0][0] + g[1][1] + g[2][2]).re;
    let minors = ((g[0][0] * g[1][1] - g[0][1] * g[1][0])
        + (g[0][0] * g[2][2] - g[0][2] * g[2][0])
        + (g[1][1] * g[2][2] - g[1][2] * g[2][1]))
        .re;
    let det = (g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
        - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]))
        .re;
    let sigma2: Vec<f64> = crate::linalg::solve_cubic(-trace, minors, -det)
        .as_complex()
        .iter()
        .map(|z| z.re.max(0.0))
        .collect();
    let max = sigma2.iter().cloned().fold(0.0f64, f64::max);
    let min = sigma2.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 1e-150 * max.max(1.0) {
        f64::INFINITY
    } else {
        (max / min).sqrt().max(1.0)
    }
}

/// Rebuild a root structure from raw QR eigenvalues, enforcing exact
/// conjugate pairing.
fn structure_from(lams: [Complex64; 3]) -> CubicRoots {
    let mut complex_idx: Vec<usize> = (0..3).filter(|&i| lams[i].im.abs() > 1e-9).collect();
    if complex_idx.len() >= 2 {
        complex_idx.sort_by(|&a, &b| lams[a].im.abs().total_cmp(&lams[b].im.abs()));
        let (i, j) = (
            complex_idx[complex_idx.len() - 1],
            complex_idx[complex_idx.len() - 2],
        );
        let re = (lams[i].re + lams[j].re) / 2.0;
        let im = (lams[i].im.abs() + lams[j].im.abs()) / 2.0;
        let real = (0..3).find(|k| *k != i && *k != j).unwrap();
        return CubicRoots::OneRealPair {
            real: lams[real].re,
            re,
            im,
        };
    }
    let mut xs = [lams[0].re, lams[1].re, lams[2].re];
    xs.sort_by(f64::total_cmp);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
    if close(xs[0], xs[1]) && close(xs[1], xs[2]) {
        CubicRoots::TripleReal((xs[0] + xs[1] + xs[2]) / 3.0)
    } else if close(xs[0], xs[1]) {
        CubicRoots::DoubleReal {
            single: xs[2],
            double: (xs[0] + xs[1]) / 2.0,
        }
    } else if close(xs[1], xs[2]) {
        CubicRoots::DoubleReal {
            single: xs[0],
            double: (xs[1] + xs[2]) / 2.0,
        }
    } else {
        CubicRoots::ThreeReal(xs)
    }
}
