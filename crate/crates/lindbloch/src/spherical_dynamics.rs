//! The nonlinear (φ̇, θ̇, ṙ/r) dynamical system: right-hand side,
//! singularity-aware adaptive integration in (θ, φ, ln r), the diagonal-H
//! closed-form solution, and the trajectory invariant.
//!
//! The integrator works on u = ln r (the radial equation is exactly linear
//! there and r = 0 loses its stiffness) and near the poles transparently
//! switches to the globally smooth Cartesian linear system and back, with a
//! hysteresis band so it cannot chatter.

use std::f64::consts::PI;

use thiserror::Error;

use crate::liouvillian::{build_generator, Liouvillian};
use crate::propagator::{Method, Trajectory};
use crate::state_space::{
    normalize_phi, BlochVector, DecayRates, QubitHamiltonian, SphericalState, POLE_EPS,
};

/// Entering this distance from a pole switches integration to Cartesian.
pub const POLE_SWITCH_ENTER: f64 = 1e-3;

/// Leaving the poles beyond this distance switches back to spherical;
/// the [ENTER, EXIT] hysteresis band prevents chattering.
pub const POLE_SWITCH_EXIT: f64 = 2e-3;

/// Radius below which the state is pinned to the absorbing origin.
pub const RADIUS_COLLAPSE: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SphericalError {
    #[error("φ̇ is singular at θ = {theta} (within {POLE_EPS:e} of a pole) with h01 ≠ 0")]
    PoleSingularity { theta: f64 },
    #[error("required step {step:e} underflows at t = {t} (floor {floor:e})")]
    StepUnderflow { t: f64, step: f64, floor: f64 },
    #[error("closed form requires {requirement}")]
    RegimeMismatch { requirement: &'static str },
    #[error("{what} outside its domain: {detail}")]
    Domain { what: &'static str, detail: String },
    #[error("bad time range: need t1 > t0")]
    BadRange,
    #[error("tolerance {tol:e} outside [1e-12, 1e-3]")]
    Tolerance { tol: f64 },
}

/// Instantaneous angular and log-radial velocities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalRhs {
    pub dphi: f64,
    pub dtheta: f64,
    /// d(ln r)/dt; ≤ 0 whenever all rates are non-negative.
    pub dlogr: f64,
}

fn raw_rhs(theta: f64, phi: f64, h: &QubitHamiltonian, rates: &DecayRates) -> SphericalRhs {
    let h01 = h.h01();
    let (re01, im01) = (h01.re, h01.im);
    let (h1, h2, h3) = (rates.h1(), rates.h2(), rates.h3());
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let sin2phi = 2.0 * sp * cp;
    let sin2theta = 2.0 * st * ct;

    let cot_term = if re01 == 0.0 && im01 == 0.0 {
        0.0
    } else {
        2.0 * (ct / st) * (re01 * cp - im01 * sp)
    };
    let dphi = (h.h00() - h.h11()) - cot_term + (h2 - h1) * sin2phi;
    let dtheta = -2.0 * (re01 * sp + im01 * cp) + sin2theta * (h1 * cp * cp + h2 * sp * sp - h3);
    let s2 = st * st;
    let dlogr = -2.0 * (h1 * (1.0 - s2 * cp * cp) + h2 * (1.0 - s2 * sp * sp) + h3 * s2);
    SphericalRhs {
        dphi,
        dtheta,
        dlogr,
    }
}

/// The (φ̇, θ̇, ṙ/r) right-hand side at a spherical state. Errors only when
/// the cotθ term is genuinely unbounded: θ within POLE_EPS of a pole while
/// h01 ≠ 0; callers must then switch representation.
pub fn spherical_rhs(
    s: &SphericalState,
    h: &QubitHamiltonian,
    rates: &DecayRates,
) -> Result<SphericalRhs, SphericalError> {
    let theta = s.theta();
    let at_pole = !(POLE_EPS..=PI - POLE_EPS).contains(&theta);
    if at_pole && h.h01().norm() > 0.0 {
        return Err(SphericalError::PoleSingularity { theta });
    }
    Ok(raw_rhs(theta, s.phi(), h, rates))
}

/// A representation-switch moment during integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchEvent {
    pub time: f64,
    pub to_cartesian: bool,
}

/// Integrated trajectory with both coordinate views at every sample.
#[derive(Debug, Clone)]
pub struct SphericalTrajectory {
    times: Vec<f64>,
    spherical: Vec<SphericalState>,
    phi_continuous: Vec<f64>,
    winding: Vec<i64>,
    cartesian: Vec<BlochVector>,
    switch_events: Vec<SwitchEvent>,
    radius_collapsed: bool,
    hamiltonian: QubitHamiltonian,
    rates: DecayRates,
}

impl SphericalTrajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn spherical(&self) -> &[SphericalState] {
        &self.spherical
    }

    /// Unwrapped azimuth; `spherical()` holds the normalized view.
    pub fn phi_continuous(&self) -> &[f64] {
        &self.phi_continuous
    }

    pub fn winding(&self) -> &[i64] {
        &self.winding
    }

    pub fn cartesian(&self) -> &[BlochVector] {
        &self.cartesian
    }

    pub fn switch_events(&self) -> &[SwitchEvent] {
        &self.switch_events
    }

    pub fn radius_collapsed(&self) -> bool {
        self.radius_collapsed
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn to_trajectory(&self) -> Trajectory {
        Trajectory::new(
            self.times.clone(),
            self.cartesian.clone(),
            Method::SphericalRk45,
            self.hamiltonian,
            self.rates,
        )
        .expect("integrator output is well formed")
    }
}

/// Adaptive integration from t0 to t1, sampling at every accepted step.
pub fn integrate(
    s0: &SphericalState,
    h: &QubitHamiltonian,
    rates: &DecayRates,
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<SphericalTrajectory, SphericalError> {
    drive(s0, h, rates, t0, t1, tol, None)
}

/// Adaptive integration that lands exactly on the requested sample times
/// (strictly increasing; the first entry is the initial time).
pub fn integrate_at_times(
    s0: &SphericalState,
    h: &QubitHamiltonian,
    rates: &DecayRates,
    times: &[f64],
    tol: f64,
) -> Result<SphericalTrajectory, SphericalError> {
    if times.len() < 2 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SphericalError::BadRange);
    }
    drive(
        s0,
        h,
        rates,
        times[0],
        times[times.len() - 1],
        tol,
        Some(times),
    )
}

enum Mode {
    Spherical { theta: f64, phi: f64, u: f64 },
    Cartesian { a: [f64; 3] },
    Origin,
}

struct Recorder {
    times: Vec<f64>,
    spherical: Vec<SphericalState>,
    phi_continuous: Vec<f64>,
    winding: Vec<i64>,
    cartesian: Vec<BlochVector>,
}

impl Recorder {
    fn push(&mut self, t: f64, mode: &Mode, phi_cont: f64) {
        let (state, bloch) = match mode {
            Mode::Spherical { theta, phi, u } => {
                let r = u.exp().min(1.0);
                let phi_norm = normalize_phi(*phi);
                let state = SphericalState::new(r, *theta, phi_norm)
                    .expect("integrator keeps spherical coordinates in range");
                let (st, ct) = theta.sin_cos();
                let (sp, cp) = phi.sin_cos();
                let bloch = BlochVector::new(r * st * cp, r * st * sp, r * ct)
                    .expect("radius clamped to the ball");
                (state, bloch)
            }
            Mode::Cartesian { a } => {
                let bloch = BlochVector::new(a[0], a[1], a[2])
                    .expect("Cartesian state projected to the ball")
                    .normalized_to_ball();
                let r = bloch.norm();
                let theta = if r < RADIUS_COLLAPSE {
                    0.0
                } else {
                    (bloch.a3() / r).clamp(-1.0, 1.0).acos()
                };
                let state = SphericalState::new(r.min(1.0), theta, normalize_phi(phi_cont))
                    .expect("integrator keeps spherical coordinates in range");
                (state, bloch)
            }
            Mode::Origin => (
                SphericalState::new(0.0, 0.0, normalize_phi(phi_cont)).expect("origin"),
                BlochVector::origin(),
            ),
        };
        self.times.push(t);
        self.spherical.push(state);
        self.phi_continuous.push(phi_cont);
        self.winding.push((phi_cont / (2.0 * PI)).floor() as i64);
        self.cartesian.push(bloch);
    }
}

/// Dormand–Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One embedded step; None when a stage evaluation is rejected (pole guard).
fn rk45_step<F>(f: &F, y: &[f64; 3], h: f64) -> Option<([f64; 3], [f64; 3])>
where
    F: Fn(&[f64; 3]) -> Option<[f64; 3]>,
{
    let mut k = [[0.0; 3]; 7];
    k[0] = f(y)?;
    for stage in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(stage) {
            let a = DP_A[stage][j];
            if a != 0.0 {
                for d in 0..3 {
                    ys[d] += h * a * kj[d];
                }
            }
        }
        let _ = DP_C;
        k[stage] = f(&ys)?;
    }
    let mut y5 = *y;
    let mut err = [0.0; 3];
    for (j, kj) in k.iter().enumerate() {
        for d in 0..3 {
            y5[d] += h * DP_B5[j] * kj[d];
            err[d] += h * (DP_B5[j] - DP_B4[j]) * kj[d];
        }
    }
    Some((y5, err))
}

fn error_norm(y: &[f64; 3], y5: &[f64; 3], err: &[f64; 3], tol: f64) -> f64 {
    let mut acc = 0.0;
    for d in 0..3 {
        let sc = tol + tol * y[d].abs().max(y5[d].abs());
        let e = err[d] / sc;
        acc += e * e;
    }
    (acc / 3.0).sqrt()
}

fn spherical_to_cart(theta: f64, phi: f64, u: f64) -> [f64; 3] {
    let r = u.exp();
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [r * st * cp, r * st * sp, r * ct]
}

/// Continue `raw` past branch cuts: nearest representative to `prev`.
fn unwrap_phi(raw: f64, prev: f64) -> f64 {
    let diff = raw - prev;
    let wrapped = diff - (diff / (2.0 * PI)).round() * 2.0 * PI;
    prev + wrapped
}

fn drive(
    s0: &SphericalState,
    h: &QubitHamiltonian,
    rates: &DecayRates,
    t0: f64,
    t1: f64,
    tol: f64,
    outputs: Option<&[f64]>,
) -> Result<SphericalTrajectory, SphericalError> {
    if t0.is_nan() || t1.is_nan() || t1 <= t0 {
        return Err(SphericalError::BadRange);
    }
    if !(1e-12..=1e-3).contains(&tol) {
        return Err(SphericalError::Tolerance { tol });
    }

    let liouville: Liouvillian = build_generator(h, rates);
    let t_matrix = *liouville.matrix();
    let span = t1 - t0;
    let h_floor = 1e-15 * span;
    let h_cap = span / 10.0;

    let near_pole = |theta: f64| !(POLE_SWITCH_ENTER..=PI - POLE_SWITCH_ENTER).contains(&theta);
    let mut radius_collapsed = false;
    let mut phi_cont = s0.phi();
    let mut mode = if s0.r() < RADIUS_COLLAPSE {
        radius_collapsed = true;
        Mode::Origin
    } else if near_pole(s0.theta()) {
        Mode::Cartesian {
            a: spherical_to_cart(s0.theta(), s0.phi(), s0.r().ln()),
        }
    } else {
        Mode::Spherical {
            theta: s0.theta(),
            phi: s0.phi(),
            u: s0.r().ln(),
        }
    };

    let mut rec = Recorder {
        times: Vec::new(),
        spherical: Vec::new(),
        phi_continuous: Vec::new(),
        winding: Vec::new(),
        cartesian: Vec::new(),
    };
    let mut switch_events = Vec::new();

    let mut out_idx = 0usize;
    if let Some(times) = outputs {
        debug_assert!((times[0] - t0).abs() == 0.0);
        rec.push(times[0], &mode, phi_cont);
        out_idx = 1;
    } else {
        rec.push(t0, &mode, phi_cont);
    }

    let mut t = t0;
    let mut h_try = (span / 1000.0).clamp(h_floor, h_cap);
    let mut err_old: f64 = 1e-4;
    const SAFETY: f64 = 0.9;
    const ALPHA: f64 = 0.17;
    const BETA: f64 = 0.04;

    while t < t1 {
        if matches!(mode, Mode::Origin) {
            // absorbing state: emit the remaining samples directly
            match outputs {
                Some(times) => {
                    for &tk in &times[out_idx..] {
                        rec.push(tk, &mode, phi_cont);
                    }
                }
                None => rec.push(t1, &mode, phi_cont),
            }
            break;
        }

        let next_stop = match outputs {
            Some(times) => times[out_idx],
            None => t1,
        };
        if next_stop - t <= h_floor {
            // output time within the step floor: snap
            t = next_stop;
            if let Some(times) = outputs {
                rec.push(t, &mode, phi_cont);
                out_idx += 1;
                if out_idx >= times.len() {
                    break;
                }
            }
            continue;
        }
        let h_step = h_try.min(next_stop - t).min(h_cap);

        let attempt = match &mode {
            Mode::Spherical { theta, phi, u } => {
                let y = [*theta, *phi, *u];
                let f = |y: &[f64; 3]| -> Option<[f64; 3]> {
                    if y[0] <= POLE_EPS || y[0] >= PI - POLE_EPS {
                        return None;
                    }
                    let rhs = raw_rhs(y[0], y[1], h, rates);
                    Some([rhs.dtheta, rhs.dphi, rhs.dlogr])
                };
                rk45_step(&f, &y, h_step).map(|(y5, err)| (y, y5, err))
            }
            Mode::Cartesian { a } => {
                let f = |y: &[f64; 3]| -> Option<[f64; 3]> { Some(t_matrix.mul_vec(y)) };
                rk45_step(&f, a, h_step).map(|(y5, err)| (*a, y5, err))
            }
            Mode::Origin => unreachable!(),
        };

        let (y0, y5, err) = match attempt {
            Some(v) => v,
            None => {
                // a stage hit the pole guard: shrink, or hand over to the
                // Cartesian chart if we are already close to the pole
                if let Mode::Spherical { theta, phi, u } = mode {
                    if !(2.0 * POLE_SWITCH_ENTER..=PI - 2.0 * POLE_SWITCH_ENTER).contains(&theta) {
                        mode = Mode::Cartesian {
                            a: spherical_to_cart(theta, phi, u),
                        };
                        switch_events.push(SwitchEvent {
                            time: t,
                            to_cartesian: true,
                        });
                        continue;
                    }
                }
                h_try = h_step / 2.0;
                if h_try < h_floor {
                    return Err(SphericalError::StepUnderflow {
                        t,
                        step: h_try,
                        floor: h_floor,
                    });
                }
                continue;
            }
        };

        let e = error_norm(&y0, &y5, &err, tol);
        // a NaN error estimate must land in the rejection branch
        if e.is_nan() || e > 1.0 {
            h_try = (h_step * (SAFETY * e.powf(-0.2)).max(0.2)).max(0.0);
            if h_try < h_floor {
                return Err(SphericalError::StepUnderflow {
                    t,
                    step: h_try,
                    floor: h_floor,
                });
            }
            continue;
        }

        // accepted
        let mut t_new = t + h_step;
        if (t_new - next_stop).abs() <= 4.0 * f64::EPSILON * next_stop.abs().max(1.0) {
            t_new = next_stop;
        }
        let fac = SAFETY * e.max(1e-10).powf(-ALPHA) * err_old.powf(BETA);
        h_try = (h_step * fac.clamp(0.2, 5.0)).clamp(h_floor, h_cap);
        err_old = e.max(1e-4);
        t = t_new;

        // state update + representation management
        match mode {
            Mode::Spherical { .. } => {
                let (theta, phi, u) = (y5[0], y5[1], y5[2].min(0.0));
                phi_cont = phi;
                if u < RADIUS_COLLAPSE.ln() {
                    mode = Mode::Origin;
                    radius_collapsed = true;
                } else if near_pole(theta) || theta <= 0.0 || theta >= PI {
                    mode = Mode::Cartesian {
                        a: spherical_to_cart(theta.clamp(0.0, PI), phi, u),
                    };
                    switch_events.push(SwitchEvent {
                        time: t,
                        to_cartesian: true,
                    });
                } else {
                    mode = Mode::Spherical { theta, phi, u };
                }
            }
            Mode::Cartesian { .. } => {
                let mut a = y5;
                let r = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
                if r > 1.0 {
                    // the exact flow never leaves the ball; pull numerical
                    // drift back onto it
                    for d in &mut a {
                        *d /= r;
                    }
                }
                let r = r.min(1.0);
                if r < RADIUS_COLLAPSE {
                    mode = Mode::Origin;
                    radius_collapsed = true;
                } else {
                    let theta = (a[2] / r).clamp(-1.0, 1.0).acos();
                    if (POLE_SWITCH_EXIT..=PI - POLE_SWITCH_EXIT).contains(&theta) {
                        phi_cont = unwrap_phi(a[1].atan2(a[0]), phi_cont);
                        mode = Mode::Spherical {
                            theta,
                            phi: phi_cont,
                            u: r.ln(),
                        };
                        switch_events.push(SwitchEvent {
                            time: t,
                            to_cartesian: false,
                        });
                    } else {
                        if theta > POLE_EPS && theta < PI - POLE_EPS {
                            phi_cont = unwrap_phi(a[1].atan2(a[0]), phi_cont);
                        }
                        mode = Mode::Cartesian { a };
                    }
                }
            }
            Mode::Origin => unreachable!(),
        }

        match outputs {
            Some(times) => {
                if t == times[out_idx] {
                    rec.push(t, &mode, phi_cont);
                    out_idx += 1;
                    if out_idx >= times.len() {
                        break;
                    }
                }
            }
            None => rec.push(t, &mode, phi_cont),
        }
    }

    Ok(SphericalTrajectory {
        times: rec.times,
        spherical: rec.spherical,
        phi_continuous: rec.phi_continuous,
        winding: rec.winding,
        cartesian: rec.cartesian,
        switch_events,
        radius_collapsed,
        hamiltonian: *h,
        rates: *rates,
    })
}

/// Closed-form solution for diagonal H (h01 = 0) with h₁ = h₂:
/// φ(t) = φ₀ + (h₀₀−h₁₁)(t−t₀), tanθ(t) = tanθ₀·e^{−2(h₃−h₁)(t−t₀)},
/// r(t) = r₀·e^{−4h₁(t−t₀)}·√(cos²θ₀ + sin²θ₀·e^{−4(h₃−h₁)(t−t₀)}).
/// The θ₀ = π/2 branch degenerates to r(t) = r₀·e^{−2(h₁+h₃)(t−t₀)}, θ ≡ π/2,
/// which the √ form reproduces by continuity.
#[derive(Debug, Clone, Copy)]
pub struct DiagonalClosedForm {
    precession: f64,
    h1: f64,
    h3: f64,
    r0: f64,
    theta0: f64,
    phi0: f64,
    t0: f64,
}

pub fn diagonal_closed_form(
    h: &QubitHamiltonian,
    rates: &DecayRates,
    s0: &SphericalState,
    t0: f64,
) -> Result<DiagonalClosedForm, SphericalError> {
    if h.h01().norm() > 1e-12 {
        return Err(SphericalError::RegimeMismatch {
            requirement: "a diagonal Hamiltonian (h01 = 0)",
        });
    }
    if (rates.h1() - rates.h2()).abs() > 1e-12 {
        return Err(SphericalError::RegimeMismatch {
            requirement: "h1 = h2",
        });
    }
    Ok(DiagonalClosedForm {
        precession: h.h00() - h.h11(),
        h1: rates.h1(),
        h3: rates.h3(),
        r0: s0.r(),
        theta0: s0.theta(),
        phi0: s0.phi(),
        t0,
    })
}

impl DiagonalClosedForm {
    /// (r, θ, unwrapped φ) at time t ≥ t₀.
    pub fn eval_continuous(&self, t: f64) -> (f64, f64, f64) {
        let dt = t - self.t0;
        let phi = self.phi0 + self.precession * dt;
        let (s0, c0) = self.theta0.sin_cos();
        let shrink = (-2.0 * (self.h3 - self.h1) * dt).exp();
        let theta = (s0 * shrink).atan2(c0);
        let r =
            self.r0 * (-4.0 * self.h1 * dt).exp() * (c0 * c0 + s0 * s0 * shrink * shrink).sqrt();
        (r, theta, phi)
    }

    pub fn eval(&self, t: f64) -> SphericalState {
        let (r, theta, phi) = self.eval_continuous(t);
        SphericalState::new(r.min(1.0), theta, normalize_phi(phi))
            .expect("closed form stays in the ball")
    }
}

/// The conserved combination r·|cosθ|·|tanθ|^{−2h₁/(h₃−h₁)} along diagonal-H
/// trajectories with h₁ = h₂ ≠ h₃.
pub fn trajectory_invariant(s: &SphericalState, h1: f64, h3: f64) -> Result<f64, SphericalError> {
    if (h3 - h1).abs() <= 1e-12 {
        return Err(SphericalError::Domain {
            what: "h3 - h1",
            detail: format!("must be nonzero, got {}", h3 - h1),
        });
    }
    let theta = s.theta();
    for excluded in [0.0, PI / 2.0, PI] {
        if (theta - excluded).abs() < POLE_EPS {
            return Err(SphericalError::Domain {
                what: "theta",
                detail: format!("{theta} within {POLE_EPS:e} of {excluded}"),
            });
        }
    }
    let exponent = -2.0 * h1 / (h3 - h1);
    Ok(s.r() * theta.cos().abs() * theta.tan().abs().powf(exponent))
}
