//! Command-line front end: config parsing and validation, simulation
//! orchestration, CSV/JSON export and SVG projection rendering.
//!
//! Exit-code contract: 0 success, 2 config/schema violation, 3 integrator
//! failure, 4 I/O failure. Data files are byte-deterministic; run metadata
//! lives in a sidecar JSON next to the CSV.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::analysis::{ep_sweep, fixed_points, stability};
use crate::liouvillian::{build_generator, classify_regime, eigendecompose, RegimeReport};
use crate::propagator::{sample_trajectory, Trajectory};
use crate::spherical_dynamics::{integrate_at_times, SphericalTrajectory};
use crate::state_space::{
    cartesian_to_spherical, normalize_phi, spherical_to_cartesian, von_neumann_entropy,
    BlochVector, CoordDegeneracy, DecayRates, QubitHamiltonian, SphericalState,
};

/// Default adaptive-integrator tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Environment variable overriding the default tolerance; an explicit
/// `--tol` flag or config `tol` field wins over it.
pub const TOL_ENV_VAR: &str = "LINDBLOCH_TOL";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("integrator failure: {0}")]
    Integrator(String),
    #[error("I/O failure: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Integrator(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Exact,
    Spherical,
    Both,
}

impl MethodChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodChoice::Exact => "exact",
            MethodChoice::Spherical => "spherical",
            MethodChoice::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    hamiltonian: RawHamiltonian,
    decay: [f64; 3],
    #[serde(default)]
    initial: Option<RawInitial>,
    #[serde(default)]
    time: Option<RawTime>,
    #[serde(default)]
    method: Option<MethodChoice>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHamiltonian {
    e: [f64; 3],
    #[serde(default)]
    e0: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    #[serde(default)]
    bloch: Option<[f64; 3]>,
    #[serde(default)]
    spherical: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    t0: f64,
    t1: f64,
    samples: usize,
}

/// Validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub hamiltonian: QubitHamiltonian,
    pub decay: DecayRates,
    pub initial: Option<InitialState>,
    pub time: TimeGrid,
    pub method: MethodChoice,
    /// Explicit tolerance from the config file, if any.
    pub tol: Option<f64>,
    /// Reserved for randomized harnesses; the simulator itself is
    /// deterministic.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy)]
pub enum InitialState {
    Bloch(BlochVector),
    Spherical(SphericalState),
}

impl InitialState {
    pub fn bloch(&self) -> BlochVector {
        match self {
            InitialState::Bloch(a) => *a,
            InitialState::Spherical(s) => spherical_to_cartesian(s),
        }
    }

    pub fn spherical(&self) -> SphericalState {
        match self {
            InitialState::Bloch(a) => cartesian_to_spherical(a).0,
            InitialState::Spherical(s) => *s,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub samples: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid {
            t0: 0.0,
            t1: 1.0,
            samples: 1001,
        }
    }
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        let dt = (self.t1 - self.t0) / (self.samples - 1) as f64;
        (0..self.samples).map(|k| self.t0 + k as f64 * dt).collect()
    }
}

/// Parse and validate a config file. Violations name the offending field.
pub fn load_config(path: &str) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {path}: {e}")))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;

    for (i, value) in raw.decay.iter().enumerate() {
        if value.is_nan() || *value < 0.0 {
            return Err(CliError::Config(format!("decay[{i}] must be ≥ 0")));
        }
    }
    let decay = DecayRates::new(raw.decay[0], raw.decay[1], raw.decay[2])
        .map_err(|e| CliError::Config(e.to_string()))?;
    let hamiltonian = QubitHamiltonian::new(
        raw.hamiltonian.e0,
        raw.hamiltonian.e[0],
        raw.hamiltonian.e[1],
        raw.hamiltonian.e[2],
    );

    let initial = match raw.initial {
        None => None,
        Some(section) => Some(match (section.bloch, section.spherical) {
            (Some(a), None) => {
                let v = BlochVector::new(a[0], a[1], a[2]).map_err(|_| {
                    CliError::Config("initial.bloch must lie inside the closed unit ball".into())
                })?;
                InitialState::Bloch(v)
            }
            (None, Some(s)) => {
                if !(0.0..=1.0).contains(&s[0]) {
                    return Err(CliError::Config(
                        "initial.spherical[0] (r) must be in [0, 1]".into(),
                    ));
                }
                if !(0.0..=std::f64::consts::PI).contains(&s[1]) {
                    return Err(CliError::Config(
                        "initial.spherical[1] (theta) must be in [0, π]".into(),
                    ));
                }
                if !s[2].is_finite() {
                    return Err(CliError::Config(
                        "initial.spherical[2] (phi) must be finite".into(),
                    ));
                }
                InitialState::Spherical(
                    SphericalState::new(s[0], s[1], s[2])
                        .map_err(|e| CliError::Config(e.to_string()))?,
                )
            }
            _ => {
                return Err(CliError::Config(
                    "initial must set exactly one of bloch or spherical".into(),
                ))
            }
        }),
    };

    let time = match raw.time {
        None => TimeGrid::default(),
        Some(t) => {
            if t.samples < 2 {
                return Err(CliError::Config("time.samples must be ≥ 2".into()));
            }
            if t.t0.is_nan() || t.t1.is_nan() || t.t1 <= t.t0 {
                return Err(CliError::Config("time.t1 must be > time.t0".into()));
            }
            if t.t0 < 0.0 {
                return Err(CliError::Config("time.t0 must be ≥ 0".into()));
            }
            TimeGrid {
                t0: t.t0,
                t1: t.t1,
                samples: t.samples,
            }
        }
    };

    if let Some(tol) = raw.tol {
        validate_tol(tol)?;
    }

    Ok(RunConfig {
        hamiltonian,
        decay,
        initial,
        time,
        method: raw.method.unwrap_or(MethodChoice::Exact),
        tol: raw.tol,
        seed: raw.seed,
    })
}

fn validate_tol(tol: f64) -> Result<(), CliError> {
    if !(1e-12..=1e-3).contains(&tol) {
        return Err(CliError::Config("tol must be in [1e-12, 1e-3]".into()));
    }
    Ok(())
}

/// Effective tolerance: CLI flag > config field > environment variable >
/// default.
pub fn resolve_tolerance(
    flag: Option<f64>,
    config: Option<f64>,
    env: Option<&str>,
) -> Result<f64, CliError> {
    if let Some(t) = flag {
        validate_tol(t)?;
        return Ok(t);
    }
    if let Some(t) = config {
        validate_tol(t)?;
        return Ok(t);
    }
    if let Some(text) = env {
        let t: f64 = text.parse().map_err(|_| {
            CliError::Config(format!("{TOL_ENV_VAR} must be a number, got {text:?}"))
        })?;
        validate_tol(t)?;
        return Ok(t);
    }
    Ok(DEFAULT_TOL)
}

/// 17 significant digits, '.' decimal separator; negative zero flattened.
fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        let x = if x == 0.0 { 0.0 } else { x };
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

/// One CSV row of a simulation.
#[derive(Debug, Clone)]
pub struct SampleRow {
    pub t: f64,
    pub a: [f64; 3],
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
    pub winding: i64,
    pub entropy: f64,
    pub discrepancy: Option<f64>,
}

/// Everything a `simulate` run produces, ready for serialization.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub rows: Vec<SampleRow>,
    pub states: Vec<BlochVector>,
    pub method: MethodChoice,
    pub tol: f64,
}

/// Run the configured simulation on the uniform time grid.
pub fn run_simulation(
    cfg: &RunConfig,
    tol_flag: Option<f64>,
    env_tol: Option<&str>,
) -> Result<SimulationResult, CliError> {
    let initial = cfg
        .initial
        .ok_or_else(|| CliError::Config("initial section is required for simulate".into()))?;
    let tol = resolve_tolerance(tol_flag, cfg.tol, env_tol)?;
    let times = cfg.time.times();

    let exact: Option<Trajectory> = match cfg.method {
        MethodChoice::Exact | MethodChoice::Both => Some(
            sample_trajectory(
                &build_generator(&cfg.hamiltonian, &cfg.decay),
                &initial.bloch(),
                cfg.time.t0,
                cfg.time.t1,
                cfg.time.samples,
            )
            .map_err(|e| CliError::Config(e.to_string()))?,
        ),
        MethodChoice::Spherical => None,
    };
    let spherical: Option<SphericalTrajectory> = match cfg.method {
        MethodChoice::Spherical | MethodChoice::Both => Some(
            integrate_at_times(
                &initial.spherical(),
                &cfg.hamiltonian,
                &cfg.decay,
                &times,
                tol,
            )
            .map_err(|e| CliError::Integrator(e.to_string()))?,
        ),
        MethodChoice::Exact => None,
    };

    let states: Vec<BlochVector> = match (&exact, &spherical) {
        (Some(tr), _) => tr.states().to_vec(),
        (None, Some(sp)) => sp.cartesian().to_vec(),
        (None, None) => unreachable!(),
    };

    let mut rows = Vec::with_capacity(times.len());
    let mut phi_cont = initial.spherical().phi();
    for (k, t) in times.iter().enumerate() {
        let a = states[k].normalized_to_ball();
        let (r, theta, phi, winding) = match (&spherical, cfg.method) {
            (Some(sp), MethodChoice::Spherical) => {
                let s = &sp.spherical()[k];
                (s.r(), s.theta(), s.phi(), sp.winding()[k])
            }
            _ => {
                let (s, degeneracy) = cartesian_to_spherical(&a);
                if degeneracy == CoordDegeneracy::None {
                    let raw = s.phi();
                    let diff = raw - phi_cont;
                    phi_cont += diff
                        - (diff / (2.0 * std::f64::consts::PI)).round()
                            * 2.0
                            * std::f64::consts::PI;
                }
                let winding = (phi_cont / (2.0 * std::f64::consts::PI)).floor() as i64;
                (s.r(), s.theta(), normalize_phi(phi_cont), winding)
            }
        };
        let entropy = von_neumann_entropy(r.min(1.0)).expect("radius clamped into entropy domain");
        let discrepancy = match (&exact, &spherical) {
            (Some(tr), Some(sp)) => Some(
                tr.states()[k]
                    .components()
                    .iter()
                    .zip(sp.cartesian()[k].components().iter())
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0f64, f64::max),
            ),
            _ => None,
        };
        rows.push(SampleRow {
            t: *t,
            a: a.components(),
            r,
            theta,
            phi,
            winding,
            entropy,
            discrepancy,
        });
    }

    Ok(SimulationResult {
        rows,
        states,
        method: cfg.method,
        tol,
    })
}

/// Fixed column order; a discrepancy column is appended for method "both".
pub fn trajectory_csv(result: &SimulationResult) -> String {
    let with_disc = result.rows.first().is_some_and(|r| r.discrepancy.is_some());
    let mut out = String::new();
    out.push_str("t,a1,a2,a3,r,theta,phi,winding,entropy");
    if with_disc {
        out.push_str(",discrepancy");
    }
    out.push('\n');
    for row in &result.rows {
        let mut line = vec![
            fmt_f64(row.t),
            fmt_f64(row.a[0]),
            fmt_f64(row.a[1]),
            fmt_f64(row.a[2]),
            fmt_f64(row.r),
            fmt_f64(row.theta),
            fmt_f64(row.phi),
            row.winding.to_string(),
            fmt_f64(row.entropy),
        ];
        if let Some(d) = row.discrepancy {
            line.push(fmt_f64(d));
        }
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Run metadata: everything needed to reproduce the CSV, no timestamps.
pub fn sidecar_json(cfg: &RunConfig, result: &SimulationResult) -> String {
    let mut out = String::new();
    let e = cfg.hamiltonian.e_vector();
    let d = cfg.decay.as_array();
    let _ = write!(
        out,
        "{{\n  \"tool\": \"lindbloch {}\",\n  \"command\": \"simulate\",\n  \"method\": \"{}\",\n  \"tol\": {},\n  \"hamiltonian\": {{\"e\": [{}, {}, {}], \"e0\": {}}},\n  \"decay\": [{}, {}, {}],\n  \"initial_bloch\": [{}, {}, {}],\n  \"time\": {{\"t0\": {}, \"t1\": {}, \"samples\": {}}},\n  \"columns\": \"t,a1,a2,a3,r,theta,phi,winding,entropy{}\"\n}}\n",
        env!("CARGO_PKG_VERSION"),
        result.method.as_str(),
        fmt_f64(result.tol),
        fmt_f64(e[0]),
        fmt_f64(e[1]),
        fmt_f64(e[2]),
        fmt_f64(cfg.hamiltonian.e0()),
        fmt_f64(d[0]),
        fmt_f64(d[1]),
        fmt_f64(d[2]),
        fmt_f64(result.states[0].a1()),
        fmt_f64(result.states[0].a2()),
        fmt_f64(result.states[0].a3()),
        fmt_f64(cfg.time.t0),
        fmt_f64(cfg.time.t1),
        cfg.time.samples,
        if result.rows.first().is_some_and(|r| r.discrepancy.is_some()) {
            ",discrepancy"
        } else {
            ""
        },
    );
    out
}

fn complex_pair(z: num_complex::Complex64) -> String {
    format!("[{}, {}]", fmt_f64(z.re), fmt_f64(z.im))
}

fn regime_fields(report: &RegimeReport) -> String {
    let opt = |v: Option<f64>| v.map_or_else(|| "null".to_string(), fmt_f64);
    format!(
        "\"regime\": \"{}\",\n  \"beta\": {},\n  \"gamma\": {},\n  \"gamma_tilde\": {},\n  \"period\": {},\n  \"tau_d\": {}",
        report.regime.as_str(),
        opt(report.beta),
        opt(report.gamma),
        opt(report.gamma_tilde),
        opt(report.period),
        opt(report.tau_d),
    )
}

/// Machine-readable spectral/regime/fixed-point report, stable key order,
/// 17 significant digits.
pub fn spectrum_report(cfg: &RunConfig) -> Result<String, CliError> {
    let l = build_generator(&cfg.hamiltonian, &cfg.decay);
    let data = eigendecompose(&l).map_err(|e| CliError::Integrator(e.to_string()))?;
    let regime = classify_regime(&cfg.hamiltonian, &cfg.decay);
    let fps = fixed_points(&l);
    let stab = stability(&l, &fps);

    let generator: Vec<String> = l.matrix().0.iter().flatten().map(|x| fmt_f64(*x)).collect();
    let eigenvalues: Vec<String> = data.eigenvalues.iter().map(|z| complex_pair(*z)).collect();
    let basis: Vec<String> = fps
        .basis
        .iter()
        .map(|b| format!("[{}, {}, {}]", fmt_f64(b[0]), fmt_f64(b[1]), fmt_f64(b[2])))
        .collect();
    let stability_items: Vec<String> = stab
        .eigenvalues
        .iter()
        .zip(stab.classes.iter())
        .map(|(lam, class)| {
            format!(
                "{{\"eigenvalue\": {}, \"class\": \"{}\"}}",
                complex_pair(*lam),
                class.as_str()
            )
        })
        .collect();

    Ok(format!(
        "{{\n  \"generator\": [{}],\n  \"eigenvalues\": [{}],\n  {},\n  \"coalescence\": {},\n  \"condition\": {},\n  \"defective\": {},\n  \"near_ep\": {},\n  \"fixed_points\": {{\"kind\": \"{}\", \"basis\": [{}]}},\n  \"stability\": [{}]\n}}\n",
        generator.join(", "),
        eigenvalues.join(", "),
        regime_fields(&regime),
        fmt_f64(data.coalescence),
        fmt_f64(data.condition),
        data.defective,
        data.near_ep,
        fps.kind.as_str(),
        basis.join(", "),
        stability_items.join(", "),
    ))
}

/// CSV of the β sweep: one row per β, bit-stable across runs.
pub fn sweep_csv(
    omega0: f64,
    beta_min: f64,
    beta_max: f64,
    count: usize,
) -> Result<String, CliError> {
    if omega0.is_nan() || omega0 <= 0.0 {
        return Err(CliError::Config("--omega0 must be > 0".into()));
    }
    if beta_min.is_nan() || beta_min < 0.0 {
        return Err(CliError::Config("--beta-min must be ≥ 0".into()));
    }
    if beta_max.is_nan() || beta_max <= beta_min {
        return Err(CliError::Config("--beta-min must be < --beta-max".into()));
    }
    if count < 2 {
        return Err(CliError::Config("--count must be ≥ 2".into()));
    }
    let betas: Vec<f64> = (0..count)
        .map(|k| beta_min + (beta_max - beta_min) * k as f64 / (count - 1) as f64)
        .collect();
    let rows = ep_sweep(omega0, &betas);
    let mut out = String::from(
        "beta,re_lambda1,re_lambda2,re_lambda3,im_lambda1,im_lambda2,im_lambda3,coalescence,defective\n",
    );
    for row in rows {
        let l = &row.eigenvalues;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt_f64(row.beta),
            fmt_f64(l[0].re),
            fmt_f64(l[1].re),
            fmt_f64(l[2].re),
            fmt_f64(l[0].im),
            fmt_f64(l[1].im),
            fmt_f64(l[2].im),
            fmt_f64(row.coalescence),
            row.defective,
        );
    }
    Ok(out)
}

/// Projection plane for SVG rendering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    Xy,
    Xz,
    Yz,
}

impl Plane {
    pub fn parse(s: &str) -> Option<Plane> {
        match s {
            "xy" => Some(Plane::Xy),
            "xz" => Some(Plane::Xz),
            "yz" => Some(Plane::Yz),
            _ => None,
        }
    }

    fn project(&self, a: &BlochVector) -> (f64, f64) {
        match self {
            Plane::Xy => (a.a1(), a.a2()),
            Plane::Xz => (a.a1(), a.a3()),
            Plane::Yz => (a.a2(), a.a3()),
        }
    }
}

/// Standalone SVG: unit-circle silhouette of the ball, the projected
/// polyline, a filled start marker and an open end marker. The group is
/// mirrored so the vertical axis points up while polyline coordinates stay
/// raw state values.
pub fn render_svg(states: &[BlochVector], plane: Plane) -> String {
    assert!(
        !states.is_empty(),
        "render_svg needs a non-empty trajectory"
    );
    let mut out = String::from(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-1.1 -1.1 2.2 2.2\" width=\"440\" height=\"440\">\n",
    );
    out.push_str("<g transform=\"scale(1,-1)\">\n");
    out.push_str(
        "<circle cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" stroke=\"#888888\" stroke-width=\"0.01\"/>\n",
    );
    let pts: Vec<(f64, f64)> = states.iter().map(|a| plane.project(a)).collect();
    if pts.len() >= 2 {
        let joined: Vec<String> = pts
            .iter()
            .map(|(x, y)| format!("{x:.12},{y:.12}"))
            .collect();
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"0.008\" points=\"{}\"/>",
            joined.join(" ")
        );
    }
    let (sx, sy) = pts[0];
    let _ = writeln!(
        out,
        "<circle cx=\"{sx:.12}\" cy=\"{sy:.12}\" r=\"0.02\" fill=\"#1f77b4\"/>"
    );
    if pts.len() >= 2 {
        let (ex, ey) = pts[pts.len() - 1];
        let _ = writeln!(
            out,
            "<circle cx=\"{ex:.12}\" cy=\"{ey:.12}\" r=\"0.02\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"0.008\"/>"
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

fn write_file(path: &str, contents: &str) -> Result<(), CliError> {
    std::fs::write(Path::new(path), contents)
        .map_err(|e| CliError::Io(format!("cannot write {path}: {e}")))
}

/// `simulate` command body. Without `--csv` the CSV goes to stdout.
pub fn cmd_simulate(
    config_path: &str,
    csv_path: Option<&str>,
    svg_path: Option<&str>,
    plane: Option<Plane>,
    tol_flag: Option<f64>,
    env_tol: Option<&str>,
    stdout: &mut dyn std::io::Write,
) -> Result<(), CliError> {
    let cfg = load_config(config_path)?;
    let result = run_simulation(&cfg, tol_flag, env_tol)?;
    let csv = trajectory_csv(&result);
    match csv_path {
        Some(path) => {
            write_file(path, &csv)?;
            write_file(&format!("{path}.meta.json"), &sidecar_json(&cfg, &result))?;
        }
        None => {
            stdout
                .write_all(csv.as_bytes())
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    if let Some(path) = svg_path {
        let plane =
            plane.ok_or_else(|| CliError::Config("--plane is required with --svg".into()))?;
        write_file(path, &render_svg(&result.states, plane))?;
    }
    Ok(())
}

/// `spectrum` command body: JSON report on stdout.
pub fn cmd_spectrum(config_path: &str, stdout: &mut dyn std::io::Write) -> Result<(), CliError> {
    let cfg = load_config(config_path)?;
    let report = spectrum_report(&cfg)?;
    stdout
        .write_all(report.as_bytes())
        .map_err(|e| CliError::Io(e.to_string()))
}

/// `sweep` command body. Without `--csv` the CSV goes to stdout.
pub fn cmd_sweep(
    omega0: f64,
    beta_min: f64,
    beta_max: f64,
    count: usize,
    csv_path: Option<&str>,
    stdout: &mut dyn std::io::Write,
) -> Result<(), CliError> {
    let csv = sweep_csv(omega0, beta_min, beta_max, count)?;
    match csv_path {
        Some(path) => write_file(path, &csv),
        None => stdout
            .write_all(csv.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

/// `validate` command body: schema check only.
pub fn cmd_validate(config_path: &str) -> Result<(), CliError> {
    load_config(config_path).map(|_| ())
}
