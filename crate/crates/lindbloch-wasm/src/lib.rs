//! Browser demo bindings: three interactive views over the core simulator —
//! Bloch-ball trajectory projections, the spectral/fixed-point report, and
//! the exceptional-point branch diagram.

use wasm_bindgen::prelude::wasm_bindgen;

use lindbloch::analysis::ep_sweep;
use lindbloch::cli::{parse_config, render_svg, run_simulation, spectrum_report, Plane, RunConfig};

#[allow(clippy::too_many_arguments)]
fn config_from_params(
    e1: f64,
    e2: f64,
    e3: f64,
    h1: f64,
    h2: f64,
    h3: f64,
    a1: f64,
    a2: f64,
    a3: f64,
    t1: f64,
    samples: usize,
) -> Result<RunConfig, String> {
    let text = format!(
        r#"{{
  "hamiltonian": {{"e": [{e1}, {e2}, {e3}]}},
  "decay": [{h1}, {h2}, {h3}],
  "initial": {{"bloch": [{a1}, {a2}, {a3}]}},
  "time": {{"t0": 0.0, "t1": {t1}, "samples": {samples}}},
  "method": "exact"
}}"#
    );
    parse_config(&text).map_err(|e| e.to_string())
}

/// SVG projection of the exact trajectory onto a coordinate plane.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn trajectory_svg(
    e1: f64,
    e2: f64,
    e3: f64,
    h1: f64,
    h2: f64,
    h3: f64,
    a1: f64,
    a2: f64,
    a3: f64,
    t1: f64,
    samples: usize,
    plane: &str,
) -> Result<String, String> {
    let cfg = config_from_params(e1, e2, e3, h1, h2, h3, a1, a2, a3, t1, samples)?;
    let plane = Plane::parse(plane).ok_or_else(|| "plane must be xy, xz or yz".to_string())?;
    let result = run_simulation(&cfg, None, None).map_err(|e| e.to_string())?;
    Ok(render_svg(&result.states, plane))
}

/// The spectral/regime/fixed-point JSON report for a parameter set.
#[wasm_bindgen]
pub fn spectrum_json(
    e1: f64,
    e2: f64,
    e3: f64,
    h1: f64,
    h2: f64,
    h3: f64,
) -> Result<String, String> {
    let text =
        format!(r#"{{"hamiltonian": {{"e": [{e1}, {e2}, {e3}]}}, "decay": [{h1}, {h2}, {h3}]}}"#);
    let cfg = parse_config(&text).map_err(|e| e.to_string())?;
    spectrum_report(&cfg).map_err(|e| e.to_string())
}

/// Eigenvalue branch diagram over β at fixed ω₀: real parts on the left,
/// imaginary parts on the right, the square-root branch point visible at
/// β = 1.
#[wasm_bindgen]
pub fn ep_branches_svg(
    omega0: f64,
    beta_min: f64,
    beta_max: f64,
    count: usize,
) -> Result<String, String> {
    if omega0.is_nan() || omega0 <= 0.0 {
        return Err("omega0 must be > 0".into());
    }
    if beta_min.is_nan() || beta_max.is_nan() || beta_min < 0.0 || beta_max <= beta_min {
        return Err("need 0 ≤ beta_min < beta_max".into());
    }
    if count < 2 {
        return Err("count must be ≥ 2".into());
    }
    let betas: Vec<f64> = (0..count)
        .map(|k| beta_min + (beta_max - beta_min) * k as f64 / (count - 1) as f64)
        .collect();
    let rows = ep_sweep(omega0, &betas);

    let res: Vec<Vec<(f64, f64)>> = (0..3)
        .map(|i| rows.iter().map(|r| (r.beta, r.eigenvalues[i].re)).collect())
        .collect();
    let ims: Vec<Vec<(f64, f64)>> = (0..3)
        .map(|i| rows.iter().map(|r| (r.beta, r.eigenvalues[i].im)).collect())
        .collect();
    let mut panels = String::new();
    panels.push_str(&chart_panel(&res, beta_min, beta_max, 0.0, "Re λ(β)"));
    panels.push_str(&chart_panel(&ims, beta_min, beta_max, 460.0, "Im λ(β)"));
    Ok(format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 920 360\" width=\"920\" height=\"360\">\n{panels}</svg>\n"
    ))
}

fn chart_panel(
    series: &[Vec<(f64, f64)>],
    x_min: f64,
    x_max: f64,
    x_offset: f64,
    title: &str,
) -> String {
    const W: f64 = 420.0;
    const H: f64 = 320.0;
    const M: f64 = 20.0;
    let y_min = series
        .iter()
        .flatten()
        .map(|(_, y)| *y)
        .fold(f64::INFINITY, f64::min);
    let y_max = series
        .iter()
        .flatten()
        .map(|(_, y)| *y)
        .fold(f64::NEG_INFINITY, f64::max);
    let y_span = (y_max - y_min).max(1e-12);
    let to_x = |x: f64| x_offset + M + (x - x_min) / (x_max - x_min) * W;
    let to_y = |y: f64| M + (y_max - y) / y_span * H;

    let mut out = format!(
        "<text x=\"{}\" y=\"14\" font-family=\"monospace\" font-size=\"14\">{}</text>\n",
        x_offset + M,
        title
    );
    out.push_str(&format!(
        "<rect x=\"{}\" y=\"{M}\" width=\"{W}\" height=\"{H}\" fill=\"none\" stroke=\"#cccccc\"/>\n",
        x_offset + M
    ));
    let colors = ["#d62728", "#1f77b4", "#2ca02c"];
    for (k, pts) in series.iter().enumerate() {
        let path: Vec<String> = pts
            .iter()
            .map(|(x, y)| format!("{:.3},{:.3}", to_x(*x), to_y(*y)))
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            colors[k % colors.len()],
            path.join(" ")
        ));
    }
    out
}

/// Native-buildable sanity checks; the wasm surface is plain Rust underneath.
#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_svg_renders() {
        let svg =
            trajectory_svg(0.0, 0.0, 10.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 201, "xy").unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
    }

    #[test]
    fn spectrum_json_is_valid() {
        let json = spectrum_json(0.0, 0.0, 10.0, 20.0, 0.0, 0.0).unwrap();
        assert!(json.contains("\"regime\": \"critical\""));
    }

    #[test]
    fn ep_branch_diagram_renders() {
        let svg = ep_branches_svg(10.0, 0.5, 1.5, 41).unwrap();
        assert!(svg.contains("Re λ(β)"));
        assert!(svg.contains("Im λ(β)"));
    }

    #[test]
    fn bad_parameters_are_reported() {
        assert!(
            trajectory_svg(0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 11, "xy").is_err()
        );
        assert!(ep_branches_svg(0.0, 0.5, 1.5, 41).is_err());
    }
}
