//! Time quadrature on trajectory grids.
//!
//! Running integrals use the composite trapezoid rule. On uniform grids the
//! trapezoid is corrected with the first two Gregory end terms, which makes
//! the rule exact for cubics and fourth-order accurate; non-uniform grids get
//! the plain trapezoid.

/// `I_m = integral from times[0] to times[m]` for every `m`.
pub fn cumulative(times: &[f64], values: &[f64]) -> Vec<f64> {
    assert_eq!(times.len(), values.len(), "time grid and samples differ in length");
    let len = times.len();
    let mut out = vec![0.0; len];
    if len < 2 {
        return out;
    }
    let mut trap = 0.0;
    for m in 1..len {
        trap += 0.5 * (times[m] - times[m - 1]) * (values[m] + values[m - 1]);
        out[m] = trap;
    }
    let Some(h) = uniform_step(times) else {
        return out;
    };
    let g = values;
    if len >= 4 {
        out[1] = h / 24.0 * (9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3]);
    } else if len == 3 {
        out[1] = h / 12.0 * (5.0 * g[0] + 8.0 * g[1] - g[2]);
    }
    for m in 2..len {
        let back1 = g[m] - g[m - 1];
        let back2 = g[m] - 2.0 * g[m - 1] + g[m - 2];
        let fwd1 = g[1] - g[0];
        let fwd2 = g[2] - 2.0 * g[1] + g[0];
        out[m] -= h / 12.0 * (back1 - fwd1) + h / 24.0 * (back2 + fwd2);
    }
    out
}

pub fn integral(times: &[f64], values: &[f64]) -> f64 {
    cumulative(times, values).last().copied().unwrap_or(0.0)
}

/// Common step if the grid is uniform to 1e-9 relative.
pub fn uniform_step(times: &[f64]) -> Option<f64> {
    if times.len() < 2 {
        return None;
    }
    let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let uniform = times.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs());
    uniform.then_some(h)
}
