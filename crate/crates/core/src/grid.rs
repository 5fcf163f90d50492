//! Sampling grids.

/// `n` evenly spaced instants from `t0` to `t1` inclusive.
pub fn linspace(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t0],
        _ => {
            let step = (t1 - t0) / (n - 1) as f64;
            (0..n)
                .map(|k| if k + 1 == n { t1 } else { t0 + k as f64 * step })
                .collect()
        }
    }
}
