//! Means and normal-approximation confidence intervals across replications.

/// 1.96: two-sided 95% normal quantile.
pub const Z95: f64 = 1.96;

/// Mean and 95% half-width `1.96 s / sqrt(n)`, with `s` the sample standard
/// deviation. One value gives a zero half-width.
pub fn mean_and_half_width(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, Z95 * var.sqrt() / (n as f64).sqrt())
}

/// Pointwise mean and half-width of equally long curves.
pub fn curve_band(curves: &[&[f64]]) -> (Vec<f64>, Vec<f64>) {
    let len = curves.first().map_or(0, |c| c.len());
    let mut column = vec![0.0; curves.len()];
    let mut means = Vec::with_capacity(len);
    let mut halves = Vec::with_capacity(len);
    for t in 0..len {
        for (slot, curve) in column.iter_mut().zip(curves) {
            *slot = curve[t];
        }
        let (m, h) = mean_and_half_width(&column);
        means.push(m);
        halves.push(h);
    }
    (means, halves)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}
