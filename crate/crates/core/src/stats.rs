//! Small sample statistics used by the Monte Carlo checks.

/// Mean and unbiased variance in one pass.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var)
}

/// Sample mean with its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let (m, v) = mean_var(xs);
    (m, (v / xs.len() as f64).sqrt())
}

/// Estimate of `E[X^2]` and its standard error for a mean-zero variable;
/// used for variances whose mean is known to vanish.
pub fn second_moment_se(xs: &[f64]) -> (f64, f64) {
    let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
    mean_se(&sq)
}

/// Median of a copy of `xs` (average of the middle pair for even length).
pub fn median(xs: &[f64]) -> f64 {
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Delete-a-group jackknife: value of `stat` on all data and its standard
/// error from `groups` leave-one-group-out replicates.
pub fn jackknife(xs: &[f64], groups: usize, stat: impl Fn(&[f64]) -> f64) -> (f64, f64) {
    let full = stat(xs);
    let g = groups.min(xs.len()).max(2);
    let size = xs.len() / g;
    let mut reps = Vec::with_capacity(g);
    let mut buf = Vec::with_capacity(xs.len());
    for k in 0..g {
        buf.clear();
        buf.extend_from_slice(&xs[..k * size]);
        buf.extend_from_slice(&xs[(k + 1) * size..]);
        reps.push(stat(&buf));
    }
    let mr = reps.iter().sum::<f64>() / g as f64;
    let var = reps.iter().map(|r| (r - mr) * (r - mr)).sum::<f64>() * (g as f64 - 1.0) / g as f64;
    (full, var.sqrt())
}

/// SplitMix64 finaliser, used to derive per-sample seeds.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `i`-th sample of an ensemble keyed by `seed`.
#[inline]
pub fn sample_seed(seed: u64, i: u64) -> u64 {
    mix64(seed ^ mix64(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_statistics() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean_var(&xs), (2.5, 5.0 / 3.0));
        assert_eq!(median(&xs), 2.5);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        let (s, b) = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((s - 2.0).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn jackknife_of_mean_matches_standard_error() {
        let xs: Vec<f64> = (0..100).map(|i| ((i * 37) % 17) as f64).collect();
        let (m, se) = jackknife(&xs, 100, |v| v.iter().sum::<f64>() / v.len() as f64);
        let (m2, se2) = mean_se(&xs);
        assert!((m - m2).abs() < 1e-12);
        assert!((se - se2).abs() < 1e-10);
    }
}
