//! Statistical and summation plumbing shared by the experiment drivers:
//! compensated sums, Kolmogorov–Smirnov distances, Wilson score intervals,
//! order-statistic medians, and least-squares power-law fits.

/// Neumaier-compensated sum in the given order.
pub fn neumaier_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Compensated sum over a canonical (ascending, total) order, so the result
/// is bitwise independent of the input permutation.
pub fn sorted_compensated_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    neumaier_sum(values)
}

/// Mean and standard error of the mean, accumulated in index order.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    assert!(n >= 2, "need at least two samples");
    let mean = neumaier_sum(values) / n as f64;
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = neumaier_sum(&sq) / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// One-sample KS distance between the empirical distribution of `samples`
/// and the CDF `cdf`. Sorts a copy of the sample.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let c = cdf(x);
        d = d.max((c - i as f64 / n).abs());
        d = d.max(((i as f64 + 1.0) / n - c).abs());
    }
    d
}

/// Two-sample KS distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    ys.sort_unstable_by(f64::total_cmp);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        // Advance both ECDFs past the next distinct value before comparing.
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        let fx = i as f64 / xs.len() as f64;
        let fy = j as f64 / ys.len() as f64;
        d = d.max((fx - fy).abs());
    }
    d
}

/// One-sample KS acceptance threshold at significance 0.01.
pub fn ks_threshold(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// Two-sample KS acceptance threshold at significance 0.01.
pub fn ks_two_sample_threshold(n: usize, m: usize) -> f64 {
    1.63 * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Wilson score interval for a binomial proportion with `successes` out of
/// `n` trials at normal quantile `z`. Returns (lower, upper).
pub fn wilson_interval(successes: usize, n: usize, z: f64) -> (f64, f64) {
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = p + z2 / (2.0 * nf);
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    (
        ((center - half) / denom).max(0.0),
        ((center + half) / denom).min(1.0),
    )
}

/// Sample median via order statistics (average of the two central values for
/// even lengths), plus the distribution-free 99% confidence interval from
/// binomial order-statistic ranks.
pub fn median_with_ci99(samples: &[f64]) -> (f64, f64, f64) {
    let mut xs = samples.to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    let n = xs.len();
    assert!(n >= 8, "median CI needs at least 8 samples");
    let median = if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    };
    // ranks of a distribution-free CI: n/2 ± z/2 sqrt(n), z = 2.576
    let z = 2.576;
    let half = 0.5 * z * (n as f64).sqrt();
    let lo = ((n as f64 / 2.0 - half).floor().max(0.0)) as usize;
    let hi = (((n as f64 / 2.0 + half).ceil()) as usize).min(n - 1);
    (median, xs[lo], xs[hi])
}

/// Least-squares line fit `y = slope x + intercept`; returns
/// (slope, intercept, slope standard error).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    assert!(xs.len() >= 3, "need at least 3 points for a slope error");
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let se = (ss_res / (n - 2.0) / sxx).sqrt();
    (slope, intercept, se)
}

/// Fit `value = c * h^slope` by least squares in log-log coordinates.
/// Returns (slope, c, slope standard error).
pub fn log_log_fit(hs: &[f64], values: &[f64]) -> (f64, f64, f64) {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (slope, intercept, se) = linear_fit(&xs, &ys);
    (slope, intercept.exp(), se)
}
