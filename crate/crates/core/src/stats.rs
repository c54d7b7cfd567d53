//! Interval estimates for sampled experiments.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `hits` successes out of `n` trials.
pub fn wilson_interval(hits: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lower = if hits == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let upper = if hits as f64 == n {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lower, upper)
}

fn ln_binomial_pmf(n: u64, k: u64, p: f64, ln_fact: &[f64]) -> f64 {
    let coeff = ln_fact[n as usize] - ln_fact[k as usize] - ln_fact[(n - k) as usize];
    let kf = k as f64;
    let rest = (n - k) as f64;
    let a = if k == 0 { 0.0 } else { kf * p.ln() };
    let b = if n == k { 0.0 } else { rest * (-p).ln_1p() };
    coeff + a + b
}

fn ln_factorials(n: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..=n {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}

/// `P[X <= k]` for `X ~ Binomial(n, p)`.
pub fn binomial_cdf(n: u64, k: u64, p: f64) -> f64 {
    if k >= n {
        return 1.0;
    }
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return 0.0;
    }
    let ln_fact = ln_factorials(n);
    (0..=k)
        .map(|i| ln_binomial_pmf(n, i, p, &ln_fact).exp())
        .sum::<f64>()
        .min(1.0)
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> bool) -> f64 {
    // f(lo) is true, f(hi) is false
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exact (Clopper-Pearson) interval at confidence `1 - alpha`.
pub fn clopper_pearson(hits: u64, n: u64, alpha: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let tail = alpha / 2.0;
    let lower = if hits == 0 {
        0.0
    } else {
        // P[X >= hits | p] = 1 - cdf(hits - 1) grows with p
        bisect(0.0, 1.0, |p| 1.0 - binomial_cdf(n, hits - 1, p) < tail)
    };
    let upper = if hits == n {
        1.0
    } else {
        bisect(0.0, 1.0, |p| binomial_cdf(n, hits, p) > tail)
    };
    (lower, upper)
}

/// Sample mean, standard error of the mean, and a normal 95% interval.
pub fn mean_interval(values: &[u64]) -> (f64, f64, f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (0.0, 0.0, 0.0, 0.0);
    }
    let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n;
    let var = if values.len() > 1 {
        values
            .iter()
            .map(|&v| (v as f64 - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    let se = (var / n).sqrt();
    (mean, se, mean - Z95 * se, mean + Z95 * se)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_point_and_handles_zero() {
        let (lo, hi) = wilson_interval(0, 100, Z95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(30, 100, Z95);
        assert!(lo < 0.3 && 0.3 < hi);
        // textbook value for 30/100
        assert!((lo - 0.2189).abs() < 1e-3 && (hi - 0.3958).abs() < 1e-3);
    }

    #[test]
    fn cdf_small_case() {
        // Binomial(3, 1/2): P[X <= 1] = 4/8
        assert!((binomial_cdf(3, 1, 0.5) - 0.5).abs() < 1e-12);
        assert_eq!(binomial_cdf(3, 3, 0.2), 1.0);
    }

    #[test]
    fn clopper_pearson_reference() {
        // 0 of 10: upper = 1 - 0.025^(1/10)
        let (lo, hi) = clopper_pearson(0, 10, 0.05);
        assert_eq!(lo, 0.0);
        assert!((hi - (1.0 - 0.025f64.powf(0.1))).abs() < 1e-9);
        // 10 of 10: lower = 0.025^(1/10)
        let (lo, hi) = clopper_pearson(10, 10, 0.05);
        assert!((lo - 0.025f64.powf(0.1)).abs() < 1e-9);
        assert_eq!(hi, 1.0);
        let (lo, hi) = clopper_pearson(5, 10, 0.05);
        assert!((lo - 0.1871).abs() < 1e-3 && (hi - 0.8129).abs() < 1e-3);
    }

    #[test]
    fn mean_of_constant() {
        let (m, se, lo, hi) = mean_interval(&[2, 2, 2]);
        assert_eq!((m, se, lo, hi), (2.0, 0.0, 2.0, 2.0));
    }
}
