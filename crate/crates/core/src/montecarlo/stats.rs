use statrs::function::beta::beta_reg;
use libm::erfc;

/// Two-sided confidence level used for every tail estimate.
pub const CONFIDENCE_LEVEL: f64 = 0.99;

/// Standard normal upper tail `Q(x) = Pr[N(0,1) > x]`.
pub fn normal_upper_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Exact (Clopper–Pearson) two-sided interval for a binomial proportion.
pub fn clopper_pearson(hits: u64, count: u64, level: f64) -> (f64, f64) {
    assert!(count > 0 && hits <= count);
    let alpha = 1.0 - level;
    let (x, n) = (hits as f64, count as f64);
    let lo = if hits == 0 {
        0.0
    } else {
        beta_quantile(alpha / 2.0, x, n - x + 1.0)
    };
    let hi = if hits == count {
        1.0
    } else {
        beta_quantile(1.0 - alpha / 2.0, x + 1.0, n - x)
    };
    (lo, hi)
}

/// Inverse of the regularized incomplete beta function by bisection.
fn beta_quantile(p: f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Kolmogorov–Smirnov statistic of `samples` against `cdf`. Sorts in place.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at significance `alpha` for `n` samples.
pub fn ks_critical_value(alpha: f64, n: usize) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_hits_upper_bound_has_closed_form() {
        let (lo, hi) = clopper_pearson(0, 1000, 0.99);
        assert_eq!(lo, 0.0);
        let expected = 1.0 - 0.005f64.powf(1.0 / 1000.0);
        assert!((hi - expected).abs() < 1e-12, "{hi} vs {expected}");
    }

    #[test]
    fn all_hits_lower_bound_has_closed_form() {
        let (lo, hi) = clopper_pearson(500, 500, 0.99);
        assert_eq!(hi, 1.0);
        assert!((lo - 0.005f64.powf(1.0 / 500.0)).abs() < 1e-12);
    }

    #[test]
    fn interval_brackets_estimate() {
        for &(x, n) in &[(1u64, 10u64), (37, 100), (5000, 10000), (3, 1_000_000)] {
            let (lo, hi) = clopper_pearson(x, n, 0.99);
            let p = x as f64 / n as f64;
            assert!(lo <= p && p <= hi, "{x}/{n}: [{lo}, {hi}]");
            assert!(beta_reg(x as f64, (n - x + 1) as f64, lo) - 0.005 < 1e-9);
        }
    }

    #[test]
    fn normal_tail_values() {
        let two_sided = 2.0 * normal_upper_tail(1.0);
        assert!((two_sided - 0.317_310_507_862_914_1).abs() < 1e-14, "{two_sided}");
        assert_eq!(normal_upper_tail(0.0), 0.5);
        assert!((normal_cdf(1.0) + normal_upper_tail(1.0) - 1.0).abs() < 1e-15);
    }
}
