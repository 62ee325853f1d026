//! Small descriptive-statistics helpers used by the feature catalog.

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population standard deviation.
pub fn std_dev(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    let m = mean(x);
    (x.iter().map(|&v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64).sqrt()
}

pub fn min(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn max(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Biased sample skewness (g1); 0 for constant input.
pub fn skewness(x: &[f64]) -> f64 {
    let m = mean(x);
    let n = x.len() as f64;
    let m2 = x.iter().map(|&v| (v - m).powi(2)).sum::<f64>() / n;
    if m2 <= 1e-24 {
        return 0.0;
    }
    let m3 = x.iter().map(|&v| (v - m).powi(3)).sum::<f64>() / n;
    m3 / m2.powf(1.5)
}

/// Excess kurtosis (g2); 0 for constant input.
pub fn kurtosis(x: &[f64]) -> f64 {
    let m = mean(x);
    let n = x.len() as f64;
    let m2 = x.iter().map(|&v| (v - m).powi(2)).sum::<f64>() / n;
    if m2 <= 1e-24 {
        return 0.0;
    }
    let m4 = x.iter().map(|&v| (v - m).powi(4)).sum::<f64>() / n;
    m4 / (m2 * m2) - 3.0
}

/// First differences `x[i+1] - x[i]`.
pub fn first_diff(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Centered moving average with window `w` samples; the window is truncated
/// at the edges.
pub fn moving_average(x: &[f64], w: usize) -> Vec<f64> {
    let n = x.len();
    if n == 0 || w == 0 {
        return x.to_vec();
    }
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for &v in x {
        prefix.push(prefix.last().unwrap() + v);
    }
    let half = w / 2;
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Rolling mean and population std over a centered window of `w` samples.
pub fn rolling_mean_std(x: &[f64], w: usize) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let mut prefix = Vec::with_capacity(n + 1);
    let mut prefix_sq = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    prefix_sq.push(0.0);
    for &v in x {
        prefix.push(prefix.last().unwrap() + v);
        prefix_sq.push(prefix_sq.last().unwrap() + v * v);
    }
    let half = w / 2;
    let mut means = Vec::with_capacity(n);
    let mut stds = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(half);
        let hi = (i + half + 1).min(n);
        let count = (hi - lo) as f64;
        let m = (prefix[hi] - prefix[lo]) / count;
        let var = ((prefix_sq[hi] - prefix_sq[lo]) / count - m * m).max(0.0);
        means.push(m);
        stds.push(var.sqrt());
    }
    (means, stds)
}

/// Pearson correlation; NaN when either side is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let (ma, mb) = (mean(a), mean(b));
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for i in 0..a.len() {
        let da = a[i] - ma;
        let db = b[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    cov / (va.sqrt() * vb.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_moments() {
        let x = [2.0, 4.0, 6.0];
        assert_eq!(mean(&x), 4.0);
        assert!((std_dev(&x) - (8.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(min(&x), 2.0);
        assert_eq!(max(&x), 6.0);
        assert_eq!(skewness(&x), 0.0);
    }

    #[test]
    fn constant_input_degenerates_to_zero() {
        let x = [5.0; 10];
        assert_eq!(std_dev(&x), 0.0);
        assert_eq!(skewness(&x), 0.0);
        assert_eq!(kurtosis(&x), 0.0);
    }

    #[test]
    fn moving_average_of_linear_is_linear_in_the_interior() {
        let x: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let ma = moving_average(&x, 9);
        for i in 4..96 {
            assert!((ma[i] - x[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn pearson_detects_affine_dependence() {
        let a: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let b: Vec<f64> = a.iter().map(|&v| 2.0 * v + 3.0).collect();
        assert!((pearson(&a, &b) - 1.0).abs() < 1e-12);
        let c: Vec<f64> = a.iter().map(|&v| -v).collect();
        assert!((pearson(&a, &c) + 1.0).abs() < 1e-12);
    }
}
