//! Small statistics used by the harness.

use crate::error::{invalid, Result};

/// Binomial standard error `sqrt(p (1 - p) / R)`.
pub fn binomial_se(p: f64, replicates: usize) -> f64 {
    (p * (1.0 - p) / replicates as f64).sqrt()
}

/// Median of a sample (mean of the middle pair for even sizes).
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(invalid("median of an empty sample"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Ok(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

/// Least-squares slope of `log error` against `log n`, with its standard error.
pub fn fit_exponent(pairs: &[(f64, f64)]) -> Result<(f64, f64)> {
    if pairs.len() < 4 {
        return Err(invalid(format!("need at least 4 points, got {}", pairs.len())));
    }
    if let Some(&(n, e)) = pairs.iter().find(|&&(n, e)| !(n > 0.0 && e > 0.0)) {
        return Err(invalid(format!("need positive n and error, got ({n}, {e})")));
    }
    let m = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("all sample sizes are equal"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
        .sum();
    Ok((slope, (ssr / (m - 2.0) / sxx).sqrt()))
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut dist) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        dist = dist.max((i as f64 / na - j as f64 / nb).abs());
    }
    dist
}

/// One-sample Kolmogorov–Smirnov distance against a continuous CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        for exponent in [-1.0 / 3.0, -0.25] {
            let pairs: Vec<(f64, f64)> = [1e3, 3e3, 1e4, 3e4, 1e5]
                .iter()
                .map(|&n| (n, 2.5 * f64::powf(n, exponent)))
                .collect();
            let (slope, se) = fit_exponent(&pairs).unwrap();
            assert!((slope - exponent).abs() < 1e-12);
            assert!(se < 1e-10);
        }
    }

    #[test]
    fn summed_power_laws_fall_between() {
        let pairs: Vec<(f64, f64)> = [1e3, 3e3, 1e4, 3e4, 1e5, 3e5]
            .iter()
            .map(|&n: &f64| (n, 3.0 * n.powf(-0.5) + n.powf(-0.25)))
            .collect();
        let (slope, _) = fit_exponent(&pairs).unwrap();
        assert!(slope > -0.5 && slope < -0.25);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(fit_exponent(&[(1.0, 1.0), (2.0, 0.5), (3.0, 0.3)]).is_err());
        assert!(fit_exponent(&[(1.0, 1.0), (2.0, 0.0), (3.0, 0.3), (4.0, 0.2)]).is_err());
    }

    #[test]
    fn median_and_se() {
        assert_eq!(median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]).unwrap(), 2.5);
        assert_eq!(binomial_se(0.0, 100), 0.0);
        assert!((binomial_se(0.5, 100) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn ks_distances() {
        let a: Vec<f64> = (0..100).map(f64::from).collect();
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        let b: Vec<f64> = (100..200).map(f64::from).collect();
        assert_eq!(ks_two_sample(&a, &b), 1.0);
        let u: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_one_sample(&u, |x| x) <= 0.0005 + 1e-12);
    }
}
