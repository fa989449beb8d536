//! Sample estimators with standard errors.

use crate::linalg::Matrix;

/// Moments of a sample of vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSummary {
    pub count: usize,
    pub mean: Vec<f64>,
    /// Unbiased sample covariance.
    pub cov: Matrix,
    pub mean_se: Vec<f64>,
    /// Standard error of each covariance entry, from the spread of the
    /// centred products.
    pub cov_se: Matrix,
    /// Raw moments `E[Y^2]`, `E[Y^3]`, `E[Y^4]` per coordinate.
    pub m2: Vec<f64>,
    pub m3: Vec<f64>,
    pub m4: Vec<f64>,
    pub m2_se: Vec<f64>,
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone, count: usize) -> (f64, f64) {
    let n = count as f64;
    let mean = values.clone().sum::<f64>() / n;
    if count < 2 {
        return (mean, f64::NAN);
    }
    let var = values.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Summarise `samples[r][i]`; every row must have the same length.
pub fn summarize(samples: &[Vec<f64>]) -> SampleSummary {
    let count = samples.len();
    let dim = samples.first().map_or(0, Vec::len);
    let mut mean = vec![0.0; dim];
    let mut mean_se = vec![0.0; dim];
    let mut m2 = vec![0.0; dim];
    let mut m3 = vec![0.0; dim];
    let mut m4 = vec![0.0; dim];
    let mut m2_se = vec![0.0; dim];
    for i in 0..dim {
        let col = samples.iter().map(move |r| r[i]);
        (mean[i], mean_se[i]) = mean_and_se(col.clone(), count);
        (m2[i], m2_se[i]) = mean_and_se(col.clone().map(|x| x * x), count);
        m3[i] = col.clone().map(|x| x * x * x).sum::<f64>() / count as f64;
        m4[i] = col.map(|x| (x * x) * (x * x)).sum::<f64>() / count as f64;
    }
    let mut cov = Matrix::zeros(dim, dim);
    let mut cov_se = Matrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let (mi, mj) = (mean[i], mean[j]);
            let prods = samples.iter().map(move |r| (r[i] - mi) * (r[j] - mj));
            let (pm, se) = mean_and_se(prods, count);
            let c = if count > 1 { pm * count as f64 / (count as f64 - 1.0) } else { f64::NAN };
            cov[(i, j)] = c;
            cov[(j, i)] = c;
            cov_se[(i, j)] = se;
            cov_se[(j, i)] = se;
        }
    }
    SampleSummary { count, mean, cov, mean_se, cov_se, m2, m3, m4, m2_se }
}

/// Empirical law of positive integers, indexed `0..=max`.
pub fn empirical_pmf(values: &[u64]) -> Vec<f64> {
    let max = values.iter().copied().max().unwrap_or(0) as usize;
    let mut pmf = vec![0.0; max + 1];
    for &v in values {
        pmf[v as usize] += 1.0;
    }
    let n = values.len().max(1) as f64;
    pmf.iter_mut().for_each(|x| *x /= n);
    pmf
}

/// Total variation distance; the shorter vector is padded with zeros.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().max(b.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    0.5 * (0..len).map(|i| (at(a, i) - at(b, i)).abs()).sum::<f64>()
}

/// Expected total variation between a law and the empirical law of
/// `samples` draws from it, to leading order.
pub fn sampling_tv(pmf: &[f64], samples: usize) -> f64 {
    let n = samples as f64;
    0.5 * pmf.iter().map(|&p| (2.0 * p * (1.0 - p).max(0.0) / (std::f64::consts::PI * n)).sqrt()).sum::<f64>()
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
