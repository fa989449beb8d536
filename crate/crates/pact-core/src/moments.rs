//! Limits of the root cluster size: moment recursions, closed forms,
//! the finite cluster law below the percolation threshold.

use serde::Serialize;

use crate::bell::BellTable;
use crate::error::{PactError, Result};
use crate::series;
use crate::special::{binomial, factorial, falling, gamma, ln_binomial, ln_gamma, rising};
use crate::tree::{AlphaSpec, Model};

/// Largest moment order computed by the recursions.
pub const MAX_KMAX: usize = 20;

/// How `|C_n|` is normalised before its moments converge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClusterScaling {
    /// Divide by `n^exponent`.
    Power { exponent: f64 },
    /// Moment `k` grows like `ln^(2k-1) n`.
    LogPower,
}

/// Limit moments `E[C^k]` for `k = 1..=kmax` and the auxiliary sequence
/// produced by the recursion (empty when a closed form was used).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentTable {
    pub scaling: ClusterScaling,
    pub moments: Vec<f64>,
    pub aux: Vec<f64>,
}

impl MomentTable {
    /// `E[C^k]`, `k >= 1`.
    pub fn moment(&self, k: usize) -> f64 {
        self.moments[k - 1]
    }

    pub fn exponent(&self) -> Option<f64> {
        match self.scaling {
            ClusterScaling::Power { exponent } => Some(exponent),
            ClusterScaling::LogPower => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum RootClusterLimit {
    /// Cluster grows polynomially; moments of the scaled size.
    Scaled(MomentTable),
    /// `d`-ary tree at `p = 1/d`.
    Critical(MomentTable),
    /// `d`-ary tree below `1/d`: the cluster size converges in law to the
    /// total progeny of a binomial branching process.
    Finite { d: u32, p: f64 },
}

fn check_kmax(kmax: usize) -> Result<()> {
    if kmax == 0 || kmax > MAX_KMAX {
        return Err(PactError::InvalidArgument(format!("kmax must be in 1..={MAX_KMAX}")));
    }
    Ok(())
}

pub fn root_cluster_limit(model: &Model, kmax: usize) -> Result<RootClusterLimit> {
    check_kmax(kmax)?;
    let p = model.p();
    match model.alpha_spec() {
        AlphaSpec::NonNegative(a) => {
            if p <= 0.0 {
                return Err(PactError::Domain("root cluster is a single vertex when p = 0".into()));
            }
            if a == 0.0 {
                Ok(RootClusterLimit::Scaled(mittag_leffler_moments(p, kmax)?))
            } else {
                Ok(RootClusterLimit::Scaled(alpha_positive_moments(a, p, kmax)?))
            }
        }
        AlphaSpec::DAry(d) => {
            let dp = d as f64 * p;
            if (dp - 1.0).abs() <= 1e-12 {
                Ok(RootClusterLimit::Critical(dary_critical_moments(d, kmax)))
            } else if dp > 1.0 {
                Ok(RootClusterLimit::Scaled(dary_moments(d, p, kmax)?))
            } else {
                Ok(RootClusterLimit::Finite { d, p })
            }
        }
    }
}

/// `alpha = 0`: moments `k! / Gamma(pk + 1)`, scaling `n^p`.
pub fn mittag_leffler_moments(p: f64, kmax: usize) -> Result<MomentTable> {
    check_kmax(kmax)?;
    let moments = (1..=kmax)
        .map(|k| Ok((ln_gamma(k as f64 + 1.0)? - ln_gamma(p * k as f64 + 1.0)?).exp()))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentTable { scaling: ClusterScaling::Power { exponent: p }, moments, aux: Vec::new() })
}

/// Coefficients `C_k` for `alpha > 0`.
pub fn alpha_positive_aux(alpha: f64, p: f64, kmax: usize) -> Vec<f64> {
    let inv = 1.0 / alpha;
    let mut bell = BellTable::new();
    let mut out = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        let ck = if k == 1 {
            alpha / (p + alpha)
        } else {
            let tail = bell.next_row_tail();
            let s: f64 = (2..=k).map(|j| p.powi(j as i32) * rising(inv, j) * tail[j]).sum();
            s / ((k as f64 - 1.0) * (p * inv + 1.0))
        };
        bell.push(ck);
        out.push(ck);
    }
    out
}

pub fn alpha_positive_moments(alpha: f64, p: f64, kmax: usize) -> Result<MomentTable> {
    check_kmax(kmax)?;
    let aux = alpha_positive_aux(alpha, p, kmax);
    let lead = (1.0 + alpha) * gamma(1.0 / (1.0 + alpha))? / alpha;
    let moments = aux
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let k = (i + 1) as f64;
            Ok(c * lead / gamma((k * p + alpha * (k - 1.0)) / (alpha + 1.0))?)
        })
        .collect::<Result<Vec<_>>>()?;
    let exponent = (p + alpha) / (1.0 + alpha);
    Ok(MomentTable { scaling: ClusterScaling::Power { exponent }, moments, aux })
}

/// Closed forms at `alpha = 1`: `(C_k, E[C^k])`.
pub fn alpha_one_closed_form(p: f64, k: usize) -> Result<(f64, f64)> {
    let kf = k as f64;
    let ln_c = (kf - 1.0) * p.ln() + ln_gamma(kf * p + kf - 1.0)? - (2.0 * kf - 1.0) * (p + 1.0).ln() - ln_gamma(kf * p)?;
    let c = ln_c.exp();
    let m = 2.0 * c * std::f64::consts::PI.sqrt() / gamma((kf * p + kf - 1.0) / 2.0)?;
    Ok((c, m))
}

/// Coefficients `D_k` for `d`-ary trees above the threshold.
pub fn dary_aux(d: u32, p: f64, kmax: usize) -> Vec<f64> {
    let dp1 = d as f64 * p - 1.0;
    let mut bell = BellTable::new();
    let mut out = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        let dk = if k == 1 {
            1.0 / dp1
        } else {
            let tail = bell.next_row_tail();
            let s: f64 = (2..=k.min(d as usize)).map(|j| p.powi(j as i32) * falling(d, j) * tail[j]).sum();
            s / ((k as f64 - 1.0) * dp1)
        };
        bell.push(dk);
        out.push(dk);
    }
    out
}

pub fn dary_moments(d: u32, p: f64, kmax: usize) -> Result<MomentTable> {
    check_kmax(kmax)?;
    let df = d as f64;
    if df * p <= 1.0 {
        return Err(PactError::Regime(format!("p = {p} is not above 1/{d}")));
    }
    let aux = dary_aux(d, p, kmax);
    let g = gamma(1.0 / (df - 1.0))?;
    let moments = aux
        .iter()
        .enumerate()
        .map(|(i, &dk)| {
            let k = (i + 1) as f64;
            Ok(dk * g / gamma((k * p * df - k + 1.0) / (df - 1.0))?)
        })
        .collect::<Result<Vec<_>>>()?;
    let exponent = (p * df - 1.0) / (df - 1.0);
    Ok(MomentTable { scaling: ClusterScaling::Power { exponent }, moments, aux })
}

/// Closed forms for binary trees: `(D_k, E[C^k])`.
pub fn binary_closed_form(p: f64, k: usize) -> Result<(f64, f64)> {
    let kf = k as f64;
    let ln_d = ln_gamma(kf + 1.0)? + 2.0 * (kf - 1.0) * p.ln() - (2.0 * kf - 1.0) * (2.0 * p - 1.0).ln();
    let dk = ln_d.exp();
    Ok((dk, dk / gamma(kf * (2.0 * p - 1.0) + 1.0)?))
}

/// Coefficients `E_k` at `p = 1/d`: `E[|C_n|^k] ~ E_k ln^(2k-1) n`.
pub fn dary_critical_moments(d: u32, kmax: usize) -> MomentTable {
    let df = d as f64;
    let mut e: Vec<f64> = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        let ek = if k == 1 {
            1.0 / (df - 1.0)
        } else {
            let s: f64 = (1..k).map(|j| binomial(k, j) * e[j - 1] * e[k - j - 1]).sum();
            s / (2.0 * df * (2.0 * k as f64 - 1.0))
        };
        e.push(ek);
    }
    MomentTable { scaling: ClusterScaling::LogPower, moments: e.clone(), aux: e }
}

/// `P(|K| = k)` for `k = 1..=kmax`: total progeny of a Binomial(d, p)
/// branching process. Index 0 of the result is unused (zero).
pub fn otter_dwass_pmf(d: u32, p: f64, kmax: usize) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&p) || d < 2 {
        return Err(PactError::InvalidArgument("need d >= 2 and p in [0, 1]".into()));
    }
    let df = d as f64;
    let mut out = vec![0.0; kmax + 1];
    for k in 1..=kmax {
        let kf = k as f64;
        let ones = kf - 1.0;
        let zeros = kf * df - kf + 1.0;
        if (p == 0.0 && ones > 0.0) || (p == 1.0 && zeros > 0.0) {
            continue;
        }
        let mut ln = -kf.ln() + ln_binomial(kf * df, ones);
        if ones > 0.0 {
            ln += ones * p.ln();
        }
        ln += zeros * (1.0 - p).ln();
        out[k] = ln.exp();
    }
    Ok(out)
}

/// Survival probability of the cluster in the infinite `d`-ary tree:
/// smallest positive root of `1 - x = (1 - p x)^d`, or 0 at or below `1/d`.
pub fn p_infinity(d: u32, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || d < 2 {
        return Err(PactError::InvalidArgument("need d >= 2 and p in [0, 1]".into()));
    }
    if d as f64 * p <= 1.0 {
        return Ok(0.0);
    }
    let h = |x: f64| (1.0 - p * x).powi(d as i32) - (1.0 - x);
    // h < 0 just right of 0 and h(1) >= 0; h is convex
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Closed-form table at `alpha = 1`.
pub fn closed_form_alpha1(p: f64, kmax: usize) -> Result<MomentTable> {
    check_kmax(kmax)?;
    if p <= 0.0 {
        return Err(PactError::Domain("root cluster is a single vertex when p = 0".into()));
    }
    let (aux, moments) = (1..=kmax).map(|k| alpha_one_closed_form(p, k)).collect::<Result<Vec<_>>>()?.into_iter().unzip();
    Ok(MomentTable { scaling: ClusterScaling::Power { exponent: (p + 1.0) / 2.0 }, moments, aux })
}

/// Closed-form table for binary trees, `p > 1/2`.
pub fn closed_form_d2(p: f64, kmax: usize) -> Result<MomentTable> {
    check_kmax(kmax)?;
    if p <= 0.5 {
        return Err(PactError::Regime(format!("p = {p} is not above 1/2")));
    }
    let (aux, moments) = (1..=kmax).map(|k| binary_closed_form(p, k)).collect::<Result<Vec<_>>>()?.into_iter().unzip();
    Ok(MomentTable { scaling: ClusterScaling::Power { exponent: 2.0 * p - 1.0 }, moments, aux })
}

/// Ordinary generating function `sum_k aux_k x^k / k!` truncated at
/// `aux.len()`.
fn ogf(aux: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0];
    v.extend(aux.iter().enumerate().map(|(i, c)| c / factorial(i + 1)));
    v
}

/// Largest relative mismatch between `x c'` and `rhs(c)`, coefficients
/// compared after multiplying by `k!`.
fn residual(c: &[f64], rhs: impl Fn(&[f64], usize) -> Vec<f64>) -> f64 {
    let n = c.len();
    let r = rhs(c, n);
    (0..n)
        .map(|k| {
            let lhs = k as f64 * c[k];
            let scale = (lhs * factorial(k)).abs().max(1.0);
            (lhs - r[k]).abs() * factorial(k) / scale
        })
        .fold(0.0, f64::max)
}

fn alpha_positive_rhs(alpha: f64, p: f64, c: &[f64], n: usize) -> Vec<f64> {
    let base: Vec<f64> = c.iter().enumerate().map(|(i, x)| if i == 0 { 1.0 - p * x } else { -p * x }).collect();
    let pw = series::pow(&base, -1.0 / alpha, n);
    (0..n).map(|k| alpha / (p + alpha) * (c[k] + pw[k] - if k == 0 { 1.0 } else { 0.0 })).collect()
}

fn dary_rhs(d: u32, p: f64, t: &[f64], n: usize) -> Vec<f64> {
    let base: Vec<f64> = t.iter().enumerate().map(|(i, x)| if i == 0 { 1.0 + p * x } else { p * x }).collect();
    let pw = series::pow(&base, d as f64, n);
    let dp1 = d as f64 * p - 1.0;
    (0..n).map(|k| (pw[k] - t[k] - if k == 0 { 1.0 } else { 0.0 }) / dp1).collect()
}

/// Residual of `x c' = alpha/(p+alpha) (c - 1 + (1 - p c)^(-1/alpha))` for
/// the generating function of the `C_k` through `x^order`.
pub fn alpha_positive_ode_residual(alpha: f64, p: f64, order: usize) -> f64 {
    residual(&ogf(&alpha_positive_aux(alpha, p, order)), |c, n| alpha_positive_rhs(alpha, p, c, n))
}

/// Residual of `x t' = ((1 + p t)^d - t - 1)/(p d - 1)` for the `D_k`.
pub fn dary_ode_residual(d: u32, p: f64, order: usize) -> f64 {
    residual(&ogf(&dary_aux(d, p, order)), |t, n| dary_rhs(d, p, t, n))
}
