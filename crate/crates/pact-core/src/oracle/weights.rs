//! Exact root-cluster law from the weighted tree generating function.
//!
//! With `T(x)` the weighted exponential generating function of increasing
//! trees and `Phi` the out-degree weight series, the root-cluster series
//! `R(x, u)` (red root) solves `R' = u Phi(p R + (1 - p) T)`. Coefficients
//! are generated online, one order in `x` at a time, as polynomials in `u`.

use serde::Serialize;

use crate::error::{PactError, Result};
use crate::special::{factorial, KahanSum};
use crate::tree::{AlphaSpec, Model};

/// Largest tree size accepted by the exact root-cluster oracle.
pub const N_ORACLE: usize = 64;

/// Weighted counts: `b[n]` is the total weight of increasing trees on `n`
/// vertices and `r[n][k]` the part of it with root cluster of size `k`,
/// both divided by `n!`.
#[derive(Debug, Clone, Serialize)]
pub struct WeightTable {
    pub nmax: usize,
    pub r_egf: Vec<Vec<f64>>,
    pub b_egf: Vec<f64>,
}

impl WeightTable {
    /// `phi(deg)`: weight of a vertex with `deg` children.
    pub fn phi(model: &Model, deg: u32) -> f64 {
        match model.alpha_spec() {
            AlphaSpec::NonNegative(a) if a == 0.0 => 1.0,
            AlphaSpec::NonNegative(a) => crate::special::rising(1.0 / a, deg as usize),
            AlphaSpec::DAry(d) => crate::special::falling(d, deg as usize),
        }
    }

    pub fn build(model: &Model, nmax: usize) -> Result<Self> {
        if nmax == 0 || nmax > N_ORACLE {
            return Err(PactError::OracleLimit { n: nmax, max: N_ORACLE });
        }
        let p = model.p();
        // composition rule for Phi(W): m P_m = sum_i coef(m, i) W_i P_{m-i}
        let coef: Box<dyn Fn(usize, usize) -> f64> = match model.alpha_spec() {
            AlphaSpec::NonNegative(a) if a == 0.0 => Box::new(|_m, i| i as f64),
            AlphaSpec::NonNegative(a) => Box::new(move |m, i| i as f64 / a + (m - i) as f64),
            AlphaSpec::DAry(d) => Box::new(move |m, i| d as f64 * i as f64 - (m - i) as f64),
        };
        // scalar chain for T and polynomial chain for R
        let mut t = vec![0.0f64; nmax + 1];
        let mut pt = vec![1.0f64];
        let mut r: Vec<Vec<f64>> = vec![Vec::new(); nmax + 1];
        let mut w: Vec<Vec<f64>> = vec![Vec::new(); nmax + 1];
        let mut pr: Vec<Vec<f64>> = vec![vec![1.0]];
        for n in 1..=nmax {
            let m = n - 1;
            if m > 0 {
                let mut acc = KahanSum::new();
                for i in 1..=m {
                    acc.add(coef(m, i) * t[i] * pt[m - i]);
                }
                pt.push(acc.value() / m as f64);
                let mut poly = vec![0.0f64; m + 1];
                for i in 1..=m {
                    let c = coef(m, i);
                    for (a, wa) in w[i].iter().enumerate() {
                        if *wa == 0.0 {
                            continue;
                        }
                        for (b, pb) in pr[m - i].iter().enumerate() {
                            poly[a + b] += c * wa * pb;
                        }
                    }
                }
                pr.push(poly.into_iter().map(|x| x / m as f64).collect());
            }
            t[n] = pt[m] / n as f64;
            let mut rn = vec![0.0; n + 1];
            for (k, x) in pr[m].iter().enumerate() {
                rn[k + 1] = x / n as f64;
            }
            let mut wn: Vec<f64> = rn.iter().map(|x| p * x).collect();
            wn[0] += (1.0 - p) * t[n];
            r[n] = rn;
            w[n] = wn;
        }
        Ok(Self { nmax, r_egf: r, b_egf: t })
    }

    /// `r_{n,k}` without the `1/n!` normalisation.
    pub fn r(&self, n: usize, k: usize) -> f64 {
        self.r_egf[n].get(k).copied().unwrap_or(0.0) * factorial(n)
    }

    pub fn b(&self, n: usize) -> f64 {
        self.b_egf[n] * factorial(n)
    }

    /// `P(|C_n| = k)` for `k = 0..=n` (entry 0 is zero).
    pub fn pmf(&self, n: usize) -> Vec<f64> {
        self.r_egf[n].iter().map(|x| x / self.b_egf[n]).collect()
    }
}

/// `P(|C_n| = k)` for `k = 0..=n` (entry 0 is zero), exact up to rounding.
pub fn exact_root_cluster_pmf(model: &Model, n: usize) -> Result<Vec<f64>> {
    Ok(WeightTable::build(model, n)?.pmf(n))
}
