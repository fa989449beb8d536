//! Falling-factorial moments of the root cluster from exact series
//! coefficients.
//!
//! `R_k = d^k R / du^k` at `u = 1` solves a linear first-order equation
//! whose coefficients are powers of `1 - y` in the rescaled variable
//! `y = beta x`. Each order is produced by a two-term recurrence; orders
//! `k >= 2` need series products and cost `O(n^2)`.

use std::collections::HashMap;

use crate::error::{PactError, Result};
use crate::series;
use crate::special::{binomial, falling, rising};
use crate::tree::{AlphaSpec, Model};

pub const SERIES_MAX_K: usize = 4;
pub const SERIES_MAX_N: usize = 1_000_000;
/// Cap on `nmax` when `k >= 2`.
pub const SERIES_MAX_N_QUADRATIC: usize = 20_000;

struct Family {
    beta: f64,
    /// `c_j`, `gamma_j` with `Phi^(j)(T) p^j = c_j (1 - y)^gamma_j`.
    c: Vec<f64>,
    gamma: Vec<f64>,
    tree: Vec<f64>,
}

fn family(model: &Model, k: usize, len: usize) -> Family {
    let p = model.p();
    match model.alpha_spec() {
        AlphaSpec::NonNegative(a) if a == 0.0 => {
            let tree = series::neg_log_one_minus(len);
            Family {
                beta: 1.0,
                c: (0..=k).map(|j| p.powi(j as i32)).collect(),
                gamma: vec![-1.0; k + 1],
                tree,
            }
        }
        AlphaSpec::NonNegative(a) => {
            let mut tree: Vec<f64> = series::one_minus_pow(a / (1.0 + a), len).iter().map(|c| -c).collect();
            tree[0] = 0.0;
            Family {
                beta: 1.0 + 1.0 / a,
                c: (0..=k).map(|j| p.powi(j as i32) * rising(1.0 / a, j)).collect(),
                gamma: (0..=k).map(|j| -(1.0 + a * j as f64) / (1.0 + a)).collect(),
                tree,
            }
        }
        AlphaSpec::DAry(d) => {
            let df = d as f64;
            let mut tree = series::one_minus_pow(-1.0 / (df - 1.0), len);
            tree[0] = 0.0;
            Family {
                beta: df - 1.0,
                c: (0..=k).map(|j| p.powi(j as i32) * falling(d, j)).collect(),
                gamma: (0..=k).map(|j| -(df - j as f64) / (df - 1.0)).collect(),
                tree,
            }
        }
    }
}

fn add_scaled(acc: &mut [f64], x: &[f64], s: f64) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += s * b;
    }
}

/// Partial Bell polynomials with series arguments `x[i] = R_i`.
struct SeriesBell<'a> {
    x: &'a [Vec<f64>],
    len: usize,
    memo: HashMap<(usize, usize), Vec<f64>>,
}

impl SeriesBell<'_> {
    fn get(&mut self, m: usize, j: usize) -> Vec<f64> {
        if let Some(v) = self.memo.get(&(m, j)) {
            return v.clone();
        }
        let mut out = vec![0.0; self.len];
        if m == 0 && j == 0 {
            out[0] = 1.0;
        } else if m > 0 && j > 0 && j <= m {
            for i in 1..=(m + 1 - j) {
                let lower = self.get(m - i, j - 1);
                let prod = series::mul(&self.x[i], &lower, self.len);
                add_scaled(&mut out, &prod, binomial(m - 1, i - 1));
            }
        }
        self.memo.insert((m, j), out.clone());
        out
    }
}

/// Coefficients `[y^n] R_j` for `j = 0..=k`, `n = 0..=nmax`, and the
/// rescaling `beta` (`[x^n] = beta^n [y^n]`).
pub fn series_coefficients(model: &Model, k: usize, nmax: usize) -> Result<(Vec<Vec<f64>>, f64)> {
    if k > SERIES_MAX_K {
        return Err(PactError::InvalidArgument(format!("series moments support k <= {SERIES_MAX_K}")));
    }
    let cap = if k >= 2 { SERIES_MAX_N_QUADRATIC } else { SERIES_MAX_N };
    if nmax == 0 || nmax > cap {
        return Err(PactError::OracleLimit { n: nmax, max: cap });
    }
    let len = nmax + 1;
    let fam = family(model, k, len);
    let phi: Vec<Vec<f64>> =
        (0..=k).map(|j| series::one_minus_pow(fam.gamma[j], len).into_iter().map(|x| x * fam.c[j]).collect()).collect();
    let mut r: Vec<Vec<f64>> = vec![fam.tree.clone()];
    for m in 1..=k {
        let mut h = vec![0.0; len];
        {
            let mut bell = SeriesBell { x: &r, len, memo: HashMap::new() };
            for j in 2..=m {
                if fam.c[j] != 0.0 {
                    let b = bell.get(m, j);
                    add_scaled(&mut h, &series::mul(&phi[j], &b, len), 1.0);
                }
            }
            if m == 1 {
                add_scaled(&mut h, &phi[0], 1.0);
            } else {
                for j in 1..m {
                    if fam.c[j] != 0.0 {
                        let b = bell.get(m - 1, j);
                        add_scaled(&mut h, &series::mul(&phi[j], &b, len), m as f64);
                    }
                }
            }
        }
        let c1 = fam.c[1];
        let beta = fam.beta;
        let mut a = vec![0.0; len];
        for n in 0..nmax {
            let g = h[n] - if n > 0 { h[n - 1] } else { 0.0 };
            a[n + 1] = ((beta * n as f64 + c1) * a[n] + g) / (beta * (n + 1) as f64);
        }
        r.push(a);
    }
    Ok((r, fam.beta))
}

/// `E[(|C_n|)_k]` (falling factorial) for `n = 0..=nmax`; entry 0 is unused.
pub fn series_moments(model: &Model, k: usize, nmax: usize) -> Result<Vec<f64>> {
    let (r, _) = series_coefficients(model, k, nmax)?;
    let mut out = vec![0.0; nmax + 1];
    for n in 1..=nmax {
        out[n] = r[k][n] / r[0][n];
    }
    Ok(out)
}
