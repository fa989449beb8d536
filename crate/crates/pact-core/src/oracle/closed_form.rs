//! Root-cluster law for uniform attachment from its bivariate generating
//! function `-(1/p) ln(1 - u + u (1 - x)^p)`.

use crate::error::{PactError, Result};
use crate::series;

/// Largest `n` accepted; the cost is cubic in `n`.
pub const CLOSED_FORM_MAX: usize = 2000;

/// `P(|C_n| = k)` for `k = 0..=n` (entry 0 is zero), `alpha = 0`.
///
/// With `g = 1 - (1 - x)^p` the coefficient of `u^k` is `g^k / (k p)` and
/// the tree count is `1/n`, so `P(k) = n [x^n] g^k / (k p)`.
pub fn closed_form_pmf_alpha0(n: usize, p: f64) -> Result<Vec<f64>> {
    if n == 0 || n > CLOSED_FORM_MAX {
        return Err(PactError::OracleLimit { n, max: CLOSED_FORM_MAX });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(PactError::InvalidArgument(format!("p = {p} is not a probability")));
    }
    let mut pmf = vec![0.0; n + 1];
    if p == 0.0 {
        pmf[1] = 1.0;
        return Ok(pmf);
    }
    let len = n + 1;
    let mut g = series::one_minus_pow(p, len);
    g[0] = 0.0;
    for c in g.iter_mut().skip(1) {
        *c = -*c;
    }
    let mut power = g.clone();
    for (k, slot) in pmf.iter_mut().enumerate().skip(1) {
        if k > 1 {
            power = series::mul(&power, &g, len);
        }
        *slot = n as f64 * power[n] / (k as f64 * p);
    }
    Ok(pmf)
}
