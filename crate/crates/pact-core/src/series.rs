//! Truncated power series in one variable.

/// Coefficients of `(1 - y)^gamma` through `y^len-1`.
pub fn one_minus_pow(gamma: f64, len: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(len);
    if len == 0 {
        return c;
    }
    c.push(1.0);
    for m in 1..len {
        let prev = c[m - 1];
        c.push(prev * (m as f64 - 1.0 - gamma) / m as f64);
    }
    c
}

/// Product truncated to `len` terms.
pub fn mul(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, &ai) in a.iter().enumerate().take(len) {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(len - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// `a(y)^e` for `a_0 > 0` (Miller's recurrence).
pub fn pow(a: &[f64], e: f64, len: usize) -> Vec<f64> {
    assert!(!a.is_empty() && a[0] > 0.0, "pow needs a positive constant term");
    let mut b = vec![0.0; len];
    if len == 0 {
        return b;
    }
    b[0] = a[0].powf(e);
    for m in 1..len {
        let mut acc = 0.0;
        for i in 1..=m.min(a.len() - 1) {
            acc += ((e + 1.0) * i as f64 - m as f64) * a[i] * b[m - i];
        }
        b[m] = acc / (m as f64 * a[0]);
    }
    b
}

/// `exp(a(y))`.
pub fn exp(a: &[f64], len: usize) -> Vec<f64> {
    let mut b = vec![0.0; len];
    if len == 0 {
        return b;
    }
    b[0] = a.first().copied().unwrap_or(0.0).exp();
    for m in 1..len {
        let mut acc = 0.0;
        for i in 1..=m.min(a.len().saturating_sub(1)) {
            acc += i as f64 * a[i] * b[m - i];
        }
        b[m] = acc / m as f64;
    }
    b
}

/// `-ln(1 - y)`.
pub fn neg_log_one_minus(len: usize) -> Vec<f64> {
    (0..len).map(|m| if m == 0 { 0.0 } else { 1.0 / m as f64 }).collect()
}

pub fn derivative(a: &[f64]) -> Vec<f64> {
    a.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect()
}
