//! Partial Bell polynomials `B_{k,j}(x_1, ..., x_{k-j+1})`.

use crate::special::binomial;

/// Table of `B_{k,j}` built one argument at a time.
///
/// Row `k` needs only `x_1..x_{k-1}` for `j >= 2`, which is what the
/// moment recursions exploit: compute the tail, solve for `x_k`, push it.
#[derive(Debug, Clone)]
pub struct BellTable {
    x: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl Default for BellTable {
    fn default() -> Self {
        Self::new()
    }
}

impl BellTable {
    pub fn new() -> Self {
        Self { x: Vec::new(), rows: vec![vec![1.0]] }
    }

    pub fn from_args(x: &[f64]) -> Self {
        let mut t = Self::new();
        for &v in x {
            t.push(v);
        }
        t
    }

    /// Largest `k` with a complete row.
    pub fn order(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn args(&self) -> &[f64] {
        &self.x
    }

    /// `B_{k,j}` for the next row `k = order() + 1`, valid for `j >= 2`.
    /// Entries 0 and 1 are left at zero.
    pub fn next_row_tail(&self) -> Vec<f64> {
        let k = self.rows.len();
        let mut row = vec![0.0; k + 1];
        for (j, slot) in row.iter_mut().enumerate().skip(2) {
            *slot = self.entry_from_lower(k, j);
        }
        row
    }

    fn entry_from_lower(&self, k: usize, j: usize) -> f64 {
        let mut acc = 0.0;
        for i in 1..=(k + 1 - j) {
            let lower = &self.rows[k - i];
            if j - 1 < lower.len() {
                acc += binomial(k - 1, i - 1) * self.x[i - 1] * lower[j - 1];
            }
        }
        acc
    }

    /// Append `x_k` and complete row `k`.
    pub fn push(&mut self, xk: f64) {
        let mut row = self.next_row_tail();
        self.x.push(xk);
        row[1] = xk;
        self.rows.push(row);
    }

    /// `B_{k,j}`; zero outside `0 <= j <= k <= order()`.
    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.rows.get(k).and_then(|r| r.get(j)).copied().unwrap_or(0.0)
    }
}

/// One-shot evaluation. `x[0]` is `x_1`.
pub fn bell_partial(k: usize, j: usize, x: &[f64]) -> f64 {
    if k == 0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    if j == 0 || j > k {
        return 0.0;
    }
    let need = k - j + 1;
    assert!(x.len() >= need, "bell_partial needs {need} arguments");
    // x_i for i > k-j+1 does not enter B_{k,j}
    let mut args = x[..need].to_vec();
    args.resize(k, 0.0);
    BellTable::from_args(&args).get(k, j)
}
