//! Generalised Pólya urns: construction, simulation and spectral limits.

use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use crate::error::{PactError, Result};
use crate::linalg::{dot, eigenvalues, null_space, Matrix};
use crate::pattern::{ColouredPattern, K_MAX};
use crate::tree::{Colour, Model};

/// One possible replacement vector and its probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub prob: f64,
    pub delta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UrnSpec {
    pub type_names: Vec<String>,
    pub activities: Vec<f64>,
    pub laws: Vec<Vec<Outcome>>,
    /// Composition for a red root.
    pub initial_red: Vec<f64>,
    /// Composition for a blue root.
    pub initial_blue: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum UrnKind {
    /// Red and blue attachment weights.
    Weight2,
    /// Weights plus red and blue cluster counts (inactive types).
    Cluster4,
    /// Red and blue leaves, red and blue internal-weight balls.
    Leaf4,
    /// Leaf urn with the internal colours merged; only for `p = 1/2`.
    Leaf3,
    /// Fringe-subtree urn over a pattern set closed under root-preserving
    /// subtrees and containing both single vertices.
    Fringe(Vec<ColouredPattern>),
}

fn merge(outcomes: Vec<Outcome>) -> Vec<Outcome> {
    let mut out: Vec<Outcome> = Vec::new();
    for o in outcomes {
        if o.prob <= 0.0 {
            continue;
        }
        if let Some(e) = out.iter_mut().find(|e| e.delta == o.delta) {
            e.prob += o.prob;
        } else {
            out.push(o);
        }
    }
    out
}

fn two_way(p: f64, same: Vec<f64>, flip: Vec<f64>) -> Vec<Outcome> {
    merge(vec![Outcome { prob: p, delta: same }, Outcome { prob: 1.0 - p, delta: flip }])
}

fn names(ns: &[&str]) -> Vec<String> {
    ns.iter().map(|s| s.to_string()).collect()
}

pub fn build_urn(kind: &UrnKind, model: &Model) -> Result<UrnSpec> {
    let a = model.alpha();
    let p = model.p();
    let spec = match kind {
        UrnKind::Weight2 => UrnSpec {
            type_names: names(&["red_weight", "blue_weight"]),
            activities: vec![1.0, 1.0],
            laws: vec![
                two_way(p, vec![1.0 + a, 0.0], vec![a, 1.0]),
                two_way(p, vec![0.0, 1.0 + a], vec![1.0, a]),
            ],
            initial_red: vec![1.0, 0.0],
            initial_blue: vec![0.0, 1.0],
        },
        UrnKind::Cluster4 => UrnSpec {
            type_names: names(&["red_weight", "blue_weight", "red_clusters", "blue_clusters"]),
            activities: vec![1.0, 1.0, 0.0, 0.0],
            laws: vec![
                two_way(p, vec![1.0 + a, 0.0, 0.0, 0.0], vec![a, 1.0, 0.0, 1.0]),
                two_way(p, vec![0.0, 1.0 + a, 0.0, 0.0], vec![1.0, a, 1.0, 0.0]),
                Vec::new(),
                Vec::new(),
            ],
            initial_red: vec![1.0, 0.0, 1.0, 0.0],
            initial_blue: vec![0.0, 1.0, 0.0, 1.0],
        },
        UrnKind::Leaf4 => UrnSpec {
            type_names: names(&["red_leaves", "blue_leaves", "red_internal", "blue_internal"]),
            activities: vec![1.0; 4],
            laws: vec![
                two_way(p, vec![0.0, 0.0, 1.0 + a, 0.0], vec![-1.0, 1.0, 1.0 + a, 0.0]),
                two_way(p, vec![0.0, 0.0, 0.0, 1.0 + a], vec![1.0, -1.0, 0.0, 1.0 + a]),
                two_way(p, vec![1.0, 0.0, a, 0.0], vec![0.0, 1.0, a, 0.0]),
                two_way(p, vec![0.0, 1.0, 0.0, a], vec![1.0, 0.0, 0.0, a]),
            ],
            initial_red: vec![1.0, 0.0, 0.0, 0.0],
            initial_blue: vec![0.0, 1.0, 0.0, 0.0],
        },
        UrnKind::Leaf3 => {
            if (p - 0.5).abs() > 1e-12 {
                return Err(PactError::InvalidArgument("the three-type leaf urn needs p = 1/2".into()));
            }
            UrnSpec {
                type_names: names(&["red_leaves", "blue_leaves", "internal"]),
                activities: vec![1.0; 3],
                laws: vec![
                    two_way(0.5, vec![0.0, 0.0, 1.0 + a], vec![-1.0, 1.0, 1.0 + a]),
                    two_way(0.5, vec![0.0, 0.0, 1.0 + a], vec![1.0, -1.0, 1.0 + a]),
                    two_way(0.5, vec![1.0, 0.0, a], vec![0.0, 1.0, a]),
                ],
                initial_red: vec![1.0, 0.0, 0.0],
                initial_blue: vec![0.0, 1.0, 0.0],
            }
        }
        UrnKind::Fringe(patterns) => build_fringe_urn(patterns, model)?,
    };
    spec.validate()?;
    Ok(spec)
}

/// Checks that `patterns` can index a fringe urn; returns code -> index.
pub fn check_pattern_set(patterns: &[ColouredPattern]) -> Result<HashMap<String, usize>> {
    let mut idx = HashMap::new();
    for (i, pat) in patterns.iter().enumerate() {
        let code = pat.canonical_code()?;
        if idx.insert(code.to_string(), i).is_some() {
            return Err(PactError::InvalidArgument(format!("duplicate pattern {code}")));
        }
    }
    for c in ["R", "B"] {
        if !idx.contains_key(c) {
            return Err(PactError::NotDownwardClosed(format!("single vertex {c} missing")));
        }
    }
    for pat in patterns {
        for leaf in pat.leaves() {
            let smaller = pat.without_leaf(leaf).to_string();
            if !idx.contains_key(&smaller) {
                return Err(PactError::NotDownwardClosed(format!("{pat} is in the set but {smaller} is not")));
            }
        }
    }
    Ok(idx)
}

/// Balls produced by a fringe subtree that may or may not be a pattern.
fn decompose(t: &ColouredPattern, idx: &HashMap<String, usize>, model: &Model, q: usize, out: &mut [f64]) {
    if t.size() <= K_MAX {
        if let Some(&j) = idx.get(&t.to_string()) {
            out[j] += 1.0;
            return;
        }
    }
    let special = q + t.root_colour().index();
    out[special] += model.vertex_weight(t.outdeg(0) as u32);
    for c in t.children_of(0) {
        decompose(&t.subtree(c), idx, model, q, out);
    }
}

fn build_fringe_urn(patterns: &[ColouredPattern], model: &Model) -> Result<UrnSpec> {
    let idx = check_pattern_set(patterns)?;
    if let Some(bad) = patterns.iter().find(|p| !p.fits(model)) {
        return Err(PactError::InvalidArgument(format!("pattern {bad} exceeds the out-degree cap")));
    }
    let q = patterns.len();
    let dim = q + 2;
    let a = model.alpha();
    let p = model.p();
    let mut laws = Vec::with_capacity(dim);
    let mut activities = Vec::with_capacity(dim);
    for (i, pat) in patterns.iter().enumerate() {
        let act = model.total_weight(pat.size());
        activities.push(act);
        let mut outcomes = Vec::new();
        for u in 0..pat.size() {
            let w = model.vertex_weight(pat.outdeg(u) as u32);
            if w <= 0.0 {
                continue;
            }
            for (prob, colour) in [(p, pat.colour(u)), (1.0 - p, pat.colour(u).flip())] {
                let mut delta = vec![0.0; dim];
                delta[i] -= 1.0;
                decompose(&pat.with_leaf(u, colour), &idx, model, q, &mut delta);
                outcomes.push(Outcome { prob: prob * w / act, delta });
            }
        }
        laws.push(merge(outcomes));
    }
    let red = idx["R"];
    let blue = idx["B"];
    for (special, colour) in [(q, Colour::Red), (q + 1, Colour::Blue)] {
        activities.push(1.0);
        let (same, other) = if colour == Colour::Red { (red, blue) } else { (blue, red) };
        let mut d_same = vec![0.0; dim];
        d_same[special] += a;
        d_same[same] += 1.0;
        let mut d_flip = vec![0.0; dim];
        d_flip[special] += a;
        d_flip[other] += 1.0;
        laws.push(two_way(p, d_same, d_flip));
    }
    let mut type_names: Vec<String> = patterns.iter().map(|p| p.to_string()).collect();
    type_names.push("*R".into());
    type_names.push("*B".into());
    let mut initial_red = vec![0.0; dim];
    initial_red[red] = 1.0;
    let mut initial_blue = vec![0.0; dim];
    initial_blue[blue] = 1.0;
    Ok(UrnSpec { type_names, activities, laws, initial_red, initial_blue })
}

impl UrnSpec {
    pub fn dim(&self) -> usize {
        self.activities.len()
    }

    pub fn initial(&self, root: Colour) -> &[f64] {
        match root {
            Colour::Red => &self.initial_red,
            Colour::Blue => &self.initial_blue,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.dim();
        if self.laws.len() != q || self.type_names.len() != q || self.initial_red.len() != q || self.initial_blue.len() != q {
            return Err(PactError::InvalidArgument("urn dimensions disagree".into()));
        }
        for (i, law) in self.laws.iter().enumerate() {
            if self.activities[i] < 0.0 {
                return Err(PactError::InvalidArgument(format!("negative activity for type {i}")));
            }
            if self.activities[i] == 0.0 {
                continue;
            }
            let total: f64 = law.iter().map(|o| o.prob).sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(PactError::InvalidArgument(format!("law of type {i} has mass {total}")));
            }
            if law.iter().any(|o| o.delta.len() != q) {
                return Err(PactError::InvalidArgument(format!("law of type {i} has wrong length")));
            }
        }
        Ok(())
    }

    /// Mean replacement vector of type `j`.
    pub fn mean_replacement(&self, j: usize) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for o in &self.laws[j] {
            for (mi, d) in m.iter_mut().zip(&o.delta) {
                *mi += o.prob * d;
            }
        }
        m
    }

    /// Intensity matrix: column `j` is `a_j E[xi_j]`.
    pub fn intensity(&self) -> Matrix {
        let q = self.dim();
        let mut a = Matrix::zeros(q, q);
        for j in 0..q {
            let m = self.mean_replacement(j);
            for i in 0..q {
                a[(i, j)] = self.activities[j] * m[i];
            }
        }
        a
    }

    /// `E[xi_j xi_j^T]`.
    pub fn second_moment(&self, j: usize) -> Matrix {
        let q = self.dim();
        let mut m = Matrix::zeros(q, q);
        for o in &self.laws[j] {
            m = m.add(&Matrix::outer(&o.delta, &o.delta).scale(o.prob));
        }
        m
    }

    /// Activity added by one draw, if it is the same for every outcome.
    pub fn balance(&self) -> Option<f64> {
        let mut val: Option<f64> = None;
        for (j, law) in self.laws.iter().enumerate() {
            if self.activities[j] == 0.0 {
                continue;
            }
            for o in law {
                let s = dot(&self.activities, &o.delta);
                match val {
                    None => val = Some(s),
                    Some(v) if (v - s).abs() > 1e-9 * (1.0 + v.abs()) => return None,
                    _ => {}
                }
            }
        }
        val
    }
}

/// Simulate `steps` draws from `initial`.
pub fn run_urn<R: Rng + ?Sized>(spec: &UrnSpec, initial: &[f64], steps: usize, rng: &mut R) -> Result<Vec<f64>> {
    let mut state = initial.to_vec();
    let q = spec.dim();
    let cumulative: Vec<Vec<f64>> = spec
        .laws
        .iter()
        .map(|law| {
            let mut acc = 0.0;
            law.iter().map(|o| {
                acc += o.prob;
                acc
            }).collect()
        })
        .collect();
    let mut weights = vec![0.0; q];
    for _ in 0..steps {
        let mut total = 0.0;
        for i in 0..q {
            weights[i] = spec.activities[i] * state[i].max(0.0);
            total += weights[i];
        }
        if total <= 0.0 {
            return Err(PactError::InvalidArgument("urn has no active balls".into()));
        }
        let mut u = rng.random::<f64>() * total;
        let mut ty = q - 1;
        for (i, &w) in weights.iter().enumerate() {
            if u < w {
                ty = i;
                break;
            }
            u -= w;
        }
        while weights[ty] == 0.0 {
            ty -= 1;
        }
        let cum = &cumulative[ty];
        let v = rng.random::<f64>() * cum[cum.len() - 1];
        let k = cum.iter().position(|&c| v < c).unwrap_or(cum.len() - 1);
        for (s, d) in state.iter_mut().zip(&spec.laws[ty][k].delta) {
            *s += d;
        }
        for (i, s) in state.iter_mut().enumerate() {
            if *s < 0.0 {
                if *s < -1e-9 {
                    return Err(PactError::NegativeCount { type_index: i, value: *s });
                }
                *s = 0.0;
            }
        }
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UrnRegime {
    Subcritical,
    Critical,
    Supercritical,
}

/// Whether `lambda1` and `2 Re lambda2` coincide to the critical tolerance.
pub fn is_critical(lambda1: f64, lambda2: f64) -> bool {
    (lambda1 - 2.0 * lambda2).abs() <= 1e-9 * (1.0 + lambda1.abs())
}

pub fn classify(lambda1: f64, lambda2: f64) -> UrnRegime {
    if is_critical(lambda1, lambda2) {
        UrnRegime::Critical
    } else if lambda1 > 2.0 * lambda2 {
        UrnRegime::Subcritical
    } else {
        UrnRegime::Supercritical
    }
}

/// Eigenvalues sorted by decreasing real part with biorthogonal left
/// (`u_j`) and right (`v_j`) eigenvectors.
#[derive(Debug, Clone, Serialize)]
pub struct EigenAnalysis {
    pub eigenvalues: Vec<f64>,
    pub right: Vec<Vec<f64>>,
    pub left: Vec<Vec<f64>>,
    /// Group id per eigenvalue; equal ids share an eigenspace.
    pub group: Vec<usize>,
}

impl EigenAnalysis {
    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda2(&self) -> f64 {
        self.eigenvalues[1]
    }

    pub fn regime(&self) -> UrnRegime {
        classify(self.lambda1(), self.lambda2())
    }

    /// Indices of eigenvalues in the same eigenspace as index `j`.
    pub fn block(&self, j: usize) -> Vec<usize> {
        (0..self.eigenvalues.len()).filter(|&i| self.group[i] == self.group[j]).collect()
    }

    /// `sum v_j u_j^T` over the eigenspace of index `j`.
    pub fn projector(&self, j: usize) -> Matrix {
        let q = self.eigenvalues.len();
        let mut m = Matrix::zeros(q, q);
        for i in self.block(j) {
            m = m.add(&Matrix::outer(&self.right[i], &self.left[i]));
        }
        m
    }
}

fn normalise_left_first_max(u: &mut [f64], v: &mut [f64]) {
    let m = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let lead = u.iter().copied().find(|x| x.abs() >= m * (1.0 - 1e-9)).unwrap_or(1.0);
    for x in u.iter_mut() {
        *x /= lead;
    }
    let s = dot(u, v);
    for x in v.iter_mut() {
        *x /= s;
    }
}

pub fn eigen_analysis(spec: &UrnSpec) -> Result<EigenAnalysis> {
    let a = spec.intensity();
    let q = a.rows();
    let scale = a.max_abs().max(1.0);
    let mut ev = Vec::with_capacity(q);
    for (re, im) in eigenvalues(&a)? {
        if im.abs() > 1e-4 * scale {
            return Err(PactError::Spectrum(format!("complex eigenvalue {re} + {im}i")));
        }
        ev.push(re);
    }
    ev.sort_by(|x, y| y.total_cmp(x));
    // cluster numerically equal eigenvalues
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for &x in &ev {
        match clusters.last_mut() {
            Some(c) if (c[c.len() - 1] - x).abs() <= 1e-6 * scale => c.push(x),
            _ => clusters.push(vec![x]),
        }
    }
    let tol = 1e-8 * scale;
    let mut eigenvalues_out = Vec::with_capacity(q);
    let mut right = Vec::with_capacity(q);
    let mut left = Vec::with_capacity(q);
    let mut group = Vec::with_capacity(q);
    for (g, c) in clusters.iter().enumerate() {
        let lam = c.iter().sum::<f64>() / c.len() as f64;
        let shifted = a.sub(&Matrix::identity(q).scale(lam));
        let vs = null_space(&shifted, tol);
        let us = null_space(&shifted.transpose(), tol);
        if vs.len() != c.len() || us.len() != c.len() {
            return Err(PactError::NonDiagonalizable);
        }
        // make U^T V the identity on this eigenspace
        let m = c.len();
        let gram = Matrix::from_fn(m, m, |i, j| dot(&us[i], &vs[j]));
        let ginv = gram.inverse().map_err(|_| PactError::NonDiagonalizable)?;
        let mut vs_bi: Vec<Vec<f64>> = Vec::with_capacity(m);
        for j in 0..m {
            let mut v = vec![0.0; q];
            for (k, vk) in vs.iter().enumerate() {
                for (x, y) in v.iter_mut().zip(vk) {
                    *x += ginv[(k, j)] * y;
                }
            }
            vs_bi.push(v);
        }
        for (u, v) in us.into_iter().zip(vs_bi) {
            eigenvalues_out.push(lam);
            right.push(v);
            left.push(u);
            group.push(g);
        }
    }
    if clusters[0].len() != 1 {
        return Err(PactError::Spectrum("largest eigenvalue is not simple".into()));
    }
    // leading pair: a^T v1 = 1 and u1^T v1 = 1
    let s = dot(&spec.activities, &right[0]);
    if s.abs() < 1e-12 {
        return Err(PactError::Spectrum("leading eigenvector is orthogonal to the activities".into()));
    }
    for x in right[0].iter_mut() {
        *x /= s;
    }
    let t = dot(&left[0], &right[0]);
    for x in left[0].iter_mut() {
        *x /= t;
    }
    for j in 1..q {
        if clusters[group[j]].len() == 1 {
            let (u, v) = (&mut left[j], &mut right[j]);
            normalise_left_first_max(u, v);
        }
    }
    Ok(EigenAnalysis { eigenvalues: eigenvalues_out, right, left, group })
}

/// `sum_i a_i v_{1,i} E[xi_i xi_i^T]`.
pub fn b_matrix(spec: &UrnSpec, eig: &EigenAnalysis) -> Matrix {
    let q = spec.dim();
    let mut b = Matrix::zeros(q, q);
    for i in 0..q {
        let w = spec.activities[i] * eig.right[0][i];
        if w != 0.0 {
            b = b.add(&spec.second_moment(i).scale(w));
        }
    }
    b
}

/// Gaussian covariance term for `lambda1 > 2 Re lambda2`. The normalised
/// counts `(X_n - n lambda1 v1) / sqrt(n)` have limit covariance
/// `lambda1 * sigma_one`.
pub fn sigma_one(spec: &UrnSpec, eig: &EigenAnalysis) -> Result<Matrix> {
    match eig.regime() {
        UrnRegime::Subcritical => {}
        r => return Err(PactError::Regime(format!("sigma_one needs the subcritical regime, found {r:?}"))),
    }
    let q = spec.dim();
    let b = b_matrix(spec, eig);
    let l1 = eig.lambda1();
    let mut out = Matrix::zeros(q, q);
    for j in 1..q {
        let bu: Vec<f64> = b.vecmat(&eig.left[j]);
        for k in 1..q {
            let c = dot(&bu, &eig.left[k]) / (l1 - eig.eigenvalues[j] - eig.eigenvalues[k]);
            if c != 0.0 {
                out = out.add(&Matrix::outer(&eig.right[j], &eig.right[k]).scale(c));
            }
        }
    }
    Ok(out)
}

/// Covariance for `lambda1 = 2 lambda2`; the counts are scaled by
/// `sqrt(n ln n)`.
pub fn sigma_two(spec: &UrnSpec, eig: &EigenAnalysis) -> Result<Matrix> {
    if eig.regime() != UrnRegime::Critical {
        return Err(PactError::Regime("sigma_two needs lambda1 = 2 lambda2".into()));
    }
    let q = spec.dim();
    let b = b_matrix(spec, eig);
    let mut out = Matrix::zeros(q, q);
    let block = eig.block(1);
    for &j in &block {
        for &k in &block {
            let c = b.bilinear(&eig.left[j], &eig.left[k]);
            out = out.add(&Matrix::outer(&eig.right[j], &eig.right[k]).scale(c));
        }
    }
    Ok(out)
}

/// Fluctuations of a linear observable `M X_n` of the urn.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum ObservableLimit {
    /// `(M X_n - n lambda1 M v1) / sqrt(n)` is asymptotically normal.
    Gaussian { covariance: Matrix },
    /// Same, scaled by `sqrt(n ln n)`.
    LogGaussian { covariance: Matrix },
    /// `(M X_n - n lambda1 M v1) / n^exponent` tends to a random multiple
    /// of `direction`; `index` is the eigenvector responsible.
    Power { exponent: f64, direction: Vec<f64>, index: usize },
}

/// Limit law of `M X_n`. Eigendirections that `M` annihilates do not
/// contribute, so the effective second eigenvalue is the largest one whose
/// right eigenvector survives the projection.
pub fn observable_limit(spec: &UrnSpec, eig: &EigenAnalysis, obs: &Matrix) -> Result<ObservableLimit> {
    let q = spec.dim();
    if obs.cols() != q {
        return Err(PactError::InvalidArgument(format!("observable has {} columns, urn has {q} types", obs.cols())));
    }
    let images: Vec<Vec<f64>> = eig.right.iter().map(|v| obs.matvec(v)).collect();
    let live: Vec<bool> = (0..q)
        .map(|j| {
            let tol = 1e-9 * obs.max_abs().max(1.0) * eig.right[j].iter().fold(1.0f64, |m, x| m.max(x.abs()));
            j > 0 && images[j].iter().any(|x| x.abs() > tol)
        })
        .collect();
    let l1 = eig.lambda1();
    let m = obs.rows();
    let Some(top) = (1..q).find(|&j| live[j]) else {
        return Ok(ObservableLimit::Gaussian { covariance: Matrix::zeros(m, m) });
    };
    let b = b_matrix(spec, eig);
    let pair = |j: usize, k: usize| Matrix::outer(&images[j], &images[k]).scale(b.bilinear(&eig.left[j], &eig.left[k]));
    match classify(l1, eig.eigenvalues[top]) {
        UrnRegime::Subcritical => {
            let mut cov = Matrix::zeros(m, m);
            for j in (1..q).filter(|&j| live[j]) {
                for k in (1..q).filter(|&k| live[k]) {
                    let denom = l1 - eig.eigenvalues[j] - eig.eigenvalues[k];
                    cov = cov.add(&pair(j, k).scale(l1 / denom));
                }
            }
            Ok(ObservableLimit::Gaussian { covariance: cov })
        }
        UrnRegime::Critical => {
            let block: Vec<usize> = eig.block(top).into_iter().filter(|&j| live[j]).collect();
            let mut cov = Matrix::zeros(m, m);
            for &j in &block {
                for &k in &block {
                    cov = cov.add(&pair(j, k));
                }
            }
            Ok(ObservableLimit::LogGaussian { covariance: cov })
        }
        UrnRegime::Supercritical => {
            let block: Vec<usize> = eig.block(top).into_iter().filter(|&j| live[j]).collect();
            if block.len() != 1 {
                return Err(PactError::Spectrum("dominant fluctuation eigenvalue is repeated".into()));
            }
            Ok(ObservableLimit::Power { exponent: eig.eigenvalues[top] / l1, direction: images[top].clone(), index: top })
        }
    }
}
