//! Limit-law predictions for colour, cluster, leaf and fringe counts.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{PactError, Result};
use crate::linalg::{dot, Matrix};
use crate::oracle::enumerate::{enumerate_small, TreeDistribution};
use crate::pattern::{downward_closure, fringe_census, ColouredPattern, K_MAX};
use crate::special::gamma;
use crate::tree::{Colour, Model};
use crate::urn::{build_urn, classify, eigen_analysis, observable_limit, ObservableLimit, UrnKind, UrnRegime};

pub use crate::moments::{root_cluster_limit, MomentTable, RootClusterLimit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeInfo {
    pub regime: UrnRegime,
    /// `p = 1/2`: colours are independent of the tree.
    pub degenerate: bool,
}

fn is_half(p: f64) -> bool {
    (p - 0.5).abs() <= 1e-12
}

/// Regime of the colour urn: compares `p` with `(3 - alpha)/4`.
pub fn regime(model: &Model) -> RegimeInfo {
    RegimeInfo { regime: classify(model.lambda1(), model.lambda2()), degenerate: is_half(model.p()) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZMoments {
    pub mean: f64,
    pub second: f64,
}

/// First two moments of the supercritical limit variable.
pub fn z_moments(model: &Model) -> Result<ZMoments> {
    if regime(model).regime != UrnRegime::Supercritical {
        return Err(PactError::Regime("Z is defined only in the supercritical regime".into()));
    }
    let a = model.alpha();
    let p = model.p();
    let g = gamma(1.0 / (1.0 + a))?;
    let mean = g / gamma((2.0 * p + a) / (1.0 + a))?;
    let second = g * (1.0 + a) * (4.0 * p + a - 2.0) / (gamma((4.0 * p + 2.0 * a - 1.0) / (1.0 + a))? * (4.0 * p + a - 3.0));
    Ok(ZMoments { mean, second })
}

#[derive(Debug, Clone, PartialEq)]
pub enum GlobalStatistic {
    Vertices,
    Clusters,
    Leaves,
    Fringe(Vec<ColouredPattern>),
}

impl GlobalStatistic {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Vertices => "vertices",
            Self::Clusters => "clusters",
            Self::Leaves => "leaves",
            Self::Fringe(_) => "fringe",
        }
    }

    pub fn entries(&self) -> Vec<String> {
        match self {
            Self::Vertices => vec!["red_vertices".into(), "blue_vertices".into()],
            Self::Clusters => vec!["red_clusters".into(), "blue_clusters".into()],
            Self::Leaves => vec!["red_leaves".into(), "blue_leaves".into()],
            Self::Fringe(ps) => ps.iter().map(|p| p.to_string()).collect(),
        }
    }
}

/// Normalisation of `X_n - n mean`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scaling {
    Sqrt,
    SqrtLog,
    Power { exponent: f64 },
}

impl Scaling {
    pub fn factor(&self, n: f64) -> f64 {
        match *self {
            Scaling::Sqrt => n.sqrt(),
            Scaling::SqrtLog => (n * n.ln()).sqrt(),
            Scaling::Power { exponent } => n.powf(exponent),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub statistic: String,
    pub entries: Vec<String>,
    /// Per-vertex mean coefficients.
    pub mean: Vec<f64>,
    pub regime: UrnRegime,
    pub degenerate: bool,
    pub scaling: Scaling,
    /// Limit covariance for the Gaussian scalings.
    pub covariance: Option<Matrix>,
    /// For the power scaling the limit is `B Z` times this vector, `B` the
    /// root colour sign.
    pub limit_vector: Option<Vec<f64>>,
    pub z_moments: Option<ZMoments>,
}

fn antidiagonal(c: f64) -> Matrix {
    Matrix::from_rows(&[vec![c, -c], vec![-c, c]])
}

fn symmetric2(diag: f64, off: f64) -> Matrix {
    Matrix::from_rows(&[vec![diag, off], vec![off, diag]])
}

/// Variance constant of the colour counts in the Gaussian regime.
pub fn vertex_variance_constant(model: &Model) -> f64 {
    let (a, p) = (model.alpha(), model.p());
    if is_half(p) {
        0.25
    } else {
        (4.0 * a * p - a - 1.0) / (4.0 * (4.0 * p + a - 3.0))
    }
}

pub fn vertex_covariance_critical(model: &Model) -> Matrix {
    let a = model.alpha();
    antidiagonal((a - 1.0).powi(2) / (4.0 * (1.0 + a)))
}

pub fn cluster_covariance(model: &Model) -> Matrix {
    let (a, p) = (model.alpha(), model.p());
    let s = (1.0 - p) / (4.0 * (3.0 - a - 4.0 * p));
    symmetric2(s * (1.0 - p) * (a + 4.0 * p + 1.0), s * (3.0 * p - 4.0 * p * p - a * p - a - 1.0))
}

pub fn cluster_covariance_critical(model: &Model) -> Matrix {
    antidiagonal((model.alpha() + 1.0) / 16.0)
}

pub fn leaf_covariance(model: &Model) -> Matrix {
    let (a, p) = (model.alpha(), model.p());
    if is_half(p) {
        let s = (a + 1.0) / (4.0 * (2.0 + a).powi(2) * (3.0 + a));
        return symmetric2(s * (7.0 + 6.0 * a + a * a), s * (-5.0 - 4.0 * a - a * a));
    }
    let s = (a + 1.0) / (4.0 * (2.0 + a).powi(2) * (3.0 + a) * (2.0 * p - 3.0) * (4.0 * p + a - 3.0));
    let (a2, a3, p2) = (a * a, a * a * a, p * p);
    let diag = (8.0 * p2 - 6.0 * p - 1.0) * a3 + (48.0 * p2 - 46.0 * p + 1.0) * a2 + (112.0 * p2 - 158.0 * p + 49.0) * a + 88.0 * p2
        - 158.0 * p
        + 71.0;
    let off = (1.0 + 6.0 * p - 8.0 * p2) * a3 - (48.0 * p2 - 50.0 * p + 7.0) * a2 - (96.0 * p2 - 126.0 * p + 37.0) * a - 72.0 * p2
        + 122.0 * p
        - 53.0;
    symmetric2(s * diag, s * off)
}

pub fn leaf_covariance_critical(model: &Model) -> Matrix {
    let a = model.alpha();
    antidiagonal((a - 1.0).powi(2) * (a + 1.0) / (4.0 * (3.0 + a).powi(2)))
}

/// Gaussian covariance of the four-type cluster urn (weights, clusters).
pub fn cluster_urn_covariance(model: &Model) -> Matrix {
    let (a, p) = (model.alpha(), model.p());
    let w = (a + 1.0) * (a * a + (4.0 * p - 2.0) * a + 1.0);
    let cc = -(p - 1.0).powi(2) * (a + 4.0 * p + 1.0);
    let cx = -(p - 1.0) * (4.0 * p * p + a * p - 3.0 * p + a + 1.0);
    let x = (a + 1.0) * (a + 2.0 * p - 1.0);
    let s = 1.0 / (4.0 * (a - 3.0 + 4.0 * p));
    Matrix::from_rows(&[
        vec![-w, w, x, -x],
        vec![w, -w, -x, x],
        vec![x, -x, cc, cx],
        vec![-x, x, cx, cc],
    ])
    .scale(s)
}

pub fn cluster_urn_covariance_critical(model: &Model) -> Matrix {
    let h = model.alpha() + 1.0;
    Matrix::from_rows(&[
        vec![h, -h, -h / 2.0, h / 2.0],
        vec![-h, h, h / 2.0, -h / 2.0],
        vec![-h / 2.0, h / 2.0, h / 4.0, -h / 4.0],
        vec![h / 2.0, -h / 2.0, -h / 4.0, h / 4.0],
    ])
    .scale(0.25)
}

/// Gaussian covariance of the four-type leaf urn (leaves, internal weights).
pub fn leaf_urn_covariance(model: &Model) -> Matrix {
    let (a, p) = (model.alpha(), model.p());
    let (a2, a3, a4, p2) = (a * a, a * a * a, a * a * a * a, p * p);
    let l = leaf_covariance(model);
    let s = (a + 1.0) / (4.0 * (2.0 + a).powi(2) * (3.0 + a) * (2.0 * p - 3.0) * (4.0 * p + a - 3.0));
    let s33 = -(a + 1.0)
        * ((2.0 * p - 3.0) * a4 + 2.0 * (4.0 * p2 - 7.0) * a3 + 4.0 * (10.0 * p2 - 9.0 * p - 4.0) * a2
            + (56.0 * p2 - 60.0 * p - 4.0) * a
            + 8.0 * p2
            + 14.0 * p
            - 23.0);
    let s31 = (a + 1.0)
        * ((2.0 * p - 1.0) * a3 + (-8.0 * p2 + 22.0 * p - 9.0) * a2 + (-32.0 * p2 + 62.0 * p - 21.0) * a - 40.0 * p2 + 74.0 * p
            - 29.0);
    let s32 = -(a + 1.0)
        * ((2.0 * p - 1.0) * a3 + (-8.0 * p2 + 22.0 * p - 9.0) * a2 + (-32.0 * p2 + 66.0 * p - 27.0) * a - 24.0 * p2 + 38.0 * p
            - 11.0);
    let s34 = (a + 1.0).powi(2)
        * ((2.0 * p - 3.0) * a3 + (8.0 * p2 - 2.0 * p - 11.0) * a2 + (32.0 * p2 - 34.0 * p - 5.0) * a + 24.0 * p2 - 22.0 * p - 5.0);
    let (l11, l12) = (l[(0, 0)], l[(0, 1)]);
    Matrix::from_rows(&[
        vec![l11, l12, s * s31, s * s32],
        vec![l12, l11, s * s32, s * s31],
        vec![s * s31, s * s32, s * s33, s * s34],
        vec![s * s32, s * s31, s * s34, s * s33],
    ])
}

pub fn leaf_urn_covariance_critical(model: &Model) -> Matrix {
    let a = model.alpha();
    let d = (3.0 + a).powi(2);
    let x = (a - 1.0).powi(2) * (a + 1.0) / (4.0 * d);
    let y = (a + 1.0).powi(2) * (a - 1.0) / (2.0 * d);
    let z = (1.0 + a).powi(3) / d;
    Matrix::from_rows(&[
        vec![x, -x, -y, y],
        vec![-x, x, y, -y],
        vec![-y, y, z, -z],
        vec![y, -y, -z, z],
    ])
}

/// Gaussian covariance of the three-type leaf urn at `p = 1/2`.
pub fn leaf3_urn_covariance(model: &Model) -> Matrix {
    let a = model.alpha();
    let s = (a + 1.0) / (4.0 * (2.0 + a).powi(2) * (3.0 + a));
    let d = 7.0 + 6.0 * a + a * a;
    let o = -5.0 - 4.0 * a - a * a;
    let e = -2.0 * (1.0 + a);
    Matrix::from_rows(&[vec![d, o, e], vec![o, d, e], vec![e, e, 4.0 * (1.0 + a)]]).scale(s)
}

/// `C[i][j]`: number of vertices of `cols[j]` whose fringe subtree is
/// isomorphic to `rows[i]`.
pub fn occurrence_matrix(rows: &[ColouredPattern], cols: &[ColouredPattern]) -> Result<Matrix> {
    let mut m = Matrix::zeros(rows.len(), cols.len());
    for (j, c) in cols.iter().enumerate() {
        let counts = fringe_census(&c.to_tree(), rows)?;
        for (i, x) in counts.into_iter().enumerate() {
            m[(i, j)] = x as f64;
        }
    }
    Ok(m)
}

/// Limiting fringe frequencies `X_n^i / n`.
pub fn fringe_mu(patterns: &[ColouredPattern], model: &Model) -> Result<Vec<f64>> {
    let mut laws: HashMap<usize, TreeDistribution> = HashMap::new();
    let h = 1.0 / (model.alpha() + 1.0);
    let mut out = Vec::with_capacity(patterns.len());
    for pat in patterns {
        let k = pat.size();
        if k > K_MAX {
            return Err(PactError::PatternTooLarge { size: k, limit: K_MAX });
        }
        if !laws.contains_key(&k) {
            laws.insert(k, enumerate_small(model, k)?);
        }
        let prob = laws[&k].probability_of(pat);
        let kf = k as f64;
        out.push(prob * h / ((kf + h - 1.0) * (kf + h)));
    }
    Ok(out)
}

/// Red minus blue attachment weight carried by each fringe-urn ball.
fn weight_difference(closure: &[ColouredPattern], model: &Model) -> Vec<f64> {
    let mut g: Vec<f64> = closure
        .iter()
        .map(|p| {
            let w = p.colour_weights(model);
            w[Colour::Red.index()] - w[Colour::Blue.index()]
        })
        .collect();
    g.push(1.0);
    g.push(-1.0);
    g
}

fn from_observable(limit: ObservableLimit) -> (Scaling, Option<Matrix>, Option<(Vec<f64>, usize)>) {
    match limit {
        ObservableLimit::Gaussian { covariance } => (Scaling::Sqrt, Some(covariance), None),
        ObservableLimit::LogGaussian { covariance } => (Scaling::SqrtLog, Some(covariance), None),
        ObservableLimit::Power { exponent, direction, index } => (Scaling::Power { exponent }, None, Some((direction, index))),
    }
}

fn fringe_prediction(patterns: &[ColouredPattern], model: &Model) -> Result<Prediction> {
    let info = regime(model);
    let closure: Vec<ColouredPattern> = downward_closure(patterns)?.into_iter().filter(|p| p.fits(model)).collect();
    let spec = build_urn(&UrnKind::Fringe(closure.clone()), model)?;
    let eig = eigen_analysis(&spec)?;
    let occ = occurrence_matrix(patterns, &closure)?;
    let mut obs = Matrix::zeros(patterns.len(), spec.dim());
    for i in 0..patterns.len() {
        for j in 0..closure.len() {
            obs[(i, j)] = occ[(i, j)];
        }
    }
    let (scaling, covariance, power) = from_observable(observable_limit(&spec, &eig, &obs)?);
    let mut limit_vector = None;
    let mut z = None;
    if let Some((direction, index)) = power {
        let g = dot(&weight_difference(&closure, model), &eig.right[index]);
        if g.abs() < 1e-12 {
            return Err(PactError::Spectrum("fluctuation direction carries no colour imbalance".into()));
        }
        limit_vector = Some(direction.iter().map(|x| x / g).collect());
        z = Some(z_moments(model)?);
    }
    Ok(Prediction {
        statistic: "fringe".into(),
        entries: GlobalStatistic::Fringe(patterns.to_vec()).entries(),
        mean: fringe_mu(patterns, model)?,
        regime: info.regime,
        degenerate: info.degenerate,
        scaling,
        covariance,
        limit_vector,
        z_moments: z,
    })
}

/// Red minus blue attachment weight per ball of a built urn.
fn urn_weight_difference(kind: &UrnKind, model: &Model) -> Vec<f64> {
    match kind {
        UrnKind::Weight2 => vec![1.0, -1.0],
        UrnKind::Cluster4 => vec![1.0, -1.0, 0.0, 0.0],
        UrnKind::Leaf4 => vec![1.0, -1.0, 1.0, -1.0],
        UrnKind::Leaf3 => vec![1.0, -1.0, 0.0],
        UrnKind::Fringe(closure) => weight_difference(closure, model),
    }
}

/// Limit of the full composition vector of an urn run for `n - 1` draws.
pub fn urn_prediction(kind: &UrnKind, model: &Model) -> Result<Prediction> {
    let info = regime(model);
    let spec = build_urn(kind, model)?;
    let eig = eigen_analysis(&spec)?;
    let l1 = eig.lambda1();
    let mean: Vec<f64> = eig.right[0].iter().map(|x| l1 * x).collect();
    let (scaling, covariance, power) = from_observable(observable_limit(&spec, &eig, &Matrix::identity(spec.dim()))?);
    let mut limit_vector = None;
    let mut z = None;
    if let Some((direction, index)) = power {
        let g = dot(&urn_weight_difference(kind, model), &eig.right[index]);
        if g.abs() > 1e-12 && info.regime == UrnRegime::Supercritical {
            limit_vector = Some(direction.iter().map(|x| x / g).collect());
            z = Some(z_moments(model)?);
        }
    }
    let name = match kind {
        UrnKind::Weight2 => "urn_weight2",
        UrnKind::Cluster4 => "urn_cluster4",
        UrnKind::Leaf4 => "urn_leaf4",
        UrnKind::Leaf3 => "urn_leaf3",
        UrnKind::Fringe(_) => "urn_fringe",
    };
    Ok(Prediction {
        statistic: name.into(),
        entries: spec.type_names.clone(),
        mean,
        regime: info.regime,
        degenerate: info.degenerate,
        scaling,
        covariance,
        limit_vector,
        z_moments: z,
    })
}

/// Mean coefficients, scaling and limit for one statistic.
pub fn global_limit(statistic: &GlobalStatistic, model: &Model) -> Result<Prediction> {
    let info = regime(model);
    let (a, p) = (model.alpha(), model.p());
    let super_exp = Scaling::Power { exponent: model.lambda2() / model.lambda1() };
    let half = info.degenerate;
    let (mean, scaling, covariance, limit_vector) = match statistic {
        GlobalStatistic::Fringe(ps) => return fringe_prediction(ps, model),
        GlobalStatistic::Vertices => {
            let mean = vec![0.5, 0.5];
            match info.regime {
                _ if half => (mean, Scaling::Sqrt, Some(antidiagonal(0.25)), None),
                UrnRegime::Subcritical => (mean, Scaling::Sqrt, Some(antidiagonal(vertex_variance_constant(model))), None),
                UrnRegime::Critical => (mean, Scaling::SqrtLog, Some(vertex_covariance_critical(model)), None),
                UrnRegime::Supercritical => {
                    let s = (2.0 * p - 1.0) / (2.0 * (2.0 * p + a - 1.0));
                    (mean, super_exp, None, Some(vec![s, -s]))
                }
            }
        }
        GlobalStatistic::Clusters => {
            let m = (1.0 - p) / 2.0;
            let mean = vec![m, m];
            match info.regime {
                UrnRegime::Subcritical => (mean, Scaling::Sqrt, Some(cluster_covariance(model)), None),
                UrnRegime::Critical => (mean, Scaling::SqrtLog, Some(cluster_covariance_critical(model)), None),
                UrnRegime::Supercritical => {
                    let s = (p - 1.0) / (2.0 * (2.0 * p + a - 1.0));
                    (mean, super_exp, None, Some(vec![s, -s]))
                }
            }
        }
        GlobalStatistic::Leaves => {
            let m = (1.0 + a) / (4.0 + 2.0 * a);
            let mean = vec![m, m];
            match info.regime {
                _ if half => (mean, Scaling::Sqrt, Some(leaf_covariance(model)), None),
                UrnRegime::Subcritical => (mean, Scaling::Sqrt, Some(leaf_covariance(model)), None),
                UrnRegime::Critical => (mean, Scaling::SqrtLog, Some(leaf_covariance_critical(model)), None),
                UrnRegime::Supercritical => {
                    let s = (2.0 * p - 1.0) / (2.0 * a + 4.0 * p);
                    (mean, super_exp, None, Some(vec![s, -s]))
                }
            }
        }
    };
    let z = if limit_vector.is_some() { Some(z_moments(model)?) } else { None };
    Ok(Prediction {
        statistic: statistic.name().into(),
        entries: statistic.entries(),
        mean,
        regime: info.regime,
        degenerate: info.degenerate,
        scaling,
        covariance,
        limit_vector,
        z_moments: z,
    })
}
