//! Replicate runner and per-statistic aggregation.

use rayon::prelude::*;
use serde_json::json;

use super::compare::{compare_matrix, compare_value, Comparison, Tolerance, Verdict};
use super::config::{ExperimentConfig, Statistic};
use super::estimate::{empirical_pmf, sampling_tv, summarize, total_variation, SampleSummary};
use super::report::{Meta, Report, ScaledSummary, StatisticResult};
use crate::error::{PactError, Result};
use crate::moments::{otter_dwass_pmf, root_cluster_limit, RootClusterLimit};
use crate::pattern::{fringe_census, K_MAX};
use crate::rng::replicate_rng;
use crate::stats::{cluster_counts, colour_counts, leaf_counts, root_cluster_size};
use crate::theory::{global_limit, urn_prediction, GlobalStatistic, Prediction, Scaling};
use crate::tree::{grow_coloured_tree, random_root_colour, Colour, Model};
use crate::urn::{build_urn, run_urn, UrnSpec};

/// Upper end of the exact law used for finite root clusters.
const FINITE_LAW_MAX: usize = 100_000;

struct Replicate {
    /// `+1` for a red root, `-1` for a blue one.
    sign: f64,
    values: Vec<Vec<f64>>,
}

fn pair((a, b): (u64, u64)) -> Vec<f64> {
    vec![a as f64, b as f64]
}

fn simulate_replicate(config: &ExperimentConfig, urns: &[Option<UrnSpec>], rep: u64) -> Result<Replicate> {
    let mut rng = replicate_rng(config.seed, rep);
    let model = &config.model;
    let tree = if config.statistics.iter().any(Statistic::needs_tree) {
        Some(grow_coloured_tree(model, config.n, &mut rng)?)
    } else {
        None
    };
    let root = match &tree {
        Some(t) => t.colour(0),
        None => random_root_colour(&mut rng),
    };
    let mut values = Vec::with_capacity(config.statistics.len());
    for (stat, urn) in config.statistics.iter().zip(urns) {
        let t = tree.as_ref();
        let v = match stat {
            Statistic::Vertices => pair(colour_counts(t.expect("tree grown"))),
            Statistic::Clusters => pair(cluster_counts(t.expect("tree grown"))),
            Statistic::Leaves => pair(leaf_counts(t.expect("tree grown"))),
            Statistic::RootCluster => vec![root_cluster_size(t.expect("tree grown")) as f64],
            Statistic::Fringe(ps) => fringe_census(t.expect("tree grown"), ps)?.into_iter().map(|x| x as f64).collect(),
            Statistic::Urn(_) => {
                let spec = urn.as_ref().expect("urn built");
                run_urn(spec, spec.initial(root), config.n - 1, &mut rng)?
            }
        };
        values.push(v);
    }
    Ok(Replicate { sign: if root == Colour::Red { 1.0 } else { -1.0 }, values })
}

fn scaled_summary(scaling: &str, exponent: Option<f64>, s: &SampleSummary) -> ScaledSummary {
    ScaledSummary { scaling: scaling.into(), exponent, mean: s.mean.clone(), cov: s.cov.clone(), m3: s.m3.clone(), m4: s.m4.clone() }
}

fn unavailable(err: &PactError) -> serde_json::Value {
    json!({ "unavailable": err.to_string() })
}

fn linear_result(name: String, samples: &[Vec<f64>], signs: &[f64], n: usize, prediction: Result<Prediction>) -> Result<StatisticResult> {
    let raw = summarize(samples);
    let dim = raw.mean.len();
    let nf = n as f64;
    let pred = match prediction {
        Ok(p) => p,
        Err(e) => {
            let centred: Vec<Vec<f64>> =
                samples.iter().map(|x| x.iter().zip(&raw.mean).map(|(a, m)| (a - m) / nf.sqrt()).collect()).collect();
            let s = summarize(&centred);
            return Ok(StatisticResult {
                statistic: name,
                entries: (0..dim).map(|i| i.to_string()).collect(),
                mean: raw.mean.clone(),
                cov: raw.cov.clone(),
                scaled: scaled_summary("none", None, &s),
                prediction: Some(unavailable(&e)),
                pmf: None,
                comparisons: Vec::new(),
                verdict: Verdict::Inconclusive,
            });
        }
    };
    if pred.mean.len() != dim {
        return Err(PactError::InvalidArgument(format!("prediction has {} entries, sample has {dim}", pred.mean.len())));
    }
    let factor = pred.scaling.factor(nf);
    let usable = factor.is_finite() && factor > 0.0;
    let f = if usable { factor } else { 1.0 };
    let scaled: Vec<Vec<f64>> =
        samples.iter().map(|x| x.iter().zip(&pred.mean).map(|(a, m)| (a - nf * m) / f).collect()).collect();
    let s = summarize(&scaled);
    let (label, exponent) = match pred.scaling {
        Scaling::Sqrt => ("sqrt", Some(0.5)),
        Scaling::SqrtLog => ("sqrt_log", Some(0.5)),
        Scaling::Power { exponent } => ("power", Some(exponent)),
    };
    let entries = pred.entries.clone();
    let mut checks: Vec<Comparison> = (0..dim)
        .map(|i| compare_value(format!("mean/{}", entries[i]), raw.mean[i] / nf, pred.mean[i], Some(raw.mean_se[i] / nf), Tolerance::DEFAULT))
        .collect();
    if usable {
        if let Some(cov) = &pred.covariance {
            checks.extend(compare_matrix("cov", &entries, &s.cov, cov, &s.cov_se, Tolerance::DEFAULT)?);
        }
        if let (Some(v), Some(z)) = (&pred.limit_vector, &pred.z_moments) {
            let signed: Vec<Vec<f64>> = scaled.iter().zip(signs).map(|(y, b)| y.iter().map(|x| x * b).collect()).collect();
            let sg = summarize(&signed);
            for i in 0..dim {
                let e = &entries[i];
                checks.push(compare_value(format!("scaled_mean/{e}"), s.mean[i], 0.0, Some(s.mean_se[i]), Tolerance::ZScore { z: 4.0 }));
                checks.push(compare_value(format!("signed_mean/{e}"), sg.mean[i], v[i] * z.mean, Some(sg.mean_se[i]), Tolerance::DEFAULT));
                checks.push(compare_value(format!("second_moment/{e}"), s.m2[i], v[i] * v[i] * z.second, Some(s.m2_se[i]), Tolerance::DEFAULT));
            }
        }
    }
    let prediction = serde_json::to_value(&pred).map_err(|e| PactError::Io(e.to_string()))?;
    Ok(StatisticResult {
        statistic: name,
        entries,
        mean: raw.mean.clone(),
        cov: raw.cov.clone(),
        scaled: scaled_summary(label, exponent, &s),
        prediction: Some(prediction),
        pmf: None,
        comparisons: checks,
        verdict: Verdict::Inconclusive,
    }
    .finish())
}

fn root_cluster_result(sizes: &[f64], model: &Model, n: usize) -> Result<StatisticResult> {
    let samples: Vec<Vec<f64>> = sizes.iter().map(|&s| vec![s]).collect();
    let raw = summarize(&samples);
    let nf = n as f64;
    let base = StatisticResult {
        statistic: "root_cluster".into(),
        entries: vec!["root_cluster_size".into()],
        mean: raw.mean.clone(),
        cov: raw.cov.clone(),
        scaled: scaled_summary("none", None, &raw),
        prediction: None,
        pmf: None,
        comparisons: Vec::new(),
        verdict: Verdict::Inconclusive,
    };
    let limit = match root_cluster_limit(model, 4) {
        Ok(l) => l,
        Err(e) => return Ok(StatisticResult { prediction: Some(unavailable(&e)), ..base }),
    };
    let to_value = |l: &RootClusterLimit| serde_json::to_value(l).map_err(|e| PactError::Io(e.to_string()));
    let result = match &limit {
        RootClusterLimit::Scaled(t) => {
            let e = t.exponent().expect("power scaling");
            let scaled: Vec<Vec<f64>> = sizes.iter().map(|&s| vec![s / nf.powf(e)]).collect();
            let s = summarize(&scaled);
            let checks = vec![
                compare_value("moment_1", s.mean[0], t.moment(1), Some(s.mean_se[0]), Tolerance::DEFAULT),
                compare_value("moment_2", s.m2[0], t.moment(2), Some(s.m2_se[0]), Tolerance::DEFAULT),
            ];
            StatisticResult { scaled: scaled_summary("power", Some(e), &s), prediction: Some(to_value(&limit)?), comparisons: checks, ..base }
        }
        RootClusterLimit::Critical(t) => {
            let l = nf.ln();
            let scaled: Vec<Vec<f64>> = sizes.iter().map(|&s| vec![s / l]).collect();
            let s = summarize(&scaled);
            let checks = if l > 0.0 {
                vec![
                    compare_value("moment_1", raw.mean[0] / l, t.moment(1), Some(raw.mean_se[0] / l), Tolerance::DEFAULT),
                    compare_value("moment_2", raw.m2[0] / l.powi(3), t.moment(2), Some(raw.m2_se[0] / l.powi(3)), Tolerance::DEFAULT),
                ]
            } else {
                Vec::new()
            };
            StatisticResult { scaled: scaled_summary("log_power", None, &s), prediction: Some(to_value(&limit)?), comparisons: checks, ..base }
        }
        RootClusterLimit::Finite { d, p } => {
            let counts: Vec<u64> = sizes.iter().map(|&s| s as u64).collect();
            let emp = empirical_pmf(&counts);
            let exact = otter_dwass_pmf(*d, *p, n.min(FINITE_LAW_MAX))?;
            let tv = total_variation(&emp, &exact);
            let allowance = 0.02f64.max(4.0 * sampling_tv(&exact, sizes.len()));
            let mean = 1.0 / (1.0 - *d as f64 * p);
            let checks = vec![
                compare_value("total_variation", tv, 0.0, None, Tolerance::Absolute { absolute: allowance }),
                compare_value("mean", raw.mean[0], mean, Some(raw.mean_se[0]), Tolerance::DEFAULT),
            ];
            let shown = exact[..emp.len().min(exact.len())].to_vec();
            let prediction = json!({ "regime": "finite", "d": d, "p": p, "mean": mean, "pmf": shown });
            StatisticResult { prediction: Some(prediction), pmf: Some(emp), comparisons: checks, ..base }
        }
    };
    Ok(result.finish())
}

/// Grow the replicates and aggregate every requested statistic.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let model = &config.model;
    let mut urns = Vec::with_capacity(config.statistics.len());
    for stat in &config.statistics {
        match stat {
            Statistic::Urn(kind) => urns.push(Some(build_urn(kind, model)?)),
            Statistic::Fringe(ps) => {
                if let Some(p) = ps.iter().find(|p| p.size() > K_MAX) {
                    return Err(PactError::PatternTooLarge { size: p.size(), limit: K_MAX });
                }
                urns.push(None);
            }
            _ => urns.push(None),
        }
    }
    let reps: Vec<Replicate> =
        (0..config.replicates as u64).into_par_iter().map(|rep| simulate_replicate(config, &urns, rep)).collect::<Result<_>>()?;
    let signs: Vec<f64> = reps.iter().map(|r| r.sign).collect();
    let mut results = Vec::with_capacity(config.statistics.len());
    for (k, stat) in config.statistics.iter().enumerate() {
        let samples: Vec<Vec<f64>> = reps.iter().map(|r| r.values[k].clone()).collect();
        let r = match stat {
            Statistic::RootCluster => {
                let sizes: Vec<f64> = samples.iter().map(|v| v[0]).collect();
                root_cluster_result(&sizes, model, config.n)?
            }
            Statistic::Urn(kind) => linear_result(stat.name(), &samples, &signs, config.n, urn_prediction(kind, model))?,
            Statistic::Vertices => linear_result(stat.name(), &samples, &signs, config.n, global_limit(&GlobalStatistic::Vertices, model))?,
            Statistic::Clusters => linear_result(stat.name(), &samples, &signs, config.n, global_limit(&GlobalStatistic::Clusters, model))?,
            Statistic::Leaves => linear_result(stat.name(), &samples, &signs, config.n, global_limit(&GlobalStatistic::Leaves, model))?,
            Statistic::Fringe(ps) => {
                linear_result(stat.name(), &samples, &signs, config.n, global_limit(&GlobalStatistic::Fringe(ps.clone()), model))?
            }
        };
        results.push(r);
    }
    Ok(Report {
        meta: Meta {
            seed: config.seed,
            model: model.into(),
            n: config.n,
            reps: config.replicates,
            version: env!("CARGO_PKG_VERSION").into(),
        },
        results,
    })
}

/// Root cluster sizes of `reps` independent trees, in replicate order.
pub fn root_cluster_sizes(model: &Model, n: usize, reps: usize, seed: u64) -> Result<Vec<u64>> {
    (0..reps as u64)
        .into_par_iter()
        .map(|rep| Ok(root_cluster_size(&grow_coloured_tree(model, n, &mut replicate_rng(seed, rep))?)))
        .collect()
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::urn::UrnKind;

    fn config(model: Model, n: usize, reps: usize, stats: Vec<Statistic>) -> ExperimentConfig {
        ExperimentConfig::new(model, n, reps, 7, stats).unwrap()
    }

    #[test]
    fn full_retention_gives_the_whole_tree() {
        let c = config(Model::with_alpha(0.0, 1.0).unwrap(), 100, 10, vec![Statistic::RootCluster]);
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.results[0].mean, vec![100.0]);
        assert_eq!(r.results[0].cov[(0, 0)], 0.0);
        assert_eq!(r.results[0].verdict, Verdict::Pass);
    }

    #[test]
    fn reports_do_not_depend_on_thread_count() {
        let c = config(
            Model::with_alpha(1.0, 0.8).unwrap(),
            300,
            40,
            vec![Statistic::Vertices, Statistic::RootCluster, Statistic::parse("fringe:2").unwrap(), Statistic::Urn(UrnKind::Cluster4)],
        );
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| run_experiment(&c).unwrap().to_json().unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(4));
        assert_eq!(one, run(3));
    }

    #[test]
    fn subcritical_vertices_small_run() {
        let c = config(Model::with_alpha(0.0, 0.6).unwrap(), 2000, 400, vec![Statistic::Vertices]);
        let r = run_experiment(&c).unwrap();
        let res = &r.results[0];
        assert_eq!(res.scaled.scaling, "sqrt");
        assert_eq!(res.verdict, Verdict::Pass, "{:#?}", res.comparisons);
        // R + B = n
        assert!((res.cov[(0, 1)] + res.cov[(0, 0)]).abs() < 1e-6);
    }

    #[test]
    fn supercritical_checks_are_emitted() {
        let c = config(Model::with_alpha(0.0, 0.9).unwrap(), 3000, 200, vec![Statistic::Vertices]);
        let r = run_experiment(&c).unwrap();
        let names: Vec<&str> = r.results[0].comparisons.iter().map(|c| c.name.as_str()).collect();
        assert!(names.contains(&"second_moment/red_vertices"));
        assert!(names.contains(&"signed_mean/blue_vertices"));
        assert_eq!(r.results[0].scaled.exponent, Some(0.8));
    }

    #[test]
    fn urn_and_tree_agree_on_weights() {
        // alpha = 0: the weight urn is the vertex count process
        let m = Model::with_alpha(0.0, 0.55).unwrap();
        let c = config(m, 2000, 300, vec![Statistic::Vertices, Statistic::Urn(UrnKind::Weight2)]);
        let r = run_experiment(&c).unwrap();
        for res in &r.results {
            assert_eq!(res.verdict, Verdict::Pass, "{}: {:#?}", res.statistic, res.comparisons);
            assert!((res.mean.iter().sum::<f64>() - 2000.0).abs() < 1e-9);
        }
    }

    #[test]
    fn finite_root_cluster_law() {
        let c = config(Model::dary(3, 0.2).unwrap(), 10_000, 2000, vec![Statistic::RootCluster]);
        let r = run_experiment(&c).unwrap();
        let res = &r.results[0];
        assert!(res.pmf.is_some());
        assert_eq!(res.verdict, Verdict::Pass, "{:#?}", res.comparisons);
    }

    #[test]
    fn missing_theory_is_inconclusive() {
        let c = config(Model::with_alpha(0.0, 0.0).unwrap(), 50, 5, vec![Statistic::RootCluster]);
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.results[0].verdict, Verdict::Inconclusive);
        assert_eq!(r.verdict(), Verdict::Inconclusive);
    }

    #[test]
    fn rejects_an_infeasible_urn() {
        let c = config(Model::with_alpha(0.0, 0.7).unwrap(), 50, 5, vec![Statistic::Urn(UrnKind::Leaf3)]);
        assert!(run_experiment(&c).is_err());
    }

    #[test]
    fn csv_has_one_row_per_comparison() {
        let c = config(Model::with_alpha(0.0, 0.6).unwrap(), 200, 30, vec![Statistic::Leaves]);
        let r = run_experiment(&c).unwrap();
        let csv = r.to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "name,empirical,predicted,rel_err,verdict");
        assert_eq!(lines.len(), 1 + r.results[0].comparisons.len());
        assert!(lines[1].starts_with("leaves/mean/red_leaves,"));
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(v["meta"]["model"]["alpha"], 0.0);
        assert!(v["meta"]["model"].get("dary").is_none());
        assert!(v["results"][0]["scaled"]["m4"].is_array());
    }
}
