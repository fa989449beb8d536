use std::fmt;

use crate::error::{PactError, Result};
use crate::pattern::{all_patterns, downward_closure, ColouredPattern, K_MAX};
use crate::tree::Model;
use crate::urn::UrnKind;

#[derive(Debug, Clone, PartialEq)]
pub enum Statistic {
    Vertices,
    Clusters,
    Leaves,
    RootCluster,
    Fringe(Vec<ColouredPattern>),
    /// Composition of an urn run for `n - 1` draws.
    Urn(UrnKind),
}

fn parse_patterns(text: &str) -> Result<Vec<ColouredPattern>> {
    if let Ok(k) = text.parse::<usize>() {
        if k == 0 || k > K_MAX {
            return Err(PactError::PatternTooLarge { size: k, limit: K_MAX });
        }
        return Ok(all_patterns(k));
    }
    let pats = text.split(';').filter(|s| !s.trim().is_empty()).map(ColouredPattern::parse).collect::<Result<Vec<_>>>()?;
    if pats.is_empty() {
        return Err(PactError::InvalidArgument("empty pattern list".into()));
    }
    if let Some(p) = pats.iter().find(|p| p.size() > K_MAX) {
        return Err(PactError::PatternTooLarge { size: p.size(), limit: K_MAX });
    }
    Ok(pats)
}

impl Statistic {
    /// `vertices`, `clusters`, `leaves`, `rootcluster`, `fringe:<k>`,
    /// `fringe:<pattern>;<pattern>...`, `urn:weight2|cluster4|leaf4|leaf3`,
    /// `urn:fringe:<k or patterns>` (the pattern set is closed downward).
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let lower = t.to_ascii_lowercase();
        match lower.as_str() {
            "vertices" => return Ok(Self::Vertices),
            "clusters" => return Ok(Self::Clusters),
            "leaves" => return Ok(Self::Leaves),
            "rootcluster" | "root_cluster" | "root-cluster" => return Ok(Self::RootCluster),
            "fringe" => return Ok(Self::Fringe(all_patterns(3))),
            "urn:weight2" => return Ok(Self::Urn(UrnKind::Weight2)),
            "urn:cluster4" => return Ok(Self::Urn(UrnKind::Cluster4)),
            "urn:leaf4" => return Ok(Self::Urn(UrnKind::Leaf4)),
            "urn:leaf3" => return Ok(Self::Urn(UrnKind::Leaf3)),
            _ => {}
        }
        if lower.starts_with("urn:fringe:") {
            let pats = parse_patterns(&t["urn:fringe:".len()..])?;
            return Ok(Self::Urn(UrnKind::Fringe(downward_closure(&pats)?)));
        }
        if lower.starts_with("fringe:") {
            return Ok(Self::Fringe(parse_patterns(&t["fringe:".len()..])?));
        }
        Err(PactError::InvalidArgument(format!("unknown statistic {text:?}")))
    }

    pub fn name(&self) -> String {
        match self {
            Self::Vertices => "vertices".into(),
            Self::Clusters => "clusters".into(),
            Self::Leaves => "leaves".into(),
            Self::RootCluster => "root_cluster".into(),
            Self::Fringe(_) => "fringe".into(),
            Self::Urn(k) => match k {
                UrnKind::Weight2 => "urn_weight2".into(),
                UrnKind::Cluster4 => "urn_cluster4".into(),
                UrnKind::Leaf4 => "urn_leaf4".into(),
                UrnKind::Leaf3 => "urn_leaf3".into(),
                UrnKind::Fringe(_) => "urn_fringe".into(),
            },
        }
    }

    pub(crate) fn needs_tree(&self) -> bool {
        !matches!(self, Self::Urn(_))
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: Model,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub statistics: Vec<Statistic>,
}

impl ExperimentConfig {
    pub fn new(model: Model, n: usize, replicates: usize, seed: u64, statistics: Vec<Statistic>) -> Result<Self> {
        let c = Self { model, n, replicates, seed, statistics };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(PactError::InvalidArgument("n must be at least 1".into()));
        }
        if self.replicates == 0 {
            return Err(PactError::InvalidArgument("replicates must be at least 1".into()));
        }
        if self.statistics.is_empty() {
            return Err(PactError::InvalidArgument("no statistics requested".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_statistics() {
        assert_eq!(Statistic::parse("Vertices").unwrap(), Statistic::Vertices);
        assert_eq!(Statistic::parse("rootcluster").unwrap(), Statistic::RootCluster);
        assert_eq!(Statistic::parse("urn:cluster4").unwrap(), Statistic::Urn(UrnKind::Cluster4));
        match Statistic::parse("fringe:R(B);B").unwrap() {
            Statistic::Fringe(p) => assert_eq!(p.len(), 2),
            other => panic!("{other:?}"),
        }
        match Statistic::parse("fringe:2").unwrap() {
            Statistic::Fringe(p) => assert_eq!(p.len(), 6),
            other => panic!("{other:?}"),
        }
        match Statistic::parse("urn:fringe:R(B(R))").unwrap() {
            Statistic::Urn(UrnKind::Fringe(p)) => assert_eq!(p.len(), 4),
            other => panic!("{other:?}"),
        }
        assert!(Statistic::parse("fringe:9").is_err());
        assert!(Statistic::parse("degrees").is_err());
    }

    #[test]
    fn rejects_empty_configs() {
        let m = Model::with_alpha(0.0, 0.5).unwrap();
        assert!(ExperimentConfig::new(m, 0, 1, 0, vec![Statistic::Vertices]).is_err());
        assert!(ExperimentConfig::new(m, 5, 0, 0, vec![Statistic::Vertices]).is_err());
        assert!(ExperimentConfig::new(m, 5, 1, 0, vec![]).is_err());
    }
}
