use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::routing::DEFAULT_K;
use crate::schedulers::{Celf, Edf, FirstFit, H2s, Offensive, Planner};
use crate::topology::TopologySpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    H2s,
    Celf,
    FirstFit,
    Edf,
    OffensiveH2s,
    OffensiveCelf,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::H2s,
        Algorithm::Celf,
        Algorithm::FirstFit,
        Algorithm::Edf,
        Algorithm::OffensiveH2s,
        Algorithm::OffensiveCelf,
    ];

    /// Offensive variant of a greedy planner.
    pub fn offensive(self) -> Result<Self> {
        match self {
            Algorithm::H2s | Algorithm::OffensiveH2s => Ok(Algorithm::OffensiveH2s),
            Algorithm::Celf | Algorithm::OffensiveCelf => Ok(Algorithm::OffensiveCelf),
            other => Err(Error::Config(format!("{other} has no offensive variant"))),
        }
    }

    /// Whether the planner consumes candidate routes.
    pub fn uses_candidates(self) -> bool {
        self != Algorithm::Edf
    }

    pub fn planner(self, alpha: u64) -> Box<dyn Planner> {
        match self {
            Algorithm::H2s => Box::new(H2s { alpha }),
            Algorithm::Celf => Box::new(Celf { alpha, lazy: true }),
            Algorithm::FirstFit => Box::new(FirstFit),
            Algorithm::Edf => Box::new(Edf),
            Algorithm::OffensiveH2s => Box::new(Offensive::new(H2s { alpha })),
            Algorithm::OffensiveCelf => Box::new(Offensive::new(Celf { alpha, lazy: true })),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Algorithm::H2s => "H2S",
            Algorithm::Celf => "CELF",
            Algorithm::FirstFit => "FF",
            Algorithm::Edf => "EDF",
            Algorithm::OffensiveH2s => "Offensive-H2S",
            Algorithm::OffensiveCelf => "Offensive-CELF",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "h2s" => Ok(Algorithm::H2s),
            "celf" => Ok(Algorithm::Celf),
            "ff" | "firstfit" | "first-fit" => Ok(Algorithm::FirstFit),
            "edf" => Ok(Algorithm::Edf),
            "offensive-h2s" => Ok(Algorithm::OffensiveH2s),
            "offensive-celf" => Ok(Algorithm::OffensiveCelf),
            _ => Err(Error::Config(format!("unknown algorithm `{s}`"))),
        }
    }
}

/// Dynamic-system run: an initial batch, then `steps` batches that each
/// remove the `leave_per_step` oldest admitted streams and request
/// `enter_per_step` fresh ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DynamicConfig {
    pub initial_n: usize,
    pub steps: usize,
    pub leave_per_step: usize,
    pub enter_per_step: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub topology: TopologySpec,
    /// Streams requested in total (ignored in dynamic mode).
    pub n_streams: usize,
    /// `None` plans everything in one batch.
    pub batch_size: Option<usize>,
    pub algorithm: Algorithm,
    pub k_candidates: usize,
    /// Seed of the stream generator.
    pub seed: u64,
    pub dynamic: Option<DynamicConfig>,
    /// Score scale; `None` picks the smallest power of ten (at least
    /// 10000) satisfying the bounds of the batch.
    pub alpha: Option<u64>,
    /// Run the validator after every step.
    pub validate: bool,
}

impl ScenarioConfig {
    pub fn new(topology: TopologySpec, n_streams: usize, algorithm: Algorithm, seed: u64) -> Self {
        Self {
            topology,
            n_streams,
            batch_size: None,
            algorithm,
            k_candidates: DEFAULT_K,
            seed,
            dynamic: None,
            alpha: None,
            validate: true,
        }
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = Some(batch_size);
        self
    }

    pub fn with_dynamic(mut self, dynamic: DynamicConfig) -> Self {
        self.dynamic = Some(dynamic);
        self
    }

    pub fn check(&self) -> Result<()> {
        if self.batch_size == Some(0) {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if self.k_candidates == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if let Some(d) = &self.dynamic {
            if d.initial_n == 0 || d.steps == 0 || d.leave_per_step == 0 || d.enter_per_step == 0 {
                return Err(Error::Config("dynamic parameters must be positive".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.to_string().parse::<Algorithm>().unwrap(), a);
            assert_eq!(a.planner(10_000).name(), a.to_string());
        }
        assert!("nope".parse::<Algorithm>().is_err());
        assert_eq!(
            Algorithm::Celf.offensive().unwrap(),
            Algorithm::OffensiveCelf
        );
        assert!(Algorithm::Edf.offensive().is_err());
    }

    #[test]
    fn config_checks() {
        let c = ScenarioConfig::new(TopologySpec::ring(4), 1, Algorithm::H2s, 0);
        assert!(c.check().is_ok());
        assert!(c.clone().with_batch_size(0).check().is_err());
        let d = DynamicConfig {
            initial_n: 1,
            steps: 0,
            leave_per_step: 1,
            enter_per_step: 1,
        };
        assert!(c.with_dynamic(d).check().is_err());
    }
}
