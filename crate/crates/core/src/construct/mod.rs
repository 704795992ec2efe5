//! Covers of `S_n` by subsets of `S_{n+1}`.

mod bounds;
mod exact;
mod greedy;
mod random;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use bounds::{
    expected_uncovered_wor, pigeonhole_lower, thm2_default_initial_size, thm2_upper,
    thm2_upper_n2, thm3_default_draws, thm3_upper, BoundTable,
};
pub use exact::{exact_min_cover, exact_min_cover_with, BranchRule, MostDeficientLowestRank};
pub use greedy::greedy_cover;
pub use random::{alteration_cover, lambda_cover};

use crate::bitmap::PermSetBitmap;
use crate::error::{Error, Result};
use crate::graph::CoverageGraph;
use crate::perm::{Permutation, PermRank};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    Feasible,
    InfeasibleBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Greedy,
    Alteration,
    LambdaSample,
    External,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Greedy => "greedy",
            Method::Alteration => "alteration",
            Method::LambdaSample => "lambda-sample",
            Method::External => "external",
        }
    }

    /// Whether the output depends on an RNG seed.
    pub fn is_randomized(self) -> bool {
        matches!(self, Method::Alteration | Method::LambdaSample)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "exact" => Method::Exact,
            "greedy" => Method::Greedy,
            "alteration" => Method::Alteration,
            "lambda" | "lambda-sample" => Method::LambdaSample,
            "external" => Method::External,
            other => return Err(Error::invalid(format!("unknown method {other:?}"))),
        })
    }
}

/// A selected subset of `S_{n+1}` together with what is known about it.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverCertificate {
    pub n: usize,
    pub lambda: u32,
    pub selected: PermSetBitmap,
    pub status: Status,
    pub lower_bound: u64,
    pub method: Method,
    pub seed: Option<u64>,
    pub wall_time: Duration,
    /// With-replacement draw count for λ-sample covers (before duplicates collapse).
    pub draws: Option<u64>,
    /// Initial random selection size for alteration and λ-sample covers.
    pub initial_size: Option<u64>,
}

impl CoverCertificate {
    pub fn size(&self) -> usize {
        self.selected.count()
    }

    pub fn to_record(&self) -> CertificateRecord {
        CertificateRecord {
            n: self.n,
            lambda: self.lambda,
            method: self.method,
            status: self.status,
            size: self.size(),
            lower_bound: self.lower_bound,
            selected: self.selected.to_perms(),
            seed: self.seed,
            wall_time_ms: self.wall_time.as_millis() as u64,
            draws: self.draws,
            initial_size: self.initial_size,
        }
    }

    pub fn from_record(rec: &CertificateRecord) -> Result<Self> {
        let selected = PermSetBitmap::from_perms(rec.n + 1, &rec.selected)?;
        if selected.count() != rec.size {
            return Err(Error::invalid(format!(
                "record claims size {} but lists {} distinct permutations",
                rec.size,
                selected.count()
            )));
        }
        Ok(CoverCertificate {
            n: rec.n,
            lambda: rec.lambda,
            selected,
            status: rec.status,
            lower_bound: rec.lower_bound,
            method: rec.method,
            seed: rec.seed,
            wall_time: Duration::from_millis(rec.wall_time_ms),
            draws: rec.draws,
            initial_size: rec.initial_size,
        })
    }
}

/// The JSON form of a [`CoverCertificate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub n: usize,
    pub lambda: u32,
    pub method: Method,
    pub status: Status,
    pub size: usize,
    pub lower_bound: u64,
    pub selected: Vec<Permutation>,
    pub seed: Option<u64>,
    pub wall_time_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draws: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_size: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Deficiency {
    pub pattern: PermRank,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verification {
    Ok,
    /// Patterns covered fewer than λ times, ascending by rank.
    Deficient(Vec<Deficiency>),
}

impl Verification {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verification::Ok)
    }
}

/// How many selected permutations cover each pattern.
pub(crate) fn coverage_counts(g: &CoverageGraph, sel: &PermSetBitmap) -> Vec<u32> {
    let mut counts = vec![0u32; g.pattern_count()];
    for rho in sel.iter() {
        for &pi in g.patterns(rho) {
            counts[pi as usize] += 1;
        }
    }
    counts
}

pub fn verify_cover(g: &CoverageGraph, sel: &PermSetBitmap, lambda: u32) -> Result<Verification> {
    sel.check_level(g.n() + 1)?;
    let counts = coverage_counts(g, sel);
    let deficient: Vec<Deficiency> = counts
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c < lambda)
        .map(|(pi, &count)| Deficiency {
            pattern: PermRank {
                n: g.n(),
                r: pi as u64,
            },
            count,
        })
        .collect();
    Ok(if deficient.is_empty() {
        Verification::Ok
    } else {
        Verification::Deficient(deficient)
    })
}

pub(crate) fn check_lambda(g: &CoverageGraph, lambda: u32) -> Result<()> {
    let max = (g.n() * g.n() + 1) as u32;
    if lambda == 0 || lambda > max {
        return Err(Error::invalid(format!(
            "multiplicity {lambda} outside 1..={max}; each pattern has only n²+1 covers"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sel(n: usize, perms: &[&str]) -> PermSetBitmap {
        let perms: Vec<Permutation> = perms.iter().map(|s| s.parse().unwrap()).collect();
        PermSetBitmap::from_perms(n + 1, &perms).unwrap()
    }

    #[test]
    fn known_n3_cover_verifies() {
        let g = CoverageGraph::build(3).unwrap();
        assert!(verify_cover(&g, &sel(3, &["1342", "4213"]), 1).unwrap().is_ok());
    }

    #[test]
    fn single_member_leaves_three_patterns() {
        let g = CoverageGraph::build(3).unwrap();
        let Verification::Deficient(d) = verify_cover(&g, &sel(3, &["1342"]), 1).unwrap() else {
            panic!("1342 alone cannot cover S_3");
        };
        let names: Vec<String> = d.iter().map(|x| x.pattern.unrank().to_string()).collect();
        assert_eq!(names, ["213", "312", "321"]);
        assert!(d.iter().all(|x| x.count == 0));
    }

    #[test]
    fn everything_covers_everything() {
        for n in 1..=5 {
            let g = CoverageGraph::build(n).unwrap();
            let all = PermSetBitmap::full(n + 1);
            assert!(verify_cover(&g, &all, 1).unwrap().is_ok());
            assert!(verify_cover(&g, &all, (n * n + 1) as u32).unwrap().is_ok());
            assert!(!verify_cover(&g, &all, (n * n + 2) as u32).unwrap().is_ok());
        }
    }

    #[test]
    fn wrong_universe_is_rejected() {
        let g = CoverageGraph::build(3).unwrap();
        assert!(matches!(
            verify_cover(&g, &PermSetBitmap::full(3), 1),
            Err(Error::UniverseMismatch { .. })
        ));
    }

    #[test]
    fn record_round_trip() {
        let g = CoverageGraph::build(3).unwrap();
        let cert = greedy_cover(&g, 1).unwrap();
        let json = serde_json::to_string(&cert.to_record()).unwrap();
        let back: CertificateRecord = serde_json::from_str(&json).unwrap();
        let restored = CoverCertificate::from_record(&back).unwrap();
        assert_eq!(restored.selected, cert.selected);
        assert_eq!(restored.status, cert.status);
        assert!(json.contains("\"method\":\"greedy\""));
    }

    #[test]
    fn method_names_parse() {
        for m in [Method::Exact, Method::Greedy, Method::Alteration, Method::LambdaSample, Method::External] {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert_eq!("lambda".parse::<Method>().unwrap(), Method::LambdaSample);
        assert!("simplex".parse::<Method>().is_err());
    }
}
