//! Experiment configuration shared by all subcommands.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hyperinv::init::StrategySpec;
use hyperinv::matrix::NormKind;
use hyperinv::scheme::SchemeId;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// Additive change to one named PM coefficient, written `name=delta`.
#[derive(Clone, Debug, PartialEq)]
pub struct Perturbation {
    pub name: String,
    pub delta: f64,
}

impl FromStr for Perturbation {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self> {
        let (name, delta) = s
            .split_once('=')
            .ok_or_else(|| BenchError::Config(format!("expected name=delta, got `{s}`")))?;
        let delta = delta
            .trim()
            .parse()
            .map_err(|_| BenchError::Config(format!("bad perturbation size `{delta}`")))?;
        Ok(Perturbation {
            name: name.trim().to_string(),
            delta,
        })
    }
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={:?}", self.name, self.delta)
    }
}

impl Serialize for Perturbation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Perturbation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Stopping rule selector for `invert`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    Reliable,
    Step,
    RelativeStep,
    Residual,
}

impl FromStr for RuleKind {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reliable" => Ok(RuleKind::Reliable),
            "step" => Ok(RuleKind::Step),
            "relative-step" => Ok(RuleKind::RelativeStep),
            "residual" => Ok(RuleKind::Residual),
            _ => Err(BenchError::Config(format!("unknown stopping rule `{s}`"))),
        }
    }
}

/// Parameters of every command. Fields a command does not use are ignored;
/// unset fields fall back to per-command defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub schemes: Vec<SchemeId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<StrategySpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Decimal digits of extended precision; 0 selects double.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub digits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Hilbert shapes `(m, n)`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sizes: Vec<(usize, usize)>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub epsilons: Vec<f64>,
    /// Random instances per Hilbert shape.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random: Option<usize>,
    /// GMRES tolerances.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tols: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restart: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drop_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_loops: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleKind>,
    /// Tolerance on the defining-equation residuals, relative to
    /// `max(1, ‖X‖_F)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturb: Option<Perturbation>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| BenchError::File {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Fields set in `other` replace those in `self`.
    pub fn override_with(&mut self, other: ExperimentConfig) {
        macro_rules! take {
            ($($f:ident),*) => {$(
                if other.$f.is_some() {
                    self.$f = other.$f;
                }
            )*};
        }
        macro_rules! take_vec {
            ($($f:ident),*) => {$(
                if !other.$f.is_empty() {
                    self.$f = other.$f;
                }
            )*};
        }
        take!(
            init, eps, digits, norm, out, seed, random, matrix, rhs, restart, drop_tol, max_loops,
            rule, check_tol, perturb
        );
        take_vec!(schemes, sizes, epsilons, tols);
    }

    pub fn schemes_or(&self, default: &[SchemeId]) -> Vec<SchemeId> {
        if self.schemes.is_empty() {
            default.to_vec()
        } else {
            self.schemes.clone()
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

/// Parses `8x6` as `(8, 6)`.
pub fn parse_size(s: &str) -> Result<(usize, usize)> {
    let bad = || BenchError::Config(format!("expected MxN, got `{s}`"));
    let (m, n) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let m = m.trim().parse().map_err(|_| bad())?;
    let n = n.trim().parse().map_err(|_| bad())?;
    if m == 0 || n == 0 {
        return Err(bad());
    }
    Ok((m, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_a_fixed_point() {
        let cfg = ExperimentConfig {
            schemes: vec![SchemeId::Pm, SchemeId::Hyperpower(5)],
            init: Some(StrategySpec::PanSchreiber),
            eps: Some(1e-50),
            digits: Some(170),
            norm: Some(NormKind::Infinity),
            sizes: vec![(8, 6), (12, 9)],
            epsilons: vec![1e-5, 0.1],
            tols: vec![1e-2, 3.3e-7],
            perturb: Some("mu=1e-3".parse().unwrap()),
            rule: Some(RuleKind::RelativeStep),
            seed: Some(42),
            ..Default::default()
        };
        let once = cfg.to_json().unwrap();
        let parsed = ExperimentConfig::from_json(&once).unwrap();
        assert_eq!(parsed, cfg);
        assert_eq!(parsed.to_json().unwrap(), once);
    }

    #[test]
    fn overrides_replace_only_set_fields() {
        let mut base = ExperimentConfig {
            eps: Some(1e-5),
            digits: Some(40),
            schemes: vec![SchemeId::Sm],
            ..Default::default()
        };
        base.override_with(ExperimentConfig {
            digits: Some(0),
            ..Default::default()
        });
        assert_eq!(base.eps, Some(1e-5));
        assert_eq!(base.digits, Some(0));
        assert_eq!(base.schemes, vec![SchemeId::Sm]);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"epsilon": 1}"#).is_err());
    }

    #[test]
    fn sizes_and_perturbations_parse() {
        assert_eq!(parse_size("100x90").unwrap(), (100, 90));
        assert!(parse_size("8").is_err());
        let p: Perturbation = "mu=1e-3".parse().unwrap();
        assert_eq!(p.name, "mu");
        assert_eq!(p.delta, 1e-3);
    }
}
