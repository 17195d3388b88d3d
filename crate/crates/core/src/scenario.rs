//! Scenario files: a flat, human-readable key/value (TOML) format describing
//! the channel, reliability targets, thresholds, and sweep axes. Powers are
//! given in dB here and converted to linear units at this boundary only.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{NomaOrder, SystemParams};
use crate::region::AlphaRule;
use crate::reliability::{OmaScheme, StreamReliability, ThroughputTargets};
use crate::{Error, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Multiple-access scheme selector used by experiments and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Rsma,
    Noma12,
    Noma21,
    Fdma,
    Tdma,
}

impl Scheme {
    pub const ALL: [Scheme; 5] =
        [Scheme::Rsma, Scheme::Noma12, Scheme::Noma21, Scheme::Fdma, Scheme::Tdma];

    pub fn label(&self) -> &'static str {
        match self {
            Scheme::Rsma => "rsma",
            Scheme::Noma12 => "noma12",
            Scheme::Noma21 => "noma21",
            Scheme::Fdma => "fdma",
            Scheme::Tdma => "tdma",
        }
    }

    pub fn noma_order(&self) -> Option<NomaOrder> {
        match self {
            Scheme::Noma12 => Some(NomaOrder::U1First),
            Scheme::Noma21 => Some(NomaOrder::U2First),
            _ => None,
        }
    }

    pub fn oma_scheme(&self) -> Option<OmaScheme> {
        match self {
            Scheme::Fdma => Some(OmaScheme::Fdma),
            Scheme::Tdma => Some(OmaScheme::Tdma),
            _ => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rsma" => Ok(Scheme::Rsma),
            "noma12" => Ok(Scheme::Noma12),
            "noma21" => Ok(Scheme::Noma21),
            "fdma" => Ok(Scheme::Fdma),
            "tdma" => Ok(Scheme::Tdma),
            other => Err(Error::Config {
                field: "schemes".into(),
                message: format!("unknown scheme `{other}`"),
            }),
        }
    }
}

/// How the OMA fraction is configured in a scenario: the power-tracking rule
/// `"power-ratio"` or a fixed number in (0, 1).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaRuleCfg {
    Fixed(f64),
    Named(String),
}

impl AlphaRuleCfg {
    pub fn resolve(&self) -> Result<AlphaRule> {
        match self {
            AlphaRuleCfg::Fixed(a) => {
                if !(*a > 0.0 && *a < 1.0) {
                    return Err(Error::Config {
                        field: "alpha_rule".into(),
                        message: format!("fixed fraction must lie in (0, 1), got {a}"),
                    });
                }
                Ok(AlphaRule::Fixed(*a))
            }
            AlphaRuleCfg::Named(s) if s == "power-ratio" => Ok(AlphaRule::PowerRatio),
            AlphaRuleCfg::Named(s) => Err(Error::Config {
                field: "alpha_rule".into(),
                message: format!("expected \"power-ratio\" or a number, got `{s}`"),
            }),
        }
    }
}

fn default_alpha_rule() -> AlphaRuleCfg {
    AlphaRuleCfg::Named("power-ratio".into())
}

fn default_schemes() -> Vec<String> {
    Scheme::ALL.iter().map(|s| s.label().to_string()).collect()
}

fn default_region_points() -> usize {
    201
}

fn default_true() -> bool {
    true
}

/// A parsed scenario file. Sweep blocks are optional: each experiment
/// validates the fields it needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    // channel & box
    pub g1: f64,
    pub g2: f64,
    pub noise_var: f64,
    pub pt_db: f64,
    pub n_min: f64,
    pub n_max: f64,
    // per-stream reliability
    pub eps11: f64,
    pub eps12: f64,
    pub eps22: f64,
    // throughput thresholds (bits)
    pub t1_th: f64,
    pub t2_th: f64,

    #[serde(default = "default_schemes")]
    pub schemes: Vec<String>,
    #[serde(default = "default_alpha_rule")]
    pub alpha_rule: AlphaRuleCfg,

    // region experiment: fixed per-user total powers and blocklengths
    pub region_p1_db: Option<f64>,
    pub region_p2_db: Option<f64>,
    #[serde(default)]
    pub region_n_list: Vec<f64>,
    #[serde(default = "default_true")]
    pub region_include_ibl: bool,
    #[serde(default = "default_region_points")]
    pub region_num_points: usize,

    // transmit-power sweep
    pub pt_db_start: Option<f64>,
    pub pt_db_stop: Option<f64>,
    pub pt_db_points: Option<usize>,

    // error-probability sweep
    pub eps_start: Option<f64>,
    pub eps_stop: Option<f64>,
    pub eps_points: Option<usize>,
    #[serde(default)]
    pub eps_pt_db_list: Vec<f64>,

    // sum-rate sweep
    pub sumrate_n_start: Option<f64>,
    pub sumrate_n_stop: Option<f64>,
    pub sumrate_n_points: Option<usize>,
    #[serde(default = "default_region_points")]
    pub sumrate_beta_points: usize,
}

impl Scenario {
    /// Parses a scenario from TOML text; the returned hash is a short digest
    /// of the raw bytes, carried into every emitted row.
    pub fn from_toml(text: &str) -> Result<(Self, String)> {
        let de = toml::de::Deserializer::parse(text).map_err(|e| Error::Config {
            field: "<file>".into(),
            message: e.to_string(),
        })?;
        let scenario: Scenario =
            serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
                field: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        scenario.validate()?;
        let digest = Sha256::digest(text.as_bytes());
        let hash = digest[..6].iter().map(|b| format!("{b:02x}")).collect();
        Ok((scenario, hash))
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    fn validate(&self) -> Result<()> {
        self.system()?;
        self.reliability()?;
        self.targets()?;
        self.scheme_list()?;
        self.alpha_rule.resolve()?;
        for (field, list) in [
            ("region_n_list", &self.region_n_list),
            ("eps_pt_db_list", &self.eps_pt_db_list),
        ] {
            if list.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Config {
                    field: field.into(),
                    message: "sweep values must be strictly increasing".into(),
                });
            }
        }
        Ok(())
    }

    pub fn system(&self) -> Result<SystemParams> {
        SystemParams::new(
            self.g1,
            self.g2,
            self.noise_var,
            db_to_linear(self.pt_db),
            self.n_min,
            self.n_max,
        )
    }

    /// System parameters with the power budget overridden (sweeps).
    pub fn system_at(&self, pt_db: f64) -> Result<SystemParams> {
        SystemParams::new(
            self.g1,
            self.g2,
            self.noise_var,
            db_to_linear(pt_db),
            self.n_min,
            self.n_max,
        )
    }

    pub fn reliability(&self) -> Result<StreamReliability> {
        StreamReliability::new(self.eps11, self.eps12, self.eps22)
    }

    pub fn targets(&self) -> Result<ThroughputTargets> {
        ThroughputTargets::new(self.t1_th, self.t2_th)
    }

    pub fn scheme_list(&self) -> Result<Vec<Scheme>> {
        self.schemes.iter().map(|s| s.parse()).collect()
    }

    fn missing(field: &str) -> Error {
        Error::Config { field: field.into(), message: "required by this experiment".into() }
    }

    /// The power sweep in dB, validated.
    pub fn power_sweep(&self) -> Result<Vec<f64>> {
        let start = self.pt_db_start.ok_or_else(|| Self::missing("pt_db_start"))?;
        let stop = self.pt_db_stop.ok_or_else(|| Self::missing("pt_db_stop"))?;
        let points = self.pt_db_points.ok_or_else(|| Self::missing("pt_db_points"))?;
        if points < 2 || stop <= start {
            return Err(Error::Config {
                field: "pt_db_points".into(),
                message: "need an increasing range with at least two points".into(),
            });
        }
        Ok(linspace(start, stop, points))
    }

    /// Log-spaced error-probability sweep.
    pub fn eps_sweep(&self) -> Result<Vec<f64>> {
        let start = self.eps_start.ok_or_else(|| Self::missing("eps_start"))?;
        let stop = self.eps_stop.ok_or_else(|| Self::missing("eps_stop"))?;
        let points = self.eps_points.ok_or_else(|| Self::missing("eps_points"))?;
        if !(start > 0.0 && stop < 1.0 && stop > start) || points < 2 {
            return Err(Error::Config {
                field: "eps_start".into(),
                message: "need 0 < eps_start < eps_stop < 1 and at least two points".into(),
            });
        }
        Ok(linspace(start.ln(), stop.ln(), points).into_iter().map(f64::exp).collect())
    }

    pub fn sumrate_sweep(&self) -> Result<Vec<f64>> {
        let start = self.sumrate_n_start.ok_or_else(|| Self::missing("sumrate_n_start"))?;
        let stop = self.sumrate_n_stop.ok_or_else(|| Self::missing("sumrate_n_stop"))?;
        let points = self.sumrate_n_points.ok_or_else(|| Self::missing("sumrate_n_points"))?;
        if points < 2 || stop <= start || start < 1.0 {
            return Err(Error::Config {
                field: "sumrate_n_points".into(),
                message: "need an increasing blocklength range with at least two points".into(),
            });
        }
        Ok(linspace(start, stop, points))
    }

    pub fn region_powers(&self) -> Result<(f64, f64)> {
        let p1 = self.region_p1_db.ok_or_else(|| Self::missing("region_p1_db"))?;
        let p2 = self.region_p2_db.ok_or_else(|| Self::missing("region_p2_db"))?;
        Ok((db_to_linear(p1), db_to_linear(p2)))
    }
}

pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![start];
    }
    (0..points)
        .map(|i| start + (stop - start) * i as f64 / (points - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
g1 = 1.0
g2 = 0.7
noise_var = 1.0
pt_db = 5.0
n_min = 100
n_max = 3000
eps11 = 1e-6
eps12 = 1e-6
eps22 = 1e-6
t1_th = 300.0
t2_th = 200.0
"#;

    #[test]
    fn minimal_scenario_parses() {
        let (s, hash) = Scenario::from_toml(MINIMAL).unwrap();
        assert_eq!(hash.len(), 12);
        let sys = s.system().unwrap();
        assert!((sys.p_max - 3.1622776601683795).abs() < 1e-12);
        assert_eq!(s.scheme_list().unwrap().len(), 5);
        assert!(matches!(s.alpha_rule.resolve().unwrap(), AlphaRule::PowerRatio));
    }

    #[test]
    fn identical_text_identical_hash() {
        let (_, h1) = Scenario::from_toml(MINIMAL).unwrap();
        let (_, h2) = Scenario::from_toml(MINIMAL).unwrap();
        assert_eq!(h1, h2);
        let (_, h3) = Scenario::from_toml(&format!("{MINIMAL}\n# trailing comment")).unwrap();
        assert_ne!(h1, h3);
    }

    #[test]
    fn bad_fields_carry_paths() {
        let bad = MINIMAL.replace("eps11 = 1e-6", "eps11 = 2.0");
        match Scenario::from_toml(&bad) {
            Err(Error::ProbabilityOutOfRange(v)) => assert_eq!(v, 2.0),
            other => panic!("unexpected: {other:?}"),
        }
        let unknown = format!("{MINIMAL}\nbogus_key = 1\n");
        match Scenario::from_toml(&unknown) {
            Err(Error::Config { field, .. }) => assert!(!field.is_empty()),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn fixed_alpha_rule_parses() {
        let txt = format!("{MINIMAL}\nalpha_rule = 0.4\n");
        let (s, _) = Scenario::from_toml(&txt).unwrap();
        assert!(matches!(s.alpha_rule.resolve().unwrap(), AlphaRule::Fixed(a) if a == 0.4));
        let txt = format!("{MINIMAL}\nalpha_rule = 1.4\n");
        assert!(Scenario::from_toml(&txt).is_err());
    }

    #[test]
    fn sweep_validation() {
        let txt = format!(
            "{MINIMAL}\npt_db_start = 2.0\npt_db_stop = 6.0\npt_db_points = 5\n"
        );
        let (s, _) = Scenario::from_toml(&txt).unwrap();
        let sweep = s.power_sweep().unwrap();
        assert_eq!(sweep.len(), 5);
        assert_eq!(sweep[0], 2.0);
        assert_eq!(*sweep.last().unwrap(), 6.0);
        // eps sweep missing fields
        assert!(s.eps_sweep().is_err());
    }
}
