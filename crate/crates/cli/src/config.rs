use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use anderson_clock::model::{DisorderDistribution, ModelParams, Variant};
use anderson_clock::stats::{EnsembleSpec, SupDiscrepancySpec, TailSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub master_seed: u64,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub alpha: f64,
    pub size: usize,
    pub variant: Variant,
    /// Reference energy `E0 = 2 cos(theta0)`.
    pub theta0: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            size: 100,
            variant: Variant::DecayingSite,
            theta0: FRAC_PI_2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    pub realization: u64,
    pub tolerance: f64,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            realization: 0,
            tolerance: 1e-13,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TraceSection {
    pub realization: u64,
    /// Defaults to `model.theta0`.
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProcessSection {
    pub realization: u64,
    pub window_k: f64,
}

impl Default for ProcessSection {
    fn default() -> Self {
        Self {
            realization: 0,
            window_k: 10.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub sizes: Vec<usize>,
    pub realizations: usize,
    pub window_k: f64,
    pub histogram_bins: usize,
    pub histogram_max: f64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            sizes: vec![500, 2000, 8000],
            realizations: 200,
            window_k: 15.0,
            histogram_bins: 40,
            histogram_max: 2.0 * std::f64::consts::PI,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SupSection {
    pub sizes: Vec<usize>,
    pub window_k: f64,
    pub grid_points: usize,
    pub threshold: f64,
    pub realizations: usize,
}

impl Default for SupSection {
    fn default() -> Self {
        Self {
            sizes: vec![1000, 10_000],
            window_k: 10.0,
            grid_points: 41,
            threshold: 0.1,
            realizations: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TailSection {
    pub beta: f64,
    pub n_list: Vec<usize>,
    pub m: usize,
    pub realizations: usize,
    /// Defaults to `model.theta0`.
    pub theta: Option<f64>,
    pub sup: Option<SupSection>,
}

impl Default for TailSection {
    fn default() -> Self {
        Self {
            beta: 0.75,
            n_list: vec![10, 40, 160],
            m: 10_000,
            realizations: 10_000,
            theta: None,
            sup: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SubsequenceSection {
    pub target: f64,
    pub count: usize,
    pub l_min: usize,
    pub l_max: usize,
}

impl Default for SubsequenceSection {
    fn default() -> Self {
        Self {
            target: 0.0,
            count: 10,
            l_min: 1,
            l_max: 100_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSection {
    pub realization: u64,
    /// Largest accepted `|E_pruefer - E_sturm|`.
    pub tolerance: f64,
    /// Restricts the comparison to `|L(E - E0)| < K` when set; otherwise the whole band.
    pub window_k: Option<f64>,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            realization: 0,
            tolerance: 1e-9,
            window_k: None,
        }
    }
}

/// Experiment configuration as read from TOML. Every field has a default, and
/// the resolved form (defaults filled in) is echoed to the output directory.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub run: RunSection,
    pub model: ModelSection,
    pub disorder: Option<DisorderDistribution>,
    pub spectrum: Option<SpectrumSection>,
    pub pruefer_trace: Option<TraceSection>,
    pub process: Option<ProcessSection>,
    pub ensemble: Option<EnsembleSection>,
    pub diagnose_tail: Option<TailSection>,
    pub subsequence: Option<SubsequenceSection>,
    pub compare_oracle: Option<CompareSection>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config {
            field: "config".into(),
            message: e.message().to_string(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn disorder(&self) -> &DisorderDistribution {
        self.disorder.as_ref().expect("resolved before use")
    }

    pub fn model_params(&self) -> Result<ModelParams, CliError> {
        let m = &self.model;
        Ok(ModelParams::new(m.alpha, m.size, m.variant, m.theta0)?)
    }

    pub fn ensemble_spec(&self) -> EnsembleSpec {
        let e = self.ensemble.clone().unwrap_or_default();
        EnsembleSpec {
            distribution: *self.disorder(),
            alpha: self.model.alpha,
            variant: self.model.variant,
            theta0: self.model.theta0,
            window_k: e.window_k,
            sizes: e.sizes,
            realizations: e.realizations,
            master_seed: self.run.master_seed,
            histogram_bins: e.histogram_bins,
            histogram_max: e.histogram_max,
        }
    }

    pub fn tail_spec(&self) -> TailSpec {
        let t = self.diagnose_tail.clone().unwrap_or_default();
        TailSpec {
            distribution: *self.disorder(),
            alpha: self.model.alpha,
            variant: self.model.variant,
            theta: t.theta.unwrap_or(self.model.theta0),
            beta: t.beta,
            n_list: t.n_list,
            m: t.m,
            realizations: t.realizations,
            master_seed: self.run.master_seed,
            sup: t.sup.map(|s| SupDiscrepancySpec {
                sizes: s.sizes,
                window_k: s.window_k,
                grid_points: s.grid_points,
                threshold: s.threshold,
                realizations: s.realizations,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_resolves() {
        let c = Config::parse("").unwrap();
        assert_eq!(c.model.size, 100);
        assert!(c.disorder.is_none());
    }

    #[test]
    fn unknown_field_rejected() {
        let err = Config::parse("[model]\nalpah = 1.0\n").unwrap_err();
        assert!(matches!(err, CliError::Config { .. }));
    }

    #[test]
    fn round_trip() {
        let mut c = Config::parse("[disorder]\nkind = \"cauchy\"\nscale = 1.0\n[ensemble]\nsizes = [10, 20]\n").unwrap();
        c.compare_oracle = Some(CompareSection::default());
        let again = Config::parse(&c.to_toml()).unwrap();
        assert_eq!(again.to_toml(), c.to_toml());
        assert_eq!(again.ensemble.unwrap().sizes, vec![10, 20]);
    }
}
