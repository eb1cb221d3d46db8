//! JSON configuration.
//!
//! ```json
//! {
//!   "abundance_prior": { "shape": 3, "mode": 200 },
//!   "composition_prior": { "classes": 10, "symmetric_gamma": 1 },
//!   "cost": {
//!     "quadrant_area": 0.0625,
//!     "budget_quadrant_equivalents": 12,
//!     "count_ratio": 5e-5,
//!     "categorize_ratio": 3e-3
//!   },
//!   "mc": { "draws": 10000, "seed": 20250601 }
//! }
//! ```
//!
//! The abundance prior takes exactly one of `rate` or `mode`. The composition
//! prior takes either a `gamma` vector or `classes` + `symmetric_gamma`, and
//! optionally `class_names`. The cost block takes either the three ratio
//! fields or a `raw` block of per-unit costs and the budget. Unknown keys are
//! rejected.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::cost::{BudgetSpec, CostModel, RawCosts};
use crate::design::{DesignConfig, DEFAULT_MC_DRAWS, DEFAULT_SEED};
use crate::distributions::{DirichletParams, GammaParams};
use crate::{Error, Result, DEFAULT_CLASS_NAMES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub abundance_prior: AbundancePriorSpec,
    pub composition_prior: CompositionPriorSpec,
    pub cost: CostSpec,
    #[serde(default)]
    pub mc: McSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbundancePriorSpec {
    pub shape: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositionPriorSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetric_gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_names: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSpec {
    pub quadrant_area: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_quadrant_equivalents: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categorize_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<RawCostSpec>,
}

/// Per-unit costs. `fixed` and `per_sample` are recorded for reference only
/// and never enter the computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCostSpec {
    pub sampling_per_m2: f64,
    pub counting_per_particle: f64,
    pub categorizing_per_particle: f64,
    pub budget: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_sample: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abundance_weight: Option<f64>,
}

impl Default for McSpec {
    fn default() -> Self {
        Self {
            draws: DEFAULT_MC_DRAWS,
            seed: DEFAULT_SEED,
            abundance_weight: None,
        }
    }
}

fn default_draws() -> usize {
    DEFAULT_MC_DRAWS
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub design: DesignConfig,
    pub class_names: Vec<String>,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ConfigFile =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        file.resolve()
    }

    /// Baseline design with the default class list.
    pub fn baseline() -> Self {
        Self {
            design: DesignConfig::baseline(),
            class_names: default_class_names(10),
        }
    }

    /// Canonical file form: shape/rate prior, explicit concentration vector
    /// and ratio-form costs.
    pub fn to_file(&self) -> ConfigFile {
        let d = &self.design;
        ConfigFile {
            abundance_prior: AbundancePriorSpec {
                shape: d.abundance_prior.shape(),
                rate: Some(d.abundance_prior.rate()),
                mode: None,
            },
            composition_prior: CompositionPriorSpec {
                gamma: Some(d.composition_prior.concentration().to_vec()),
                classes: None,
                symmetric_gamma: None,
                class_names: Some(self.class_names.clone()),
            },
            cost: CostSpec {
                quadrant_area: d.cost.quadrant_area(),
                budget_quadrant_equivalents: Some(d.cost.budget().0),
                count_ratio: Some(d.cost.count_ratio()),
                categorize_ratio: Some(d.cost.categorize_ratio()),
                raw: None,
            },
            mc: McSpec {
                draws: d.mc_draws,
                seed: d.seed,
                abundance_weight: (d.abundance_weight != 0.5).then_some(d.abundance_weight),
            },
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("config serializes")
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.class_names.iter().position(|c| c == name)
    }
}

/// Default class names for `k` classes: the ten polymer abbreviations when
/// `k = 10`, otherwise `class1..classk`.
pub fn default_class_names(k: usize) -> Vec<String> {
    if k == DEFAULT_CLASS_NAMES.len() {
        DEFAULT_CLASS_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        (1..=k).map(|i| format!("class{i}")).collect()
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ConfigFile {
    pub fn resolve(&self) -> Result<Config> {
        let abundance_prior = self.abundance_prior.resolve()?;
        let (composition_prior, class_names) = self.composition_prior.resolve()?;
        let cost = self.cost.resolve()?;
        let design = DesignConfig {
            abundance_prior,
            composition_prior,
            cost,
            mc_draws: self.mc.draws,
            seed: self.mc.seed,
            abundance_weight: self.mc.abundance_weight.unwrap_or(0.5),
        };
        design
            .validate()
            .map_err(|e| config_err(format!("mc: {e}")))?;
        Ok(Config {
            design,
            class_names,
        })
    }
}

impl AbundancePriorSpec {
    fn resolve(&self) -> Result<GammaParams> {
        let prior = match (self.rate, self.mode) {
            (Some(rate), None) => GammaParams::new(self.shape, rate),
            (None, Some(mode)) => GammaParams::from_shape_mode(self.shape, mode),
            _ => {
                return Err(config_err(
                    "abundance_prior: give exactly one of `rate` or `mode`",
                ))
            }
        };
        prior.map_err(|e| config_err(format!("abundance_prior: {e}")))
    }
}

impl CompositionPriorSpec {
    fn resolve(&self) -> Result<(DirichletParams, Vec<String>)> {
        let prior = match (&self.gamma, self.classes, self.symmetric_gamma) {
            (Some(gamma), None, None) => DirichletParams::new(gamma.clone()),
            (None, Some(k), Some(g)) => DirichletParams::symmetric(k, g),
            _ => return Err(config_err(
                "composition_prior: give either `gamma` or both `classes` and `symmetric_gamma`",
            )),
        }
        .map_err(|e| config_err(format!("composition_prior: {e}")))?;
        let names = match &self.class_names {
            None => default_class_names(prior.k()),
            Some(names) => {
                if names.len() != prior.k() {
                    return Err(config_err(format!(
                        "composition_prior.class_names: expected {} names, got {}",
                        prior.k(),
                        names.len()
                    )));
                }
                let mut seen = HashSet::new();
                if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
                    return Err(config_err(format!(
                        "composition_prior.class_names: duplicate name `{dup}`"
                    )));
                }
                names.clone()
            }
        };
        Ok((prior, names))
    }
}

impl CostSpec {
    fn resolve(&self) -> Result<CostModel> {
        let ratios = (
            self.budget_quadrant_equivalents,
            self.count_ratio,
            self.categorize_ratio,
        );
        let model = match (ratios, &self.raw) {
            ((Some(b), Some(r1), Some(r2)), None) => {
                CostModel::new(self.quadrant_area, BudgetSpec(b), r1, r2)
            }
            ((None, None, None), Some(raw)) => CostModel::from_raw(&RawCosts {
                quadrant_area: self.quadrant_area,
                sampling_per_m2: raw.sampling_per_m2,
                counting_per_particle: raw.counting_per_particle,
                categorizing_per_particle: raw.categorizing_per_particle,
                budget: raw.budget,
            }),
            _ => {
                return Err(config_err(
                    "cost: give either `budget_quadrant_equivalents`, `count_ratio` and \
                     `categorize_ratio`, or a `raw` block",
                ))
            }
        };
        model.map_err(|e| config_err(format!("cost: {e}")))
    }
}
