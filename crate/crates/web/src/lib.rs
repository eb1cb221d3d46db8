//! Browser bindings: the design curve, the performance curve of a design, and
//! the abundance posterior for a total count. Every entry point takes and
//! returns JSON.

use mpdesign::cost::{BudgetSpec, CostModel};
use mpdesign::design::{
    default_abundance_grid, optimize_design, performance_curve as perf_curve, DesignConfig,
    DEFAULT_GRID_POINTS, DEFAULT_SEED,
};
use mpdesign::distributions::{DirichletParams, GammaParams};
use mpdesign::posterior::{
    density_grid, hpd_interval, linspace, update_abundance, FieldObservations,
};
use serde::{Deserialize, Serialize};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Campaign settings from the page. Missing fields take baseline values.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub prior_shape: f64,
    pub prior_mode: f64,
    pub classes: usize,
    pub symmetric_gamma: f64,
    pub quadrant_area: f64,
    pub budget: f64,
    pub count_ratio: f64,
    pub categorize_ratio: f64,
    pub draws: usize,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            prior_shape: 3.0,
            prior_mode: 200.0,
            classes: 10,
            symmetric_gamma: 1.0,
            quadrant_area: 0.0625,
            budget: 12.0,
            count_ratio: 5e-5,
            categorize_ratio: 3e-3,
            draws: 5_000,
            seed: DEFAULT_SEED,
        }
    }
}

impl Scenario {
    pub fn design_config(&self) -> Result<DesignConfig, String> {
        let prior = GammaParams::from_shape_mode(self.prior_shape, self.prior_mode)
            .map_err(|e| e.to_string())?;
        let composition = DirichletParams::symmetric(self.classes, self.symmetric_gamma)
            .map_err(|e| e.to_string())?;
        let cost = CostModel::new(
            self.quadrant_area,
            BudgetSpec(self.budget),
            self.count_ratio,
            self.categorize_ratio,
        )
        .map_err(|e| e.to_string())?;
        let config = DesignConfig::new(prior, composition, cost)
            .with_draws(self.draws)
            .with_seed(self.seed);
        config.validate().map_err(|e| e.to_string())?;
        Ok(config)
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, String> {
    if text.trim().is_empty() {
        serde_json::from_str("{}").map_err(|e| e.to_string())
    } else {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Expected losses for every feasible `m`, the optimum and its typical outcome.
pub fn design_curve_json(scenario: &str) -> Result<String, String> {
    let config = parse::<Scenario>(scenario)?.design_config()?;
    let result = optimize_design(&config).map_err(|e| e.to_string())?;
    to_json(&result)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveRequest {
    #[serde(default)]
    scenario: Scenario,
    /// Defaults to the optimal design.
    m: Option<usize>,
    #[serde(default = "default_points")]
    points: usize,
}

fn default_points() -> usize {
    DEFAULT_GRID_POINTS
}

/// `n`, `q`, `n̄` and `L₂*` over a grid of true abundances for one design.
pub fn performance_curve_json(request: &str) -> Result<String, String> {
    let request: CurveRequest = parse(request)?;
    let config = request.scenario.design_config()?;
    let m = match request.m {
        Some(m) => m,
        None => optimize_design(&config).map_err(|e| e.to_string())?.m_star,
    };
    if request.points == 0 {
        return Err("points must be at least 1".into());
    }
    let grid = default_abundance_grid(&config.abundance_prior, request.points);
    let curve = perf_curve(m, &grid, &config).map_err(|e| e.to_string())?;
    to_json(&json!({ "m": curve.m, "max_n_bar": curve.max_n_bar(), "rows": curve.rows }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PosteriorRequest {
    #[serde(default)]
    scenario: Scenario,
    m: usize,
    total_count: u64,
    #[serde(default = "default_mass")]
    hpd_mass: f64,
    #[serde(default = "default_points")]
    points: usize,
}

fn default_mass() -> f64 {
    0.95
}

/// Prior and posterior densities of the abundance after `total_count`
/// particles in `m` quadrants, with the HPD interval.
pub fn abundance_posterior_json(request: &str) -> Result<String, String> {
    let request: PosteriorRequest = parse(request)?;
    let config = request.scenario.design_config()?;
    let obs =
        FieldObservations::from_total(config.cost.quadrant_area(), request.m, request.total_count)
            .map_err(|e| e.to_string())?;
    let prior = config.abundance_prior;
    let post = update_abundance(&prior, &obs);
    let (lower, upper) = hpd_interval(&post, request.hpd_mass).map_err(|e| e.to_string())?;
    if request.points < 2 {
        return Err("points must be at least 2".into());
    }
    let top = prior
        .quantile(0.99)
        .and_then(|p| post.quantile(0.9999).map(|q| p.max(q)))
        .map_err(|e| e.to_string())?;
    let xs = linspace(0.0, top, request.points);
    let prior_density = density_grid(&prior, &xs).map_err(|e| e.to_string())?;
    let post_density = density_grid(&post, &xs).map_err(|e| e.to_string())?;
    to_json(&json!({
        "shape": post.shape(),
        "rate": post.rate(),
        "mean": post.mean(),
        "hpd": [lower, upper],
        "naive_estimate": request.total_count as f64 / obs.total_area(),
        "lambda": xs,
        "prior": prior_density,
        "posterior": post_density,
    }))
}

#[wasm_bindgen(js_name = designCurve)]
pub fn design_curve(scenario: &str) -> Result<String, JsValue> {
    design_curve_json(scenario).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = performanceCurve)]
pub fn performance_curve(request: &str) -> Result<String, JsValue> {
    performance_curve_json(request).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = abundancePosterior)]
pub fn abundance_posterior(request: &str) -> Result<String, JsValue> {
    abundance_posterior_json(request).map_err(|e| JsValue::from_str(&e))
}
