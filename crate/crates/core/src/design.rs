//! Two-stage design optimizer.
//!
//! Stage one picks the number of quadrants `m`; stage two, after the total
//! count `N` is known, categorizes as many particles as the remaining budget
//! allows. The design criterion is
//!
//! ```text
//! L*(m | A) = w·L₁*(m) + (1 − w)·E_N[L₂*(n̄(N))],   w = 1/2
//! ```
//!
//! where the expectation runs over the Poisson-Gamma prior predictive of `N`
//! and is estimated by Monte Carlo. Every `m` draws from its own substream
//! (label `m`), so curves are reproducible, order-independent and identical
//! whether evaluated sequentially or in parallel.

use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::cost::{BudgetSpec, CostModel};
use crate::distributions::{predictive_median, DirichletParams, GammaParams, PredictiveCount};
use crate::loss::{l1_expected, l2_expected_total, McEstimate, RunningMoments};
use crate::rng::RandomStream;
use crate::{Error, Result};

pub const DEFAULT_MC_DRAWS: usize = 10_000;
pub const MIN_MC_DRAWS: usize = 1_000;
pub const DEFAULT_SEED: u64 = 20_250_601;
/// Number of points in the default true-abundance grid.
pub const DEFAULT_GRID_POINTS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignConfig {
    pub abundance_prior: GammaParams,
    pub composition_prior: DirichletParams,
    pub cost: CostModel,
    pub mc_draws: usize,
    pub seed: u64,
    /// Weight on `L₁*`; the remainder goes to `E[L₂*]`. Experimental, keep
    /// at 0.5 unless exploring.
    pub abundance_weight: f64,
}

impl DesignConfig {
    pub fn new(
        abundance_prior: GammaParams,
        composition_prior: DirichletParams,
        cost: CostModel,
    ) -> Self {
        Self {
            abundance_prior,
            composition_prior,
            cost,
            mc_draws: DEFAULT_MC_DRAWS,
            seed: DEFAULT_SEED,
            abundance_weight: 0.5,
        }
    }

    /// Shape 3 prior with mode 200 particles/m², 10 classes with unit
    /// concentration, 0.0625 m² quadrants, budget of 12 quadrants,
    /// `r₁ = 5e-5`, `r₂ = 3e-3`.
    pub fn baseline() -> Self {
        Self::new(
            GammaParams::new(3.0, 0.01).expect("valid"),
            DirichletParams::symmetric(10, 1.0).expect("valid"),
            CostModel::new(0.0625, BudgetSpec(12.0), 5e-5, 3e-3).expect("valid"),
        )
    }

    /// [`Self::baseline`] with the prior mode moved to 800 particles/m².
    pub fn baseline_high_prior() -> Self {
        Self {
            abundance_prior: GammaParams::new(3.0, 0.0025).expect("valid"),
            ..Self::baseline()
        }
    }

    pub fn with_draws(mut self, draws: usize) -> Self {
        self.mc_draws = draws;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.mc_draws < MIN_MC_DRAWS {
            return Err(Error::invalid(
                "mc_draws",
                format!(
                    "at least {MIN_MC_DRAWS} draws are required, got {}",
                    self.mc_draws
                ),
            ));
        }
        if !(self.abundance_weight > 0.0 && self.abundance_weight < 1.0) {
            return Err(Error::invalid(
                "abundance_weight",
                format!("must lie in (0, 1), got {}", self.abundance_weight),
            ));
        }
        Ok(())
    }

    /// True when the Monte Carlo sample is small enough to make near-ties
    /// between designs unreliable.
    pub fn low_draws_warning(&self) -> bool {
        self.mc_draws < DEFAULT_MC_DRAWS
    }
}

/// One row of the design curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignRow {
    pub m: usize,
    pub area: f64,
    pub l1_expected: f64,
    pub e_l2_expected: f64,
    pub e_l2_se: f64,
    pub l_star: f64,
    pub l_star_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignCurve {
    pub rows: Vec<DesignRow>,
}

/// The second-stage rule applied once the total count is known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategorizationRule {
    pub m: usize,
    pub area: f64,
    pub cost: CostModel,
}

impl CategorizationRule {
    /// `(q, n̄)` for a realized total count `n`.
    pub fn apply(&self, n: u64) -> (f64, u64) {
        (
            self.cost.categorization_fraction(self.area, n),
            self.cost.categorized_count(self.area, n),
        )
    }
}

/// Budget outcome of a design at the median predictive count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypicalOutcome {
    pub n: u64,
    pub q: f64,
    pub n_bar: u64,
    pub sampling_share: f64,
    pub counting_share: f64,
    pub categorizing_share: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    pub m_star: usize,
    pub curve: DesignCurve,
    pub rule: CategorizationRule,
    pub typical: TypicalOutcome,
}

impl DesignResult {
    pub fn optimum(&self) -> &DesignRow {
        &self.curve.rows[self.m_star]
    }
}

fn check_feasible(m: usize, cost: &CostModel) -> Result<()> {
    let max = cost.max_quadrants();
    if m > max {
        return Err(Error::InfeasibleDesign { m, max });
    }
    Ok(())
}

/// Monte Carlo estimate of `E_N[L₂*]` for design `m` using substream `m`.
pub fn expected_composition_loss(m: usize, config: &DesignConfig) -> Result<McEstimate> {
    check_feasible(m, &config.cost)?;
    if m == 0 {
        return Ok(McEstimate::exact(1.0));
    }
    let area = m as f64 * config.cost.quadrant_area();
    let g0 = config.composition_prior.total();
    let predictive = PredictiveCount::new(&config.abundance_prior, area)?;
    let mut rng = RandomStream::new(config.seed, m as u64).rng();
    let mut acc = RunningMoments::default();
    for _ in 0..config.mc_draws {
        let n = predictive.sample(&mut rng);
        let n_bar = config.cost.categorized_count(area, n);
        acc.push(l2_expected_total(n_bar, g0));
    }
    Ok(acc.estimate())
}

/// One design-curve row: `L₁*` in closed form, `E[L₂*]` by Monte Carlo.
pub fn expected_total_loss(m: usize, config: &DesignConfig) -> Result<DesignRow> {
    config.validate()?;
    let l2 = expected_composition_loss(m, config)?;
    let l1 = l1_expected(m, &config.abundance_prior, config.cost.quadrant_area());
    let w = config.abundance_weight;
    Ok(DesignRow {
        m,
        area: m as f64 * config.cost.quadrant_area(),
        l1_expected: l1,
        e_l2_expected: l2.mean,
        e_l2_se: l2.se,
        l_star: w * l1 + (1.0 - w) * l2.mean,
        l_star_se: (1.0 - w) * l2.se,
    })
}

/// Evaluate every feasible `m` and return the minimizer (smallest `m` on
/// ties) with the full curve.
pub fn optimize_design(config: &DesignConfig) -> Result<DesignResult> {
    config.validate()?;
    let max = config.cost.max_quadrants();
    if max == 0 {
        return Err(Error::EmptyFeasibleSet {
            budget_quadrants: config.cost.budget().0,
        });
    }
    let rows = evaluate_rows(config, max)?;
    let m_star = rows.iter().fold(0, |best, row| {
        if row.l_star < rows[best].l_star {
            row.m
        } else {
            best
        }
    });
    let rule = CategorizationRule {
        m: m_star,
        area: rows[m_star].area,
        cost: config.cost,
    };
    Ok(DesignResult {
        m_star,
        typical: typical_outcome(m_star, config),
        curve: DesignCurve { rows },
        rule,
    })
}

#[cfg(feature = "parallel")]
fn evaluate_rows(config: &DesignConfig, max: usize) -> Result<Vec<DesignRow>> {
    use rayon::prelude::*;
    (0..=max)
        .into_par_iter()
        .map(|m| expected_total_loss(m, config))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn evaluate_rows(config: &DesignConfig, max: usize) -> Result<Vec<DesignRow>> {
    (0..=max).map(|m| expected_total_loss(m, config)).collect()
}

/// Budget outcome of design `m` when the predictive median count is observed.
pub fn typical_outcome(m: usize, config: &DesignConfig) -> TypicalOutcome {
    let area = m as f64 * config.cost.quadrant_area();
    let n = predictive_median(&config.abundance_prior, area);
    let q = config.cost.categorization_fraction(area, n);
    let n_bar = config.cost.categorized_count(area, n);
    let (sampling_share, counting_share, categorizing_share) =
        config.cost.budget_split(area, n, n_bar);
    TypicalOutcome {
        n,
        q,
        n_bar,
        sampling_share,
        counting_share,
        categorizing_share,
        slack: 1.0 - config.cost.normalized_cost(area, n, q),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceRow {
    pub lambda: f64,
    pub n: u64,
    pub q: f64,
    pub n_bar: u64,
    pub l2_expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceCurve {
    pub m: usize,
    pub rows: Vec<PerformanceRow>,
}

impl PerformanceCurve {
    pub fn max_n_bar(&self) -> u64 {
        self.rows.iter().map(|r| r.n_bar).max().unwrap_or(0)
    }
}

/// Second-stage behaviour of design `m` if the true abundance were each grid
/// value and the expected count `⌊m·A·Λ⌋` were observed.
pub fn performance_curve(
    m: usize,
    abundance_grid: &[f64],
    config: &DesignConfig,
) -> Result<PerformanceCurve> {
    check_feasible(m, &config.cost)?;
    let area = m as f64 * config.cost.quadrant_area();
    let rows = abundance_grid
        .iter()
        .map(|&lambda| {
            if !(lambda.is_finite() && lambda >= 0.0) {
                return Err(Error::invalid(
                    "abundance_grid",
                    format!("values must be finite and >= 0, got {lambda}"),
                ));
            }
            let n = crate::floor_count(area * lambda);
            let n_bar = config.cost.categorized_count(area, n);
            Ok(PerformanceRow {
                lambda,
                n,
                q: config.cost.categorization_fraction(area, n),
                n_bar,
                l2_expected: l2_expected_total(n_bar, config.composition_prior.total()),
            })
        })
        .collect::<Result<_>>()?;
    Ok(PerformanceCurve { m, rows })
}

/// `points` evenly spaced abundances over `(0, 4·mode]` (the mean stands in
/// for the mode when the prior shape is below 1).
pub fn default_abundance_grid(prior: &GammaParams, points: usize) -> Vec<f64> {
    let top = 4.0
        * prior
            .mode()
            .filter(|m| *m > 0.0)
            .unwrap_or_else(|| prior.mean());
    (1..=points)
        .map(|i| top * i as f64 / points as f64)
        .collect()
}

/// What a sensitivity sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    /// Multiplier on the baseline categorization ratio `r₂`.
    CategorizeRatio,
    /// Budget in quadrant equivalents.
    Budget,
    /// Mode of the abundance prior, keeping its shape.
    PriorMode,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::CategorizeRatio => "r2",
            SweepAxis::Budget => "budget",
            SweepAxis::PriorMode => "prior-mode",
        }
    }

    /// The base config with this axis set to `value`.
    pub fn apply(&self, base: &DesignConfig, value: f64) -> Result<DesignConfig> {
        let mut config = base.clone();
        match self {
            SweepAxis::CategorizeRatio => {
                config.cost = base
                    .cost
                    .with_categorize_ratio(base.cost.categorize_ratio() * value)?;
            }
            SweepAxis::Budget => {
                config.cost = base.cost.with_budget(BudgetSpec(value))?;
            }
            SweepAxis::PriorMode => {
                config.abundance_prior =
                    GammaParams::from_shape_mode(base.abundance_prior.shape(), value)?;
            }
        }
        Ok(config)
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r2" => Ok(SweepAxis::CategorizeRatio),
            "budget" => Ok(SweepAxis::Budget),
            "prior-mode" => Ok(SweepAxis::PriorMode),
            other => Err(Error::invalid(
                "axis",
                format!("unknown axis `{other}`, expected one of r2, budget, prior-mode"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub m_star: usize,
    pub area: f64,
    pub l_star: f64,
    pub typical_n: u64,
    pub typical_n_bar: u64,
    pub budget_slack: f64,
}

/// One [`optimize_design`] per axis value. Each run keeps the base seed, so
/// a value equal to the base setting reproduces the base design exactly.
pub fn sensitivity_sweep(
    base: &DesignConfig,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::invalid(
            "values",
            "at least one sweep value is required",
        ));
    }
    values
        .iter()
        .map(|&value| {
            let config = axis.apply(base, value)?;
            let result = optimize_design(&config)?;
            Ok(SweepRow {
                value,
                m_star: result.m_star,
                area: result.optimum().area,
                l_star: result.optimum().l_star,
                typical_n: result.typical.n,
                typical_n_bar: result.typical.n_bar,
                budget_slack: result.typical.slack,
            })
        })
        .collect()
}
