//! Normalized budget model.
//!
//! After fixed and per-sample costs are set aside, a campaign spends its
//! remaining budget `b_t` on three activities, each measured against the cost
//! `c₂` of sampling one square metre:
//!
//! ```text
//! C(mA, q, n) = c · (mA + r₁·n + r₂·⌊n·q⌋),   c = c₂ / b_t,  r₁ = c₃ / c₂,  r₂ = c₄ / c₂
//! ```
//!
//! The budget is held as `B`, the number of quadrants it would buy if all of
//! it went to sampling, so that `1/c = B·A` square metres.

use serde::{Deserialize, Serialize};

use crate::{floor_count, Error, Result};

/// Total budget expressed in quadrant equivalents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetSpec(pub f64);

/// Raw per-unit costs, in any consistent currency or effort unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawCosts {
    pub quadrant_area: f64,
    /// `c₂`, cost of sampling one square metre.
    pub sampling_per_m2: f64,
    /// `c₃`, cost of counting one suspected particle.
    pub counting_per_particle: f64,
    /// `c₄`, cost of categorizing one particle.
    pub categorizing_per_particle: f64,
    /// `b_t`, budget left after fixed costs.
    pub budget: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    quadrant_area: f64,
    budget_quadrants: f64,
    count_ratio: f64,
    categorize_ratio: f64,
}

impl CostModel {
    /// `quadrant_area` A (m²), budget `B` in quadrant equivalents, `r₁`, `r₂`.
    pub fn new(
        quadrant_area: f64,
        budget: BudgetSpec,
        count_ratio: f64,
        categorize_ratio: f64,
    ) -> Result<Self> {
        if !(quadrant_area.is_finite() && quadrant_area > 0.0) {
            return Err(Error::invalid(
                "quadrant_area",
                format!("must be finite and > 0, got {quadrant_area}"),
            ));
        }
        if !(budget.0.is_finite() && budget.0 > 0.0) {
            return Err(Error::invalid(
                "budget_quadrant_equivalents",
                format!("must be finite and > 0, got {}", budget.0),
            ));
        }
        if !(count_ratio.is_finite() && count_ratio >= 0.0) {
            return Err(Error::invalid(
                "count_ratio",
                format!("must be finite and >= 0, got {count_ratio}"),
            ));
        }
        if !(categorize_ratio.is_finite() && categorize_ratio > 0.0) {
            return Err(Error::invalid(
                "categorize_ratio",
                format!("must be finite and > 0, got {categorize_ratio}"),
            ));
        }
        Ok(Self {
            quadrant_area,
            budget_quadrants: budget.0,
            count_ratio,
            categorize_ratio,
        })
    }

    /// Reduce raw costs to the dimensionless model.
    ///
    /// The ratios are rounded to 12 significant digits so that rescaling every
    /// raw cost by a common factor yields a bit-identical model.
    pub fn from_raw(raw: &RawCosts) -> Result<Self> {
        for (name, v) in [
            ("sampling_per_m2", raw.sampling_per_m2),
            ("budget", raw.budget),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        let b = canonical(raw.budget / (raw.sampling_per_m2 * raw.quadrant_area));
        let r1 = canonical(raw.counting_per_particle / raw.sampling_per_m2);
        let r2 = canonical(raw.categorizing_per_particle / raw.sampling_per_m2);
        Self::new(raw.quadrant_area, BudgetSpec(b), r1, r2)
    }

    pub fn quadrant_area(&self) -> f64 {
        self.quadrant_area
    }

    pub fn budget(&self) -> BudgetSpec {
        BudgetSpec(self.budget_quadrants)
    }

    /// `c`, the fraction of the budget spent sampling one square metre.
    pub fn budget_coefficient(&self) -> f64 {
        1.0 / self.budget_area()
    }

    /// `1/c`, the budget in square metres of sampling.
    pub fn budget_area(&self) -> f64 {
        self.budget_quadrants * self.quadrant_area
    }

    pub fn count_ratio(&self) -> f64 {
        self.count_ratio
    }

    pub fn categorize_ratio(&self) -> f64 {
        self.categorize_ratio
    }

    pub fn with_budget(self, budget: BudgetSpec) -> Result<Self> {
        Self::new(
            self.quadrant_area,
            budget,
            self.count_ratio,
            self.categorize_ratio,
        )
    }

    pub fn with_categorize_ratio(self, categorize_ratio: f64) -> Result<Self> {
        Self::new(
            self.quadrant_area,
            self.budget(),
            self.count_ratio,
            categorize_ratio,
        )
    }

    /// True when the budget cannot pay for even one quadrant.
    pub fn budget_warning(&self) -> bool {
        self.budget_area() < self.quadrant_area
    }

    /// `C(mA, q, n) = c·(mA + r₁n + r₂⌊nq⌋)`.
    pub fn normalized_cost(&self, total_area: f64, n: u64, q: f64) -> f64 {
        let n_bar = floor_count(n as f64 * q);
        self.budget_coefficient()
            * (total_area + self.count_ratio * n as f64 + self.categorize_ratio * n_bar as f64)
    }

    /// Fraction of the `n` counted particles the remaining budget can
    /// categorize, clamped to `[0, 1]`; `n = 0` gives 1.
    pub fn categorization_fraction(&self, total_area: f64, n: u64) -> f64 {
        if n == 0 {
            return 1.0;
        }
        let n = n as f64;
        let remaining = self.budget_area() - (total_area + n * self.count_ratio);
        (remaining / (self.categorize_ratio * n)).clamp(0.0, 1.0)
    }

    /// `n̄ = ⌊n·q(mA, n)⌋`, the number of particles sent for categorization.
    pub fn categorized_count(&self, total_area: f64, n: u64) -> u64 {
        floor_count(n as f64 * self.categorization_fraction(total_area, n)).min(n)
    }

    /// Largest affordable number of quadrants, `⌊(A·c)⁻¹⌋`.
    pub fn max_quadrants(&self) -> usize {
        floor_count(self.budget_area() / self.quadrant_area) as usize
    }

    /// The design set `{0, 1, …, ⌊(A·c)⁻¹⌋}`.
    pub fn feasible_designs(&self) -> std::ops::RangeInclusive<usize> {
        0..=self.max_quadrants()
    }

    /// Split of the realized spending into (sampling, counting, categorizing)
    /// fractions of the budget.
    pub fn budget_split(&self, total_area: f64, n: u64, n_bar: u64) -> (f64, f64, f64) {
        let c = self.budget_coefficient();
        (
            c * total_area,
            c * self.count_ratio * n as f64,
            c * self.categorize_ratio * n_bar as f64,
        )
    }
}

/// Round to 12 significant digits.
fn canonical(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}
