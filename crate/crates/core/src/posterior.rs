//! Conjugate posterior inference for abundance and composition.
//!
//! Counts enter only through the total `n` and sampled area `mA`; class
//! counts enter only through their sum vector. Both updates are plain
//! parameter additions, so batching order never matters.

use serde::{Deserialize, Serialize};

use crate::cost::CostModel;
use crate::distributions::{bisect, BetaParams, DirichletParams, GammaParams};
use crate::{floor_count, Error, Result};

/// Suspected-particle counts from `m` quadrants of equal area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldObservations {
    quadrant_area: f64,
    counts: Vec<u64>,
}

impl FieldObservations {
    pub fn new(quadrant_area: f64, counts: Vec<u64>) -> Result<Self> {
        if !(quadrant_area.is_finite() && quadrant_area > 0.0) {
            return Err(Error::invalid(
                "quadrant_area",
                format!("must be finite and > 0, got {quadrant_area}"),
            ));
        }
        if counts.is_empty() {
            return Err(Error::invalid(
                "counts",
                "at least one quadrant is required",
            ));
        }
        Ok(Self {
            quadrant_area,
            counts,
        })
    }

    /// Spread a total count as evenly as possible over `m` quadrants.
    pub fn from_total(quadrant_area: f64, m: usize, total: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("m", "at least one quadrant is required"));
        }
        let base = total / m as u64;
        let extra = (total % m as u64) as usize;
        let counts = (0..m).map(|j| base + u64::from(j < extra)).collect();
        Self::new(quadrant_area, counts)
    }

    pub fn quadrant_area(&self) -> f64 {
        self.quadrant_area
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn m(&self) -> usize {
        self.counts.len()
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn total_area(&self) -> f64 {
        self.m() as f64 * self.quadrant_area
    }
}

/// Per-class counts of the categorized sub-sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategorizationCounts {
    class_counts: Vec<u64>,
}

impl CategorizationCounts {
    pub fn new(class_counts: Vec<u64>) -> Self {
        Self { class_counts }
    }

    pub fn zeros(k: usize) -> Self {
        Self::new(vec![0; k])
    }

    pub fn class_counts(&self) -> &[u64] {
        &self.class_counts
    }

    pub fn categorized_total(&self) -> u64 {
        self.class_counts.iter().sum()
    }
}

/// Joint posterior of abundance and composition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorPair {
    pub abundance: GammaParams,
    pub composition: DirichletParams,
}

impl PosteriorPair {
    pub fn update(
        abundance_prior: &GammaParams,
        composition_prior: &DirichletParams,
        obs: &FieldObservations,
        cats: &CategorizationCounts,
    ) -> Result<Self> {
        if cats.categorized_total() > obs.total_count() {
            return Err(Error::invalid(
                "class_counts",
                format!(
                    "{} particles categorized but only {} counted",
                    cats.categorized_total(),
                    obs.total_count()
                ),
            ));
        }
        Ok(Self {
            abundance: update_abundance(abundance_prior, obs),
            composition: update_composition(composition_prior, cats)?,
        })
    }
}

/// `Gamma(α + n, β + mA)`.
pub fn update_abundance(prior: &GammaParams, obs: &FieldObservations) -> GammaParams {
    GammaParams::new(
        prior.shape() + obs.total_count() as f64,
        prior.rate() + obs.total_area(),
    )
    .expect("posterior parameters stay positive")
}

/// `Dir(γ + s̄)`.
pub fn update_composition(
    prior: &DirichletParams,
    cats: &CategorizationCounts,
) -> Result<DirichletParams> {
    if cats.class_counts().len() != prior.k() {
        return Err(Error::DimensionMismatch {
            expected: prior.k(),
            actual: cats.class_counts().len(),
        });
    }
    DirichletParams::new(
        prior
            .concentration()
            .iter()
            .zip(cats.class_counts())
            .map(|(g, &s)| g + s as f64)
            .collect(),
    )
}

/// Current-practice estimate: total particles over total sampled area.
pub fn naive_abundance_estimate(obs: &FieldObservations) -> f64 {
    obs.total_count() as f64 / obs.total_area()
}

/// Highest-density interval `(lower, upper)` of a Gamma.
///
/// For `shape <= 1` the density is monotone and the interval starts at 0.
/// Otherwise the density level is bisected until the two level-set points
/// around the mode enclose `mass`; each point is itself found by bisection
/// on the log density.
pub fn hpd_interval(params: &GammaParams, mass: f64) -> Result<(f64, f64)> {
    if !(mass > 0.0 && mass < 1.0) {
        return Err(Error::invalid(
            "mass",
            format!("must lie in (0, 1), got {mass}"),
        ));
    }
    if params.shape() <= 1.0 {
        return Ok((0.0, params.quantile(mass)?));
    }

    const MASS_TOL: f64 = 1e-8;
    const MAX_ITER: usize = 400;

    let mode = params.mode().expect("shape > 1");
    let peak = params.ln_pdf(mode);
    let level_points = |drop: f64| -> (f64, f64) {
        let level = peak - drop;
        let lower = bisect(|x| params.ln_pdf(x) - level, 0.0, mode);
        let mut hi = mode + params.variance().sqrt();
        while params.ln_pdf(hi) > level {
            hi = mode + 2.0 * (hi - mode);
        }
        let upper = bisect(|x| level - params.ln_pdf(x), mode, hi);
        (lower, upper)
    };
    let mass_at = |drop: f64| {
        let (lo, hi) = level_points(drop);
        (params.cdf(hi) - params.cdf(lo), lo, hi)
    };

    // `drop` is the log-density distance below the peak; enclosed mass grows
    // with it.
    let mut drop_lo = 0.0;
    let mut drop_hi = 1.0;
    while mass_at(drop_hi).0 < mass {
        drop_lo = drop_hi;
        drop_hi *= 2.0;
        if drop_hi > 1e4 {
            let (achieved, lower, upper) = mass_at(drop_hi);
            return Err(Error::HpdNonConvergence {
                iterations: 0,
                target: mass,
                achieved,
                lower,
                upper,
            });
        }
    }
    let mut best = mass_at(drop_hi);
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (drop_lo + drop_hi);
        if mid <= drop_lo || mid >= drop_hi {
            break;
        }
        let current = mass_at(mid);
        if current.0 < mass {
            drop_lo = mid;
        } else {
            drop_hi = mid;
        }
        if (current.0 - mass).abs() < (best.0 - mass).abs() {
            best = current;
        }
    }
    let (achieved, lower, upper) = best;
    if (achieved - mass).abs() > MASS_TOL {
        return Err(Error::HpdNonConvergence {
            iterations: MAX_ITER,
            target: mass,
            achieved,
            lower,
            upper,
        });
    }
    Ok((lower, upper))
}

/// Univariate densities that can be tabulated on a grid.
pub trait Density {
    /// Human-readable support, used in error messages.
    const SUPPORT: &'static str;

    fn in_support(&self, x: f64) -> bool;

    fn density(&self, x: f64) -> f64;
}

impl Density for GammaParams {
    const SUPPORT: &'static str = "[0, inf)";

    fn in_support(&self, x: f64) -> bool {
        x.is_finite() && x >= 0.0
    }

    fn density(&self, x: f64) -> f64 {
        self.pdf(x)
    }
}

impl Density for BetaParams {
    const SUPPORT: &'static str = "[0, 1]";

    fn in_support(&self, x: f64) -> bool {
        (0.0..=1.0).contains(&x)
    }

    fn density(&self, x: f64) -> f64 {
        self.pdf(x)
    }
}

/// Pointwise density on `grid`; the first out-of-support point is an error.
pub fn density_grid<D: Density>(dist: &D, grid: &[f64]) -> Result<Vec<f64>> {
    grid.iter()
        .map(|&x| {
            if dist.in_support(x) {
                Ok(dist.density(x))
            } else {
                Err(Error::OutOfSupport {
                    point: x,
                    support: D::SUPPORT,
                })
            }
        })
        .collect()
}

/// `points` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (points - 1) as f64;
            (0..points).map(|i| lo + step * i as f64).collect()
        }
    }
}

/// Integers summing to `total`, proportional to `weights` by largest
/// remainder; ties go to the lower index.
pub fn largest_remainder(total: u64, weights: &[f64]) -> Vec<u64> {
    let sum: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut counts: Vec<u64> = quotas.iter().map(|q| q.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned) as usize) {
        counts[i] += 1;
    }
    counts
}

/// Synthetic data equal to the expected observation under a "true" state:
/// `n = ⌊m·A·Λ⌋`, `n̄ = ⌊n·q(mA, n)⌋`, and class counts apportioning `n̄` by
/// the true proportions.
pub fn synthesize_expected_data(
    true_abundance: f64,
    true_proportions: &[f64],
    m: usize,
    cost: &CostModel,
) -> Result<(FieldObservations, CategorizationCounts)> {
    if !(true_abundance.is_finite() && true_abundance >= 0.0) {
        return Err(Error::invalid(
            "true_abundance",
            format!("must be finite and >= 0, got {true_abundance}"),
        ));
    }
    let n = floor_count(m as f64 * cost.quadrant_area() * true_abundance);
    synthesize_from_count(n, true_proportions, m, cost)
}

/// As [`synthesize_expected_data`], taking the total count `n` as given.
pub fn synthesize_from_count(
    n: u64,
    true_proportions: &[f64],
    m: usize,
    cost: &CostModel,
) -> Result<(FieldObservations, CategorizationCounts)> {
    if true_proportions
        .iter()
        .any(|p| !(p.is_finite() && *p >= 0.0))
    {
        return Err(Error::invalid(
            "true_proportions",
            "entries must be finite and non-negative",
        ));
    }
    let sum: f64 = true_proportions.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(
            "true_proportions",
            format!("must sum to 1, got {sum}"),
        ));
    }
    let obs = FieldObservations::from_total(cost.quadrant_area(), m, n)?;
    let n_bar = cost.categorized_count(obs.total_area(), n);
    let cats = CategorizationCounts::new(largest_remainder(n_bar, true_proportions));
    Ok((obs, cats))
}

/// Summary of the abundance posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbundanceSummary {
    pub shape: f64,
    pub rate: f64,
    pub mean: f64,
    pub variance: f64,
    pub mode: Option<f64>,
    pub hpd_mass: f64,
    pub hpd_lower: f64,
    pub hpd_upper: f64,
    pub naive_estimate: f64,
    pub total_count: u64,
    pub total_area: f64,
}

/// Summary of one class marginal of the composition posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub class: String,
    pub categorized_count: u64,
    pub concentration: f64,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub abundance: AbundanceSummary,
    pub classes: Vec<ClassSummary>,
}

impl PosteriorSummary {
    pub fn new(
        posterior: &PosteriorPair,
        obs: &FieldObservations,
        cats: &CategorizationCounts,
        class_names: &[String],
        hpd_mass: f64,
    ) -> Result<Self> {
        let a = &posterior.abundance;
        let (hpd_lower, hpd_upper) = hpd_interval(a, hpd_mass)?;
        let classes = (0..posterior.composition.k())
            .map(|i| {
                let marginal = posterior.composition.marginal(i)?;
                Ok(ClassSummary {
                    class: class_names
                        .get(i)
                        .cloned()
                        .unwrap_or_else(|| format!("class{}", i + 1)),
                    categorized_count: cats.class_counts()[i],
                    concentration: marginal.a,
                    mean: marginal.mean(),
                    variance: marginal.variance(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            abundance: AbundanceSummary {
                shape: a.shape(),
                rate: a.rate(),
                mean: a.mean(),
                variance: a.variance(),
                mode: a.mode(),
                hpd_mass,
                hpd_lower,
                hpd_upper,
                naive_estimate: naive_abundance_estimate(obs),
                total_count: obs.total_count(),
                total_area: obs.total_area(),
            },
            classes,
        })
    }
}
