//! Variance-reduction losses.
//!
//! `L₁` is the ratio of posterior to prior variance of the abundance `Λ`;
//! `L₂` is the ratio of the traces of the posterior and prior covariance of
//! the composition `P`. The starred forms are their prior-expected values,
//! which have closed forms. The Monte Carlo oracles average the realized
//! losses over simulated data and are kept as an independent check on those
//! closed forms.

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::distributions::{
    dirichlet_sample, multinomial_sample, DirichletParams, GammaParams, PredictiveCount,
};
use crate::{Error, Result};

/// Smallest number of draws accepted by the Monte Carlo oracles.
pub const MIN_ORACLE_DRAWS: usize = 1_000;

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
    pub draws: usize,
}

impl McEstimate {
    /// Exact value, zero standard error.
    pub fn exact(value: f64) -> Self {
        Self {
            mean: value,
            se: 0.0,
            draws: 0,
        }
    }

    /// `|mean − target|` measured in standard errors (0 when both agree
    /// exactly).
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.se
        }
    }
}

/// Welford accumulator for a running mean and variance.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct RunningMoments {
    count: usize,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub(crate) fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub(crate) fn estimate(&self) -> McEstimate {
        let var = if self.count > 1 {
            self.m2 / (self.count - 1) as f64
        } else {
            0.0
        };
        McEstimate {
            mean: self.mean,
            se: (var / self.count.max(1) as f64).sqrt(),
            draws: self.count,
        }
    }
}

/// Realized `L₁ = (β²/α)·(α + n)/(β + mA)²` for total count `n` over `m`
/// quadrants of area `A`.
pub fn l1_realized(m: usize, n: u64, prior: &GammaParams, quadrant_area: f64) -> f64 {
    let (alpha, beta) = (prior.shape(), prior.rate());
    let post_rate = beta + m as f64 * quadrant_area;
    (beta * beta / alpha) * (alpha + n as f64) / (post_rate * post_rate)
}

/// Prior-expected `L₁* = 1 / (1 + (ν₀/λ₀)·mA)` with `ν₀/λ₀ = 1/β`.
pub fn l1_expected(m: usize, prior: &GammaParams, quadrant_area: f64) -> f64 {
    let variance_to_mean = prior.variance() / prior.mean();
    1.0 / (1.0 + variance_to_mean * m as f64 * quadrant_area)
}

/// Realized `L₂ = Tr(Σ₁)/Tr(Σ₀)` after observing `class_counts`.
pub fn l2_realized(class_counts: &[u64], prior: &DirichletParams) -> Result<f64> {
    if class_counts.len() != prior.k() {
        return Err(Error::DimensionMismatch {
            expected: prior.k(),
            actual: class_counts.len(),
        });
    }
    let dispersion = prior.mean_dispersion();
    if !(dispersion > 0.0) {
        return Err(Error::invalid(
            "prior",
            "prior covariance trace is zero, the loss ratio is undefined",
        ));
    }
    let g0 = prior.total();
    let n_bar: u64 = class_counts.iter().sum();
    let post_total = g0 + n_bar as f64;
    let post_sq: f64 = prior
        .concentration()
        .iter()
        .zip(class_counts)
        .map(|(g, &s)| {
            let theta = (g + s as f64) / post_total;
            theta * theta
        })
        .sum();
    Ok((1.0 + g0) / (dispersion * (1.0 + post_total)) * (1.0 - post_sq))
}

/// Prior-expected `L₂*` for `n̄` categorized particles:
/// `((γ₀+1)(γ₀+n̄) − n̄) / ((γ₀+1+n̄)(γ₀+n̄))`.
pub fn l2_expected(n_bar: u64, prior: &DirichletParams) -> f64 {
    l2_expected_total(n_bar, prior.total())
}

/// [`l2_expected`] from `γ₀` alone; the expected loss depends on nothing else.
pub fn l2_expected_total(n_bar: u64, g0: f64) -> f64 {
    let n = n_bar as f64;
    ((g0 + 1.0) * (g0 + n) - n) / ((g0 + 1.0 + n) * (g0 + n))
}

/// Monte Carlo estimate of `E_N[L₁]` under the Poisson-Gamma predictive.
pub fn mc_oracle_l1<R: Rng + ?Sized>(
    m: usize,
    prior: &GammaParams,
    quadrant_area: f64,
    draws: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    check_draws(draws)?;
    if m == 0 {
        return Ok(McEstimate::exact(1.0));
    }
    let predictive = PredictiveCount::new(prior, m as f64 * quadrant_area)?;
    let mut acc = RunningMoments::default();
    for _ in 0..draws {
        let n = predictive.sample(rng);
        acc.push(l1_realized(m, n, prior, quadrant_area));
    }
    Ok(acc.estimate())
}

/// Monte Carlo estimate of `E_S[L₂]` with `p ~ Dir(γ)`, `s ~ Mult(n̄, p)`.
pub fn mc_oracle_l2<R: Rng + ?Sized>(
    n_bar: u64,
    prior: &DirichletParams,
    draws: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    check_draws(draws)?;
    if n_bar == 0 {
        return Ok(McEstimate::exact(1.0));
    }
    let mut acc = RunningMoments::default();
    for _ in 0..draws {
        let p = dirichlet_sample(prior, rng);
        let s = multinomial_sample(n_bar, &p, rng);
        acc.push(l2_realized(&s, prior)?);
    }
    Ok(acc.estimate())
}

fn check_draws(draws: usize) -> Result<()> {
    if draws < MIN_ORACLE_DRAWS {
        return Err(Error::invalid(
            "draws",
            format!("at least {MIN_ORACLE_DRAWS} draws are required, got {draws}"),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn low_prior() -> GammaParams {
        GammaParams::new(3.0, 0.01).unwrap()
    }

    #[test]
    fn l1_realized_hand_value() {
        let v = l1_realized(5, 25, &low_prior(), 0.0625);
        let expected = (0.0001 / 3.0) * 28.0 / (0.3225 * 0.3225);
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 0.008975).abs() < 5e-6);
    }

    #[test]
    fn l1_realized_fixed_point_is_one() {
        // α + n = (β + mA)²·α/β² with α = 1, β = 1, m = 1, A = 1 gives n = 3.
        let prior = GammaParams::new(1.0, 1.0).unwrap();
        assert_eq!(l1_realized(1, 3, &prior, 1.0), 1.0);
    }

    #[test]
    fn l1_realized_vanishing_data() {
        let v = l1_realized(1, 0, &low_prior(), 1e-12);
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn l1_expected_reported_values() {
        assert!((l1_expected(5, &low_prior(), 0.0625) - 0.0310).abs() < 1e-4);
        assert!((l1_expected(7, &low_prior(), 0.0625) - 0.0224).abs() < 1e-4);
        assert_eq!(l1_expected(0, &low_prior(), 0.0625), 1.0);
        // Closed form 1/(1 + mA/β).
        assert!((l1_expected(5, &low_prior(), 0.0625) - 1.0 / 32.25).abs() < 1e-15);
    }

    #[test]
    fn l2_realized_small_case() {
        let prior = DirichletParams::symmetric(3, 1.0).unwrap();
        let v = l2_realized(&[2, 1, 0], &prior).unwrap();
        assert!((v - 11.0 / 21.0).abs() < 1e-15);
        assert_eq!(l2_realized(&[0, 0, 0], &prior).unwrap(), 1.0);
        assert!(l2_realized(&[1, 1], &prior).is_err());
    }

    #[test]
    fn l2_expected_reported_values() {
        let ten = DirichletParams::symmetric(10, 1.0).unwrap();
        assert!((l2_expected(280, &ten) - 2910.0 / 84390.0).abs() < 1e-15);
        assert!((l2_expected(280, &ten) - 0.03448).abs() < 1e-5);
        assert!((l2_expected(99, &ten) - 0.09174).abs() < 1e-5);
        assert_eq!(l2_expected(0, &ten), 1.0);
        let flat = DirichletParams::symmetric(10, 0.1).unwrap();
        assert!((l2_expected(9, &flat) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn oracles_short_circuit_and_validate() {
        let mut rng = crate::rng::RandomStream::new(1, 1).rng();
        let ten = DirichletParams::symmetric(10, 1.0).unwrap();
        assert_eq!(
            mc_oracle_l1(0, &low_prior(), 0.0625, 1000, &mut rng).unwrap(),
            McEstimate::exact(1.0)
        );
        assert_eq!(
            mc_oracle_l2(0, &ten, 1000, &mut rng).unwrap(),
            McEstimate::exact(1.0)
        );
        assert!(mc_oracle_l1(1, &low_prior(), 0.0625, 999, &mut rng).is_err());
    }
}
