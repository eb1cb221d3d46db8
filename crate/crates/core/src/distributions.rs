//! Parameter types, samplers, densities and moments.
//!
//! The Gamma family is parametrized by shape and **rate** everywhere in this
//! crate: `mean = shape / rate`. The posterior update adds the sampled area to
//! the rate, so mixing in a scale parameter is always a bug.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::{Error, Result};

/// Gamma distribution for the abundance `Λ` (particles per m²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    shape: f64,
    rate: f64,
}

impl GammaParams {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape.is_finite() && shape > 0.0) {
            return Err(Error::invalid(
                "shape",
                format!("must be finite and > 0, got {shape}"),
            ));
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::invalid(
                "rate",
                format!("must be finite and > 0, got {rate}"),
            ));
        }
        Ok(Self { shape, rate })
    }

    /// Build from shape and mode, `rate = (shape - 1) / mode`.
    pub fn from_shape_mode(shape: f64, mode: f64) -> Result<Self> {
        if !(shape.is_finite() && shape > 1.0) {
            return Err(Error::invalid(
                "shape",
                format!("the mode form needs shape > 1, got {shape}"),
            ));
        }
        if !(mode.is_finite() && mode > 0.0) {
            return Err(Error::invalid(
                "mode",
                format!("must be finite and > 0, got {mode}"),
            ));
        }
        Self::new(shape, (shape - 1.0) / mode)
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn variance(&self) -> f64 {
        self.shape / (self.rate * self.rate)
    }

    /// `(shape - 1) / rate`, defined for `shape >= 1`.
    pub fn mode(&self) -> Option<f64> {
        (self.shape >= 1.0).then(|| (self.shape - 1.0) / self.rate)
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        if x == 0.0 {
            return if self.shape < 1.0 {
                f64::INFINITY
            } else if self.shape == 1.0 {
                self.rate.ln()
            } else {
                f64::NEG_INFINITY
            };
        }
        self.shape * self.rate.ln() - ln_gamma(self.shape) + (self.shape - 1.0) * x.ln()
            - self.rate * x
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x.is_infinite() {
            1.0
        } else {
            gamma_lr(self.shape, self.rate * x)
        }
    }

    /// Quantile by bracketing and bisection on the CDF.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid("p", format!("must lie in (0, 1), got {p}")));
        }
        let mut hi = self.mean() + 10.0 * self.variance().sqrt();
        while self.cdf(hi) < p {
            hi *= 2.0;
        }
        Ok(bisect(|x| self.cdf(x) - p, 0.0, hi))
    }

    /// The rand_distr sampler (which is parametrized by scale).
    pub fn sampler(&self) -> Gamma<f64> {
        Gamma::new(self.shape, 1.0 / self.rate).expect("validated gamma parameters")
    }
}

/// Beta distribution; the marginals of a Dirichlet are Beta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub a: f64,
    pub b: f64,
}

impl BetaParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::invalid(
                "a",
                format!("must be finite and > 0, got {a}"),
            ));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::invalid(
                "b",
                format!("must be finite and > 0, got {b}"),
            ));
        }
        Ok(Self { a, b })
    }

    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }

    pub fn variance(&self) -> f64 {
        let s = self.a + self.b;
        self.a * self.b / (s * s * (s + 1.0))
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return f64::NEG_INFINITY;
        }
        let lx = if x == 0.0 {
            edge_log_term(self.a)
        } else {
            (self.a - 1.0) * x.ln()
        };
        let l1x = if x == 1.0 {
            edge_log_term(self.b)
        } else {
            (self.b - 1.0) * (1.0 - x).ln()
        };
        lx + l1x - ln_beta(self.a, self.b)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }
}

/// `(e - 1) * ln 0` with the convention `0 * ln 0 = 0`.
fn edge_log_term(e: f64) -> f64 {
    if e == 1.0 {
        0.0
    } else if e > 1.0 {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    }
}

/// Dirichlet distribution for the polymer proportions `P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletParams {
    concentration: Vec<f64>,
}

impl DirichletParams {
    pub fn new(concentration: Vec<f64>) -> Result<Self> {
        if concentration.len() < 2 {
            return Err(Error::invalid(
                "concentration",
                format!("needs at least 2 classes, got {}", concentration.len()),
            ));
        }
        if let Some((i, g)) = concentration
            .iter()
            .enumerate()
            .find(|(_, g)| !(g.is_finite() && **g > 0.0))
        {
            return Err(Error::invalid(
                "concentration",
                format!("component {i} must be finite and > 0, got {g}"),
            ));
        }
        Ok(Self { concentration })
    }

    /// `k` classes each with concentration `gamma`.
    pub fn symmetric(k: usize, gamma: f64) -> Result<Self> {
        Self::new(vec![gamma; k])
    }

    pub fn concentration(&self) -> &[f64] {
        &self.concentration
    }

    pub fn k(&self) -> usize {
        self.concentration.len()
    }

    /// `γ₀ = Σ γᵢ`.
    pub fn total(&self) -> f64 {
        self.concentration.iter().sum()
    }

    pub fn mean(&self) -> Vec<f64> {
        let total = self.total();
        self.concentration.iter().map(|g| g / total).collect()
    }

    /// Marginal of class `i`, `Beta(γᵢ, γ₀ − γᵢ)`.
    pub fn marginal(&self, i: usize) -> Result<BetaParams> {
        let g = *self.concentration.get(i).ok_or_else(|| {
            Error::invalid(
                "class",
                format!("index {i} out of range for k = {}", self.k()),
            )
        })?;
        BetaParams::new(g, self.total() - g)
    }

    /// `D = 1 − Σ θᵢ²`, the Gini-Simpson index of the mean vector.
    pub fn mean_dispersion(&self) -> f64 {
        let total = self.total();
        1.0 - self
            .concentration
            .iter()
            .map(|g| (g / total) * (g / total))
            .sum::<f64>()
    }
}

/// One draw from `Gamma(shape, rate)`.
pub fn gamma_sample<R: Rng + ?Sized>(params: &GammaParams, rng: &mut R) -> f64 {
    params.sampler().sample(rng)
}

/// One draw from `Poi(mean)`; a zero mean always gives zero.
pub fn poisson_sample<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    Poisson::new(mean)
        .expect("finite positive poisson mean")
        .sample(rng) as u64
}

/// Prior predictive of the total count over `total_area` m², sampled by
/// compounding: `λ ~ Gamma(prior)`, then `N ~ Poi(total_area · λ)`.
#[derive(Debug, Clone, Copy)]
pub struct PredictiveCount {
    abundance: Gamma<f64>,
    total_area: f64,
}

impl PredictiveCount {
    pub fn new(prior: &GammaParams, total_area: f64) -> Result<Self> {
        if !(total_area.is_finite() && total_area >= 0.0) {
            return Err(Error::invalid(
                "total_area",
                format!("must be finite and >= 0, got {total_area}"),
            ));
        }
        Ok(Self {
            abundance: prior.sampler(),
            total_area,
        })
    }
}

impl Distribution<u64> for PredictiveCount {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.total_area == 0.0 {
            return 0;
        }
        let lambda = self.abundance.sample(rng);
        poisson_sample(self.total_area * lambda, rng)
    }
}

/// One draw of `N = Σ Nⱼ` from the Poisson-Gamma prior predictive.
pub fn predictive_total_count<R: Rng + ?Sized>(
    prior: &GammaParams,
    total_area: f64,
    rng: &mut R,
) -> Result<u64> {
    if !(total_area > 0.0) {
        return Err(Error::invalid(
            "total_area",
            format!("must be > 0, got {total_area}"),
        ));
    }
    Ok(PredictiveCount::new(prior, total_area)?.sample(rng))
}

/// Median of the Poisson-Gamma (negative binomial) predictive of the total
/// count, by cumulative summation of the pmf.
pub fn predictive_median(prior: &GammaParams, total_area: f64) -> u64 {
    if !(total_area > 0.0) {
        return 0;
    }
    // P(N = n) = Γ(n + α) / (Γ(α) n!) · p^α (1 − p)^n with p = β / (β + a).
    let alpha = prior.shape();
    let p = prior.rate() / (prior.rate() + total_area);
    let ln_q = (1.0 - p).ln();
    let mut ln_pmf = alpha * p.ln();
    let mut cumulative = 0.0;
    let mut n = 0u64;
    loop {
        cumulative += ln_pmf.exp();
        if cumulative >= 0.5 {
            return n;
        }
        ln_pmf += (alpha + n as f64).ln() - ((n + 1) as f64).ln() + ln_q;
        n += 1;
    }
}

/// A point in the open simplex drawn from `Dir(γ)`.
///
/// Components are generated on the log scale (`Gamma(γ+1)·U^{1/γ}` for
/// `γ < 1`) so that small concentrations do not underflow to an all-zero
/// vector.
pub fn dirichlet_sample<R: Rng + ?Sized>(params: &DirichletParams, rng: &mut R) -> Vec<f64> {
    let logs: Vec<f64> = params
        .concentration()
        .iter()
        .map(|&g| {
            if g >= 1.0 {
                Gamma::new(g, 1.0).expect("positive").sample(rng).ln()
            } else {
                let boosted: f64 = Gamma::new(g + 1.0, 1.0).expect("positive").sample(rng);
                let u: f64 = rng.random::<f64>();
                boosted.ln() + u.ln() / g
            }
        })
        .collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Multinomial draw by sequential conditional binomials.
pub fn multinomial_sample<R: Rng + ?Sized>(n: u64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let mut remaining_n = n;
    let mut remaining_p = 1.0;
    let mut counts = Vec::with_capacity(probs.len());
    for (i, &p) in probs.iter().enumerate() {
        if i + 1 == probs.len() {
            counts.push(remaining_n);
            break;
        }
        let c = if remaining_n == 0 || remaining_p <= 0.0 {
            0
        } else {
            let cond = (p / remaining_p).clamp(0.0, 1.0);
            Binomial::new(remaining_n, cond)
                .expect("probability in [0, 1]")
                .sample(rng)
        };
        counts.push(c);
        remaining_n -= c;
        remaining_p -= p;
    }
    counts
}

/// `Tr(Σ₀) = (1 − Σ θᵢ²) / (1 + γ₀)` for the Dirichlet covariance `Σ₀`.
pub fn dirichlet_cov_trace(params: &DirichletParams) -> f64 {
    params.mean_dispersion() / (1.0 + params.total())
}

/// Per-class `(mean, variance)` of the Dirichlet-Multinomial with `n` trials.
pub fn dirichlet_multinomial_moments(params: &DirichletParams, n: u64) -> Vec<(f64, f64)> {
    let total = params.total();
    let n = n as f64;
    let inflation = (n + total) / (1.0 + total);
    params
        .concentration()
        .iter()
        .map(|g| {
            let theta = g / total;
            (n * theta, n * theta * (1.0 - theta) * inflation)
        })
        .collect()
}

/// Root of a function that changes sign on `[lo, hi]` (negative at `lo`).
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;

    #[test]
    fn gamma_rejects_bad_parameters() {
        assert!(GammaParams::new(0.0, 1.0).is_err());
        assert!(GammaParams::new(1.0, -1.0).is_err());
        assert!(GammaParams::new(f64::NAN, 1.0).is_err());
        assert!(GammaParams::from_shape_mode(1.0, 200.0).is_err());
    }

    #[test]
    fn shape_mode_conversion() {
        assert_eq!(
            GammaParams::from_shape_mode(3.0, 200.0).unwrap().rate(),
            0.01
        );
        assert_eq!(
            GammaParams::from_shape_mode(3.0, 800.0).unwrap().rate(),
            0.0025
        );
    }

    #[test]
    fn gamma_moments_and_mode() {
        let g = GammaParams::new(3.0, 0.01).unwrap();
        assert!((g.mean() - 300.0).abs() < 1e-9);
        assert!((g.variance() - 30000.0).abs() < 1e-6);
        assert!((g.mode().unwrap() - 200.0).abs() < 1e-9);
        assert_eq!(GammaParams::new(0.5, 1.0).unwrap().mode(), None);
    }

    #[test]
    fn gamma_density_edges() {
        assert_eq!(GammaParams::new(1.0, 1.0).unwrap().pdf(0.0), 1.0);
        assert_eq!(GammaParams::new(2.0, 1.0).unwrap().pdf(0.0), 0.0);
        assert_eq!(GammaParams::new(2.0, 1.0).unwrap().pdf(-1.0), 0.0);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let g = GammaParams::new(28.0, 0.3225).unwrap();
        let x = g.quantile(0.3).unwrap();
        assert!((g.cdf(x) - 0.3).abs() < 1e-12);
        let e = GammaParams::new(1.0, 2.0).unwrap();
        assert!((e.quantile(0.95).unwrap() - (-(0.05f64).ln() / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn poisson_zero_mean() {
        let mut rng = RandomStream::new(1, 0).rng();
        assert!((0..100).all(|_| poisson_sample(0.0, &mut rng) == 0));
    }

    #[test]
    fn dirichlet_rejects_single_class() {
        assert!(DirichletParams::new(vec![1.0]).is_err());
        assert!(DirichletParams::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn cov_trace_hand_values() {
        let ten = DirichletParams::symmetric(10, 1.0).unwrap();
        assert!((dirichlet_cov_trace(&ten) - 0.9 / 11.0).abs() < 1e-15);
        let two = DirichletParams::symmetric(2, 1.0).unwrap();
        assert!((dirichlet_cov_trace(&two) - 1.0 / 6.0).abs() < 1e-15);
        let mut g = vec![1.0; 10];
        g[0] = 1000.0;
        let dominated = DirichletParams::new(g).unwrap();
        assert!(dirichlet_cov_trace(&dominated) < 1e-4);
    }

    #[test]
    fn dm_moment_hand_values() {
        let ten = DirichletParams::symmetric(10, 1.0).unwrap();
        for (mean, var) in dirichlet_multinomial_moments(&ten, 0) {
            assert_eq!((mean, var), (0.0, 0.0));
        }
        for (mean, var) in dirichlet_multinomial_moments(&ten, 100) {
            assert!((mean - 10.0).abs() < 1e-12);
            assert!((var - 90.0).abs() < 1e-10);
        }
    }

    #[test]
    fn dirichlet_sample_small_concentration_stays_on_simplex() {
        let p = DirichletParams::symmetric(10, 0.01).unwrap();
        let mut rng = RandomStream::new(3, 0).rng();
        for _ in 0..1000 {
            let x = dirichlet_sample(&p, &mut rng);
            assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(x.iter().all(|v| v.is_finite() && *v >= 0.0));
        }
    }

    #[test]
    fn multinomial_conserves_trials() {
        let mut rng = RandomStream::new(5, 0).rng();
        let probs = [0.5, 0.3, 0.2];
        for n in [0, 1, 17, 500] {
            assert_eq!(
                multinomial_sample(n, &probs, &mut rng).iter().sum::<u64>(),
                n
            );
        }
    }

    #[test]
    fn predictive_median_small_cases() {
        // α = 1 gives a geometric predictive with P(N = 0) = β / (β + a).
        let prior = GammaParams::new(1.0, 1.0).unwrap();
        assert_eq!(predictive_median(&prior, 0.5), 0); // P(0) = 2/3
        assert_eq!(predictive_median(&prior, 3.0), 2); // P(0)=.25, P(1)=.1875, P(2)=.1406
        assert_eq!(predictive_median(&prior, 0.0), 0);
    }

    #[test]
    fn beta_density_edges() {
        let b = BetaParams::new(1.0, 9.0).unwrap();
        assert!((b.pdf(0.0) - 9.0).abs() < 1e-12);
        assert_eq!(b.pdf(1.0), 0.0);
        assert_eq!(b.pdf(1.5), 0.0);
    }
}
