//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::Instant;

use mpdesign::cost::{BudgetSpec, CostModel, RawCosts};
use mpdesign::design::*;
use mpdesign::distributions::{dirichlet_multinomial_moments, DirichletParams, GammaParams};
use mpdesign::loss::*;
use mpdesign::posterior::*;
use mpdesign::rng::RandomStream;
use rand::Rng;
use statrs::function::gamma::ln_gamma;

const ACCEPTANCE_DRAWS: usize = 100_000;

type Criterion = (&'static str, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn low() -> DesignConfig {
    DesignConfig::baseline().with_draws(ACCEPTANCE_DRAWS)
}

fn high() -> DesignConfig {
    DesignConfig::baseline_high_prior().with_draws(ACCEPTANCE_DRAWS)
}

fn with_budget(config: DesignConfig, budget: f64) -> DesignConfig {
    let mut config = config;
    config.cost = config.cost.with_budget(BudgetSpec(budget)).unwrap();
    config
}

fn baseline_replication() -> Outcome {
    let mut hits = [0usize; 2];
    for seed in 1..=20u64 {
        if optimize_design(&low().with_seed(seed)).unwrap().m_star == 7 {
            hits[0] += 1;
        }
        if optimize_design(&high().with_seed(seed)).unwrap().m_star == 4 {
            hits[1] += 1;
        }
    }
    outcome(
        hits[0] >= 19 && hits[1] >= 19,
        format!("m*=7 in {}/20 seeds, m*=4 in {}/20 seeds", hits[0], hits[1]),
    )
}

fn abundance_loss_values() -> Outcome {
    let prior = GammaParams::new(3.0, 0.01).unwrap();
    let l5 = l1_expected(5, &prior, 0.0625);
    let l7 = l1_expected(7, &prior, 0.0625);
    outcome(
        (l5 - 0.03101).abs() <= 1e-4 && (l7 - 0.02235).abs() <= 1e-4,
        format!("L1*(5)={l5:.5} L1*(7)={l7:.5}"),
    )
}

fn budget_implied_fraction() -> Outcome {
    let cost = CostModel::new(0.0625, BudgetSpec(12.0), 5e-5, 3e-3).unwrap();
    let q1 = cost.categorization_fraction(0.4375, 167);
    let q2 = cost.categorization_fraction(0.4375, 280);
    let n1 = cost.categorized_count(0.4375, 167);
    let n2 = cost.categorized_count(0.4375, 280);
    outcome(
        (q1 - 0.6071).abs() <= 1e-3 && (q2 - 0.3554).abs() <= 1e-3 && n1 == 101 && n2 == 99,
        format!("n=167: q={q1:.4} n_bar={n1}; n=280: q={q2:.4} n_bar={n2}"),
    )
}

fn composition_loss_values() -> Outcome {
    let a = l2_expected_total(280, 10.0);
    let b = l2_expected_total(99, 10.0);
    outcome(
        (a - 0.0344).abs() <= 5e-4 && (b - 0.092).abs() <= 2e-3,
        format!("L2*(280)={a:.5} L2*(99)={b:.5}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut gen = RandomStream::new(5, 0).rng();
    let mut worst = [0.0f64; 2];
    for i in 0..20u64 {
        let prior =
            GammaParams::new(gen.random_range(0.5..10.0), gen.random_range(0.001..1.0)).unwrap();
        let area = gen.random_range(0.01..1.0);
        let m = gen.random_range(1..20usize);
        let mut rng = RandomStream::new(5, 100 + i).rng();
        let est = mc_oracle_l1(m, &prior, area, ACCEPTANCE_DRAWS, &mut rng).unwrap();
        worst[0] = worst[0].max(est.z_score(l1_expected(m, &prior, area)));

        let k = gen.random_range(2..12usize);
        let gamma: Vec<f64> = (0..k).map(|_| gen.random_range(0.1..5.0)).collect();
        let prior = DirichletParams::new(gamma).unwrap();
        let n_bar = gen.random_range(1..500u64);
        let mut rng = RandomStream::new(5, 200 + i).rng();
        let est = mc_oracle_l2(n_bar, &prior, ACCEPTANCE_DRAWS, &mut rng).unwrap();
        worst[1] = worst[1].max(est.z_score(l2_expected(n_bar, &prior)));
    }
    outcome(
        worst[0] <= 3.0 && worst[1] <= 3.0,
        format!(
            "max |z|: L1 {:.2}, L2 {:.2} over 20 configs each",
            worst[0], worst[1]
        ),
    )
}

fn robustness() -> Outcome {
    let scenarios: [(&str, DesignConfig, usize, u64, u64); 4] = [
        ("B=8 low", with_budget(low(), 8.0), 5, 60, 10),
        ("B=8 high", with_budget(high(), 8.0), 3, 100, 15),
        ("B=14 low", with_budget(low(), 14.0), 8, 125, 15),
        ("B=14 high", with_budget(high(), 14.0), 5, 200, 20),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, config, m_star, n_bar, band) in scenarios {
        let result = optimize_design(&config).unwrap();
        let ok = result.m_star == m_star && result.typical.n_bar.abs_diff(n_bar) <= band;
        pass &= ok;
        parts.push(format!(
            "{name}: m*={} n_bar={}",
            result.m_star, result.typical.n_bar
        ));
    }
    let rows = sensitivity_sweep(&low(), SweepAxis::CategorizeRatio, &[1000.0]).unwrap();
    pass &= rows[0].typical_n_bar == 0;
    parts.push(format!("r2x1000: n_bar={}", rows[0].typical_n_bar));
    outcome(pass, parts.join("; "))
}

fn plateau_low_prior() -> Outcome {
    let config = low();
    let grid = default_abundance_grid(&config.abundance_prior, DEFAULT_GRID_POINTS);
    let curve = performance_curve(7, &grid, &config).unwrap();
    let first_partial = curve.rows.iter().find(|r| r.q < 1.0).map(|r| r.n);
    let full_below = curve.rows.iter().filter(|r| r.n < 90).all(|r| r.q == 1.0);
    let knee_ok = full_below && first_partial.is_some_and(|n| (90..=110).contains(&n));
    let plateau = curve.max_n_bar();
    let plateau_ok = (108..=132).contains(&plateau);
    outcome(
        knee_ok && plateau_ok,
        format!(
            "m=7: first q<1 at n={}, max n_bar={plateau} (target 120 +/-10%)",
            first_partial.map_or("none".into(), |n| n.to_string())
        ),
    )
}

fn peak_high_prior() -> Outcome {
    let config = high();
    let grid = default_abundance_grid(&config.abundance_prior, DEFAULT_GRID_POINTS);
    let peak = performance_curve(4, &grid, &config).unwrap().max_n_bar();
    outcome(
        (162..=198).contains(&peak),
        format!("m=4: max n_bar={peak} (target 180 +/-10%)"),
    )
}

/// Exact Dirichlet-Multinomial moments by summing the pmf over all outcomes.
fn enumerate_moments(gamma: &[f64; 3], n: u64) -> Vec<(f64, f64)> {
    let g0: f64 = gamma.iter().sum();
    let ln_norm = ln_gamma(g0) - ln_gamma(g0 + n as f64) + ln_gamma(n as f64 + 1.0);
    let mut first = [0.0; 3];
    let mut second = [0.0; 3];
    for s0 in 0..=n {
        for s1 in 0..=n - s0 {
            let s = [s0, s1, n - s0 - s1];
            let ln_p = ln_norm
                + s.iter()
                    .zip(gamma)
                    .map(|(&si, &g)| {
                        ln_gamma(g + si as f64) - ln_gamma(g) - ln_gamma(si as f64 + 1.0)
                    })
                    .sum::<f64>();
            let p = ln_p.exp();
            for i in 0..3 {
                first[i] += p * s[i] as f64;
                second[i] += p * (s[i] * s[i]) as f64;
            }
        }
    }
    (0..3)
        .map(|i| (first[i], second[i] - first[i] * first[i]))
        .collect()
}

fn posterior_validity() -> Outcome {
    let mut gen = RandomStream::new(8, 0).rng();
    let mut hpd_ok = true;
    for _ in 0..500 {
        let prior =
            GammaParams::new(gen.random_range(0.2..10.0), gen.random_range(0.001..2.0)).unwrap();
        let m = gen.random_range(1..15usize);
        let counts: Vec<u64> = (0..m).map(|_| gen.random_range(0..60)).collect();
        let obs = FieldObservations::new(0.0625, counts).unwrap();
        let post = update_abundance(&prior, &obs);
        let mass = gen.random_range(0.5..0.99);
        match hpd_interval(&post, mass) {
            Ok((lo, hi)) => hpd_ok &= lo >= 0.0 && hi > lo,
            Err(_) => hpd_ok = false,
        }
    }

    let mut seq_ok = true;
    for _ in 0..500 {
        let prior = GammaParams::new(
            gen.random_range(1..64u32) as f64 / 4.0,
            gen.random_range(1..64u32) as f64 / 64.0,
        )
        .unwrap();
        let a: Vec<u64> = (0..gen.random_range(1..8))
            .map(|_| gen.random_range(0..100))
            .collect();
        let b: Vec<u64> = (0..gen.random_range(1..8))
            .map(|_| gen.random_range(0..100))
            .collect();
        let joint: Vec<u64> = a.iter().chain(&b).copied().collect();
        let step = update_abundance(&prior, &FieldObservations::new(0.0625, a).unwrap());
        let seq = update_abundance(&step, &FieldObservations::new(0.0625, b).unwrap());
        let all = update_abundance(&prior, &FieldObservations::new(0.0625, joint).unwrap());
        seq_ok &= seq == all;

        let dir = DirichletParams::new(
            (0..4)
                .map(|_| gen.random_range(1..16u32) as f64 / 8.0)
                .collect(),
        )
        .unwrap();
        let c1: Vec<u64> = (0..4).map(|_| gen.random_range(0..40)).collect();
        let c2: Vec<u64> = (0..4).map(|_| gen.random_range(0..40)).collect();
        let c12: Vec<u64> = c1.iter().zip(&c2).map(|(x, y)| x + y).collect();
        let seq = update_composition(
            &update_composition(&dir, &CategorizationCounts::new(c1)).unwrap(),
            &CategorizationCounts::new(c2),
        )
        .unwrap();
        seq_ok &= seq == update_composition(&dir, &CategorizationCounts::new(c12)).unwrap();
    }

    let mut worst: f64 = 0.0;
    for gamma in [[1.0, 1.0, 1.0], [0.5, 2.0, 3.5], [0.1, 0.7, 4.0]] {
        let params = DirichletParams::new(gamma.to_vec()).unwrap();
        for n in 0..=6 {
            let exact = enumerate_moments(&gamma, n);
            for (closed, enumerated) in dirichlet_multinomial_moments(&params, n).iter().zip(&exact)
            {
                worst = worst
                    .max((closed.0 - enumerated.0).abs())
                    .max((closed.1 - enumerated.1).abs());
            }
        }
    }
    outcome(
        hpd_ok && seq_ok && worst <= 1e-9,
        format!(
            "HPD nonnegative: {hpd_ok}; sequential = joint: {seq_ok}; DM moment error {worst:.1e}"
        ),
    )
}

fn determinism_and_scale() -> Outcome {
    let run = |config: &DesignConfig| {
        let design = optimize_design(config).unwrap();
        let grid = default_abundance_grid(&config.abundance_prior, DEFAULT_GRID_POINTS);
        let curve = performance_curve(design.m_star, &grid, config).unwrap();
        let sweep = sensitivity_sweep(config, SweepAxis::CategorizeRatio, &[0.5, 2.0]).unwrap();
        serde_json::to_vec(&(design, curve, sweep)).unwrap()
    };
    let raw = RawCosts {
        quadrant_area: 0.0625,
        sampling_per_m2: 1000.0,
        counting_per_particle: 0.05,
        categorizing_per_particle: 3.0,
        budget: 750.0,
    };
    let scaled = RawCosts {
        sampling_per_m2: raw.sampling_per_m2 * 7.3,
        counting_per_particle: raw.counting_per_particle * 7.3,
        categorizing_per_particle: raw.categorizing_per_particle * 7.3,
        budget: raw.budget * 7.3,
        ..raw
    };
    let mut a = low();
    a.cost = CostModel::from_raw(&raw).unwrap();
    let mut b = low();
    b.cost = CostModel::from_raw(&scaled).unwrap();
    let first = run(&a);
    let repeat = first == run(&a);
    let scale = first == run(&b);
    outcome(
        repeat && scale,
        format!("repeat byte-identical: {repeat}; x7.3 costs byte-identical: {scale}"),
    )
}

fn u_shape() -> Outcome {
    let rows = optimize_design(&low()).unwrap().curve.rows;
    let signs: Vec<i8> = rows
        .windows(2)
        .filter_map(|w| {
            let diff = w[1].e_l2_expected - w[0].e_l2_expected;
            let band = 2.0 * w[0].e_l2_se.hypot(w[1].e_l2_se);
            if diff < -band {
                Some(-1)
            } else if diff > band {
                Some(1)
            } else {
                None
            }
        })
        .collect();
    let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    let shape_ok = changes == 1 && signs.first() == Some(&-1) && signs.last() == Some(&1);
    let e: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.3}", r.e_l2_expected))
        .collect();
    outcome(
        shape_ok,
        format!("{changes} sign change(s); E[L2*] = [{}]", e.join(", ")),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("1", "baseline design replication", baseline_replication),
        ("2", "abundance loss values", abundance_loss_values),
        (
            "3",
            "budget-implied categorization fraction",
            budget_implied_fraction,
        ),
        ("4", "composition loss values", composition_loss_values),
        ("5", "oracle equivalence", oracle_equivalence),
        ("6", "robustness scenarios", robustness),
        (
            "7a",
            "performance curve, low-prior plateau",
            plateau_low_prior,
        ),
        ("7b", "performance curve, high-prior peak", peak_high_prior),
        ("8", "posterior validity", posterior_validity),
        (
            "9",
            "determinism and scale invariance",
            determinism_and_scale,
        ),
        ("10", "U-shaped composition loss", u_shape),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let start = Instant::now();
        let result = check();
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!result.pass);
        println!(
            "criterion {id:<3} {verdict}  {name} ({:.1}s): {}",
            start.elapsed().as_secs_f64(),
            result.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
