use mpdesign::cost::{BudgetSpec, CostModel, RawCosts};
use mpdesign::design::*;

#[test]
fn reruns_are_bit_identical() {
    let config = DesignConfig::baseline();
    assert_eq!(
        optimize_design(&config).unwrap(),
        optimize_design(&config).unwrap()
    );
}

#[test]
fn parallel_matches_sequential_rows() {
    let config = DesignConfig::baseline_high_prior();
    let result = optimize_design(&config).unwrap();
    for m in (0..=12).rev() {
        assert_eq!(
            result.curve.rows[m],
            expected_total_loss(m, &config).unwrap()
        );
    }
}

#[test]
fn losses_stay_in_unit_interval() {
    for config in [
        DesignConfig::baseline(),
        DesignConfig::baseline_high_prior(),
    ] {
        for row in optimize_design(&config).unwrap().curve.rows {
            assert!(row.l_star > 0.0 && row.l_star <= 1.0);
            assert!(row.l1_expected > 0.0 && row.l1_expected <= 1.0);
            assert!(row.e_l2_expected > 0.0 && row.e_l2_expected <= 1.0);
        }
    }
}

#[test]
fn more_budget_never_hurts_at_fixed_m() {
    let base = DesignConfig::baseline().with_draws(5_000);
    for m in 1..=8 {
        let mut previous = f64::INFINITY;
        for budget in [8.0, 10.0, 12.0, 14.0, 20.0] {
            let mut config = base.clone();
            config.cost = config.cost.with_budget(BudgetSpec(budget)).unwrap();
            let l = expected_total_loss(m, &config).unwrap().l_star;
            assert!(l <= previous, "m={m} budget={budget}: {l} > {previous}");
            previous = l;
        }
    }
}

#[test]
fn rescaled_costs_give_identical_design() {
    let raw = RawCosts {
        quadrant_area: 0.0625,
        sampling_per_m2: 1000.0,
        counting_per_particle: 0.05,
        categorizing_per_particle: 3.0,
        budget: 750.0,
    };
    let scaled = RawCosts {
        sampling_per_m2: 7300.0,
        counting_per_particle: 0.365,
        categorizing_per_particle: 21.9,
        budget: 5475.0,
        ..raw
    };
    let mut a = DesignConfig::baseline();
    a.cost = CostModel::from_raw(&raw).unwrap();
    let mut b = DesignConfig::baseline();
    b.cost = CostModel::from_raw(&scaled).unwrap();
    assert_eq!(optimize_design(&a).unwrap(), optimize_design(&b).unwrap());
}

#[test]
fn sweep_at_base_value_reproduces_design() {
    let base = DesignConfig::baseline();
    let design = optimize_design(&base).unwrap();
    let rows = sensitivity_sweep(&base, SweepAxis::Budget, &[12.0]).unwrap();
    assert_eq!(rows[0].m_star, design.m_star);
    assert_eq!(rows[0].l_star, design.optimum().l_star);
    assert_eq!(rows[0].typical_n_bar, design.typical.n_bar);
    assert!(sensitivity_sweep(&base, SweepAxis::Budget, &[]).is_err());
}

#[test]
fn categorization_cost_axis() {
    let base = DesignConfig::baseline();
    let rows = sensitivity_sweep(&base, SweepAxis::CategorizeRatio, &[1.0, 2.0, 1000.0]).unwrap();
    assert_eq!(rows[0].m_star, 7);
    assert_eq!(rows[1].m_star, 6);
    assert!(rows[1].typical_n_bar < rows[0].typical_n_bar);
    assert_eq!(rows[2].m_star, 12);
    assert_eq!(rows[2].typical_n_bar, 0);
}

#[test]
fn prior_mode_axis_matches_high_prior() {
    let base = DesignConfig::baseline();
    let rows = sensitivity_sweep(&base, SweepAxis::PriorMode, &[200.0, 800.0]).unwrap();
    assert_eq!(rows[0].m_star, 7);
    assert_eq!(rows[1].m_star, 4);
}

#[test]
fn categorization_rule_follows_budget() {
    let result = optimize_design(&DesignConfig::baseline()).unwrap();
    let (q, n_bar) = result.rule.apply(167);
    assert_eq!(n_bar, 101);
    assert!((q - 0.6071).abs() < 1e-4);
    assert_eq!(result.rule.apply(0), (1.0, 0));
}
