use std::path::Path;

use anyhow::{bail, Context, Result};
use mpdesign::campaign::CampaignData;
use mpdesign::config::Config;
use mpdesign::design::{
    default_abundance_grid, optimize_design, performance_curve, sensitivity_sweep, DesignConfig,
    DesignResult, PerformanceCurve, SweepAxis,
};
use mpdesign::posterior::{density_grid, linspace, PosteriorPair, PosteriorSummary};

use crate::table::{Cell, Table};

pub const DESIGN_COLUMNS: [&str; 7] = [
    "m",
    "area",
    "L1_star",
    "E_L2_star",
    "E_L2_se",
    "L_star",
    "L_star_se",
];
pub const CURVE_COLUMNS: [&str; 5] = ["lambda", "n", "q", "n_bar", "L2_star"];
pub const SWEEP_COLUMNS: [&str; 4] = ["value", "m_star", "typical_n_bar", "budget_slack"];
pub const POSTERIOR_COLUMNS: [&str; 4] = ["quantity", "class", "statistic", "value"];

pub fn design_table(config: &DesignConfig, result: &DesignResult) -> Table {
    let mut t = Table::new(&DESIGN_COLUMNS);
    let best = result.optimum();
    let typical = &result.typical;
    t.meta("m_star", result.m_star)
        .meta("area", best.area)
        .meta("L_star", best.l_star)
        .meta("typical_n", typical.n)
        .meta("typical_q", typical.q)
        .meta("typical_n_bar", typical.n_bar)
        .meta("sampling_share", typical.sampling_share)
        .meta("counting_share", typical.counting_share)
        .meta("categorizing_share", typical.categorizing_share)
        .meta("budget_slack", typical.slack)
        .meta("draws", config.mc_draws)
        .meta("seed", config.seed);
    for row in &result.curve.rows {
        t.push(vec![
            row.m.into(),
            row.area.into(),
            row.l1_expected.into(),
            row.e_l2_expected.into(),
            row.e_l2_se.into(),
            row.l_star.into(),
            row.l_star_se.into(),
        ]);
    }
    t
}

pub fn design(config: &Config) -> Result<Table> {
    let result = optimize_design(&config.design)?;
    Ok(design_table(&config.design, &result))
}

pub fn curve_table(curve: &PerformanceCurve) -> Table {
    let mut t = Table::new(&CURVE_COLUMNS);
    t.meta("m", curve.m).meta("max_n_bar", curve.max_n_bar());
    for row in &curve.rows {
        t.push(vec![
            row.lambda.into(),
            row.n.into(),
            row.q.into(),
            row.n_bar.into(),
            row.l2_expected.into(),
        ]);
    }
    t
}

pub fn curves(
    config: &Config,
    m: Option<usize>,
    lambda: Option<&[f64]>,
    lambda_max: Option<f64>,
    points: usize,
) -> Result<Table> {
    let design = &config.design;
    let m = match m {
        Some(m) => m,
        None => optimize_design(design)?.m_star,
    };
    let grid = match (lambda, lambda_max) {
        (Some(values), _) => values.to_vec(),
        (None, Some(top)) => {
            if !(top.is_finite() && top > 0.0) || points == 0 {
                bail!("--lambda-max must be > 0 and --points >= 1");
            }
            (1..=points)
                .map(|i| top * i as f64 / points as f64)
                .collect()
        }
        (None, None) => {
            if points == 0 {
                bail!("--points must be >= 1");
            }
            default_abundance_grid(&design.abundance_prior, points)
        }
    };
    Ok(curve_table(&performance_curve(m, &grid, design)?))
}

pub fn sensitivity(config: &Config, axis: &str, values: &[f64]) -> Result<Table> {
    let axis: SweepAxis = axis.parse()?;
    let rows = sensitivity_sweep(&config.design, axis, values)?;
    let mut t = Table::new(&SWEEP_COLUMNS);
    t.meta("axis", axis.name())
        .meta("draws", config.design.mc_draws)
        .meta("seed", config.design.seed);
    for row in rows {
        t.push(vec![
            row.value.into(),
            row.m_star.into(),
            row.typical_n_bar.into(),
            row.budget_slack.into(),
        ]);
    }
    Ok(t)
}

pub fn posterior(
    config: &Config,
    data_path: &Path,
    hpd_mass: f64,
    grid_points: Option<usize>,
) -> Result<Table> {
    let file = std::fs::File::open(data_path)
        .with_context(|| format!("reading campaign data {}", data_path.display()))?;
    let data = CampaignData::from_reader(
        file,
        config.design.cost.quadrant_area(),
        &config.class_names,
    )
    .with_context(|| format!("invalid campaign data {}", data_path.display()))?;
    let posterior = PosteriorPair::update(
        &config.design.abundance_prior,
        &config.design.composition_prior,
        &data.observations,
        &data.categorization,
    )?;
    let summary = PosteriorSummary::new(
        &posterior,
        &data.observations,
        &data.categorization,
        &config.class_names,
        hpd_mass,
    )?;

    let mut t = Table::new(&POSTERIOR_COLUMNS);
    t.meta("quadrants", data.observations.m())
        .meta("total_count", data.observations.total_count())
        .meta("categorized", data.categorization.categorized_total());
    let a = &summary.abundance;
    let abundance: [(&str, Cell); 12] = [
        ("shape", a.shape.into()),
        ("rate", a.rate.into()),
        ("mean", a.mean.into()),
        ("variance", a.variance.into()),
        ("mode", a.mode.into()),
        ("hpd_mass", a.hpd_mass.into()),
        ("hpd_lower", a.hpd_lower.into()),
        ("hpd_upper", a.hpd_upper.into()),
        ("naive_estimate", a.naive_estimate.into()),
        ("total_count", a.total_count.into()),
        ("total_area", a.total_area.into()),
        ("prior_mean", config.design.abundance_prior.mean().into()),
    ];
    for (stat, value) in abundance {
        t.push(vec!["abundance".into(), Cell::Empty, stat.into(), value]);
    }
    for c in &summary.classes {
        for (stat, value) in [
            ("categorized_count", Cell::from(c.categorized_count)),
            ("concentration", c.concentration.into()),
            ("mean", c.mean.into()),
            ("variance", c.variance.into()),
        ] {
            t.push(vec![
                "composition".into(),
                c.class.as_str().into(),
                stat.into(),
                value,
            ]);
        }
    }

    if let Some(points) = grid_points {
        if points < 2 {
            bail!("--grid-points must be at least 2");
        }
        let post = &posterior.abundance;
        let top = post
            .quantile(0.9999)?
            .max(config.design.abundance_prior.quantile(0.99)?);
        let xs = linspace(0.0, top, points);
        for (x, d) in xs.iter().zip(density_grid(post, &xs)?) {
            t.push(vec![
                "abundance_density".into(),
                Cell::Empty,
                Cell::Float(*x),
                d.into(),
            ]);
        }
        let ps = linspace(0.0, 1.0, points);
        for (i, name) in config.class_names.iter().enumerate() {
            let marginal = posterior.composition.marginal(i)?;
            for (p, d) in ps.iter().zip(density_grid(&marginal, &ps)?) {
                t.push(vec![
                    "composition_density".into(),
                    name.as_str().into(),
                    Cell::Float(*p),
                    d.into(),
                ]);
            }
        }
    }
    Ok(t)
}
