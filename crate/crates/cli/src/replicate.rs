//! Data behind the design and example figures, from built-in configurations.

use std::path::Path;

use anyhow::{bail, Result};
use mpdesign::config::{default_class_names, Config};
use mpdesign::cost::BudgetSpec;
use mpdesign::design::{
    default_abundance_grid, optimize_design, performance_curve, DesignConfig, DEFAULT_GRID_POINTS,
};
use mpdesign::distributions::GammaParams;
use mpdesign::posterior::{
    density_grid, linspace, synthesize_expected_data, synthesize_from_count, update_abundance,
    CategorizationCounts, FieldObservations, PosteriorPair,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::commands::{curve_table, design_table};
use crate::table::{write_atomic, Cell, Table};

const FIGURES: [&str; 6] = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6"];
const DENSITY_POINTS: usize = 400;
const STANDARD_M: usize = 5;
const PROPOSED_M: usize = 7;
/// Class proportions of the beach example, in default class order.
const EXAMPLE_PROPORTIONS: [f64; 10] = [0.52, 0.34, 0.0, 0.13, 0.01, 0.0, 0.0, 0.0, 0.0, 0.0];

#[derive(Serialize)]
struct ManifestEntry {
    file: String,
    figure: String,
    sha256: String,
    bytes: usize,
}

#[derive(Serialize)]
struct Manifest {
    figures: Vec<String>,
    seed: u64,
    draws: usize,
    baseline_config: mpdesign::config::ConfigFile,
    high_prior_rate: f64,
    files: Vec<ManifestEntry>,
}

struct Bundle<'a> {
    dir: &'a Path,
    figure: &'static str,
    entries: Vec<ManifestEntry>,
}

impl Bundle<'_> {
    fn write(&mut self, name: &str, table: &Table) -> Result<()> {
        let file = format!("{}_{name}.csv", self.figure);
        let text = table.to_csv()?;
        write_atomic(&self.dir.join(&file), &text)?;
        self.entries.push(ManifestEntry {
            file,
            figure: self.figure.to_string(),
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
            bytes: text.len(),
        });
        Ok(())
    }

    fn design_with_curve(&mut self, name: &str, config: &DesignConfig) -> Result<()> {
        let result = optimize_design(config)?;
        self.write(&format!("{name}_design"), &design_table(config, &result))?;
        let grid = default_abundance_grid(&config.abundance_prior, DEFAULT_GRID_POINTS);
        let curve = performance_curve(result.m_star, &grid, config)?;
        self.write(&format!("{name}_curve"), &curve_table(&curve))
    }
}

fn with_budget(config: &DesignConfig, budget: f64) -> Result<DesignConfig> {
    let mut c = config.clone();
    c.cost = c.cost.with_budget(BudgetSpec(budget))?;
    Ok(c)
}

fn with_r2_factor(config: &DesignConfig, factor: f64) -> Result<DesignConfig> {
    let mut c = config.clone();
    c.cost = c
        .cost
        .with_categorize_ratio(c.cost.categorize_ratio() * factor)?;
    Ok(c)
}

/// Abundance prior and posteriors under both designs on a common grid.
fn abundance_panel(prior: &GammaParams, posteriors: &[(usize, GammaParams)]) -> Result<Table> {
    let mut top = prior.quantile(0.99)?;
    for (_, p) in posteriors {
        top = top.max(p.quantile(0.9999)?);
    }
    let mut columns = vec!["lambda".to_string(), "prior".to_string()];
    columns.extend(posteriors.iter().map(|(m, _)| format!("posterior_m{m}")));
    let mut t = Table {
        columns,
        ..Table::default()
    };
    let xs = linspace(0.0, top, DENSITY_POINTS);
    let mut cols = vec![density_grid(prior, &xs)?];
    for (_, p) in posteriors {
        cols.push(density_grid(p, &xs)?);
    }
    for (i, x) in xs.iter().enumerate() {
        let mut row = vec![Cell::Float(*x)];
        row.extend(cols.iter().map(|c| Cell::Float(c[i])));
        t.push(row);
    }
    Ok(t)
}

fn fig5(bundle: &mut Bundle, base: &DesignConfig) -> Result<()> {
    let prior = base.abundance_prior;
    let mut summary = Table::new(&["true_lambda", "m", "n", "shape", "rate", "mean"]);
    for lambda in [5.0, 80.0] {
        let mut posteriors = Vec::new();
        for m in [STANDARD_M, PROPOSED_M] {
            let (obs, _) = synthesize_expected_data(lambda, &EXAMPLE_PROPORTIONS, m, &base.cost)?;
            let post = update_abundance(&prior, &obs);
            summary.push(vec![
                lambda.into(),
                m.into(),
                obs.total_count().into(),
                post.shape().into(),
                post.rate().into(),
                post.mean().into(),
            ]);
            posteriors.push((m, post));
        }
        let mut panel = abundance_panel(&prior, &posteriors)?;
        panel.meta("true_lambda", lambda);
        bundle.write(&format!("lambda{lambda}_abundance"), &panel)?;
    }
    bundle.write("summary", &summary)
}

fn fig6(bundle: &mut Bundle, base: &DesignConfig) -> Result<()> {
    let names = default_class_names(EXAMPLE_PROPORTIONS.len());
    let mut columns = vec!["true_lambda", "m", "n", "q", "n_bar"];
    columns.extend(names.iter().map(String::as_str));
    let mut summary = Table::new(&columns);
    let present: Vec<usize> = (0..names.len())
        .filter(|&i| EXAMPLE_PROPORTIONS[i] > 0.0)
        .collect();

    // For the higher abundance the stated expected counts are used as given.
    let cases: [(f64, Option<[u64; 2]>); 2] = [(382.0, None), (600.0, Some([200, 280]))];
    for (lambda, counts) in cases {
        let mut posteriors = Vec::new();
        for (j, m) in [STANDARD_M, PROPOSED_M].into_iter().enumerate() {
            let (obs, cats): (FieldObservations, CategorizationCounts) = match counts {
                Some(n) => synthesize_from_count(n[j], &EXAMPLE_PROPORTIONS, m, &base.cost)?,
                None => synthesize_expected_data(lambda, &EXAMPLE_PROPORTIONS, m, &base.cost)?,
            };
            let post =
                PosteriorPair::update(&base.abundance_prior, &base.composition_prior, &obs, &cats)?;
            let q = base
                .cost
                .categorization_fraction(obs.total_area(), obs.total_count());
            let mut row = vec![
                lambda.into(),
                m.into(),
                obs.total_count().into(),
                q.into(),
                cats.categorized_total().into(),
            ];
            row.extend(cats.class_counts().iter().map(|&s| Cell::from(s)));
            summary.push(row);
            posteriors.push((m, post));
        }

        let abundance: Vec<(usize, GammaParams)> =
            posteriors.iter().map(|(m, p)| (*m, p.abundance)).collect();
        let mut panel = abundance_panel(&base.abundance_prior, &abundance)?;
        panel.meta("true_lambda", lambda);
        bundle.write(&format!("lambda{lambda}_abundance"), &panel)?;

        let mut comp_columns = vec!["p".to_string()];
        for &i in &present {
            for (m, _) in &posteriors {
                comp_columns.push(format!("{}_m{m}", names[i]));
            }
        }
        let mut comp = Table {
            columns: comp_columns,
            ..Table::default()
        };
        comp.meta("true_lambda", lambda);
        let ps = linspace(0.0, 1.0, DENSITY_POINTS);
        let mut cols = Vec::new();
        for &i in &present {
            for (_, p) in &posteriors {
                cols.push(density_grid(&p.composition.marginal(i)?, &ps)?);
            }
        }
        for (k, p) in ps.iter().enumerate() {
            let mut row = vec![Cell::Float(*p)];
            row.extend(cols.iter().map(|c| Cell::Float(c[k])));
            comp.push(row);
        }
        bundle.write(&format!("lambda{lambda}_composition"), &comp)?;
    }
    bundle.write("summary", &summary)
}

fn figure(bundle: &mut Bundle, low: &DesignConfig, high: &DesignConfig) -> Result<()> {
    match bundle.figure {
        "fig1" => {
            bundle.design_with_curve("low_prior", low)?;
            bundle.design_with_curve("high_prior", high)
        }
        "fig2" => {
            bundle.design_with_curve("r2x2", &with_r2_factor(low, 2.0)?)?;
            bundle.design_with_curve("r2x1000", &with_r2_factor(low, 1000.0)?)
        }
        "fig3" => {
            bundle.design_with_curve("budget8_low_prior", &with_budget(low, 8.0)?)?;
            bundle.design_with_curve("budget8_high_prior", &with_budget(high, 8.0)?)
        }
        "fig4" => {
            bundle.design_with_curve("budget14_low_prior", &with_budget(low, 14.0)?)?;
            bundle.design_with_curve("budget14_high_prior", &with_budget(high, 14.0)?)
        }
        "fig5" => fig5(bundle, low),
        "fig6" => fig6(bundle, low),
        other => bail!("unknown figure `{other}`"),
    }
}

/// Write the files for `id` (or every figure for `all`) plus manifest.json
/// into `dir`. Seed and draws come from `settings`; everything else is the
/// built-in baseline. Returns the number of files written.
pub fn replicate(id: &str, settings: &DesignConfig, dir: &Path) -> Result<usize> {
    let ids: Vec<&'static str> = match id {
        "all" => FIGURES.to_vec(),
        other => match FIGURES.iter().find(|f| **f == other) {
            Some(f) => vec![*f],
            None => bail!("unknown figure `{other}`, expected fig1..fig6 or all"),
        },
    };
    let low = DesignConfig::baseline()
        .with_seed(settings.seed)
        .with_draws(settings.mc_draws);
    let high = DesignConfig::baseline_high_prior()
        .with_seed(settings.seed)
        .with_draws(settings.mc_draws);

    let mut files = Vec::new();
    for figure_id in &ids {
        let mut bundle = Bundle {
            dir,
            figure: figure_id,
            entries: Vec::new(),
        };
        figure(&mut bundle, &low, &high)?;
        files.extend(bundle.entries);
    }
    let baseline = Config {
        design: low.clone(),
        ..Config::baseline()
    };
    let manifest = Manifest {
        figures: ids.iter().map(|s| s.to_string()).collect(),
        seed: low.seed,
        draws: low.mc_draws,
        baseline_config: baseline.to_file(),
        high_prior_rate: high.abundance_prior.rate(),
        files,
    };
    let count = manifest.files.len() + 1;
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_atomic(&dir.join("manifest.json"), &text)?;
    Ok(count)
}
