//! Campaign data files.
//!
//! A CSV file with `#` comment lines and up to two sections, each introduced
//! by its own header row:
//!
//! ```text
//! # schema_version: 1
//! quadrant_id,suspected_count
//! Q1,12
//! Q2,7
//! class_name,categorized_count
//! PE,5
//! PP,3
//! ```
//!
//! The second section is optional; classes it omits have zero categorized
//! particles.

use std::collections::HashSet;
use std::io::Read;

use crate::posterior::{CategorizationCounts, FieldObservations};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const QUADRANT_HEADER: [&str; 2] = ["quadrant_id", "suspected_count"];
pub const CLASS_HEADER: [&str; 2] = ["class_name", "categorized_count"];

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignData {
    pub quadrant_ids: Vec<String>,
    pub observations: FieldObservations,
    pub categorization: CategorizationCounts,
}

#[derive(PartialEq)]
enum Section {
    Start,
    Quadrants,
    Classes,
}

fn data_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Data {
        line,
        reason: reason.into(),
    }
}

fn parse_count(field: &str, line: usize) -> Result<u64> {
    field.trim().parse::<u64>().map_err(|_| {
        data_err(
            line,
            format!("`{}` is not a non-negative integer count", field.trim()),
        )
    })
}

impl CampaignData {
    pub fn from_reader<R: Read>(
        reader: R,
        quadrant_area: f64,
        class_names: &[String],
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);

        let mut section = Section::Start;
        let mut quadrant_ids = Vec::new();
        let mut counts = Vec::new();
        let mut class_counts = vec![0u64; class_names.len()];
        let mut seen_classes = HashSet::new();

        for record in rdr.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                data_err(line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            if record.len() != 2 {
                return Err(data_err(
                    line,
                    format!("expected 2 fields, got {}", record.len()),
                ));
            }
            let (a, b) = (&record[0], &record[1]);
            if [a, b] == QUADRANT_HEADER {
                if section != Section::Start {
                    return Err(data_err(
                        line,
                        "quadrant section must come first and only once",
                    ));
                }
                section = Section::Quadrants;
                continue;
            }
            if [a, b] == CLASS_HEADER {
                if section != Section::Quadrants {
                    return Err(data_err(
                        line,
                        "class section must follow the quadrant section",
                    ));
                }
                section = Section::Classes;
                continue;
            }
            match section {
                Section::Start => {
                    return Err(data_err(
                        line,
                        format!("expected header `{}`", QUADRANT_HEADER.join(",")),
                    ))
                }
                Section::Quadrants => {
                    quadrant_ids.push(a.to_string());
                    counts.push(parse_count(b, line)?);
                }
                Section::Classes => {
                    let idx = class_names
                        .iter()
                        .position(|c| c == a)
                        .ok_or_else(|| data_err(line, format!("unknown class `{a}`")))?;
                    if !seen_classes.insert(idx) {
                        return Err(data_err(line, format!("class `{a}` listed twice")));
                    }
                    class_counts[idx] = parse_count(b, line)?;
                }
            }
        }

        if counts.is_empty() {
            return Err(data_err(0, "no quadrant rows found"));
        }
        let observations = FieldObservations::new(quadrant_area, counts)?;
        let categorization = CategorizationCounts::new(class_counts);
        if categorization.categorized_total() > observations.total_count() {
            return Err(data_err(
                0,
                format!(
                    "{} particles categorized but only {} suspected particles counted",
                    categorization.categorized_total(),
                    observations.total_count()
                ),
            ));
        }
        Ok(Self {
            quadrant_ids,
            observations,
            categorization,
        })
    }

    /// Render in the file format.
    pub fn to_csv(&self, class_names: &[String]) -> String {
        let mut out = format!(
            "# schema_version: {SCHEMA_VERSION}\n{}\n",
            QUADRANT_HEADER.join(",")
        );
        for (id, n) in self.quadrant_ids.iter().zip(self.observations.counts()) {
            out.push_str(&format!("{id},{n}\n"));
        }
        out.push_str(&CLASS_HEADER.join(","));
        out.push('\n');
        for (name, s) in class_names.iter().zip(self.categorization.class_counts()) {
            out.push_str(&format!("{name},{s}\n"));
        }
        out
    }
}
