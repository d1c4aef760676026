//! Report emitters and their parsers.
//!
//! Text is the human format; CSV and JSON are data exports. Every CSV and
//! JSON payload round-trips through the parser in this module. Scores are
//! shown to 2 decimals (ranking always uses full precision), histogram
//! proportions to 4.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use refd_core::{
    CriteriaGroup, Dataset, GroupSubscores, HistogramReport, RatingTable, ReportEnvelope,
    ReportPayload, ScreeningReport, StabilityReport, TrendReport, TrendStatus,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

pub fn stars_display(stars: u8) -> String {
    "*".repeat(stars as usize)
}

fn meta_lines(envelope: &ReportEnvelope, kind: &str) -> String {
    format!(
        "# refd {kind} report\n# tool_version: {}\n# config_digest: {}\n# dataset_digest: {}\n",
        envelope.tool_version, envelope.config_digest, envelope.dataset_digest
    )
}

/// Key/value metadata parsed back from `#` comment lines.
pub fn parse_meta(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter(|l| l.starts_with('#'))
        .filter_map(|l| {
            let rest = l.trim_start_matches('#').trim();
            rest.split_once(':')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// rating

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRow {
    pub rank: usize,
    pub region_id: String,
    pub region_name: String,
    pub stars: u8,
    pub stars_display: String,
    pub contingent: f64,
    pub density_support: f64,
    pub temp_support: f64,
    pub overall: f64,
}

fn rating_rows(table: &RatingTable, dataset: Option<&Dataset>) -> Vec<RatingRow> {
    table
        .results
        .iter()
        .map(|r| RatingRow {
            rank: r.rank,
            region_id: r.region_id.clone(),
            region_name: dataset
                .and_then(|d| d.region(&r.region_id))
                .map(|reg| reg.name.clone())
                .unwrap_or_else(|| r.region_id.clone()),
            stars: r.stars,
            stars_display: stars_display(r.stars),
            contingent: round2(r.contingent_score),
            density_support: round2(r.density_support),
            temp_support: round2(r.temp_support),
            overall: round2(r.overall_score),
        })
        .collect()
}

fn round2(v: f64) -> f64 {
    format!("{v:.2}").parse().expect("2dp float")
}

fn round4(v: f64) -> f64 {
    format!("{v:.4}").parse().expect("4dp float")
}

pub fn rating_text(
    envelope: &ReportEnvelope,
    table: &RatingTable,
    subscores: &GroupSubscores,
    dataset: &Dataset,
) -> String {
    let mut out = meta_lines(envelope, "rating");
    out.push_str(&format!(
        "# year: {}  regions: {}  factors: {}  stddev: {}\n",
        table.year,
        table.results.len(),
        dataset.factors.len(),
        table.stddev_mode.as_str()
    ));
    out.push_str(&format!(
        "# weight_sum: {:.4}  max_contingent: {:.2}\n\n",
        table.weight_sum, table.max_contingent
    ));

    out.push_str(&format!(
        "{:>4}  {:<12} {:<20} {:<6} {:>6} {:>5} {:>5} {:>6}\n",
        "rank", "region", "name", "stars", "R", "D", "T", "REFD"
    ));
    for row in rating_rows(table, Some(dataset)) {
        out.push_str(&format!(
            "{:>4}  {:<12} {:<20} {:<6} {:>6.2} {:>5.2} {:>5.2} {:>6.2}\n",
            row.rank,
            row.region_id,
            row.region_name,
            row.stars_display,
            row.contingent,
            row.density_support,
            row.temp_support,
            row.overall
        ));
    }

    let groups: Vec<CriteriaGroup> = CriteriaGroup::ALL
        .into_iter()
        .filter(|g| subscores.per_region.values().any(|m| m.contains_key(g)))
        .collect();
    if !groups.is_empty() {
        out.push_str("\n# group subscores (mean points per criteria group)\n");
        out.push_str(&format!("{:<12}", "region"));
        for g in &groups {
            out.push_str(&format!(" {:>22}", g.as_str()));
        }
        out.push('\n');
        for row in &table.results {
            out.push_str(&format!("{:<12}", row.region_id));
            for g in &groups {
                match subscores.per_region[&row.region_id].get(g) {
                    Some(v) => out.push_str(&format!(" {:>22.2}", v)),
                    None => out.push_str(&format!(" {:>22}", "-")),
                }
            }
            out.push('\n');
        }
    }

    out.push_str("\n# factor stats\n");
    out.push_str(&format!(
        "{:<12} {:<8} {:>4} {:>14} {:>14}\n",
        "factor", "stratum", "n", "mean", "sigma"
    ));
    for (factor, entries) in &table.factor_stats {
        for s in entries {
            out.push_str(&format!(
                "{:<12} {:<8} {:>4} {:>14.4} {:>14.4}\n",
                factor,
                s.stratum.to_string(),
                s.n,
                s.mean,
                s.sigma
            ));
        }
    }

    out.push_str("\n# scores are shown to 2 decimals; ranking uses full precision\n");
    push_warnings(&mut out, &table.warnings);
    out
}

pub fn rating_csv(envelope: &ReportEnvelope, table: &RatingTable, dataset: &Dataset) -> String {
    let mut out = meta_lines(envelope, "rating");
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rating_rows(table, Some(dataset)) {
        w.serialize(row).expect("csv row");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("csv buffer")).expect("utf-8"));
    out
}

pub fn parse_rating_csv(text: &str) -> Result<Vec<RatingRow>> {
    parse_csv_rows(text)
}

// ---------------------------------------------------------------------------
// screening

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningRow {
    /// flagged | eliminated | reinstated | retained | constant | whitelist_hit
    pub kind: String,
    pub a: String,
    #[serde(default)]
    pub b: String,
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub step: Option<usize>,
}

fn screening_rows(report: &ScreeningReport) -> Vec<ScreeningRow> {
    let mut rows = Vec::new();
    for p in &report.flagged {
        rows.push(ScreeningRow {
            kind: "flagged".into(),
            a: p.a.clone(),
            b: p.b.clone(),
            r: Some(round4(p.r)),
            step: None,
        });
    }
    for e in &report.eliminations {
        rows.push(ScreeningRow {
            kind: "eliminated".into(),
            a: e.factor_id.clone(),
            b: String::new(),
            r: None,
            step: Some(e.step),
        });
    }
    for id in &report.reinstated {
        rows.push(ScreeningRow {
            kind: "reinstated".into(),
            a: id.clone(),
            b: String::new(),
            r: None,
            step: None,
        });
    }
    for id in &report.retained {
        rows.push(ScreeningRow {
            kind: "retained".into(),
            a: id.clone(),
            b: String::new(),
            r: None,
            step: None,
        });
    }
    for id in &report.constant_factors {
        rows.push(ScreeningRow {
            kind: "constant".into(),
            a: id.clone(),
            b: String::new(),
            r: None,
            step: None,
        });
    }
    for p in &report.whitelist_hits {
        rows.push(ScreeningRow {
            kind: "whitelist_hit".into(),
            a: p.a.clone(),
            b: p.b.clone(),
            r: Some(round4(p.r)),
            step: None,
        });
    }
    rows
}

pub fn screening_text(
    envelope: &ReportEnvelope,
    threshold: f64,
    report: &ScreeningReport,
) -> String {
    let mut out = meta_lines(envelope, "screening");
    out.push_str(&format!("# threshold: |r| >= {threshold}\n\n"));

    if report.flagged.is_empty() {
        out.push_str("no factor pair met the threshold\n");
    } else {
        out.push_str(&format!("flagged pairs ({})\n", report.flagged.len()));
        for p in &report.flagged {
            out.push_str(&format!("  {:<12} {:<12} r = {:+.4}\n", p.a, p.b, p.r));
        }
    }

    if !report.eliminations.is_empty() {
        out.push_str(&format!("\neliminations ({})\n", report.eliminations.len()));
        for e in &report.eliminations {
            let partners: Vec<String> = e
                .partners
                .iter()
                .map(|(id, r)| format!("{id} (r = {r:+.4})"))
                .collect();
            out.push_str(&format!(
                "  step {}: dropped '{}' correlated with {}\n",
                e.step,
                e.factor_id,
                partners.join(", ")
            ));
        }
    }
    if !report.reinstated.is_empty() {
        out.push_str(&format!(
            "\nreinstated after sweep: {}\n",
            report.reinstated.join(", ")
        ));
    }
    out.push_str(&format!(
        "\nretained ({}): {}\n",
        report.retained.len(),
        report.retained.join(", ")
    ));
    if !report.constant_factors.is_empty() {
        out.push_str(&format!(
            "constant factors (correlation undefined, kept): {}\n",
            report.constant_factors.join(", ")
        ));
    }
    if !report.whitelist_hits.is_empty() {
        out.push_str(&format!(
            "whitelist hits ({})\n",
            report.whitelist_hits.len()
        ));
        for p in &report.whitelist_hits {
            out.push_str(&format!(
                "  {:<12} {:<12} r = {:+.4} kept by whitelist\n",
                p.a, p.b, p.r
            ));
        }
    }
    push_warnings(&mut out, &report.warnings);
    out
}

pub fn screening_csv(envelope: &ReportEnvelope, report: &ScreeningReport) -> String {
    let mut out = meta_lines(envelope, "screening");
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in screening_rows(report) {
        w.serialize(row).expect("csv row");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("csv buffer")).expect("utf-8"));
    out
}

pub fn parse_screening_csv(text: &str) -> Result<Vec<ScreeningRow>> {
    parse_csv_rows(text)
}

// ---------------------------------------------------------------------------
// trend

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub region_id: String,
    pub status: String,
    pub score_delta: Option<f64>,
    pub rank_delta: Option<i64>,
    /// `from_year->to_year:from_stars->to_stars` entries joined by `;`
    pub star_transitions: String,
}

fn trend_status_str(status: TrendStatus) -> &'static str {
    match status {
        TrendStatus::Throughout => "throughout",
        TrendStatus::Entered => "entered",
        TrendStatus::Exited => "exited",
        TrendStatus::Intermittent => "intermittent",
    }
}

fn trend_rows(report: &TrendReport) -> Vec<TrendRow> {
    report
        .regions
        .iter()
        .map(|r| TrendRow {
            region_id: r.region_id.clone(),
            status: trend_status_str(r.status).to_string(),
            score_delta: r.score_delta.map(round2),
            rank_delta: r.rank_delta,
            star_transitions: r
                .star_transitions
                .iter()
                .map(|t| {
                    format!(
                        "{}->{}:{}->{}",
                        t.from_year, t.to_year, t.from_stars, t.to_stars
                    )
                })
                .collect::<Vec<_>>()
                .join(";"),
        })
        .collect()
}

pub fn trend_text(envelope: &ReportEnvelope, report: &TrendReport) -> String {
    let mut out = meta_lines(envelope, "trend");
    out.push_str(&format!(
        "# years: {}\n\n",
        report
            .years
            .iter()
            .map(i32::to_string)
            .collect::<Vec<_>>()
            .join(", ")
    ));
    out.push_str(&format!(
        "{:<12} {:<12} {:>8} {:>6}  {}\n",
        "region", "status", "dREFD", "drank", "entries (year: REFD rank stars)"
    ));
    for r in &report.regions {
        let entries: Vec<String> = r
            .entries
            .iter()
            .zip(&report.years)
            .map(|(e, y)| match e {
                Some(p) => format!(
                    "{y}: {:.2} #{} {}",
                    p.overall_score,
                    p.rank,
                    stars_display(p.stars)
                ),
                None => format!("{y}: -"),
            })
            .collect();
        out.push_str(&format!(
            "{:<12} {:<12} {:>8} {:>6}  {}\n",
            r.region_id,
            trend_status_str(r.status),
            r.score_delta.map_or("-".into(), |d| format!("{d:+.2}")),
            r.rank_delta.map_or("-".into(), |d| format!("{d:+}")),
            entries.join(" | ")
        ));
        for t in &r.star_transitions {
            out.push_str(&format!(
                "             stars {} -> {} ({} -> {})\n",
                t.from_stars, t.to_stars, t.from_year, t.to_year
            ));
        }
    }
    out
}

pub fn trend_csv(envelope: &ReportEnvelope, report: &TrendReport) -> String {
    let mut out = meta_lines(envelope, "trend");
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in trend_rows(report) {
        w.serialize(row).expect("csv row");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("csv buffer")).expect("utf-8"));
    out
}

pub fn parse_trend_csv(text: &str) -> Result<Vec<TrendRow>> {
    parse_csv_rows(text)
}

// ---------------------------------------------------------------------------
// sensitivity

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub region_id: String,
    pub baseline_rank: usize,
    pub min_rank: usize,
    pub max_rank: usize,
}

pub fn sensitivity_text(envelope: &ReportEnvelope, report: &StabilityReport) -> String {
    let mut out = meta_lines(envelope, "sensitivity");
    out.push_str(&format!(
        "# epsilon: {}  trials: {}  seed: {}\n# spearman vs baseline: mean {:.4}  min {:.4}  max {:.4}\n\n",
        report.epsilon,
        report.trials,
        report.seed,
        report.spearman_mean,
        report.spearman_min,
        report.spearman_max
    ));
    out.push_str(&format!(
        "{:<12} {:>8} {:>8} {:>8}\n",
        "region", "baseline", "min", "max"
    ));
    for r in &report.regions {
        out.push_str(&format!(
            "{:<12} {:>8} {:>8} {:>8}\n",
            r.region_id, r.baseline_rank, r.min_rank, r.max_rank
        ));
    }
    out
}

pub fn sensitivity_csv(envelope: &ReportEnvelope, report: &StabilityReport) -> String {
    let mut out = meta_lines(envelope, "sensitivity");
    out.push_str(&format!(
        "# epsilon: {}\n# trials: {}\n# seed: {}\n# spearman_mean: {}\n",
        report.epsilon, report.trials, report.seed, report.spearman_mean
    ));
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &report.regions {
        w.serialize(SensitivityRow {
            region_id: r.region_id.clone(),
            baseline_rank: r.baseline_rank,
            min_rank: r.min_rank,
            max_rank: r.max_rank,
        })
        .expect("csv row");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("csv buffer")).expect("utf-8"));
    out
}

pub fn parse_sensitivity_csv(text: &str) -> Result<Vec<SensitivityRow>> {
    parse_csv_rows(text)
}

// ---------------------------------------------------------------------------
// histogram

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub factor_id: String,
    pub point: u8,
    pub count: u64,
    pub proportion: f64,
}

fn histogram_rows(report: &HistogramReport) -> Vec<HistogramRow> {
    let mut rows = Vec::new();
    for h in &report.factors {
        let props = h.proportions();
        for (point, (&count, &proportion)) in h.counts.iter().zip(&props).enumerate() {
            rows.push(HistogramRow {
                factor_id: h.factor_id.clone(),
                point: point as u8,
                count,
                proportion: round4(proportion),
            });
        }
    }
    rows
}

pub fn histogram_text(envelope: &ReportEnvelope, report: &HistogramReport) -> String {
    let mut out = meta_lines(envelope, "histogram");
    for h in &report.factors {
        out.push_str(&format!("\nfactor {} (N = {})\n", h.factor_id, h.n));
        let props = h.proportions();
        let max = props.iter().cloned().fold(0.0f64, f64::max);
        for (point, (&count, &p)) in h.counts.iter().zip(&props).enumerate() {
            let bar_len = if max > 0.0 {
                ((p / max) * 40.0).round() as usize
            } else {
                0
            };
            out.push_str(&format!(
                "{:>3} {:>8} {:.4} |{}\n",
                point,
                count,
                p,
                "#".repeat(bar_len)
            ));
        }
    }
    out
}

pub fn histogram_csv(envelope: &ReportEnvelope, report: &HistogramReport) -> String {
    let mut out = meta_lines(envelope, "histogram");
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in histogram_rows(report) {
        w.serialize(row).expect("csv row");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("csv buffer")).expect("utf-8"));
    out
}

pub fn parse_histogram_csv(text: &str) -> Result<Vec<HistogramRow>> {
    parse_csv_rows(text)
}

// ---------------------------------------------------------------------------
// shared

fn push_warnings(out: &mut String, warnings: &[String]) {
    if warnings.is_empty() {
        return;
    }
    out.push_str(&format!("\n# warnings ({})\n", warnings.len()));
    for w in warnings {
        out.push_str(&format!("#   {w}\n"));
    }
}

fn parse_csv_rows<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>> {
    let data: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n");
    let mut reader = csv::Reader::from_reader(data.as_bytes());
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        rows.push(row.context("csv row")?);
    }
    Ok(rows)
}

/// Renders a full envelope in the requested format.
pub fn render(
    envelope: &ReportEnvelope,
    format: Format,
    dataset: Option<&Dataset>,
) -> Result<String> {
    if format == Format::Json {
        return Ok(envelope.to_json() + "\n");
    }
    Ok(match (&envelope.payload, format) {
        (ReportPayload::Rating { table, subscores }, Format::Text) => {
            let dataset = dataset.context("rating text output needs the dataset")?;
            rating_text(envelope, table, subscores, dataset)
        }
        (ReportPayload::Rating { table, .. }, Format::Csv) => {
            let dataset = dataset.context("rating csv output needs the dataset")?;
            rating_csv(envelope, table, dataset)
        }
        (
            ReportPayload::Screening {
                threshold, report, ..
            },
            Format::Text,
        ) => screening_text(envelope, *threshold, report),
        (ReportPayload::Screening { report, .. }, Format::Csv) => screening_csv(envelope, report),
        (ReportPayload::Trend { report }, Format::Text) => trend_text(envelope, report),
        (ReportPayload::Trend { report }, Format::Csv) => trend_csv(envelope, report),
        (ReportPayload::Sensitivity { report }, Format::Text) => sensitivity_text(envelope, report),
        (ReportPayload::Sensitivity { report }, Format::Csv) => sensitivity_csv(envelope, report),
        (ReportPayload::Histogram { report }, Format::Text) => histogram_text(envelope, report),
        (ReportPayload::Histogram { report }, Format::Csv) => histogram_csv(envelope, report),
        (_, Format::Json) => unreachable!("handled above"),
    })
}
