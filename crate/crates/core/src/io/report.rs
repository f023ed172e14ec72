//! Report assembly and rendering.
//!
//! Every command produces a [`ReportDocument`]: a provenance block (what ran,
//! on which inputs, with which settings) plus one payload — a strategy
//! comparison, a set of curves, or greedy-selection traces. Documents render
//! to three formats:
//!
//! * `Table` — fixed-width text for terminals, provenance as `#` comments;
//! * `Csv` — machine-readable data rows only (callers emit provenance
//!   separately, e.g. to stderr, so the CSV stays parseable);
//! * `Json` — the full document, pretty-printed; parsing and re-emitting a
//!   document yields byte-identical output, so reports can be diffed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analysis::CurveSeries;
use crate::evaluation::{EvaluationReport, ResolvedSampling};

/// What produced a report and from which inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub toolkit_version: String,
    /// The command line (or library call description) that produced this.
    pub command: String,
    pub manifest_path: Option<String>,
    pub manifest_sha256: Option<String>,
    pub matrix_sha256: Option<String>,
    /// Effective settings worth reproducing the run from, keyed by flag name.
    pub flags: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new(command: impl Into<String>) -> Self {
        Provenance {
            toolkit_version: crate::TOOLKIT_VERSION.to_string(),
            command: command.into(),
            manifest_path: None,
            manifest_sha256: None,
            matrix_sha256: None,
            flags: BTreeMap::new(),
        }
    }

    /// The provenance as `# `-prefixed comment lines, one per fact.
    pub fn comment_lines(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# toolkit version: {}\n", self.toolkit_version));
        out.push_str(&format!("# command: {}\n", self.command));
        if let Some(path) = &self.manifest_path {
            out.push_str(&format!("# manifest: {path}\n"));
        }
        if let Some(hash) = &self.manifest_sha256 {
            out.push_str(&format!("# manifest sha256: {hash}\n"));
        }
        if let Some(hash) = &self.matrix_sha256 {
            out.push_str(&format!("# matrix sha256: {hash}\n"));
        }
        for (key, value) in &self.flags {
            out.push_str(&format!("# {key}: {value}\n"));
        }
        out
    }
}

/// Template-growth or rolling-update curves, usually one series per person.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub series: Vec<CurveSeries>,
    /// Cross-series average at each shared index, when computed.
    pub average: Option<CurveSeries>,
}

/// Greedy image selection for one person, in pick order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonTrace {
    pub person_id: String,
    /// Source names of the picked images, best first.
    pub selected: Vec<String>,
    /// Mean test distance after each pick; same length as `selected`.
    pub distances: Vec<f64>,
    /// True when adding any further image would not have helped.
    pub stopped_early: bool,
}

/// Greedy selection over a whole dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyReport {
    pub per_person: Vec<PersonTrace>,
    /// Mean distance across persons after each pick; persons that stopped
    /// early carry their last distance forward.
    pub average_after_step: Vec<f64>,
}

/// The data part of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportPayload {
    Evaluation(EvaluationReport),
    Curves(CurveReport),
    Greedy(GreedyReport),
}

/// A complete report: provenance plus payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub provenance: Provenance,
    pub payload: ReportPayload,
}

/// Output encodings for [`ReportDocument::render`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Table,
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "table" | "text" => Ok(ReportFormat::Table),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("expected table, csv, or json; got '{other}'")),
        }
    }
}

/// Renders a distance with its improvement factor over the baseline, e.g.
/// `0.410 (1.8x)`. A missing factor (zero denominator) renders as `(n/a)`.
pub fn format_distance_cell(distance: f64, factor: Option<f64>) -> String {
    match factor {
        Some(f) => format!("{distance:.3} ({f:.1}x)"),
        None => format!("{distance:.3} (n/a)"),
    }
}

impl ReportDocument {
    /// Renders the document. `Csv` output contains data rows only; print
    /// [`Provenance::comment_lines`] elsewhere if an audit trail is needed.
    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => {
                let mut text = serde_json::to_string_pretty(self)
                    .expect("report serialization cannot fail");
                text.push('\n');
                text
            }
            ReportFormat::Table => {
                let mut out = self.provenance.comment_lines();
                match &self.payload {
                    ReportPayload::Evaluation(report) => {
                        evaluation_comment_lines(report, &mut out);
                        out.push('\n');
                        render_evaluation_table(report, &mut out);
                    }
                    ReportPayload::Curves(report) => {
                        out.push('\n');
                        render_curves_table(report, &mut out);
                    }
                    ReportPayload::Greedy(report) => {
                        out.push('\n');
                        render_greedy_table(report, &mut out);
                    }
                }
                out
            }
            ReportFormat::Csv => match &self.payload {
                ReportPayload::Evaluation(report) => render_evaluation_csv(report),
                ReportPayload::Curves(report) => render_curves_csv(report),
                ReportPayload::Greedy(report) => render_greedy_csv(report),
            },
        }
    }
}

fn evaluation_comment_lines(report: &EvaluationReport, out: &mut String) {
    let meta = &report.metadata;
    out.push_str(&format!(
        "# dataset: {} (dim {})\n",
        meta.dataset_name, meta.dim
    ));
    out.push_str(&format!(
        "# persons evaluated: {}, skipped: {}\n",
        meta.persons_evaluated,
        meta.persons_skipped.len()
    ));
    for skipped in &meta.persons_skipped {
        out.push_str(&format!("# skipped {}: {}\n", skipped.person_id, skipped.reason));
    }
    out.push_str(&format!(
        "# template images per person: {} (baseline index {})\n",
        meta.split.n_template, meta.split.baseline_index
    ));
    if let Some(filter) = &meta.split.template_tag_filter {
        let tags: Vec<&str> = filter.iter().map(String::as_str).collect();
        out.push_str(&format!("# template tag filter: {}\n", tags.join(", ")));
    }
    let sampling = match &meta.sampling {
        ResolvedSampling::Full => "full cross-comparison".to_string(),
        ResolvedSampling::SampledPerPerson {
            probes_per_person,
            seed,
        } => format!("{probes_per_person} probes per person, sub-seeded from {seed}"),
    };
    out.push_str(&format!("# non-match sampling: {sampling}\n"));
    out.push_str(&format!("# averaging: {}\n", meta.averaging));
}

fn render_evaluation_table(report: &EvaluationReport, out: &mut String) {
    let mut any_oracle = false;
    let labels: Vec<String> = report
        .rows
        .iter()
        .map(|row| {
            if row.oracle {
                any_oracle = true;
                format!("{} *", row.strategy)
            } else {
                row.strategy.to_string()
            }
        })
        .collect();
    let match_cells: Vec<String> = report
        .rows
        .iter()
        .map(|row| format_distance_cell(row.match_distance, row.match_factor))
        .collect();
    let nonmatch_cells: Vec<String> = report
        .rows
        .iter()
        .map(|row| format_distance_cell(row.nonmatch_distance, row.nonmatch_factor))
        .collect();

    let label_width = labels
        .iter()
        .map(String::len)
        .chain(["Strategy".len()])
        .max()
        .unwrap_or(0)
        + 2;
    let match_width = match_cells
        .iter()
        .map(String::len)
        .chain(["Match".len()])
        .max()
        .unwrap_or(0)
        + 2;

    out.push_str(&format!(
        "{:<label_width$}{:<match_width$}{}\n",
        "Strategy", "Match", "Non-match"
    ));
    for ((label, m), n) in labels.iter().zip(&match_cells).zip(&nonmatch_cells) {
        out.push_str(&format!("{label:<label_width$}{m:<match_width$}{n}\n"));
    }
    if any_oracle {
        out.push_str("\n* needs the probe side, so it bounds what enrollment-time aggregation can reach\n");
    }
}

fn render_evaluation_csv(report: &EvaluationReport) -> String {
    csv_into_string(|writer| {
        writer.write_record([
            "strategy",
            "oracle",
            "match_distance",
            "match_factor",
            "nonmatch_distance",
            "nonmatch_factor",
        ])?;
        for row in &report.rows {
            writer.write_record([
                row.strategy.to_string(),
                row.oracle.to_string(),
                row.match_distance.to_string(),
                row.match_factor.map(|f| f.to_string()).unwrap_or_default(),
                row.nonmatch_distance.to_string(),
                row.nonmatch_factor
                    .map(|f| f.to_string())
                    .unwrap_or_default(),
            ])?;
        }
        Ok(())
    })
}

fn render_one_series_table(series: &CurveSeries, out: &mut String) {
    out.push_str(&format!(
        "Series: {} ({} points)\n",
        series.label,
        series.points.len()
    ));
    out.push_str(&format!("{:>9}{:>14}{:>14}\n", "index", "value", "delta"));
    let mut previous = None;
    for point in &series.points {
        let delta = match previous {
            Some(prev) => format!("{:.6}", point.value - prev),
            None => "-".to_string(),
        };
        out.push_str(&format!(
            "{:>9}{:>14.6}{delta:>14}\n",
            point.index, point.value
        ));
        previous = Some(point.value);
    }
}

fn render_curves_table(report: &CurveReport, out: &mut String) {
    let mut first = true;
    for series in report.series.iter().chain(&report.average) {
        if !first {
            out.push('\n');
        }
        first = false;
        render_one_series_table(series, out);
    }
}

fn render_curves_csv(report: &CurveReport) -> String {
    csv_into_string(|writer| {
        writer.write_record(["series", "index", "value", "delta"])?;
        for series in report.series.iter().chain(&report.average) {
            let mut previous = None;
            for point in &series.points {
                let delta = previous
                    .map(|prev: f64| (point.value - prev).to_string())
                    .unwrap_or_default();
                writer.write_record([
                    series.label.clone(),
                    point.index.to_string(),
                    point.value.to_string(),
                    delta,
                ])?;
                previous = Some(point.value);
            }
        }
        Ok(())
    })
}

fn render_greedy_table(report: &GreedyReport, out: &mut String) {
    let label_width = "After n-th best image".len() + 2;
    out.push_str(&format!("{:<label_width$}", "After n-th best image"));
    for step in 1..=report.average_after_step.len() {
        out.push_str(&format!("{step:>9}"));
    }
    out.push('\n');
    out.push_str(&format!("{:<label_width$}", "Avg. distance"));
    for value in &report.average_after_step {
        out.push_str(&format!("{value:>9.3}"));
    }
    out.push('\n');
    let early = report
        .per_person
        .iter()
        .filter(|trace| trace.stopped_early)
        .count();
    out.push_str(&format!(
        "\npersons: {} (stopped early: {early})\n",
        report.per_person.len()
    ));
}

/// Greedy CSV rows are `person_id,step,selected,distance`; the cross-person
/// average appears as trailing rows with an empty `person_id`.
fn render_greedy_csv(report: &GreedyReport) -> String {
    csv_into_string(|writer| {
        writer.write_record(["person_id", "step", "selected", "distance"])?;
        for trace in &report.per_person {
            for (i, (name, distance)) in
                trace.selected.iter().zip(&trace.distances).enumerate()
            {
                writer.write_record([
                    trace.person_id.clone(),
                    (i + 1).to_string(),
                    name.clone(),
                    distance.to_string(),
                ])?;
            }
        }
        for (i, value) in report.average_after_step.iter().enumerate() {
            writer.write_record([
                String::new(),
                (i + 1).to_string(),
                String::new(),
                value.to_string(),
            ])?;
        }
        Ok(())
    })
}

fn csv_into_string(
    build: impl FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()>,
) -> String {
    let mut buffer = Vec::new();
    {
        let mut writer = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(&mut buffer);
        build(&mut writer).expect("csv rendering cannot fail");
        writer.flush().expect("flush to memory cannot fail");
    }
    String::from_utf8(buffer).expect("csv output is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::AggregationStrategy;
    use crate::analysis::CurvePoint;
    use crate::evaluation::{ReportMetadata, SplitSpec, StrategyRow};

    fn sample_evaluation() -> EvaluationReport {
        EvaluationReport {
            metadata: ReportMetadata {
                dataset_name: "sample".into(),
                dim: 4,
                persons_evaluated: 2,
                persons_skipped: vec![],
                split: SplitSpec::default(),
                sampling: ResolvedSampling::Full,
                averaging: "per-person mean distance, then mean across persons".into(),
            },
            rows: vec![
                StrategyRow {
                    strategy: AggregationStrategy::Baseline,
                    oracle: false,
                    match_distance: 0.748,
                    nonmatch_distance: 1.958,
                    match_factor: Some(1.0),
                    nonmatch_factor: Some(1.0),
                },
                StrategyRow {
                    strategy: AggregationStrategy::Mean,
                    oracle: false,
                    match_distance: 0.4098,
                    nonmatch_distance: 1.622,
                    match_factor: Some(0.748 / 0.4098),
                    nonmatch_factor: Some(1.958 / 1.622),
                },
                StrategyRow {
                    strategy: AggregationStrategy::Optimal,
                    oracle: true,
                    match_distance: 0.354,
                    nonmatch_distance: 1.604,
                    match_factor: Some(0.748 / 0.354),
                    nonmatch_factor: Some(1.958 / 1.604),
                },
            ],
        }
    }

    fn sample_document() -> ReportDocument {
        let mut provenance = Provenance::new("faceagg evaluate --manifest m.json");
        provenance.manifest_path = Some("m.json".into());
        provenance.manifest_sha256 = Some("aa".repeat(32));
        provenance.matrix_sha256 = Some("bb".repeat(32));
        provenance.flags.insert("seed".into(), "42".into());
        ReportDocument {
            provenance,
            payload: ReportPayload::Evaluation(sample_evaluation()),
        }
    }

    #[test]
    fn test_distance_cell_rendering() {
        assert_eq!(format_distance_cell(0.4098, Some(1.8243)), "0.410 (1.8x)");
        assert_eq!(format_distance_cell(0.748, Some(1.0)), "0.748 (1.0x)");
        assert_eq!(format_distance_cell(0.0, None), "0.000 (n/a)");
        // Rounds, never truncates.
        assert_eq!(format_distance_cell(0.9996, Some(1.96)), "1.000 (2.0x)");
    }

    #[test]
    fn test_evaluation_table_layout() {
        let text = sample_document().render(ReportFormat::Table);
        assert!(text.starts_with("# toolkit version:"));
        assert!(text.contains("# command: faceagg evaluate --manifest m.json"));
        assert!(text.contains("# non-match sampling: full cross-comparison"));
        assert!(text.contains("# seed: 42"));

        let lines: Vec<&str> = text.lines().collect();
        let header = lines
            .iter()
            .position(|l| l.starts_with("Strategy"))
            .expect("table header present");
        assert!(lines[header].contains("Match"));
        assert!(lines[header].contains("Non-match"));
        assert!(lines[header + 1].starts_with("Baseline"));
        assert!(lines[header + 1].contains("0.748 (1.0x)"));
        assert!(lines[header + 2].contains("0.410 (1.8x)"));
        assert!(lines[header + 2].contains("1.622 (1.2x)"));
        // Oracle row is marked and explained.
        assert!(lines[header + 3].starts_with("Optimal *"));
        assert!(text.contains("\n* "));
        // Columns line up: "Match" and its cells start at the same offset.
        let match_col = lines[header].find("Match").unwrap();
        assert_eq!(lines[header + 1].find("0.748").unwrap(), match_col);
        assert_eq!(lines[header + 2].find("0.410").unwrap(), match_col);
    }

    #[test]
    fn test_evaluation_csv_has_no_comment_rows() {
        let text = sample_document().render(ReportFormat::Csv);
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "strategy,oracle,match_distance,match_factor,nonmatch_distance,nonmatch_factor"
        );
        let baseline = lines.next().unwrap();
        assert_eq!(baseline, "Baseline,false,0.748,1,1.958,1");
        assert!(text.lines().all(|l| !l.starts_with('#')));
        // Full-precision values survive a parse back.
        let mean_line = text.lines().nth(2).unwrap();
        let cell = mean_line.split(',').nth(2).unwrap();
        assert_eq!(cell.parse::<f64>().unwrap(), 0.4098);
    }

    #[test]
    fn test_json_round_trip_is_byte_identical() {
        let first = sample_document().render(ReportFormat::Json);
        let parsed: ReportDocument = serde_json::from_str(&first).unwrap();
        assert_eq!(parsed, sample_document());
        let second = parsed.render(ReportFormat::Json);
        assert_eq!(first.into_bytes(), second.into_bytes());
    }

    #[test]
    fn test_curve_rendering_with_deltas() {
        let report = CurveReport {
            series: vec![CurveSeries {
                label: "p0".into(),
                points: vec![
                    CurvePoint { index: 1, value: 2.0 },
                    CurvePoint { index: 2, value: 1.5 },
                    CurvePoint { index: 3, value: 1.25 },
                ],
            }],
            average: None,
        };
        let doc = ReportDocument {
            provenance: Provenance::new("faceagg plateau"),
            payload: ReportPayload::Curves(report),
        };

        let table = doc.render(ReportFormat::Table);
        assert!(table.contains("Series: p0 (3 points)"));
        assert!(table.contains("-0.500000"));

        let csv_text = doc.render(ReportFormat::Csv);
        let lines: Vec<&str> = csv_text.lines().collect();
        assert_eq!(lines[0], "series,index,value,delta");
        assert_eq!(lines[1], "p0,1,2,");
        assert_eq!(lines[2], "p0,2,1.5,-0.5");
        assert_eq!(lines[3], "p0,3,1.25,-0.25");
    }

    #[test]
    fn test_greedy_rendering() {
        let report = GreedyReport {
            per_person: vec![
                PersonTrace {
                    person_id: "a".into(),
                    selected: vec!["a_2".into(), "a_0".into()],
                    distances: vec![0.5, 0.4],
                    stopped_early: false,
                },
                PersonTrace {
                    person_id: "b".into(),
                    selected: vec!["b_1".into()],
                    distances: vec![0.6],
                    stopped_early: true,
                },
            ],
            average_after_step: vec![0.55, 0.5],
        };
        let doc = ReportDocument {
            provenance: Provenance::new("faceagg greedy"),
            payload: ReportPayload::Greedy(report),
        };

        let table = doc.render(ReportFormat::Table);
        assert!(table.contains("After n-th best image"));
        assert!(table.contains("Avg. distance"));
        assert!(table.contains("0.550"));
        assert!(table.contains("persons: 2 (stopped early: 1)"));

        let csv_text = doc.render(ReportFormat::Csv);
        let lines: Vec<&str> = csv_text.lines().collect();
        assert_eq!(lines[0], "person_id,step,selected,distance");
        assert_eq!(lines[1], "a,1,a_2,0.5");
        assert_eq!(lines[3], "b,1,b_1,0.6");
        // Average rows carry an empty person id.
        assert_eq!(lines[4], ",1,,0.55");
        assert_eq!(lines[5], ",2,,0.5");
    }

    #[test]
    fn test_format_parsing() {
        assert_eq!("table".parse::<ReportFormat>().unwrap(), ReportFormat::Table);
        assert_eq!("CSV".parse::<ReportFormat>().unwrap(), ReportFormat::Csv);
        assert_eq!("json".parse::<ReportFormat>().unwrap(), ReportFormat::Json);
        assert!("yaml".parse::<ReportFormat>().is_err());
    }
}
