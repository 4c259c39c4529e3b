use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::reference;
use super::{ClassifierKind, EvalReport, SplitMode, SweepReport};

/// One averaged accuracy cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub classifier: ClassifierKind,
    pub mode: SplitMode,
    pub augmented: bool,
    pub accuracy: f64,
}

impl From<&EvalReport> for ReportRow {
    fn from(r: &EvalReport) -> Self {
        Self {
            classifier: r.classifier,
            mode: r.mode,
            augmented: r.augmented,
            accuracy: r.mean_accuracy,
        }
    }
}

/// Accuracy gain from augmentation for one classifier and protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationDelta {
    pub classifier: ClassifierKind,
    pub mode: SplitMode,
    pub with: f64,
    pub without: f64,
    /// `with - without`, rounded to 2 decimals.
    pub delta: f64,
    /// Gain stated in the published prose when the inputs are its table values.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub printed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn same_2dp(a: f64, b: f64) -> bool {
    (round2(a) - round2(b)).abs() < 1e-9
}

/// Deltas for every (classifier, protocol) that has both an augmented and
/// a non-augmented row. The first matching row of each kind is used.
pub fn augmentation_deltas(rows: &[ReportRow]) -> Vec<AugmentationDelta> {
    let keys: BTreeSet<(ClassifierKind, SplitMode)> = rows.iter().map(|r| (r.classifier, r.mode)).collect();
    let mut out = Vec::new();
    for (classifier, mode) in keys {
        let find = |aug: bool| {
            rows.iter()
                .find(|r| r.classifier == classifier && r.mode == mode && r.augmented == aug)
                .map(|r| r.accuracy)
        };
        let (Some(with), Some(without)) = (find(true), find(false)) else {
            continue;
        };
        let delta = round2(with - without);
        let matches_table = |aug: bool, value: f64| {
            reference::published(classifier, mode, aug).is_some_and(|p| same_2dp(p, value))
        };
        let printed = if matches_table(true, with) && matches_table(false, without) {
            reference::printed_delta(classifier)
        } else {
            None
        };
        let note = printed.filter(|p| !same_2dp(*p, delta)).map(|p| {
            format!(
                "published text states {p:.2}, but its table values {with:.2} - {without:.2} give {delta:.2}"
            )
        });
        out.push(AugmentationDelta {
            classifier,
            mode,
            with,
            without,
            delta,
            printed,
            note,
        });
    }
    out
}

/// Machine-readable and plain-text renderings of a set of results.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub json: String,
    pub text: String,
    pub deltas: Vec<AugmentationDelta>,
}

fn mode_label(mode: SplitMode) -> &'static str {
    match mode {
        SplitMode::SpeakerIndependent => "Speaker Independent",
        SplitMode::SpeakerDependent => "Speaker Dependent",
    }
}

/// Average accuracy table with one column per classifier and one row per
/// protocol and augmentation setting, followed by augmentation deltas.
pub fn emit_report(rows: &[ReportRow]) -> ReportBundle {
    let deltas = augmentation_deltas(rows);
    let json = serde_json::to_string_pretty(&serde_json::json!({
        "rows": rows,
        "deltas": deltas,
    }))
    .expect("report serializes");

    let classifiers: BTreeSet<ClassifierKind> = rows.iter().map(|r| r.classifier).collect();
    let lines: BTreeSet<(SplitMode, bool)> = rows.iter().map(|r| (r.mode, !r.augmented)).collect();
    let mut text = String::from("AVERAGE ACCURACY LEVELS\n");
    let _ = write!(text, "{:<42}", "");
    for c in &classifiers {
        let _ = write!(text, "{:>10}", c.to_string());
    }
    text.push('\n');
    let mut last_mode = None;
    for &(mode, not_aug) in &lines {
        let augmented = !not_aug;
        let both = lines.contains(&(mode, true)) && lines.contains(&(mode, false));
        let head = if last_mode == Some(mode) { "" } else { mode_label(mode) };
        let sub = match (both, augmented) {
            (false, _) => "",
            (true, true) => "With Augmentation",
            (true, false) => "Without Augmentation",
        };
        let _ = write!(text, "{head:<20}  {sub:<20}");
        for c in &classifiers {
            let cell = rows
                .iter()
                .find(|r| r.classifier == *c && r.mode == mode && r.augmented == augmented);
            match cell {
                Some(r) => {
                    let _ = write!(text, "{:>8.2} %", r.accuracy);
                }
                None => {
                    let _ = write!(text, "{:>10}", "-");
                }
            }
        }
        text.push('\n');
        last_mode = Some(mode);
    }
    for d in &deltas {
        let _ = write!(
            text,
            "\n{} {}: augmentation changes accuracy by {:+.2} ({:.2} -> {:.2})",
            d.classifier, d.mode, d.delta, d.without, d.with
        );
        if let Some(note) = &d.note {
            let _ = write!(text, "\n  note: {note}");
        }
    }
    if !deltas.is_empty() {
        text.push('\n');
    }
    ReportBundle { json, text, deltas }
}

/// Plain-text utterance sweep table with the monotonicity summary.
pub fn format_sweep(report: &SweepReport) -> String {
    let mut text = format!(
        "UTTERANCE PER WORD VERSUS ACCURACY ({}, {})\n{:>6}{:>6}{:>7}{:>12}\n",
        report.classifier, report.mode, "Total", "Test", "Train", "Accuracy"
    );
    for row in &report.rows {
        let flag = if row.consistent { "" } else { " *" };
        let _ = writeln!(
            text,
            "{:>6}{:>6}{:>7}{:>10.2} %{flag}",
            row.total, row.test, row.train, row.accuracy
        );
    }
    if report.rows.iter().any(|r| !r.consistent) {
        text.push_str("* total differs from test + train\n");
    }
    let _ = writeln!(
        text,
        "accuracy did not decrease in {} of {} consecutive steps",
        report.non_decreasing_steps, report.steps
    );
    text
}
