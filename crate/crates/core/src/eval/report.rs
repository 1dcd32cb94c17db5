use serde::{Deserialize, Serialize};

use super::metrics::{ClassScores, PrfReport, Scores};

/// Cross-validation outcome: pooled scores of every run, the weighted
/// scores of every fold of every run, and mean ± sample standard deviation
/// over runs (the deviation is 0 for a single run).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classes: Vec<String>,
    pub runs: Vec<PrfReport>,
    /// `[run][fold]`
    pub fold_scores: Vec<Vec<Scores>>,
    pub mean: Scores,
    pub std: Scores,
    /// Per-class scores averaged over runs.
    pub per_class_mean: Vec<ClassScores>,
}

/// Identical values short-circuit so rounding cannot leak into the deviation.
fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.iter().all(|&v| v == values[0]) {
        return (values[0], 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl EvalReport {
    pub fn from_runs(classes: Vec<String>, runs: Vec<PrfReport>, fold_scores: Vec<Vec<Scores>>) -> Self {
        let pick = |f: fn(&Scores) -> f64| mean_std(&runs.iter().map(|r| f(&r.weighted)).collect::<Vec<_>>());
        let (p, sp) = pick(|s| s.precision);
        let (r, sr) = pick(|s| s.recall);
        let (f, sf) = pick(|s| s.f1);
        let per_class_mean = (0..classes.len())
            .map(|c| {
                let avg = |g: fn(&ClassScores) -> f64| {
                    mean_std(&runs.iter().map(|r| g(&r.per_class[c])).collect::<Vec<_>>()).0
                };
                ClassScores {
                    class: classes[c].clone(),
                    precision: avg(|s| s.precision),
                    recall: avg(|s| s.recall),
                    f1: avg(|s| s.f1),
                    support: runs.first().map_or(0, |r| r.per_class[c].support),
                }
            })
            .collect();
        Self {
            classes,
            runs,
            fold_scores,
            mean: Scores {
                precision: p,
                recall: r,
                f1: f,
            },
            std: Scores {
                precision: sp,
                recall: sr,
                f1: sf,
            },
            per_class_mean,
        }
    }

    /// Weighted F1 of every (run, fold), run-major.
    pub fn fold_f1(&self) -> Vec<f64> {
        self.fold_scores.iter().flatten().map(|s| s.f1).collect()
    }

    pub fn run_f1(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.weighted.f1).collect()
    }
}

pub struct TableRow<'a> {
    pub model: String,
    pub report: &'a EvalReport,
    /// Appended to the F1 cell, e.g. `**`.
    pub stars: String,
}

fn cell(mean: f64, std: f64) -> String {
    format!("{:.2} ± {:.2}", mean * 100.0, std * 100.0)
}

/// Models as rows, weighted precision/recall/F1 (percent, mean ± std) as
/// columns.
pub fn render_table(title: &str, rows: &[TableRow]) -> String {
    let header = ["Model", "Precision", "Recall", "F1"];
    let body: Vec<[String; 4]> = rows
        .iter()
        .map(|r| {
            [
                r.model.clone(),
                cell(r.report.mean.precision, r.report.std.precision),
                cell(r.report.mean.recall, r.report.std.recall),
                cell(r.report.mean.f1, r.report.std.f1) + &r.stars,
            ]
        })
        .collect();
    let mut widths = header.map(|h| h.chars().count());
    for row in &body {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = format!("{title}\n");
    out += &line(&header.map(String::from));
    out.push('\n');
    out += &"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1));
    out.push('\n');
    for row in &body {
        out += &line(row);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_std() {
        assert_eq!(mean_std(&[0.5]), (0.5, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn table_layout() {
        let report = EvalReport {
            classes: vec![],
            runs: vec![],
            fold_scores: vec![],
            mean: Scores {
                precision: 0.7,
                recall: 0.69,
                f1: 0.6963,
            },
            std: Scores {
                precision: 0.01,
                recall: 0.0,
                f1: 0.0047,
            },
            per_class_mean: vec![],
        };
        let t = render_table(
            "Function",
            &[TableRow {
                model: "mtl".into(),
                report: &report,
                stars: "**".into(),
            }],
        );
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "Function");
        assert!(lines[1].starts_with("Model"));
        assert!(lines[3].contains("69.63 ± 0.47**"));
        assert!(lines[3].contains("70.00 ± 1.00"));
    }
}
