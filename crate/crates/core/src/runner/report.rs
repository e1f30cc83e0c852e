use std::fmt::Write;
use std::path::Path;

use super::artifacts::{io_err, write_text};
use super::plot::verdict_svg;
use super::{RunError, Verdict, EXIT_FAIL, EXIT_PASS};

/// One result set in the consolidated report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub name: String,
    /// `Err` carries the reason the set could not be read.
    pub verdict: Result<Verdict, String>,
}

impl ReportRow {
    pub fn pass(&self) -> bool {
        matches!(&self.verdict, Ok(v) if v.pass)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOutcome {
    pub rows: Vec<ReportRow>,
    pub markdown: String,
}

impl ReportOutcome {
    pub fn all_pass(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(ReportRow::pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }
}

fn read_verdict(dir: &Path) -> Result<Verdict, String> {
    let path = dir.join("verdict.json");
    let text = std::fs::read_to_string(&path).map_err(|e| format!("verdict.json: {e}"))?;
    serde_json::from_str(&text).map_err(|e| format!("verdict.json: {e}"))
}

fn num(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

/// Collects `dir` itself (when it holds a `verdict.json`) and every
/// subdirectory in name order, then writes `report.md` and `report.svg`.
/// Unreadable sets become error rows.
pub fn report(dir: &Path) -> Result<ReportOutcome, RunError> {
    let mut rows = Vec::new();
    if dir.join("verdict.json").exists() {
        rows.push(ReportRow {
            name: ".".into(),
            verdict: read_verdict(dir),
        });
    }
    let mut subdirs: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| io_err(dir, e))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    subdirs.sort();
    for name in subdirs {
        let verdict = read_verdict(&dir.join(&name));
        rows.push(ReportRow { name, verdict });
    }
    if rows.is_empty() {
        return Err(RunError::Config(format!("{} contains no result sets", dir.display())));
    }

    let mut md = String::from("# traplab report\n\n");
    md.push_str("| set | experiment | measured | predicted | accepted | verdict |\n");
    md.push_str("|---|---|---|---|---|---|\n");
    let mut plot_rows = Vec::new();
    for row in &rows {
        match &row.verdict {
            Ok(v) => {
                let accepted = match (v.lower, v.upper) {
                    (Some(lo), Some(hi)) => format!("[{lo:.4}, {hi:.4}]"),
                    (Some(lo), None) => format!(">= {lo:.4}"),
                    (None, Some(hi)) => format!("<= {hi:.4}"),
                    (None, None) => "-".into(),
                };
                let _ = writeln!(
                    md,
                    "| {} | {} | {} | {} | {} | {} |",
                    row.name,
                    v.experiment,
                    num(v.measured),
                    v.predicted.as_deref().unwrap_or("-"),
                    accepted,
                    if v.pass { "PASS" } else { "FAIL" }
                );
                let band = match (v.lower, v.upper) {
                    (Some(lo), Some(hi)) => Some((lo, hi)),
                    _ => None,
                };
                plot_rows.push((row.name.clone(), v.measured, band, v.pass));
            }
            Err(e) => {
                let _ = writeln!(md, "| {} | - | - | - | - | ERROR: {} |", row.name, e.replace('|', "/"));
                plot_rows.push((row.name.clone(), None, None, false));
            }
        }
    }
    let passed = rows.iter().filter(|r| r.pass()).count();
    let _ = writeln!(md, "\n{passed} of {} result sets pass.", rows.len());
    write_text(&dir.join("report.md"), &md)?;
    write_text(&dir.join("report.svg"), &verdict_svg("measured value against accepted interval", &plot_rows))?;
    Ok(ReportOutcome { rows, markdown: md })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::write_json;

    fn set(root: &Path, name: &str, pass: bool) {
        let d = root.join(name);
        std::fs::create_dir_all(&d).unwrap();
        let mut v = Verdict::new("resolvent_sweep", pass);
        v.measured = Some(1.31);
        v.predicted = Some("4/3".into());
        v.lower = Some(4.0 / 3.0 - 0.1);
        v.upper = Some(4.0 / 3.0 + 0.1);
        write_json(&d.join("verdict.json"), &v).unwrap();
    }

    #[test]
    fn single_passing_set() {
        let dir = tempfile::tempdir().unwrap();
        set(dir.path(), "quartic", true);
        let out = report(dir.path()).unwrap();
        assert_eq!(out.rows.len(), 1);
        assert!(out.markdown.contains("| quartic | resolvent_sweep | 1.3100 | 4/3 | [1.2333, 1.4333] | PASS |"));
        assert_eq!(out.exit_code(), EXIT_PASS);
    }

    #[test]
    fn mixed_and_corrupt_sets() {
        let dir = tempfile::tempdir().unwrap();
        set(dir.path(), "a", true);
        set(dir.path(), "b", false);
        std::fs::create_dir_all(dir.path().join("c")).unwrap();
        std::fs::write(dir.path().join("c/verdict.json"), "{not json").unwrap();
        let out = report(dir.path()).unwrap();
        assert_eq!(out.rows.len(), 3);
        assert!(out.rows[2].verdict.is_err());
        assert_eq!(out.exit_code(), EXIT_FAIL);
        let first = std::fs::read(dir.path().join("report.md")).unwrap();
        report(dir.path()).unwrap();
        assert_eq!(first, std::fs::read(dir.path().join("report.md")).unwrap());
    }

    #[test]
    fn empty_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(report(dir.path()).is_err());
    }
}
