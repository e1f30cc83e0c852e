use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::RunError;

/// The frozen artifact schema shipped with the crate.
pub const SCHEMA: &str = include_str!("../../schema/traplab-schema-v1.json");
pub const SCHEMA_VERSION: u32 = 1;

pub const SAMPLES_CSV: [&str; 10] = ["family", "m", "k", "h", "z", "n", "dx", "cap", "norm", "converged"];
pub const SURGERY_CSV: [&str; 9] = ["h", "m", "epsilon0", "c_prime", "N", "cutoff_scale", "threshold", "sup_diff", "pass"];
pub const FEASIBILITY_CSV: [&str; 5] = ["n", "gap", "drop", "required_drop", "margin"];
pub const SMOOTHING_CSV: [&str; 4] = ["k", "Q", "T", "drift"];
pub const DYNAMICS_CSV: [&str; 7] = ["x0", "xi0", "escaped", "t_escape", "drift", "reversal_error", "lower_bound"];
pub const TRAJECTORY_CSV: [&str; 4] = ["t", "x", "xi", "energy"];

pub(crate) fn io_err(path: &Path, e: impl std::fmt::Display) -> RunError {
    RunError::Io(format!("{}: {e}", path.display()))
}

/// Writes one CSV artifact with the given header and rows.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    let f = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_err(path, e))?;
    w.write_all(b"\n").map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), RunError> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::dyadic_prediction;
    use crate::potential::{make_family, FamilyDocument, FamilyVariant};
    use crate::resolvent::fit_points;
    use crate::runner::Verdict;

    fn schema() -> serde_json::Value {
        serde_json::from_str(SCHEMA).unwrap()
    }

    fn columns(section: &str, name: &str) -> Vec<String> {
        schema()[section][name]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap().to_string())
            .collect()
    }

    fn keys<T: Serialize>(v: &T) -> Vec<String> {
        serde_json::to_value(v).unwrap().as_object().unwrap().keys().cloned().collect()
    }

    #[test]
    fn csv_headers_match_schema() {
        assert_eq!(schema()["version"], SCHEMA_VERSION);
        for (name, header) in [
            ("samples.csv", &SAMPLES_CSV[..]),
            ("surgery.csv", &SURGERY_CSV[..]),
            ("feasibility.csv", &FEASIBILITY_CSV[..]),
            ("smoothing.csv", &SMOOTHING_CSV[..]),
            ("dynamics.csv", &DYNAMICS_CSV[..]),
            ("trajectory.csv", &TRAJECTORY_CSV[..]),
        ] {
            assert_eq!(columns("csv", name), header, "{name}");
        }
    }

    #[test]
    fn json_fields_match_schema() {
        let sorted = |mut v: Vec<String>| {
            v.sort();
            v
        };
        let pred = dyadic_prediction(3, 0.05).unwrap();
        assert_eq!(sorted(keys(&pred)), sorted(columns("json", "prediction.json")));
        let pts: Vec<(f64, f64)> = (1..=5).map(|i| (0.5f64.powi(i), 2f64.powi(i))).collect();
        let fit = fit_points(&pts, false).unwrap();
        assert_eq!(sorted(keys(&fit)), sorted(columns("json", "fit.json")));
        let fam = FamilyDocument::from_spec(&make_family(FamilyVariant::Dyadic { m: 3 }, 10, 2.0).unwrap());
        assert_eq!(sorted(keys(&fam)), sorted(columns("json", "family.json")));
        let v = Verdict::new("predict", true);
        assert_eq!(sorted(keys(&v)), sorted(columns("json", "verdict.json")));
    }
}
