//! Curve and final-regret tables.
//!
//! `regret.csv` holds `round,algorithm,mean_regret,ci_low,ci_high` for every
//! `stride`-th round and the last one, rounds 1-based. The companion
//! `<stem>_final.csv` holds `algorithm,mean_final_regret,ci_half_width,replications`.
//! Floats use Rust's shortest round-trip formatting.

use super::{AggregateResult, HarnessError};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const CURVE_HEADER: &str = "round,algorithm,mean_regret,ci_low,ci_high";
pub const FINAL_HEADER: &str = "algorithm,mean_final_regret,ci_half_width,replications";

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub round: usize,
    pub algorithm: String,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// `dir/regret.csv` becomes `dir/regret_final.csv`.
pub fn final_table_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("regret");
    path.with_file_name(format!("{stem}_final.csv"))
}

fn curve_text(result: &AggregateResult, stride: usize) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for s in &result.summaries {
        for (idx, (&m, &h)) in s.mean_curve.iter().zip(&s.ci_half_width).enumerate() {
            let round = idx + 1;
            if round % stride == 0 || round == s.mean_curve.len() {
                let _ = writeln!(out, "{round},{},{m},{},{}", s.algorithm, m - h, m + h);
            }
        }
    }
    out
}

fn final_text(result: &AggregateResult) -> String {
    let mut out = String::from(FINAL_HEADER);
    out.push('\n');
    for s in &result.summaries {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            s.algorithm, s.final_mean, s.final_ci_half_width, s.replications
        );
    }
    out
}

/// Writes the curve table to `path` and the final table next to it.
pub fn emit_csv(result: &AggregateResult, path: &Path, stride: usize) -> Result<(), HarnessError> {
    if stride == 0 {
        return Err(HarnessError::InvalidConfig(
            "stride must be at least 1".into(),
        ));
    }
    let io = |p: &Path, e: std::io::Error| HarnessError::Io {
        path: p.display().to_string(),
        message: e.to_string(),
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io(parent, e))?;
    }
    fs::write(path, curve_text(result, stride)).map_err(|e| io(path, e))?;
    let final_path = final_table_path(path);
    fs::write(&final_path, final_text(result)).map_err(|e| io(&final_path, e))
}

/// Reads a curve table back.
pub fn parse_curve_csv(text: &str) -> Result<Vec<CurveRow>, HarnessError> {
    let bad = |no: usize, what: &str| HarnessError::InvalidConfig(format!("line {no}: {what}"));
    let mut lines = text.lines();
    if lines.next() != Some(CURVE_HEADER) {
        return Err(bad(1, "unexpected header"));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let no = i + 2;
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad(no, "expected 5 fields"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(no, "bad number"));
            Ok(CurveRow {
                round: f[0].parse().map_err(|_| bad(no, "bad round"))?,
                algorithm: f[1].to_string(),
                mean: num(f[2])?,
                ci_low: num(f[3])?,
                ci_high: num(f[4])?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_experiment, Algorithm, ExperimentConfig};

    fn result() -> AggregateResult {
        let mut config = ExperimentConfig::new(
            "uniform:n=8,k=3,c=1,t=1050".parse().unwrap(),
            vec![Algorithm::Etc, Algorithm::Alg1Lp],
        );
        config.replications = 3;
        run_experiment(&config).unwrap()
    }

    #[test]
    fn curve_round_trips() {
        let result = result();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out/regret.csv");
        emit_csv(&result, &path, 100).unwrap();
        let rows = parse_curve_csv(&fs::read_to_string(&path).unwrap()).unwrap();
        // rounds 100..=1000 plus the last, per algorithm
        assert_eq!(rows.len(), 2 * 11);
        for row in &rows {
            let s = result
                .summaries
                .iter()
                .find(|s| s.algorithm.name() == row.algorithm)
                .unwrap();
            let t = row.round - 1;
            assert_eq!(row.mean, s.mean_curve[t]);
            assert_eq!(row.ci_low, s.mean_curve[t] - s.ci_half_width[t]);
            assert_eq!(row.ci_high, s.mean_curve[t] + s.ci_half_width[t]);
        }
        assert_eq!(rows[10].round, 1050);
        assert_eq!(rows[11].algorithm, "alg1-lp");
    }

    #[test]
    fn final_table_lists_each_algorithm() {
        let result = result();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("regret.csv");
        emit_csv(&result, &path, 1).unwrap();
        let text = fs::read_to_string(dir.path().join("regret_final.csv")).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], FINAL_HEADER);
        let etc: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(etc[0], "etc");
        assert_eq!(
            etc[1].parse::<f64>().unwrap(),
            result.summaries[0].final_mean
        );
        assert_eq!(etc[3], "3");
        assert!(!text.contains('\r'));
        let curve = fs::read_to_string(&path).unwrap();
        assert_eq!(curve.lines().count(), 1 + 2 * 1050);
    }

    #[test]
    fn row_counts() {
        let mut config = ExperimentConfig::new(
            "uniform:n=4,k=1,c=1,t=10".parse().unwrap(),
            vec![Algorithm::Ucb],
        );
        config.replications = 2;
        let one = run_experiment(&config).unwrap();
        let empty = AggregateResult {
            horizon: 10,
            summaries: vec![],
            failures: vec![],
        };
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        emit_csv(&one, &a, 1).unwrap();
        emit_csv(&empty, &b, 1).unwrap();
        assert_eq!(
            parse_curve_csv(&fs::read_to_string(&a).unwrap())
                .unwrap()
                .len(),
            10
        );
        assert_eq!(fs::read_to_string(&b).unwrap(), format!("{CURVE_HEADER}\n"));
        assert_eq!(
            fs::read_to_string(dir.path().join("b_final.csv")).unwrap(),
            format!("{FINAL_HEADER}\n")
        );
    }

    #[test]
    fn unwritable_path_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "").unwrap();
        let err = emit_csv(&result(), &blocker.join("regret.csv"), 10).unwrap_err();
        assert!(matches!(err, HarnessError::Io { .. }));
    }

    #[test]
    fn malformed_tables_are_rejected() {
        assert!(parse_curve_csv("round,alg\n").is_err());
        assert!(parse_curve_csv(&format!("{CURVE_HEADER}\n1,etc,0.5,0.1\n")).is_err());
        assert!(parse_curve_csv(&format!("{CURVE_HEADER}\nx,etc,0.5,0.1,0.9\n")).is_err());
    }
}
