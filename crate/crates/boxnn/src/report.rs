//! CSV output for certified-accuracy curves and comparisons against
//! published baseline curves.
//!
//! * model curve: `eps,acc`
//! * baselines (input): `method,eps,acc`, one row per point
//! * comparison: `eps,<method>,...` with one column per method, blank where a
//!   method has no point at that budget
//! * plot data: `method,eps,acc` long format covering every method

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use boxnn_core::CertCurve;
use serde::{Deserialize, Serialize};

pub const MODEL_METHOD: &str = "Box-NN";

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{path}, line {line}: {message}")]
    Malformed {
        path: String,
        line: u64,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Curve(#[from] boxnn_core::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> ReportError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => ReportError::Io {
            path: path.display().to_string(),
            source,
        },
        kind => ReportError::Malformed {
            path: path.display().to_string(),
            line,
            message: format!("{kind:?}"),
        },
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveRow {
    eps: usize,
    acc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselinePoint {
    pub method: String,
    pub eps: usize,
    pub acc: f64,
}

/// Named curve with possibly sparse budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodCurve {
    pub method: String,
    pub points: Vec<(usize, f64)>,
}

impl MethodCurve {
    pub fn from_curve(method: &str, curve: &CertCurve) -> Self {
        Self {
            method: method.to_string(),
            points: curve
                .eps()
                .iter()
                .copied()
                .zip(curve.acc().iter().copied())
                .collect(),
        }
    }
}

pub fn write_curve_csv(curve: &CertCurve, path: impl AsRef<Path>) -> Result<(), ReportError> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for (&eps, &acc) in curve.eps().iter().zip(curve.acc()) {
        w.serialize(CurveRow { eps, acc })
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_curve_csv(path: impl AsRef<Path>) -> Result<CertCurve, ReportError> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let (mut eps, mut acc) = (Vec::new(), Vec::new());
    for row in r.deserialize::<CurveRow>() {
        let row = row.map_err(|e| csv_err(path, e))?;
        eps.push(row.eps);
        acc.push(row.acc);
    }
    Ok(CertCurve::new(eps, acc)?)
}

/// Reads baseline points grouped by method, in order of first appearance.
pub fn read_baselines(path: impl AsRef<Path>) -> Result<Vec<MethodCurve>, ReportError> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["method", "eps", "acc"] {
        return Err(ReportError::Malformed {
            path: path.display().to_string(),
            line: 1,
            message: "expected header method,eps,acc".into(),
        });
    }
    let mut curves: Vec<MethodCurve> = Vec::new();
    for row in r.deserialize::<BaselinePoint>() {
        let p = row.map_err(|e| csv_err(path, e))?;
        if !(0.0..=1.0).contains(&p.acc) {
            return Err(ReportError::Malformed {
                path: path.display().to_string(),
                line: 0,
                message: format!("accuracy {} of {} outside [0, 1]", p.acc, p.method),
            });
        }
        match curves.iter_mut().find(|c| c.method == p.method) {
            Some(c) => c.points.push((p.eps, p.acc)),
            None => curves.push(MethodCurve {
                method: p.method,
                points: vec![(p.eps, p.acc)],
            }),
        }
    }
    Ok(curves)
}

/// Wide table keyed by budget. Cells are `None` where a method has no point.
pub fn merge(curves: &[MethodCurve]) -> (Vec<String>, Vec<(usize, Vec<Option<f64>>)>) {
    let methods = curves.iter().map(|c| c.method.clone()).collect();
    let budgets: BTreeSet<usize> = curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.0))
        .collect();
    let rows = budgets
        .into_iter()
        .map(|eps| {
            let cells = curves
                .iter()
                .map(|c| c.points.iter().find(|p| p.0 == eps).map(|p| p.1))
                .collect();
            (eps, cells)
        })
        .collect();
    (methods, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportSummary {
    pub median_certified_radius: i64,
    pub clean_accuracy: f64,
    pub curve_csv: PathBuf,
    pub comparison_csv: Option<PathBuf>,
    pub plot_csv: Option<PathBuf>,
}

/// Writes `curve.csv` into `out_dir` and, when baselines are given,
/// `comparison.csv` and `plot.csv`.
pub fn emit_report(
    curve: &CertCurve,
    baselines: Option<&Path>,
    out_dir: impl AsRef<Path>,
) -> Result<ReportSummary, ReportError> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let curve_csv = out_dir.join("curve.csv");
    write_curve_csv(curve, &curve_csv)?;
    let mut summary = ReportSummary {
        median_certified_radius: curve.median_certified_radius(),
        clean_accuracy: curve.clean_accuracy(),
        curve_csv,
        comparison_csv: None,
        plot_csv: None,
    };
    let Some(baselines) = baselines else {
        return Ok(summary);
    };
    let mut curves = vec![MethodCurve::from_curve(MODEL_METHOD, curve)];
    curves.extend(read_baselines(baselines)?);

    let comparison = out_dir.join("comparison.csv");
    let (methods, rows) = merge(&curves);
    let mut w = csv::Writer::from_path(&comparison).map_err(|e| csv_err(&comparison, e))?;
    let mut header = vec!["eps".to_string()];
    header.extend(methods);
    w.write_record(&header)
        .map_err(|e| csv_err(&comparison, e))?;
    for (eps, cells) in rows {
        let mut record = vec![eps.to_string()];
        record.extend(
            cells
                .into_iter()
                .map(|c| c.map(|v| v.to_string()).unwrap_or_default()),
        );
        w.write_record(&record)
            .map_err(|e| csv_err(&comparison, e))?;
    }
    w.flush().map_err(io_err(&comparison))?;

    let plot = out_dir.join("plot.csv");
    let mut w = csv::Writer::from_path(&plot).map_err(|e| csv_err(&plot, e))?;
    for c in &curves {
        for &(eps, acc) in &c.points {
            w.serialize(BaselinePoint {
                method: c.method.clone(),
                eps,
                acc,
            })
            .map_err(|e| csv_err(&plot, e))?;
        }
    }
    w.flush().map_err(io_err(&plot))?;

    summary.comparison_csv = Some(comparison);
    summary.plot_csv = Some(plot);
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_fills_gaps() {
        let a = MethodCurve {
            method: "a".into(),
            points: vec![(0, 0.9), (2, 0.5)],
        };
        let b = MethodCurve {
            method: "b".into(),
            points: vec![(1, 0.7)],
        };
        let (methods, rows) = merge(&[a, b]);
        assert_eq!(methods, vec!["a", "b"]);
        assert_eq!(
            rows,
            vec![
                (0, vec![Some(0.9), None]),
                (1, vec![None, Some(0.7)]),
                (2, vec![Some(0.5), None])
            ]
        );
    }
}
