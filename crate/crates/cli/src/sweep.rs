//! Cartesian parameter sweeps over config keys.

use rayon::prelude::*;
use serde_json::Value;

use wgqed::table::{fmt_csv, write_csv};

use crate::commands::{metric_columns, metrics};
use crate::config::{set_path, Command, ExperimentConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub axis_keys: Vec<String>,
    pub columns: Vec<&'static str>,
    /// Axis values, then metric values or the error code.
    pub rows: Vec<(Vec<f64>, Result<Vec<f64>, &'static str>)>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut header: Vec<&str> = self.axis_keys.iter().map(String::as_str).collect();
        header.extend(&self.columns);
        header.push("error");
        write_csv(
            &header,
            self.rows.iter().map(|(point, result)| {
                let mut row: Vec<String> = point.iter().map(|&v| fmt_csv(v)).collect();
                match result {
                    Ok(values) => {
                        row.extend(values.iter().map(|&v| fmt_csv(v)));
                        row.push(String::new());
                    }
                    Err(code) => {
                        row.extend(self.columns.iter().map(|_| "nan".to_string()));
                        row.push(code.to_string());
                    }
                }
                row
            }),
        )
    }
}

/// Snaps values within rounding error of an integer, so that geometric
/// grids over counts land on whole numbers.
fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x
    }
}

fn axis_value(x: f64) -> Value {
    // Integral values stay integers so that count-valued keys deserialize.
    if x.fract() == 0.0 && x.abs() < 9.0e15 {
        Value::from(x as i64)
    } else {
        Value::from(x)
    }
}

/// Evaluates `cfg.sweep` over its grid. Bad grids or keys abort with a
/// config error before any evaluation; failures of individual cells become
/// error rows.
pub fn run_sweep(cfg: &ExperimentConfig) -> CliResult<SweepTable> {
    let spec = cfg.sweep.as_ref().ok_or_else(|| CliError::Config("sweep needs a 'sweep' section".into()))?;
    if matches!(spec.target, Command::Sweep | Command::Figures | Command::Dynamics) {
        return Err(CliError::Config(format!("{} cannot be a sweep target", spec.target.name())));
    }
    if spec.axes.is_empty() {
        return Err(CliError::Config("sweep has no axes".into()));
    }
    let grids = spec
        .axes
        .iter()
        .map(|a| a.grid.resolve().map(|g| g.into_iter().map(snap).collect::<Vec<_>>()))
        .collect::<CliResult<Vec<_>>>()?;

    let mut base = cfg.to_value();
    if let Value::Object(map) = &mut base {
        map.remove("sweep");
        map.insert("command".into(), serde_json::to_value(spec.target).expect("command serializes"));
    }
    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for grid in &grids {
        points = points.into_iter().flat_map(|p| grid.iter().map(move |&x| [p.clone(), vec![x]].concat())).collect();
    }
    let cells = points
        .iter()
        .map(|point| {
            let mut v = base.clone();
            for (axis, &x) in spec.axes.iter().zip(point) {
                set_path(&mut v, &axis.key, axis_value(x))?;
            }
            ExperimentConfig::from_value(v)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let columns = metric_columns(&cells[0])?;

    let results: Vec<Result<Vec<f64>, &'static str>> =
        cells.par_iter().map(|c| metrics(c).map(|m| m.values).map_err(|e| e.code())).collect();
    Ok(SweepTable {
        axis_keys: spec.axes.iter().map(|a| a.key.clone()).collect(),
        columns,
        rows: points.into_iter().zip(results).collect(),
    })
}
