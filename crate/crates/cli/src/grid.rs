use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// One-dimensional grid, written in a config as an explicit list, an
/// evenly spaced range, or a geometric range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum GridSpec {
    Values { values: Vec<f64> },
    Linear { start: f64, stop: f64, points: usize },
    Geometric { from: f64, to: f64, points: usize },
}

impl GridSpec {
    pub fn linear(start: f64, stop: f64, points: usize) -> Self {
        GridSpec::Linear { start, stop, points }
    }

    pub fn values(values: Vec<f64>) -> Self {
        GridSpec::Values { values }
    }

    pub fn resolve(&self) -> CliResult<Vec<f64>> {
        let out = match *self {
            GridSpec::Values { ref values } => values.clone(),
            GridSpec::Linear { start, stop, points } => match points {
                0 => Vec::new(),
                1 => vec![start],
                n => (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
            },
            GridSpec::Geometric { from, to, points } => {
                if !(from > 0.0 && to > 0.0) {
                    return Err(CliError::Config("geometric grid bounds must be positive".into()));
                }
                let (a, b) = (from.ln(), to.ln());
                match points {
                    0 => Vec::new(),
                    1 => vec![from],
                    n => (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect(),
                }
            }
        };
        if out.is_empty() {
            return Err(CliError::Config("grid is empty".into()));
        }
        if out.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Config("grid contains non-finite values".into()));
        }
        Ok(out)
    }
}
