//! Sample summaries for experiment cells.

use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, Max, Min, OrderStatistics, Statistics};

/// Mean and sample standard deviation; `None` for an empty sample, and no
/// deviation for a single value.
pub fn mean_sd(xs: &[f64]) -> Option<(f64, Option<f64>)> {
    if xs.is_empty() {
        return None;
    }
    let mean = xs.mean();
    let sd = if xs.len() > 1 { Some(xs.std_dev()) } else { None };
    Some((mean, sd))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Quartiles {
    /// Panics on an empty sample.
    pub fn of(xs: &[f64]) -> Self {
        assert!(!xs.is_empty(), "quartiles of an empty sample");
        let mut d = Data::new(xs.to_vec());
        Quartiles {
            min: d.min(),
            q1: d.lower_quartile(),
            median: d.median(),
            q3: d.upper_quartile(),
            max: d.max(),
        }
    }
}
