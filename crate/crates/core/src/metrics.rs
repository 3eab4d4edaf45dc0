//! Classification scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts indexed `[truth][prediction]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(truth: &[usize], predicted: &[usize], classes: usize) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::data(format!("{} labels but {} predictions", truth.len(), predicted.len())));
        }
        let mut counts = vec![vec![0; classes]; classes];
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= classes || p >= classes {
                return Err(Error::data(format!("class {} out of range 0..{classes}", t.max(p))));
            }
            counts[t][p] += 1;
        }
        Ok(ConfusionMatrix { counts })
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }

    /// Fraction correct; NaN when empty.
    pub fn accuracy(&self) -> f64 {
        self.correct() as f64 / self.total() as f64
    }

    pub fn row_totals(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    /// Recall of each true class; NaN for absent classes.
    pub fn per_class_accuracy(&self) -> Vec<f64> {
        self.counts.iter().enumerate().map(|(i, r)| r[i] as f64 / r.iter().sum::<usize>() as f64).collect()
    }

    pub fn to_csv(&self) -> String {
        let k = self.counts.len();
        let mut s = String::from("truth");
        for j in 0..k {
            s += &format!(",pred_{j}");
        }
        s.push('\n');
        for (i, row) in self.counts.iter().enumerate() {
            s += &i.to_string();
            for c in row {
                s += &format!(",{c}");
            }
            s.push('\n');
        }
        s
    }
}

/// Median of finite values; NaN if none.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
