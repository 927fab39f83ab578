//! Side-by-side evaluation of several fitted models.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::LabeledSample;
use crate::error::{Error, Result};
use crate::models::{Family, Model, TailEvent};

use super::metrics::{cross_entropy, pct_decrease_matrix, tail_metrics, topk_accuracy, win_matrix, TailMetrics};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetrics {
    pub name: String,
    pub family: Family,
    /// Mean negative log-likelihood over all test samples, in nats.
    pub cross_entropy: f64,
    pub accuracy: f64,
    /// Top-k accuracy in percent for `k = 1..=k_max`.
    pub topk: Vec<f64>,
    /// Magnitude metrics given that the best ask moved up; absent when no
    /// test sample has that event.
    pub tail_ask_up: Option<TailMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub k_max: usize,
    pub n_test: usize,
    pub models: Vec<ModelMetrics>,
    /// `run_errors[r][i]`: cross-entropy of model `i` on test run `r`.
    pub run_errors: Vec<Vec<f64>>,
    pub win_matrix: Vec<Vec<Option<usize>>>,
    /// Mean percent decrease in error of the row model relative to the column model.
    pub pct_decrease: Vec<Vec<f64>>,
}

/// Evaluate `models` on each test run. Metrics other than the pairwise
/// matrices pool all runs.
pub fn build_report(models: &[(String, &Model)], runs: &[Vec<LabeledSample>], k_max: usize) -> Result<EvalReport> {
    if models.is_empty() || runs.is_empty() || runs.iter().any(Vec::is_empty) {
        return Err(Error::arg("compare", "need at least one model and nonempty test runs"));
    }
    let first = models[0].1.as_dyn();
    for (name, m) in models {
        let d = m.as_dyn();
        if d.case_mode() != first.case_mode() || d.grid().half != first.grid().half {
            return Err(Error::arg(
                "compare",
                format!("model {name} has a different support or case mode than {}", models[0].0),
            ));
        }
    }
    let pooled: Vec<LabeledSample> = runs.iter().flatten().cloned().collect();
    let mut metrics = Vec::with_capacity(models.len());
    for (name, m) in models {
        let d = m.as_dyn();
        let topk = topk_accuracy(d, &pooled, k_max)?;
        let tail = if pooled.iter().any(|s| TailEvent::AskUp.contains(s.label)) {
            Some(tail_metrics(d, &pooled, TailEvent::AskUp, k_max)?)
        } else {
            None
        };
        metrics.push(ModelMetrics {
            name: name.clone(),
            family: m.family(),
            cross_entropy: cross_entropy(d, &pooled)?,
            accuracy: topk[0],
            topk,
            tail_ask_up: tail,
        });
    }
    let run_errors = if runs.len() == 1 {
        vec![metrics.iter().map(|m| m.cross_entropy).collect()]
    } else {
        runs.iter()
            .map(|r| models.iter().map(|(_, m)| cross_entropy(m.as_dyn(), r)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?
    };
    Ok(EvalReport {
        k_max,
        n_test: pooled.len(),
        models: metrics,
        win_matrix: win_matrix(&run_errors),
        pct_decrease: pct_decrease_matrix(&run_errors)?,
        run_errors,
    })
}

fn matrix_csv<T>(names: &[&str], rows: &[Vec<T>], cell: impl Fn(&T) -> String) -> String {
    let mut s = String::from("model");
    for n in names {
        s.push(',');
        s.push_str(n);
    }
    s.push('\n');
    for (n, row) in names.iter().zip(rows) {
        s.push_str(n);
        for v in row {
            s.push(',');
            s.push_str(&cell(v));
        }
        s.push('\n');
    }
    s
}

impl EvalReport {
    pub fn names(&self) -> Vec<&str> {
        self.models.iter().map(|m| m.name.as_str()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// One row per model: cross-entropy, accuracy, top-k and ask-up tail metrics.
    pub fn metrics_csv(&self) -> String {
        let mut s = String::from("model,family,cross_entropy,accuracy,tail_n,tail_cross_entropy");
        for k in 1..=self.k_max {
            let _ = write!(s, ",top{k}");
        }
        for k in 1..=self.k_max {
            let _ = write!(s, ",tail_top{k}");
        }
        s.push('\n');
        for m in &self.models {
            let _ = write!(s, "{},{},{},{}", m.name, m.family, m.cross_entropy, m.accuracy);
            match &m.tail_ask_up {
                Some(t) => {
                    let _ = write!(s, ",{},{}", t.n, t.cross_entropy);
                }
                None => s.push_str(",0,NA"),
            }
            for v in &m.topk {
                let _ = write!(s, ",{v}");
            }
            for k in 0..self.k_max {
                match &m.tail_ask_up {
                    Some(t) => {
                        let _ = write!(s, ",{}", t.topk[k]);
                    }
                    None => s.push_str(",NA"),
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn wins_csv(&self) -> String {
        matrix_csv(&self.names(), &self.win_matrix, |v| v.map_or("NA".to_string(), |c| c.to_string()))
    }

    pub fn pct_decrease_csv(&self) -> String {
        matrix_csv(&self.names(), &self.pct_decrease, |v| v.to_string())
    }

    /// `report.json`, `metrics.csv`, `wins.csv` and `pct_decrease.csv` in `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, body) in [
            ("report.json", self.to_json()?),
            ("metrics.csv", self.metrics_csv()),
            ("wins.csv", self.wins_csv()),
            ("pct_decrease.csv", self.pct_decrease_csv()),
        ] {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
        }
        Ok(())
    }
}
