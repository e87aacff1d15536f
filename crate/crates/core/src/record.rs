//! Trajectory time series and their CSV form.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::persist::fmt_f64;
use crate::qstate::WaveFunction;
use crate::sde::NoiseKind;

/// Offset of the co-moving frame in which a nonlinear state is stored:
/// the physical state is `e^{i k_offset x} χ(x − x_offset)` up to a phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub x_offset: f64,
    pub k_offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseProvenance {
    pub seed: u64,
    pub stream: u64,
    pub dt: f64,
    pub kind: NoiseKind,
}

/// Width and centre columns of reduced Gaussian trajectories.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GaussianColumns {
    pub re_alpha: Vec<f64>,
    pub im_alpha: Vec<f64>,
    pub x_mean: Vec<f64>,
    pub k_mean: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub scheme: String,
    pub times: Vec<f64>,
    pub steps: Vec<usize>,
    pub norm2: Vec<f64>,
    pub q_mean: Vec<f64>,
    pub p_mean: Vec<f64>,
    pub var_q: Vec<f64>,
    pub var_p: Vec<f64>,
    pub gaussian_distance: Option<Vec<f64>>,
    pub a_variance: Option<Vec<f64>>,
    pub gaussian: Option<GaussianColumns>,
    pub final_state: Option<WaveFunction>,
    pub frame: Frame,
    pub noise: Option<NoiseProvenance>,
}

impl TrajectoryRecord {
    pub fn new(scheme: &str) -> Self {
        Self {
            scheme: scheme.to_string(),
            times: Vec::new(),
            steps: Vec::new(),
            norm2: Vec::new(),
            q_mean: Vec::new(),
            p_mean: Vec::new(),
            var_q: Vec::new(),
            var_p: Vec::new(),
            gaussian_distance: None,
            a_variance: None,
            gaussian: None,
            final_state: None,
            frame: Frame::default(),
            noise: None,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// All present columns have the same length.
    pub fn check_columns(&self) -> Result<()> {
        let n = self.times.len();
        let mut lens = vec![
            self.steps.len(),
            self.norm2.len(),
            self.q_mean.len(),
            self.p_mean.len(),
            self.var_q.len(),
            self.var_p.len(),
        ];
        lens.extend(self.gaussian_distance.as_ref().map(Vec::len));
        lens.extend(self.a_variance.as_ref().map(Vec::len));
        if let Some(g) = &self.gaussian {
            lens.extend([g.re_alpha.len(), g.im_alpha.len(), g.x_mean.len(), g.k_mean.len()]);
        }
        match lens.into_iter().find(|&l| l != n) {
            Some(actual) => Err(Error::LengthMismatch {
                expected: n,
                actual,
            }),
            None => Ok(()),
        }
    }

    /// Named numeric columns, in CSV order.
    pub fn columns(&self) -> Vec<(&'static str, Vec<f64>)> {
        let mut cols = vec![
            ("t", self.times.clone()),
            ("norm2", self.norm2.clone()),
            ("q_mean", self.q_mean.clone()),
            ("p_mean", self.p_mean.clone()),
            ("var_q", self.var_q.clone()),
            ("var_p", self.var_p.clone()),
            (
                "gaussian_distance",
                self.gaussian_distance
                    .clone()
                    .unwrap_or_else(|| vec![f64::NAN; self.len()]),
            ),
        ];
        if let Some(a) = &self.a_variance {
            cols.push(("delta_a2", a.clone()));
        }
        if let Some(g) = &self.gaussian {
            cols.push(("re_alpha", g.re_alpha.clone()));
            cols.push(("im_alpha", g.im_alpha.clone()));
            cols.push(("x_mean", g.x_mean.clone()));
            cols.push(("k_mean", g.k_mean.clone()));
        }
        cols
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        self.check_columns()?;
        let cols = self.columns();
        let mut out = csv::Writer::from_writer(w);
        out.write_record(cols.iter().map(|(name, _)| *name))?;
        for i in 0..self.len() {
            out.write_record(cols.iter().map(|(_, c)| {
                if c[i].is_nan() {
                    String::new()
                } else {
                    fmt_f64(c[i])
                }
            }))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(buf)
    }

    /// Index of the first record at or after time `t`.
    pub fn index_at(&self, t: f64) -> Option<usize> {
        let eps = 1e-9 * t.abs().max(1.0);
        self.times.iter().position(|&s| s >= t - eps)
    }
}
