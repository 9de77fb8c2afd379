use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numeric::ln_one_plus_exp;
use crate::seqcore::{SingularSeq, Support};

/// Spacing of a profile grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    /// `t_k = rho^k`, starting at `t = 1`.
    Geometric,
    /// `t = exp(exp(v))` with `v` evenly spaced, starting at `t = e`.
    LogLog,
}

/// A profile grid, described in `log t` so that doubly exponential grids
/// reach far past the range of `f64`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub kind: GridKind,
    pub log_t_max: f64,
    pub geometric_ratio: f64,
    pub loglog_step: f64,
}

impl GridSpec {
    pub const DEFAULT_RATIO: f64 = 1.189_207_115_002_721; // 2^{1/4}
    pub const DEFAULT_LOGLOG_STEP: f64 = 1.0 / 32.0;

    pub fn geometric(t_max: f64) -> Self {
        Self {
            kind: GridKind::Geometric,
            log_t_max: t_max.ln(),
            geometric_ratio: Self::DEFAULT_RATIO,
            loglog_step: Self::DEFAULT_LOGLOG_STEP,
        }
    }

    pub fn loglog(log_t_max: f64) -> Self {
        Self {
            kind: GridKind::LogLog,
            log_t_max,
            geometric_ratio: Self::DEFAULT_RATIO,
            loglog_step: Self::DEFAULT_LOGLOG_STEP,
        }
    }

    pub fn with_log_t_max(mut self, log_t_max: f64) -> Self {
        self.log_t_max = log_t_max;
        self
    }

    /// Grid points as `log t`, strictly increasing.
    pub fn log_points(&self) -> Result<Vec<f64>> {
        if !(self.log_t_max > 0.0 && self.log_t_max.is_finite()) {
            return Err(domain(format!("grid needs log t_max > 0, got {}", self.log_t_max)));
        }
        match self.kind {
            GridKind::Geometric => {
                if !(self.geometric_ratio > 1.0) {
                    return Err(domain("geometric grid ratio must exceed 1"));
                }
                let step = self.geometric_ratio.ln();
                let n = (self.log_t_max / step * (1.0 + 1e-12)).floor() as usize;
                Ok((0..=n).map(|k| k as f64 * step).collect())
            }
            GridKind::LogLog => {
                if !(self.loglog_step > 0.0) {
                    return Err(domain("loglog grid step must be positive"));
                }
                if self.log_t_max < 1.0 {
                    return Err(domain("loglog grid starts at t = e; need log t_max >= 1"));
                }
                let v_max = self.log_t_max.ln();
                let n = (v_max / self.loglog_step * (1.0 + 1e-12)).floor() as usize;
                Ok((0..=n).map(|k| (k as f64 * self.loglog_step).exp()).collect())
            }
        }
    }
}

/// Sampled mean profile `g(t)` on a grid stored as `log t`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeanProfile {
    log_t: Vec<f64>,
    values: Vec<f64>,
    grid_kind: GridKind,
    source: String,
}

impl MeanProfile {
    pub fn new(log_t: Vec<f64>, values: Vec<f64>, grid_kind: GridKind, source: impl Into<String>) -> Result<Self> {
        if log_t.len() != values.len() {
            return Err(domain(format!(
                "profile grid has {} points but {} values",
                log_t.len(),
                values.len()
            )));
        }
        if log_t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain("profile grid must be strictly increasing"));
        }
        if log_t.first().is_some_and(|&u| u < 0.0) {
            return Err(domain("profile grid must start at t >= 1"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(domain("profile values must be finite"));
        }
        Ok(Self {
            log_t,
            values,
            grid_kind,
            source: source.into(),
        })
    }

    /// Samples `f(log t)` on the grid.
    pub fn sample(spec: &GridSpec, source: impl Into<String>, f: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let log_t = spec.log_points()?;
        let values = log_t.iter().map(|&u| f(u)).collect::<Result<Vec<_>>>()?;
        Self::new(log_t, values, spec.kind, source)
    }

    /// Cesaro profile `g(t) = sigma(t) / log(1+t)`. Truncated data clamps
    /// the grid to its support.
    pub fn cesaro(seq: &SingularSeq, spec: &GridSpec) -> Result<Self> {
        let spec = clamp_to_support(seq, spec);
        Self::sample(&spec, format!("cesaro:{}", seq.label()), |u| seq.profile_at_log(u))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn log_t(&self) -> &[f64] {
        &self.log_t
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid_kind(&self) -> GridKind {
        self.grid_kind
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// `1 / log(1+t)` at each grid point.
    pub fn inverse_logs(&self) -> Vec<f64> {
        self.log_t.iter().map(|&u| 1.0 / ln_one_plus_exp(u)).collect()
    }

    /// Decades of `t` covered by the grid.
    pub fn decades(&self) -> f64 {
        match (self.log_t.first(), self.log_t.last()) {
            (Some(a), Some(b)) => (b - a) / std::f64::consts::LN_10,
            _ => 0.0,
        }
    }

    /// Pointwise map of the values.
    pub fn map(&self, source: impl Into<String>, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            log_t: self.log_t.clone(),
            values: self.log_t.iter().zip(&self.values).map(|(&u, &v)| f(u, v)).collect(),
            grid_kind: self.grid_kind,
            source: source.into(),
        }
    }
}

pub(crate) fn clamp_to_support(seq: &SingularSeq, spec: &GridSpec) -> GridSpec {
    match (seq.support(), seq.support_len()) {
        (Some(Support::Truncation), Some(n)) if n > 1 => spec.with_log_t_max(spec.log_t_max.min((n as f64).ln())),
        _ => *spec,
    }
}

/// Default tail window for a profile with `len` samples.
pub fn default_tail_window(len: usize) -> usize {
    (len / 2).max(16).min(len)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = GridSpec::geometric(1e12).log_points().unwrap();
        assert_eq!(g[0], 0.0);
        assert_eq!(g.len(), 160);
        let l = GridSpec::loglog(1e4).log_points().unwrap();
        assert_eq!(l[0], 1.0);
        assert!((l.last().unwrap() - 1e4).abs() < 1e4 * 0.04);
        assert!(GridSpec::loglog(0.5).log_points().is_err());
    }

    #[test]
    fn validation() {
        assert!(MeanProfile::new(vec![0.0, 1.0], vec![1.0], GridKind::Geometric, "x").is_err());
        assert!(MeanProfile::new(vec![1.0, 1.0], vec![1.0, 2.0], GridKind::Geometric, "x").is_err());
        assert!(MeanProfile::new(vec![0.0, 1.0], vec![1.0, f64::NAN], GridKind::Geometric, "x").is_err());
    }

    #[test]
    fn harmonic_profile_follows_h_numbers() {
        let h = SingularSeq::harmonic(1.0).unwrap();
        let p = MeanProfile::cesaro(&h, &GridSpec::geometric(1e12)).unwrap();
        let u = *p.log_t().last().unwrap();
        let expect = (u + crate::numeric::EULER_GAMMA) / u.exp().ln_1p();
        assert!((p.values().last().unwrap() - expect).abs() < 1e-10);
    }
}
