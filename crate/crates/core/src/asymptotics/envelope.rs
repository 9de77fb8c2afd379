use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numeric::{fit_line, neville};

use super::profile::{default_tail_window, MeanProfile};

/// Liminf/limsup bounds read off the tail of a profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub window: usize,
    /// Slope of block gaps against `1/log(1+t)`; positive when the gap
    /// shrinks as `t` grows.
    pub trend: f64,
}

impl Envelope {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, x: f64, slack: f64) -> bool {
        self.lower - slack <= x && x <= self.upper + slack
    }
}

/// Min/max over the last `window` samples and the trend of the gap.
pub fn tail_envelope(profile: &MeanProfile, window: usize) -> Result<Envelope> {
    envelope_of(profile.values(), &profile.inverse_logs(), window)
}

/// Envelope of `values` with abscissae `x = 1/log(1+t)` (decreasing in `t`).
pub(crate) fn envelope_of(values: &[f64], inv_log: &[f64], window: usize) -> Result<Envelope> {
    if window < 4 {
        return Err(domain(format!("tail window must be >= 4, got {window}")));
    }
    if window > values.len() {
        return Err(domain(format!(
            "tail window {window} exceeds the {} available samples",
            values.len()
        )));
    }
    let start = values.len() - window;
    let tail = &values[start..];
    let (lower, upper) = min_max(tail);
    let block = window / 4;
    let mut xs = Vec::with_capacity(4);
    let mut gaps = Vec::with_capacity(4);
    for b in 0..4 {
        let lo = start + b * block;
        let hi = if b == 3 { values.len() } else { lo + block };
        let (l, u) = min_max(&values[lo..hi]);
        xs.push(inv_log[(lo + hi - 1) / 2]);
        gaps.push(u - l);
    }
    let trend = fit_line(&xs, &gaps).map(|f| f.slope).unwrap_or(0.0);
    Ok(Envelope {
        lower,
        upper,
        gap: upper - lower,
        window,
        trend,
    })
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), &v| (l.min(v), u.max(v)))
}

/// Tail model used to read off `lim g(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitModel {
    Const,
    ConstPlusCOverLog,
    Richardson,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub value: f64,
    pub residual: f64,
    /// Fitted coefficient of `1/log(1+t)` (zero for the constant model).
    pub slope: f64,
    pub window: usize,
}

/// Fits the profile tail and returns the limit `A`.
///
/// `const_plus_c_over_log` fits `A + B/log(1+t)`; `richardson` runs Neville
/// extrapolation to `1/log(1+t) = 0` through four evenly spaced tail samples
/// and reports the change from dropping one of them.
pub fn extrapolate_limit(profile: &MeanProfile, model: LimitModel) -> Result<Extrapolation> {
    extrapolate_values(profile.values(), &profile.inverse_logs(), model, default_tail_window(profile.len()))
}

pub(crate) fn extrapolate_values(
    values: &[f64],
    inv_log: &[f64],
    model: LimitModel,
    window: usize,
) -> Result<Extrapolation> {
    if values.len() < 8 {
        return Err(Error::Fit(format!("extrapolation needs >= 8 samples, got {}", values.len())));
    }
    let window = window.clamp(8, values.len());
    let start = values.len() - window;
    let ys = &values[start..];
    let xs = &inv_log[start..];
    match model {
        LimitModel::Const => {
            let mean = crate::numeric::compensated_sum(ys.iter().copied()) / ys.len() as f64;
            let rms = (crate::numeric::compensated_sum(ys.iter().map(|y| (y - mean).powi(2))) / ys.len() as f64).sqrt();
            Ok(Extrapolation {
                value: mean,
                residual: rms,
                slope: 0.0,
                window,
            })
        }
        LimitModel::ConstPlusCOverLog => {
            let fit = fit_line(xs, ys)?;
            Ok(Extrapolation {
                value: fit.intercept,
                residual: fit.rms,
                slope: fit.slope,
                window,
            })
        }
        LimitModel::Richardson => {
            let last = window - 1;
            let idx = [0, last / 3, 2 * last / 3, last];
            let px: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
            let py: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
            let (full, lower) = neville(&px, &py, 0.0)?;
            let slope = (py[3] - py[2]) / (px[3] - px[2]);
            Ok(Extrapolation {
                value: full,
                residual: (full - lower).abs(),
                slope,
                window,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{GridKind, GridSpec};
    use crate::numeric::EULER_GAMMA;
    use crate::seqcore::SingularSeq;

    fn synthetic(f: impl Fn(f64) -> f64) -> MeanProfile {
        MeanProfile::sample(&GridSpec::geometric(1e12), "synthetic", |u| Ok(f(u))).unwrap()
    }

    #[test]
    fn constant_profile() {
        let p = synthetic(|_| 2.5);
        let e = tail_envelope(&p, 16).unwrap();
        assert_eq!((e.lower, e.upper, e.gap, e.trend), (2.5, 2.5, 0.0, 0.0));
        for m in [LimitModel::Const, LimitModel::ConstPlusCOverLog, LimitModel::Richardson] {
            let x = extrapolate_limit(&p, m).unwrap();
            assert!((x.value - 2.5).abs() < 1e-13 && x.residual < 1e-13, "{m:?}");
        }
        assert!(tail_envelope(&p, 3).is_err());
        assert!(tail_envelope(&p, 1000).is_err());
    }

    #[test]
    fn recovers_c_over_log_model() {
        let p = synthetic(|u| 1.0 + 0.5772 / u.max(1e-3));
        let x = extrapolate_limit(&p, LimitModel::ConstPlusCOverLog).unwrap();
        assert!((x.value - 1.0).abs() < 1e-3, "{}", x.value);
    }

    #[test]
    fn harmonic_limit() {
        let h = SingularSeq::harmonic(1.0).unwrap();
        let p = MeanProfile::cesaro(&h, &GridSpec::geometric(1e12)).unwrap();
        let e = tail_envelope(&p, 16).unwrap();
        assert!(e.gap < 0.01 && (e.mid() - 1.0).abs() < 0.03, "{e:?}");
        assert!(e.trend > 0.0);
        for m in [LimitModel::ConstPlusCOverLog, LimitModel::Richardson] {
            let x = extrapolate_limit(&p, m).unwrap();
            assert!((x.value - 1.0).abs() < 2e-3, "{m:?}: {x:?}");
        }
        // The fitted slope is Euler's constant: g = (log t + gamma)/log(1+t).
        let x = extrapolate_limit(&p, LimitModel::ConstPlusCOverLog).unwrap();
        assert!((x.slope - EULER_GAMMA).abs() < 1e-3);
    }

    #[test]
    fn oscillating_envelope() {
        let s = SingularSeq::oscillating(0.15, 4.0).unwrap();
        let p = MeanProfile::cesaro(&s, &GridSpec::loglog(1e4)).unwrap();
        assert_eq!(p.grid_kind(), GridKind::LogLog);
        let e = tail_envelope(&p, p.len() / 2).unwrap();
        assert!((e.lower - 0.85).abs() < 0.02 && (e.upper - 1.15).abs() < 0.02, "{e:?}");
    }
}
