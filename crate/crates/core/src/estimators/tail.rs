use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::fit_line;
use crate::seqcore::{SingularSeq, Support};

/// How the unsummed part of a sequence is completed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailRegime {
    /// `mu_n = c n^{-alpha}` with `alpha` pinned to the critical exponent.
    Critical,
    /// Faster decay; the fitted exponent is used as is.
    Summable,
    /// Nothing beyond the prefix (finite rank, or the data is zero there).
    Empty,
}

impl TailRegime {
    pub fn code(self) -> f64 {
        match self {
            TailRegime::Critical => 0.0,
            TailRegime::Summable => 1.0,
            TailRegime::Empty => 2.0,
        }
    }
}

/// Power-law fit `mu_n ~ c n^{-alpha}` of the last decade before `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub regime: TailRegime,
    pub alpha: f64,
    pub log_c: f64,
    /// RMS of the log-log fit residual.
    pub rms: f64,
    /// Whether the data looked like a clean power law.
    pub clean: bool,
}

/// Exponent tolerance for treating the tail as critical.
const ALPHA_SLACK: f64 = 0.05;
/// RMS (in `log mu`) above which the tail is not called a clean power law.
const CLEAN_RMS: f64 = 0.02;

/// Fits the tail ending at position `n` against the critical exponent
/// `alpha_crit`. Decay slower than critical means the sequence is outside
/// the ideal.
pub(crate) fn fit_tail(seq: &SingularSeq, n: u64, alpha_crit: f64) -> Result<TailFit> {
    let empty = TailFit {
        regime: TailRegime::Empty,
        alpha: f64::NAN,
        log_c: f64::NAN,
        rms: 0.0,
        clean: true,
    };
    if seq.support() == Some(Support::FiniteRank) && seq.support_len().is_some_and(|len| len <= n) {
        return Ok(empty);
    }
    if n < 20 {
        return Err(Error::Fit(format!("tail fit needs at least 20 terms, have {n}")));
    }
    let lo = (n / 10).max(1) as f64;
    let mut pos: Vec<u64> = (0..64)
        .map(|j| (lo * (n as f64 / lo).powf(j as f64 / 63.0)).round() as u64)
        .map(|m| m.clamp(1, n))
        .collect();
    pos.dedup();
    let vals: Vec<f64> = pos.iter().map(|&m| seq.value_at(m)).collect();
    if vals.iter().all(|&v| v == 0.0) {
        return Ok(empty);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pos
        .iter()
        .zip(&vals)
        .filter(|(_, &v)| v > 0.0)
        .map(|(&m, &v)| ((m as f64).ln(), v.ln()))
        .unzip();
    if xs.len() < pos.len() {
        // Zeros inside the last decade: the data ends before the prefix does.
        return Ok(empty);
    }
    let free = fit_line(&xs, &ys)?;
    let alpha_free = -free.slope;
    if alpha_free < alpha_crit - ALPHA_SLACK {
        return Err(Error::Membership(format!(
            "tail decays like n^-{alpha_free:.3}, slower than the critical n^-{alpha_crit:.3}"
        )));
    }
    if alpha_free > alpha_crit + ALPHA_SLACK {
        return Ok(TailFit {
            regime: TailRegime::Summable,
            alpha: alpha_free,
            log_c: free.intercept,
            rms: free.rms,
            clean: free.rms < CLEAN_RMS,
        });
    }
    let resid: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y + alpha_crit * x).collect();
    let log_c = resid.iter().sum::<f64>() / resid.len() as f64;
    let rms = (resid.iter().map(|r| (r - log_c).powi(2)).sum::<f64>() / resid.len() as f64).sqrt();
    Ok(TailFit {
        regime: TailRegime::Critical,
        alpha: alpha_crit,
        log_c,
        rms,
        clean: rms < CLEAN_RMS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regimes() {
        let h = SingularSeq::harmonic(1.0).unwrap();
        let f = fit_tail(&h, 1 << 20, 1.0).unwrap();
        assert_eq!(f.regime, TailRegime::Critical);
        assert!(f.log_c.abs() < 1e-12 && f.clean);
        let f = fit_tail(&h, 1 << 20, 0.5).unwrap();
        assert_eq!(f.regime, TailRegime::Summable);
        assert!((f.alpha - 1.0).abs() < 1e-12);
        let s = SingularSeq::power(2.0, 1.0).unwrap();
        assert!(matches!(fit_tail(&s, 1 << 20, 1.0), Err(Error::Membership(_))));
        let fin = SingularSeq::from_values(&[1.0, 0.5], Support::FiniteRank).unwrap();
        assert_eq!(fit_tail(&fin, 2, 1.0).unwrap().regime, TailRegime::Empty);
    }
}
