use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    clamp_to_support, default_tail_window, dyadic_windows, envelope_of, extrapolate_values, sucheston_envelope,
    tail_envelope, GridSpec, LimitModel, MeanProfile, SuchestonEnvelope,
};
use crate::error::{domain, Error, Result};
use crate::numeric::{fit_line, ln_one_plus_exp};
use crate::seqcore::{marcinkiewicz_norm, SingularSeq};

use super::report::{Measurability, Method, TraceReport, TraceValue};

/// Settings for the Cesaro route.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CesaroConfig {
    pub grid: GridSpec,
    /// Measurability tolerance, relative to `|value| + 1`.
    pub tol: f64,
    /// Tail window in samples; `None` uses half the grid (at least 16).
    pub window: Option<usize>,
    pub model: LimitModel,
}

impl Default for CesaroConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::geometric(1e12),
            tol: 1e-2,
            window: None,
            model: LimitModel::ConstPlusCOverLog,
        }
    }
}

impl CesaroConfig {
    /// Defaults with a grid suited to deciding measurability of `seq`.
    ///
    /// Sequences with a log-space closed form get a log log grid to
    /// `log t = 1e4`, which spans several periods of a `sin(b log log t)`
    /// modulation; a geometric grid to `1e12` sees less than one.
    pub fn for_measurability(seq: &SingularSeq) -> Self {
        let grid = if seq.support_len().is_none() && seq.has_log_closed_form() {
            GridSpec::loglog(LONG_LOG_T)
        } else {
            GridSpec::geometric(1e12)
        };
        Self { grid, ..Self::default() }
    }
}

/// `log t` reached by the long measurability grid.
pub const LONG_LOG_T: f64 = 1e4;

/// Slope of `log g` against `log t` above which the profile is taken to
/// diverge like a power of `t`.
const DIVERGENCE_SLOPE: f64 = 0.1;

/// Cesaro-mean estimate of the Dixmier trace from `g(t) = sigma(t)/log(1+t)`.
pub fn cesaro_trace(seq: &SingularSeq, cfg: &CesaroConfig) -> Result<TraceReport> {
    let base = seq.unscaled();
    let grid = clamp_to_support(&base, &cfg.grid);
    let profile = MeanProfile::cesaro(&base, &grid)?;
    if profile.len() < 8 {
        return Err(Error::Fit(format!("profile has only {} samples", profile.len())));
    }
    let window = cfg.window.unwrap_or_else(|| default_tail_window(profile.len())).min(profile.len());
    check_membership(&profile, window)?;
    let inv_log = profile.inverse_logs();
    let env = tail_envelope(&profile, window)?;
    let ext = extrapolate_values(profile.values(), &inv_log, cfg.model, window)?;
    let details = measurability_details(&profile, cfg.tol)?;
    let interval = if details.verdict == Measurability::Yes {
        let corrected = drift_corrected(&profile, ext.slope, window)?;
        (env.lower.min(corrected.0), env.upper.max(corrected.1))
    } else {
        (env.lower, env.upper)
    };
    let horizon = grid.log_t_max.min(35.0).exp().max(1.0);
    let norm = marcinkiewicz_norm(&base, 1.0, horizon)?;

    let mut r = TraceReport::new(Method::Cesaro, TraceValue::Real(ext.value), interval, 1.0);
    r.measurable = details.verdict;
    r.diag("grid_size", profile.len() as f64);
    r.diag("log_t_max", *profile.log_t().last().expect("nonempty"));
    r.diag("window", window as f64);
    r.diag("envelope_lower", env.lower);
    r.diag("envelope_upper", env.upper);
    r.diag("envelope_gap", env.gap);
    r.diag("gap_trend", env.trend);
    r.diag("fit_residual", ext.residual);
    r.diag("fit_slope", ext.slope);
    r.diag("residual_gap", details.residual_gap);
    r.diag("alternations", details.alternations as f64);
    r.diag("marcinkiewicz_norm", norm);
    r.echo("grid", cfg.grid);
    r.echo("tol", cfg.tol);
    r.echo("window", window);
    r.echo("model", cfg.model);
    r.echo("sequence", seq.label());
    Ok(r.scaled(
        seq.scale(),
        &["envelope_lower", "envelope_upper", "envelope_gap", "gap_trend", "fit_residual", "fit_slope", "residual_gap", "marcinkiewicz_norm"],
    ))
}

/// Errors when `g` grows like a positive power of `t` on the tail.
fn check_membership(profile: &MeanProfile, window: usize) -> Result<()> {
    let start = profile.len() - window;
    let xs = &profile.log_t()[start..];
    let ys: Vec<f64> = profile.values()[start..].iter().map(|&g| g.max(1e-300).ln()).collect();
    if let Ok(fit) = fit_line(xs, &ys) {
        if fit.slope > DIVERGENCE_SLOPE {
            return Err(Error::Membership(format!(
                "Cesaro mean grows like t^{:.3}; the sequence is not in L^(1,inf)",
                fit.slope
            )));
        }
    }
    Ok(())
}

/// Min/max of `g - slope/log(1+t)` over the tail: the envelope with the
/// fitted `1/log` drift removed.
fn drift_corrected(profile: &MeanProfile, slope: f64, window: usize) -> Result<(f64, f64)> {
    let start = profile.len() - window;
    let inv = profile.inverse_logs();
    let vals: Vec<f64> = (start..profile.len()).map(|i| profile.values()[i] - slope * inv[i]).collect();
    let e = envelope_of(&vals, &inv[start..], window)?;
    Ok((e.lower, e.upper))
}

/// Supporting numbers behind a measurability verdict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictDetails {
    pub verdict: Measurability,
    pub tol_eff: f64,
    pub raw_gap: f64,
    pub residual_gap: f64,
    pub trend: f64,
    pub alternations: usize,
    pub half_gap_ratio: f64,
}

/// Decides whether `lim g(t)` exists.
///
/// `yes`: after removing the fitted `A + B/log(1+t)` the tail is flat to
/// `tol (|A| + 1)`, and the raw gap is either that small or shrinking.
/// `no`: both gaps exceed five times the tolerance, the tail alternates
/// between its upper and lower band at least three times (each extreme
/// seen twice), and the second half of the tail oscillates at least half as
/// much as the first. Anything else, including profiles spanning fewer than
/// three decades, is `undecided`.
pub fn measurability_verdict(profile: &MeanProfile, tol: f64) -> Result<Measurability> {
    Ok(measurability_details(profile, tol)?.verdict)
}

pub fn measurability_details(profile: &MeanProfile, tol: f64) -> Result<VerdictDetails> {
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    let mut d = VerdictDetails {
        verdict: Measurability::Undecided,
        tol_eff: tol,
        raw_gap: f64::NAN,
        residual_gap: f64::NAN,
        trend: f64::NAN,
        alternations: 0,
        half_gap_ratio: f64::NAN,
    };
    if profile.len() < 8 || profile.decades() < 3.0 {
        return Ok(d);
    }
    let window = default_tail_window(profile.len());
    let inv = profile.inverse_logs();
    let ext = extrapolate_values(profile.values(), &inv, LimitModel::ConstPlusCOverLog, window)?;
    let env = tail_envelope(profile, window)?;
    let start = profile.len() - window;
    let tail = &profile.values()[start..];
    let resid: Vec<f64> = (start..profile.len())
        .map(|i| profile.values()[i] - ext.value - ext.slope * inv[i])
        .collect();
    let (rlo, rhi) = min_max(&resid);
    d.tol_eff = tol * (ext.value.abs() + 1.0);
    d.raw_gap = env.gap;
    d.residual_gap = rhi - rlo;
    d.trend = env.trend;
    d.alternations = alternations(tail, env.lower, env.upper);
    let half = tail.len() / 2;
    let (a0, a1) = min_max(&tail[..half]);
    let (b0, b1) = min_max(&tail[half..]);
    d.half_gap_ratio = if a1 > a0 { (b1 - b0) / (a1 - a0) } else { 1.0 };

    d.verdict = if d.residual_gap < d.tol_eff && (d.raw_gap < d.tol_eff || d.trend > 0.0) {
        Measurability::Yes
    } else if d.residual_gap > 5.0 * d.tol_eff
        && d.raw_gap > 5.0 * d.tol_eff
        && d.alternations >= 3
        && d.half_gap_ratio >= 0.5
    {
        Measurability::No
    } else {
        Measurability::Undecided
    };
    Ok(d)
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), &v| (l.min(v), u.max(v)))
}

/// Number of switches between the top and bottom quarter bands.
fn alternations(xs: &[f64], lo: f64, hi: f64) -> usize {
    let band = 0.25 * (hi - lo);
    let mut last: Option<bool> = None;
    let mut count = 0;
    for &x in xs {
        let state = if x >= hi - band {
            Some(true)
        } else if x <= lo + band {
            Some(false)
        } else {
            None
        };
        if let Some(s) = state {
            if last.is_some_and(|l| l != s) {
                count += 1;
            }
            last = Some(s);
        }
    }
    count
}

/// Attainable values of `tau_omega` over dilation-invariant states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueRange {
    pub lower: f64,
    pub upper: f64,
    pub n_max: usize,
    pub burn_in: usize,
    pub envelope: SuchestonEnvelope,
}

/// Sucheston interval of `xi_N = g(e^N)`, `N <= n_max`.
///
/// The first `n_max/16` terms are dropped (Banach limits ignore a finite
/// head) and windows run dyadically up to `n_max/16`.
pub fn dixmier_value_range(seq: &SingularSeq, n_max: usize) -> Result<ValueRange> {
    if n_max < 20 {
        return Err(domain(format!("value range needs N_max >= 20, got {n_max}")));
    }
    let base = seq.unscaled();
    if n_max > 40 && !base.has_log_closed_form() {
        return Err(Error::Cost(format!(
            "N_max = {n_max} needs g(e^N) for N > 40, which this sequence has no closed form for"
        )));
    }
    if let (Some(len), false) = (base.support_len(), base.has_log_closed_form()) {
        if (n_max as f64) > (len as f64).ln() {
            return Err(Error::Cost(format!(
                "e^{n_max} exceeds the {len} stored values of a truncated sequence"
            )));
        }
    }
    let xi = (1..=n_max)
        .map(|n| base.profile_at_log(n as f64))
        .collect::<Result<Vec<f64>>>()?;
    let burn_in = n_max / 16;
    let tail = &xi[burn_in..];
    let windows = dyadic_windows((n_max / 16).max(1).min(tail.len()));
    let mut envelope = sucheston_envelope(tail, &windows)?;
    let c = seq.scale();
    envelope.lower *= c;
    envelope.upper *= c;
    envelope.upper_path.iter_mut().for_each(|v| *v *= c);
    envelope.lower_path.iter_mut().for_each(|v| *v *= c);
    Ok(ValueRange {
        lower: envelope.lower,
        upper: envelope.upper,
        n_max,
        burn_in,
        envelope,
    })
}

/// `sum_{n : mu_n > 1/t} mu_n`.
pub fn tail_cut_trace(seq: &SingularSeq, t: f64) -> Result<f64> {
    if !(t >= 1.0) {
        return Err(domain(format!("tail cut needs t >= 1, got {t}")));
    }
    let k = seq
        .count_above(1.0 / t)
        .ok_or_else(|| Error::Cost(format!("more than 2^62 singular values exceed 1/{t}")))?;
    seq.partial_sum(k as f64)
}

/// `tail_cut_trace(t) / log(1+t)` on a grid.
pub fn tail_cut_profile(seq: &SingularSeq, grid: &GridSpec) -> Result<MeanProfile> {
    MeanProfile::sample(grid, format!("tail_cut:{}", seq.label()), |u| {
        Ok(tail_cut_trace(seq, u.exp())? / ln_one_plus_exp(u))
    })
}

/// `(1/log(1+t)) int_0^{c t log t} mu_s ds` on a grid.
pub fn stretched_profile(seq: &SingularSeq, c: f64, grid: &GridSpec) -> Result<MeanProfile> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(domain(format!("stretch constant must be positive, got {c}")));
    }
    MeanProfile::sample(grid, format!("stretched:{}", seq.label()), |u| {
        // log(c t log t), floored at log t so the upper limit never drops below t.
        let ls = if u > 0.0 { (c.ln() + u + u.ln()).max(u) } else { u };
        Ok(seq.partial_sum_at_log(ls)? / ln_one_plus_exp(u))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::Support;

    #[test]
    fn harmonic_report() {
        let h = SingularSeq::harmonic(1.0).unwrap();
        let r = cesaro_trace(&h, &CesaroConfig::default()).unwrap();
        assert!((r.value.re() - 1.0).abs() < 2e-3, "{r:?}");
        assert_eq!(r.measurable, Measurability::Yes);
        assert!(r.interval.0 <= r.value.re() && r.value.re() <= r.interval.1);
        let r2 = cesaro_trace(&h.scaled(2.0).unwrap(), &CesaroConfig::default()).unwrap();
        assert_eq!(r2.value.re(), 2.0 * r.value.re());
        assert_eq!(r2.measurable, r.measurable);
    }

    #[test]
    fn oscillating_report() {
        let s = SingularSeq::oscillating(0.15, 4.0).unwrap();
        let cfg = CesaroConfig {
            grid: GridSpec::loglog(1e4),
            ..CesaroConfig::default()
        };
        let r = cesaro_trace(&s, &cfg).unwrap();
        assert_eq!(r.measurable, Measurability::No, "{r:?}");
        assert!((r.interval.0 - 0.85).abs() < 0.02 && (r.interval.1 - 1.15).abs() < 0.02);
    }

    #[test]
    fn divergent_sequence_is_rejected() {
        let s = SingularSeq::power(2.0, 1.0).unwrap();
        assert!(matches!(cesaro_trace(&s, &CesaroConfig::default()), Err(Error::Membership(_))));
    }

    #[test]
    fn short_profiles_are_undecided() {
        let h = SingularSeq::harmonic(1.0).unwrap();
        let p = MeanProfile::cesaro(&h, &GridSpec::geometric(100.0)).unwrap();
        assert_eq!(measurability_verdict(&p, 1e-2).unwrap(), Measurability::Undecided);
    }

    #[test]
    fn value_ranges() {
        let h = SingularSeq::harmonic(1.0).unwrap();
        let r = dixmier_value_range(&h, 10_000).unwrap();
        assert!((r.lower - 1.0).abs() < 5e-3 && (r.upper - 1.0).abs() < 5e-3, "{r:?}");
        let o = SingularSeq::oscillating(0.15, 4.0).unwrap();
        let r = dixmier_value_range(&o, 10_000).unwrap();
        assert!((r.lower - 0.85).abs() < 0.02 && (r.upper - 1.15).abs() < 0.02, "{} {}", r.lower, r.upper);
        let g = SingularSeq::geometric(0.5, 1.0).unwrap();
        let r = dixmier_value_range(&g, 10_000).unwrap();
        assert!(r.lower.abs() < 5e-3 && r.upper.abs() < 5e-3);
        let t = SingularSeq::from_values(&[1.0, 0.5], Support::Truncation).unwrap();
        assert!(matches!(dixmier_value_range(&t, 100), Err(Error::Cost(_))));
        assert!(dixmier_value_range(&h, 10).is_err());
    }

    #[test]
    fn tail_cuts() {
        let h = SingularSeq::harmonic(1.0).unwrap();
        let h9: f64 = (1..=9).map(|n| 1.0 / n as f64).sum();
        assert!((tail_cut_trace(&h, 10.0).unwrap() - h9).abs() < 1e-14);
        assert!((h9 - 2.828_968_253_968_254).abs() < 1e-14);
        let g = SingularSeq::geometric(0.5, 1.0).unwrap();
        // 2^-3 = 1/8 is not strictly above 1/8.
        assert!((tail_cut_trace(&g, 8.0).unwrap() - 0.75).abs() < 1e-15);
        assert!((tail_cut_trace(&g, 8.0 + 1e-9).unwrap() - 0.875).abs() < 1e-15);
        assert!(tail_cut_trace(&g, 0.5).is_err());
        let big = tail_cut_trace(&h, 1e15).unwrap() / 1e15f64.ln_1p();
        assert!((big - 1.0).abs() < 0.02);
    }
}
