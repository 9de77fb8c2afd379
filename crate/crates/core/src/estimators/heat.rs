use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_ur};

use crate::error::{domain, Error, Result};
use crate::numeric::fit_line;
use crate::seqcore::{SeqKind, SingularSeq};

use super::report::{Method, TraceReport, TraceValue};
use super::tail::{fit_tail, TailFit, TailRegime};
use super::weights::Weights;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatConfig {
    /// `lambda_k = 2^k` for `k` in `k_min..=k_max`.
    pub k_min: u32,
    pub k_max: u32,
    pub prefix_terms: u64,
    /// Largest samples used to extrapolate in `1/lambda`.
    pub extrap_points: usize,
    /// Terms with `exp(-x)`, `x > cutoff`, are dropped.
    pub cutoff: f64,
}

impl Default for HeatConfig {
    fn default() -> Self {
        Self {
            k_min: 0,
            k_max: 23,
            prefix_terms: 1 << 20,
            extrap_points: 8,
            cutoff: 40.0,
        }
    }
}

/// `F(lambda) = lambda^{-1} sum a_n exp(-lambda^{-2/p} mu_n^{-2})` on the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatSamples {
    pub lambda: Vec<f64>,
    pub values: Vec<f64>,
    /// `lim F(lambda)`, which equals `Gamma(1 + p/2)` times the trace.
    pub raw_limit: f64,
    pub extrapolation_rms: f64,
    pub tail: TailFit,
    pub terms_used: u64,
}

/// Heat-kernel samples on the normalized generator of `seq`.
pub fn heat_samples(seq: &SingularSeq, p: f64, weights: &Weights, cfg: &HeatConfig) -> Result<HeatSamples> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(domain(format!("heat route needs p >= 1, got {p}")));
    }
    if cfg.k_min > cfg.k_max || cfg.k_max > 60 {
        return Err(domain("lambda grid needs k_min <= k_max <= 60"));
    }
    let count = (cfg.k_max - cfg.k_min + 1) as usize;
    if cfg.extrap_points < 2 || cfg.extrap_points > count {
        return Err(domain(format!("extrapolation needs 2..={count} samples")));
    }
    let base = seq.unscaled();
    if let SeqKind::Runs(t) = base.kind() {
        if t.runs().any(|(v, _)| v == 0.0) {
            return Err(Error::KernelConvention(
                "a zero singular value has no heat weight exp(-mu^-2); the kernel must be removed".into(),
            ));
        }
    }
    let n = base.support_len().map_or(cfg.prefix_terms, |len| len.min(cfg.prefix_terms));
    let inv_sq: Vec<f64> = (1..=n).map(|k| base.value_at(k).powi(-2)).collect();
    let alpha_crit = 1.0 / p;
    let mut tail: Option<TailFit> = None;
    let a_bar = weights.mean();
    let nf = n as f64;
    let mut lambda = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count);
    let mut terms_used = 0u64;
    for k in cfg.k_min..=cfg.k_max {
        let lam = (k as f64).exp2();
        let theta = lam.powf(-2.0 / p);
        let mut acc = weights.accumulator();
        let mut cut = false;
        for (i, &w) in inv_sq.iter().enumerate() {
            let x = theta * w;
            if x > cfg.cutoff {
                cut = true;
                break;
            }
            acc.add(i as u64 + 1, (-x).exp());
            terms_used = terms_used.max(i as u64 + 1);
        }
        let mut total = acc.value();
        if !cut {
            let fit = match tail {
                Some(f) => f,
                None => {
                    let f = fit_tail(&base, n, alpha_crit)?;
                    tail = Some(f);
                    f
                }
            };
            if fit.regime != TailRegime::Empty {
                // mu_n = c n^{-alpha}: terms are exp(-(n/L)^{2 alpha}).
                let two_a = 2.0 * fit.alpha;
                let c2 = (2.0 * fit.log_c).exp();
                let ell = (c2 / theta).powf(1.0 / two_a);
                let x0 = (nf / ell).powf(two_a);
                let a = 1.0 / two_a;
                let integral = ell / two_a * gamma(a) * gamma_ur(a, x0);
                let f_n = (-x0).exp();
                let df_n = -f_n * two_a * x0 / nf;
                total += a_bar * (integral - 0.5 * f_n - df_n / 12.0);
            }
        }
        lambda.push(lam);
        values.push(total / lam);
    }
    let m = cfg.extrap_points;
    let xs: Vec<f64> = lambda[count - m..].iter().map(|l| 1.0 / l).collect();
    let fit = fit_line(&xs, &values[count - m..])?;
    Ok(HeatSamples {
        lambda,
        values,
        raw_limit: fit.intercept,
        extrapolation_rms: fit.rms,
        tail: tail.unwrap_or(TailFit {
            regime: TailRegime::Empty,
            alpha: f64::NAN,
            log_c: f64::NAN,
            rms: 0.0,
            clean: true,
        }),
        terms_used,
    })
}

/// Heat-kernel estimate of the Dixmier trace of `A T^p`: the limit of
/// `F(lambda)` divided by `Gamma(1 + p/2)`.
pub fn heat_trace(seq: &SingularSeq, p: f64, weights: Option<&Weights>, cfg: &HeatConfig) -> Result<TraceReport> {
    let unit = Weights::unit();
    let w = weights.unwrap_or(&unit);
    let h = heat_samples(seq, p, w, cfg)?;
    let norm = gamma(1.0 + 0.5 * p);
    let value = h.raw_limit / norm;
    let m = h.values[h.values.len() - cfg.extrap_points..].iter().map(|v| v / norm);
    let lo = m.clone().fold(value, f64::min);
    let hi = m.fold(value, f64::max);
    let mut r = TraceReport::new(Method::Heat, TraceValue::Real(value), (lo, hi), p);
    r.diag("raw_limit", h.raw_limit);
    r.diag("gamma_normalization", norm);
    r.diag("extrapolation_rms", h.extrapolation_rms);
    r.diag("terms_used", h.terms_used as f64);
    r.diag("tail_regime", h.tail.regime.code());
    r.diag("tail_alpha", h.tail.alpha);
    r.diag("tail_log_c", h.tail.log_c);
    r.diag("tail_fit", if h.tail.clean { 1.0 } else { 0.0 });
    r.echo("p", p);
    r.echo("lambda_grid", (cfg.k_min, cfg.k_max));
    r.echo("prefix_terms", cfg.prefix_terms);
    r.echo("extrap_points", cfg.extrap_points);
    r.echo("cutoff", cfg.cutoff);
    r.echo("weights", w.period());
    r.echo("sequence", seq.label());
    Ok(r.scaled(seq.scale().powf(p), &["raw_limit", "extrapolation_rms"]))
}
