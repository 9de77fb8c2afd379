use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numeric::fit_line;
use crate::seqcore::SingularSeq;

use super::report::{Method, TraceReport, TraceValue};
use super::tail::{fit_tail, TailFit, TailRegime};
use super::weights::Weights;

/// Settings shared by the zeta-residue and p-power routes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaConfig {
    /// `s_k = p + 2^{-k}` for `k` in `k_min..=k_max`.
    pub k_min: u32,
    pub k_max: u32,
    /// Terms summed directly before the power-law tail takes over.
    pub prefix_terms: u64,
    /// Samples (closest to `s = p`) used by the linear extrapolation.
    pub extrap_points: usize,
}

impl Default for ZetaConfig {
    fn default() -> Self {
        Self {
            k_min: 1,
            k_max: 20,
            prefix_terms: 1 << 20,
            extrap_points: 12,
        }
    }
}

/// `(s - p) zeta_A(s)` sampled on the `s` grid, with its extrapolation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaSamples {
    pub s: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: f64,
    pub extrapolation_rms: f64,
    pub prefix_terms: u64,
    pub tail: TailFit,
}

/// Samples `(s - p) sum a_n mu_n^s` on the normalized generator of `seq`.
pub fn zeta_samples(seq: &SingularSeq, weights: &Weights, p: f64, cfg: &ZetaConfig) -> Result<ZetaSamples> {
    if cfg.k_min > cfg.k_max || cfg.k_max > 50 {
        return Err(domain("s grid needs 1 <= k_min <= k_max <= 50"));
    }
    let count = (cfg.k_max - cfg.k_min + 1) as usize;
    if cfg.extrap_points < 2 || cfg.extrap_points > count {
        return Err(domain(format!("extrapolation needs 2..={count} samples")));
    }
    let base = seq.unscaled();
    let n = base.support_len().map_or(cfg.prefix_terms, |len| len.min(cfg.prefix_terms));
    let tail = fit_tail(&base, n, 1.0 / p)?;
    let ln_mu: Vec<f64> = (1..=n)
        .map(|k| {
            let v = base.value_at(k);
            if v > 0.0 {
                v.ln()
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let a_bar = weights.mean();
    let nf = n as f64;
    let mut s_out = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count);
    for k in cfg.k_min..=cfg.k_max {
        let h = (-(k as f64)).exp2();
        let s = p + h;
        let mut acc = weights.accumulator();
        for (i, &l) in ln_mu.iter().enumerate() {
            acc.add(i as u64 + 1, (s * l).exp());
        }
        let prefix = acc.value();
        let tail_part = match tail.regime {
            TailRegime::Empty => 0.0,
            TailRegime::Critical | TailRegime::Summable => {
                let q = tail.alpha * s;
                // (s - p) / (q - 1): exactly p in the critical regime.
                let lead = match tail.regime {
                    TailRegime::Critical => p,
                    _ => h / (q - 1.0),
                };
                let em = lead * nf.powf(1.0 - q)
                    + h * (-0.5 * nf.powf(-q) + q * nf.powf(-q - 1.0) / 12.0
                        - q * (q + 1.0) * (q + 2.0) * nf.powf(-q - 3.0) / 720.0);
                a_bar * (s * tail.log_c).exp() * em
            }
        };
        s_out.push(s);
        values.push(h * prefix + tail_part);
    }
    let m = cfg.extrap_points;
    let xs: Vec<f64> = s_out[count - m..].iter().map(|s| s - p).collect();
    let fit = fit_line(&xs, &values[count - m..])?;
    Ok(ZetaSamples {
        s: s_out,
        values,
        limit: fit.intercept,
        extrapolation_rms: fit.rms,
        prefix_terms: n,
        tail,
    })
}

fn report_from(method: Method, z: &ZetaSamples, p: f64, scale_p: f64) -> TraceReport {
    let value = z.limit / p;
    let m = z.values.iter().map(|v| v / p);
    let lo = m.clone().fold(value, f64::min);
    let hi = m.fold(value, f64::max);
    let mut r = TraceReport::new(method, TraceValue::Real(value), (lo, hi), p);
    r.diag("prefix_terms", z.prefix_terms as f64);
    r.diag("tail_regime", z.tail.regime.code());
    r.diag("tail_alpha", z.tail.alpha);
    r.diag("tail_log_c", z.tail.log_c);
    r.diag("tail_fit_rms", z.tail.rms);
    r.diag("tail_fit", if z.tail.clean { 1.0 } else { 0.0 });
    r.diag("extrapolation_rms", z.extrapolation_rms);
    r.diag("s_min", *z.s.last().expect("nonempty"));
    r.scaled(scale_p, &["extrapolation_rms"])
}

/// `lim_{s -> 1+} (s - 1) sum a_n mu_n^s`, the residue form of the
/// weighted Dixmier trace. Requires `mu_n <= C/n` to be claimed.
pub fn zeta_residue_trace(seq: &SingularSeq, weights: Option<&Weights>, cfg: &ZetaConfig) -> Result<TraceReport> {
    if seq.bound_constant().is_none() {
        return Err(Error::Membership(format!(
            "zeta route needs a bound mu_n <= C/n, none is known for {}",
            seq.label()
        )));
    }
    let unit = Weights::unit();
    let w = weights.unwrap_or(&unit);
    let z = zeta_samples(seq, w, 1.0, cfg)?;
    let mut r = report_from(Method::Zeta, &z, 1.0, seq.scale());
    r.echo("s_grid", (cfg.k_min, cfg.k_max));
    r.echo("prefix_terms", cfg.prefix_terms);
    r.echo("extrap_points", cfg.extrap_points);
    r.echo("weights", w.period());
    r.echo("sequence", seq.label());
    Ok(r)
}

/// `(1/p) lim_{s -> p+} (s - p) sum mu_n^s`, the Dixmier trace of `T^p`.
pub fn p_power_trace(seq: &SingularSeq, p: f64, cfg: &ZetaConfig) -> Result<TraceReport> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(domain(format!("p-power route needs p > 1, got {p}")));
    }
    let z = zeta_samples(seq, &Weights::unit(), p, cfg)?;
    let mut r = report_from(Method::PPower, &z, p, seq.scale().powf(p));
    r.echo("p", p);
    r.echo("s_grid", (cfg.k_min, cfg.k_max));
    r.echo("prefix_terms", cfg.prefix_terms);
    r.echo("extrap_points", cfg.extrap_points);
    r.echo("sequence", seq.label());
    Ok(r)
}
