use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{extrapolate_values, default_tail_window, tail_envelope, GridKind, LimitModel, MeanProfile};
use crate::error::{domain, Error, Result};
use crate::numeric::NeumaierSum;

use super::cesaro::measurability_details;
use super::eiglist::EigList;
use super::report::{Measurability, Method, TraceReport, TraceValue};

/// Bounded neighbourhood `G` of zero; eigenvalues inside `G/t` are excluded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Neighborhood {
    Disc { radius: f64 },
    Square { half_side: f64 },
}

impl Neighborhood {
    /// Minkowski gauge: `z` lies in `s G` iff `gauge(z) < s`.
    pub fn gauge(&self, z: Complex64) -> f64 {
        match *self {
            Neighborhood::Disc { radius } => z.norm() / radius,
            Neighborhood::Square { half_side } => z.re.abs().max(z.im.abs()) / half_side,
        }
    }

    fn validate(&self) -> Result<()> {
        let size = match *self {
            Neighborhood::Disc { radius } => radius,
            Neighborhood::Square { half_side } => half_side,
        };
        if size > 0.0 && size.is_finite() {
            Ok(())
        } else {
            Err(domain(format!("neighbourhood size must be positive, got {size}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LidskiiMode {
    /// `(1/log(1+N)) sum_{i <= N} lambda_i` in modulus order.
    SortedSum,
    /// `(1/log(1+t)) sum_{lambda outside G/t} lambda`.
    Exclusion(Neighborhood),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LidskiiConfig {
    pub mode: LidskiiMode,
    /// Cap on `N` (sorted sums) or `t` (exclusion); `None` uses all data.
    pub limit: Option<f64>,
    /// Claimed `C` in `|lambda_n| <= C/n`; `None` runs a growth test.
    pub bound: Option<f64>,
    pub tol: f64,
}

impl Default for LidskiiConfig {
    fn default() -> Self {
        Self {
            mode: LidskiiMode::SortedSum,
            limit: None,
            bound: None,
            tol: 1e-2,
        }
    }
}

const GRID_STEP_LOG2: f64 = 0.25;

/// Checks `|lambda_n| <= C/n`. Without a claimed `C`, flags growth of
/// `n |lambda_n|` by more than a factor 2 between the first eighth and the
/// last half of the data.
pub fn check_decay(eigs: &EigList, n_max: u64, bound: Option<f64>) -> Result<f64> {
    let mut end = 0u64;
    let (mut head, mut late, mut all) = (0.0f64, 0.0f64, 0.0f64);
    for &(z, m) in eigs.entries() {
        let start = end + 1;
        end += m;
        if start > n_max {
            break;
        }
        let r = z.norm();
        let top = end.min(n_max);
        all = all.max(top as f64 * r);
        if start <= n_max / 8 {
            head = head.max(end.min(n_max / 8) as f64 * r);
        }
        if top > n_max / 2 {
            late = late.max(top as f64 * r);
        }
    }
    match bound {
        Some(c) if all > c * (1.0 + 1e-9) => Err(Error::Hypothesis(format!(
            "max n |lambda_n| = {all} exceeds the claimed bound {c}"
        ))),
        Some(_) => Ok(all),
        None if n_max >= 64 && late > 2.0 * head => Err(Error::Hypothesis(format!(
            "n |lambda_n| grows from {head} to {late}; eigenvalues do not decay like C/n"
        ))),
        None => Ok(all),
    }
}

/// Real and imaginary Lidskii profiles.
pub fn lidskii_profiles(eigs: &EigList, mode: &LidskiiMode, limit: Option<f64>) -> Result<(MeanProfile, MeanProfile)> {
    let (log_t, sums): (Vec<f64>, Vec<Complex64>) = match mode {
        LidskiiMode::SortedSum => {
            let n_max = limit.map_or(eigs.len(), |l| (l.floor() as u64).min(eigs.len()));
            let mut ns: Vec<u64> = Vec::new();
            let mut k = 0u32;
            loop {
                let n = (k as f64 * GRID_STEP_LOG2).exp2().round() as u64;
                if n > n_max {
                    break;
                }
                if ns.last() != Some(&n) {
                    ns.push(n);
                }
                k += 1;
            }
            if ns.last() != Some(&n_max) && n_max > 0 {
                ns.push(n_max);
            }
            let sums = eigs.partial_sums_at(&ns);
            (ns.iter().map(|&n| (n as f64).ln()).collect(), sums)
        }
        LidskiiMode::Exclusion(g) => {
            g.validate()?;
            let mut items: Vec<(f64, Complex64, u64)> =
                eigs.entries().iter().map(|&(z, m)| (g.gauge(z), z, m)).collect();
            items.sort_by(|a, b| b.0.total_cmp(&a.0));
            // The data only covers t up to the entry time of its last element.
            let smallest = items.iter().map(|i| i.0).filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
            let t_max = limit.unwrap_or(f64::INFINITY).min(1.0 / smallest);
            let mut log_t = Vec::new();
            let mut sums = Vec::new();
            let (mut re, mut im) = (NeumaierSum::new(), NeumaierSum::new());
            let mut idx = 0;
            let mut k = 0u32;
            loop {
                let t = (k as f64 * GRID_STEP_LOG2).exp2();
                if t > t_max * (1.0 + 1e-12) {
                    break;
                }
                while idx < items.len() && items[idx].0 * t >= 1.0 {
                    let (_, z, m) = items[idx];
                    re.add(z.re * m as f64);
                    im.add(z.im * m as f64);
                    idx += 1;
                }
                log_t.push(t.ln());
                sums.push(Complex64::new(re.value(), im.value()));
                k += 1;
            }
            (log_t, sums)
        }
    };
    let denom: Vec<f64> = log_t.iter().map(|&u| u.exp().ln_1p()).collect();
    let re: Vec<f64> = sums.iter().zip(&denom).map(|(s, d)| s.re / d).collect();
    let im: Vec<f64> = sums.iter().zip(&denom).map(|(s, d)| s.im / d).collect();
    Ok((
        MeanProfile::new(log_t.clone(), re, GridKind::Geometric, "lidskii:re")?,
        MeanProfile::new(log_t, im, GridKind::Geometric, "lidskii:im")?,
    ))
}

/// Dixmier trace from eigenvalues ordered by modulus.
pub fn lidskii_trace(eigs: &EigList, cfg: &LidskiiConfig) -> Result<TraceReport> {
    if eigs.is_empty() {
        return Err(domain("eigenvalue list is empty"));
    }
    let n_all = eigs.len();
    let c_max = check_decay(eigs, n_all, cfg.bound)?;
    let (re, im) = lidskii_profiles(eigs, &cfg.mode, cfg.limit)?;
    if re.len() < 8 {
        return Err(Error::Fit(format!("lidskii profile has only {} samples", re.len())));
    }
    let window = default_tail_window(re.len());
    let inv = re.inverse_logs();
    let ext_re = extrapolate_values(re.values(), &inv, LimitModel::ConstPlusCOverLog, window)?;
    let ext_im = extrapolate_values(im.values(), &inv, LimitModel::ConstPlusCOverLog, window)?;
    let d_re = measurability_details(&re, cfg.tol)?;
    let d_im = measurability_details(&im, cfg.tol)?;
    let verdict = match (d_re.verdict, d_im.verdict) {
        (Measurability::Yes, Measurability::Yes) => Measurability::Yes,
        (Measurability::No, _) | (_, Measurability::No) => Measurability::No,
        _ => Measurability::Undecided,
    };
    let env = tail_envelope(&re, window)?;
    let mut interval = (env.lower, env.upper);
    if verdict == Measurability::Yes {
        interval = (interval.0.min(ext_re.value), interval.1.max(ext_re.value));
    }
    let complex = eigs.entries().iter().any(|(z, _)| z.im != 0.0);
    let value = if complex {
        TraceValue::Complex {
            re: ext_re.value,
            im: ext_im.value,
        }
    } else {
        TraceValue::Real(ext_re.value)
    };
    let mut r = TraceReport::new(Method::Lidskii, value, interval, 1.0);
    r.measurable = verdict;
    r.diag("grid_size", re.len() as f64);
    r.diag("eigenvalue_count", n_all as f64);
    r.diag("max_n_abs_lambda", c_max);
    r.diag("fit_residual_re", ext_re.residual);
    r.diag("fit_residual_im", ext_im.residual);
    r.diag("envelope_gap", env.gap);
    let im_env = tail_envelope(&im, window)?;
    r.diag("envelope_lower_im", im_env.lower);
    r.diag("envelope_upper_im", im_env.upper);
    r.echo("mode", cfg.mode);
    r.echo("limit", cfg.limit);
    r.echo("bound", cfg.bound);
    r.echo("tol", cfg.tol);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic_eigs(n: u64, phase: Complex64) -> EigList {
        EigList::from_values((1..=n).map(|k| phase / k as f64)).unwrap()
    }

    #[test]
    fn harmonic_eigenvalues() {
        let r = lidskii_trace(&harmonic_eigs(1 << 20, Complex64::new(1.0, 0.0)), &LidskiiConfig::default()).unwrap();
        assert!((r.value.re() - 1.0).abs() < 2e-3, "{r:?}");
        assert_eq!(r.measurable, Measurability::Yes);
        let r = lidskii_trace(&harmonic_eigs(1 << 20, Complex64::new(0.0, 1.0)), &LidskiiConfig::default()).unwrap();
        assert!(r.value.re().abs() < 1e-12 && (r.value.im() - 1.0).abs() < 2e-3, "{r:?}");
    }

    #[test]
    fn neighbourhood_shapes_agree() {
        let e = harmonic_eigs(1 << 20, Complex64::new(1.0, 0.0));
        let disc = LidskiiConfig {
            mode: LidskiiMode::Exclusion(Neighborhood::Disc { radius: 1.0 }),
            ..LidskiiConfig::default()
        };
        let square = LidskiiConfig {
            mode: LidskiiMode::Exclusion(Neighborhood::Square { half_side: 0.5 }),
            ..LidskiiConfig::default()
        };
        let a = lidskii_trace(&e, &disc).unwrap().value.re();
        let b = lidskii_trace(&e, &square).unwrap().value.re();
        assert!((a - 1.0).abs() < 2e-2 && (a - b).abs() < 2e-2, "{a} {b}");
    }

    #[test]
    fn alternating_pairs_cancel() {
        let e = EigList::from_values((1..=1u64 << 19).flat_map(|k| {
            let v = 1.0 / k as f64;
            [Complex64::new(v, 0.0), Complex64::new(-v, 0.0)]
        }))
        .unwrap();
        let r = lidskii_trace(&e, &LidskiiConfig::default()).unwrap();
        assert!(r.value.re().abs() < 2e-3, "{r:?}");
        assert_eq!(r.measurable, Measurability::Yes);
    }

    #[test]
    fn decay_hypothesis() {
        let slow = EigList::from_values((1..=4096u64).map(|k| Complex64::new((k as f64).powf(-0.5), 0.0))).unwrap();
        assert!(matches!(lidskii_trace(&slow, &LidskiiConfig::default()), Err(Error::Hypothesis(_))));
        let h = harmonic_eigs(4096, Complex64::new(1.0, 0.0));
        let cfg = LidskiiConfig {
            bound: Some(0.5),
            ..LidskiiConfig::default()
        };
        assert!(matches!(lidskii_trace(&h, &cfg), Err(Error::Hypothesis(_))));
    }
}
