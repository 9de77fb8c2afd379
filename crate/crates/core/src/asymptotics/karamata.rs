use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numeric::NeumaierSum;

use super::envelope::{envelope_of, Envelope};

/// Laplace-side and direct-side envelopes of a nondecreasing `beta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KaramataProbe {
    /// Envelope of `h(r)/r` with `h(r) = int e^{-t/r} d beta(t)`.
    pub c_transform: Envelope,
    /// Envelope of `beta(t)/t` at `t = r`.
    pub c_direct: Envelope,
    pub transform: Vec<f64>,
    pub direct: Vec<f64>,
}

/// Samples `(t_i, beta(t_i))` of a nondecreasing function with `beta(0) = 0`.
///
/// The Stieltjes integral uses the exponential weight at each cell midpoint.
/// The sample must extend to `T >= 30 r` for every `r` so the truncated
/// integral misses at most `e^{-30}` of the mass.
pub fn karamata_probe(t: &[f64], beta: &[f64], r_grid: &[f64], window: usize) -> Result<KaramataProbe> {
    if t.len() != beta.len() || t.len() < 2 {
        return Err(domain("beta samples and abscissae must match and have >= 2 points"));
    }
    if t[0] != 0.0 || beta[0] != 0.0 {
        return Err(domain("beta must be sampled from t = 0 with beta(0) = 0"));
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(domain("abscissae must be strictly increasing"));
    }
    if beta.windows(2).any(|w| w[1] < w[0]) {
        return Err(domain("beta must be nondecreasing"));
    }
    if r_grid.windows(2).any(|w| !(w[1] > w[0])) || r_grid.first().is_none_or(|&r| r <= 0.0) {
        return Err(domain("r grid must be positive and increasing"));
    }
    let t_end = *t.last().expect("nonempty");
    let r_max = *r_grid.last().expect("nonempty");
    if r_max * 30.0 > t_end * (1.0 + 1e-9) {
        return Err(domain(format!("r = {r_max} needs samples up to {}, have {t_end}", 30.0 * r_max)));
    }
    let transform: Vec<f64> = r_grid
        .iter()
        .map(|&r| {
            let mut acc = NeumaierSum::new();
            for i in 0..t.len() - 1 {
                let mid = 0.5 * (t[i] + t[i + 1]);
                acc.add((-mid / r).exp() * (beta[i + 1] - beta[i]));
            }
            acc.value() / r
        })
        .collect();
    let direct: Vec<f64> = r_grid.iter().map(|&r| interpolate(t, beta, r) / r).collect();
    let inv_log: Vec<f64> = r_grid.iter().map(|&r| 1.0 / r.ln_1p()).collect();
    Ok(KaramataProbe {
        c_transform: envelope_of(&transform, &inv_log, window)?,
        c_direct: envelope_of(&direct, &inv_log, window)?,
        transform,
        direct,
    })
}

fn interpolate(t: &[f64], y: &[f64], x: f64) -> f64 {
    let i = t.partition_point(|&s| s <= x).clamp(1, t.len() - 1);
    let (t0, t1) = (t[i - 1], t[i]);
    y[i - 1] + (y[i] - y[i - 1]) * (x - t0) / (t1 - t0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh(t_end: f64, n: usize) -> Vec<f64> {
        let mut t = vec![0.0];
        let lo: f64 = 1e-6;
        let ratio = (t_end / lo).powf(1.0 / (n - 1) as f64);
        t.extend((0..n).map(|k| lo * ratio.powi(k as i32)));
        *t.last_mut().unwrap() = t_end;
        t
    }

    fn r_grid(r_max: f64, count: usize, ratio: f64) -> Vec<f64> {
        (0..count).rev().map(|k| r_max / ratio.powi(k as i32)).collect()
    }

    #[test]
    fn linear_beta_is_exact() {
        let t = mesh(1e6, 100_000);
        let b: Vec<f64> = t.iter().map(|&s| 3.0 * s).collect();
        let p = karamata_probe(&t, &b, &r_grid(1e6 / 30.0, 32, 1.25), 16).unwrap();
        for e in [p.c_transform, p.c_direct] {
            assert!((e.lower - 3.0).abs() < 1e-3 && (e.upper - 3.0).abs() < 1e-3, "{e:?}");
        }
    }

    #[test]
    fn sqrt_correction_converges() {
        let t = mesh(1e6, 100_000);
        let b: Vec<f64> = t.iter().map(|&s| s + s.sqrt()).collect();
        let p = karamata_probe(&t, &b, &r_grid(1e6 / 30.0, 32, 1.25), 16).unwrap();
        // h(r)/r = 1 + Gamma(3/2)/sqrt(r) exactly for this beta.
        let last = *p.transform.last().unwrap();
        let r: f64 = 1e6 / 30.0;
        assert!((last - (1.0 + 0.5 * std::f64::consts::PI.sqrt() / r.sqrt())).abs() < 1e-4);
        assert!((p.c_transform.mid() - 1.0).abs() < 2e-2 && (p.c_direct.mid() - 1.0).abs() < 2e-2);
    }

    #[test]
    fn log_periodic_beta_stays_apart() {
        let t = mesh(1e9, 200_000);
        let b: Vec<f64> = t.iter().map(|&s| s * (1.0 + 0.4 * s.max(1e-300).ln().sin())).collect();
        let p = karamata_probe(&t, &b, &r_grid(1e9 / 30.0, 96, 1.1), 80).unwrap();
        assert!(p.c_direct.gap > 0.3 && p.c_transform.gap > 0.3, "{:?} {:?}", p.c_direct, p.c_transform);
    }

    #[test]
    fn rejects_bad_input() {
        let t = vec![0.0, 1.0, 2.0];
        assert!(karamata_probe(&t, &[0.0, 2.0, 1.0], &[0.01], 4).is_err());
        assert!(karamata_probe(&t, &[0.0, 1.0, 2.0], &[1.0], 4).is_err());
    }
}
