use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numeric::NeumaierSum;

/// Banach-limit value interval of a bounded sequence, from window averages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuchestonEnvelope {
    pub lower: f64,
    pub upper: f64,
    pub windows: Vec<usize>,
    /// Running minimum of `sup_m` window averages, one entry per window.
    pub upper_path: Vec<f64>,
    /// Running maximum of `inf_m` window averages.
    pub lower_path: Vec<f64>,
}

impl SuchestonEnvelope {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// `sup_m (1/n) sum_{j<n} x_{m+j}` for each window `n`, reduced by a running
/// minimum. The raw sup is subadditive in `n`, so its infimum over `n` is
/// the limit and the running minimum is a monotone approximation to it.
pub fn sucheston_envelope(x: &[f64], windows: &[usize]) -> Result<SuchestonEnvelope> {
    if windows.is_empty() {
        return Err(domain("sucheston envelope needs at least one window"));
    }
    if windows.windows(2).any(|w| w[1] <= w[0]) || windows[0] == 0 {
        return Err(domain("windows must be positive and strictly increasing"));
    }
    let largest = *windows.last().expect("nonempty");
    if largest > x.len() {
        return Err(domain(format!(
            "window {largest} exceeds the sequence length {}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(domain("sequence must be finite"));
    }
    let mut prefix = Vec::with_capacity(x.len() + 1);
    let mut acc = NeumaierSum::new();
    prefix.push(0.0);
    for &v in x {
        acc.add(v);
        prefix.push(acc.value());
    }
    let mut upper_path = Vec::with_capacity(windows.len());
    let mut lower_path = Vec::with_capacity(windows.len());
    let (mut up, mut lo) = (f64::INFINITY, f64::NEG_INFINITY);
    for &n in windows {
        let (mut hi_avg, mut lo_avg) = (f64::NEG_INFINITY, f64::INFINITY);
        for m in 0..=x.len() - n {
            let avg = (prefix[m + n] - prefix[m]) / n as f64;
            hi_avg = hi_avg.max(avg);
            lo_avg = lo_avg.min(avg);
        }
        up = up.min(hi_avg);
        lo = lo.max(lo_avg);
        upper_path.push(up);
        lower_path.push(lo);
    }
    Ok(SuchestonEnvelope {
        lower: lo,
        upper: up,
        windows: windows.to_vec(),
        upper_path,
        lower_path,
    })
}

/// Dyadic windows `16, 32, ...` up to `max`.
pub fn dyadic_windows(max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = 16;
    while n <= max {
        out.push(n);
        n *= 2;
    }
    if out.is_empty() && max >= 1 {
        out.push(max);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlmostConvergence {
    pub verdict: bool,
    pub value: Option<f64>,
    pub gap: f64,
}

/// Lorentz almost convergence: all Banach limits agree to within `tol`.
///
/// The first quarter of the sequence is dropped as burn-in; Banach limits
/// ignore any finite head, and this keeps early transients out of the
/// window averages.
pub fn almost_convergence_verdict(x: &[f64], tol: f64) -> Result<AlmostConvergence> {
    let tail = &x[x.len() / 4..];
    let env = sucheston_envelope(tail, &dyadic_windows(tail.len() / 16))?;
    let gap = env.gap();
    let verdict = gap < tol;
    Ok(AlmostConvergence {
        verdict,
        value: verdict.then_some(0.5 * (env.lower + env.upper)),
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Blocks of zeros and ones with lengths 1, 2, 4, ...
    fn dyadic_blocks(len: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(len);
        let mut k = 0;
        while out.len() < len {
            let v = (k % 2) as f64;
            out.extend(std::iter::repeat_n(v, 1 << k));
            k += 1;
        }
        out.truncate(len);
        out
    }

    #[test]
    fn constants_and_alternation() {
        let c = vec![0.7; 4096];
        let e = sucheston_envelope(&c, &dyadic_windows(256)).unwrap();
        assert!((e.lower - 0.7).abs() < 1e-12 && (e.upper - 0.7).abs() < 1e-12);
        let alt: Vec<f64> = (1..=4096).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let e = sucheston_envelope(&alt, &dyadic_windows(256)).unwrap();
        assert_eq!((e.lower, e.upper), (0.0, 0.0));
        assert!(sucheston_envelope(&c, &[8192]).is_err());
    }

    #[test]
    fn dyadic_blocks_against_direct_scan() {
        let x = dyadic_blocks(1_000_000);
        let windows: Vec<usize> = (4..=10).map(|k| 1 << k).collect();
        let e = sucheston_envelope(&x, &windows).unwrap();
        assert!(e.lower < 0.05 && e.upper > 0.95, "{e:?}");
        // Direct scan of every window start without prefix sums.
        let n = 1024;
        let mut best = 0.0f64;
        let mut worst = 1.0f64;
        for m in (0..=x.len() - n).step_by(97) {
            let s: f64 = x[m..m + n].iter().sum();
            best = best.max(s / n as f64);
            worst = worst.min(s / n as f64);
        }
        assert!(e.upper >= best - 1e-12 && e.lower <= worst + 1e-12);
        assert!(e.upper_path.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn almost_convergence_examples() {
        let alt: Vec<f64> = (1..=100_000).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let v = almost_convergence_verdict(&alt, 1e-3).unwrap();
        assert!(v.verdict && v.value.unwrap().abs() < 1e-12);
        let dec: Vec<f64> = (1..=100_000).map(|k| 1.0 + 1.0 / k as f64).collect();
        let v = almost_convergence_verdict(&dec, 1e-3).unwrap();
        assert!(v.verdict && (v.value.unwrap() - 1.0).abs() < 1e-3, "{v:?}");
        let v = almost_convergence_verdict(&dyadic_blocks(1_000_000), 1e-3).unwrap();
        assert!(!v.verdict && v.value.is_none());
    }
}
