use std::f64::consts::E;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::numeric::{ln_one_plus_exp, power_term, NeumaierSum, PowerSum};

use super::rearrange::decreasing_rearrangement;

/// Beyond this argument the step extension is evaluated through the
/// log-space closed form; `2^52` keeps `floor(t)` exact.
const STEP_LIMIT: f64 = 4_503_599_627_370_496.0;
const LOG_STEP_LIMIT: f64 = 36.0;

/// How a finite list of singular values relates to the operator it stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    /// The list is a truncation of an infinite sequence; estimators complete
    /// the tail with a fitted power law.
    Truncation,
    /// The operator has finite rank: the sequence is zero past the list.
    FiniteRank,
}

/// Run-length table of a nonincreasing finite sequence.
#[derive(Clone, Debug)]
pub struct RunTable {
    values: Vec<f64>,
    counts: Vec<u64>,
    /// Position of the last element of each run (1-indexed).
    ends: Vec<u64>,
    /// Sum through the end of each run.
    sums: Vec<f64>,
    support: Support,
}

impl RunTable {
    /// Builds from `(value, multiplicity)` pairs already sorted nonincreasing.
    /// Equal neighbouring values are merged.
    pub fn from_sorted_runs(runs: impl IntoIterator<Item = (f64, u64)>, support: Support) -> Result<Self> {
        let mut values: Vec<f64> = Vec::new();
        let mut counts: Vec<u64> = Vec::new();
        for (v, c) in runs {
            if !(v.is_finite() && v >= 0.0) {
                return Err(domain(format!("singular value {v} is not a finite nonnegative number")));
            }
            if c == 0 {
                continue;
            }
            let v = if v == 0.0 { 0.0 } else { v };
            match values.last() {
                Some(&last) if last == v => *counts.last_mut().expect("paired") += c,
                Some(&last) if last < v => {
                    return Err(domain(format!("runs are not nonincreasing: {last} then {v}")))
                }
                _ => {
                    values.push(v);
                    counts.push(c);
                }
            }
        }
        let mut ends = Vec::with_capacity(values.len());
        let mut sums = Vec::with_capacity(values.len());
        let mut pos = 0u64;
        let mut acc = NeumaierSum::new();
        for (&v, &c) in values.iter().zip(&counts) {
            pos += c;
            acc.add(v * c as f64);
            ends.push(pos);
            sums.push(acc.value());
        }
        Ok(Self {
            values,
            counts,
            ends,
            sums,
            support,
        })
    }

    pub fn len(&self) -> u64 {
        self.ends.last().copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn runs(&self) -> impl Iterator<Item = (f64, u64)> + '_ {
        self.values.iter().copied().zip(self.counts.iter().copied())
    }

    pub fn total(&self) -> f64 {
        self.sums.last().copied().unwrap_or(0.0)
    }

    fn run_of(&self, n: u64) -> Option<usize> {
        if n == 0 || n > self.len() {
            return None;
        }
        Some(self.ends.partition_point(|&e| e < n))
    }

    fn value(&self, n: u64) -> f64 {
        self.run_of(n).map_or(0.0, |i| self.values[i])
    }

    fn sum_to(&self, n: u64) -> f64 {
        if n >= self.len() {
            return self.total();
        }
        match self.run_of(n) {
            None => 0.0,
            Some(i) => {
                let (before_sum, before_pos) = if i == 0 { (0.0, 0) } else { (self.sums[i - 1], self.ends[i - 1]) };
                before_sum + (n - before_pos) as f64 * self.values[i]
            }
        }
    }

    fn count_above(&self, thr: f64) -> u64 {
        let i = self.values.partition_point(|&v| v > thr);
        if i == 0 {
            0
        } else {
            self.ends[i - 1]
        }
    }

    /// `sup_n n * mu_n`, attained at run ends.
    fn max_n_mu(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.ends)
            .map(|(&v, &e)| v * e as f64)
            .fold(0.0, f64::max)
    }
}

/// Generator families for singular-value sequences.
#[derive(Clone, Debug)]
pub enum SeqKind {
    /// `mu_n = n^{-alpha}`.
    Power { alpha: f64, sums: Arc<PowerSum> },
    /// Partial sums `log(1+t) (1 + a sin(b log log(t+e)))`, values by differencing.
    Oscillating { a: f64, b: f64 },
    /// `mu_n = r^n`.
    Geometric { ratio: f64 },
    /// Explicit finite data.
    Runs(Arc<RunTable>),
}

/// A nonincreasing nonnegative sequence `mu_1 >= mu_2 >= ...` standing for
/// the singular values of an operator, together with the step-function
/// picture `mu_s = mu_n` on `[n-1, n)`.
///
/// Every sequence is `scale` times a normalized generator. Estimators work on
/// the generator and multiply at the end, which makes them exactly
/// homogeneous under `mu -> c mu`.
#[derive(Clone, Debug)]
pub struct SingularSeq {
    kind: SeqKind,
    scale: f64,
    bound_constant: Option<f64>,
    label: String,
}

impl SingularSeq {
    /// `mu_n = c / n`.
    pub fn harmonic(c: f64) -> Result<Self> {
        Self::power_law(1.0, c)
    }

    /// `mu_n = c n^{-1/p}`, the model sequence of `L^{(p,inf)}`.
    pub fn power(p: f64, c: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::Model(format!("power model needs p >= 1, got {p}")));
        }
        Self::power_law(1.0 / p, c)
    }

    fn power_law(alpha: f64, c: f64) -> Result<Self> {
        check_scale(c)?;
        let label = if alpha == 1.0 {
            format!("harmonic:c={c}")
        } else {
            format!("power:p={},c={c}", 1.0 / alpha)
        };
        Ok(Self {
            kind: SeqKind::Power {
                alpha,
                sums: Arc::new(PowerSum::new(alpha)),
            },
            scale: c,
            bound_constant: (alpha >= 1.0).then_some(c),
            label,
        })
    }

    /// Oscillating model with Cesaro profile `1 + a sin(b log log(t+e))`.
    pub fn oscillating(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Model(format!("osc model needs a, b >= 0, got a={a}, b={b}")));
        }
        if a * (1.0 + b) >= 0.98 {
            return Err(Error::Model(format!(
                "osc model requires a(1+b) < 0.98 for positivity, got {}",
                a * (1.0 + b)
            )));
        }
        Ok(Self {
            kind: SeqKind::Oscillating { a, b },
            scale: 1.0,
            bound_constant: Some(1.0 + a * (1.0 + b)),
            label: format!("osc:a={a},b={b}"),
        })
    }

    /// `mu_n = c r^n`, a trace-class sequence.
    pub fn geometric(ratio: f64, c: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Model(format!("geometric ratio must lie in (0, 1), got {ratio}")));
        }
        check_scale(c)?;
        // sup_n n r^n sits next to n = -1/ln r.
        let peak = (-1.0 / ratio.ln()).max(1.0);
        let bound = [peak.floor().max(1.0), peak.ceil()]
            .iter()
            .map(|&n| n * ratio.powf(n))
            .fold(0.0, f64::max);
        Ok(Self {
            kind: SeqKind::Geometric { ratio },
            scale: c,
            bound_constant: Some(c * bound),
            label: format!("geom:r={ratio},c={c}"),
        })
    }

    /// Explicit data; the values are rearranged nonincreasingly.
    pub fn from_values(values: &[f64], support: Support) -> Result<Self> {
        let sorted = decreasing_rearrangement(values)?;
        Self::from_runs(sorted.into_iter().map(|v| (v, 1)), support, "explicit")
    }

    /// Explicit data given as `(value, multiplicity)` runs in nonincreasing order.
    pub fn from_runs(runs: impl IntoIterator<Item = (f64, u64)>, support: Support, label: &str) -> Result<Self> {
        let table = RunTable::from_sorted_runs(runs, support)?;
        let bound = table.max_n_mu();
        Ok(Self {
            kind: SeqKind::Runs(Arc::new(table)),
            scale: 1.0,
            bound_constant: Some(bound),
            label: label.to_string(),
        })
    }

    pub fn kind(&self) -> &SeqKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn bound_constant(&self) -> Option<f64> {
        self.bound_constant
    }

    /// Replaces the claimed constant `C` in `mu_n <= C / n`, checking it on a
    /// sampled prefix.
    pub fn with_bound_constant(mut self, c: Option<f64>) -> Result<Self> {
        if let Some(c) = c {
            for n in sample_positions(self.support_len()) {
                let v = self.value_at(n);
                if v > c / n as f64 * (1.0 + 1e-12) {
                    return Err(Error::Model(format!(
                        "claimed bound mu_n <= {c}/n fails at n={n} (mu_n={v})"
                    )));
                }
            }
        }
        self.bound_constant = c;
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `c * mu`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        check_scale(c)?;
        Ok(Self {
            kind: self.kind.clone(),
            scale: self.scale * c,
            bound_constant: self.bound_constant.map(|b| b * c),
            label: format!("{}*{c}", self.label),
        })
    }

    /// The generator with unit scale.
    pub fn unscaled(&self) -> Self {
        Self {
            kind: self.kind.clone(),
            scale: 1.0,
            bound_constant: self.bound_constant.map(|b| b / self.scale),
            label: self.label.clone(),
        }
    }

    /// Pointwise power `mu^p`.
    pub fn powered(&self, p: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(domain(format!("exponent must be positive, got {p}")));
        }
        let scale = self.scale.powf(p);
        let kind = match &self.kind {
            SeqKind::Power { alpha, .. } => SeqKind::Power {
                alpha: alpha * p,
                sums: Arc::new(PowerSum::new(alpha * p)),
            },
            SeqKind::Geometric { ratio } => SeqKind::Geometric { ratio: ratio.powf(p) },
            SeqKind::Runs(t) => SeqKind::Runs(Arc::new(RunTable::from_sorted_runs(
                t.runs().map(|(v, c)| (v.powf(p), c)),
                t.support(),
            )?)),
            SeqKind::Oscillating { .. } => {
                return Err(Error::Model("oscillating model has no closed form for powers".into()))
            }
        };
        let mut out = Self {
            kind,
            scale,
            bound_constant: None,
            label: format!("({})^{p}", self.label),
        };
        out.bound_constant = match &out.kind {
            SeqKind::Power { alpha, .. } if *alpha >= 1.0 => Some(scale),
            SeqKind::Runs(t) => Some(t.max_n_mu()),
            _ => None,
        };
        Ok(out)
    }

    /// Number of stored values for explicit data, `None` for infinite generators.
    pub fn support_len(&self) -> Option<u64> {
        match &self.kind {
            SeqKind::Runs(t) => Some(t.len()),
            _ => None,
        }
    }

    pub fn support(&self) -> Option<Support> {
        match &self.kind {
            SeqKind::Runs(t) => Some(t.support()),
            _ => None,
        }
    }

    /// Whether `partial_sum_log` is available for every `u`.
    pub fn has_log_closed_form(&self) -> bool {
        match &self.kind {
            SeqKind::Runs(t) => t.support() == Support::FiniteRank,
            _ => true,
        }
    }

    /// `mu_n`, 1-indexed.
    pub fn value_at(&self, n: u64) -> f64 {
        self.scale * self.base_value(n)
    }

    fn base_value(&self, n: u64) -> f64 {
        if n == 0 {
            return f64::INFINITY;
        }
        match &self.kind {
            SeqKind::Power { alpha, .. } => power_term(n as f64, *alpha),
            SeqKind::Oscillating { a, b } => osc_increment(*a, *b, n),
            SeqKind::Geometric { ratio } => ratio.powf(n as f64),
            SeqKind::Runs(t) => t.value(n),
        }
    }

    fn base_sum_to(&self, n: u64) -> f64 {
        match &self.kind {
            SeqKind::Power { sums, .. } => sums.at(n),
            SeqKind::Oscillating { a, b } => osc_sigma(*a, *b, n as f64),
            SeqKind::Geometric { ratio } => ratio * (1.0 - ratio.powf(n as f64)) / (1.0 - ratio),
            SeqKind::Runs(t) => t.sum_to(n),
        }
    }

    /// `int_0^t mu_s ds` for the step extension.
    pub fn partial_sum(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(domain(format!("partial sum needs t >= 0, got {t}")));
        }
        if t >= STEP_LIMIT {
            return Ok(self.partial_sum_log(t.ln()).unwrap_or_else(|| {
                // Only truncated data lands here; past its support the sum is frozen.
                self.scale * self.base_sum_to(u64::MAX)
            }));
        }
        let n = t.floor();
        let frac = t - n;
        let n = n as u64;
        let mut s = self.base_sum_to(n);
        if frac > 0.0 {
            s += frac * self.base_value(n + 1);
        }
        Ok(self.scale * s)
    }

    /// `sigma(e^u)` through the asymptotic closed form, for `u` beyond the
    /// range where the step extension is evaluated directly.
    pub fn partial_sum_log(&self, u: f64) -> Option<f64> {
        let base = match &self.kind {
            SeqKind::Power { sums, .. } => sums.at_log(u),
            SeqKind::Oscillating { a, b } => {
                let lnln = (u + (1.0 - u).exp().ln_1p()).ln();
                ln_one_plus_exp(u) * (1.0 + a * (b * lnln).sin())
            }
            SeqKind::Geometric { ratio } => ratio / (1.0 - ratio),
            SeqKind::Runs(t) => match t.support() {
                Support::FiniteRank => t.total(),
                Support::Truncation => return None,
            },
        };
        Some(self.scale * base)
    }

    /// Cesaro mean `g(t) = sigma(t) / log(1+t)` at `t = e^u`.
    pub fn profile_at_log(&self, u: f64) -> Result<f64> {
        if u <= LOG_STEP_LIMIT {
            let t = u.exp();
            return Ok(self.partial_sum(t)? / t.ln_1p());
        }
        Ok(self.partial_sum_at_log(u)? / ln_one_plus_exp(u))
    }

    /// `sigma(e^u)`: the step extension up to `e^36`, the closed form beyond.
    pub fn partial_sum_at_log(&self, u: f64) -> Result<f64> {
        if u <= LOG_STEP_LIMIT {
            return self.partial_sum(u.exp());
        }
        if let Some(len) = self.support_len() {
            if self.support() == Some(Support::Truncation) && u > (len as f64).ln() {
                return Err(Error::Cost(format!(
                    "t = e^{u} lies beyond the {len} stored values of a truncated sequence"
                )));
            }
        }
        self.partial_sum_log(u)
            .ok_or_else(|| Error::Cost("no log-space closed form for this sequence".into()))
    }

    /// `#{n : mu_n > thr}`; `None` if it exceeds `2^62`.
    pub fn count_above(&self, thr: f64) -> Option<u64> {
        if thr < 0.0 {
            return self.support_len().filter(|_| self.support() == Some(Support::FiniteRank));
        }
        let thr = thr / self.scale;
        const CAP: u64 = 1 << 62;
        let refine = |guess: f64| -> Option<u64> {
            if !(guess < CAP as f64) {
                return None;
            }
            let mut k = guess.max(0.0).ceil() as u64;
            k = k.saturating_sub(1);
            while k >= 1 && self.base_value(k) <= thr {
                k -= 1;
            }
            while self.base_value(k + 1) > thr {
                k += 1;
            }
            Some(k)
        };
        match &self.kind {
            SeqKind::Power { alpha, .. } => {
                if thr <= 0.0 {
                    return None;
                }
                refine(thr.powf(-1.0 / alpha))
            }
            SeqKind::Geometric { ratio } => {
                if thr <= 0.0 {
                    return None;
                }
                if thr >= 1.0 {
                    return Some(0);
                }
                refine(thr.ln() / ratio.ln())
            }
            SeqKind::Oscillating { .. } => {
                if thr <= 0.0 {
                    return None;
                }
                let mut hi = 1u64;
                while self.base_value(hi) > thr {
                    if hi >= CAP {
                        return None;
                    }
                    hi *= 2;
                }
                // mu_lo > thr >= mu_hi
                let mut lo = hi / 2;
                if lo == 0 || self.base_value(lo) <= thr {
                    return Some(0);
                }
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if self.base_value(mid) > thr {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Some(lo)
            }
            SeqKind::Runs(t) => Some(t.count_above(thr)),
        }
    }

    /// Largest relative monotonicity violation `(mu_{n+1} - mu_n) / mu_n` on
    /// the first `prefix` values and on geometric samples beyond.
    pub fn monotonicity_defect(&self, prefix: u64) -> f64 {
        let mut worst = 0.0f64;
        let mut check = |n: u64| {
            let a = self.base_value(n);
            let b = self.base_value(n + 1);
            if b > a && a > 0.0 {
                worst = worst.max((b - a) / a);
            }
        };
        let limit = self.support_len().unwrap_or(u64::MAX).saturating_sub(1);
        for n in 1..=prefix.min(limit) {
            check(n);
        }
        let mut n = prefix.max(1);
        while n < limit.min(1 << 60) {
            check(n);
            n = n * 5 / 4 + 1;
        }
        worst
    }

    /// Checks monotonicity to `1e-12` relative; the oscillating model, whose
    /// values come from differencing, is allowed `1e-6`.
    pub fn validate(&self) -> Result<f64> {
        let defect = self.monotonicity_defect(1 << 14);
        let tol = match self.kind {
            SeqKind::Oscillating { .. } => 1e-6,
            _ => 1e-12,
        };
        if defect > tol {
            return Err(Error::Model(format!(
                "sequence {} is not nonincreasing (relative defect {defect:e})",
                self.label
            )));
        }
        Ok(defect)
    }
}

fn check_scale(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::Model(format!("scale must be positive and finite, got {c}")))
    }
}

/// Positions used to spot-check claims on a sequence.
pub(crate) fn sample_positions(support: Option<u64>) -> Vec<u64> {
    let limit = support.unwrap_or(1 << 50).max(1);
    let mut out: Vec<u64> = (1..=4096u64.min(limit)).collect();
    let mut n = 4096u64;
    while n < limit {
        n = (n as f64 * 1.5) as u64;
        out.push(n.min(limit));
    }
    out.dedup();
    out
}

fn osc_sigma(a: f64, b: f64, t: f64) -> f64 {
    t.ln_1p() * (1.0 + a * (b * (t + E).ln().ln()).sin())
}

/// `sigma(n) - sigma(n-1)` for the oscillating model, arranged so that no
/// two nearly equal quantities are subtracted.
fn osc_increment(a: f64, b: f64, n: u64) -> f64 {
    let nf = n as f64;
    let m = nf - 1.0;
    let phase_n = b * (nf + E).ln().ln();
    let ln_m = (m + E).ln();
    let dphase = b * ((1.0 / (m + E)).ln_1p() / ln_m).ln_1p();
    let phase_m = phase_n - dphase;
    let dl = (1.0 / nf).ln_1p();
    let l_m = m.ln_1p();
    let dsin = 2.0 * (0.5 * (phase_n + phase_m)).cos() * (0.5 * dphase).sin();
    dl * (1.0 + a * phase_n.sin()) + l_m * a * dsin
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_step_sums() {
        let h = SingularSeq::harmonic(1.0).unwrap();
        assert!((h.partial_sum(3.0).unwrap() - 11.0 / 6.0).abs() < 1e-15);
        assert!((h.partial_sum(2.5).unwrap() - 5.0 / 3.0).abs() < 1e-15);
        assert!((h.partial_sum(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(h.partial_sum(-1.0).is_err());
        // H_1000 by direct summation.
        let direct: f64 = crate::numeric::compensated_sum((1..=1000).map(|n| 1.0 / n as f64));
        assert!((h.partial_sum(1000.0).unwrap() - direct).abs() < 1e-12);
        assert!((direct - 7.485_470_860_550_345).abs() < 1e-12);
    }

    #[test]
    fn constant_runs() {
        let s = SingularSeq::from_runs([(1.0, 10)], Support::FiniteRank, "ones").unwrap();
        assert_eq!(s.partial_sum(5.0).unwrap(), 5.0);
        assert_eq!(s.partial_sum(50.0).unwrap(), 10.0);
        assert_eq!(s.value_at(11), 0.0);
    }

    #[test]
    fn osc_increments_telescope_and_decrease() {
        let s = SingularSeq::oscillating(0.15, 4.0).unwrap();
        let mut acc = NeumaierSum::new();
        for n in 1..=200_000u64 {
            acc.add(s.value_at(n));
            if n % 50_000 == 0 || n < 10 {
                let closed = s.partial_sum(n as f64).unwrap();
                assert!((acc.value() - closed).abs() <= 1e-9 * closed, "n={n}");
            }
        }
        assert!(s.validate().unwrap() < 1e-12);
        // exact profile at integers
        for &n in &[10.0f64, 1e3, 1e6, 1e9] {
            let g = s.profile_at_log(n.ln()).unwrap();
            let expect = 1.0 + 0.15 * (4.0 * (n + E).ln().ln()).sin();
            assert!((g - expect).abs() < 1e-12, "n={n}: {g} vs {expect}");
        }
        assert!(SingularSeq::oscillating(0.3, 3.0).is_err());
    }

    #[test]
    fn counting_above_threshold() {
        let h = SingularSeq::harmonic(1.0).unwrap();
        assert_eq!(h.count_above(0.1), Some(9));
        assert_eq!(h.count_above(1.0 / 1000.5), Some(1000));
        let g = SingularSeq::geometric(0.5, 1.0).unwrap();
        assert_eq!(g.count_above(1.0 / 8.0), Some(2));
        let o = SingularSeq::oscillating(0.15, 4.0).unwrap();
        let k = o.count_above(1e-4).unwrap();
        assert!(o.value_at(k) > 1e-4 && o.value_at(k + 1) <= 1e-4);
    }

    #[test]
    fn log_space_agrees_with_direct() {
        let h = SingularSeq::harmonic(2.0).unwrap();
        let u: f64 = 35.0;
        let direct = h.partial_sum(u.exp()).unwrap();
        let logged = h.partial_sum_log(u).unwrap();
        assert!((direct - logged).abs() < 1e-12 * direct);
    }

    #[test]
    fn powered_models() {
        let p = SingularSeq::power(2.0, 3.0).unwrap().powered(2.0).unwrap();
        assert!((p.value_at(7) - 9.0 / 7.0).abs() < 1e-14);
        assert_eq!(p.bound_constant(), Some(9.0));
        assert!(SingularSeq::oscillating(0.1, 1.0).unwrap().powered(2.0).is_err());
    }

    #[test]
    fn bound_constant_is_checked() {
        let h = SingularSeq::harmonic(1.0).unwrap();
        assert!(h.clone().with_bound_constant(Some(1.0)).is_ok());
        assert!(h.with_bound_constant(Some(0.5)).is_err());
        let p = SingularSeq::power(2.0, 1.0).unwrap();
        assert!(p.with_bound_constant(Some(10.0)).is_err());
    }
}
