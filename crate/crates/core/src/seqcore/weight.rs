use std::f64::consts::LN_2;

use crate::error::{domain, Result};

use super::sequence::{SingularSeq, Support};

/// The concave weights `psi_1` and `psi_p` that define the Marcinkiewicz
/// spaces `L^{(1,inf)}` and `L^{(p,inf)}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightFunction {
    p: f64,
}

impl WeightFunction {
    pub fn new(p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(domain(format!("weight exponent must be >= 1, got {p}")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `psi_1(t) = t log 2` on `[0,1]`, `log(1+t)` beyond; `psi_p(t) = t` on
    /// `[0,1]`, `t^{1-1/p}` beyond.
    pub fn eval(&self, t: f64) -> f64 {
        if self.p == 1.0 {
            if t <= 1.0 {
                t * LN_2
            } else {
                t.ln_1p()
            }
        } else if t <= 1.0 {
            t
        } else {
            t.powf(1.0 - 1.0 / self.p)
        }
    }
}

/// Default sup grid: `t_k = t0 rho^k` with `t0 = 1/16`, `rho = 2^{1/8}`.
pub const SUP_GRID_START: f64 = 1.0 / 16.0;
pub const SUP_GRID_RATIO_LOG2: f64 = 1.0 / 8.0;
pub const SUP_GRID_INTEGERS: u64 = 64;

/// Geometric sup grid up to `horizon` merged with the integers up to 64.
pub fn sup_grid(horizon: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = (1..=SUP_GRID_INTEGERS)
        .map(|k| k as f64)
        .take_while(|&t| t <= horizon)
        .collect();
    let mut k = 0i32;
    loop {
        let t = SUP_GRID_START * (k as f64 * SUP_GRID_RATIO_LOG2).exp2();
        if t > horizon {
            break;
        }
        grid.push(t);
        k += 1;
    }
    grid.push(horizon);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// `sup_{t <= horizon} sigma(t) / psi_p(t)` over the sup grid.
pub fn marcinkiewicz_norm(seq: &SingularSeq, p: f64, horizon: f64) -> Result<f64> {
    let psi = WeightFunction::new(p)?;
    if !(horizon >= 1.0) {
        return Err(domain(format!("horizon must be >= 1, got {horizon}")));
    }
    let mut best = 0.0f64;
    for t in sup_grid(horizon) {
        best = best.max(seq.partial_sum(t)? / psi.eval(t));
    }
    Ok(best)
}

/// `x <<= y` up to `tol`: partial integrals of `x` never exceed those of `y`.
///
/// Step-function partial integrals are piecewise linear with breakpoints at
/// the integers, so integer checks up to `2^16` are exact there; the sup
/// grid covers the rest of the horizon.
pub fn submajorizes(x: &SingularSeq, y: &SingularSeq, horizon: f64, tol: f64) -> Result<bool> {
    if !(horizon >= 1.0) {
        return Err(domain(format!("horizon must be >= 1, got {horizon}")));
    }
    let dense = horizon.min(65536.0).floor() as u64;
    let mut points: Vec<f64> = (1..=dense).map(|k| k as f64).collect();
    points.extend(sup_grid(horizon).into_iter().filter(|&t| t > dense as f64));
    // Past a finite-rank support both integrals are frozen.
    let frozen = [x, y]
        .iter()
        .map(|s| match s.support() {
            Some(Support::FiniteRank) => s.support_len().map(|n| n as f64),
            _ => None,
        })
        .try_fold(0.0f64, |m, v| v.map(|v| m.max(v)));
    if let Some(end) = frozen {
        points.retain(|&t| t <= end.max(1.0));
    }
    for t in points {
        if x.partial_sum(t)? > y.partial_sum(t)? + tol {
            return Ok(false);
        }
    }
    Ok(true)
}
