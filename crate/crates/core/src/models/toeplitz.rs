use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::estimators::{cesaro_trace, CesaroConfig, TraceReport};

use super::lattice::circle_dirac_svals;

/// Toeplitz operator with monomial symbol `u = e^{i w theta}`, truncated to
/// Fourier modes `0..=N`. `xi` is the frequency of the translation-flow
/// variant `u = e_xi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzProblem {
    pub w: i64,
    pub n: u64,
    pub xi: f64,
}

impl ToeplitzProblem {
    /// Problem with `xi = 2 pi w`, the frequency matching winding `w`.
    pub fn new(w: i64, n: u64) -> Self {
        Self { w, n, xi: TAU * w as f64 }
    }
}

/// Index of the truncated Toeplitz operator, from an exact rank count.
///
/// The compression maps modes `0..=N` into modes `0..=N+w`. A square
/// truncation would always have index zero; this rectangular one keeps the
/// cokernel (`w > 0`) or kernel (`w < 0`) of the half-line operator.
pub fn toeplitz_truncated_index(prob: &ToeplitzProblem) -> Result<i64> {
    let w = prob.w;
    if (prob.n as i64) < w.abs() + 1 {
        return Err(domain(format!("truncation N={} must be >= |w| + 1 = {}", prob.n, w.abs() + 1)));
    }
    let cols = prob.n as usize + 1;
    let rows = (prob.n as i64 + w + 1) as usize;
    // Multiplication by e^{i w theta}: e_k -> e_{k+w}, dropped below mode 0.
    let mut m = vec![vec![0i128; cols]; rows];
    for k in 0..cols {
        if let Some(row) = usize::try_from(k as i64 + w).ok().and_then(|j| m.get_mut(j)) {
            row[k] = 1;
        }
    }
    let rank = bareiss_rank(m) as i64;
    let kernel = cols as i64 - rank;
    let cokernel = rows as i64 - rank;
    Ok(kernel - cokernel)
}

/// Rank of an integer matrix by fraction-free Gaussian elimination.
pub fn bareiss_rank(mut m: Vec<Vec<i128>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut prev = 1i128;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, p);
        for r in rank + 1..rows {
            for k in c + 1..cols {
                m[r][k] = (m[r][k] * m[rank][c] - m[r][c] * m[rank][k]) / prev;
            }
            m[r][c] = 0;
        }
        prev = m[rank][c];
        rank += 1;
    }
    rank
}

/// `(1/2) tau_omega(u [D, u*] (1 + D^2)^{-1/2})` for `u = e^{i w theta}`.
/// For monomials `u [D, u*] = -w`, so this is `-w/2` times the Cesaro
/// estimate for the circle model.
pub fn toeplitz_dixmier_index(w: i64, r: u64, cfg: &CesaroConfig) -> Result<TraceReport> {
    if r < 1000 {
        return Err(domain(format!("Dixmier index needs R >= 1000, got {r}")));
    }
    let circle = circle_dirac_svals(r)?;
    let factor = if w == 0 { 0.0 } else { -0.5 * w as f64 };
    let mut rep = cesaro_trace(&circle, cfg)?.scaled(factor, &[]);
    rep.diag("winding", w as f64);
    rep.echo("R", r);
    Ok(rep)
}

/// `(1/2 pi i) tau(u delta(u*))` for `u = e_xi` with `delta(e_xi) = i xi e_xi`:
/// the real-valued index `-xi / 2 pi`.
pub fn lesch_pairing(xi: f64) -> f64 {
    -xi / TAU
}
