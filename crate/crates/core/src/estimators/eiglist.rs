use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numeric::NeumaierSum;

/// Eigenvalues with multiplicities, sorted by nonincreasing modulus; ties go
/// to the larger real part, then the larger imaginary part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigList {
    entries: Vec<(Complex64, u64)>,
}

pub(crate) fn eig_order(a: &Complex64, b: &Complex64) -> Ordering {
    b.norm()
        .total_cmp(&a.norm())
        .then(b.re.total_cmp(&a.re))
        .then(b.im.total_cmp(&a.im))
}

impl EigList {
    pub fn new(mut entries: Vec<(Complex64, u64)>) -> Result<Self> {
        if entries.iter().any(|(z, _)| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(domain("eigenvalues must be finite"));
        }
        if entries.iter().any(|&(_, m)| m == 0) {
            return Err(domain("multiplicities must be >= 1"));
        }
        entries.sort_by(|a, b| eig_order(&a.0, &b.0));
        Ok(Self { entries })
    }

    pub fn from_values(values: impl IntoIterator<Item = Complex64>) -> Result<Self> {
        Self::new(values.into_iter().map(|z| (z, 1)).collect())
    }

    pub fn entries(&self) -> &[(Complex64, u64)] {
        &self.entries
    }

    /// Total count with multiplicity.
    pub fn len(&self) -> u64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(|lambda|, mult)` runs, a singular-value sequence when the operator
    /// is normal.
    pub fn moduli(&self) -> impl Iterator<Item = (f64, u64)> + '_ {
        self.entries.iter().map(|(z, m)| (z.norm(), *m))
    }

    /// `sum_{i <= n} lambda_i` counted with multiplicity, at each requested
    /// `n` (nondecreasing).
    pub fn partial_sums_at(&self, ns: &[u64]) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(ns.len());
        let (mut re, mut im) = (NeumaierSum::new(), NeumaierSum::new());
        let mut pos = 0u64;
        let mut it = self.entries.iter().peekable();
        for &n in ns {
            while let Some(&&(z, m)) = it.peek() {
                if pos + m > n {
                    break;
                }
                re.add(z.re * m as f64);
                im.add(z.im * m as f64);
                pos += m;
                it.next();
            }
            let (mut r, mut i) = (re.value(), im.value());
            if let Some(&&(z, _)) = it.peek() {
                let extra = n.saturating_sub(pos) as f64;
                r += z.re * extra;
                i += z.im * extra;
            }
            out.push(Complex64::new(r, i));
        }
        out
    }
}
