use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numeric::{compensated_sum, NeumaierSum};

/// Periodic diagonal weights `a_n`, standing for a bounded operator that is
/// diagonal in the eigenbasis of `T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    period: Vec<f64>,
}

impl Weights {
    /// `a_n = period[(n-1) mod len]`.
    pub fn periodic(period: Vec<f64>) -> Result<Self> {
        if period.is_empty() || period.iter().any(|v| !v.is_finite()) {
            return Err(domain("weights need a nonempty finite period"));
        }
        Ok(Self { period })
    }

    pub fn unit() -> Self {
        Self { period: vec![1.0] }
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::periodic(vec![c])
    }

    /// `a_n = (-1)^n`.
    pub fn alternating() -> Self {
        Self { period: vec![-1.0, 1.0] }
    }

    pub fn period(&self) -> &[f64] {
        &self.period
    }

    pub fn at(&self, n: u64) -> f64 {
        self.period[((n - 1) % self.period.len() as u64) as usize]
    }

    /// Cesaro mean of the weights.
    pub fn mean(&self) -> f64 {
        compensated_sum(self.period.iter().copied()) / self.period.len() as f64
    }

    pub fn is_unit(&self) -> bool {
        self.period == [1.0]
    }

    /// Accumulates `a_n f_n` as `sum_r a_r (sum_{n = r mod P} f_n)`, so that
    /// scaling the weights scales the result exactly.
    pub(crate) fn accumulator(&self) -> ResidueSum<'_> {
        ResidueSum {
            weights: self,
            sums: vec![NeumaierSum::new(); self.period.len()],
        }
    }
}

pub(crate) struct ResidueSum<'a> {
    weights: &'a Weights,
    sums: Vec<NeumaierSum>,
}

impl ResidueSum<'_> {
    pub fn add(&mut self, n: u64, v: f64) {
        let p = self.sums.len() as u64;
        self.sums[((n - 1) % p) as usize].add(v);
    }

    pub fn value(&self) -> f64 {
        compensated_sum(self.weights.period.iter().zip(&self.sums).map(|(w, s)| w * s.value()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residue_sums_are_linear() {
        let w = Weights::alternating();
        assert_eq!((w.at(1), w.at(2), w.at(3)), (-1.0, 1.0, -1.0));
        assert_eq!(w.mean(), 0.0);
        let mut acc = w.accumulator();
        for n in 1..=5 {
            acc.add(n, n as f64);
        }
        assert_eq!(acc.value(), -1.0 + 2.0 - 3.0 + 4.0 - 5.0);
        assert!(Weights::periodic(vec![]).is_err());
    }
}
