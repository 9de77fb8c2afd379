use crate::error::{domain, Result};

/// Nonincreasing rearrangement of a finite list of nonnegative reals.
pub fn decreasing_rearrangement(values: &[f64]) -> Result<Vec<f64>> {
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(domain(format!("rearrangement needs finite nonnegative values, got {v}")));
    }
    let mut out = values.to_vec();
    out.sort_unstable_by(|a, b| b.total_cmp(a));
    // -0.0 and 0.0 compare apart under total_cmp; normalize.
    for v in out.iter_mut().rev() {
        if *v != 0.0 {
            break;
        }
        *v = 0.0;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_cases() {
        assert_eq!(decreasing_rearrangement(&[1.0, 3.0, 2.0]).unwrap(), vec![3.0, 2.0, 1.0]);
        assert!(decreasing_rearrangement(&[]).unwrap().is_empty());
        assert!(decreasing_rearrangement(&[1.0, -1.0]).is_err());
        assert!(decreasing_rearrangement(&[f64::NAN]).is_err());
    }

    #[test]
    fn matches_insertion_sort() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..1000).map(|_| rng.gen::<f64>()).collect();
        // Insertion sort written out as an independent oracle.
        let mut oracle: Vec<f64> = Vec::new();
        for &x in &xs {
            let pos = oracle.iter().position(|&y| y < x).unwrap_or(oracle.len());
            oracle.insert(pos, x);
        }
        let got = decreasing_rearrangement(&xs).unwrap();
        assert_eq!(got, oracle);
        assert_eq!(decreasing_rearrangement(&got).unwrap(), got);
    }
}
