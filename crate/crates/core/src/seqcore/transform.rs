use crate::error::{domain, Result};
use crate::numeric::NeumaierSum;

/// The shift `T`, Cesaro operator `H` and dilation `D_n` on sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transform {
    Shift,
    Cesaro,
    Dilate(usize),
}

/// Applies `kind` to a finite prefix. Dilation output is cut to the input
/// length so transforms compose on a fixed window.
pub fn sequence_transform(kind: Transform, x: &[f64]) -> Result<Vec<f64>> {
    match kind {
        Transform::Shift => Ok(x.iter().skip(1).copied().collect()),
        Transform::Cesaro => {
            let mut acc = NeumaierSum::new();
            Ok(x
                .iter()
                .enumerate()
                .map(|(k, &v)| {
                    acc.add(v);
                    acc.value() / (k + 1) as f64
                })
                .collect())
        }
        Transform::Dilate(0) => Err(domain("dilation factor must be >= 1")),
        Transform::Dilate(n) => Ok((0..x.len()).map(|k| x[k / n]).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let h = sequence_transform(Transform::Cesaro, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(h, vec![1.0, 0.5, 1.0 / 3.0, 0.25]);
        let d = sequence_transform(Transform::Dilate(2), &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(d, vec![1.0, 1.0, 2.0, 2.0]);
        let t = sequence_transform(Transform::Shift, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t, vec![2.0, 3.0]);
        assert!(sequence_transform(Transform::Dilate(0), &[1.0]).is_err());
    }
}
