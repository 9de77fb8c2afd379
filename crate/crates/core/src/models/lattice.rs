use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::{sphere_area, unit_ball_volume};
use crate::seqcore::{SingularSeq, Support};

/// Lattice points the torus model may enumerate.
pub const LATTICE_BUDGET: f64 = 1e8;

/// Singular values `(1 + k^2)^{-1/2}`, `|k| <= R`, of `(1 + D^2)^{-1/2}` for
/// the Dirac operator `-i d/dx` on the circle.
pub fn circle_dirac_svals(r: u64) -> Result<SingularSeq> {
    if r < 1 {
        return Err(Error::Model("circle model needs R >= 1".into()));
    }
    let runs = std::iter::once((1.0, 1)).chain((1..=r).map(|k| (lattice_value(k * k, 1), 2)));
    SingularSeq::from_runs(runs, Support::Truncation, &format!("circle:R={r}"))
}

/// Singular values `(1 + |k|^2)^{-n/2}` over `k in Z^n`, `|k| <= R`, of
/// `(1 + Laplacian)^{-n/2}` on the flat torus `(R/2 pi Z)^n`.
pub fn torus_laplacian_svals(n: u32, r: u64) -> Result<SingularSeq> {
    if !(1..=3).contains(&n) {
        return Err(Error::Model(format!("torus dimension must be 1, 2 or 3, got {n}")));
    }
    if r < 1 {
        return Err(Error::Model("torus model needs R >= 1".into()));
    }
    let cube = (2.0 * r as f64 + 1.0).powi(n as i32);
    if cube > LATTICE_BUDGET {
        return Err(Error::Cost(format!(
            "torus n={n}, R={r} enumerates {cube:.3e} lattice points, over the budget {LATTICE_BUDGET:e}"
        )));
    }
    let r2 = r * r;
    let mut counts = vec![0u64; r2 as usize + 1];
    let ri = r as i64;
    // Points ordered lexicographically in k; only the histogram of |k|^2 is kept.
    match n {
        1 => {
            for k in -ri..=ri {
                counts[(k * k) as usize] += 1;
            }
        }
        2 => {
            for a in -ri..=ri {
                let rest = r2 as i64 - a * a;
                let b_max = isqrt(rest);
                for b in -b_max..=b_max {
                    counts[(a * a + b * b) as usize] += 1;
                }
            }
        }
        _ => {
            for a in -ri..=ri {
                for b in -ri..=ri {
                    let rest = r2 as i64 - a * a - b * b;
                    if rest < 0 {
                        continue;
                    }
                    let c_max = isqrt(rest);
                    for c in -c_max..=c_max {
                        counts[(a * a + b * b + c * c) as usize] += 1;
                    }
                }
            }
        }
    }
    let runs = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(m, &c)| (lattice_value(m as u64, n), c));
    SingularSeq::from_runs(runs, Support::Truncation, &format!("torus:n={n},R={r}"))
}

/// `(1 + m)^{-n/2}`, evaluated the same way for the circle and the torus.
fn lattice_value(m: u64, n: u32) -> f64 {
    (1.0 + m as f64).sqrt().recip().powi(n as i32)
}

fn isqrt(x: i64) -> i64 {
    if x < 0 {
        return -1;
    }
    let mut s = (x as f64).sqrt() as i64;
    while s * s > x {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= x {
        s += 1;
    }
    s
}

/// `(2 pi)^{-n} 2^{floor(n/2)} Omega_{n-1} vol`: the Dixmier trace of
/// `|D|^{-n}` for the Dirac operator of an n-manifold of volume `vol`.
pub fn dirac_residue_constant(n: u32, vol: f64) -> f64 {
    (2.0 * PI).powi(-(n as i32)) * (1u64 << (n / 2)) as f64 * sphere_area(n) * vol
}

/// `(2 pi)^{-n} (Omega_{n-1}/n) vol`: the scalar analogue, the Dixmier trace
/// of `(1 + Laplacian)^{-n/2}` on functions.
pub fn laplacian_residue_constant(n: u32, vol: f64) -> f64 {
    (2.0 * PI).powi(-(n as i32)) * sphere_area(n) / n as f64 * vol
}

/// Target for the torus model: the unit-ball volume.
pub fn torus_target(n: u32) -> f64 {
    unit_ball_volume(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_enumeration() {
        let s = circle_dirac_svals(2).unwrap();
        let got: Vec<f64> = (1..=5).map(|n| s.value_at(n)).collect();
        let f = |x: f64| 1.0 / x.sqrt();
        assert_eq!(got, vec![1.0, f(2.0), f(2.0), f(5.0), f(5.0)]);
        assert_eq!(s.support_len(), Some(5));
    }

    #[test]
    fn torus_counts() {
        // n = 2, R = 2: |k|^2 in {0,1,2,4} with 1, 4, 4, 4 points.
        let s = torus_laplacian_svals(2, 2).unwrap();
        assert_eq!(s.support_len(), Some(13));
        assert_eq!(s.count_above(0.3), Some(9));
        let one = torus_laplacian_svals(1, 7).unwrap();
        let circ = circle_dirac_svals(7).unwrap();
        for n in 1..=15 {
            assert_eq!(one.value_at(n), circ.value_at(n));
        }
        assert!(matches!(torus_laplacian_svals(3, 300), Err(Error::Cost(_))));
        // Lattice count in the disc of radius 50 against pi r^2.
        let big = torus_laplacian_svals(2, 50).unwrap();
        let count = big.support_len().unwrap() as f64;
        assert!((count / (PI * 2500.0) - 1.0).abs() < 0.01);
    }

    #[test]
    fn residue_constants() {
        assert!((dirac_residue_constant(1, 2.0 * PI) - 2.0).abs() < 1e-15);
        let vol2 = (2.0 * PI).powi(2);
        assert!((laplacian_residue_constant(2, vol2) - PI).abs() < 1e-14);
        for n in 1..=3 {
            let vol = (2.0 * PI).powi(n as i32);
            assert!((laplacian_residue_constant(n, vol) - torus_target(n)).abs() < 1e-14);
        }
    }
}
