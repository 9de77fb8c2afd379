use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{domain, Error, Result};
use crate::numeric::{gauss_legendre_unit, NeumaierSum};

use super::matrix::{eigh, DenseMatrix, Eigh};

/// Eigenvalues closer to zero than this trigger the sample shift.
const NEAR_ZERO: f64 = 1e-9;
/// After the shift, eigenvalues closer to zero than this are unresolvable.
const UNRESOLVED: f64 = 1e-12;
/// Shift of a sample parameter, relative to the segment length.
const SAMPLE_SHIFT: f64 = 1e-7;
const MAX_HALVINGS: u32 = 12;
/// Eigenvalues of `G* G` above this count towards the overlap rank.
const OVERLAP_RANK_TOL: f64 = 1e-12;
const SPECTRUM_MATCH_TOL: f64 = 1e-10;
const NODE_MATCH_TOL: f64 = 1e-12;

/// Piecewise linear path of Hermitian matrices through `nodes` at
/// strictly increasing `times`.
#[derive(Clone, Debug)]
pub struct HermitianPath {
    nodes: Vec<DenseMatrix>,
    times: Vec<f64>,
}

impl HermitianPath {
    /// Nodes at equally spaced times on `[0, 1]`.
    pub fn new(nodes: Vec<DenseMatrix>) -> Result<Self> {
        let m = nodes.len();
        if m < 2 {
            return Err(domain("a path needs at least two nodes"));
        }
        let times = (0..m).map(|i| i as f64 / (m - 1) as f64).collect();
        Self::with_times(nodes, times)
    }

    pub fn with_times(nodes: Vec<DenseMatrix>, times: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != times.len() {
            return Err(domain("a path needs at least two nodes and one time per node"));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(domain("path times must be finite and strictly increasing"));
        }
        let d = nodes[0].dim();
        if d == 0 || nodes.iter().any(|m| m.dim() != d) {
            return Err(Error::Validation("path nodes must share a positive dimension".into()));
        }
        let nodes = nodes
            .into_iter()
            .map(|m| if m.is_hermitian() { Ok(m) } else { m.into_hermitian() })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { nodes, times })
    }

    /// Straight segment from `a` to `b`.
    pub fn linear(a: DenseMatrix, b: DenseMatrix) -> Result<Self> {
        Self::new(vec![a, b])
    }

    /// `(1 - t) D + t u D u*`.
    pub fn conjugation(d: &DenseMatrix, u: &DenseMatrix) -> Result<Self> {
        let d = if d.is_hermitian() { d.clone() } else { d.clone().into_hermitian()? };
        let end = d.conjugated_by(u);
        Self::linear(d, end)
    }

    pub fn dim(&self) -> usize {
        self.nodes[0].dim()
    }

    pub fn nodes(&self) -> &[DenseMatrix] {
        &self.nodes
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    fn segment_of(&self, t: f64) -> usize {
        let last = self.times.len() - 2;
        match self.times.iter().position(|&s| s > t) {
            Some(0) => 0,
            Some(i) => (i - 1).min(last),
            None => last,
        }
    }

    /// `D_t`, clamped to the parameter interval.
    pub fn at(&self, t: f64) -> DenseMatrix {
        let t = t.clamp(self.start(), self.end());
        let k = self.segment_of(t);
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let s = (t - t0) / (t1 - t0);
        if s == 0.0 {
            return self.nodes[k].clone();
        }
        if s == 1.0 {
            return self.nodes[k + 1].clone();
        }
        self.nodes[k].lin_comb(1.0 - s, &self.nodes[k + 1], s)
    }

    /// `dD_t/dt` on the segment containing `t`, right-continuous at nodes.
    pub fn derivative(&self, t: f64) -> DenseMatrix {
        self.segment_derivative(self.segment_of(t))
    }

    fn segment_derivative(&self, k: usize) -> DenseMatrix {
        let h = self.times[k + 1] - self.times[k];
        self.nodes[k + 1].lin_comb(1.0 / h, &self.nodes[k], -1.0 / h)
    }

    /// Follows `self`, then `other` translated in time to start at
    /// `self.end()`. The junction nodes must agree.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::Validation("concatenated paths must share a dimension".into()));
        }
        let a = &self.nodes[self.nodes.len() - 1];
        let b = &other.nodes[0];
        let gap = a.lin_comb(1.0, b, -1.0).max_abs();
        if gap > NODE_MATCH_TOL * a.max_abs().max(1.0) {
            return Err(Error::Validation(format!("paths do not join: endpoint mismatch {gap:e}")));
        }
        let offset = self.end() - other.start();
        let mut nodes = self.nodes.clone();
        let mut times = self.times.clone();
        nodes.extend(other.nodes[1..].iter().cloned());
        times.extend(other.times[1..].iter().map(|t| t + offset));
        Self::with_times(nodes, times)
    }

    /// Same image traversed backwards over the same parameter interval.
    pub fn reversed(&self) -> Self {
        let (a, b) = (self.start(), self.end());
        Self {
            nodes: self.nodes.iter().rev().cloned().collect(),
            times: self.times.iter().rev().map(|t| a + b - t).collect(),
        }
    }

    /// Same nodes reached at new times.
    pub fn reparametrized(&self, times: Vec<f64>) -> Result<Self> {
        Self::with_times(self.nodes.clone(), times)
    }

    /// Inserts `k - 1` equally spaced nodes into every segment.
    pub fn refined(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(domain("refinement factor must be >= 1"));
        }
        let mut nodes = vec![self.nodes[0].clone()];
        let mut times = vec![self.times[0]];
        for seg in 0..self.nodes.len() - 1 {
            let (t0, t1) = (self.times[seg], self.times[seg + 1]);
            for j in 1..=k {
                let s = j as f64 / k as f64;
                let node = if j == k {
                    self.nodes[seg + 1].clone()
                } else {
                    self.nodes[seg].lin_comb(1.0 - s, &self.nodes[seg + 1], s)
                };
                nodes.push(node);
                times.push(if j == k { t1 } else { t0 + s * (t1 - t0) });
            }
        }
        Self::with_times(nodes, times)
    }

    /// Spectrum at `t`, moved off a near-zero eigenvalue by a deterministic
    /// shift of the sample parameter (inward at the final endpoint).
    fn sample(&self, t: f64) -> Result<Eigh> {
        let e = eigh(&self.at(t))?;
        if min_abs(&e.values) >= NEAR_ZERO {
            return Ok(e);
        }
        let end = self.end();
        let k = self.segment_of(t);
        let h = SAMPLE_SHIFT * (self.times[k + 1] - self.times[k]);
        let shifted = if t >= end { t - h } else { t + h };
        let e = eigh(&self.at(shifted))?;
        let m = min_abs(&e.values);
        if m < UNRESOLVED {
            return Err(Error::Resolution(format!(
                "eigenvalue {m:e} at t = {t} stays within {UNRESOLVED:e} of zero after the shift"
            )));
        }
        Ok(e)
    }
}

fn min_abs(v: &[f64]) -> f64 {
    v.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()))
}

fn min_gap(v: &[f64]) -> f64 {
    v.windows(2).fold(f64::INFINITY, |m, w| m.min(w[1] - w[0]))
}

/// Signed count of sign changes between sorted-order matched spectra.
fn matched_crossings(a: &[f64], b: &[f64]) -> i64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| match (x > 0.0, y > 0.0) {
            (false, true) => 1,
            (true, false) => -1,
            _ => 0,
        })
        .sum()
}

/// Spectral flow by tracking eigenvalues through `steps` samples per
/// segment. Consecutive samples whose spectra move by more than half the
/// smallest gap are bisected.
pub fn spectral_flow_crossings(path: &HermitianPath, steps: usize) -> Result<i64> {
    if steps == 0 {
        return Err(domain("need at least one step per segment"));
    }
    let mut total = 0;
    for seg in 0..path.times.len() - 1 {
        let (t0, t1) = (path.times[seg], path.times[seg + 1]);
        let mut prev_t = t0;
        let mut prev = path.sample(t0)?.values;
        for j in 1..=steps {
            let t = if j == steps { t1 } else { t0 + (t1 - t0) * j as f64 / steps as f64 };
            let next = path.sample(t)?.values;
            total += crossings_between(path, prev_t, &prev, t, &next, 0)?;
            prev_t = t;
            prev = next;
        }
    }
    Ok(total)
}

fn crossings_between(path: &HermitianPath, ta: f64, a: &[f64], tb: f64, b: &[f64], depth: u32) -> Result<i64> {
    let moved = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if depth >= MAX_HALVINGS || moved <= 0.5 * min_gap(a) {
        return Ok(matched_crossings(a, b));
    }
    let tm = 0.5 * (ta + tb);
    let mid = path.sample(tm)?.values;
    Ok(crossings_between(path, ta, a, tm, &mid, depth + 1)? + crossings_between(path, tm, &mid, tb, b, depth + 1)?)
}

/// Positive spectral subspace as columns.
fn positive_basis(e: &Eigh) -> Vec<Vec<Complex64>> {
    let d = e.values.len();
    (0..d)
        .filter(|&c| e.values[c] > 0.0)
        .map(|c| (0..d).map(|r| e.vectors[(r, c)]).collect())
        .collect()
}

/// Index of `P_a P_b : ran P_b -> ran P_a` for positive spectral
/// projections with orthonormal bases `va`, `vb`.
fn projection_index(va: &[Vec<Complex64>], vb: &[Vec<Complex64>]) -> Result<(i64, i64)> {
    let (ka, kb) = (va.len(), vb.len());
    let rank = if ka == 0 || kb == 0 {
        0
    } else {
        let g: Vec<Vec<Complex64>> = va
            .iter()
            .map(|x| vb.iter().map(|y| x.iter().zip(y).map(|(p, q)| p.conj() * q).sum()).collect())
            .collect();
        let gg = DenseMatrix::from_fn(kb, |i, j| (0..ka).map(|c| g[c][i].conj() * g[c][j]).sum()).into_hermitian()?;
        eigh(&gg)?.values.iter().filter(|&&s| s > OVERLAP_RANK_TOL).count()
    };
    let kernel = (kb - rank) as i64;
    let cokernel = (ka - rank) as i64;
    Ok((kernel, cokernel))
}

/// Spectral flow as the sum of indices of `P_{t_{i-1}} P_{t_i}` over a
/// partition, `P_t` the positive spectral projection of `D_t`. The path
/// endpoints are added to the partition when missing.
///
/// A step where both kernel and cokernel are nonzero is rejected as too
/// coarse: the index is then blind to eigenvalues crossing in both
/// directions.
pub fn spectral_flow_partition(path: &HermitianPath, partition: &[f64]) -> Result<i64> {
    let (a, b) = (path.start(), path.end());
    if partition.iter().any(|&t| !(a..=b).contains(&t)) || partition.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("partition must be strictly increasing inside the path interval"));
    }
    let mut pts = Vec::with_capacity(partition.len() + 2);
    if partition.first() != Some(&a) {
        pts.push(a);
    }
    pts.extend_from_slice(partition);
    if partition.last() != Some(&b) {
        pts.push(b);
    }
    let mut total = 0;
    let mut prev = positive_basis(&path.sample(pts[0])?);
    for w in pts.windows(2) {
        let next = positive_basis(&path.sample(w[1])?);
        let (kernel, cokernel) = projection_index(&prev, &next)?;
        if kernel > 0 && cokernel > 0 {
            return Err(Error::PartitionTooCoarse(format!(
                "step [{}, {}] has kernel {kernel} and cokernel {cokernel}",
                w[0], w[1]
            )));
        }
        total += kernel - cokernel;
        prev = next;
    }
    Ok(total)
}

/// `int_R (1 + x^2)^{-n/2} dx`.
pub fn c_half(n: f64) -> f64 {
    std::f64::consts::PI.sqrt() * gamma((n - 1.0) / 2.0) / gamma(n / 2.0)
}

/// `(1/C_{n/2}) int Tr(D'_t (1 + D_t^2)^{-n/2}) dt` by Gauss-Legendre on
/// every segment. Only conjugation-type paths are accepted: the endpoint
/// spectra must agree.
pub fn spectral_flow_integral(path: &HermitianPath, n: f64, quad_points: usize) -> Result<f64> {
    if !(2.0..=6.0).contains(&n) {
        return Err(domain(format!("exponent n must lie in [2, 6], got {n}")));
    }
    if quad_points == 0 {
        return Err(domain("need at least one quadrature point"));
    }
    let e0 = eigh(&path.nodes[0])?.values;
    let e1 = eigh(&path.nodes[path.nodes.len() - 1])?.values;
    let mismatch = e0.iter().zip(&e1).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if mismatch > SPECTRUM_MATCH_TOL {
        return Err(Error::Validation(format!(
            "endpoints are not unitarily equivalent: spectra differ by {mismatch:e}"
        )));
    }
    let rule = gauss_legendre_unit(quad_points);
    let d = path.dim();
    let mut acc = NeumaierSum::new();
    for seg in 0..path.nodes.len() - 1 {
        let (t0, t1) = (path.times[seg], path.times[seg + 1]);
        let dot = path.segment_derivative(seg);
        for &(x, w) in &rule {
            let e = eigh(&path.at(t0 + x * (t1 - t0)))?;
            let v = &e.vectors;
            // Tr(Dot f(D)) = sum_j <v_j, Dot v_j> f(lambda_j).
            for (j, &lam) in e.values.iter().enumerate() {
                let mut quad = Complex64::new(0.0, 0.0);
                for r in 0..d {
                    let mut row = Complex64::new(0.0, 0.0);
                    for c in 0..d {
                        row += dot[(r, c)] * v[(c, j)];
                    }
                    quad += v[(r, j)].conj() * row;
                }
                acc.add(w * (t1 - t0) * quad.re * (1.0 + lam * lam).powf(-n / 2.0));
            }
        }
    }
    Ok(acc.value() / c_half(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::matrix::{random_hermitian, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag_path(a: &[f64], b: &[f64]) -> HermitianPath {
        HermitianPath::linear(DenseMatrix::real_diag(a), DenseMatrix::real_diag(b)).unwrap()
    }

    #[test]
    fn diagonal_crossing() {
        let p = diag_path(&[-1.0, 1.0], &[1.0, 2.0]);
        assert_eq!(spectral_flow_crossings(&p, 8).unwrap(), 1);
        assert_eq!(spectral_flow_partition(&p, &[0.0, 1.0]).unwrap(), 1);
        assert_eq!(spectral_flow_crossings(&p.reversed(), 8).unwrap(), -1);
        assert_eq!(spectral_flow_partition(&p.reversed(), &[0.0, 1.0]).unwrap(), -1);
    }

    #[test]
    fn additivity_and_trivial_partition() {
        let ab = diag_path(&[-1.0, -2.0, 3.0], &[1.0, -1.0, 3.0]);
        let bc = diag_path(&[1.0, -1.0, 3.0], &[1.0, 2.0, -4.0]);
        let ac = ab.concat(&bc).unwrap();
        assert_eq!(ac.end(), 2.0);
        let sum = spectral_flow_crossings(&ab, 16).unwrap() + spectral_flow_crossings(&bc, 16).unwrap();
        assert_eq!(spectral_flow_crossings(&ac, 16).unwrap(), sum);
        assert_eq!(sum, 1);
        let flat = diag_path(&[1.0, -1.0], &[2.0, -3.0]);
        assert_eq!(spectral_flow_partition(&flat, &[]).unwrap(), 0);
    }

    #[test]
    fn coarse_partition_is_rejected() {
        // One eigenvalue goes up through zero while another goes down.
        let p = diag_path(&[-1.0, 1.0], &[1.0, -1.0]);
        assert!(matches!(spectral_flow_partition(&p, &[0.0, 1.0]), Err(Error::PartitionTooCoarse(_))));
        assert_eq!(spectral_flow_crossings(&p, 8).unwrap(), 0);
    }

    #[test]
    fn zero_endpoint_is_shifted() {
        // The zero at t = 0 is read just inside the path, where it is
        // already positive, so nothing crosses.
        let p = diag_path(&[0.0, 1.0], &[1.0, 2.0]);
        assert_eq!(spectral_flow_crossings(&p, 4).unwrap(), 0);
        assert_eq!(spectral_flow_partition(&p, &[0.0, 0.5, 1.0]).unwrap(), 0);
        // At the final endpoint the shift points back into the path.
        let q = diag_path(&[-1.0, 1.0], &[0.0, 2.0]);
        assert_eq!(spectral_flow_crossings(&q, 4).unwrap(), 0);
        let r = diag_path(&[-1.0, 1.0], &[2.0, 0.0]);
        assert_eq!(spectral_flow_crossings(&r, 4).unwrap(), 1);
        assert_eq!(spectral_flow_partition(&r, &[0.0, 1.0]).unwrap(), 1);
        let stuck = diag_path(&[0.0, 1.0], &[0.0, 2.0]);
        assert!(matches!(spectral_flow_crossings(&stuck, 4), Err(Error::Resolution(_))));
    }

    #[test]
    fn c_half_values() {
        assert!((c_half(2.0) - std::f64::consts::PI).abs() < 1e-13);
        assert!((c_half(4.0) - std::f64::consts::PI / 2.0).abs() < 1e-13);
        assert!((c_half(3.0) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn integral_on_conjugation_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = random_hermitian(6, &mut rng);
        let u = random_unitary(6, &mut rng);
        let p = HermitianPath::conjugation(&d, &u).unwrap();
        let v3 = spectral_flow_integral(&p, 3.0, 40).unwrap();
        let v2 = spectral_flow_integral(&p, 2.0, 40).unwrap();
        assert!(v3.abs() < 1e-6 && (v3 - v2).abs() < 1e-6, "{v3} {v2}");
        let re = p.refined(3).unwrap().reparametrized(vec![0.0, 0.1, 0.5, 1.0]).unwrap();
        assert!(spectral_flow_integral(&re, 3.0, 40).unwrap().abs() < 1e-6);
        let open = diag_path(&[-1.0, 1.0], &[1.0, 2.0]);
        assert!(matches!(spectral_flow_integral(&open, 3.0, 8), Err(Error::Validation(_))));
    }

    #[test]
    fn integral_counts_flow_on_loops() {
        // The integrand is an exact one-form, so it integrates to zero over
        // any closed loop.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_hermitian(4, &mut rng);
        let b = random_hermitian(4, &mut rng);
        let mid = random_hermitian(4, &mut rng);
        let lp = HermitianPath::new(vec![a.clone(), mid, b, a]).unwrap();
        assert!(spectral_flow_integral(&lp, 4.0, 48).unwrap().abs() < 1e-6);
    }
}
