use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{domain, Error, Result};
use crate::estimators::EigList;

/// Largest dimension accepted by the eigensolver.
pub const MAX_DIM: usize = 512;
const HERMITIAN_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 50;

/// Square complex matrix, row-major, with structural flags that are checked
/// when set.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<Complex64>,
    hermitian: bool,
    lower_triangular: bool,
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        self.hermitian = false;
        self.lower_triangular = false;
        &mut self.data[i * self.n + j]
    }
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
            hermitian: false,
            lower_triangular: false,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![Complex64::new(1.0, 0.0); n])
    }

    pub fn diag(d: &[Complex64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.data[i * d.len() + i] = v;
        }
        m
    }

    pub fn real_diag(d: &[f64]) -> Self {
        let mut m = Self::diag(&d.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>());
        m.hermitian = true;
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(domain("matrix rows must form a square"));
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let c: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&c)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_lower_triangular(&self) -> bool {
        self.lower_triangular
    }

    /// Sets the Hermitian flag after checking `|m_ij - conj(m_ji)|`.
    pub fn into_hermitian(mut self) -> Result<Self> {
        let scale = self.max_abs().max(1.0);
        for i in 0..self.n {
            for j in i..self.n {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                if d > HERMITIAN_TOL * scale {
                    return Err(Error::Validation(format!(
                        "matrix is not Hermitian: entry ({i},{j}) differs from its mirror by {d:e}"
                    )));
                }
            }
        }
        self.hermitian = true;
        Ok(self)
    }

    /// Sets the lower-triangular flag after checking the strict upper part.
    pub fn into_lower_triangular(mut self) -> Result<Self> {
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self[(i, j)] != Complex64::new(0.0, 0.0) {
                    return Err(Error::Validation(format!("entry ({i},{j}) above the diagonal is nonzero")));
                }
            }
        }
        self.lower_triangular = true;
        Ok(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::from_fn(self.n, |i, j| self[(j, i)].conj());
        m.hermitian = self.hermitian;
        m
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// `a self + b other`; Hermitian when both are and the scalars are real.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut out = Self::from_fn(self.n, |i, j| self[(i, j)] * a + other[(i, j)] * b);
        out.hermitian = self.hermitian && other.hermitian;
        out
    }

    /// `u self u*`.
    pub fn conjugated_by(&self, u: &Self) -> Self {
        let mut out = u.mul(self).mul(&u.adjoint());
        if self.hermitian {
            out.symmetrize();
            out.hermitian = true;
        }
        out
    }

    fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            self.data[i * n + i].im = 0.0;
            for j in i + 1..n {
                let v = 0.5 * (self.data[i * n + j] + self.data[j * n + i].conj());
                self.data[i * n + j] = v;
                self.data[j * n + i] = v.conj();
            }
        }
    }

    fn check_square_dim(&self) -> Result<()> {
        if self.n > MAX_DIM {
            return Err(domain(format!("dimension {} exceeds the limit {MAX_DIM}", self.n)));
        }
        Ok(())
    }
}

/// Eigen-decomposition `m = V diag(values) V*`, values ascending.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Eigenvectors as columns.
    pub vectors: DenseMatrix,
}

/// Cyclic Jacobi for complex Hermitian matrices. Each step removes the
/// phase of the pivot with a diagonal unitary, then applies a real plane
/// rotation.
pub fn eigh(m: &DenseMatrix) -> Result<Eigh> {
    m.check_square_dim()?;
    let m = if m.is_hermitian() { m.clone() } else { m.clone().into_hermitian()? };
    let n = m.n;
    let mut a = m.data.clone();
    let mut v = DenseMatrix::identity(n).data;
    let norm = m.frobenius_norm();
    let off = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    for i in 0..n {
        a[i * n + i].im = 0.0;
    }
    let mut converged = n < 2 || norm == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged || off(&a) <= 1e-15 * norm {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r == 0.0 || r < 1e-300 {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                if r <= 1e-18 * (app.abs() + aqq.abs()) {
                    a[p * n + q] = Complex64::new(0.0, 0.0);
                    a[q * n + p] = Complex64::new(0.0, 0.0);
                    continue;
                }
                // Diagonal unitary with e^{-i phi} at q makes the pivot real.
                let phase = apq / r;
                let ph_c = phase.conj();
                for k in 0..n {
                    a[k * n + q] *= ph_c;
                    v[k * n + q] *= ph_c;
                }
                for k in 0..n {
                    a[q * n + k] *= phase;
                }
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let x = a[k * n + p];
                    let y = a[k * n + q];
                    a[k * n + p] = x * c - y * s;
                    a[k * n + q] = x * s + y * c;
                    let x = v[k * n + p];
                    let y = v[k * n + q];
                    v[k * n + p] = x * c - y * s;
                    v[k * n + q] = x * s + y * c;
                }
                for k in 0..n {
                    let x = a[p * n + k];
                    let y = a[q * n + k];
                    a[p * n + k] = x * c - y * s;
                    a[q * n + k] = x * s + y * c;
                }
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;
            }
        }
    }
    if !converged && off(&a) > 1e-12 * norm {
        return Err(Error::Resolution(format!("Jacobi did not converge in {MAX_SWEEPS} sweeps")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let vectors = DenseMatrix::from_fn(n, |r, c| v[r * n + order[c]]);
    Ok(Eigh { values, vectors })
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigs(m: &DenseMatrix) -> Result<Vec<f64>> {
    Ok(eigh(m)?.values)
}

/// Singular values, nonincreasing: square roots of the eigenvalues of `m* m`.
pub fn matrix_svals(m: &DenseMatrix) -> Result<Vec<f64>> {
    m.check_square_dim()?;
    let mut g = m.adjoint().mul(m);
    g.symmetrize();
    g.hermitian = true;
    let mut s: Vec<f64> = hermitian_eigs(&g)?.into_iter().map(|x| x.max(0.0).sqrt()).collect();
    s.reverse();
    Ok(s)
}

/// Lower-triangular part `x_ij` for `i >= j`.
pub fn triangular_truncate(x: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::from_fn(x.n, |i, j| if i >= j { x[(i, j)] } else { Complex64::new(0.0, 0.0) });
    out.lower_triangular = true;
    out
}

/// Eigenvalues of a lower-triangular matrix: its diagonal.
pub fn triangular_eig_list(x: &DenseMatrix) -> Result<EigList> {
    if !x.is_lower_triangular() {
        return Err(Error::Validation("triangular eigenvalues need the lower_triangular flag".into()));
    }
    EigList::from_values(x.diagonal())
}

/// Random Hermitian matrix with entries of unit scale.
pub fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n);
    for i in 0..n {
        m.data[i * n + i] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
        for j in i + 1..n {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            m.data[i * n + j] = z;
            m.data[j * n + i] = z.conj();
        }
    }
    m.hermitian = true;
    m
}

/// Random unitary `V diag(e^{i theta}) V*` from the eigenvectors `V` of a
/// random Hermitian matrix.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> DenseMatrix {
    let h = random_hermitian(n, rng);
    let v = eigh(&h).expect("random Hermitian matrices diagonalize").vectors;
    let phases: Vec<Complex64> = (0..n)
        .map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    v.mul(&DenseMatrix::diag(&phases)).mul(&v.adjoint())
}

/// Random positive semidefinite `B B*`.
pub fn random_psd<R: Rng>(n: usize, rng: &mut R) -> DenseMatrix {
    let b = DenseMatrix::from_fn(n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let mut p = b.mul(&b.adjoint());
    p.symmetrize();
    p.hermitian = true;
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn small_spectra() {
        let d = DenseMatrix::real_diag(&[3.0, 1.0, 2.0]);
        assert_eq!(hermitian_eigs(&d).unwrap(), vec![1.0, 2.0, 3.0]);
        let x = DenseMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = hermitian_eigs(&x).unwrap();
        assert!((e[0] + 1.0).abs() < 1e-15 && (e[1] - 1.0).abs() < 1e-15);
        let bad = DenseMatrix::from_real_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_eigs(&bad), Err(Error::Validation(_))));
    }

    #[test]
    fn reconstruction_and_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_hermitian(64, &mut rng);
        let e = eigh(&m).unwrap();
        let sum: f64 = e.values.iter().sum();
        assert!((sum - m.trace().re).abs() < 1e-9);
        let lam = DenseMatrix::real_diag(&e.values);
        let back = e.vectors.mul(&lam).mul(&e.vectors.adjoint());
        let resid = back.lin_comb(1.0, &m, -1.0).frobenius_norm();
        assert!(resid <= 1e-10 * m.frobenius_norm(), "{resid}");
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn singular_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unitary(4, &mut rng);
        for s in matrix_svals(&u).unwrap() {
            assert!((s - 1.0).abs() < 1e-12);
        }
        let d = DenseMatrix::diag(&[c(-2.0), c(1.0)]);
        let s = matrix_svals(&d).unwrap();
        assert!((s[0] - 2.0).abs() < 1e-15 && (s[1] - 1.0).abs() < 1e-15);
        // Operator norm by power iteration on m* m.
        let m = DenseMatrix::from_fn(10, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let g = m.adjoint().mul(&m);
        let mut x: Vec<Complex64> = (0..10).map(|i| c(1.0 + i as f64)).collect();
        let mut lam = 0.0;
        for _ in 0..2000 {
            let y: Vec<Complex64> = (0..10).map(|i| (0..10).map(|j| g[(i, j)] * x[j]).sum()).collect();
            lam = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            x = y.iter().map(|z| z / lam).collect();
        }
        assert!((matrix_svals(&m).unwrap()[0] - lam.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn triangular() {
        let x = DenseMatrix::from_real_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let t = triangular_truncate(&x);
        assert_eq!(t, DenseMatrix::from_real_rows(&[vec![1.0, 0.0], vec![3.0, 4.0]]).unwrap().into_lower_triangular().unwrap());
        assert!(t.is_lower_triangular());
        let d = DenseMatrix::diag(&[c(1.0), c(5.0)]);
        assert_eq!(triangular_truncate(&d).diagonal(), d.diagonal());
        assert_eq!(triangular_truncate(&d).frobenius_norm(), d.frobenius_norm());
    }
}
