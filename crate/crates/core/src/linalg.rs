//! Dense complex matrices and a Hermitian eigensolver.
//!
//! Matrices here are small (a Galerkin dimension of a few tens), so a dense
//! row-major layout and an O(N³) eigensolver are the right tools. The
//! eigensolver reduces a Hermitian matrix to real symmetric tridiagonal form
//! by Householder reflections and diagonalizes it with implicit-shift QL,
//! accumulating the complex unitary transform.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::{Error, Result};

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    n_rows: usize,
    n_cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        CMat {
            n_rows,
            n_cols,
            data: vec![Complex64::new(0.0, 0.0); n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(x.len(), self.n_cols);
        let mut y = vec![Complex64::new(0.0, 0.0); self.n_rows];
        for i in 0..self.n_rows {
            let row = &self.data[i * self.n_cols..(i + 1) * self.n_cols];
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, b) in row.iter().zip(x.iter()) {
                acc += a * b;
            }
            y[i] = acc;
        }
        y
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        debug_assert_eq!(self.n_cols, other.n_rows);
        let mut out = CMat::zeros(self.n_rows, other.n_cols);
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.n_cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMat {
        let mut out = CMat::zeros(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Largest skew-adjointness defect max |m_kj + conj(m_jk)|.
    pub fn skew_adjoint_defect(&self) -> (usize, usize, f64) {
        let mut worst = (0, 0, 0.0);
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                let d = (self[(i, j)] + self[(j, i)].conj()).norm();
                if d > worst.2 {
                    worst = (i, j, d);
                }
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    /// Spectral norm of a skew-adjoint matrix: iM is Hermitian, so the norm
    /// is the largest |eigenvalue| of iM.
    pub fn skew_spectral_norm(&self) -> Result<f64> {
        let n = self.n_rows;
        let mut h = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] = Complex64::new(0.0, 1.0) * self[(i, j)];
            }
        }
        let (vals, _) = eigh(&h)?;
        Ok(vals.iter().fold(0.0f64, |m, &v| m.max(libm::fabs(v))))
    }
}

impl core::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n_cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n_cols + j]
    }
}

pub fn vec_norm(x: &[Complex64]) -> f64 {
    libm::sqrt(x.iter().map(|z| z.norm_sqr()).sum())
}

pub fn vec_sub_norm(x: &[Complex64], y: &[Complex64]) -> f64 {
    libm::sqrt(
        x.iter()
            .zip(y.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum(),
    )
}

/// Eigendecomposition of a Hermitian matrix: returns eigenvalues in
/// ascending order and the unitary of eigenvectors as columns, so that
/// `H = V diag(w) V†`.
pub fn eigh(h: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = h.n_rows;
    debug_assert_eq!(n, h.n_cols);
    if n == 0 {
        return Ok((Vec::new(), CMat::zeros(0, 0)));
    }

    let mut a = h.clone();
    let mut q = CMat::identity(n);

    // Householder reduction to Hermitian tridiagonal form. After the loop the
    // subdiagonal entries of `a` are complex; a diagonal phase scaling below
    // makes them real nonnegative.
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1; // length of the column piece below the diagonal
        let mut x = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..m {
            x[i] = a[(k + 1 + i, k)];
        }
        let xnorm = vec_norm(&x);
        if xnorm == 0.0 {
            continue;
        }
        // alpha = -e^{i arg x0} ||x||, v = x - alpha e1
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = vec_norm(&v);
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }

        // Rank-2 Hermitian update of the trailing block: A <- A - v w† - w v†
        // with q = A v, w = 2 (q - (v† q) v).
        let base = k + 1;
        let mut qv = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..m {
                acc += a[(base + i, base + j)] * v[j];
            }
            qv[i] = acc;
        }
        let mut vq = Complex64::new(0.0, 0.0);
        for i in 0..m {
            vq += v[i].conj() * qv[i];
        }
        let mut w = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..m {
            w[i] = 2.0 * (qv[i] - vq * v[i]);
        }
        for i in 0..m {
            for j in 0..m {
                let upd = v[i] * w[j].conj() + w[i] * v[j].conj();
                a[(base + i, base + j)] -= upd;
            }
        }
        // Column k (and its mirror row) maps to alpha e1.
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in 1..m {
            a[(k + 1 + i, k)] = Complex64::new(0.0, 0.0);
            a[(k, k + 1 + i)] = Complex64::new(0.0, 0.0);
        }

        // Accumulate Q <- Q (I - 2 v v†) on the trailing columns.
        for r in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..m {
                acc += q[(r, base + j)] * v[j];
            }
            let acc2 = 2.0 * acc;
            for j in 0..m {
                let sub = acc2 * v[j].conj();
                q[(r, base + j)] -= sub;
            }
        }
    }

    // Phase-scale subdiagonals to real nonnegative: T = D† A D.
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n]; // e[i] couples i and i+1; e[n-1] unused
    let mut ph = vec![Complex64::new(1.0, 0.0); n];
    d[0] = a[(0, 0)].re;
    for i in 0..n - 1 {
        let sub = a[(i + 1, i)] * ph[i];
        let r = sub.norm();
        ph[i + 1] = if r > 0.0 {
            sub / r
        } else {
            Complex64::new(1.0, 0.0)
        };
        e[i] = r;
        d[i + 1] = a[(i + 1, i + 1)].re;
    }
    for r in 0..n {
        for c in 0..n {
            let p = ph[c];
            q[(r, c)] *= p;
        }
    }

    tql2(&mut d, &mut e, &mut q)?;

    // Sort ascending, permuting eigenvector columns.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(core::cmp::Ordering::Equal));
    let vals: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (new_c, &old_c) in order.iter().enumerate() {
        for r in 0..n {
            vecs[(r, new_c)] = q[(r, old_c)];
        }
    }
    Ok((vals, vecs))
}

/// Implicit-shift QL on a real symmetric tridiagonal (d, e), rotating the
/// columns of `z` along. Classic tql2/tqli scheme.
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut CMat) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = libm::fabs(d[m]) + libm::fabs(d[m + 1]);
                if libm::fabs(e[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::EigenDidNotConverge);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + libm::copysign(r, g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut broke = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let mut f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    broke = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z[(k, i + 1)].re;
                    let fi = z[(k, i + 1)].im;
                    let zr = z[(k, i)].re;
                    let zi = z[(k, i)].im;
                    z[(k, i + 1)] = Complex64::new(s * zr + c * f, s * zi + c * fi);
                    z[(k, i)] = Complex64::new(c * zr - s * f, c * zi - s * fi);
                }
            }
            if broke {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMat {
        let mut h = CMat::zeros(n, n);
        for i in 0..n {
            h[(i, i)] = Complex64::new(rng.gen_range(-2.0..2.0), 0.0);
            for j in i + 1..n {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        h
    }

    /// Independent oracle: cyclic complex Jacobi diagonalization.
    fn jacobi_eigvals(h: &CMat) -> Vec<f64> {
        let n = h.n_rows();
        let mut a = h.clone();
        for _sweep in 0..60 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in p + 1..n {
                    off += a[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() < 1e-14 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq.norm() < 1e-300 {
                        continue;
                    }
                    let phase = apq / apq.norm();
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let tau = (aqq - app) / (2.0 * apq.norm());
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // G: rows/cols p,q with entries [c, s*phase; -s*conj(phase), c]
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = akp * c - akq * s * phase.conj();
                        a[(k, q)] = akp * s * phase + akq * c;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = apk * c - aqk * s * phase;
                        a[(q, k)] = apk * s * phase.conj() + aqk * c;
                    }
                }
            }
        }
        let mut vals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
        vals
    }

    #[test]
    fn eigh_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &n in &[1usize, 2, 3, 5, 8, 13, 22, 30] {
            let h = random_hermitian(n, &mut rng);
            let (vals, v) = eigh(&h).unwrap();
            // V unitary
            let vhv = v.adjoint().matmul(&v);
            for i in 0..n {
                for j in 0..n {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((vhv[(i, j)] - expect).norm() < 1e-12, "n={n}");
                }
            }
            // H = V diag V†
            let mut vd = v.clone();
            for c in 0..n {
                for r in 0..n {
                    vd[(r, c)] *= vals[c];
                }
            }
            let rec = vd.matmul(&v.adjoint());
            for i in 0..n {
                for j in 0..n {
                    assert!((rec[(i, j)] - h[(i, j)]).norm() < 1e-11 * (1.0 + n as f64));
                }
            }
        }
    }

    #[test]
    fn eigh_matches_jacobi_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &n in &[2usize, 4, 9, 17, 22] {
            let h = random_hermitian(n, &mut rng);
            let (vals, _) = eigh(&h).unwrap();
            let oracle = jacobi_eigvals(&h);
            for (a, b) in vals.iter().zip(oracle.iter()) {
                assert!((a - b).abs() < 1e-10, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn eigh_tridiagonal_toeplitz_closed_form() {
        // Symmetric tridiagonal with 1/2 off-diagonal: eigenvalues cos(k pi/(N+1)).
        let n = 22;
        let mut h = CMat::zeros(n, n);
        for i in 0..n - 1 {
            h[(i, i + 1)] = Complex64::new(0.5, 0.0);
            h[(i + 1, i)] = Complex64::new(0.5, 0.0);
        }
        let (vals, _) = eigh(&h).unwrap();
        let mut expect: Vec<f64> = (1..=n)
            .map(|k| (core::f64::consts::PI * k as f64 / (n as f64 + 1.0)).cos())
            .collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in vals.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn eigh_handles_degenerate_spectrum() {
        let n = 6;
        let h = CMat::identity(n);
        let (vals, v) = eigh(&h).unwrap();
        for val in vals {
            assert!((val - 1.0).abs() < 1e-14);
        }
        let vhv = v.adjoint().matmul(&v);
        for i in 0..n {
            assert!((vhv[(i, i)] - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn skew_spectral_norm_tridiagonal() {
        let n = 22;
        let mut b = CMat::zeros(n, n);
        for i in 0..n - 1 {
            b[(i, i + 1)] = Complex64::new(0.0, -0.5);
            b[(i + 1, i)] = Complex64::new(0.0, -0.5);
        }
        let norm = b.skew_spectral_norm().unwrap();
        let expect = (core::f64::consts::PI / 23.0).cos();
        assert!((norm - expect).abs() < 1e-13);
    }
}
