//! Small dense complex linear algebra: LU solve, determinant, numerical rank
//! and a general eigenvalue solver (Hessenberg reduction + shifted QR).
//!
//! Sized for the 2×2 and 3×3 dynamical matrices of this crate but written for
//! any square size.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is singular to working precision (pivot {pivot} at column {column})")]
    Singular { column: usize, pivot: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("eigenvalue iteration did not converge after {0} sweeps")]
    NoConvergence(usize),
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { Complex::one() } else { Complex::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Build from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::Dimension("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn from_diagonal(diag: &[Complex<T>]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { Complex::zero() })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn diagonal(&self) -> Vec<Complex<T>> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `self - shift·I`
    pub fn shifted(&self, shift: Complex<T>) -> Self {
        let mut out = self.clone();
        for k in 0..self.rows.min(self.cols) {
            out[(k, k)] = out[(k, k)] - shift;
        }
        out
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Commutator norm `‖A A† − A† A‖_F`; zero for normal matrices.
    pub fn normality_defect(&self) -> T {
        let ad = self.adjoint();
        (self * &ad - &ad * self).frobenius_norm()
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        CMatrix::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols).fold(Complex::zero(), |acc, k| acc + self[(i, k)] * rhs[(k, j)])
        })
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + rhs[(i, j)])
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - rhs[(i, j)])
    }
}

impl<T: Real> Sub for CMatrix<T> {
    type Output = CMatrix<T>;
    fn sub(self, rhs: CMatrix<T>) -> CMatrix<T> {
        &self - &rhs
    }
}

/// LU factorization with partial pivoting, `P A = L U` packed in one matrix.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: CMatrix<T>,
    perm: Vec<usize>,
    sign_flips: usize,
}

impl<T: Real> Lu<T> {
    pub fn new(a: &CMatrix<T>) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::Dimension(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows, a.cols
            )));
        }
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign_flips = 0;
        let scale = a.max_abs();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|r| (r, lu[(r, k)].norm()))
                .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= T::epsilon() * scale * T::lit(n as f64) || pmax == T::zero() {
                return Err(LinalgError::Singular {
                    column: k,
                    pivot: pmax.as_f64(),
                });
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
                sign_flips += 1;
            }
            let pivot = lu[(k, k)];
            for r in k + 1..n {
                let f = lu[(r, k)] / pivot;
                lu[(r, k)] = f;
                for j in k + 1..n {
                    let t = lu[(k, j)];
                    lu[(r, j)] = lu[(r, j)] - f * t;
                }
            }
        }
        Ok(Self { lu, perm, sign_flips })
    }

    pub fn determinant(&self) -> Complex<T> {
        let d = self
            .lu
            .diagonal()
            .into_iter()
            .fold(Complex::one(), |acc: Complex<T>, z| acc * z);
        if self.sign_flips % 2 == 1 {
            -d
        } else {
            d
        }
    }

    /// Solve `A X = B` for a matrix right-hand side.
    pub fn solve(&self, b: &CMatrix<T>) -> Result<CMatrix<T>, LinalgError> {
        let n = self.lu.rows;
        if b.rows != n {
            return Err(LinalgError::Dimension(format!(
                "rhs has {} rows, system has {n}",
                b.rows
            )));
        }
        let mut x = CMatrix::from_fn(n, b.cols, |i, j| b[(self.perm[i], j)]);
        for c in 0..b.cols {
            for i in 0..n {
                let mut acc = x[(i, c)];
                for k in 0..i {
                    acc = acc - self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = acc;
            }
            for i in (0..n).rev() {
                let mut acc = x[(i, c)];
                for k in i + 1..n {
                    acc = acc - self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = acc / self.lu[(i, i)];
            }
        }
        Ok(x)
    }
}

pub fn solve<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>, LinalgError> {
    Lu::new(a)?.solve(b)
}

/// Determinant by cofactor-free LU; returns zero for singular input.
pub fn determinant<T: Real>(a: &CMatrix<T>) -> Complex<T> {
    match Lu::new(a) {
        Ok(lu) => lu.determinant(),
        Err(_) => Complex::zero(),
    }
}

/// Numerical rank by Gaussian elimination with complete pivoting.
///
/// Pivots below `rel_tol · max|a_ij|` count as zero.
pub fn rank<T: Real>(a: &CMatrix<T>, rel_tol: T) -> usize {
    let mut m = a.clone();
    let tol = rel_tol * a.max_abs();
    let (rows, cols) = (m.rows, m.cols);
    let mut r = 0;
    while r < rows.min(cols) {
        let mut best = (r, r, T::zero());
        for i in r..rows {
            for j in r..cols {
                let v = m[(i, j)].norm();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        if best.2 <= tol || best.2 == T::zero() {
            break;
        }
        let (pi, pj, _) = best;
        for j in 0..cols {
            let tmp = m[(r, j)];
            m[(r, j)] = m[(pi, j)];
            m[(pi, j)] = tmp;
        }
        for i in 0..rows {
            let tmp = m[(i, r)];
            m[(i, r)] = m[(i, pj)];
            m[(i, pj)] = tmp;
        }
        let pivot = m[(r, r)];
        for i in r + 1..rows {
            let f = m[(i, r)] / pivot;
            for j in r..cols {
                let t = m[(r, j)];
                m[(i, j)] = m[(i, j)] - f * t;
            }
        }
        r += 1;
    }
    r
}

/// All eigenvalues of a square complex matrix, in the order they deflate
/// from the bottom of the Schur form (no sorting).
pub fn eigenvalues<T: Real>(a: &CMatrix<T>) -> Result<Vec<Complex<T>>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::Dimension(format!(
            "eigenvalues need a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = hessenberg(a);
    let eps = T::epsilon();
    let norm = a.frobenius_norm().max(T::min_positive_value());
    let max_iter = 60 * n;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let mut s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if s == T::zero() {
                s = norm;
            }
            if h[(lo, lo - 1)].norm() <= eps * s {
                h[(lo, lo - 1)] = Complex::zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > max_iter * n {
            return Err(LinalgError::NoConvergence(total));
        }
        let shift = if iter % 11 == 10 {
            // exceptional shift to break cycles
            h[(hi, hi)] + Complex::new(h[(hi, hi - 1)].norm() * T::lit(1.5), T::zero())
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_step(&mut h, lo, hi, shift);
    }
    Ok(h.diagonal())
}

/// Largest singular value, from the top eigenvalue of `A† A`.
pub fn spectral_norm<T: Real>(a: &CMatrix<T>) -> Result<T, LinalgError> {
    let gram = &a.adjoint() * a;
    let ev = eigenvalues(&gram)?;
    Ok(ev
        .into_iter()
        .fold(T::zero(), |acc, z| acc.max(z.re))
        .max(T::zero())
        .sqrt())
}

/// Smallest eigenvalue of a Hermitian matrix (imaginary round-off discarded).
pub fn hermitian_min_eigenvalue<T: Real>(a: &CMatrix<T>) -> Result<T, LinalgError> {
    let ev = eigenvalues(a)?;
    Ok(ev.into_iter().fold(T::infinity(), |acc, z| acc.min(z.re)))
}

fn hessenberg<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    let n = a.rows;
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let xnorm = (k + 1..n).fold(T::zero(), |acc, r| acc + h[(r, k)].norm_sqr()).sqrt();
        if xnorm == T::zero() {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == T::zero() {
            Complex::one()
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        let mut v: Vec<Complex<T>> = (k + 1..n).map(|r| h[(r, k)]).collect();
        v[0] = v[0] - alpha;
        let vnorm = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
        if vnorm == T::zero() {
            continue;
        }
        for z in &mut v {
            *z = *z / vnorm;
        }
        let two = Complex::new(T::lit(2.0), T::zero());
        // H <- (I - 2vv†) H
        for j in 0..n {
            let dot = v
                .iter()
                .enumerate()
                .fold(Complex::zero(), |acc, (t, vt)| acc + vt.conj() * h[(k + 1 + t, j)]);
            for (t, vt) in v.iter().enumerate() {
                h[(k + 1 + t, j)] = h[(k + 1 + t, j)] - two * vt * dot;
            }
        }
        // H <- H (I - 2vv†)
        for i in 0..n {
            let dot = v
                .iter()
                .enumerate()
                .fold(Complex::zero(), |acc, (t, vt)| acc + h[(i, k + 1 + t)] * vt);
            for (t, vt) in v.iter().enumerate() {
                h[(i, k + 1 + t)] = h[(i, k + 1 + t)] - two * dot * vt.conj();
            }
        }
        for r in k + 2..n {
            h[(r, k)] = Complex::zero();
        }
    }
    h
}

/// Eigenvalue of the trailing 2×2 block closest to its bottom-right entry.
fn wilkinson_shift<T: Real>(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Complex<T> {
    let half = T::lit(0.5);
    let mean = (a + d) * half;
    let diff = (a - d) * half;
    let disc = (diff * diff + b * c).sqrt();
    let mu1 = mean + disc;
    let mu2 = mean - disc;
    if (mu1 - d).norm() <= (mu2 - d).norm() {
        mu1
    } else {
        mu2
    }
}

/// One shifted QR sweep on the active block `lo..=hi` of a Hessenberg matrix.
fn qr_step<T: Real>(h: &mut CMatrix<T>, lo: usize, hi: usize, shift: Complex<T>) {
    for k in lo..=hi {
        h[(k, k)] = h[(k, k)] - shift;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        for j in k..=hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = x * c + s * y;
            h[(k + 1, j)] = -s.conj() * x + y * c;
        }
        rotations.push((c, s));
    }
    for (offset, &(c, s)) in rotations.iter().enumerate() {
        let k = lo + offset;
        let last = (k + 2).min(hi);
        for i in lo..=last {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + y * s.conj();
            h[(i, k + 1)] = -x * s + y * c;
        }
    }
    for k in lo..=hi {
        h[(k, k)] = h[(k, k)] + shift;
    }
}

/// Rotation `[[c, s], [-s̄, c]]` (c real) mapping `(x, y)` to `(r, 0)`.
fn givens<T: Real>(x: Complex<T>, y: Complex<T>) -> (T, Complex<T>) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == T::zero() {
        return (T::one(), Complex::zero());
    }
    if ax == T::zero() {
        return (T::zero(), y.conj() / ay);
    }
    let r = ax.hypot(ay);
    (ax / r, (x / ax) * y.conj() / r)
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn sorted(mut v: Vec<C>) -> Vec<C> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn diagonal_eigenvalues_are_exact() {
        let d = vec![c(1.0, -1.0), c(2.0, -3.0), c(0.0, -5.0)];
        let m = CMatrix::from_diagonal(&d);
        assert_eq!(sorted(eigenvalues(&m).unwrap()), sorted(d));
    }

    #[test]
    fn jordan_block_is_rank_deficient() {
        let m = CMatrix::from_rows(&[vec![c(0.0, -2.0), c(20.0, 0.0)], vec![c(0.0, 0.0), c(0.0, -2.0)]]).unwrap();
        let ev = eigenvalues(&m).unwrap();
        assert!(ev.iter().all(|z| (z - c(0.0, -2.0)).norm() == 0.0));
        assert_eq!(rank(&m.shifted(c(0.0, -2.0)), 1e-12), 1);
    }

    #[test]
    fn eigenvalues_of_companion_matrix() {
        // roots 1, 2i, -3+i
        let roots = [c(1.0, 0.0), c(0.0, 2.0), c(-3.0, 1.0)];
        let e1 = roots[0] + roots[1] + roots[2];
        let e2 = roots[0] * roots[1] + roots[0] * roots[2] + roots[1] * roots[2];
        let e3 = roots[0] * roots[1] * roots[2];
        let m = CMatrix::from_rows(&[
            vec![e1, -e2, e3],
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let got = sorted(eigenvalues(&m).unwrap());
        let want = sorted(roots.to_vec());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-12, "{g} vs {w}");
        }
    }

    #[test]
    fn solve_and_determinant() {
        let a = CMatrix::from_rows(&[
            vec![c(2.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 1.0), c(3.0, 0.0)],
            vec![c(4.0, 0.0), c(0.0, 2.0), c(-1.0, 0.5)],
        ])
        .unwrap();
        let b = CMatrix::identity(3);
        let inv = solve(&a, &b).unwrap();
        let prod = &a * &inv;
        assert!((&prod - &CMatrix::identity(3)).max_abs() < 1e-14);
        // cofactor expansion oracle
        let det = a[(0, 0)] * (a[(1, 1)] * a[(2, 2)] - a[(1, 2)] * a[(2, 1)])
            - a[(0, 1)] * (a[(1, 0)] * a[(2, 2)] - a[(1, 2)] * a[(2, 0)])
            + a[(0, 2)] * (a[(1, 0)] * a[(2, 1)] - a[(1, 1)] * a[(2, 0)]);
        assert!((determinant(&a) - det).norm() < 1e-13);
    }

    #[test]
    fn singular_solve_is_reported() {
        let a = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]]).unwrap();
        assert!(matches!(
            solve(&a, &CMatrix::identity(2)),
            Err(LinalgError::Singular { .. })
        ));
        assert_eq!(determinant(&a), C::zero());
    }

    #[test]
    fn spectral_norm_of_unitary_is_one() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = CMatrix::from_rows(&[vec![c(s, 0.0), c(0.0, s)], vec![c(0.0, s), c(s, 0.0)]]).unwrap();
        assert!((spectral_norm(&u).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn f32_eigenvalues() {
        let m = CMatrix::<f32>::from_rows(&[
            vec![Complex::new(0.0, -1.0), Complex::new(2.0, 0.0)],
            vec![Complex::new(2.0, 0.0), Complex::new(0.0, -1.0)],
        ])
        .unwrap();
        let mut ev = eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((ev[0] - Complex::new(-2.0, -1.0)).norm() < 1e-5);
        assert!((ev[1] - Complex::new(2.0, -1.0)).norm() < 1e-5);
    }
}
