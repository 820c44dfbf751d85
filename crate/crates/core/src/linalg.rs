//! Dense row-major matrices, LU solves and the matrix exponential.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = self.data[i * self.cols + j] + v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols, "matvec length");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `selfᵀ x`
    pub fn matvec_transpose(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.rows, "matvec_transpose length");
        let mut y = vec![T::zero(); self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi == T::zero() {
                continue;
            }
            for (yj, &a) in y.iter_mut().zip(self.row(i)) {
                *yj = *yj + a * xi;
            }
        }
        y
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shapes");
        let mut out = Self::zeros(self.rows, other.cols);
        let oc = other.cols;
        for i in 0..self.rows {
            let orow = &mut out.data[i * oc..(i + 1) * oc];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == T::zero() {
                    continue;
                }
                for (o, &b) in orow.iter_mut().zip(&other.data[k * oc..(k + 1) * oc]) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn scaled(&self, a: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| a * x).collect(),
        }
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: T, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "axpy shapes");
        for (x, &y) in self.data.iter_mut().zip(&other.data) {
            *x = *x + a * y;
        }
    }

    pub fn add_identity(&mut self, a: T) {
        for i in 0..self.rows.min(self.cols) {
            self.add_at(i, i, a);
        }
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> T {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j).abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    /// Maximum absolute row sum (operator norm on sup-normed vectors).
    pub fn norm_inf(&self) -> T {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        crate::scalar::sup_diff(&self.data, &other.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Solves `self · X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        if !self.is_square() || rhs.rows != self.rows {
            return Err(Error::Dimension("solve shapes".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut x = rhs.clone();
        let m = x.cols;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a.get(i, k).abs()))
                .fold((k, T::zero()), |acc, v| if v.1 > acc.1 { v } else { acc });
            if pmax == T::zero() || !pmax.is_finite() {
                return Err(Error::Numerical("singular matrix in LU solve".into()));
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                for j in 0..m {
                    x.data.swap(k * m + j, p * m + j);
                }
            }
            let piv = a.get(k, k);
            for i in k + 1..n {
                let l = a.get(i, k) / piv;
                if l == T::zero() {
                    continue;
                }
                a.set(i, k, l);
                for j in k + 1..n {
                    let v = a.get(i, j) - l * a.get(k, j);
                    a.set(i, j, v);
                }
                for j in 0..m {
                    let v = x.get(i, j) - l * x.get(k, j);
                    x.set(i, j, v);
                }
            }
        }
        for k in (0..n).rev() {
            let piv = a.get(k, k);
            for j in 0..m {
                let mut s = x.get(k, j);
                for i in k + 1..n {
                    s = s - a.get(k, i) * x.get(i, j);
                }
                x.set(k, j, s / piv);
            }
        }
        Ok(x)
    }

    /// Matrix exponential by scaling and squaring with Padé approximants up to degree 13.
    pub fn expm(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Dimension("expm of a non-square matrix".into()));
        }
        if !self.is_finite() {
            return Err(Error::Numerical("expm argument has non-finite entries".into()));
        }
        let e = expm_pade(self)?;
        if e.is_finite() {
            return Ok(e);
        }
        log::warn!("matrix exponential overflowed; retrying with a halved step");
        let half = expm_pade(&self.scaled(T::lit(0.5)))?;
        let e = half.matmul(&half);
        if e.is_finite() {
            Ok(e)
        } else {
            Err(Error::Numerical(
                "matrix exponential overflow persists after step halving".into(),
            ))
        }
    }

    /// Returns `exp(A)` and the Fréchet derivative `L(A, E) = d/ds exp(A + sE)|_{s=0}`.
    pub fn expm_frechet(&self, e: &Self) -> Result<(Self, Self)> {
        let n = self.rows;
        if !self.is_square() || e.rows != n || e.cols != n {
            return Err(Error::Dimension("expm_frechet shapes".into()));
        }
        let block = Self::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => self.get(i, j),
            (true, false) => e.get(i, j - n),
            (false, false) => self.get(i - n, j - n),
            (false, true) => T::zero(),
        });
        let big = block.expm()?;
        let ex = Self::from_fn(n, n, |i, j| big.get(i, j));
        let l = Self::from_fn(n, n, |i, j| big.get(i, j + n));
        Ok((ex, l))
    }
}

const THETA: [f64; 4] = [
    1.495585217958292e-2,
    2.539_398_330_063_23e-1,
    9.504178996162932e-1,
    2.097847961257068,
];
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn lin_comb<T: Real>(n: usize, terms: &[(f64, &DenseMatrix<T>)], identity: f64) -> DenseMatrix<T> {
    let mut out = DenseMatrix::zeros(n, n);
    for (c, m) in terms {
        out.axpy(T::lit(*c), m);
    }
    out.add_identity(T::lit(identity));
    out
}

/// Odd/even parts `(U, V)` of a low-degree Padé approximant.
fn pade_low<T: Real>(a: &DenseMatrix<T>, b: &[f64]) -> (DenseMatrix<T>, DenseMatrix<T>) {
    let n = a.rows();
    let mut powers = vec![a.matmul(a)];
    while powers.len() < (b.len() - 2) / 2 {
        let next = powers.last().unwrap().matmul(&powers[0]);
        powers.push(next);
    }
    let odd: Vec<(f64, &DenseMatrix<T>)> = powers
        .iter()
        .enumerate()
        .map(|(k, p)| (b[2 * k + 3], p))
        .collect();
    let even: Vec<(f64, &DenseMatrix<T>)> = powers
        .iter()
        .enumerate()
        .map(|(k, p)| (b[2 * k + 2], p))
        .collect();
    let u = a.matmul(&lin_comb(n, &odd, b[1]));
    let v = lin_comb(n, &even, b[0]);
    (u, v)
}

fn pade13<T: Real>(a: &DenseMatrix<T>) -> (DenseMatrix<T>, DenseMatrix<T>) {
    let n = a.rows();
    let b = &B13;
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let inner = lin_comb(n, &[(b[13], &a6), (b[11], &a4), (b[9], &a2)], 0.0);
    let mut tmp = a6.matmul(&inner);
    tmp.axpy(T::lit(b[7]), &a6);
    tmp.axpy(T::lit(b[5]), &a4);
    tmp.axpy(T::lit(b[3]), &a2);
    tmp.add_identity(T::lit(b[1]));
    let u = a.matmul(&tmp);
    let inner = lin_comb(n, &[(b[12], &a6), (b[10], &a4), (b[8], &a2)], 0.0);
    let mut v = a6.matmul(&inner);
    v.axpy(T::lit(b[6]), &a6);
    v.axpy(T::lit(b[4]), &a4);
    v.axpy(T::lit(b[2]), &a2);
    v.add_identity(T::lit(b[0]));
    (u, v)
}

fn expm_pade<T: Real>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let norm = a.norm_1().to_f64_lossy();
    let (u, v, squarings) = if norm < THETA[0] {
        let (u, v) = pade_low(a, &B3);
        (u, v, 0)
    } else if norm < THETA[1] {
        let (u, v) = pade_low(a, &B5);
        (u, v, 0)
    } else if norm < THETA[2] {
        let (u, v) = pade_low(a, &B7);
        (u, v, 0)
    } else if norm < THETA[3] {
        let (u, v) = pade_low(a, &B9);
        (u, v, 0)
    } else {
        let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
        let scaled = a.scaled(T::lit(2f64.powi(-s)));
        let (u, v) = pade13(&scaled);
        (u, v, s as u32)
    };
    let mut numer = v.clone();
    numer.axpy(T::one(), &u);
    let mut denom = v;
    denom.axpy(-T::one(), &u);
    let mut r = denom.solve(&numer)?;
    for _ in 0..squarings {
        r = r.matmul(&r);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taylor_expm(a: &DenseMatrix<f64>) -> DenseMatrix<f64> {
        let s = 12;
        let scaled = a.scaled(2f64.powi(-s));
        let n = a.rows();
        let mut sum = DenseMatrix::identity(n);
        let mut term = DenseMatrix::identity(n);
        for k in 1..40 {
            term = term.matmul(&scaled).scaled(1.0 / k as f64);
            sum.axpy(1.0, &term);
        }
        for _ in 0..s {
            sum = sum.matmul(&sum);
        }
        sum
    }

    #[test]
    fn expm_zero_is_identity() {
        let z = DenseMatrix::<f64>::zeros(5, 5);
        assert_eq!(z.expm().unwrap(), DenseMatrix::identity(5));
    }

    #[test]
    fn expm_reference_four_by_four() {
        #[rustfmt::skip]
        let a = DenseMatrix::from_row_major(4, 4, vec![
            0.814723686393179, 0.632359246225410, 0.957506835434298, 0.957166948242946,
            0.905791937075619, 0.097540404999410, 0.964888535199277, 0.485375648722841,
            0.126986816293506, 0.278498218867048, 0.157613081677548, 0.800280468888800,
            0.913375856139019, 0.546881519204984, 0.970592781760616, 0.141886338627215,
        ]).unwrap();
        #[rustfmt::skip]
        let expected = DenseMatrix::from_row_major(4, 4, vec![
            4.720394021183613, 2.456123391535519, 4.183565616967832, 3.673653234120964,
            2.928866714497507, 2.481177196987064, 3.228759552473233, 2.576698942351026,
            1.410035511630756, 1.045823715355211, 2.569074262471745, 1.803_629_754_049_43,
            3.039392477683259, 1.909054748938514, 3.348014370985685, 3.374766717641546,
        ]).unwrap();
        assert!(a.expm().unwrap().max_abs_diff(&expected) < 1e-13);
    }

    #[test]
    fn expm_matches_taylor_across_pade_degrees() {
        let base = DenseMatrix::from_fn(6, 6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        for scale in [1e-3, 3e-2, 0.1, 0.3, 1.0, 4.0] {
            let a = base.scaled(scale);
            let e = a.expm().unwrap();
            let t = taylor_expm(&a);
            let rel = e.max_abs_diff(&t) / t.norm_inf();
            assert!(rel < 1e-12, "scale {scale}: {rel}");
        }
    }

    #[test]
    fn frechet_matches_finite_difference() {
        let a = DenseMatrix::from_fn(4, 4, |i, j| if i == j { -1.0 } else { 0.3 * (i + 2 * j) as f64 / 6.0 });
        let e = DenseMatrix::from_fn(4, 4, |i, j| ((i + j) % 3) as f64 - 1.0);
        let (ex, l) = a.expm_frechet(&e).unwrap();
        assert!(ex.max_abs_diff(&a.expm().unwrap()) < 1e-13);
        let s = 1e-5;
        let mut ap = a.clone();
        ap.axpy(s, &e);
        let mut am = a.clone();
        am.axpy(-s, &e);
        let mut fd = ap.expm().unwrap();
        fd.axpy(-1.0, &am.expm().unwrap());
        let fd = fd.scaled(0.5 / s);
        assert!(fd.max_abs_diff(&l) < 1e-8);
    }

    #[test]
    fn solve_recovers_known_solution() {
        let a = DenseMatrix::from_fn(5, 5, |i, j| if i == j { 4.0 } else { 1.0 / (1 + i + j) as f64 });
        let x = DenseMatrix::from_fn(5, 2, |i, j| (i as f64) - (j as f64) * 0.5);
        let b = a.matmul(&x);
        assert!(a.solve(&b).unwrap().max_abs_diff(&x) < 1e-13);
    }

    #[test]
    fn expm_generic_in_f32() {
        let a = DenseMatrix::<f32>::from_fn(3, 3, |i, j| if i == j { -0.5 } else { 0.25 });
        let e = a.expm().unwrap();
        let ones = e.matvec(&[1.0, 1.0, 1.0]);
        for v in ones {
            assert!((v - 1.0).abs() < 1e-5);
        }
    }
}
