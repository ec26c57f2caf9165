//! Dense and banded complex linear algebra used by the spin-model backend.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = Mat<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub fn all_finite(v: &[Complex64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Induced 1-norm (largest absolute column sum).
pub fn norm_one(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.col_as_slice(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn matvec(a: &CMat, x: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(a.ncols(), x.len());
    let mut y = vec![ZERO; a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == ZERO {
            continue;
        }
        for (yi, aij) in y.iter_mut().zip(a.col_as_slice(j)) {
            *yi += aij * xj;
        }
    }
    y
}

/// Solve `a·x = b` by LU with partial pivoting.
pub fn lu_solve(a: &CMat, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::InvalidArgument(format!(
            "system is {}x{} with a right-hand side of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let lu = a.partial_piv_lu();
    let mut rhs = Mat::from_fn(n, 1, |i, _| b[i]);
    lu.solve_in_place(&mut rhs);
    let x: Vec<Complex64> = rhs.col_as_slice(0).to_vec();
    if !all_finite(&x) {
        return Err(Error::LinearSolveFailure("matrix is singular to working precision".into()));
    }
    Ok(x)
}

fn lincomb(terms: &[(f64, &CMat)], identity: f64) -> CMat {
    let n = terms[0].1.nrows();
    Mat::from_fn(n, n, |i, j| {
        let mut acc = if i == j { Complex64::new(identity, 0.0) } else { ZERO };
        for (c, m) in terms {
            acc += m[(i, j)] * *c;
        }
        acc
    })
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant (Higham 2005).
pub fn expm(a: &CMat) -> Result<CMat> {
    const B: [f64; 14] = [
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
    const THETA_13: f64 = 5.371920351148152;

    let n = a.nrows();
    let norm = norm_one(a);
    if !norm.is_finite() {
        return Err(Error::NumericalFailure("non-finite generator entries".into()));
    }
    let squarings = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(squarings);
    let a = Mat::from_fn(n, n, |i, j| a[(i, j)] * scale);

    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let inner_u = lincomb(&[(B[13], &a6), (B[11], &a4), (B[9], &a2)], 0.0);
    let u_poly = &a6 * &inner_u;
    let u_poly = lincomb(&[(1.0, &u_poly), (B[7], &a6), (B[5], &a4), (B[3], &a2)], B[1]);
    let u = &a * &u_poly;

    let inner_v = lincomb(&[(B[12], &a6), (B[10], &a4), (B[8], &a2)], 0.0);
    let v = &a6 * &inner_v;
    let v = lincomb(&[(1.0, &v), (B[6], &a6), (B[4], &a4), (B[2], &a2)], B[0]);

    let p = lincomb(&[(1.0, &v), (1.0, &u)], 0.0);
    let q = lincomb(&[(1.0, &v), (-1.0, &u)], 0.0);
    let mut r = q.partial_piv_lu().solve(&p);
    for _ in 0..squarings {
        r = &r * &r;
    }
    for j in 0..n {
        if !all_finite(r.col_as_slice(j)) {
            return Err(Error::NumericalFailure("matrix exponential overflowed".into()));
        }
    }
    Ok(r)
}

/// Right eigenvectors of a general complex matrix with the inverse basis.
pub struct Eigenbasis {
    pub values: Vec<Complex64>,
    pub vectors: CMat,
    pub inverse: CMat,
    /// `‖V‖₁·‖V⁻¹‖₁`.
    pub condition: f64,
}

impl Eigenbasis {
    pub fn new(a: &CMat) -> Result<Self> {
        let evd = a
            .eigen()
            .map_err(|e| Error::NumericalFailure(format!("eigendecomposition failed: {e:?}")))?;
        let vectors = evd.U().to_owned();
        let values: Vec<Complex64> = (0..a.nrows()).map(|i| evd.S()[i]).collect();
        let inverse = vectors.partial_piv_lu().inverse();
        let condition = norm_one(&vectors) * norm_one(&inverse);
        let condition = if condition.is_finite() { condition } else { f64::INFINITY };
        Ok(Self { values, vectors, inverse, condition })
    }
}

/// Square banded matrix with `kl` sub- and `ku` super-diagonals, stored by
/// row with room for the fill-in produced by partial pivoting.
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![ZERO; n * width] }
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        // Row i holds columns i-kl ..= i+kl+ku.
        let lo = i as isize - self.kl as isize;
        let off = j as isize - lo;
        (off >= 0 && (off as usize) < self.width && j < self.n).then(|| i * self.width + off as usize)
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.slot(i, j).map_or(ZERO, |k| self.data[k])
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i},{j}) outside the declared band"
        );
        let k = self.slot(i, j).expect("inside band");
        self.data[k] = value;
    }

    /// Gaussian elimination with partial pivoting, consuming the matrix.
    pub fn solve(mut self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.n;
        assert_eq!(rhs.len(), n);
        let mut b = rhs.to_vec();
        let reach = self.kl + self.ku;
        for j in 0..n {
            let last_row = (j + self.kl).min(n - 1);
            let last_col = (j + reach).min(n - 1);
            let mut pivot = j;
            let mut best = self.get(j, j).norm();
            for i in j + 1..=last_row {
                let m = self.get(i, j).norm();
                if m > best {
                    best = m;
                    pivot = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::LinearSolveFailure(format!("zero pivot in column {j}")));
            }
            if pivot != j {
                for c in j..=last_col {
                    let a = self.get(j, c);
                    let p = self.get(pivot, c);
                    self.put(j, c, p);
                    self.put(pivot, c, a);
                }
                b.swap(j, pivot);
            }
            let d = self.get(j, j);
            for i in j + 1..=last_row {
                let f = self.get(i, j) / d;
                if f == ZERO {
                    continue;
                }
                self.put(i, j, ZERO);
                for c in j + 1..=last_col {
                    let v = self.get(i, c) - f * self.get(j, c);
                    self.put(i, c, v);
                }
                let bj = b[j];
                b[i] -= f * bj;
            }
        }
        for j in (0..n).rev() {
            let last_col = (j + reach).min(n - 1);
            let mut acc = b[j];
            for c in j + 1..=last_col {
                acc -= self.get(j, c) * b[c];
            }
            b[j] = acc / self.get(j, j);
        }
        if !all_finite(&b) {
            return Err(Error::LinearSolveFailure("banded solve produced non-finite values".into()));
        }
        Ok(b)
    }

    fn put(&mut self, i: usize, j: usize, value: Complex64) {
        match self.slot(i, j) {
            Some(k) => self.data[k] = value,
            None => debug_assert!(value == ZERO, "fill outside storage at ({i},{j})"),
        }
    }
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}
