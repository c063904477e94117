//! Dense real matrix kernels: companion matrices, shifted determinants,
//! rank-revealing elimination, null/range bases, restriction to invariant
//! subspaces and the symmetric lift.

use std::ops::{Index, IndexMut};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{bisect, Polynomial};

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Matrix::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Panics on ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<f64>], rows: usize) -> Self {
        Matrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
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

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.cols.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matmul");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in mul_vec");
        self.data
            .chunks(self.cols.max(1))
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// `self - t I`
    pub fn shift(&self, t: f64) -> Matrix {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] -= t;
        }
        m
    }

    /// `(A - alpha I)^2 + beta^2 I`
    pub fn true_pair_operator(&self, alpha: f64, beta: f64) -> Matrix {
        let s = self.shift(alpha);
        s.matmul(&s).shift(-beta * beta)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.data
            .chunks(self.cols.max(1))
            .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Scale to unit length and flip so the first non-negligible entry is positive.
pub fn normalize_canonical(v: &mut [f64]) -> bool {
    let n = norm2(v);
    if n == 0.0 || !n.is_finite() {
        return false;
    }
    let first = v
        .iter()
        .copied()
        .find(|x| x.abs() > 1e-12 * n)
        .unwrap_or(1.0);
    let s = if first < 0.0 { -1.0 / n } else { 1.0 / n };
    for x in v.iter_mut() {
        *x *= s;
    }
    true
}

/// Companion matrix of a monic polynomial: ones on the subdiagonal and
/// `-a_0, ..., -a_{n-1}` in the last column.
pub fn companion(p: &Polynomial) -> Result<Matrix> {
    let n = p.degree();
    if n == 0 || p.is_zero() {
        return Err(Error::contract("companion needs degree >= 1"));
    }
    if p.leading() != 1.0 {
        return Err(Error::contract(format!(
            "companion needs a monic polynomial, leading coefficient is {}",
            p.leading()
        )));
    }
    let c = p.coeffs();
    let mut m = Matrix::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i];
    }
    Ok(m)
}

/// Diagonal similarity `D^-1 A D` with power-of-two entries that evens out
/// row and column norms (Parlett and Reinsch). Returns the balanced matrix
/// and the diagonal of `D`; eigenvalues are unchanged and exactly so, since
/// scaling by powers of two does not round.
pub fn balance(a: &Matrix) -> (Matrix, Vec<f64>) {
    let n = a.rows();
    let mut b = a.clone();
    let mut d = vec![1.0; n];
    const RADIX: f64 = 2.0;
    let mut done = false;
    let mut sweeps = 0;
    while !done && sweeps < 100 {
        done = true;
        sweeps += 1;
        for i in 0..n {
            let (mut c, mut r) = (0.0, 0.0);
            for j in 0..n {
                if j != i {
                    c += b[(j, i)].abs();
                    r += b[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let total = c + r;
            let mut f = 1.0;
            let (mut cc, mut rr) = (c, r);
            while cc < rr / RADIX {
                f *= RADIX;
                cc *= RADIX;
                rr /= RADIX;
            }
            while cc >= rr * RADIX {
                f /= RADIX;
                cc /= RADIX;
                rr *= RADIX;
            }
            if (cc + rr) < 0.95 * total {
                done = false;
                d[i] *= f;
                for j in 0..n {
                    b[(i, j)] /= f;
                    b[(j, i)] *= f;
                }
            }
        }
    }
    (b, d)
}

/// LU factorization with partial pivoting.
struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    swaps_odd: bool,
}

impl Lu {
    fn new(a: &Matrix) -> Lu {
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps_odd = false;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in k + 1..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                swaps_odd = !swaps_odd;
            }
            let piv = lu[(k, k)];
            if piv == 0.0 {
                continue;
            }
            for i in k + 1..n {
                let f = lu[(i, k)] / piv;
                lu[(i, k)] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[(i, j)] -= f * lu[(k, j)];
                    }
                }
            }
        }
        Lu {
            lu,
            perm,
            swaps_odd,
        }
    }

    fn det(&self) -> f64 {
        let n = self.lu.rows;
        let prod: f64 = (0..n).map(|i| self.lu[(i, i)]).product();
        if self.swaps_odd {
            -prod
        } else {
            prod
        }
    }

    /// Sign of the determinant without forming the (possibly overflowing) product.
    fn det_sign(&self) -> f64 {
        let n = self.lu.rows;
        let mut s = if self.swaps_odd { -1.0 } else { 1.0 };
        for i in 0..n {
            let d = self.lu[(i, i)];
            if d == 0.0 {
                return 0.0;
            }
            if d < 0.0 {
                s = -s;
            }
        }
        s
    }

    /// Solve `A x = b`; zero pivots are replaced by `floor`.
    fn solve(&self, b: &[f64], floor: f64) -> Vec<f64> {
        let n = self.lu.rows;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[(i, j)] * x[j];
            }
            let d = self.lu[(i, i)];
            x[i] /= if d.abs() < floor {
                floor.copysign(if d == 0.0 { 1.0 } else { d })
            } else {
                d
            };
        }
        x
    }
}

/// `det(t I - A)` by LU with partial pivoting.
pub fn det_shifted(a: &Matrix, t: f64) -> f64 {
    assert!(a.is_square(), "det_shifted needs a square matrix");
    let n = a.rows;
    let m = Matrix::from_fn(n, n, |i, j| if i == j { t - a[(i, j)] } else { -a[(i, j)] });
    Lu::new(&m).det()
}

fn det_shifted_sign(a: &Matrix, t: f64) -> f64 {
    let n = a.rows;
    let m = Matrix::from_fn(n, n, |i, j| if i == j { t - a[(i, j)] } else { -a[(i, j)] });
    Lu::new(&m).det_sign()
}

/// Orthonormal basis of a subspace of `R^ambient_dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceBasis {
    pub ambient_dim: usize,
    pub vectors: Vec<Vec<f64>>,
    pub tol_used: f64,
}

impl SubspaceBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn standard(n: usize) -> Self {
        SubspaceBasis {
            ambient_dim: n,
            vectors: (0..n)
                .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
            tol_used: 0.0,
        }
    }

    /// `ambient_dim x dim` matrix with the basis vectors as columns.
    pub fn as_matrix(&self) -> Matrix {
        Matrix::from_columns(&self.vectors, self.ambient_dim)
    }

    /// Map subspace coordinates back to ambient coordinates.
    pub fn lift(&self, coords: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient_dim];
        for (c, v) in coords.iter().zip(&self.vectors) {
            for (o, x) in out.iter_mut().zip(v) {
                *o += c * x;
            }
        }
        out
    }

    /// Euclidean distance from `x` to the span.
    pub fn distance(&self, x: &[f64]) -> f64 {
        let mut r = x.to_vec();
        for _ in 0..2 {
            for v in &self.vectors {
                let c = dot(&r, v);
                for (ri, vi) in r.iter_mut().zip(v) {
                    *ri -= c * vi;
                }
            }
        }
        norm2(&r)
    }
}

/// Result of Gaussian elimination with complete pivoting, stopped at the
/// first pivot below threshold.
struct Echelon {
    rank: usize,
    /// Column order chosen by pivoting; the first `rank` are pivot columns.
    col_perm: Vec<usize>,
    /// Upper trapezoidal factor, `rank x cols`, in permuted column order.
    upper: Matrix,
}

fn eliminate(a: &Matrix, tol: f64) -> Echelon {
    let (m, n) = (a.rows, a.cols);
    let threshold = tol * a.norm_inf().max(1.0);
    let mut w = a.clone();
    let mut col_perm: Vec<usize> = (0..n).collect();
    let mut rank = 0;
    for k in 0..m.min(n) {
        let (mut pi, mut pj, mut best) = (k, k, -1.0);
        for i in k..m {
            for j in k..n {
                let v = w[(i, j)].abs();
                if v > best {
                    best = v;
                    pi = i;
                    pj = j;
                }
            }
        }
        if best <= threshold {
            break;
        }
        if pi != k {
            for j in 0..n {
                w.data.swap(k * n + j, pi * n + j);
            }
        }
        if pj != k {
            for i in 0..m {
                w.data.swap(i * n + k, i * n + pj);
            }
            col_perm.swap(k, pj);
        }
        let piv = w[(k, k)];
        for i in k + 1..m {
            let f = w[(i, k)] / piv;
            w[(i, k)] = 0.0;
            if f != 0.0 {
                for j in k + 1..n {
                    w[(i, j)] -= f * w[(k, j)];
                }
            }
        }
        rank += 1;
    }
    let upper = Matrix::from_fn(rank, n, |i, j| w[(i, j)]);
    Echelon {
        rank,
        col_perm,
        upper,
    }
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
fn orthonormalize(mut vs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    for v in vs.iter_mut() {
        for _ in 0..2 {
            for q in &out {
                let c = dot(v, q);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let n = norm2(v);
        if n > 0.0 {
            for x in v.iter_mut() {
                *x /= n;
            }
        }
        out.push(std::mem::take(v));
    }
    out
}

/// Basis of the numerical kernel of `a`.
///
/// A pivot counts as zero when its magnitude is at most `tol * max(1, |a|_inf)`.
pub fn null_basis(a: &Matrix, tol: f64) -> SubspaceBasis {
    let ech = eliminate(a, tol);
    let n = a.cols;
    let r = ech.rank;
    let u = &ech.upper;
    let mut vectors = Vec::with_capacity(n - r);
    for free in r..n {
        // back-substitute U11 y = -U12[:, free]
        let mut y = vec![0.0; r];
        for i in (0..r).rev() {
            let mut s = -u[(i, free)];
            for j in i + 1..r {
                s -= u[(i, j)] * y[j];
            }
            y[i] = s / u[(i, i)];
        }
        let mut x = vec![0.0; n];
        for (i, &yi) in y.iter().enumerate() {
            x[ech.col_perm[i]] = yi;
        }
        x[ech.col_perm[free]] = 1.0;
        vectors.push(x);
    }
    SubspaceBasis {
        ambient_dim: n,
        vectors: orthonormalize(vectors),
        tol_used: tol,
    }
}

/// Orthonormal basis of the column space of `a`, using the same rank
/// decision as [`null_basis`] so the two dimensions add up to the column count.
pub fn range_basis(a: &Matrix, tol: f64) -> SubspaceBasis {
    let ech = eliminate(a, tol);
    let cols: Vec<Vec<f64>> = ech.col_perm[..ech.rank]
        .iter()
        .map(|&j| a.column(j))
        .collect();
    SubspaceBasis {
        ambient_dim: a.rows,
        vectors: orthonormalize(cols),
        tol_used: tol,
    }
}

/// Null and range bases from a single elimination.
pub fn null_and_range(a: &Matrix, tol: f64) -> (SubspaceBasis, SubspaceBasis) {
    (null_basis(a, tol), range_basis(a, tol))
}

/// A real eigenvalue and unit eigenvector of an odd-dimensional matrix.
///
/// The eigenvalue is bisected on the sign of `det(tI - A)` over `[-B, B]`
/// with `B = 1 + |A|_inf`. The vector comes from the numerical kernel of
/// `A - lambda I`, widening the pivot tolerance up to twice and finally
/// falling back to inverse iteration.
pub fn real_eigen_odd(a: &Matrix, tol: f64, pivot_tol: f64) -> Result<(f64, Vec<f64>)> {
    if !a.is_square() || a.rows % 2 == 0 {
        return Err(Error::contract(format!(
            "real_eigen_odd needs an odd square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    if !a.is_finite() {
        return Err(Error::numerical(
            "real_eigen_odd: non-finite input",
            f64::NAN,
        ));
    }
    let n = a.rows;
    let norm = a.norm_inf();
    if n == 1 {
        return Ok((a[(0, 0)], vec![1.0]));
    }
    let bound = 1.0 + norm;
    let f = |t: f64| det_shifted_sign(a, t);
    if f(-bound) * f(bound) > 0.0 {
        return Err(Error::numerical("real_eigen_odd: no sign change", f64::NAN));
    }
    let (lo, hi) = bisect(f, -bound, bound, 1e-14 * bound, 200);
    let lambda = 0.5 * (lo + hi);
    let shifted = a.shift(lambda);
    let bound_res = tol * (1.0 + norm);
    let residual = |v: &[f64]| {
        let av = shifted.mul_vec(v);
        norm2(&av)
    };

    let mut ptol = pivot_tol;
    for _ in 0..3 {
        let basis = null_basis(&shifted, ptol);
        if let Some(v) = basis.vectors.first() {
            let mut v = v.clone();
            normalize_canonical(&mut v);
            if residual(&v) <= bound_res {
                return Ok((lambda, v));
            }
        }
        ptol *= 10.0;
    }

    // inverse iteration from a fixed pseudo-random start
    let lu = Lu::new(&shifted);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let floor = f64::EPSILON * (1.0 + norm);
    let mut best = f64::INFINITY;
    for _ in 0..4 {
        v = lu.solve(&v, floor);
        if !normalize_canonical(&mut v) {
            break;
        }
        let r = residual(&v);
        best = best.min(r);
        if r <= bound_res {
            return Ok((lambda, v));
        }
    }
    Err(Error::numerical(
        "real_eigen_odd: eigenvector residual",
        best,
    ))
}

/// Ordered basis of the symmetric `n x n` matrices: for `i <= j` in row-major
/// order, `E_ii` on the diagonal and `E_ij + E_ji` off it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymBasis {
    pub n: usize,
}

impl SymBasis {
    pub fn new(n: usize) -> Self {
        SymBasis { n }
    }

    pub fn dim(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    /// Position of `(i, j)`, `i <= j`, in the basis.
    pub fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.n - i * i.saturating_sub(1) / 2 + (j - i)
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| (i..self.n).map(move |j| (i, j)))
    }

    /// Coordinates of a symmetric matrix.
    pub fn vech(&self, x: &Matrix) -> Vec<f64> {
        self.pairs().map(|(i, j)| x[(i, j)]).collect()
    }

    pub fn unvech(&self, v: &[f64]) -> Matrix {
        assert_eq!(v.len(), self.dim(), "vech length mismatch");
        let mut x = Matrix::zeros(self.n, self.n);
        for ((i, j), &c) in self.pairs().zip(v) {
            x[(i, j)] = c;
            x[(j, i)] = c;
        }
        x
    }

    pub fn element(&self, k: usize) -> Matrix {
        let mut e = vec![0.0; self.dim()];
        e[k] = 1.0;
        self.unvech(&e)
    }
}

/// `X -> AX + XA^t`
pub fn apply_l1(a: &Matrix, x: &Matrix) -> Matrix {
    let ax = a.matmul(x);
    ax.add(&ax.transpose())
}

/// `X -> AXA^t`
pub fn apply_l2(a: &Matrix, x: &Matrix) -> Matrix {
    a.matmul(x).matmul(&a.transpose())
}

/// Coordinate matrices of `L1(X) = AX + XA^t` and `L2(X) = AXA^t` on the
/// symmetric matrices, in [`SymBasis`] order.
pub fn lift_operators(a: &Matrix) -> (Matrix, Matrix) {
    assert!(a.is_square(), "lift_operators needs a square matrix");
    let sb = SymBasis::new(a.rows);
    let dim = sb.dim();
    let mut m1 = Matrix::zeros(dim, dim);
    let mut m2 = Matrix::zeros(dim, dim);
    for k in 0..dim {
        let e = sb.element(k);
        let c1 = sb.vech(&apply_l1(a, &e));
        let c2 = sb.vech(&apply_l2(a, &e));
        for i in 0..dim {
            m1[(i, k)] = c1[i];
            m2[(i, k)] = c2[i];
        }
    }
    (m1, m2)
}

/// Matrix of `a` restricted to the invariant subspace spanned by `w`, in
/// `w`-coordinates, by least squares against the basis.
///
/// Fails when some `a w_j` is farther than `tol * (1 + |a|_inf)` from the span.
pub fn restrict(a: &Matrix, w: &SubspaceBasis, tol: f64) -> Result<Matrix> {
    let k = w.dim();
    if k == 0 {
        return Err(Error::contract("restrict needs a nonempty basis"));
    }
    if w.ambient_dim != a.rows || !a.is_square() {
        return Err(Error::contract("restrict: dimension mismatch"));
    }
    let wm = w.as_matrix();
    let aw = a.matmul(&wm);
    let wt = wm.transpose();
    let gram = wt.matmul(&wm);
    let rhs = wt.matmul(&aw);
    let lu = Lu::new(&gram);
    let mut coords = Matrix::zeros(k, k);
    for j in 0..k {
        let c = lu.solve(&rhs.column(j), f64::MIN_POSITIVE);
        for i in 0..k {
            coords[(i, j)] = c[i];
        }
    }
    let recon = wm.matmul(&coords);
    let worst = (0..k)
        .map(|j| {
            norm2(
                &aw.column(j)
                    .iter()
                    .zip(recon.column(j))
                    .map(|(x, y)| x - y)
                    .collect::<Vec<_>>(),
            )
        })
        .fold(0.0, f64::max);
    let bound = tol * (1.0 + a.norm_inf());
    if worst > bound {
        return Err(Error::InvarianceViolated {
            residual: worst,
            bound,
        });
    }
    Ok(coords)
}

/// Inverse iteration on `m` (assumed nearly singular) starting from `v`.
pub(crate) fn inverse_iteration(m: &Matrix, v: &[f64], steps: usize) -> Vec<f64> {
    let lu = Lu::new(m);
    let floor = f64::EPSILON * (1.0 + m.norm_inf());
    let mut x = v.to_vec();
    for _ in 0..steps {
        let y = lu.solve(&x, floor);
        let mut y = y;
        if !normalize_canonical(&mut y) {
            break;
        }
        x = y;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn balance_is_an_exact_similarity() {
        let p = Polynomial::new(vec![120.0, -274.0, 225.0, -85.0, 15.0, 1.0]);
        let a = companion(&p).unwrap();
        let (b, d) = balance(&a);
        assert!(b.norm_inf() < a.norm_inf());
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(b[(i, j)], a[(i, j)] * d[j] / d[i]);
            }
        }
    }

    #[test]
    fn companion_examples() {
        assert_eq!(
            companion(&Polynomial::new(vec![-5.0, 1.0])).unwrap(),
            m(&[&[5.0]])
        );
        assert_eq!(
            companion(&Polynomial::new(vec![1.0, 0.0, 1.0])).unwrap(),
            m(&[&[0.0, -1.0], &[1.0, 0.0]])
        );
        let c = companion(&Polynomial::new(vec![-1.0, 1.0, -1.0, 1.0])).unwrap();
        assert_eq!(
            c,
            m(&[&[0.0, 0.0, 1.0], &[1.0, 0.0, -1.0], &[0.0, 1.0, 1.0]])
        );
        // det(tI - C) by cofactor expansion is t^3 - t^2 + t - 1
        for t in [-2.0, 0.5, 3.0] {
            let cof = t * (t * (t - 1.0) + 1.0) - 1.0;
            assert!((det_shifted(&c, t) - cof).abs() < 1e-12);
        }
        assert!(companion(&Polynomial::new(vec![1.0, 2.0])).is_err());
    }

    #[test]
    fn det_shifted_examples() {
        let rot = m(&[&[0.0, -1.0], &[1.0, 0.0]]);
        assert_eq!(det_shifted(&rot, 0.0), 1.0);
        assert_eq!(det_shifted(&rot, 1.0), 2.0);
        assert_eq!(det_shifted(&Matrix::zeros(3, 3), 1.0), 1.0);
    }

    #[test]
    fn eigen_examples() {
        assert_eq!(
            real_eigen_odd(&m(&[&[5.0]]), 1e-10, 1e-9).unwrap(),
            (5.0, vec![1.0])
        );

        let a = m(&[&[0.0, -2.0, 0.0], &[1.0, 0.0, -1.0], &[0.0, 2.0, 0.0]]);
        let (l, v) = real_eigen_odd(&a, 1e-10, 1e-9).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(l.abs() < 1e-12);
        assert!((v[0] - s).abs() < 1e-12 && v[1].abs() < 1e-12 && (v[2] - s).abs() < 1e-12);

        let d = Matrix::diag(&[1.0, 2.0, 3.0]);
        let (l, v) = real_eigen_odd(&d, 1e-10, 1e-9).unwrap();
        let k = [1.0, 2.0, 3.0]
            .iter()
            .position(|x| (x - l).abs() < 1e-9)
            .expect("eigenvalue of the diagonal");
        assert!((v[k] - 1.0).abs() < 1e-9);

        assert!(real_eigen_odd(&Matrix::identity(2), 1e-10, 1e-9).is_err());
    }

    #[test]
    fn null_basis_examples() {
        let a = m(&[&[-2.0, 0.0, 2.0], &[0.0, -4.0, 0.0], &[2.0, 0.0, -2.0]]);
        let nb = null_basis(&a, 1e-9);
        assert_eq!(nb.dim(), 1);
        let v = &nb.vectors[0];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0].abs() - s).abs() < 1e-12 && v[1].abs() < 1e-12);
        assert!((v[0] - v[2]).abs() < 1e-12);

        assert!(null_basis(&Matrix::identity(4), 1e-9).is_empty());
        let z = null_basis(&Matrix::zeros(3, 3), 1e-9);
        assert_eq!(z.dim(), 3);
    }

    #[test]
    fn range_basis_examples() {
        let a = m(&[&[-2.0, 0.0, 2.0], &[0.0, -4.0, 0.0], &[2.0, 0.0, -2.0]]);
        let rb = range_basis(&a, 1e-9);
        assert_eq!(rb.dim(), 2);
        for v in &rb.vectors {
            assert!(dot(v, &[1.0, 0.0, 1.0]).abs() < 1e-12);
            assert!((norm2(v) - 1.0).abs() < 1e-12);
        }
        assert_eq!(range_basis(&Matrix::identity(3), 1e-9).dim(), 3);
        assert!(range_basis(&Matrix::zeros(3, 3), 1e-9).is_empty());
    }

    #[test]
    fn lift_examples() {
        let rot = m(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let (m1, m2) = lift_operators(&rot);
        assert_eq!(
            m1,
            m(&[&[0.0, -2.0, 0.0], &[1.0, 0.0, -1.0], &[0.0, 2.0, 0.0]])
        );
        assert_eq!(
            m2,
            m(&[&[0.0, 0.0, 1.0], &[0.0, -1.0, 0.0], &[1.0, 0.0, 0.0]])
        );

        let (m1, m2) = lift_operators(&Matrix::identity(3));
        assert_eq!(m1, Matrix::identity(6).scale(2.0));
        assert_eq!(m2, Matrix::identity(6));

        let (m1, m2) = lift_operators(&Matrix::zeros(2, 2));
        assert_eq!(m1, Matrix::zeros(3, 3));
        assert_eq!(m2, Matrix::zeros(3, 3));
    }

    #[test]
    fn restrict_examples() {
        let rot = m(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let (_, m2) = lift_operators(&rot);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let w = SubspaceBasis {
            ambient_dim: 3,
            vectors: vec![vec![s, 0.0, s]],
            tol_used: 0.0,
        };
        assert_eq!(restrict(&m2, &w, 1e-9).unwrap(), m(&[&[1.0]]));

        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(restrict(&a, &SubspaceBasis::standard(2), 1e-9).unwrap(), a);

        let w2 = range_basis(
            &m(&[&[1.0, 1.0, 0.0], &[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0]]),
            1e-9,
        );
        let r = restrict(&Matrix::identity(3), &w2, 1e-9).unwrap();
        assert!(r.sub(&Matrix::identity(w2.dim())).max_abs() < 1e-12);
    }

    #[test]
    fn restrict_detects_non_invariance() {
        let a = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let w = SubspaceBasis {
            ambient_dim: 2,
            vectors: vec![vec![0.0, 1.0]],
            tol_used: 0.0,
        };
        assert!(matches!(
            restrict(&a, &w, 1e-9),
            Err(Error::InvarianceViolated { .. })
        ));
    }

    #[test]
    fn sym_basis_roundtrip() {
        let sb = SymBasis::new(3);
        assert_eq!(sb.dim(), 6);
        let x = m(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 5.0], &[3.0, 5.0, 6.0]]);
        assert_eq!(sb.vech(&x), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(sb.unvech(&sb.vech(&x)), x);
        for k in 0..sb.dim() {
            let e = sb.element(k);
            let mut idx = None;
            for i in 0..3 {
                for j in i..3 {
                    if e[(i, j)] == 1.0 {
                        idx = Some(sb.index(i, j));
                    }
                }
            }
            assert_eq!(idx, Some(k));
        }
    }
}
