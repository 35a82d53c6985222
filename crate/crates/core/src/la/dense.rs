use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;

use super::{check_dim, LaError, LinearOperator};

/// Dense processing is refused above this order.
pub const DENSE_LIMIT: usize = 2000;

/// Row-major dense matrix used for small oracles.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Materializes an operator column by column.
    pub fn from_operator(op: &dyn LinearOperator) -> Self {
        let (r, c) = (op.nrows(), op.ncols());
        let mut m = Self::zeros(r, c);
        let mut e = vec![0.0; c];
        let mut y = vec![0.0; r];
        for j in 0..c {
            e[j] = 1.0;
            op.apply(&e, &mut y);
            for i in 0..r {
                m[(i, j)] = y[i];
            }
            e[j] = 0.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix, LaError> {
        check_dim("dense matmul", self.cols, rhs.rows)?;
        let mut c = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    c.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        Ok(c)
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    fn check_size(&self) -> Result<(), LaError> {
        let size = self.rows.max(self.cols);
        if size > DENSE_LIMIT {
            Err(LaError::TooLarge {
                size,
                limit: DENSE_LIMIT,
            })
        } else {
            Ok(())
        }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting, reusable for many right-hand sides.
#[derive(Clone, Debug)]
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl DenseLu {
    pub fn new(a: &DenseMatrix) -> Result<Self, LaError> {
        check_dim("lu", a.rows, a.cols)?;
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = f64::EPSILON * scale * n.max(1) as f64;
        for k in 0..n {
            let (p, pv) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |b, c| if c.1 > b.1 { c } else { b });
            if pv <= tiny || pv == 0.0 {
                return Err(LaError::Singular {
                    column: k,
                    pivot: pv,
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= f * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    pub fn order(&self) -> usize {
        self.n
    }
}

impl LinearOperator for DenseLu {
    fn nrows(&self) -> usize {
        self.n
    }
    fn ncols(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&self.solve(x));
    }
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn dense_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, LaError> {
    check_dim("dense_solve", a.rows, b.len())?;
    a.check_size()?;
    Ok(DenseLu::new(a)?.solve(b))
}

/// Generalized symmetric eigenvalues of `A v = λ M v`, ascending.
///
/// `M` is Cholesky-factored (`M = L Lᵀ`) and the problem reduced to the
/// standard form `L⁻¹ A L⁻ᵀ`.
pub fn dense_eigs_sym(a: &DenseMatrix, m: &DenseMatrix) -> Result<Vec<f64>, LaError> {
    check_dim("eigs rows", a.rows, a.cols)?;
    check_dim("eigs M", a.rows, m.rows)?;
    check_dim("eigs M", m.rows, m.cols)?;
    a.check_size()?;
    let chol = m
        .to_nalgebra()
        .cholesky()
        .ok_or(LaError::NotPositiveDefinite)?;
    let l = chol.l();
    let an = a.to_nalgebra();
    let an = (&an + an.transpose()) * 0.5;
    let y = l
        .solve_lower_triangular(&an)
        .ok_or(LaError::NotPositiveDefinite)?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or(LaError::NotPositiveDefinite)?;
    let c = (&c + c.transpose()) * 0.5;
    let mut ev: Vec<f64> = c.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    Ok(ev)
}

/// Numerical rank from singular values above `rel_tol · σ_max`.
pub fn dense_rank(a: &DenseMatrix, rel_tol: f64) -> Result<usize, LaError> {
    a.check_size()?;
    if a.rows == 0 || a.cols == 0 {
        return Ok(0);
    }
    let sv = a.to_nalgebra().singular_values();
    let smax = sv.iter().fold(0.0f64, |m, v| m.max(*v));
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > rel_tol * smax).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Householder-style random orthogonal matrix via Gram-Schmidt.
    fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
        let mut q: Vec<Vec<f64>> = Vec::new();
        while q.len() < n {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for u in &q {
                let d: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= d * y);
            }
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nv > 1e-6 {
                q.push(v.into_iter().map(|x| x / nv).collect());
            }
        }
        DenseMatrix::from_rows(&q)
    }

    #[test]
    fn solve_identity() {
        let x = dense_solve(&DenseMatrix::identity(3), &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(x, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn solve_needs_pivoting() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 1.0]]);
        let x = dense_solve(&a, &[2.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn singular_is_reported() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(
            dense_solve(&a, &[1.0, 1.0]),
            Err(LaError::Singular { .. })
        ));
    }

    #[test]
    fn small_eigenproblems() {
        let ev = dense_eigs_sym(&DenseMatrix::from_diagonal(&[2.0, 3.0]), &DenseMatrix::identity(2))
            .unwrap();
        assert!((ev[0] - 2.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let ev = dense_eigs_sym(&a, &DenseMatrix::identity(2)).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn generalized_diagonal_pencil() {
        let a = DenseMatrix::from_diagonal(&[2.0, 9.0]);
        let m = DenseMatrix::from_diagonal(&[4.0, 3.0]);
        let ev = dense_eigs_sym(&a, &m).unwrap();
        assert!((ev[0] - 0.5).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
        assert!(matches!(
            dense_eigs_sym(&a, &DenseMatrix::from_diagonal(&[1.0, -1.0])),
            Err(LaError::NotPositiveDefinite)
        ));
    }

    #[test]
    fn recovers_known_spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for n in [5usize, 12, 30] {
            let q = random_orthogonal(&mut rng, n);
            let spec: Vec<f64> = (0..n).map(|i| 0.5 + i as f64 * 1.7).collect();
            let a = q
                .transpose()
                .matmul(&DenseMatrix::from_diagonal(&spec))
                .unwrap()
                .matmul(&q)
                .unwrap();
            let ev = dense_eigs_sym(&a, &DenseMatrix::identity(n)).unwrap();
            for (e, s) in ev.iter().zip(&spec) {
                assert!((e - s).abs() <= 1e-10 * s, "{e} vs {s}");
            }
        }
    }

    #[test]
    fn rank_of_outer_product() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]);
        assert_eq!(dense_rank(&a, 1e-12).unwrap(), 1);
        assert_eq!(dense_rank(&DenseMatrix::identity(4), 1e-12).unwrap(), 4);
    }

    #[test]
    fn too_large_is_refused() {
        let a = DenseMatrix::zeros(DENSE_LIMIT + 1, 1);
        assert!(matches!(dense_rank(&a, 1e-12), Err(LaError::TooLarge { .. })));
    }
}
