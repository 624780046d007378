//! Vector and induced matrix norms with orientation-aware semantics.
//!
//! A row vector and its transpose have different induced 1-norms (the
//! 1-norm of a 1-by-n row is its largest entry magnitude, of an n-by-1
//! column the entry sum), and the crossing bounds depend on exactly this
//! distinction. Orientation is therefore part of the type.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NormError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("weight vector must be componentwise positive")]
    NonPositiveWeight,
    #[error("pseudo-inverse of the zero row is undefined")]
    ZeroGradient,
}

/// 1-by-n row vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RowVec(pub Vec<f64>);

/// n-by-1 column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ColVec(pub Vec<f64>);

/// Dense m-by-n matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RowVec {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn transpose(&self) -> ColVec {
        ColVec(self.0.clone())
    }
}

impl ColVec {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn transpose(&self) -> RowVec {
        RowVec(self.0.clone())
    }
}

impl Mat {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(rows * cols, data.len());
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend_from_slice(row);
        }
        Mat {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_row(v: &RowVec) -> Self {
        Mat::new(1, v.len(), v.0.clone())
    }

    pub fn from_col(v: &ColVec) -> Self {
        Mat::new(v.len(), 1, v.0.clone())
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::new(n, n, vec![0.0; n * n]);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::new(self.rows, other.cols, vec![0.0; self.rows * other.cols]);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }
}

/// Sum of entry magnitudes of a column vector.
pub fn norm1_col(v: &ColVec) -> f64 {
    v.0.iter().map(|x| x.abs()).sum()
}

/// Largest entry magnitude of a column vector.
pub fn norminf_col(v: &ColVec) -> f64 {
    v.0.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
}

/// Induced 1-norm: largest absolute column sum.
pub fn matnorm1(m: &Mat) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.cols() {
        let mut s = 0.0;
        for i in 0..m.rows() {
            s += m.get(i, j).abs();
        }
        best = best.max(s);
    }
    best
}

/// Induced infinity-norm: largest absolute row sum.
pub fn matnorminf(m: &Mat) -> f64 {
    let mut best = 0.0f64;
    for i in 0..m.rows() {
        let mut s = 0.0;
        for j in 0..m.cols() {
            s += m.get(i, j).abs();
        }
        best = best.max(s);
    }
    best
}

/// Largest entry magnitude.
pub fn matnormmax(m: &Mat) -> f64 {
    m.data.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
}

/// Weighted infinity norm `max_i |v_i| / eps_i` for positive weights.
pub fn weighted_inf_norm(v: &ColVec, eps: &[f64]) -> Result<f64, NormError> {
    if v.len() != eps.len() {
        return Err(NormError::DimensionMismatch {
            expected: v.len(),
            got: eps.len(),
        });
    }
    if eps.iter().any(|&e| !(e > 0.0)) {
        return Err(NormError::NonPositiveWeight);
    }
    Ok(v.0
        .iter()
        .zip(eps)
        .fold(0.0, |acc: f64, (x, e)| acc.max(x.abs() / e)))
}

/// Pseudo-inverse of a nonzero row: `J^t / ||J||_2^2`, the right inverse
/// of the row (`J * pinv(J) = 1`).
pub fn pseudo_inverse_row(j: &RowVec) -> Result<ColVec, NormError> {
    let sq: f64 = j.0.iter().map(|x| x * x).sum();
    if sq == 0.0 {
        return Err(NormError::ZeroGradient);
    }
    Ok(ColVec(j.0.iter().map(|x| x / sq).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn column_norms() {
        let v = ColVec(vec![1.0, -2.0, 3.0]);
        assert_eq!(norm1_col(&v), 6.0);
        assert_eq!(norminf_col(&v), 3.0);
        let z = ColVec(vec![0.0, 0.0]);
        assert_eq!(norm1_col(&z), 0.0);
        assert_eq!(norminf_col(&z), 0.0);
        assert_eq!(norm1_col(&ColVec(vec![])), 0.0);
        // gradient of y^2 + x^3 - x - 3 at (0, 1.7), as a column
        let g = ColVec(vec![-1.0, 3.4]);
        assert!((norm1_col(&g) - 4.4).abs() < 1e-15);
    }

    #[test]
    fn matrix_norms_on_hessian() {
        let h = Mat::from_rows(&[vec![8.0, 0.0], vec![0.0, 2.0]]);
        assert_eq!(matnorminf(&h), 8.0);
        assert_eq!(matnorm1(&h), 8.0);
        assert_eq!(matnormmax(&h), 8.0);
    }

    #[test]
    fn orientation_changes_the_one_norm() {
        let row = RowVec(vec![-2.0, 1.0]);
        assert_eq!(matnorm1(&Mat::from_row(&row)), 2.0);
        assert_eq!(matnorm1(&Mat::from_col(&row.transpose())), 3.0);
    }

    #[test]
    fn identity_norms() {
        let id = Mat::identity(3);
        assert_eq!(matnorm1(&id), 1.0);
        assert_eq!(matnorminf(&id), 1.0);
        assert_eq!(matnormmax(&id), 1.0);
    }

    #[test]
    fn weighted_inf_examples() {
        let eps = [0.05, 0.1];
        let n = |v: Vec<f64>| weighted_inf_norm(&ColVec(v), &eps).unwrap();
        assert!((n(vec![0.05, 0.1]) - 1.0).abs() < 1e-15);
        assert!((n(vec![0.025, 0.0]) - 0.5).abs() < 1e-15);
        assert!((n(vec![0.06, 0.0]) - 1.2).abs() < 1e-15);
        assert_eq!(
            weighted_inf_norm(&ColVec(vec![1.0]), &[0.0]),
            Err(NormError::NonPositiveWeight)
        );
        assert_eq!(
            weighted_inf_norm(&ColVec(vec![1.0]), &[0.1, 0.1]),
            Err(NormError::DimensionMismatch {
                expected: 1,
                got: 2
            })
        );
    }

    #[test]
    fn pseudo_inverse_examples() {
        let p = pseudo_inverse_row(&RowVec(vec![-1.0, 3.4])).unwrap();
        assert!((p.0[0] - (-1.0 / 12.56)).abs() < 1e-15);
        assert!((p.0[1] - 3.4 / 12.56).abs() < 1e-15);
        assert!((norminf_col(&p) - 0.2707006369426752).abs() < 1e-12);

        let unit = pseudo_inverse_row(&RowVec(vec![1.0, 0.0, 0.0])).unwrap();
        assert_eq!(unit.0, vec![1.0, 0.0, 0.0]);

        assert_eq!(
            pseudo_inverse_row(&RowVec(vec![0.0, 0.0])),
            Err(NormError::ZeroGradient)
        );
    }

    /// Power-iteration estimate of the induced 2-norm; test-only, used to
    /// exercise the norm-equivalence inequalities.
    fn matnorm2_estimate(m: &Mat) -> f64 {
        let n = m.cols();
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64) * 0.3).collect();
        let mut sigma = 0.0;
        for _ in 0..500 {
            // w = M^t M v
            let mut mv = vec![0.0; m.rows()];
            for i in 0..m.rows() {
                for j in 0..n {
                    mv[i] += m.get(i, j) * v[j];
                }
            }
            let mut w = vec![0.0; n];
            for j in 0..n {
                for i in 0..m.rows() {
                    w[j] += m.get(i, j) * mv[i];
                }
            }
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            sigma = norm.sqrt();
            for x in &mut w {
                *x /= norm;
            }
            v = w;
        }
        sigma
    }

    fn small_mat() -> impl Strategy<Value = Mat> {
        (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-10.0f64..10.0, r * c)
                .prop_map(move |data| Mat::new(r, c, data))
        })
    }

    proptest! {
        #[test]
        fn holder_inequality(
            pair in (1usize..8).prop_flat_map(|n| (
                proptest::collection::vec(-10.0f64..10.0, n),
                proptest::collection::vec(-10.0f64..10.0, n),
            ))
        ) {
            let (a, b) = pair;
            let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            let bound = norm1_col(&ColVec(a)) * norminf_col(&ColVec(b));
            prop_assert!(dot.abs() <= bound * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn submultiplicative(
            a in small_mat(),
            bdata in proptest::collection::vec(-10.0f64..10.0, 4 * 4),
        ) {
            let b = Mat::new(a.cols(), 4, bdata[..a.cols() * 4].to_vec());
            let ab = a.matmul(&b);
            prop_assert!(matnorm1(&ab) <= matnorm1(&a) * matnorm1(&b) * (1.0 + 1e-12) + 1e-300);
            prop_assert!(matnorminf(&ab) <= matnorminf(&a) * matnorminf(&b) * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn norm_equivalences(m in small_mat()) {
            let n2 = matnorm2_estimate(&m);
            let (rows, cols) = (m.rows() as f64, m.cols() as f64);
            let tol = 1e-6 * (1.0 + matnormmax(&m));
            prop_assert!(matnorminf(&m) / cols.sqrt() <= n2 + tol);
            prop_assert!(n2 <= rows.sqrt() * matnorminf(&m) + tol);
            prop_assert!(matnorm1(&m) / rows.sqrt() <= n2 + tol);
            prop_assert!(n2 <= cols.sqrt() * matnorm1(&m) + tol);
            prop_assert!(matnormmax(&m) <= n2 + tol);
            prop_assert!(n2 <= (rows * cols).sqrt() * matnormmax(&m) + tol);
        }

        #[test]
        fn pseudo_inverse_is_right_inverse(
            v in proptest::collection::vec(-10.0f64..10.0, 1..8)
        ) {
            prop_assume!(v.iter().any(|&x| x.abs() > 1e-3));
            let row = RowVec(v);
            let pinv = pseudo_inverse_row(&row).unwrap();
            let prod: f64 = row.0.iter().zip(&pinv.0).map(|(a, b)| a * b).sum();
            // within 4 ulps of 1
            prop_assert!((prod - 1.0).abs() <= 4.0 * f64::EPSILON);
        }

        #[test]
        fn row_orientation_identity(v in proptest::collection::vec(-10.0f64..10.0, 1..8)) {
            let row = RowVec(v.clone());
            let max = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let sum: f64 = v.iter().map(|x| x.abs()).sum();
            prop_assert_eq!(matnorm1(&Mat::from_row(&row)), max);
            prop_assert_eq!(matnorm1(&Mat::from_col(&row.transpose())), sum);
            prop_assert_eq!(matnorminf(&Mat::from_row(&row)), sum);
        }
    }
}
