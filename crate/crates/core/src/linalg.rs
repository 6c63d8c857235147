use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Dot product with four independent accumulators so the loop vectorizes.
/// Summation order is fixed, so results are reproducible.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..n {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Lower Cholesky factor stored row-major in a dense `n × n` buffer.
/// Entries above the diagonal are zero.
#[derive(Clone, Debug)]
pub(crate) struct LowerFactor {
    n: usize,
    l: Vec<f64>,
}

/// Failure of the factorization: index and value of the first non-positive pivot.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PivotFailure {
    pub index: usize,
    pub pivot: f64,
}

impl LowerFactor {
    /// Factorizes the symmetric matrix whose lower triangle is stored row-major in `a`.
    pub fn new(mut a: Vec<f64>, n: usize) -> std::result::Result<Self, PivotFailure> {
        assert_eq!(a.len(), n * n);
        for i in 0..n {
            for j in 0..=i {
                let (head, tail) = a.split_at_mut(i * n);
                let row_i = &tail[..n];
                let s = if j == i {
                    row_i[i] - dot(&row_i[..i], &row_i[..i])
                } else {
                    let row_j = &head[j * n..j * n + n];
                    (row_i[j] - dot(&row_i[..j], &row_j[..j])) / row_j[j]
                };
                if j == i {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(PivotFailure { index: i, pivot: s });
                    }
                    tail[i] = s.sqrt();
                } else {
                    tail[j] = s;
                }
            }
            for v in &mut a[i * n + i + 1..i * n + n] {
                *v = 0.0;
            }
        }
        Ok(Self { n, l: a })
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.l[i * self.n..(i + 1) * self.n]
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.l[i * self.n + i]
    }

    /// Solves `L x = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [f64]) {
        for i in 0..self.n {
            let row = self.row(i);
            b[i] = (b[i] - dot(&row[..i], &b[..i])) / row[i];
        }
    }

    /// Solves `Lᵀ x = b` in place.
    pub fn solve_upper_in_place(&self, b: &mut [f64]) {
        for i in (0..self.n).rev() {
            let row = self.row(i);
            b[i] /= row[i];
            let xi = b[i];
            for k in 0..i {
                b[k] -= row[k] * xi;
            }
        }
    }

    /// Solves `(L Lᵀ) x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_lower_in_place(&mut x);
        self.solve_upper_in_place(&mut x);
        x
    }

    pub fn log_det_half(&self) -> f64 {
        (0..self.n).map(|i| self.diag(i).ln()).sum()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.l)
    }
}

/// Ordinary least squares via column-scaled Householder QR.
///
/// Columns are scaled to unit norm before factorization; the design is
/// declared rank-deficient when a diagonal of `R` falls below `1e-10` relative
/// to the largest one.
pub(crate) fn least_squares(design: &DMatrix<f64>, y: &[f64]) -> Result<Vec<f64>> {
    let (n, p) = design.shape();
    if n < p {
        return Err(Error::RankDeficient(format!("{n} rows for {p} unknowns")));
    }
    let mut scaled = design.clone();
    let mut scales = vec![1.0; p];
    for (j, s) in scales.iter_mut().enumerate() {
        let norm = scaled.column(j).norm();
        if norm == 0.0 {
            return Err(Error::RankDeficient(format!("column {j} is identically zero")));
        }
        *s = norm;
        scaled.column_mut(j).scale_mut(1.0 / norm);
    }
    let qr = scaled.qr();
    let r = qr.r();
    let rmax = (0..p).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    for i in 0..p {
        if r[(i, i)].abs() <= 1e-10 * rmax {
            return Err(Error::RankDeficient(format!(
                "column {i} is (nearly) a combination of the others"
            )));
        }
    }
    let qty = qr.q().transpose() * DVector::from_column_slice(y);
    let coef = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::RankDeficient("singular triangular factor".into()))?;
    Ok(coef.iter().zip(&scales).map(|(c, s)| c / s).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize) -> DMatrix<f64> {
        let b = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) % 11) as f64 / 11.0 - 0.4);
        &b * b.transpose() + DMatrix::identity(n, n)
    }

    #[test]
    fn factor_reconstructs() {
        let a = spd(13);
        let f = LowerFactor::new(a.transpose().as_slice().to_vec(), 13).unwrap();
        let l = f.to_dmatrix();
        let err = (&l * l.transpose() - &a).norm() / a.norm();
        assert!(err < 1e-14, "{err}");
    }

    #[test]
    fn solve_matches_dense() {
        let a = spd(9);
        let b: Vec<f64> = (0..9).map(|i| i as f64 - 3.5).collect();
        let f = LowerFactor::new(a.transpose().as_slice().to_vec(), 9).unwrap();
        let x = f.solve(&b);
        let r = &a * DVector::from_vec(x) - DVector::from_vec(b);
        assert!(r.norm() < 1e-12);
    }

    #[test]
    fn reports_failing_pivot() {
        let a = vec![1.0, 2.0, 2.0, 1.0];
        let e = LowerFactor::new(a, 2).unwrap_err();
        assert_eq!(e.index, 1);
        assert!((e.pivot + 3.0).abs() < 1e-12);
    }

    #[test]
    fn least_squares_exact_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let design = DMatrix::from_fn(10, 2, |i, j| if j == 0 { 1.0 } else { x[i] });
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let c = least_squares(&design, &y).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-12 && (c[1] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn least_squares_rank_deficient() {
        let design = DMatrix::from_fn(6, 2, |i, _| i as f64 + 1.0);
        assert!(matches!(
            least_squares(&design, &[1.0; 6]),
            Err(Error::RankDeficient(_))
        ));
    }
}
