use std::fmt;

use crate::error::{shape, Error, Result};

/// Row-major dense matrix of `f64`.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix({}x{})", self.rows, self.cols)?;
        if self.data.len() <= 64 {
            write!(f, " {:?}", self.data)?;
        }
        Ok(())
    }
}

impl Matrix {
    /// Builds a matrix from row-major data; rejects wrong lengths and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(shape(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite entry {} at flat index {pos}",
                data[pos]
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(shape("rows have different lengths"));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact(0) panics; a matrix with no columns yields empty rows.
        let cols = self.cols.max(1);
        self.data.chunks_exact(cols).chain(std::iter::repeat_n(
            &[][..],
            if self.cols == 0 { self.rows } else { 0 },
        ))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Stacks matrices row-wise; all parts need the same column count.
    pub fn vstack(parts: &[&Matrix]) -> Result<Matrix> {
        let cols = parts.first().map_or(0, |m| m.cols);
        if parts.iter().any(|m| m.cols != cols) {
            return Err(shape("vstack parts have different column counts"));
        }
        let mut data = Vec::with_capacity(parts.iter().map(|m| m.data.len()).sum());
        for part in parts {
            data.extend_from_slice(&part.data);
        }
        Ok(Matrix {
            rows: data.len().checked_div(cols).unwrap_or(0),
            cols,
            data,
        })
    }

    /// `self · other`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        gemm(
            self.rows,
            self.cols,
            other.cols,
            (self.as_slice(), self.cols, 1),
            (other.as_slice(), other.cols, 1),
            0.0,
            &mut out,
        );
        Ok(out)
    }

    /// `self · otherᵀ`: a batch of rows pushed through a `(out × in)` weight matrix.
    pub fn matmul_transposed(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(shape(format!(
                "cannot multiply {}x{} by the transpose of {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.rows);
        gemm(
            self.rows,
            self.cols,
            other.rows,
            (self.as_slice(), self.cols, 1),
            (other.as_slice(), 1, other.cols),
            0.0,
            &mut out,
        );
        Ok(out)
    }

    /// `self · other[:, ..k]ᵀ` with `k = self.cols`, as if `self` were padded
    /// with zero columns up to `other.cols`.
    pub fn matmul_transposed_leading(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols > other.cols {
            return Err(shape(format!(
                "{}x{} has more columns than {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.rows);
        gemm(
            self.rows,
            self.cols,
            other.rows,
            (self.as_slice(), self.cols, 1),
            (other.as_slice(), 1, other.cols),
            0.0,
            &mut out,
        );
        Ok(out)
    }

    /// `selfᵀ · other`, accumulated into `acc` when given (`acc += selfᵀ · other`).
    pub fn transpose_matmul_into(&self, other: &Matrix, acc: &mut Matrix) -> Result<()> {
        if self.rows != other.rows || acc.shape() != (self.cols, other.cols) {
            return Err(shape(format!(
                "cannot accumulate ({}x{})ᵀ·{}x{} into {}x{}",
                self.rows, self.cols, other.rows, other.cols, acc.rows, acc.cols
            )));
        }
        gemm(
            self.cols,
            self.rows,
            other.cols,
            (self.as_slice(), 1, self.cols),
            (other.as_slice(), other.cols, 1),
            1.0,
            acc,
        );
        Ok(())
    }

    /// `acc += self[..k]ᵀ · other[..k]`, using only the first `k` rows of both.
    /// `acc` may be wider than `other`; only its leading columns are touched.
    pub fn transpose_matmul_prefix_into(
        &self,
        other: &Matrix,
        k: usize,
        acc: &mut Matrix,
    ) -> Result<()> {
        if k > self.rows || k > other.rows || acc.rows != self.cols || acc.cols < other.cols {
            return Err(shape(format!(
                "cannot accumulate the first {k} rows of ({}x{})ᵀ·{}x{} into {}x{}",
                self.rows, self.cols, other.rows, other.cols, acc.rows, acc.cols
            )));
        }
        gemm(
            self.cols,
            k,
            other.cols,
            (&self.data[..k * self.cols], 1, self.cols),
            (&other.data[..k * other.cols], other.cols, 1),
            1.0,
            acc,
        );
        Ok(())
    }

    pub fn transpose_matmul(&self, other: &Matrix) -> Result<Matrix> {
        let mut out = Matrix::zeros(self.cols, other.cols);
        self.transpose_matmul_into(other, &mut out)?;
        Ok(out)
    }

    /// Concatenates matrices column-wise (`[a | b | c]`); all parts need the same row count.
    pub fn hconcat(parts: &[&Matrix]) -> Result<Matrix> {
        let rows = parts.first().map_or(0, |m| m.rows);
        if parts.iter().any(|m| m.rows != rows) {
            return Err(shape("hconcat parts have different row counts"));
        }
        let cols: usize = parts.iter().map(|m| m.cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for part in parts {
                data.extend_from_slice(part.row(i));
            }
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Gathers the given rows, in order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    /// Rows `[start, end)` as a new matrix.
    pub fn slice_rows(&self, start: usize, end: usize) -> Matrix {
        Matrix {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn fill(&mut self, value: f64) {
        self.data.fill(value);
    }

    /// Rounds every entry to the nearest `f32` (the checkpoint storage precision).
    pub fn round_to_f32(&mut self) {
        for x in &mut self.data {
            *x = *x as f32 as f64;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `c = a · b + beta · c` for strided views `(data, row_stride, col_stride)`.
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: (&[f64], usize, usize),
    b: (&[f64], usize, usize),
    beta: f64,
    c: &mut Matrix,
) {
    debug_assert!(c.rows == m && c.cols >= n);
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        if beta == 0.0 {
            for row in c.data.chunks_mut(c.cols) {
                row[..n].fill(0.0);
            }
        }
        return;
    }
    let (a, rsa, csa) = a;
    let (b, rsb, csb) = b;
    assert!((m - 1) * rsa + (k - 1) * csa < a.len());
    assert!((k - 1) * rsb + (n - 1) * csb < b.len());
    // SAFETY: the asserts above bound every index the kernel reads from `a` and `b`,
    // and `c` is an exclusively borrowed contiguous m×n row-major buffer.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.data.as_mut_ptr(),
            c.cols as isize,
            1,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &Matrix, b: &Matrix) -> Matrix {
        Matrix::from_fn(a.rows(), b.cols(), |i, j| {
            (0..a.cols()).map(|p| a.get(i, p) * b.get(p, j)).sum()
        })
    }

    fn sample(rows: usize, cols: usize, salt: f64) -> Matrix {
        Matrix::from_fn(rows, cols, |i, j| {
            ((i * 7 + j * 3) as f64 * 0.37 + salt).sin()
        })
    }

    #[test]
    fn products_agree_with_naive_loops() {
        let a = sample(5, 7, 0.1);
        let b = sample(7, 4, 0.2);
        assert!(a.matmul(&b).unwrap().max_abs_diff(&naive(&a, &b)) < 1e-12);

        let w = sample(4, 7, 0.3);
        let expected = naive(&a, &w.transpose());
        assert!(a.matmul_transposed(&w).unwrap().max_abs_diff(&expected) < 1e-12);

        let c = sample(5, 3, 0.4);
        let expected = naive(&a.transpose(), &c);
        assert!(a.transpose_matmul(&c).unwrap().max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn transpose_matmul_accumulates() {
        let a = sample(3, 2, 0.5);
        let b = sample(3, 4, 0.6);
        let mut acc = Matrix::from_fn(2, 4, |_, _| 1.0);
        a.transpose_matmul_into(&b, &mut acc).unwrap();
        let expected = naive(&a.transpose(), &b).map(|x| x + 1.0);
        assert!(acc.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn shape_errors() {
        let a = Matrix::zeros(2, 3);
        assert!(matches!(
            a.matmul(&Matrix::zeros(2, 3)),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            a.matmul_transposed(&Matrix::zeros(3, 2)),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            Matrix::new(2, 2, vec![0.0; 3]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            Matrix::new(1, 2, vec![0.0, f64::NAN]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn vstack_and_prefix_product() {
        let a = sample(2, 3, 0.1);
        let b = sample(3, 3, 0.2);
        let s = Matrix::vstack(&[&a, &b]).unwrap();
        assert_eq!(s.shape(), (5, 3));
        assert_eq!(s.slice_rows(2, 5), b);
        assert!(Matrix::vstack(&[&a, &Matrix::zeros(1, 2)]).is_err());
        let other = sample(5, 4, 0.3);
        let mut acc = Matrix::zeros(3, 4);
        s.transpose_matmul_prefix_into(&other, 2, &mut acc).unwrap();
        let expected = naive(&a.transpose(), &other.slice_rows(0, 2));
        assert!(acc.max_abs_diff(&expected) < 1e-12);
        assert!(s.transpose_matmul_prefix_into(&other, 6, &mut acc).is_err());
    }

    #[test]
    fn leading_products_match_zero_padding_bitwise() {
        let x = sample(7, 300, 0.1);
        let w = sample(5, 420, 0.2);
        let padded = Matrix::hconcat(&[&x, &Matrix::zeros(7, 120)]).unwrap();
        assert_eq!(
            x.matmul_transposed_leading(&w).unwrap(),
            padded.matmul_transposed(&w).unwrap()
        );
        assert!(w.matmul_transposed_leading(&x).is_err());

        let dz = sample(7, 5, 0.3);
        let mut narrow = Matrix::zeros(5, 420);
        dz.transpose_matmul_prefix_into(&x, 6, &mut narrow).unwrap();
        let mut full = Matrix::zeros(5, 420);
        dz.transpose_matmul_prefix_into(&padded, 6, &mut full)
            .unwrap();
        assert_eq!(narrow, full);
    }

    #[test]
    fn hconcat_orders_columns() {
        let a = Matrix::new(2, 1, vec![1.0, 2.0]).unwrap();
        let b = Matrix::new(2, 2, vec![3.0, 4.0, 5.0, 6.0]).unwrap();
        let c = Matrix::hconcat(&[&a, &b]).unwrap();
        assert_eq!(c.as_slice(), &[1.0, 3.0, 4.0, 2.0, 5.0, 6.0]);
        assert!(Matrix::hconcat(&[&a, &Matrix::zeros(3, 1)]).is_err());
    }

    #[test]
    fn empty_dimensions() {
        let a = Matrix::zeros(0, 4);
        assert_eq!(
            a.matmul_transposed(&Matrix::zeros(3, 4)).unwrap().shape(),
            (0, 3)
        );
        let b = Matrix::zeros(2, 0);
        assert_eq!(b.matmul(&Matrix::zeros(0, 3)).unwrap(), Matrix::zeros(2, 3));
        assert_eq!(b.row_iter().count(), 2);
    }
}
