use crate::error::{check_dim, Error, Result};
use crate::metric::dot;

/// Row-major dense matrix. Datasets are small enough that dense storage is fine.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::usage(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        check_dim("matrix data length", rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            check_dim(&format!("row {i}"), cols, row.len())?;
            data.extend_from_slice(row);
        }
        Self::from_row_major(rows.len(), cols, data)
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self::from_row_major(n, n, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `Ax`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("mul_vec", self.cols, x.len())?;
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// `Aᵀy`.
    pub fn tr_mul_vec(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim("tr_mul_vec", self.rows, y.len())?;
        let mut out = vec![0.0; self.cols];
        for (i, yi) in y.iter().enumerate() {
            if *yi != 0.0 {
                for (o, a) in out.iter_mut().zip(self.row(i)) {
                    *o += yi * a;
                }
            }
        }
        Ok(out)
    }

    /// Largest eigenvalue of `AᵀA` (i.e. `‖A‖₂²`) by power iteration.
    ///
    /// Stops once the Rayleigh quotient changes by less than `rel_tol`
    /// relative, or after `max_iters` sweeps.
    pub fn gram_spectral_norm(&self, max_iters: usize, rel_tol: f64) -> f64 {
        // Deterministic, non-degenerate start vector.
        let mut v: Vec<f64> = (0..self.cols)
            .map(|j| 1.0 + 0.5 * ((j as f64) * 0.618_033_988_7).fract())
            .collect();
        let mut lambda = 0.0;
        for _ in 0..max_iters {
            let nv = dot(&v, &v).sqrt();
            if nv == 0.0 {
                return 0.0;
            }
            v.iter_mut().for_each(|e| *e /= nv);
            let av = self.mul_vec(&v).expect("shape checked");
            let w = self.tr_mul_vec(&av).expect("shape checked");
            let next = dot(&v, &w);
            v = w;
            if (next - lambda).abs() <= rel_tol * next.abs() {
                return next;
            }
            lambda = next;
        }
        lambda
    }
}
