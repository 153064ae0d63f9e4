use std::io::Write;

use faer::Mat;

use super::linear::LinearOperator;
use crate::error::Result;
use crate::C64;

/// Compressed sparse row matrix with complex values.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl SparseMatrix {
    pub fn with_capacity(ncols: usize, nnz: usize) -> Self {
        SparseMatrix {
            nrows: 0,
            ncols,
            row_ptr: vec![0],
            col_idx: Vec::with_capacity(nnz),
            values: Vec::with_capacity(nnz),
        }
    }

    /// Appends one row. Columns must be strictly increasing and in range.
    pub fn push_row(&mut self, entries: impl IntoIterator<Item = (usize, C64)>) {
        let start = self.col_idx.len();
        for (c, v) in entries {
            debug_assert!(c < self.ncols);
            debug_assert!(self.col_idx.len() == start || *self.col_idx.last().unwrap() < c);
            self.col_idx.push(c);
            self.values.push(v);
        }
        self.row_ptr.push(self.col_idx.len());
        self.nrows += 1;
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[C64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    /// Scales row `i` by `s[i]` (left multiplication by a diagonal).
    pub fn scale_rows(&mut self, s: &[C64]) {
        for (i, si) in s.iter().enumerate().take(self.nrows) {
            for v in &mut self.values[self.row_ptr[i]..self.row_ptr[i + 1]] {
                *v *= si;
            }
        }
    }

    /// Debug dump as CSV `row,col,re,im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["row", "col", "re", "im"])?;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                wtr.write_record([i.to_string(), c.to_string(), v.re.to_string(), v.im.to_string()])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

impl LinearOperator for SparseMatrix {
    fn nrows(&self) -> usize {
        self.nrows
    }

    fn ncols(&self) -> usize {
        self.ncols
    }

    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            *yi = self.col_idx[r.clone()]
                .iter()
                .zip(&self.values[r])
                .map(|(&c, v)| v * x[c])
                .sum();
        }
    }

    fn adjoint_into(&self, y: &[C64], x: &mut [C64]) {
        x.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (i, yi) in y.iter().enumerate() {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            for (&c, v) in self.col_idx[r.clone()].iter().zip(&self.values[r]) {
                x[c] += v.conj() * yi;
            }
        }
    }

    fn to_dense(&self) -> Mat<C64> {
        let mut out = Mat::<C64>::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                out[(i, c)] = v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::linear::adjoint_mismatch;

    fn small() -> SparseMatrix {
        let mut s = SparseMatrix::with_capacity(4, 5);
        s.push_row([(0, C64::new(1.0, 0.0)), (2, C64::new(0.0, 2.0))]);
        s.push_row([]);
        s.push_row([(1, C64::new(-1.0, 1.0)), (2, C64::new(3.0, 0.0)), (3, C64::new(0.5, 0.0))]);
        s
    }

    #[test]
    fn apply_and_adjoint() {
        let s = small();
        let x = [C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(0.0, 1.0), C64::new(1.0, 1.0)];
        let y = s.apply(&x);
        assert_eq!(y[0], C64::new(-1.0, 0.0));
        assert_eq!(y[1], C64::new(0.0, 0.0));
        assert_eq!(y[2], C64::new(-1.5, 5.5));
        let u = [C64::new(0.3, -1.0), C64::new(2.0, 0.0), C64::new(0.0, 0.7)];
        assert!(adjoint_mismatch(&s, &x, &u) < 1e-15);
        assert_eq!(s.nnz(), 5);
        assert_eq!(s.row_nnz(1), 0);
    }

    #[test]
    fn csv_dump() {
        let mut buf = Vec::new();
        small().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("row,col,re,im\n0,0,1,0\n0,2,0,2\n2,1,-1,1\n"));
    }
}
