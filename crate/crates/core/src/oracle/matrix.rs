use crate::error::{Error, Result};
use crate::oracle::field::GaloisField;

/// Dense row-major matrix over GF(2^L).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GfMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u16>,
}

impl GfMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        GfMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = GfMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<u16>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(GfMatrix {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> u16) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        GfMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u16 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u16) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u16] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Rows at `indices`, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.rows) {
            return Err(Error::Shape(format!("row {bad} outside 0..{}", self.rows)));
        }
        Ok(GfMatrix {
            rows: indices.len(),
            cols: self.cols,
            data: indices
                .iter()
                .flat_map(|&i| self.row(i).iter().copied())
                .collect(),
        })
    }

    pub fn mul(&self, field: &GaloisField, rhs: &GfMatrix) -> Result<GfMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = GfMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let cur = out.get(i, j);
                    out.set(i, j, cur ^ field.mul(a, rhs.get(k, j)));
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &GfMatrix) -> Result<GfMatrix> {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(Error::Shape("addend shapes differ".into()));
        }
        Ok(GfMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    /// Reduces the leading `pivot_cols` columns to reduced row-echelon form in
    /// place, applying the same row operations to the trailing columns.
    /// Returns the pivot rows' column indices.
    pub(crate) fn reduce(&mut self, field: &GaloisField, pivot_cols: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..pivot_cols.min(self.cols) {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| self.get(r, col) != 0) else {
                continue;
            };
            self.swap_rows(p, row);
            let inv = field.inv(self.get(row, col)).expect("pivot is nonzero");
            for j in 0..self.cols {
                let v = self.get(row, j);
                self.set(row, j, field.mul(v, inv));
            }
            for r in 0..self.rows {
                let factor = self.get(r, col);
                if r == row || factor == 0 {
                    continue;
                }
                for j in 0..self.cols {
                    let v = self.get(r, j) ^ field.mul(factor, self.get(row, j));
                    self.set(r, j, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self, field: &GaloisField) -> usize {
        let mut work = self.clone();
        work.reduce(field, self.cols).len()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_rank_and_product() {
        let f = GaloisField::new(8).unwrap();
        let i = GfMatrix::identity(4);
        assert_eq!(i.rank(&f), 4);
        let a = GfMatrix::from_fn(4, 3, |r, c| (r * 7 + c * 3 + 1) as u16);
        assert_eq!(i.mul(&f, &a).unwrap(), a);
        assert!(a.mul(&f, &a).is_err());
    }

    #[test]
    fn rank_detects_dependent_rows() {
        let f = GaloisField::new(8).unwrap();
        let a = GfMatrix::from_rows(vec![vec![1, 2, 3], vec![2, 4, 6], vec![0, 0, 0]]).unwrap();
        // char 2: row1 * 2 = [2, 4, 6]
        assert_eq!(a.rank(&f), 1);
        assert!(GfMatrix::from_rows(vec![vec![1], vec![1, 2]]).is_err());
    }

    #[test]
    fn select_rows_bounds() {
        let a = GfMatrix::identity(3);
        assert_eq!(a.select_rows(&[2, 0]).unwrap().row(0), &[0, 0, 1]);
        assert!(a.select_rows(&[3]).is_err());
    }
}
