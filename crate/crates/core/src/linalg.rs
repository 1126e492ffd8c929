//! Dense exact linear algebra over the rationals.
//!
//! Row reduction with exact arithmetic; used for per-degree solves (kernel
//! bases, affine solution sets, rank checks). Matrices here stay small — a
//! few thousand rows at most — so a dense representation is the simplest
//! correct choice.

use num_traits::Zero;

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct QMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Scalar>,
}

impl QMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Scalar::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(Vec::len).unwrap_or(0);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        QMatrix { rows: r, cols: c, data }
    }

    pub fn at(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        self.data[r * self.cols + c] = v;
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            // find a pivot
            let Some(p) = (row..self.rows).find(|&r| !self.at(r, col).is_zero()) else {
                continue;
            };
            if p != row {
                for c in 0..self.cols {
                    self.data.swap(p * self.cols + c, row * self.cols + c);
                }
            }
            let inv = {
                let piv = self.at(row, col).clone();
                Scalar::new(piv.denom().clone(), piv.numer().clone())
            };
            for c in col..self.cols {
                let v = self.at(row, c) * &inv;
                self.set(row, c, v);
            }
            for r in 0..self.rows {
                if r != row && !self.at(r, col).is_zero() {
                    let factor = self.at(r, col).clone();
                    for c in col..self.cols {
                        let v = self.at(r, c) - &factor * self.at(row, c);
                        self.set(r, c, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }
}

/// Solution of `A x = b` as (one particular solution, kernel basis), or
/// `None` when the system is inconsistent. The particular solution is the
/// canonical one with zeros in all free coordinates.
pub fn solve_affine(a: &QMatrix, b: &[Scalar]) -> Option<(Vec<Scalar>, Vec<Vec<Scalar>>)> {
    assert_eq!(a.rows, b.len());
    let mut aug = QMatrix::zero(a.rows, a.cols + 1);
    for r in 0..a.rows {
        for c in 0..a.cols {
            aug.set(r, c, a.at(r, c).clone());
        }
        aug.set(r, a.cols, b[r].clone());
    }
    let pivots = aug.rref();
    if pivots.contains(&a.cols) {
        return None; // pivot in the augmented column: inconsistent
    }
    let mut particular = vec![Scalar::zero(); a.cols];
    for (r, &pc) in pivots.iter().enumerate() {
        particular[pc] = aug.at(r, a.cols).clone();
    }
    let kernel = kernel_from_rref(&aug, &pivots, a.cols);
    Some((particular, kernel))
}

/// Kernel basis of `A`.
pub fn kernel_basis(a: &QMatrix) -> Vec<Vec<Scalar>> {
    let mut m = a.clone();
    let pivots = m.rref();
    kernel_from_rref(&m, &pivots, a.cols)
}

fn kernel_from_rref(m: &QMatrix, pivots: &[usize], cols: usize) -> Vec<Vec<Scalar>> {
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![Scalar::zero(); cols];
        v[free] = Scalar::from_integer(1.into());
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -m.at(r, free).clone();
        }
        basis.push(v);
    }
    basis
}
