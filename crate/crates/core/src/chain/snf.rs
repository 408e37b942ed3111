//! Smith normal form of small dense integer matrices.
//!
//! Used as an independent check on chain systems: the system map is onto
//! `Z^n` exactly when all `n` invariant factors are 1. Plain elementary
//! row/column elimination over `BigInt`; intended for oracle-scale inputs.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use thiserror::Error;

pub const DEFAULT_SNF_BOUND: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SnfError {
    #[error("matrix is {rows}x{cols}; dimensions are limited to {bound}")]
    TooLarge {
        rows: usize,
        cols: usize,
        bound: usize,
    },
    #[error("rows have unequal lengths")]
    Ragged,
}

/// Row-major dense integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self, SnfError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(SnfError::Ragged);
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self, SnfError> {
        Self::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&v| BigInt::from(v)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] -= factor * row[src]
    fn sub_row(&mut self, dst: usize, src: usize, factor: &BigInt) {
        for j in 0..self.cols {
            let t = factor * self.get(src, j);
            self.data[dst * self.cols + j] -= t;
        }
    }

    /// col[dst] -= factor * col[src]
    fn sub_col(&mut self, dst: usize, src: usize, factor: &BigInt) {
        for i in 0..self.rows {
            let t = factor * self.get(i, src);
            self.data[i * self.cols + dst] -= t;
        }
    }
}

/// Invariant factors `d_1 | d_2 | ...`, `min(rows, cols)` of them, each
/// nonnegative, using [`DEFAULT_SNF_BOUND`].
pub fn smith_normal_form(matrix: &IntMatrix) -> Result<Vec<BigInt>, SnfError> {
    smith_normal_form_bounded(matrix, DEFAULT_SNF_BOUND)
}

pub fn smith_normal_form_bounded(
    matrix: &IntMatrix,
    bound: usize,
) -> Result<Vec<BigInt>, SnfError> {
    if matrix.rows > bound || matrix.cols > bound {
        return Err(SnfError::TooLarge {
            rows: matrix.rows,
            cols: matrix.cols,
            bound,
        });
    }
    let mut a = matrix.clone();
    let diag = a.rows.min(a.cols);
    let mut factors = Vec::with_capacity(diag);

    for t in 0..diag {
        let Some((pi, pj)) = min_nonzero(&a, t) else {
            factors.resize(diag, BigInt::zero());
            break;
        };
        a.swap_rows(t, pi);
        a.swap_cols(t, pj);

        loop {
            if !clear_pivot_cross(&mut a, t) {
                continue;
            }
            // pivot must divide the whole trailing block
            let offender = (t + 1..a.rows).find_map(|i| {
                (t + 1..a.cols)
                    .find(|&j| !a.get(i, j).is_multiple_of(a.get(t, t)))
                    .map(|_| i)
            });
            match offender {
                Some(i) => {
                    let minus_one = BigInt::from(-1);
                    a.sub_row(t, i, &minus_one);
                }
                None => break,
            }
        }
        factors.push(a.get(t, t).abs());
    }
    Ok(factors)
}

/// Position of the nonzero entry of least magnitude in the block `[t.., t..]`.
fn min_nonzero(a: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..a.rows {
        for j in t..a.cols {
            let v = a.get(i, j);
            if v.is_zero() {
                continue;
            }
            match best {
                Some((bi, bj)) if a.get(bi, bj).abs() <= v.abs() => {}
                _ => best = Some((i, j)),
            }
        }
    }
    best
}

/// Reduces row `t` and column `t` against the pivot. Returns `false` if a
/// smaller remainder appeared and was moved into the pivot slot, in which
/// case the caller must repeat.
fn clear_pivot_cross(a: &mut IntMatrix, t: usize) -> bool {
    for i in t + 1..a.rows {
        if a.get(i, t).is_zero() {
            continue;
        }
        let q = a.get(i, t).div_floor(a.get(t, t));
        a.sub_row(i, t, &q);
        if !a.get(i, t).is_zero() {
            a.swap_rows(t, i);
            return false;
        }
    }
    for j in t + 1..a.cols {
        if a.get(t, j).is_zero() {
            continue;
        }
        let q = a.get(t, j).div_floor(a.get(t, t));
        a.sub_col(j, t, &q);
        if !a.get(t, j).is_zero() {
            a.swap_cols(t, j);
            return false;
        }
    }
    true
}
