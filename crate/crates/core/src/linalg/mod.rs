//! Exact-rational dense linear algebra and an LP feasibility core.

mod hull;
mod simplex;

pub use hull::in_convex_hull;
pub use simplex::{solve_lp, LpProblem, LpResult, Sense};

use num_traits::Zero;

use crate::rational::Rational;
use crate::{Error, Result};

/// Dense rectangular matrix over exact rationals, row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| Rational::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                crate::rational::int(1)
            } else {
                Rational::zero()
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Exact rank by Gaussian elimination over the rationals.
    pub fn rank(&self) -> usize {
        let mut m = self.data.clone();
        let (rows, cols) = (self.rows, self.cols);
        let at = |m: &[Rational], i: usize, j: usize| m[i * cols + j].clone();
        let mut rank = 0;
        let mut pivot_row = 0;
        for col in 0..cols {
            let Some(p) = (pivot_row..rows).find(|&r| !m[r * cols + col].is_zero()) else {
                continue;
            };
            if p != pivot_row {
                for j in 0..cols {
                    m.swap(p * cols + j, pivot_row * cols + j);
                }
            }
            let pivot = at(&m, pivot_row, col);
            for r in (pivot_row + 1)..rows {
                let factor = &at(&m, r, col) / &pivot;
                if factor.is_zero() {
                    continue;
                }
                for j in col..cols {
                    let v = &at(&m, r, j) - &factor * &at(&m, pivot_row, j);
                    m[r * cols + j] = v;
                }
            }
            rank += 1;
            pivot_row += 1;
            if pivot_row == rows {
                break;
            }
        }
        rank
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commat::{gen_copt, gen_vn};
    use crate::rational::{int, rat};

    #[test]
    fn rank_of_copt_31_is_three() {
        assert_eq!(gen_copt(3, 1).unwrap().as_rational_matrix().rank(), 3);
    }

    #[test]
    fn rank_of_vn_is_one() {
        assert_eq!(gen_vn(4).as_rational_matrix().rank(), 1);
    }

    #[test]
    fn rank_of_copt_52_is_five() {
        assert_eq!(gen_copt(5, 2).unwrap().as_rational_matrix().rank(), 5);
    }

    #[test]
    fn mul_shapes_checked() {
        let a = RationalMatrix::identity(2);
        let b = RationalMatrix::zeros(3, 2);
        assert!(a.mul(&b).is_err());
        assert_eq!(b.mul(&a).unwrap(), b);
    }

    #[test]
    fn rank_of_singular_matrix() {
        let m = RationalMatrix::new(
            3,
            3,
            vec![
                int(1),
                int(2),
                int(3),
                int(2),
                int(4),
                int(6),
                rat(1, 2),
                int(0),
                int(1),
            ],
        )
        .unwrap();
        assert_eq!(m.rank(), 2);
    }
}
