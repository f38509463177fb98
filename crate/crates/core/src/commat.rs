//! Communication matrices and the success-probability functionals.
//!
//! A communication matrix collects the conditional probabilities p(j|i) that
//! the receiver outputs j given input label i; it is row-stochastic by
//! construction and stored with exact rational entries.

use num_integer::binomial;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::linalg::RationalMatrix;
use crate::rational::{
    approx_from_f64, format_rational, int, parse_rational, rat, Rational,
};
use crate::{Error, Result};

/// Row-stochastic matrix with exact rational entries.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CommMatrix(RationalMatrix);

impl CommMatrix {
    /// Validates nonnegativity and exact row sums of 1.
    pub fn new(m: RationalMatrix) -> Result<Self> {
        for i in 0..m.rows() {
            let mut sum = Rational::zero();
            for j in 0..m.cols() {
                let v = m.get(i, j);
                if *v < Rational::zero() {
                    return Err(Error::InvalidMatrix(format!(
                        "negative entry {} at ({i},{j})",
                        format_rational(v)
                    )));
                }
                sum += v;
            }
            if sum != int(1) {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} sums to {} instead of 1",
                    format_rational(&sum)
                )));
            }
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let data: Vec<Rational> = rows.into_iter().flatten().collect();
        Self::new(RationalMatrix::new(r, c, data)?)
    }

    pub fn identity(n: usize) -> Self {
        Self(RationalMatrix::identity(n))
    }

    /// Builds an exact matrix from floating entries: each entry is replaced by
    /// its best rational approximation within `tol`, then the residual row-sum
    /// deviation (required to be below `eps`) is absorbed into the largest
    /// entry of the row.
    pub fn from_floats(rows: usize, cols: usize, data: &[f64], tol: f64, eps: f64) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape("entry count mismatch".into()));
        }
        let mut entries = Vec::with_capacity(data.len());
        for &x in data {
            if !(-eps..=1.0 + eps).contains(&x) {
                return Err(Error::InvalidMatrix(format!("entry {x} outside [0,1]")));
            }
            entries.push(approx_from_f64(x.clamp(0.0, 1.0), tol)?);
        }
        for i in 0..rows {
            let row = &mut entries[i * cols..(i + 1) * cols];
            let sum: Rational = row.iter().cloned().sum();
            let dev = &sum - int(1);
            if crate::rational::to_f64(&dev).abs() > eps {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} sums to {} beyond tolerance {eps}",
                    format_rational(&sum)
                )));
            }
            if !dev.is_zero() {
                let k = (0..cols).max_by_key(|&j| row[j].clone()).unwrap();
                row[k] = &row[k] - &dev;
            }
        }
        Self::new(RationalMatrix::new(rows, cols, entries)?)
    }

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn cols(&self) -> usize {
        self.0.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        self.0.get(i, j)
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        self.0.row(i)
    }

    pub fn as_rational_matrix(&self) -> &RationalMatrix {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.rank()
    }

    /// Stochastic-by-stochastic product is stochastic.
    pub fn mul(&self, other: &CommMatrix) -> Result<CommMatrix> {
        Ok(CommMatrix(self.0.mul(&other.0)?))
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            rows: self.rows(),
            cols: self.cols(),
            data: self.0.entries().iter().map(format_rational).collect(),
        }
    }

    pub fn from_json(j: &MatrixJson) -> Result<Self> {
        let data = j
            .data
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(RationalMatrix::new(j.rows, j.cols, data)?)
    }
}

/// Wire format shared by all CLI commands: row-major entries as "p/q" strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<String>,
}

/// Lexicographically ordered strictly increasing t-tuples over {1..n}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleIndex {
    pub n: usize,
    pub t: usize,
    pub tuples: Vec<Vec<usize>>,
}

fn check_nt(n: usize, t: usize) -> Result<()> {
    if n < 2 || t < 1 || t > n - 1 {
        return Err(Error::Domain(format!(
            "need n >= 2 and 1 <= t <= n-1, got n={n}, t={t}"
        )));
    }
    Ok(())
}

/// All strictly increasing t-tuples of {1..n} in lexicographic order.
pub fn tuple_index(n: usize, t: usize) -> Result<TupleIndex> {
    check_nt(n, t)?;
    let mut tuples = Vec::with_capacity(binomial(n, t));
    let mut current: Vec<usize> = (1..=t).collect();
    loop {
        tuples.push(current.clone());
        // advance to the lexicographic successor
        let mut i = t;
        while i > 0 && current[i - 1] == n - (t - i) {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        current[i - 1] += 1;
        for k in i..t {
            current[k] = current[k - 1] + 1;
        }
    }
    debug_assert_eq!(tuples.len(), binomial(n, t));
    Ok(TupleIndex { n, t, tuples })
}

/// Optimal communication matrix for the test with n boxes and t revealed
/// boxes: the row for tuple (i_1..i_t) is zero at those columns and 1/(n-t)
/// elsewhere, rows in lexicographic tuple order.
pub fn gen_copt(n: usize, t: usize) -> Result<CommMatrix> {
    let index = tuple_index(n, t)?;
    let fill = rat(1, (n - t) as i64);
    let mut m = RationalMatrix::zeros(index.tuples.len(), n);
    for (i, tuple) in index.tuples.iter().enumerate() {
        for j in 1..=n {
            if !tuple.contains(&j) {
                m.set(i, j - 1, fill.clone());
            }
        }
    }
    CommMatrix::new(m)
}

/// The n-by-n matrix with every entry 1/n.
pub fn gen_vn(n: usize) -> CommMatrix {
    assert!(n >= 1, "gen_vn needs n >= 1");
    gen_flat(n, n)
}

/// Rectangular all-equal row-stochastic matrix (rows x cols, entries 1/cols).
pub fn gen_flat(rows: usize, cols: usize) -> CommMatrix {
    let v = rat(1, cols as i64);
    CommMatrix(RationalMatrix::from_fn(rows, cols, |_, _| v.clone()))
}

fn require_square(c: &CommMatrix) -> Result<usize> {
    if c.rows() != c.cols() {
        return Err(Error::Shape(format!(
            "success functionals need a square matrix, got {}x{}",
            c.rows(),
            c.cols()
        )));
    }
    Ok(c.rows())
}

/// Worst-case success probability: the minimal off-diagonal entry.
pub fn psuc(c: &CommMatrix) -> Result<Rational> {
    let n = require_square(c)?;
    let mut best: Option<Rational> = None;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let v = c.get(i, j);
                if best.as_ref().is_none_or(|b| v < b) {
                    best = Some(v.clone());
                }
            }
        }
    }
    best.ok_or_else(|| Error::Shape("matrix has no off-diagonal entries".into()))
}

/// Uniform-revelation success probability: the mean over rows of the minimal
/// off-diagonal row entry.
pub fn psuc_prime(c: &CommMatrix) -> Result<Rational> {
    let n = require_square(c)?;
    if n < 2 {
        return Err(Error::Shape("matrix has no off-diagonal entries".into()));
    }
    let mut total = Rational::zero();
    for i in 0..n {
        let row_min = (0..n)
            .filter(|&j| j != i)
            .map(|j| c.get(i, j).clone())
            .min()
            .unwrap();
        total += row_min;
    }
    Ok(total / int(n as i64))
}

/// Identifies `c` as an exact `C_opt(n, t)` and returns (n, t).
pub fn recognize_copt(c: &CommMatrix) -> Option<(usize, usize)> {
    let n = c.cols();
    if n < 2 {
        return None;
    }
    for t in 1..n {
        if binomial(n, t) == c.rows() {
            if let Ok(copt) = gen_copt(n, t) {
                if copt == *c {
                    return Some((n, t));
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuple_index_4_2_matches_listing() {
        let idx = tuple_index(4, 2).unwrap();
        assert_eq!(
            idx.tuples,
            vec![
                vec![1, 2],
                vec![1, 3],
                vec![1, 4],
                vec![2, 3],
                vec![2, 4],
                vec![3, 4]
            ]
        );
    }

    #[test]
    fn tuple_index_singletons() {
        let idx = tuple_index(3, 1).unwrap();
        assert_eq!(idx.tuples, vec![vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn tuple_index_5_3_matches_enumeration_oracle() {
        // independent oracle: enumerate all 3-subsets by nested loops and sort
        let mut expected = Vec::new();
        for a in 1..=5usize {
            for b in (a + 1)..=5 {
                for c in (b + 1)..=5 {
                    expected.push(vec![a, b, c]);
                }
            }
        }
        expected.sort();
        let idx = tuple_index(5, 3).unwrap();
        assert_eq!(idx.tuples.len(), 10);
        assert_eq!(idx.tuples, expected);
        assert_eq!(idx.tuples[0], vec![1, 2, 3]);
        assert_eq!(idx.tuples[9], vec![3, 4, 5]);
    }

    #[test]
    fn tuple_index_domain_errors() {
        assert!(tuple_index(4, 0).is_err());
        assert!(tuple_index(4, 4).is_err());
        assert!(tuple_index(1, 1).is_err());
    }

    #[test]
    fn copt_4_2_matches_display() {
        let c = gen_copt(4, 2).unwrap();
        let h = rat(1, 2);
        let z = int(0);
        let expected = CommMatrix::from_rows(vec![
            vec![z.clone(), z.clone(), h.clone(), h.clone()],
            vec![z.clone(), h.clone(), z.clone(), h.clone()],
            vec![z.clone(), h.clone(), h.clone(), z.clone()],
            vec![h.clone(), z.clone(), z.clone(), h.clone()],
            vec![h.clone(), z.clone(), h.clone(), z.clone()],
            vec![h.clone(), h.clone(), z.clone(), z.clone()],
        ])
        .unwrap();
        assert_eq!(c, expected);
    }

    #[test]
    fn copt_2_1_is_swap() {
        let c = gen_copt(2, 1).unwrap();
        assert_eq!(
            c,
            CommMatrix::from_rows(vec![vec![int(0), int(1)], vec![int(1), int(0)]]).unwrap()
        );
    }

    #[test]
    fn copt_n_nminus1_is_antidiagonal() {
        for n in 2..=6 {
            let c = gen_copt(n, n - 1).unwrap();
            assert_eq!(c.rows(), n);
            for i in 0..n {
                for j in 0..n {
                    let expected = if j == n - 1 - i { int(1) } else { int(0) };
                    assert_eq!(*c.get(i, j), expected, "n={n} at ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn copt_row_structure() {
        for n in 2..=7usize {
            for t in 1..n {
                let c = gen_copt(n, t).unwrap();
                assert_eq!(c.rows(), binomial(n, t));
                for i in 0..c.rows() {
                    let zeros = (0..n).filter(|&j| c.get(i, j).is_zero()).count();
                    assert_eq!(zeros, t);
                    for j in 0..n {
                        let v = c.get(i, j);
                        assert!(v.is_zero() || *v == rat(1, (n - t) as i64));
                    }
                }
                // rows pairwise distinct
                for i in 0..c.rows() {
                    for k in (i + 1)..c.rows() {
                        assert_ne!(c.row(i), c.row(k));
                    }
                }
            }
        }
    }

    #[test]
    fn psuc_values() {
        for n in 2..=12usize {
            let c = gen_copt(n, 1).unwrap();
            assert_eq!(psuc(&c).unwrap(), rat(1, (n - 1) as i64));
            assert_eq!(psuc_prime(&c).unwrap(), rat(1, (n - 1) as i64));
        }
        assert_eq!(psuc(&CommMatrix::identity(3)).unwrap(), int(0));
        assert_eq!(psuc_prime(&CommMatrix::identity(2)).unwrap(), int(0));
        assert_eq!(psuc(&gen_vn(3)).unwrap(), rat(1, 3));
    }

    #[test]
    fn psuc_prime_hand_oracle() {
        // [[0,1],[1/2,1/2]]: row minima off diagonal are 1 and 1/2, mean 3/4
        let c = CommMatrix::from_rows(vec![
            vec![int(0), int(1)],
            vec![rat(1, 2), rat(1, 2)],
        ])
        .unwrap();
        assert_eq!(psuc_prime(&c).unwrap(), rat(3, 4));
    }

    #[test]
    fn psuc_rejects_non_square() {
        let c = gen_copt(4, 2).unwrap();
        assert!(psuc(&c).is_err());
        assert!(psuc_prime(&c).is_err());
    }

    #[test]
    fn vn_values() {
        assert_eq!(
            gen_vn(2),
            CommMatrix::from_rows(vec![
                vec![rat(1, 2), rat(1, 2)],
                vec![rat(1, 2), rat(1, 2)]
            ])
            .unwrap()
        );
        assert_eq!(gen_vn(1), CommMatrix::from_rows(vec![vec![int(1)]]).unwrap());
        let v4 = gen_vn(4);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(*v4.get(i, j), rat(1, 4));
            }
        }
    }

    #[test]
    fn validation_rejects_bad_rows() {
        assert!(CommMatrix::from_rows(vec![vec![rat(1, 2), rat(1, 3)]]).is_err());
        assert!(CommMatrix::from_rows(vec![vec![rat(3, 2), rat(-1, 2)]]).is_err());
    }

    #[test]
    fn recognize_copt_round_trip() {
        for n in 2..=6usize {
            for t in 1..n {
                let c = gen_copt(n, t).unwrap();
                assert_eq!(recognize_copt(&c), Some((n, t)));
            }
        }
        assert_eq!(recognize_copt(&gen_vn(3)), None);
        assert_eq!(recognize_copt(&CommMatrix::identity(3)), None);
    }

    #[test]
    fn json_round_trip() {
        let c = gen_copt(4, 2).unwrap();
        let j = c.to_json();
        let s = serde_json::to_string(&j).unwrap();
        let back: MatrixJson = serde_json::from_str(&s).unwrap();
        assert_eq!(CommMatrix::from_json(&back).unwrap(), c);
    }

    #[test]
    fn from_floats_recovers_exact_rationals() {
        let data = [0.0, 0.5, 0.5, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];
        let c = CommMatrix::from_floats(2, 3, &data, 1e-12, 1e-9).unwrap();
        assert_eq!(*c.get(0, 1), rat(1, 2));
        assert_eq!(*c.get(1, 0), rat(1, 3));
    }

    #[test]
    fn from_floats_rejects_bad_row_sum() {
        assert!(CommMatrix::from_floats(1, 2, &[0.6, 0.5], 1e-12, 1e-9).is_err());
    }
}
