//! Convex hull membership by exact LP feasibility.

use crate::linalg::{solve_lp, LpProblem, LpResult, RationalMatrix};
use crate::rational::{int, Rational};
use crate::{Error, Result};

/// Tests whether `point` lies in the convex hull of the rows of `generators`.
///
/// Returns nonnegative weights summing to 1 that reproduce the point exactly,
/// or `None` when the point is outside the hull.
pub fn in_convex_hull(
    point: &[Rational],
    generators: &RationalMatrix,
) -> Result<Option<Vec<Rational>>> {
    if point.len() != generators.cols() {
        return Err(Error::Shape(format!(
            "point has {} coordinates but generators have {} columns",
            point.len(),
            generators.cols()
        )));
    }
    let k = generators.rows();
    let mut lp = LpProblem::new(k);
    for (j, target) in point.iter().enumerate() {
        let coeffs = (0..k).map(|i| generators.get(i, j).clone()).collect();
        lp.eq(coeffs, target.clone());
    }
    lp.eq(vec![int(1); k], int(1));
    match solve_lp(&lp) {
        LpResult::Feasible(w) => Ok(Some(w)),
        _ => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commat::gen_copt;
    use crate::rational::rat;
    use num_traits::Zero;

    #[test]
    fn generator_itself_gets_unit_weight() {
        let g = RationalMatrix::new(2, 2, vec![rat(1, 3), rat(2, 3), rat(1, 2), rat(1, 2)]).unwrap();
        let w = in_convex_hull(&[rat(1, 2), rat(1, 2)], &g).unwrap().unwrap();
        assert_eq!(w, vec![rat(0, 1), rat(1, 1)]);
    }

    #[test]
    fn copt41_row_in_hull_of_copt42_rows() {
        // First row of C_opt(4,1) is the uniform mix of the three C_opt(4,2)
        // rows sharing its zero; the weights are forced to 1/3 each.
        let big = gen_copt(4, 2).unwrap();
        let small = gen_copt(4, 1).unwrap();
        let w = in_convex_hull(small.as_rational_matrix().row(0), big.as_rational_matrix())
            .unwrap()
            .unwrap();
        assert_eq!(w[..3], vec![rat(1, 3), rat(1, 3), rat(1, 3)][..]);
        assert!(w[3..].iter().all(|v| v.is_zero()));
    }

    #[test]
    fn point_outside_hull_is_absent() {
        // (1,0) vs hull{(0,1),(1/2,1/2)}: x-coordinate is capped at 1/2.
        let g = RationalMatrix::new(2, 2, vec![rat(0, 1), rat(1, 1), rat(1, 2), rat(1, 2)]).unwrap();
        assert!(in_convex_hull(&[rat(1, 1), rat(0, 1)], &g).unwrap().is_none());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let g = RationalMatrix::identity(2);
        assert!(in_convex_hull(&[rat(1, 2)], &g).is_err());
    }
}
