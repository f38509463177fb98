//! Alternating exact-LP search for a factorization M = L·N·R.
//!
//! With R fixed the best L decomposes into one small LP per row of M; with L
//! fixed the best R is a single LP. Both directions run in exact rational
//! arithmetic, so a zero residual is a proof and directly yields a verifiable
//! certificate. The alternation is a heuristic (the joint problem is
//! bilinear), hence the seeded multi-restart strategy.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commat::CommMatrix;
use crate::linalg::{solve_lp, LpProblem, LpResult, RationalMatrix};
use crate::par::map_collect;
use crate::rational::{int, rat, Rational};

use super::{Certificate, SearchBudget};

/// Best L for fixed Q = N·R, one LP per row of M minimizing the ∞-residual.
/// Returns the stochastic L and the overall residual.
pub(super) fn best_l(m: &CommMatrix, q: &CommMatrix) -> (CommMatrix, Rational) {
    let (a, b, c) = (m.rows(), m.cols(), q.rows());
    let mut rows = Vec::with_capacity(a);
    let mut residual = Rational::zero();
    for i in 0..a {
        // vars: l_0..l_{c-1}, t; minimize t with |l·Q_:,j - M_ij| <= t
        let mut lp = LpProblem::new(c + 1);
        let mut ones = vec![int(1); c + 1];
        ones[c] = int(0);
        lp.eq(ones, int(1));
        for j in 0..b {
            let mut upper: Vec<Rational> = (0..c).map(|k| q.get(k, j).clone()).collect();
            upper.push(int(-1));
            lp.le(upper.clone(), m.get(i, j).clone());
            upper[c] = int(1);
            lp.ge(upper, m.get(i, j).clone());
        }
        lp.objective = Some({
            let mut o = vec![int(0); c + 1];
            o[c] = int(1);
            o
        });
        let LpResult::Feasible(x) = solve_lp(&lp) else {
            unreachable!("row LP is always feasible and bounded");
        };
        if x[c] > residual {
            residual = x[c].clone();
        }
        rows.push(x[..c].to_vec());
    }
    let l = CommMatrix::from_rows(rows).expect("LP constraints make L stochastic");
    (l, residual)
}

/// Best R for fixed P = L·N: one joint LP over all entries of R.
fn best_r(m: &CommMatrix, p: &CommMatrix) -> (CommMatrix, Rational) {
    let (a, b, d) = (m.rows(), m.cols(), p.cols());
    let nv = d * b + 1;
    let t_idx = d * b;
    let mut lp = LpProblem::new(nv);
    for q in 0..d {
        let mut coeffs = vec![int(0); nv];
        for j in 0..b {
            coeffs[q * b + j] = int(1);
        }
        lp.eq(coeffs, int(1));
    }
    for i in 0..a {
        for j in 0..b {
            let mut coeffs = vec![int(0); nv];
            for q in 0..d {
                coeffs[q * b + j] = p.get(i, q).clone();
            }
            coeffs[t_idx] = int(-1);
            lp.le(coeffs.clone(), m.get(i, j).clone());
            coeffs[t_idx] = int(1);
            lp.ge(coeffs, m.get(i, j).clone());
        }
    }
    lp.objective = Some({
        let mut o = vec![int(0); nv];
        o[t_idx] = int(1);
        o
    });
    let LpResult::Feasible(x) = solve_lp(&lp) else {
        unreachable!("R LP is always feasible and bounded");
    };
    let rows: Vec<Vec<Rational>> = (0..d).map(|q| x[q * b..(q + 1) * b].to_vec()).collect();
    let r = CommMatrix::from_rows(rows).expect("LP constraints make R stochastic");
    (r, x[t_idx].clone())
}

/// Random stochastic matrix with entries on the 1/64 grid: each row is a
/// uniformly chosen composition of 64 into `cols` parts.
fn random_stochastic(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CommMatrix {
    const GRID: i64 = 64;
    let mut out = Vec::with_capacity(rows);
    for _ in 0..rows {
        let mut cuts: Vec<i64> = (0..cols - 1).map(|_| rng.gen_range(0..=GRID)).collect();
        cuts.sort_unstable();
        cuts.push(GRID);
        let mut prev = 0;
        let mut row = Vec::with_capacity(cols);
        for c in cuts {
            row.push(rat(c - prev, GRID));
            prev = c;
        }
        out.push(row);
    }
    CommMatrix::from_rows(out).expect("compositions of the grid are stochastic")
}

fn run_restart(
    n: &CommMatrix,
    m: &CommMatrix,
    seed: u64,
    max_alternations: usize,
) -> Option<Certificate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = if m.cols() == 1 {
        CommMatrix::new(RationalMatrix::from_fn(n.cols(), 1, |_, _| int(1))).unwrap()
    } else {
        random_stochastic(&mut rng, n.cols(), m.cols())
    };
    let mut prev: Option<Rational> = None;
    for _ in 0..max_alternations {
        let q = n.mul(&r).expect("shape checked");
        let (l, res_l) = best_l(m, &q);
        if res_l.is_zero() {
            return Some(Certificate { l, r });
        }
        let p = l.mul(n).expect("shape checked");
        let (r_new, res_r) = best_r(m, &p);
        r = r_new;
        if res_r.is_zero() {
            return Some(Certificate { l, r });
        }
        if prev.as_ref().is_some_and(|p| res_r >= *p) {
            break; // stalled
        }
        prev = Some(res_r);
    }
    None
}

/// Multi-restart alternating search. Deterministic: restarts use seeds
/// `budget.seed..budget.seed+restarts` and the lowest-seed success wins,
/// independent of scheduling.
pub(super) fn search(
    n: &CommMatrix,
    m: &CommMatrix,
    budget: &SearchBudget,
) -> Option<Certificate> {
    let seeds: Vec<u64> = (0..budget.restarts as u64)
        .map(|i| budget.seed.wrapping_add(i))
        .collect();
    let results = map_collect(seeds, budget.parallel, |s| {
        run_restart(n, m, s, budget.max_alternations)
    });
    results.into_iter().flatten().next()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commat::{gen_copt, gen_vn};
    use crate::ultraweak::check_certificate;

    #[test]
    fn finds_certificate_for_vn_below_copt() {
        let n = gen_copt(3, 1).unwrap();
        let m = gen_vn(3);
        let budget = SearchBudget {
            restarts: 8,
            ..Default::default()
        };
        let cert = search(&n, &m, &budget).expect("V_3 is below every 3-column matrix");
        assert!(check_certificate(&m, &n, &cert).unwrap());
    }

    #[test]
    fn finds_certificate_for_copt21_below_copt42() {
        let n = gen_copt(4, 2).unwrap();
        let m = gen_copt(2, 1).unwrap();
        let cert = search(&n, &m, &SearchBudget::default()).expect("known relation");
        assert!(check_certificate(&m, &n, &cert).unwrap());
    }

    #[test]
    fn deterministic_across_parallel_modes() {
        let n = gen_copt(3, 1).unwrap();
        let m = gen_vn(3);
        let seq = SearchBudget {
            parallel: false,
            restarts: 8,
            ..Default::default()
        };
        let par = SearchBudget {
            parallel: true,
            restarts: 8,
            ..Default::default()
        };
        assert_eq!(search(&n, &m, &seq), search(&n, &m, &par));
    }
}
