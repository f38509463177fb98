//! Branch-and-bound refutation of M = L·N·R.
//!
//! The search space is the polytope of row-stochastic R, boxed entrywise and
//! subdivided. At each box a per-row LP relaxation lower-bounds the best
//! achievable ∞-residual: the bilinear products l_k·(NR)_kj are replaced by
//! their McCormick envelopes over l ∈ [0,1] and (NR)_kj ∈ [qlo,qhi], where
//! qlo/qhi follow from the box by interval arithmetic. The relaxation is
//! exact-rational, so a pruned box carries a genuine lower bound and pruning
//! everything proves min residual ≥ gap. Midpoint probes recover exact
//! certificates when the box still contains a solution.

use num_traits::Zero;

use crate::commat::CommMatrix;
use crate::linalg::{solve_lp, LpProblem, LpResult};
use crate::par::map_collect;
use crate::rational::{int, rat, to_f64, Rational};

use super::alternate::best_l;
use super::{Certificate, SearchBudget};

pub(super) enum BnbOutcome {
    Found(Certificate),
    ProvenInfeasible {
        gap: Rational,
    },
    Exhausted {
        best_residual: f64,
        best_l: CommMatrix,
        best_r: CommMatrix,
    },
}

#[derive(Clone)]
struct Node {
    /// Entrywise bounds on R, row-major over (d, b).
    lo: Vec<Rational>,
    hi: Vec<Rational>,
}

enum NodeResult {
    EmptyBox,
    Found(Certificate),
    Pruned(Rational),
    /// Box too small to split further but not pruned: search gives up.
    Stuck(f64, CommMatrix, CommMatrix),
    Split(f64, CommMatrix, CommMatrix, Node, Node),
}

/// Propagates the row-sum-1 constraint into the box; `None` if empty.
fn tighten(node: &mut Node, d: usize, b: usize) -> Option<()> {
    for _ in 0..2 {
        for q in 0..d {
            let row = q * b;
            let lo_sum: Rational = node.lo[row..row + b].iter().cloned().sum();
            let hi_sum: Rational = node.hi[row..row + b].iter().cloned().sum();
            for j in 0..b {
                let lo_floor = &int(1) - &(&hi_sum - &node.hi[row + j]);
                if lo_floor > node.lo[row + j] {
                    node.lo[row + j] = lo_floor;
                }
                let hi_ceil = &int(1) - &(&lo_sum - &node.lo[row + j]);
                if hi_ceil < node.hi[row + j] {
                    node.hi[row + j] = hi_ceil;
                }
                if node.lo[row + j] > node.hi[row + j] {
                    return None;
                }
            }
        }
    }
    Some(())
}

/// A concrete stochastic R inside the box: start every entry at its lower
/// bound and waterfill the slack left to right.
fn probe_r(node: &Node, d: usize, b: usize) -> CommMatrix {
    let mut rows = Vec::with_capacity(d);
    for q in 0..d {
        let row = q * b;
        let mut x: Vec<Rational> = node.lo[row..row + b].to_vec();
        let mut slack = &int(1) - &x.iter().cloned().sum::<Rational>();
        for j in 0..b {
            if slack.is_zero() {
                break;
            }
            let room = &node.hi[row + j] - &x[j];
            let add = if room < slack { room } else { slack.clone() };
            x[j] = &x[j] + &add;
            slack -= add;
        }
        debug_assert!(slack.is_zero(), "tightened boxes contain stochastic rows");
        rows.push(x);
    }
    CommMatrix::from_rows(rows).expect("waterfilled rows are stochastic")
}

/// Lower bound on min_i max_j |(LNR)_ij − M_ij| over the box: for each target
/// row the McCormick-relaxed LP, maximized over rows, with early exit once a
/// row already exceeds `delta`.
fn node_bound(n: &CommMatrix, m: &CommMatrix, node: &Node, delta: &Rational) -> Rational {
    let (a, b) = (m.rows(), m.cols());
    let (c, d) = (n.rows(), n.cols());
    // interval image of Q = N·R over the box
    let mut qlo = vec![Rational::zero(); c * b];
    let mut qhi = vec![Rational::zero(); c * b];
    for k in 0..c {
        for j in 0..b {
            let mut lo = Rational::zero();
            let mut hi = Rational::zero();
            for q in 0..d {
                let nkq = n.get(k, q);
                if nkq.is_zero() {
                    continue;
                }
                lo += nkq * &node.lo[q * b + j];
                hi += nkq * &node.hi[q * b + j];
            }
            qlo[k * b + j] = lo;
            qhi[k * b + j] = hi;
        }
    }
    // variable layout: l | R | Q | w | t
    let l_off = 0;
    let r_off = c;
    let q_off = r_off + d * b;
    let w_off = q_off + c * b;
    let t_idx = w_off + c * b;
    let nv = t_idx + 1;
    let mut worst = Rational::zero();
    for i in 0..a {
        let mut lp = LpProblem::new(nv);
        let zero_row = || vec![int(0); nv];
        let mut ones = zero_row();
        for k in 0..c {
            ones[l_off + k] = int(1);
        }
        lp.eq(ones, int(1));
        for q in 0..d {
            let mut coeffs = zero_row();
            for j in 0..b {
                coeffs[r_off + q * b + j] = int(1);
            }
            lp.eq(coeffs, int(1));
        }
        for q in 0..d {
            for j in 0..b {
                let v = r_off + q * b + j;
                if !node.lo[q * b + j].is_zero() {
                    let mut coeffs = zero_row();
                    coeffs[v] = int(1);
                    lp.ge(coeffs, node.lo[q * b + j].clone());
                }
                if node.hi[q * b + j] < int(1) {
                    let mut coeffs = zero_row();
                    coeffs[v] = int(1);
                    lp.le(coeffs, node.hi[q * b + j].clone());
                }
            }
        }
        for k in 0..c {
            for j in 0..b {
                // coupling Q_kj = sum_q N_kq R_qj
                let mut coeffs = zero_row();
                coeffs[q_off + k * b + j] = int(1);
                for q in 0..d {
                    coeffs[r_off + q * b + j] = -n.get(k, q).clone();
                }
                lp.eq(coeffs, int(0));
                // McCormick envelope of w = l*Q on [0,1] x [qlo,qhi]
                let (ql, qh) = (&qlo[k * b + j], &qhi[k * b + j]);
                let (lv, qv, wv) = (l_off + k, q_off + k * b + j, w_off + k * b + j);
                let mut coeffs = zero_row();
                coeffs[wv] = int(1);
                coeffs[lv] = -ql.clone();
                lp.ge(coeffs, int(0));
                let mut coeffs = zero_row();
                coeffs[wv] = int(1);
                coeffs[lv] = -qh.clone();
                coeffs[qv] = int(-1);
                lp.ge(coeffs, -qh.clone());
                let mut coeffs = zero_row();
                coeffs[wv] = int(1);
                coeffs[lv] = -qh.clone();
                lp.le(coeffs, int(0));
                let mut coeffs = zero_row();
                coeffs[wv] = int(1);
                coeffs[lv] = -ql.clone();
                coeffs[qv] = int(-1);
                lp.le(coeffs, -ql.clone());
            }
        }
        for j in 0..b {
            let mut coeffs = zero_row();
            for k in 0..c {
                coeffs[w_off + k * b + j] = int(1);
            }
            coeffs[t_idx] = int(-1);
            lp.le(coeffs.clone(), m.get(i, j).clone());
            coeffs[t_idx] = int(1);
            lp.ge(coeffs, m.get(i, j).clone());
        }
        let mut obj = zero_row();
        obj[t_idx] = int(1);
        lp.objective = Some(obj);
        let LpResult::Feasible(x) = solve_lp(&lp) else {
            unreachable!("relaxation over a nonempty box is feasible and bounded");
        };
        if x[t_idx] > worst {
            worst = x[t_idx].clone();
            if worst > *delta {
                return worst; // already prunable; later rows can only raise it
            }
        }
    }
    worst
}

fn process(n: &CommMatrix, m: &CommMatrix, mut node: Node, delta: &Rational) -> NodeResult {
    let (b, d) = (m.cols(), n.cols());
    if tighten(&mut node, d, b).is_none() {
        return NodeResult::EmptyBox;
    }
    let r = probe_r(&node, d, b);
    let q = n.mul(&r).expect("shape checked");
    let (l, residual) = best_l(m, &q);
    if residual.is_zero() {
        return NodeResult::Found(Certificate { l, r });
    }
    let bound = node_bound(n, m, &node, delta);
    if bound > *delta {
        return NodeResult::Pruned(bound);
    }
    // branch on the widest entry among the first b-1 columns (the last column
    // is implied by the row sums)
    let min_width = rat(1, 1 << 20);
    let mut pick: Option<(usize, Rational)> = None;
    for qrow in 0..d {
        for j in 0..b.saturating_sub(1) {
            let idx = qrow * b + j;
            let width = &node.hi[idx] - &node.lo[idx];
            if width >= min_width && pick.as_ref().is_none_or(|(_, w)| width > *w) {
                pick = Some((idx, width));
            }
        }
    }
    let res_f = to_f64(&residual);
    let Some((idx, _)) = pick else {
        return NodeResult::Stuck(res_f, l, r);
    };
    let mid = (&node.lo[idx] + &node.hi[idx]) / int(2);
    let mut left = node.clone();
    left.hi[idx] = mid.clone();
    let mut right = node;
    right.lo[idx] = mid;
    NodeResult::Split(res_f, l, r, left, right)
}

pub(super) fn prove(n: &CommMatrix, m: &CommMatrix, budget: &SearchBudget) -> BnbOutcome {
    let (b, d) = (m.cols(), n.cols());
    let root = Node {
        lo: vec![Rational::zero(); d * b],
        hi: vec![int(1); d * b],
    };
    let mut stack = vec![root];
    let mut processed = 0usize;
    let mut stuck = false;
    let mut min_pruned: Option<Rational> = None;
    let mut best: Option<(f64, CommMatrix, CommMatrix)> = None;
    const WAVE: usize = 8;
    while !stack.is_empty() {
        if processed >= budget.max_bnb_nodes {
            stuck = true;
            break;
        }
        let take = stack
            .len()
            .min(WAVE)
            .min(budget.max_bnb_nodes - processed);
        let wave: Vec<Node> = stack.split_off(stack.len() - take);
        processed += take;
        let results = map_collect(wave, budget.parallel, |node| {
            process(n, m, node, &budget.delta)
        });
        // merged in submission order, so the outcome is schedule-independent
        for res in results {
            match res {
                NodeResult::EmptyBox => {}
                NodeResult::Found(cert) => return BnbOutcome::Found(cert),
                NodeResult::Pruned(bound) => {
                    if min_pruned.as_ref().is_none_or(|g| bound < *g) {
                        min_pruned = Some(bound);
                    }
                }
                NodeResult::Stuck(res, l, r) => {
                    stuck = true;
                    if best.as_ref().is_none_or(|(bres, _, _)| res < *bres) {
                        best = Some((res, l, r));
                    }
                }
                NodeResult::Split(res, l, r, left, right) => {
                    if best.as_ref().is_none_or(|(bres, _, _)| res < *bres) {
                        best = Some((res, l, r));
                    }
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
    }
    if !stuck && stack.is_empty() {
        let gap = min_pruned.unwrap_or_else(|| budget.delta.clone());
        return BnbOutcome::ProvenInfeasible { gap };
    }
    let (best_residual, best_l, best_r) = best.expect("at least one probe ran");
    BnbOutcome::Exhausted {
        best_residual,
        best_l,
        best_r,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commat::{gen_copt, gen_vn};
    use crate::ultraweak::check_certificate;

    #[test]
    fn refutes_copt21_below_copt31() {
        let n = gen_copt(3, 1).unwrap();
        let m = gen_copt(2, 1).unwrap();
        let budget = SearchBudget::default();
        match prove(&n, &m, &budget) {
            BnbOutcome::ProvenInfeasible { gap } => assert!(gap > budget.delta),
            _ => panic!("expected a proven refutation"),
        }
    }

    #[test]
    fn finds_certificate_when_one_exists() {
        let n = gen_copt(2, 1).unwrap();
        let m = gen_vn(2);
        match prove(&n, &m, &SearchBudget::default()) {
            BnbOutcome::Found(cert) => {
                assert!(check_certificate(&m, &n, &cert).unwrap());
            }
            _ => panic!("expected a certificate"),
        }
    }

    #[test]
    fn tiny_budget_reports_exhaustion() {
        let n = gen_copt(3, 1).unwrap();
        let m = gen_copt(2, 1).unwrap();
        let budget = SearchBudget {
            max_bnb_nodes: 2,
            ..Default::default()
        };
        match prove(&n, &m, &budget) {
            BnbOutcome::Exhausted { best_residual, .. } => assert!(best_residual > 0.0),
            _ => panic!("expected exhaustion under a 2-node budget"),
        }
    }
}
