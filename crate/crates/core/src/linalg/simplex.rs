//! Exact two-phase primal simplex over rationals.
//!
//! All variables are nonnegative. Bland's rule is used for both the entering
//! and the leaving variable, so the method terminates on every input; together
//! with exact arithmetic this makes `solve_lp` a decision procedure for
//! feasibility rather than a numerical heuristic.

use num_traits::{One, Zero};

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
}

/// Linear program over nonnegative variables, minimizing `objective · x`
/// (pure feasibility when `objective` is `None`).
#[derive(Clone, Debug, Default)]
pub struct LpProblem {
    pub num_vars: usize,
    pub equalities: Vec<(Vec<Rational>, Rational)>,
    pub inequalities: Vec<(Vec<Rational>, Rational, Sense)>,
    pub objective: Option<Vec<Rational>>,
}

impl LpProblem {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            ..Default::default()
        }
    }

    pub fn eq(&mut self, coeffs: Vec<Rational>, rhs: Rational) {
        debug_assert_eq!(coeffs.len(), self.num_vars);
        self.equalities.push((coeffs, rhs));
    }

    pub fn le(&mut self, coeffs: Vec<Rational>, rhs: Rational) {
        debug_assert_eq!(coeffs.len(), self.num_vars);
        self.inequalities.push((coeffs, rhs, Sense::Le));
    }

    pub fn ge(&mut self, coeffs: Vec<Rational>, rhs: Rational) {
        debug_assert_eq!(coeffs.len(), self.num_vars);
        self.inequalities.push((coeffs, rhs, Sense::Ge));
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpResult {
    /// A vertex assignment satisfying every constraint exactly.
    Feasible(Vec<Rational>),
    Infeasible,
    Unbounded,
}

struct Tableau {
    // m rows of [coefficients | rhs], kept canonical w.r.t. `basis`
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    ncols: usize, // structural + slack + artificial
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v = &*v / &pivot;
        }
        for r in 0..self.rows.len() {
            if r == row || self.rows[r][col].is_zero() {
                continue;
            }
            let factor = self.rows[r][col].clone();
            for j in 0..=self.ncols {
                let v = &self.rows[r][j] - &factor * &self.rows[row][j];
                self.rows[r][j] = v;
            }
        }
        self.basis[row] = col;
    }

    /// Minimizes `cost` with Bland's rule. Returns false on unboundedness.
    fn run(&mut self, cost: &[Rational]) -> bool {
        loop {
            // reduced costs d_j = c_j - c_B . column_j
            let mut entering = None;
            for j in 0..self.ncols {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j].clone();
                for (r, &b) in self.basis.iter().enumerate() {
                    if !cost[b].is_zero() {
                        d -= &cost[b] * &self.rows[r][j];
                    }
                }
                if d < Rational::zero() {
                    entering = Some(j);
                    break; // Bland: smallest index
                }
            }
            let Some(col) = entering else {
                return true;
            };
            let mut leaving: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][col];
                if *a <= Rational::zero() {
                    continue;
                }
                let ratio = &self.rows[r][self.ncols] / a;
                let better = match &leaving {
                    None => true,
                    Some((lr, lratio)) => {
                        ratio < *lratio || (ratio == *lratio && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leaving = Some((r, ratio));
                }
            }
            let Some((row, _)) = leaving else {
                return false;
            };
            self.pivot(row, col);
        }
    }

    fn objective_value(&self, cost: &[Rational]) -> Rational {
        let mut v = Rational::zero();
        for (r, &b) in self.basis.iter().enumerate() {
            if !cost[b].is_zero() {
                v += &cost[b] * &self.rows[r][self.ncols];
            }
        }
        v
    }
}

/// Exact simplex solve. `Feasible` carries a vertex assignment of the
/// structural variables satisfying all constraints with exact equality.
pub fn solve_lp(p: &LpProblem) -> LpResult {
    let n = p.num_vars;
    // Normalize every constraint to coeffs . x (=, <=, >=) rhs with rhs >= 0.
    struct Row {
        coeffs: Vec<Rational>,
        rhs: Rational,
        sense: Option<Sense>, // None = equality
    }
    let mut rows: Vec<Row> = Vec::new();
    for (c, b) in &p.equalities {
        rows.push(Row {
            coeffs: c.clone(),
            rhs: b.clone(),
            sense: None,
        });
    }
    for (c, b, s) in &p.inequalities {
        rows.push(Row {
            coeffs: c.clone(),
            rhs: b.clone(),
            sense: Some(*s),
        });
    }
    for row in rows.iter_mut() {
        if row.rhs < Rational::zero() {
            for v in row.coeffs.iter_mut() {
                *v = -v.clone();
            }
            row.rhs = -row.rhs.clone();
            row.sense = match row.sense {
                None => None,
                Some(Sense::Le) => Some(Sense::Ge),
                Some(Sense::Ge) => Some(Sense::Le),
            };
        }
    }

    let m = rows.len();
    let num_slack = rows.iter().filter(|r| r.sense.is_some()).count();
    // Ge rows and equality rows need an artificial; Le rows start basic on
    // their slack.
    let num_art = rows
        .iter()
        .filter(|r| !matches!(r.sense, Some(Sense::Le)))
        .count();
    let ncols = n + num_slack + num_art;

    let mut tab = Tableau {
        rows: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        ncols,
    };
    let mut slack_idx = n;
    let mut art_idx = n + num_slack;
    let mut art_cols = Vec::new();
    for row in &rows {
        let mut t = vec![Rational::zero(); ncols + 1];
        t[..n].clone_from_slice(&row.coeffs);
        t[ncols] = row.rhs.clone();
        match row.sense {
            Some(Sense::Le) => {
                t[slack_idx] = Rational::one();
                tab.basis.push(slack_idx);
                slack_idx += 1;
            }
            Some(Sense::Ge) => {
                t[slack_idx] = -Rational::one();
                slack_idx += 1;
                t[art_idx] = Rational::one();
                tab.basis.push(art_idx);
                art_cols.push(art_idx);
                art_idx += 1;
            }
            None => {
                t[art_idx] = Rational::one();
                tab.basis.push(art_idx);
                art_cols.push(art_idx);
                art_idx += 1;
            }
        }
        tab.rows.push(t);
    }

    // Phase 1: minimize the sum of artificials.
    if !art_cols.is_empty() {
        let mut cost = vec![Rational::zero(); ncols];
        for &a in &art_cols {
            cost[a] = Rational::one();
        }
        let bounded = tab.run(&cost);
        debug_assert!(bounded, "phase 1 is always bounded");
        if !tab.objective_value(&cost).is_zero() {
            return LpResult::Infeasible;
        }
        // Drive remaining artificials (at value zero) out of the basis.
        let mut r = 0;
        while r < tab.rows.len() {
            if art_cols.contains(&tab.basis[r]) {
                let col = (0..n + num_slack).find(|&j| !tab.rows[r][j].is_zero());
                match col {
                    Some(c) => tab.pivot(r, c),
                    None => {
                        // Redundant constraint: drop the row.
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    // Phase 2.
    if let Some(obj) = &p.objective {
        let mut cost = vec![Rational::zero(); ncols];
        cost[..n].clone_from_slice(obj);
        // Artificials stay out: give them a cost no pivot can pay for by
        // excluding them from entering (they are basic nowhere by now, and a
        // zero reduced cost never makes them entering since d_j >= 0 check
        // only picks negatives and their columns are unit columns with c=0).
        for &a in &art_cols {
            cost[a] = Rational::zero();
        }
        let mut tab2 = tab;
        // Forbid artificial columns from re-entering by zeroing them.
        for row in tab2.rows.iter_mut() {
            for &a in &art_cols {
                row[a] = Rational::zero();
            }
        }
        if !tab2.run(&cost) {
            return LpResult::Unbounded;
        }
        return LpResult::Feasible(extract(&tab2, n));
    }
    LpResult::Feasible(extract(&tab, n))
}

fn extract(tab: &Tableau, n: usize) -> Vec<Rational> {
    let mut x = vec![Rational::zero(); n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rows[r][tab.ncols].clone();
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn single_variable_equality() {
        let mut p = LpProblem::new(1);
        p.eq(vec![int(1)], int(1));
        assert_eq!(solve_lp(&p), LpResult::Feasible(vec![int(1)]));
    }

    #[test]
    fn infeasible_bounds() {
        let mut p = LpProblem::new(1);
        p.le(vec![int(1)], int(-1));
        assert_eq!(solve_lp(&p), LpResult::Infeasible);
    }

    #[test]
    fn midpoint_in_hull_of_two_points() {
        // weights w1, w2 >= 0 with w1 (0,1) + w2 (1,0) = (1/2, 1/2), sum 1
        let mut p = LpProblem::new(2);
        p.eq(vec![int(0), int(1)], rat(1, 2));
        p.eq(vec![int(1), int(0)], rat(1, 2));
        p.eq(vec![int(1), int(1)], int(1));
        assert_eq!(
            solve_lp(&p),
            LpResult::Feasible(vec![rat(1, 2), rat(1, 2)])
        );
    }

    #[test]
    fn unbounded_objective() {
        let mut p = LpProblem::new(1);
        p.ge(vec![int(1)], int(0));
        p.objective = Some(vec![int(-1)]);
        assert_eq!(solve_lp(&p), LpResult::Unbounded);
    }

    #[test]
    fn minimization_reaches_vertex() {
        // min x + y s.t. x + 2y >= 2, 3x + y >= 3
        let mut p = LpProblem::new(2);
        p.ge(vec![int(1), int(2)], int(2));
        p.ge(vec![int(3), int(1)], int(3));
        p.objective = Some(vec![int(1), int(1)]);
        let LpResult::Feasible(x) = solve_lp(&p) else {
            panic!("expected feasible");
        };
        assert_eq!(&x[0] + &x[1], rat(7, 5)); // optimum at (4/5, 3/5)
    }

    #[test]
    fn redundant_equalities_handled() {
        let mut p = LpProblem::new(2);
        p.eq(vec![int(1), int(1)], int(1));
        p.eq(vec![int(2), int(2)], int(2));
        assert!(matches!(solve_lp(&p), LpResult::Feasible(_)));
    }
}
