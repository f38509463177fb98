//! Communication tables: which (n, t) optimal tests a system can implement,
//! with provenance per cell, plus a consistency check against the
//! majorization order (a matrix below an implementable one cannot be
//! impossible).

use std::collections::BTreeMap;

use crate::commat::gen_copt;
use crate::implsearch::{find_implementation, SearchVerdict, SeeSawBudget, SystemSpec};
use crate::par::map_collect;
use crate::ultraweak::copt_route;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum CellStatus {
    Implementable(String),
    Impossible(String),
    Unknown,
}

impl CellStatus {
    pub fn provenance(&self) -> Option<&str> {
        match self {
            CellStatus::Implementable(p) | CellStatus::Impossible(p) => Some(p),
            CellStatus::Unknown => None,
        }
    }

    fn short(&self) -> &'static str {
        match self {
            CellStatus::Implementable(_) => "yes",
            CellStatus::Impossible(_) => "no",
            CellStatus::Unknown => "?",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CommTable {
    pub system: SystemSpec,
    pub n_max: usize,
    pub cells: BTreeMap<(usize, usize), CellStatus>,
}

impl CommTable {
    pub fn status(&self, n: usize, t: usize) -> Option<&CellStatus> {
        self.cells.get(&(n, t))
    }
}

/// Fills every cell 2 ≤ n ≤ n_max, 1 ≤ t ≤ n−1 via the implementation
/// search; cells are independent and computed concurrently when allowed.
pub fn build_table(sys: &SystemSpec, n_max: usize, budget: &SeeSawBudget) -> Result<CommTable> {
    if n_max < 2 {
        return Err(Error::Domain(format!("n_max must be >= 2, got {n_max}")));
    }
    let pairs: Vec<(usize, usize)> = (2..=n_max)
        .flat_map(|n| (1..n).map(move |t| (n, t)))
        .collect();
    let statuses = map_collect(pairs.clone(), budget.parallel, |(n, t)| {
        let c = gen_copt(n, t).expect("valid (n, t) range");
        match find_implementation(&c, sys, budget) {
            SearchVerdict::Realizable { provenance, .. } => CellStatus::Implementable(provenance),
            SearchVerdict::ImpossibleByTheorem { theorem } => CellStatus::Impossible(theorem),
            SearchVerdict::Unknown { .. } => CellStatus::Unknown,
        }
    });
    Ok(CommTable {
        system: *sys,
        n_max,
        cells: pairs.into_iter().zip(statuses).collect(),
    })
}

/// A certified relation lower ⊑ upper whose statuses contradict downward
/// closure: the upper matrix is implementable while the lower is impossible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub lower: (usize, usize),
    pub upper: (usize, usize),
}

/// Checks downward closure under every certificate-derivable relation among
/// the table's cells. Empty result means consistent.
pub fn check_table_consistency(table: &CommTable) -> Vec<Violation> {
    let mut violations = Vec::new();
    for (&lower, ls) in &table.cells {
        if !matches!(ls, CellStatus::Impossible(_)) {
            continue;
        }
        for (&upper, us) in &table.cells {
            if upper == lower || !matches!(us, CellStatus::Implementable(_)) {
                continue;
            }
            if copt_route(lower, upper).is_some() {
                violations.push(Violation { lower, upper });
            }
        }
    }
    violations
}

/// Aligned text grid, rows n = 2..n_max, columns t = 1..n_max−1.
pub fn render_grid(table: &CommTable) -> String {
    let width = 5;
    let mut out = String::new();
    out.push_str(&format!(
        "{} communication table (n ≤ {})\n",
        table.system.label(),
        table.n_max
    ));
    out.push_str(&format!("{:>width$} │", "n\\t"));
    for t in 1..table.n_max {
        out.push_str(&format!("{t:>width$}"));
    }
    out.push('\n');
    out.push_str(&format!("{:─>w$}┼{:─>v$}\n", "", "", w = width + 1, v = width * (table.n_max - 1)));
    for n in 2..=table.n_max {
        out.push_str(&format!("{n:>width$} │"));
        for t in 1..table.n_max {
            match table.cells.get(&(n, t)) {
                Some(s) => out.push_str(&format!("{:>width$}", s.short())),
                None => out.push_str(&format!("{:>width$}", "")),
            }
        }
        out.push('\n');
    }
    out
}

/// CSV rows `n,t,status,provenance`.
pub fn render_csv(table: &CommTable) -> String {
    let mut out = String::from("n,t,status,provenance\n");
    for (&(n, t), status) in &table.cells {
        let label = match status {
            CellStatus::Implementable(_) => "implementable",
            CellStatus::Impossible(_) => "impossible",
            CellStatus::Unknown => "unknown",
        };
        let prov = status.provenance().unwrap_or("");
        let quoted = format!("\"{}\"", prov.replace('"', "\"\""));
        out.push_str(&format!("{n},{t},{label},{quoted}\n"));
    }
    out
}

/// Hand-built inconsistent tables exercising the consistency checker: each
/// marks a matrix implementable while one derivably below it is impossible.
pub fn inconsistent_fixture_tables() -> Vec<CommTable> {
    let mk = |n_max: usize, entries: Vec<((usize, usize), CellStatus)>| CommTable {
        system: SystemSpec::Qudit(3),
        n_max,
        cells: entries.into_iter().collect(),
    };
    vec![
        // (3,1) ⊑ (4,2) yet marked impossible above an implementable top
        mk(
            4,
            vec![
                ((4, 2), CellStatus::Implementable("fixture".into())),
                ((3, 1), CellStatus::Impossible("fixture".into())),
                ((2, 1), CellStatus::Implementable("fixture".into())),
            ],
        ),
        // (2,1) ⊑ (3,2) by the diagonal step
        mk(
            3,
            vec![
                ((3, 2), CellStatus::Implementable("fixture".into())),
                ((2, 1), CellStatus::Impossible("fixture".into())),
            ],
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget() -> SeeSawBudget {
        SeeSawBudget {
            restarts: 4,
            iterations: 200,
            ..Default::default()
        }
    }

    #[test]
    fn qubit_table_matches_known_pattern() {
        let table = build_table(&SystemSpec::Qubit, 4, &budget()).unwrap();
        for n in 2..=4 {
            for t in 1..n {
                let expect_impl = t == 1;
                match table.status(n, t).unwrap() {
                    CellStatus::Implementable(_) => assert!(expect_impl, "({n},{t})"),
                    CellStatus::Impossible(_) => assert!(!expect_impl, "({n},{t})"),
                    CellStatus::Unknown => panic!("({n},{t}) should be decided"),
                }
            }
        }
        assert!(check_table_consistency(&table).is_empty());
    }

    #[test]
    fn rebit_table_differs_from_qubit() {
        let table = build_table(&SystemSpec::Rebit, 4, &budget()).unwrap();
        let implementable: Vec<(usize, usize)> = table
            .cells
            .iter()
            .filter(|(_, s)| matches!(s, CellStatus::Implementable(_)))
            .map(|(&k, _)| k)
            .collect();
        assert_eq!(implementable, vec![(2, 1), (3, 1)]);
        assert!(check_table_consistency(&table).is_empty());
    }

    #[test]
    fn qutrit_table_has_c42() {
        let table = build_table(&SystemSpec::Qudit(3), 4, &budget()).unwrap();
        assert!(matches!(
            table.status(4, 2).unwrap(),
            CellStatus::Implementable(_)
        ));
        assert!(matches!(
            table.status(4, 3).unwrap(),
            CellStatus::Impossible(_)
        ));
        assert!(check_table_consistency(&table).is_empty());
    }

    #[test]
    fn fixture_tables_are_flagged() {
        for fixture in inconsistent_fixture_tables() {
            let violations = check_table_consistency(&fixture);
            assert!(!violations.is_empty());
        }
    }

    #[test]
    fn renderings_cover_all_cells() {
        let table = build_table(&SystemSpec::Qubit, 3, &budget()).unwrap();
        let grid = render_grid(&table);
        assert!(grid.contains("yes") && grid.contains("no"));
        let csv = render_csv(&table);
        assert_eq!(csv.lines().count(), 1 + table.cells.len());
        assert!(csv.starts_with("n,t,status,provenance\n"));
    }

    #[test]
    fn provenance_is_always_present_on_decided_cells() {
        let table = build_table(&SystemSpec::Qubit, 4, &budget()).unwrap();
        for status in table.cells.values() {
            if !matches!(status, CellStatus::Unknown) {
                assert!(!status.provenance().unwrap().is_empty());
            }
        }
    }
}
