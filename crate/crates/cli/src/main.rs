//! `pik` — command-line front end for the communication-test library.
//!
//! Exit codes: 0 affirmative/success, 1 negative verdict, 2 usage or I/O
//! error, 3 undecided (Unknown).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use pik_core::commat::{gen_copt, psuc, psuc_prime, CommMatrix, MatrixJson};
use pik_core::implsearch::{find_implementation, SearchVerdict, SeeSawBudget, SystemSpec};
use pik_core::quantum::{born, DensityOperator, Povm, PovmJson, StatesJson, EPS};
use pik_core::rational::{approx_from_f64, format_rational, parse_rational, to_f64, Rational};
use pik_core::tables::{build_table, check_table_consistency, render_csv, render_grid};
use pik_core::ultraweak::{
    check_certificate, majorizes, Certificate, CertificateJson, MajorizationDecision, NoReason,
    SearchBudget,
};

const EXIT_OK: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNKNOWN: u8 = 3;

#[derive(Parser)]
#[command(name = "pik", version, about = "Communication tests of partial ignorance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OutputFlags {
    /// Machine-readable JSON output
    #[arg(long)]
    json: bool,
    /// Print entries as 12-significant-digit decimals instead of p/q
    #[arg(long)]
    decimal: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print the optimal communication matrix for n boxes, t revealed
    #[command(name = "gen-copt")]
    GenCopt {
        n: usize,
        t: usize,
        #[command(flatten)]
        out: OutputFlags,
    },
    /// Success probabilities of a square communication matrix
    Psuc {
        /// Matrix JSON file
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        out: OutputFlags,
    },
    /// Decide whether M is ultraweakly majorized by N
    Majorize {
        /// Majorizing matrix N (JSON file)
        #[arg(long)]
        n: PathBuf,
        /// Target matrix M (JSON file)
        #[arg(long)]
        m: PathBuf,
        /// Residual gap for a certified negative (rational or decimal)
        #[arg(long)]
        delta: Option<String>,
        /// Alternating-search restarts
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputFlags,
    },
    /// Check that states + POVM reproduce a target matrix via the Born rule
    #[command(name = "verify-impl")]
    VerifyImpl {
        #[arg(long)]
        states: PathBuf,
        #[arg(long)]
        povm: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[command(flatten)]
        out: OutputFlags,
    },
    /// Search for an implementation of a target matrix in a system
    #[command(name = "solve-impl")]
    SolveImpl {
        #[arg(long)]
        target: PathBuf,
        /// qubit, rebit, or qudit:<d>
        #[arg(long)]
        system: String,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputFlags,
    },
    /// Build and print a communication table
    Table {
        /// qubit, rebit, or qudit:<d>
        #[arg(long)]
        system: String,
        #[arg(long)]
        nmax: usize,
        /// Also write the table as CSV to this path
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputFlags,
    },
    /// Verify a majorization certificate file against M and N
    #[command(name = "verify-cert")]
    VerifyCert {
        #[arg(long)]
        m: PathBuf,
        #[arg(long)]
        n: PathBuf,
        #[arg(long)]
        cert: PathBuf,
        #[command(flatten)]
        out: OutputFlags,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn read_matrix(path: &PathBuf) -> Result<CommMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let json: MatrixJson =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    CommMatrix::from_json(&json).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn format_matrix(c: &CommMatrix, out: &OutputFlags) -> String {
    if out.json {
        return serde_json::to_string(&c.to_json()).expect("matrix serializes");
    }
    let mut lines = Vec::with_capacity(c.rows());
    for i in 0..c.rows() {
        let row: Vec<String> = (0..c.cols())
            .map(|j| {
                if out.decimal {
                    format!("{:.12}", to_f64(c.get(i, j)))
                } else {
                    format_rational(c.get(i, j))
                }
            })
            .collect();
        lines.push(row.join(" "));
    }
    lines.join("\n")
}

fn parse_delta(s: &str) -> Result<Rational> {
    if let Ok(r) = parse_rational(s) {
        return Ok(r);
    }
    let x: f64 = s.parse().with_context(|| format!("invalid delta {s:?}"))?;
    approx_from_f64(x, 1e-15).map_err(|e| anyhow!("invalid delta {s:?}: {e}"))
}

fn env_override<T: std::str::FromStr>(name: &str) -> Option<T> {
    std::env::var(name).ok().and_then(|v| v.parse().ok())
}

fn search_budget(delta: Option<String>, restarts: Option<usize>, seed: u64) -> Result<SearchBudget> {
    let mut budget = SearchBudget {
        seed,
        ..Default::default()
    };
    if let Some(r) = restarts.or_else(|| env_override("PIK_RESTARTS")) {
        budget.restarts = r;
    }
    let delta = match delta {
        Some(d) => Some(d),
        None => std::env::var("PIK_DELTA").ok(),
    };
    if let Some(d) = delta {
        budget.delta = parse_delta(&d)?;
    }
    Ok(budget)
}

fn see_saw_budget(restarts: Option<usize>, seed: u64) -> SeeSawBudget {
    let mut budget = SeeSawBudget {
        seed,
        ..Default::default()
    };
    if let Some(r) = restarts.or_else(|| env_override("PIK_RESTARTS")) {
        budget.restarts = r;
    }
    budget
}

fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::GenCopt { n, t, out } => {
            let c = gen_copt(n, t)?;
            println!("{}", format_matrix(&c, &out));
            Ok(EXIT_OK)
        }
        Command::Psuc { matrix, out } => {
            let c = read_matrix(&matrix)?;
            let worst = psuc(&c)?;
            let mean = psuc_prime(&c)?;
            if out.json {
                println!(
                    "{}",
                    serde_json::json!({
                        "psuc": format_rational(&worst),
                        "psuc_prime": format_rational(&mean),
                    })
                );
            } else if out.decimal {
                println!("psuc       {:.12}", to_f64(&worst));
                println!("psuc_prime {:.12}", to_f64(&mean));
            } else {
                println!("psuc       {}", format_rational(&worst));
                println!("psuc_prime {}", format_rational(&mean));
            }
            Ok(EXIT_OK)
        }
        Command::Majorize {
            n,
            m,
            delta,
            restarts,
            seed,
            out,
        } => {
            let n_mat = read_matrix(&n)?;
            let m_mat = read_matrix(&m)?;
            let budget = search_budget(delta, restarts, seed)?;
            match majorizes(&n_mat, &m_mat, &budget) {
                MajorizationDecision::Yes(cert) => {
                    if out.json {
                        println!("{}", serde_json::to_string(&cert.to_json())?);
                    } else {
                        println!("yes: M = L N R with");
                        println!("L:\n{}", format_matrix(&cert.l, &out));
                        println!("R:\n{}", format_matrix(&cert.r, &out));
                    }
                    Ok(EXIT_OK)
                }
                MajorizationDecision::No(reason) => {
                    let (label, detail) = match &reason {
                        NoReason::RankExceeds => ("rank-exceeds".to_string(), String::new()),
                        NoReason::BranchAndBoundExhausted { gap } => (
                            "branch-and-bound".to_string(),
                            format!(" (residual gap >= {})", format_rational(gap)),
                        ),
                    };
                    if out.json {
                        println!("{}", serde_json::json!({"verdict": "no", "reason": label}));
                    } else {
                        println!("no: {label}{detail}");
                    }
                    Ok(EXIT_NEGATIVE)
                }
                MajorizationDecision::Unknown { best_residual, .. } => {
                    if out.json {
                        println!(
                            "{}",
                            serde_json::json!({"verdict": "unknown", "best_residual": best_residual})
                        );
                    } else {
                        println!("unknown (best residual {best_residual:.3e})");
                    }
                    Ok(EXIT_UNKNOWN)
                }
            }
        }
        Command::VerifyImpl {
            states,
            povm,
            target,
            out,
        } => {
            let states = read_states(&states)?;
            let povm = read_povm(&povm)?;
            let target = read_matrix(&target)?;
            let got = born(&states, &povm)?;
            let matches = matrices_close(&got, &target, EPS);
            if out.json {
                println!("{}", serde_json::json!({"matches": matches}));
            } else if matches {
                println!("born rule reproduces the target within {EPS}");
            } else {
                println!("mismatch; born output:\n{}", format_matrix(&got, &out));
            }
            Ok(if matches { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::SolveImpl {
            target,
            system,
            restarts,
            seed,
            out,
        } => {
            let c = read_matrix(&target)?;
            let sys = SystemSpec::parse(&system)?;
            let budget = see_saw_budget(restarts, seed);
            match find_implementation(&c, &sys, &budget) {
                SearchVerdict::Realizable {
                    states,
                    povm,
                    provenance,
                } => {
                    if out.json {
                        let states_json = StatesJson {
                            states: states.iter().map(|s| s.to_json()).collect(),
                        };
                        println!(
                            "{}",
                            serde_json::json!({
                                "verdict": "realizable",
                                "provenance": provenance,
                                "states": states_json,
                                "povm": povm.to_json(),
                            })
                        );
                    } else {
                        println!("realizable via {provenance}");
                    }
                    Ok(EXIT_OK)
                }
                SearchVerdict::ImpossibleByTheorem { theorem } => {
                    if out.json {
                        println!(
                            "{}",
                            serde_json::json!({"verdict": "impossible", "theorem": theorem})
                        );
                    } else {
                        println!("impossible: {theorem}");
                    }
                    Ok(EXIT_NEGATIVE)
                }
                SearchVerdict::Unknown { best_residual, .. } => {
                    if out.json {
                        println!(
                            "{}",
                            serde_json::json!({"verdict": "unknown", "best_residual": best_residual})
                        );
                    } else {
                        println!("unknown (best residual {best_residual:.3e})");
                    }
                    Ok(EXIT_UNKNOWN)
                }
            }
        }
        Command::Table {
            system,
            nmax,
            csv,
            seed,
            out,
        } => {
            let sys = SystemSpec::parse(&system)?;
            let budget = see_saw_budget(None, seed);
            let table = build_table(&sys, nmax, &budget)?;
            if out.json {
                let cells: Vec<serde_json::Value> = table
                    .cells
                    .iter()
                    .map(|(&(n, t), s)| {
                        serde_json::json!({
                            "n": n,
                            "t": t,
                            "status": match s {
                                pik_core::tables::CellStatus::Implementable(_) => "implementable",
                                pik_core::tables::CellStatus::Impossible(_) => "impossible",
                                pik_core::tables::CellStatus::Unknown => "unknown",
                            },
                            "provenance": s.provenance().unwrap_or(""),
                        })
                    })
                    .collect();
                println!("{}", serde_json::json!({"system": sys.label(), "cells": cells}));
            } else {
                print!("{}", render_grid(&table));
            }
            if let Some(path) = csv {
                fs::write(&path, render_csv(&table))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let violations = check_table_consistency(&table);
            if violations.is_empty() {
                Ok(EXIT_OK)
            } else {
                eprintln!("table violates downward closure: {violations:?}");
                Ok(EXIT_NEGATIVE)
            }
        }
        Command::VerifyCert { m, n, cert, out } => {
            let m_mat = read_matrix(&m)?;
            let n_mat = read_matrix(&n)?;
            let text =
                fs::read_to_string(&cert).with_context(|| format!("reading {}", cert.display()))?;
            let json: CertificateJson =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", cert.display()))?;
            let cert = Certificate::from_json(&json)?;
            let ok = check_certificate(&m_mat, &n_mat, &cert)?;
            if out.json {
                println!("{}", serde_json::json!({"valid": ok}));
            } else {
                println!("{}", if ok { "certificate verifies exactly" } else { "certificate does not reproduce M" });
            }
            Ok(if ok { EXIT_OK } else { EXIT_NEGATIVE })
        }
    }
}

fn read_states(path: &PathBuf) -> Result<Vec<DensityOperator>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let json: StatesJson =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    json.states
        .iter()
        .map(|o| DensityOperator::from_json(o).map_err(|e| anyhow!("{}: {e}", path.display())))
        .collect()
}

fn read_povm(path: &PathBuf) -> Result<Povm> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let json: PovmJson =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Povm::from_json(&json).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn matrices_close(a: &CommMatrix, b: &CommMatrix, eps: f64) -> bool {
    a.rows() == b.rows()
        && a.cols() == b.cols()
        && (0..a.rows()).all(|i| {
            (0..a.cols()).all(|j| (to_f64(a.get(i, j)) - to_f64(b.get(i, j))).abs() <= eps)
        })
}
