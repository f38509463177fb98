//! Implementation search: given a communication matrix and a physical system
//! (qubit, rebit, qudit-d), decide realizability by exact constructions and
//! dimension theorems where possible, and fall back to a see-saw feasibility
//! solver that reports honest residuals instead of guessed verdicts.

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commat::{gen_copt, recognize_copt, CommMatrix};
use crate::linalg::RationalMatrix;
use crate::par::map_collect;
use crate::quantum::{
    cid, compose_with_certificate, cx, embed_realization, product_trace, psd_project,
    project_scaled_simplex, qubit_uniform_set, qutrit_c42, qutrit_sic_povm,
    realization_from_bloch_set, rebit_uniform_set, sym_states_from_povm, CMat, DensityOperator,
    Povm, EPS,
};
use crate::rational::{rat, to_f64};
use crate::ultraweak::copt_route;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemSpec {
    Qubit,
    Rebit,
    Qudit(usize),
}

impl SystemSpec {
    pub fn dim(&self) -> usize {
        match self {
            SystemSpec::Qubit | SystemSpec::Rebit => 2,
            SystemSpec::Qudit(d) => *d,
        }
    }

    /// Real-amplitude restriction (states and effects real, Bloch vectors in
    /// the x–z plane).
    pub fn is_real(&self) -> bool {
        matches!(self, SystemSpec::Rebit)
    }

    /// Dimension of the real span of observables: d² for complex systems,
    /// 3 for the real-amplitude qubit (1, σ_x, σ_z). Born matrices cannot
    /// exceed this rank.
    pub fn span_bound(&self) -> usize {
        match self {
            SystemSpec::Rebit => 3,
            s => s.dim() * s.dim(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "qubit" => Ok(SystemSpec::Qubit),
            "rebit" => Ok(SystemSpec::Rebit),
            _ => {
                if let Some(d) = s.strip_prefix("qudit:") {
                    let d: usize = d
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad qudit dimension in {s:?}")))?;
                    if d < 2 {
                        return Err(Error::Domain("qudit dimension must be >= 2".into()));
                    }
                    Ok(SystemSpec::Qudit(d))
                } else {
                    Err(Error::Parse(format!(
                        "unknown system {s:?}; expected qubit, rebit, or qudit:<d>"
                    )))
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            SystemSpec::Qubit => "qubit".into(),
            SystemSpec::Rebit => "rebit".into(),
            SystemSpec::Qudit(d) => format!("qudit:{d}"),
        }
    }
}

/// Maximal n such that id_n is implementable: the number of perfectly
/// distinguishable states.
pub fn operational_dimension(sys: &SystemSpec) -> usize {
    sys.dim()
}

#[derive(Clone, Debug)]
pub enum SearchVerdict {
    Realizable {
        states: Vec<DensityOperator>,
        povm: Povm,
        provenance: String,
    },
    ImpossibleByTheorem {
        theorem: String,
    },
    Unknown {
        best_residual: f64,
        best_states: Vec<DensityOperator>,
        best_povm: Povm,
    },
}

#[derive(Clone, Debug)]
pub struct SeeSawBudget {
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for SeeSawBudget {
    fn default() -> Self {
        Self {
            restarts: 64,
            iterations: 2000,
            seed: 0,
            parallel: true,
        }
    }
}

/// Max-abs deviation of tr[ρ_i M(j)] from the target.
fn born_deviation(states: &[DensityOperator], povm: &Povm, c: &CommMatrix) -> f64 {
    let mut dev: f64 = 0.0;
    for (i, s) in states.iter().enumerate() {
        for j in 0..povm.len() {
            let z = product_trace(s.mat(), povm.effect(j));
            dev = dev.max(z.im.abs());
            dev = dev.max((z.re - to_f64(c.get(i, j))).abs());
        }
    }
    dev
}

/// Any matrix with at most d columns is realizable classically: diagonal
/// states ρ_i = Σ_j C_ij |j⟩⟨j| read out by the computational basis.
fn classical_embedding(c: &CommMatrix, d: usize) -> Option<(Vec<DensityOperator>, Povm)> {
    let cols = c.cols();
    if cols > d {
        return None;
    }
    let states: Vec<DensityOperator> = (0..c.rows())
        .map(|i| {
            let mat = CMat::from_fn(cols, cols, |a, b| {
                if a == b {
                    cx(to_f64(c.get(i, a)), 0.)
                } else {
                    cx(0., 0.)
                }
            });
            DensityOperator::new(mat).expect("row-stochastic diagonal is a state")
        })
        .collect();
    let effects: Vec<CMat> = (0..cols)
        .map(|j| DensityOperator::basis_state(cols, j).mat().clone())
        .collect();
    let povm = Povm::new(effects).expect("projective measurement");
    embed_realization(&states, &povm, d).ok()
}

/// Direct (non-composed) realization of C_opt(n,t) in the given system.
fn realize_copt_direct(
    n: usize,
    t: usize,
    sys: &SystemSpec,
) -> Option<(Vec<DensityOperator>, Povm, String)> {
    let d = sys.dim();
    let target = gen_copt(n, t).ok()?;
    if let Some((states, povm)) = classical_embedding(&target, d) {
        if !sys.is_real() || (states.iter().all(|s| s.is_real()) && povm.is_real()) {
            return Some((states, povm, "diagonal classical embedding".into()));
        }
    }
    if t == 1 {
        if sys.is_real() {
            if n <= 3 {
                let set = rebit_uniform_set(n).ok()?;
                let (states, povm) = realization_from_bloch_set(&set).ok()?;
                return Some((states, povm, format!("planar uniform Bloch set (n={n})")));
            }
            return None;
        }
        if n <= 4 {
            let set = qubit_uniform_set(n).ok()?;
            let (states, povm) = realization_from_bloch_set(&set).ok()?;
            let (states, povm) = embed_realization(&states, &povm, d).ok()?;
            return Some((states, povm, format!("uniform Bloch set (n={n})")));
        }
        if n == 9 && d >= 3 {
            let povm = qutrit_sic_povm();
            let states = sym_states_from_povm(&povm, 9, 3).ok()?;
            let (states, povm) = embed_realization(&states, &povm, d).ok()?;
            return Some((states, povm, "qutrit SIC construction".into()));
        }
    }
    if (n, t) == (4, 2) && d >= 3 && !sys.is_real() {
        let (states, povm) = qutrit_c42();
        let (states, povm) = embed_realization(&states, &povm, d).ok()?;
        return Some((states, povm, "six-state qutrit construction".into()));
    }
    None
}

/// Downward closure: route the recognized target under the majorization
/// preorder to a directly realizable optimal matrix and pull the
/// implementation back through the certificate.
fn realize_by_closure(
    n: usize,
    t: usize,
    sys: &SystemSpec,
) -> Option<(Vec<DensityOperator>, Povm, String)> {
    for base_n in n..=9 {
        for base_t in 1..base_n {
            if (base_n, base_t) == (n, t) {
                continue;
            }
            let Some((states, povm, prov)) = realize_copt_direct(base_n, base_t, sys) else {
                continue;
            };
            let Some(cert) = copt_route((n, t), (base_n, base_t)) else {
                continue;
            };
            let Ok((states, povm)) = compose_with_certificate(&states, &povm, &cert) else {
                continue;
            };
            return Some((
                states,
                povm,
                format!("{prov} for (n={base_n}, t={base_t}) composed with a majorization certificate"),
            ));
        }
    }
    None
}

fn impossibility(c: &CommMatrix, recognized: Option<(usize, usize)>, sys: &SystemSpec) -> Option<String> {
    let d = sys.dim();
    let od = operational_dimension(sys);
    if let Some((n, t)) = recognized {
        if sys.is_real() && t == 1 && n >= 4 {
            // n unit vectors with pairwise dots 1/(1-n) span n-1 dimensions:
            // check the Gram rank explicitly, then compare with the plane
            let off = rat(1, 1 - (n as i64));
            let gram = RationalMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    crate::rational::int(1)
                } else {
                    off.clone()
                }
            });
            let rank = gram.rank();
            if rank > 2 {
                return Some(format!(
                    "planar Bloch geometry: the required Gram matrix has rank {rank} > 2"
                ));
            }
        }
        if t == 1 && n > d * d {
            return Some(format!(
                "uniform antidistinguishability bound: n={n} exceeds d^2={}",
                d * d
            ));
        }
        if t >= 2 && d == 2 {
            return Some("two-dimensional systems admit no optimal test with t >= 2".into());
        }
        if t == n - 1 && n > od {
            return Some(format!(
                "operational dimension: {n} perfectly distinguishable states exceed {od}"
            ));
        }
    }
    if c.rows() == c.cols() && *c == CommMatrix::identity(c.rows()) && c.rows() > od {
        return Some(format!(
            "operational dimension: {} perfectly distinguishable states exceed {od}",
            c.rows()
        ));
    }
    let rank = c.rank();
    if rank > sys.span_bound() {
        return Some(format!(
            "observable span bound: target rank {rank} exceeds the {}-dimensional operator span",
            sys.span_bound()
        ));
    }
    None
}

/// Decides implementability of `c` in `sys`: exact constructions, then
/// impossibility theorems, then the see-saw solver.
pub fn find_implementation(c: &CommMatrix, sys: &SystemSpec, budget: &SeeSawBudget) -> SearchVerdict {
    let recognized = recognize_copt(c);
    // (1) exact constructions
    if let Some((states, povm)) = classical_embedding(c, sys.dim()) {
        let real_ok = !sys.is_real() || (states.iter().all(|s| s.is_real()) && povm.is_real());
        if real_ok && born_deviation(&states, &povm, c) < EPS {
            return SearchVerdict::Realizable {
                states,
                povm,
                provenance: "diagonal classical embedding".into(),
            };
        }
    }
    if let Some((n, t)) = recognized {
        let direct = realize_copt_direct(n, t, sys).or_else(|| realize_by_closure(n, t, sys));
        if let Some((states, povm, provenance)) = direct {
            if born_deviation(&states, &povm, c) < EPS {
                return SearchVerdict::Realizable {
                    states,
                    povm,
                    provenance,
                };
            }
        }
    }
    // (2) impossibility theorems
    if let Some(theorem) = impossibility(c, recognized, sys) {
        return SearchVerdict::ImpossibleByTheorem { theorem };
    }
    // (3) see-saw
    see_saw(c, sys, budget)
}

struct SeeSawRun {
    residual: f64,
    states: Vec<DensityOperator>,
    povm: Povm,
}

fn random_pure_state(rng: &mut ChaCha8Rng, d: usize, real: bool) -> CMat {
    let v: Vec<Complex<f64>> = (0..d)
        .map(|_| {
            let re: f64 = rng.gen_range(-1.0..1.0);
            let im: f64 = if real { 0.0 } else { rng.gen_range(-1.0..1.0) };
            cx(re, im)
        })
        .collect();
    let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let scale = 1.0 / norm2.max(1e-12);
    CMat::from_fn(d, d, |i, j| v[i] * v[j].conj() * cx(scale, 0.))
}

fn realify(m: &mut CMat) {
    for z in m.iter_mut() {
        *z = cx(z.re, 0.);
    }
}

/// Projection of a Hermitian matrix onto the density-operator set (PSD,
/// trace 1) by projecting its spectrum onto the simplex.
fn density_project(m: &CMat, real: bool) -> CMat {
    let mut h = (m + m.adjoint()) * cx(0.5, 0.);
    if real {
        realify(&mut h);
    }
    let eig = h.clone().symmetric_eigen();
    let d = h.nrows();
    let mut lam: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    project_scaled_simplex(&mut lam, 1.0);
    let mut out = CMat::zeros(d, d);
    for k in 0..d {
        if lam[k] > 0.0 {
            let v = eig.eigenvectors.column(k);
            let proj = CMat::from_fn(d, d, |i, j| v[i] * v[j].conj());
            out += proj * cx(lam[k], 0.);
        }
    }
    if real {
        realify(&mut out);
    }
    out
}

/// Dykstra's alternating projections onto {each effect PSD} ∩ {Σ = 1}.
fn povm_project(effects: &[CMat], real: bool, sweeps: usize) -> Vec<CMat> {
    let d = effects[0].nrows();
    let n = effects.len();
    let mut x: Vec<CMat> = effects
        .iter()
        .map(|e| {
            let mut h = (e + e.adjoint()) * cx(0.5, 0.);
            if real {
                realify(&mut h);
            }
            h
        })
        .collect();
    let mut corr: Vec<CMat> = vec![CMat::zeros(d, d); n];
    for _ in 0..sweeps {
        // PSD half-step with Dykstra correction
        for j in 0..n {
            let y = &x[j] + &corr[j];
            let p = psd_project(&y);
            corr[j] = y - &p;
            x[j] = p;
        }
        // affine half-step: subtract the shared normalization defect
        let mut sum = CMat::zeros(d, d);
        for e in &x {
            sum += e;
        }
        let defect = (sum - cid(d)) * cx(1.0 / n as f64, 0.);
        for e in x.iter_mut() {
            *e -= &defect;
        }
        if real {
            for e in x.iter_mut() {
                realify(e);
            }
        }
    }
    x
}

fn objective(states: &[CMat], effects: &[CMat], t: &[Vec<f64>]) -> f64 {
    let mut f = 0.0;
    for (i, s) in states.iter().enumerate() {
        for (j, e) in effects.iter().enumerate() {
            let p = product_trace(s, e).re;
            let dv = p - t[i][j];
            f += dv * dv;
        }
    }
    f
}

fn see_saw_restart(
    c: &CommMatrix,
    sys: &SystemSpec,
    seed: u64,
    iterations: usize,
) -> SeeSawRun {
    let d = sys.dim();
    let real = sys.is_real();
    let (a, b) = (c.rows(), c.cols());
    let t: Vec<Vec<f64>> = (0..a)
        .map(|i| (0..b).map(|j| to_f64(c.get(i, j))).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states: Vec<CMat> = (0..a).map(|_| random_pure_state(&mut rng, d, real)).collect();
    let mut effects: Vec<CMat> = (0..b)
        .map(|_| {
            let noise = random_pure_state(&mut rng, d, real) * cx(0.2, 0.);
            cid(d) * cx(1.0 / b as f64, 0.) + noise
        })
        .collect();
    effects = povm_project(&effects, real, 60);
    let mut f = objective(&states, &effects, &t);
    for _ in 0..iterations {
        if f < 1e-22 {
            break;
        }
        // state sweep: projected gradient per state, accept only on decrease
        for i in 0..a {
            let mut grad = CMat::zeros(d, d);
            for (j, e) in effects.iter().enumerate() {
                let dv = product_trace(&states[i], e).re - t[i][j];
                grad += e * cx(2.0 * dv, 0.);
            }
            let mut step = 0.5;
            for _ in 0..8 {
                let cand = density_project(&(&states[i] - &grad * cx(step, 0.)), real);
                let old = std::mem::replace(&mut states[i], cand);
                let f_new = objective(&states, &effects, &t);
                if f_new < f {
                    f = f_new;
                    break;
                }
                states[i] = old;
                step *= 0.5;
            }
        }
        // measurement sweep: joint projected gradient, accept only on decrease
        let mut grads: Vec<CMat> = Vec::with_capacity(b);
        for j in 0..b {
            let mut g = CMat::zeros(d, d);
            for (i, s) in states.iter().enumerate() {
                let dv = product_trace(s, &effects[j]).re - t[i][j];
                g += s * cx(2.0 * dv, 0.);
            }
            grads.push(g);
        }
        let mut step = 0.5;
        for _ in 0..8 {
            let cand: Vec<CMat> = effects
                .iter()
                .zip(&grads)
                .map(|(e, g)| e - g * cx(step, 0.))
                .collect();
            let cand = povm_project(&cand, real, 40);
            let f_new = objective(&states, &cand, &t);
            if f_new < f {
                effects = cand;
                f = f_new;
                break;
            }
            step *= 0.5;
        }
    }
    let states: Vec<DensityOperator> = states
        .iter()
        .map(|m| DensityOperator::unchecked(m.clone()))
        .collect();
    let povm_mats = povm_project(&effects, real, 200);
    let residual = {
        let povm_tmp = Povm::unchecked(povm_mats.clone());
        born_deviation(&states, &povm_tmp, c)
    };
    SeeSawRun {
        residual,
        states,
        povm: Povm::unchecked(povm_mats),
    }
}

fn see_saw(c: &CommMatrix, sys: &SystemSpec, budget: &SeeSawBudget) -> SearchVerdict {
    let seeds: Vec<u64> = (0..budget.restarts as u64)
        .map(|i| budget.seed.wrapping_add(i))
        .collect();
    let runs = map_collect(seeds, budget.parallel, |s| {
        see_saw_restart(c, sys, s, budget.iterations)
    });
    // minimum residual, earliest seed on ties — schedule-independent
    let best = runs
        .into_iter()
        .min_by(|x, y| x.residual.total_cmp(&y.residual))
        .expect("at least one restart");
    if best.residual < EPS {
        if let Ok(povm) = Povm::new(best.povm.effects().to_vec()) {
            let states = best
                .states
                .iter()
                .map(|s| DensityOperator::new(s.mat().clone()))
                .collect::<Result<Vec<_>>>();
            if let Ok(states) = states {
                return SearchVerdict::Realizable {
                    states,
                    povm,
                    provenance: format!("see-saw solver (residual {:.2e})", best.residual),
                };
            }
        }
    }
    SearchVerdict::Unknown {
        best_residual: best.residual,
        best_states: best.states,
        best_povm: best.povm,
    }
}
