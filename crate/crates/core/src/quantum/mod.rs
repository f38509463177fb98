//! Density operators, POVMs, Born-rule evaluation, and the explicit
//! state/measurement constructions used throughout.
//!
//! Matrices are complex floating point with a physicality tolerance of
//! `EPS = 1e-9`; the built-in constructions are stored via exact algebraic
//! constants (halves, quarters, 1/√2, 1/√3) evaluated at full precision.

mod anti;

pub use anti::{is_antidistinguishable, is_uniformly_antidistinguishable};
pub(crate) use anti::{project_scaled_simplex, psd_project};

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::commat::CommMatrix;
use crate::rational::to_f64;
use crate::ultraweak::Certificate;
use crate::{Error, Result};

/// Physicality tolerance for Hermiticity, positivity, trace, normalization.
pub const EPS: f64 = 1e-9;

pub(crate) type CMat = DMatrix<Complex<f64>>;

pub(crate) fn cx(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

pub(crate) fn cid(d: usize) -> CMat {
    DMatrix::from_fn(d, d, |i, j| cx(if i == j { 1.0 } else { 0.0 }, 0.0))
}

/// (σ_x, σ_y, σ_z)
pub fn paulis() -> [CMat; 3] {
    [
        DMatrix::from_row_slice(2, 2, &[cx(0., 0.), cx(1., 0.), cx(1., 0.), cx(0., 0.)]),
        DMatrix::from_row_slice(2, 2, &[cx(0., 0.), cx(0., -1.), cx(0., 1.), cx(0., 0.)]),
        DMatrix::from_row_slice(2, 2, &[cx(1., 0.), cx(0., 0.), cx(0., 0.), cx(-1., 0.)]),
    ]
}

fn bloch_operator(r: [f64; 3]) -> CMat {
    let [sx, sy, sz] = paulis();
    sx * cx(r[0], 0.) + sy * cx(r[1], 0.) + sz * cx(r[2], 0.)
}

fn hermitian_violation(m: &CMat) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub(crate) fn herm_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn trace_re(m: &CMat) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

pub(crate) fn product_trace(a: &CMat, b: &CMat) -> Complex<f64> {
    (a * b).diagonal().iter().sum()
}

/// Quantum state: Hermitian, positive semidefinite, unit trace (within EPS).
#[derive(Clone, Debug)]
pub struct DensityOperator {
    dim: usize,
    mat: CMat,
}

impl DensityOperator {
    pub fn new(mat: CMat) -> Result<Self> {
        let d = mat.nrows();
        if mat.ncols() != d || d == 0 {
            return Err(Error::NonPhysical("state must be square".into()));
        }
        if hermitian_violation(&mat) > EPS {
            return Err(Error::NonPhysical("state is not Hermitian".into()));
        }
        if (trace_re(&mat) - 1.0).abs() > EPS {
            return Err(Error::NonPhysical(format!(
                "state trace {} is not 1",
                trace_re(&mat)
            )));
        }
        let min_eig = herm_eigenvalues(&mat)[0];
        if min_eig < -EPS {
            return Err(Error::NonPhysical(format!(
                "state has negative eigenvalue {min_eig}"
            )));
        }
        Ok(Self { dim: d, mat })
    }

    /// ρ = ½(1 + r·σ); requires ‖r‖ ≤ 1.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        Self::new((cid(2) + bloch_operator(r)) * cx(0.5, 0.))
    }

    /// Bypasses validation; for reporting near-physical solver iterates only.
    pub(crate) fn unchecked(mat: CMat) -> Self {
        Self {
            dim: mat.nrows(),
            mat,
        }
    }

    pub fn basis_state(d: usize, k: usize) -> Self {
        let mat = CMat::from_fn(d, d, |i, j| {
            cx(if i == k && j == k { 1.0 } else { 0.0 }, 0.0)
        });
        Self { dim: d, mat }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn is_real(&self) -> bool {
        self.mat.iter().all(|z| z.im.abs() <= EPS)
    }

    /// Largest eigenvalue ≈ 1.
    pub fn is_pure(&self) -> bool {
        let ev = herm_eigenvalues(&self.mat);
        (ev[ev.len() - 1] - 1.0).abs() <= 1e-7
    }

    /// Bloch vector (tr ρσ_x, tr ρσ_y, tr ρσ_z); qubits only.
    pub fn bloch(&self) -> Result<[f64; 3]> {
        if self.dim != 2 {
            return Err(Error::Shape("Bloch vector needs dim 2".into()));
        }
        let p = paulis();
        let mut r = [0.0; 3];
        for (k, sigma) in p.iter().enumerate() {
            r[k] = product_trace(&self.mat, sigma).re;
        }
        Ok(r)
    }

    pub fn to_json(&self) -> OperatorJson {
        OperatorJson::from_mat(&self.mat)
    }

    pub fn from_json(j: &OperatorJson) -> Result<Self> {
        Self::new(j.to_mat()?)
    }
}

/// Positive operator-valued measure: PSD effects summing to the identity.
#[derive(Clone, Debug)]
pub struct Povm {
    dim: usize,
    effects: Vec<CMat>,
}

impl Povm {
    pub fn new(effects: Vec<CMat>) -> Result<Self> {
        let Some(first) = effects.first() else {
            return Err(Error::NonPhysical("POVM needs at least one effect".into()));
        };
        let d = first.nrows();
        let mut sum = CMat::zeros(d, d);
        for (j, e) in effects.iter().enumerate() {
            if e.nrows() != d || e.ncols() != d {
                return Err(Error::NonPhysical(format!("effect {j} has wrong shape")));
            }
            if hermitian_violation(e) > EPS {
                return Err(Error::NonPhysical(format!("effect {j} is not Hermitian")));
            }
            let min_eig = herm_eigenvalues(e)[0];
            if min_eig < -EPS {
                return Err(Error::NonPhysical(format!(
                    "effect {j} has negative eigenvalue {min_eig}"
                )));
            }
            sum += e;
        }
        let dev = (&sum - cid(d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > EPS {
            return Err(Error::NonPhysical(format!(
                "effects sum to identity only within {dev}"
            )));
        }
        Ok(Self { dim: d, effects })
    }

    /// Bypasses validation; for reporting near-physical solver iterates only.
    pub(crate) fn unchecked(effects: Vec<CMat>) -> Self {
        Self {
            dim: effects.first().map_or(0, |e| e.nrows()),
            effects,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effect(&self, j: usize) -> &CMat {
        &self.effects[j]
    }

    pub fn effects(&self) -> &[CMat] {
        &self.effects
    }

    pub fn is_real(&self) -> bool {
        self.effects
            .iter()
            .all(|e| e.iter().all(|z| z.im.abs() <= EPS))
    }

    pub fn to_json(&self) -> PovmJson {
        PovmJson {
            effects: self.effects.iter().map(OperatorJson::from_mat).collect(),
        }
    }

    pub fn from_json(j: &PovmJson) -> Result<Self> {
        let effects = j
            .effects
            .iter()
            .map(|o| o.to_mat())
            .collect::<Result<Vec<_>>>()?;
        Self::new(effects)
    }
}

/// Wire format for a single operator, row-major real/imaginary parts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorJson {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl OperatorJson {
    fn from_mat(m: &CMat) -> Self {
        let d = m.nrows();
        let mut re = Vec::with_capacity(d * d);
        let mut im = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        Self { dim: d, re, im }
    }

    fn to_mat(&self) -> Result<CMat> {
        let d = self.dim;
        if self.re.len() != d * d || self.im.len() != d * d {
            return Err(Error::Parse(format!(
                "operator of dim {d} needs {} entries per part",
                d * d
            )));
        }
        Ok(CMat::from_fn(d, d, |i, j| {
            cx(self.re[i * d + j], self.im[i * d + j])
        }))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StatesJson {
    pub states: Vec<OperatorJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PovmJson {
    pub effects: Vec<OperatorJson>,
}

/// Bloch vector with an optional measurement weight t_j > 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector {
    pub r: [f64; 3],
    pub weight: Option<f64>,
}

/// Outcome probabilities C_ij = tr[ρ_i M(j)], returned as an exact
/// row-stochastic matrix (entries rationalized within 1e-12; row-sum
/// deviations below EPS are absorbed).
pub fn born(states: &[DensityOperator], povm: &Povm) -> Result<CommMatrix> {
    if states.is_empty() {
        return Err(Error::Shape("born needs at least one state".into()));
    }
    let d = povm.dim();
    if states.iter().any(|s| s.dim() != d) {
        return Err(Error::Shape("state/POVM dimension mismatch".into()));
    }
    let (rows, cols) = (states.len(), povm.len());
    let mut data = Vec::with_capacity(rows * cols);
    for s in states {
        for j in 0..cols {
            let z = product_trace(s.mat(), povm.effect(j));
            if z.im.abs() > EPS {
                return Err(Error::NonPhysical(format!(
                    "probability has imaginary part {}",
                    z.im
                )));
            }
            data.push(z.re);
        }
    }
    CommMatrix::from_floats(rows, cols, &data, 1e-12, EPS)
}

/// Leave-one-out mixtures ρ'_i = 1/(n−1) Σ_{j≠i} ρ_j.
pub fn mixture_construction(states: &[DensityOperator]) -> Result<Vec<DensityOperator>> {
    let n = states.len();
    if n < 2 {
        return Err(Error::Domain("mixture construction needs n >= 2".into()));
    }
    let d = states[0].dim();
    if states.iter().any(|s| s.dim() != d) {
        return Err(Error::Shape("states have mixed dimensions".into()));
    }
    let w = cx(1.0 / (n as f64 - 1.0), 0.);
    (0..n)
        .map(|i| {
            let mut sum = CMat::zeros(d, d);
            for (j, s) in states.iter().enumerate() {
                if j != i {
                    sum += s.mat();
                }
            }
            DensityOperator::new(sum * w)
        })
        .collect()
}

const SIC_SIGNS: [[f64; 3]; 4] = [
    [1., 1., 1.],
    [1., -1., -1.],
    [-1., 1., -1.],
    [-1., -1., 1.],
];

/// Qubit SIC-POVM: M(j) = ¼(1 + (1/√3)(±σ_x ± σ_y ± σ_z)) over the
/// tetrahedral sign patterns.
pub fn qubit_sic_povm() -> Povm {
    let s = 1.0 / f64::sqrt(3.0);
    let effects = SIC_SIGNS
        .iter()
        .map(|signs| {
            (cid(2) + bloch_operator([s * signs[0], s * signs[1], s * signs[2]])) * cx(0.25, 0.)
        })
        .collect();
    Povm::new(effects).expect("SIC constants are physical")
}

/// The four states ρ_j = ½(1 − (1/√3)(±σ_x ± σ_y ± σ_z)) antipodal to the
/// SIC directions; together with `qubit_sic_povm` they implement the n=4,
/// t=1 optimal matrix.
pub fn qubit_sic_states() -> Vec<DensityOperator> {
    let s = 1.0 / f64::sqrt(3.0);
    SIC_SIGNS
        .iter()
        .map(|signs| {
            DensityOperator::from_bloch([-s * signs[0], -s * signs[1], -s * signs[2]])
                .expect("unit Bloch vector")
        })
        .collect()
}

/// Trine POVM: N(1) = ⅓(1 + σ_x), N(2,3) = ⅓(1 − ½σ_x ± (√3/2)σ_y).
pub fn trine_povm() -> Povm {
    let h = f64::sqrt(3.0) / 2.0;
    let dirs = [[1.0, 0.0, 0.0], [-0.5, h, 0.0], [-0.5, -h, 0.0]];
    let effects = dirs
        .iter()
        .map(|&r| (cid(2) + bloch_operator(r)) * cx(1.0 / 3.0, 0.))
        .collect();
    Povm::new(effects).expect("trine constants are physical")
}

/// States ρ_i = 1/(d−1)(1 − (n/d)·M(i)) for a symmetric POVM: effects must
/// be rank-1 with constant trace d/n and constant pairwise overlap
/// (dn − d²)/(n²(n−1)).
pub fn sym_states_from_povm(povm: &Povm, n: usize, d: usize) -> Result<Vec<DensityOperator>> {
    if povm.len() != n || povm.dim() != d {
        return Err(Error::Shape(format!(
            "POVM is {}-outcome dim {}, expected n={n}, d={d}",
            povm.len(),
            povm.dim()
        )));
    }
    if d < 2 || n < 2 {
        return Err(Error::Domain("symmetric construction needs n, d >= 2".into()));
    }
    let tr_expected = d as f64 / n as f64;
    let overlap_expected =
        (d * n - d * d) as f64 / ((n * n) as f64 * (n as f64 - 1.0));
    for (j, e) in povm.effects().iter().enumerate() {
        let ev = herm_eigenvalues(e);
        // rank-1: all but the top eigenvalue vanish
        if ev[..ev.len() - 1].iter().any(|v| v.abs() > EPS) {
            return Err(Error::NonPhysical(format!("effect {j} is not rank-1")));
        }
        if (trace_re(e) - tr_expected).abs() > EPS {
            return Err(Error::NonPhysical(format!(
                "effect {j} has trace {} instead of d/n",
                trace_re(e)
            )));
        }
        for k in (j + 1)..povm.len() {
            let ov = product_trace(e, povm.effect(k)).re;
            if (ov - overlap_expected).abs() > EPS {
                return Err(Error::NonPhysical(format!(
                    "effects {j},{k} overlap {ov}, expected {overlap_expected}"
                )));
            }
        }
    }
    let scale = cx(1.0 / (d as f64 - 1.0), 0.);
    let frac = cx(n as f64 / d as f64, 0.);
    povm.effects()
        .iter()
        .map(|e| DensityOperator::new((cid(d) - e * frac) * scale))
        .collect()
}

/// n unit Bloch vectors with pairwise dot products exactly 1/(1−n)
/// (segment, triangle, tetrahedron), each carrying weight t_j = 2/n.
pub fn qubit_uniform_set(n: usize) -> Result<Vec<BlochVector>> {
    let h = f64::sqrt(3.0) / 2.0;
    let s = 1.0 / f64::sqrt(3.0);
    let vectors: Vec<[f64; 3]> = match n {
        2 => vec![[1., 0., 0.], [-1., 0., 0.]],
        3 => vec![[-1., 0., 0.], [0.5, -h, 0.], [0.5, h, 0.]],
        4 => SIC_SIGNS
            .iter()
            .map(|sg| [-s * sg[0], -s * sg[1], -s * sg[2]])
            .collect(),
        _ => {
            return Err(Error::Domain(format!(
                "uniform qubit sets exist only for n in 2..=4, got {n}"
            )))
        }
    };
    let t = 2.0 / n as f64;
    Ok(vectors
        .into_iter()
        .map(|r| BlochVector { r, weight: Some(t) })
        .collect())
}

/// The planar (x–z) variants available to real-amplitude qubits: only
/// n ∈ {2, 3} admit unit vectors with pairwise dots 1/(1−n) in a plane.
pub fn rebit_uniform_set(n: usize) -> Result<Vec<BlochVector>> {
    let h = f64::sqrt(3.0) / 2.0;
    let vectors: Vec<[f64; 3]> = match n {
        2 => vec![[1., 0., 0.], [-1., 0., 0.]],
        3 => vec![[-1., 0., 0.], [0.5, 0., -h], [0.5, 0., h]],
        _ => {
            return Err(Error::Domain(format!(
                "planar uniform sets exist only for n in 2..=3, got {n}"
            )))
        }
    };
    let t = 2.0 / n as f64;
    Ok(vectors
        .into_iter()
        .map(|r| BlochVector { r, weight: Some(t) })
        .collect())
}

/// States ρ_j = ½(1 + r_j·σ) and effects M(j) = (t_j/2)(1 − r_j·σ) from a
/// weighted Bloch set; valid whenever Σt_j = 2 and Σ t_j r_j = 0.
pub fn realization_from_bloch_set(set: &[BlochVector]) -> Result<(Vec<DensityOperator>, Povm)> {
    let states = set
        .iter()
        .map(|b| DensityOperator::from_bloch(b.r))
        .collect::<Result<Vec<_>>>()?;
    let effects = set
        .iter()
        .map(|b| {
            let t = b.weight.ok_or_else(|| {
                Error::Domain("Bloch vector carries no measurement weight".into())
            })?;
            Ok((cid(2) - bloch_operator(b.r)) * cx(t / 2.0, 0.))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((states, Povm::new(effects)?))
}

/// The six qutrit states and four-outcome measurement realizing the n=4,
/// t=2 optimal matrix: tr[ρ_{ij} M(k)] = ½ for k ∈ {i,j} and 0 otherwise.
/// States are ordered so that `born` yields the rows in lexicographic tuple
/// order: the state for tuple (i,j) is ρ of the complementary pair.
pub fn qutrit_c42() -> (Vec<DensityOperator>, Povm) {
    let s = 0.5 / f64::sqrt(2.0);
    let q = 0.25;
    let real3 = |rows: [[f64; 3]; 3]| {
        CMat::from_fn(3, 3, |i, j| cx(rows[i][j], 0.))
    };
    let rho_12 = real3([[1., 0., 0.], [0., 0., 0.], [0., 0., 0.]]);
    let rho_13 = real3([[q, -q, -s], [-q, q, s], [-s, s, 0.5]]);
    let rho_14 = real3([[q, q, -s], [q, q, -s], [-s, -s, 0.5]]);
    let rho_23 = real3([[q, q, s], [q, q, s], [s, s, 0.5]]);
    let rho_24 = real3([[q, -q, s], [-q, q, -s], [s, -s, 0.5]]);
    let rho_34 = real3([[0., 0., 0.], [0., 1., 0.], [0., 0., 0.]]);
    // lexicographic tuples (1,2),(1,3),(1,4),(2,3),(2,4),(3,4) need the
    // complementary-pair states
    let states = [rho_34, rho_24, rho_23, rho_14, rho_13, rho_12]
        .into_iter()
        .map(|m| DensityOperator::new(m).expect("printed states are physical"))
        .collect();
    let m1 = real3([[0.5, 0., -s], [0., 0., 0.], [-s, 0., q]]);
    let m2 = real3([[0.5, 0., s], [0., 0., 0.], [s, 0., q]]);
    let m3 = real3([[0., 0., 0.], [0., 0.5, s], [0., s, q]]);
    let m4 = real3([[0., 0., 0.], [0., 0.5, -s], [0., -s, q]]);
    let povm = Povm::new(vec![m1, m2, m3, m4]).expect("printed effects are physical");
    (states, povm)
}

/// Qutrit SIC-POVM from the Weyl–Heisenberg orbit of the fiducial
/// (0, 1, −1)/√2: nine rank-1 effects |ψ_jk⟩⟨ψ_jk|/3 with constant pairwise
/// overlap 1/4 between the projectors.
pub fn qutrit_sic_povm() -> Povm {
    let inv_sqrt2 = 1.0 / f64::sqrt(2.0);
    let fiducial = [cx(0., 0.), cx(inv_sqrt2, 0.), cx(-inv_sqrt2, 0.)];
    let omega = cx(-0.5, f64::sqrt(3.0) / 2.0); // primitive cube root of unity
    let mut effects = Vec::with_capacity(9);
    for j in 0..3usize {
        for k in 0..3usize {
            // ψ_l = ω^{k(l+j)} f_{(l+j) mod 3}  (shift by j, phase by Z^k)
            let mut psi = [cx(0., 0.); 3];
            for (l, slot) in psi.iter_mut().enumerate() {
                let src = (l + j) % 3;
                *slot = omega.powu((k * src) as u32) * fiducial[src];
            }
            let proj = CMat::from_fn(3, 3, |a, b| psi[a] * psi[b].conj());
            effects.push(proj * cx(1.0 / 3.0, 0.));
        }
    }
    Povm::new(effects).expect("Weyl-Heisenberg orbit is a SIC")
}

/// Pads states and effects from their dimension into `d`, distributing the
/// leftover projector uniformly over the effects so the sum stays 1 while
/// every Born probability is unchanged (the states keep their support).
pub fn embed_realization(
    states: &[DensityOperator],
    povm: &Povm,
    d: usize,
) -> Result<(Vec<DensityOperator>, Povm)> {
    let d0 = povm.dim();
    if d < d0 {
        return Err(Error::Domain(format!("cannot embed dim {d0} into {d}")));
    }
    if d == d0 {
        return Ok((states.to_vec(), povm.clone()));
    }
    let pad = |m: &CMat| {
        CMat::from_fn(d, d, |i, j| {
            if i < d0 && j < d0 {
                m[(i, j)]
            } else {
                cx(0., 0.)
            }
        })
    };
    let states = states
        .iter()
        .map(|s| DensityOperator::new(pad(s.mat())))
        .collect::<Result<Vec<_>>>()?;
    let n = povm.len() as f64;
    let rest = CMat::from_fn(d, d, |i, j| {
        cx(if i == j && i >= d0 { 1.0 / n } else { 0.0 }, 0.)
    });
    let effects = povm.effects().iter().map(|e| pad(e) + &rest).collect();
    Ok((states, Povm::new(effects)?))
}

/// Prepares the coarse-grained setup of a majorization certificate: new
/// states s'_p = Σ_i L_pi ρ_i and post-processed effects
/// M'(q) = Σ_j R_jq M(j), so born(states', povm') = L·born(states, povm)·R.
pub fn compose_with_certificate(
    states: &[DensityOperator],
    povm: &Povm,
    cert: &Certificate,
) -> Result<(Vec<DensityOperator>, Povm)> {
    if cert.l.cols() != states.len() || cert.r.rows() != povm.len() {
        return Err(Error::Shape(format!(
            "certificate expects {} states and {} outcomes, got {} and {}",
            cert.l.cols(),
            cert.r.rows(),
            states.len(),
            povm.len()
        )));
    }
    let d = povm.dim();
    let new_states = (0..cert.l.rows())
        .map(|p| {
            let mut sum = CMat::zeros(d, d);
            for (i, s) in states.iter().enumerate() {
                let w = to_f64(cert.l.get(p, i));
                if w != 0.0 {
                    sum += s.mat() * cx(w, 0.);
                }
            }
            DensityOperator::new(sum)
        })
        .collect::<Result<Vec<_>>>()?;
    let new_effects = (0..cert.r.cols())
        .map(|q| {
            let mut sum = CMat::zeros(d, d);
            for (j, e) in povm.effects().iter().enumerate() {
                let w = to_f64(cert.r.get(j, q));
                if w != 0.0 {
                    sum += e * cx(w, 0.);
                }
            }
            sum
        })
        .collect();
    Ok((new_states, Povm::new(new_effects)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commat::{gen_copt, CommMatrix};
    use crate::rational::{int, rat};
    use crate::ultraweak::build_collapse_cert;

    #[test]
    fn sic_identities() {
        let povm = qubit_sic_povm();
        for j in 0..4 {
            assert!((trace_re(povm.effect(j)) - 0.5).abs() < 1e-12);
            let sq = product_trace(povm.effect(j), povm.effect(j)).re;
            assert!((sq - 0.25).abs() < 1e-12, "tr M(j)^2 = 1/d^2");
            for k in (j + 1)..4 {
                let ov = product_trace(povm.effect(j), povm.effect(k)).re;
                assert!((ov - 1.0 / 12.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trine_identities() {
        let povm = trine_povm();
        for j in 0..3 {
            assert!((trace_re(povm.effect(j)) - 2.0 / 3.0).abs() < 1e-12);
            for k in (j + 1)..3 {
                let ov = product_trace(povm.effect(j), povm.effect(k)).re;
                assert!((ov - 1.0 / 9.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn born_sic_gives_copt41() {
        let c = born(&qubit_sic_states(), &qubit_sic_povm()).unwrap();
        assert_eq!(c, gen_copt(4, 1).unwrap());
    }

    #[test]
    fn sym_states_from_trine_match_display() {
        let states = sym_states_from_povm(&trine_povm(), 3, 2).unwrap();
        // first state is ½(1 − σ_x)
        let r = states[0].bloch().unwrap();
        assert!((r[0] + 1.0).abs() < 1e-12 && r[1].abs() < 1e-12 && r[2].abs() < 1e-12);
        let c = born(&states, &trine_povm()).unwrap();
        assert_eq!(c, gen_copt(3, 1).unwrap());
    }

    #[test]
    fn sym_states_reject_asymmetric_povm() {
        // the trivial coin {1/2, 1/2} has full-rank effects
        let half = cid(2) * cx(0.5, 0.);
        let povm = Povm::new(vec![half.clone(), half]).unwrap();
        assert!(sym_states_from_povm(&povm, 2, 2).is_err());
    }

    #[test]
    fn born_basis_states_is_identity() {
        let d = 3;
        let states: Vec<_> = (0..d).map(|k| DensityOperator::basis_state(d, k)).collect();
        let effects: Vec<CMat> = (0..d)
            .map(|k| DensityOperator::basis_state(d, k).mat().clone())
            .collect();
        let povm = Povm::new(effects).unwrap();
        assert_eq!(born(&states, &povm).unwrap(), CommMatrix::identity(d));
    }

    #[test]
    fn born_trine_matches_bloch_oracle() {
        // independent oracle: tr[ρ M] = (t/2)(1 + r·m) for ρ = ½(1 + r·σ),
        // M = (t/2)(1 + m·σ)
        let states = qubit_sic_states();
        let povm = trine_povm();
        let c = born(&states, &povm).unwrap();
        let h = f64::sqrt(3.0) / 2.0;
        let trine_dirs = [[1.0, 0.0, 0.0], [-0.5, h, 0.0], [-0.5, -h, 0.0]];
        let s = 1.0 / f64::sqrt(3.0);
        for (i, signs) in SIC_SIGNS.iter().enumerate() {
            let r = [-s * signs[0], -s * signs[1], -s * signs[2]];
            for (j, m) in trine_dirs.iter().enumerate() {
                let dot: f64 = r.iter().zip(m).map(|(a, b)| a * b).sum();
                let expected = (1.0 / 3.0) * (1.0 + dot);
                let got = to_f64(c.get(i, j));
                assert!((got - expected).abs() < 1e-9, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn mixture_construction_examples() {
        let states: Vec<_> = (0..2).map(|k| DensityOperator::basis_state(2, k)).collect();
        let mixed = mixture_construction(&states).unwrap();
        assert!((mixed[0].mat()[(1, 1)].re - 1.0).abs() < 1e-12);
        assert!((mixed[1].mat()[(0, 0)].re - 1.0).abs() < 1e-12);
        for d in [3usize, 4] {
            let states: Vec<_> = (0..d).map(|k| DensityOperator::basis_state(d, k)).collect();
            let effects: Vec<CMat> = states.iter().map(|s| s.mat().clone()).collect();
            let povm = Povm::new(effects).unwrap();
            let mixed = mixture_construction(&states).unwrap();
            assert_eq!(born(&mixed, &povm).unwrap(), gen_copt(d, 1).unwrap());
        }
        assert!(mixture_construction(&states[..1]).is_err());
    }

    #[test]
    fn qutrit_c42_reproduces_target() {
        let (states, povm) = qutrit_c42();
        let c = born(&states, &povm).unwrap();
        assert_eq!(c, gen_copt(4, 2).unwrap());
        // spot values in the printed ordering: tr[ρ_12 M(1)] = 1/2, tr[ρ_12 M(3)] = 0
        assert_eq!(*c.get(5, 0), rat(1, 2));
        assert_eq!(*c.get(5, 2), int(0));
    }

    #[test]
    fn qutrit_sic_is_symmetric() {
        let povm = qutrit_sic_povm();
        assert_eq!(povm.len(), 9);
        for j in 0..9 {
            assert!((trace_re(povm.effect(j)) - 1.0 / 3.0).abs() < 1e-12);
            for k in (j + 1)..9 {
                let ov = product_trace(povm.effect(j), povm.effect(k)).re;
                assert!((ov - 1.0 / 36.0).abs() < 1e-12, "overlap ({j},{k}) = {ov}");
            }
        }
        let states = sym_states_from_povm(&povm, 9, 3).unwrap();
        assert_eq!(born(&states, &povm).unwrap(), gen_copt(9, 1).unwrap());
    }

    #[test]
    fn uniform_sets_have_exact_gram() {
        for n in 2..=4usize {
            let set = qubit_uniform_set(n).unwrap();
            let target = 1.0 / (1.0 - n as f64);
            for (j, a) in set.iter().enumerate() {
                let norm: f64 = a.r.iter().map(|x| x * x).sum();
                assert!((norm - 1.0).abs() < 1e-12);
                assert!((a.weight.unwrap() - 2.0 / n as f64).abs() < 1e-15);
                for b in set.iter().skip(j + 1) {
                    let dot: f64 = a.r.iter().zip(&b.r).map(|(x, y)| x * y).sum();
                    assert!((dot - target).abs() < 1e-12);
                }
            }
            let (states, povm) = realization_from_bloch_set(&set).unwrap();
            assert_eq!(born(&states, &povm).unwrap(), gen_copt(n, 1).unwrap());
        }
        assert!(qubit_uniform_set(5).is_err());
    }

    #[test]
    fn rebit_sets_are_planar_and_work() {
        for n in 2..=3usize {
            let set = rebit_uniform_set(n).unwrap();
            assert!(set.iter().all(|b| b.r[1] == 0.0));
            let (states, povm) = realization_from_bloch_set(&set).unwrap();
            assert!(states.iter().all(|s| s.is_real()));
            assert!(povm.is_real());
            assert_eq!(born(&states, &povm).unwrap(), gen_copt(n, 1).unwrap());
        }
        assert!(rebit_uniform_set(4).is_err());
    }

    #[test]
    fn compose_with_certificate_commutes_with_born() {
        let (states, povm) = qutrit_c42();
        let cert = build_collapse_cert(2, 4, 2).unwrap().unwrap();
        let (s2, p2) = compose_with_certificate(&states, &povm, &cert).unwrap();
        assert_eq!(born(&s2, &p2).unwrap(), gen_copt(2, 1).unwrap());
    }

    #[test]
    fn embed_preserves_born() {
        let (states, povm) = realization_from_bloch_set(&qubit_uniform_set(3).unwrap()).unwrap();
        let (s3, p3) = embed_realization(&states, &povm, 3).unwrap();
        assert_eq!(p3.dim(), 3);
        assert_eq!(born(&s3, &p3).unwrap(), gen_copt(3, 1).unwrap());
    }

    #[test]
    fn physicality_is_enforced() {
        let bad = CMat::from_fn(2, 2, |i, j| cx(if i == j { 0.6 } else { 0.0 }, 0.));
        assert!(DensityOperator::new(bad).is_err()); // trace 1.2
        let nonpsd = CMat::from_fn(2, 2, |i, j| cx(if i == j { 0.0 } else { 1.0 }, 0.));
        assert!(Povm::new(vec![nonpsd.clone(), cid(2) - nonpsd]).is_err());
    }

    #[test]
    fn operator_json_round_trip() {
        let (states, povm) = qutrit_c42();
        let s = serde_json::to_string(&states[1].to_json()).unwrap();
        let back: OperatorJson = serde_json::from_str(&s).unwrap();
        let rt = DensityOperator::from_json(&back).unwrap();
        assert!((rt.mat() - states[1].mat())
            .iter()
            .all(|z| z.norm() < 1e-15));
        let pj = serde_json::to_string(&povm.to_json()).unwrap();
        let back: PovmJson = serde_json::from_str(&pj).unwrap();
        assert_eq!(Povm::from_json(&back).unwrap().len(), 4);
    }
}
